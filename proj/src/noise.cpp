#include "chirp/noise.hpp"

#include <cmath>
#include <numbers>

#include "chirp/error.hpp"

namespace chirp {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::next() {
  state_ += 0x9e3779b97f4a7c15ULL;
  return mix64(state_);
}

double SplitMix64::uniform_open() {
  // (k + 0.5) / 2^53 for k in [0, 2^53) never hits 0 or 1.
  const std::uint64_t k = next() >> 11;
  return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t k : keys) h = mix64(h ^ mix64(k + 0x9e3779b97f4a7c15ULL));
  return h;
}

void StableNoiseSpec::validate() const {
  if (!(alpha > 1.0 && alpha <= 2.0)) {
    throw DomainError("stability index alpha must lie in (1, 2], got " + std::to_string(alpha));
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw DomainError("scale sigma must be positive, got " + std::to_string(sigma));
  }
}

std::vector<double> sample_sas(const StableNoiseSpec& spec, std::size_t n) {
  spec.validate();
  if (n == 0) throw DomainError("sample_sas needs n >= 1");
  const double alpha = spec.alpha;
  const double inv_alpha = 1.0 / alpha;
  const double tail_exp = (1.0 - alpha) / alpha;

  SplitMix64 rng(spec.seed);
  std::vector<double> out(n);
  for (auto& x : out) {
    const double v = std::numbers::pi * (rng.uniform_open() - 0.5);
    const double w = -std::log(rng.uniform_open());
    const double cos_v = std::cos(v);
    const double s = std::sin(alpha * v) / std::pow(cos_v, inv_alpha) *
                     std::pow(std::cos(v - alpha * v) / w, tail_exp);
    x = spec.sigma * s;
  }
  return out;
}

std::complex<double> empirical_cf(std::span<const double> sample, double t) {
  if (sample.empty()) throw DomainError("empirical_cf needs a nonempty sample");
  double re = 0.0;
  double im = 0.0;
  for (double x : sample) {
    re += std::cos(t * x);
    im += std::sin(t * x);
  }
  const auto n = static_cast<double>(sample.size());
  return {re / n, im / n};
}

double theoretical_cf(double alpha, double sigma, double t) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("alpha must lie in (0, 2]");
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  return std::exp(-std::pow(sigma, alpha) * std::pow(std::abs(t), alpha));
}

}  // namespace chirp
