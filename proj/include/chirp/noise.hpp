#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace chirp {

// SplitMix64: output k is a bijective mix of seed + k * golden gamma, so a
// stream is fully determined by its seed and position with no shared state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  // Uniform on the open interval (0, 1), 53 random bits.
  double uniform_open();

 private:
  std::uint64_t state_;
};

std::uint64_t mix64(std::uint64_t z);

// Folds a sequence of keys into a single stream seed, e.g.
// derive_seed({master, cell, replication}).
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> keys);

struct StableNoiseSpec {
  double alpha = 2.0;  // (1, 2]
  double sigma = 1.0;  // > 0
  std::uint64_t seed = 0;

  void validate() const;
};

// n i.i.d. symmetric alpha-stable draws with characteristic function
// exp(-sigma^alpha |t|^alpha), via the Chambers-Mallows-Stuck transform.
std::vector<double> sample_sas(const StableNoiseSpec& spec, std::size_t n);

std::complex<double> empirical_cf(std::span<const double> sample, double t);

double theoretical_cf(double alpha, double sigma, double t);

}  // namespace chirp
