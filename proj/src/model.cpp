#include "chirp/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "chirp/error.hpp"

namespace chirp {

namespace {

bool interior(double theta) { return theta > 0.0 && theta < std::numbers::pi; }

}  // namespace

ChirpComponent::ChirpComponent(double a, double b, double theta1, double theta2)
    : a_(a), b_(b), theta1_(theta1), theta2_(theta2) {
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("chirp component amplitudes must be finite");
  }
  if (!interior(theta1) || !interior(theta2)) {
    std::ostringstream os;
    os.precision(17);
    os << "chirp frequencies must lie in (0, pi), got theta1=" << theta1
       << " theta2=" << theta2;
    throw DomainError(os.str());
  }
}

double ChirpComponent::value_at(std::size_t t) const {
  const double phi = reduced_phase(theta1_, theta2_, t);
  return a_ * std::cos(phi) + b_ * std::sin(phi);
}

ChirpModel::ChirpModel(std::vector<ChirpComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw DomainError("chirp model needs at least one component");
  for (std::size_t i = 0; i < components_.size(); ++i) {
    for (std::size_t j = i + 1; j < components_.size(); ++j) {
      if (components_[i].theta1() == components_[j].theta1() &&
          components_[i].theta2() == components_[j].theta2()) {
        throw DomainError("chirp model components must have distinct (theta1, theta2)");
      }
    }
  }
}

double ChirpModel::value_at(std::size_t t) const {
  double sum = 0.0;
  for (const auto& c : components_) sum += c.value_at(t);
  return sum;
}

bool ChirpModel::amplitude_ordered() const {
  for (std::size_t k = 1; k < components_.size(); ++k) {
    if (!(components_[k - 1].power() > components_[k].power())) return false;
  }
  return true;
}

void validate_true_model(const ChirpModel& model, double amplitude_bound) {
  for (const auto& c : model.components()) {
    if (!(c.power() > 0.0)) throw DomainError("true model component has A = B = 0");
    if (c.power() > amplitude_bound * amplitude_bound) {
      throw DomainError("true model amplitude exceeds the configured bound");
    }
  }
  if (!model.amplitude_ordered()) {
    throw DomainError("true model components must be in strictly decreasing A^2 + B^2 order");
  }
}

SampleSeries::SampleSeries(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DomainError("sample series must be nonempty");
}

double reduced_phase(double theta1, double theta2, std::size_t t) {
  constexpr long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  const auto tl = static_cast<long double>(t);
  long double phi = std::fmod(static_cast<long double>(theta1) * tl +
                                  static_cast<long double>(theta2) * (tl * tl),
                              two_pi);
  if (phi < 0) phi += two_pi;
  return static_cast<double>(phi);
}

SampleSeries synthesize(const ChirpModel& model, std::size_t n,
                        std::optional<std::span<const double>> noise) {
  if (n == 0) throw DomainError("synthesize needs n >= 1");
  if (noise && noise->size() != n) {
    throw DomainError("noise length " + std::to_string(noise->size()) +
                      " does not match n = " + std::to_string(n));
  }
  std::vector<double> y(n);
  for (std::size_t t = 1; t <= n; ++t) {
    y[t - 1] = model.value_at(t);
    if (noise) y[t - 1] += (*noise)[t - 1];
  }
  return SampleSeries(std::move(y));
}

double rss(const ChirpModel& candidate, const SampleSeries& y) {
  double sum = 0.0;
  for (std::size_t t = 1; t <= y.n(); ++t) {
    const double r = y.at(t) - candidate.value_at(t);
    sum += r * r;
  }
  return sum;
}

ChirpModel model1() { return ChirpModel({ChirpComponent(2.5, 2.5, 1.5, 0.1)}); }

ChirpModel model2() {
  return ChirpModel({ChirpComponent(4.0, 4.0, 1.5, 0.1), ChirpComponent(3.0, 3.0, 2.5, 0.2)});
}

}  // namespace chirp
