#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace chirp {

// One chirp component A cos(phi) + B sin(phi), phi = theta1 t + theta2 t^2.
// Frequencies are validated to lie strictly inside (0, pi).
class ChirpComponent {
 public:
  ChirpComponent(double a, double b, double theta1, double theta2);

  double a() const { return a_; }
  double b() const { return b_; }
  double theta1() const { return theta1_; }
  double theta2() const { return theta2_; }

  // A^2 + B^2
  double power() const { return a_ * a_ + b_ * b_; }

  double value_at(std::size_t t) const;

  friend bool operator==(const ChirpComponent&, const ChirpComponent&) = default;

 private:
  double a_;
  double b_;
  double theta1_;
  double theta2_;
};

class ChirpModel {
 public:
  // Requires at least one component and pairwise distinct (theta1, theta2).
  explicit ChirpModel(std::vector<ChirpComponent> components);

  std::size_t p() const { return components_.size(); }
  const std::vector<ChirpComponent>& components() const { return components_; }
  const ChirpComponent& operator[](std::size_t k) const { return components_[k]; }

  double value_at(std::size_t t) const;

  // True when components are in strictly decreasing A^2 + B^2 order.
  bool amplitude_ordered() const;

 private:
  std::vector<ChirpComponent> components_;
};

// Checks the extra conditions placed on a model used as ground truth:
// strictly decreasing A^2 + B^2, every A^2 + B^2 > 0, and A^2 + B^2 <= bound^2.
void validate_true_model(const ChirpModel& model, double amplitude_bound = 1e6);

// Observations y(1..n). Storage is zero-based; at(t) is the only place the
// 1-based time index is translated: at(t) == values()[t - 1].
class SampleSeries {
 public:
  SampleSeries() = default;
  explicit SampleSeries(std::vector<double> values);

  std::size_t n() const { return values_.size(); }
  double at(std::size_t t) const { return values_[t - 1]; }
  std::span<const double> values() const { return values_; }

  friend bool operator==(const SampleSeries&, const SampleSeries&) = default;

 private:
  std::vector<double> values_;
};

// theta1 t + theta2 t^2 reduced into [0, 2 pi), evaluated in long double.
double reduced_phase(double theta1, double theta2, std::size_t t);

SampleSeries synthesize(const ChirpModel& model, std::size_t n,
                        std::optional<std::span<const double>> noise = std::nullopt);

// Residual sum of squares of y against the candidate model.
double rss(const ChirpModel& candidate, const SampleSeries& y);

ChirpModel model1();
ChirpModel model2();

}  // namespace chirp
