#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "chirp/model.hpp"
#include "chirp/optim.hpp"

namespace chirp {

enum class Method { LSE, ALSE };

std::string to_string(Method m);
Method parse_method(const std::string& s);

struct FrequencyPair {
  double theta1 = 0.0;
  double theta2 = 0.0;
};

// Coarse-to-fine periodogram scan over (0, pi)^2. The theta1 axis is an FFT
// grid of about theta1_factor * n points; the theta2 axis starts with
// theta2_factor * n points and each of the top_m rows is then zoomed in theta2
// until the spacing falls below the rate resolution 1/n^2.
struct BlindSearch {
  double theta1_factor = 4.0;
  double theta2_factor = 4.0;
  std::size_t top_m = 5;
};

// Starts component k near centers[k]: inside the box +-width*pi/n (theta1) and
// +-width*pi/n^2 (theta2), either at a seeded uniform perturbation of the
// center (lattice == 1) or at the best periodogram value on a seeded,
// randomly shifted lattice x lattice grid covering that box.
struct WindowInit {
  std::vector<FrequencyPair> centers;
  std::uint64_t seed = 0;
  double width = 1.0;
  std::size_t lattice = 3;
};

using InitMode = std::variant<BlindSearch, WindowInit>;

std::string init_mode_name(const InitMode& mode);

struct SearchConfig {
  InitMode init = BlindSearch{};
  SimplexConfig simplex = estimator_simplex();

  // Simplex settings used by the estimators. They operate in rescaled
  // coordinates (theta1 * n, theta2 * n^2), where both main lobes have width
  // of order one, so the tolerances are absolute in those units.
  static SimplexConfig estimator_simplex();
};

struct StageReport {
  std::string stage;
  std::string init_mode;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

struct EstimationResult {
  std::vector<ChirpComponent> components;
  Method method = Method::LSE;
  // LSE: residual sum of squares at the estimate. ALSE: sum over the
  // sequential stages of the maximized periodogram value.
  double objective_value = 0.0;
  std::vector<StageReport> diagnostics;

  bool converged() const;
  ChirpModel model() const { return ChirpModel(components); }
};

using DesignMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2>;

// Row t-1 holds (cos phi_t, sin phi_t).
DesignMatrix design_matrix(FrequencyPair theta, std::size_t n);

struct ProfileFit {
  double value = 0.0;
  double a = 0.0;
  double b = 0.0;
};

// Residual sum of squares with the amplitudes projected out, plus those
// amplitudes. Throws DegenerateDesignError when cond(X^T X) exceeds 1e12.
ProfileFit profile_rss(FrequencyPair theta, const SampleSeries& y);

// Stacked version for several components: value and per-component (A, B).
struct StackedFit {
  double value = 0.0;
  std::vector<std::pair<double, double>> amplitudes;
};
StackedFit profile_rss(std::span<const FrequencyPair> thetas, const SampleSeries& y);

// (2/n) |sum_t y(t) exp(-i phi_t)|^2
double periodogram(const SampleSeries& y, FrequencyPair theta);

// (2/n) sum_t y(t) (cos phi_t, sin phi_t)
std::pair<double, double> alse_amplitudes(const SampleSeries& y, FrequencyPair theta);

EstimationResult lse_single(const SampleSeries& y, FrequencyPair init,
                            const SimplexConfig& cfg = SearchConfig::estimator_simplex());

EstimationResult alse_single(const SampleSeries& y, const SearchConfig& search = {});

// p >= 1 components. ALSE is sequential: each stage maximizes the periodogram
// of what the previous stages left over. LSE refines all 2p nonlinear
// parameters jointly, starting from the sequential ALSE. Components come back
// in decreasing A^2 + B^2 order.
EstimationResult estimate_multi(const SampleSeries& y, std::size_t p, Method method,
                                const SearchConfig& search = {});

}  // namespace chirp
