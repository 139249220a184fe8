#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "chirp/model.hpp"

namespace chirp {

using Vector4 = std::array<double, 4>;

// Exponents e such that the diagonal scalings are n^e, in (A, B, theta1, theta2) order:
//   D1 = diag(n^{-1/a}, n^{-1/a}, n^{-(1+a)/a}, n^{-(1+2a)/a})
//   D2 = diag(n^{-(a-1)/a}, n^{-(a-1)/a}, n^{-(2a-1)/a}, n^{-(3a-1)/a})
struct ScalingExponents {
  Vector4 d1;
  Vector4 d2;

  static ScalingExponents for_alpha(double alpha);
};

Vector4 scaling_d1(std::size_t n, double alpha);
Vector4 scaling_d2(std::size_t n, double alpha);

// p-fold repeats of D1 / D2 along the diagonal (4p entries).
std::vector<double> block_scaling_d1(std::size_t n, double alpha, std::size_t p);
std::vector<double> block_scaling_d2(std::size_t n, double alpha, std::size_t p);

// Limit of the scaled Hessian D2 Q'' D1 of the residual sum of squares.
Eigen::Matrix4d gamma_matrix(double a, double b);

// Closed-form inverse of gamma_matrix. Requires A^2 + B^2 > 0.
Eigen::Matrix4d gamma_inverse(double a, double b);

// Block diagonal of gamma_matrix over the model's components.
Eigen::MatrixXd gamma_block(const ChirpModel& model);

// g(r) = A sin(phi_r) - B cos(phi_r)
double g_function(const ChirpComponent& xi, std::size_t r);

// K_t(r) = -t1 cos(phi_r) - t2 sin(phi_r) + (r t3 / n) g(r) + (r^2 t4 / n^2) g(r)
double k_function(const Vector4& t, std::size_t r, std::size_t n, const ChirpComponent& xi);

// (1/N) sum_{r=1}^{N} |K_t(r)|^alpha with N = n_approx, a truncation of the
// limit tau_t(xi; alpha). Summed pairwise, so the value does not depend on
// how the index range is split.
double tau(const Vector4& t, const ChirpComponent& xi, double alpha, std::size_t n_approx = 100000);

struct TauEstimate {
  double value = 0.0;         // at n_approx
  double coarse_value = 0.0;  // at n_approx / 10
  double relative_gap = 0.0;  // |value - coarse| / value (0 when value == 0)
};
TauEstimate tau_with_diagnostic(const Vector4& t, const ChirpComponent& xi, double alpha,
                                std::size_t n_approx = 100000);

// Linear map t -> v(t; A, B), i.e. gamma_inverse(A, B) * t.
Vector4 v_transform(const Vector4& t, double a, double b);

// exp(-2^alpha sigma^alpha tau_v(xi; alpha)), v = v_transform(t, A, B).
double limiting_cf(const Vector4& t, const ChirpComponent& xi, double alpha, double sigma,
                   std::size_t n_approx = 100000);

// Joint form for several components: exp(-2^alpha sigma^alpha sum_j tau_{w_j}(eta_j)),
// ts[j] is the argument block for component j.
double limiting_cf(const std::vector<Vector4>& ts, const ChirpModel& model, double alpha,
                   double sigma, std::size_t n_approx = 100000);

struct TrigLimitEntry {
  std::string name;
  std::string kind;  // "square", "cross", "plain" or "sqrt_scaled"
  double value = 0.0;
  double limit = 0.0;
  double gap = 0.0;
};

// Weighted trigonometric averages (1/n^{k+1}) sum t^k {cos^2, sin^2, cos sin,
// cos, sin}(phi_t) and (1/n^{k+1/2}) sum t^k {cos, sin}(phi_t) against their limits.
std::vector<TrigLimitEntry> trig_limit_check(double theta1, double theta2, std::size_t n, int k);

// Gradient and Hessian of Q(A, B, theta1, theta2) = sum_t (y(t) - A cos - B sin)^2.
Eigen::Vector4d rss_gradient(const ChirpComponent& xi, const SampleSeries& y);
Eigen::Matrix4d rss_hessian(const ChirpComponent& xi, const SampleSeries& y);

struct HessianLimitReport {
  Eigen::Matrix4d scaled;  // D2 Q''(xi) D1 on noiseless data
  Eigen::Matrix4d gamma;
  double max_gap = 0.0;
};
HessianLimitReport hessian_limit_check(const ChirpComponent& xi, std::size_t n);

}  // namespace chirp
