#include "chirp/asymptotics.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "chirp/error.hpp"

namespace chirp {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 1.0 && alpha <= 2.0)) throw DomainError("alpha must lie in (1, 2]");
}

void check_amplitudes(double a, double b) {
  if (!(a * a + b * b > 0.0)) throw DomainError("A and B must not both be zero");
}

Vector4 powers(std::size_t n, const Vector4& exponents) {
  if (n == 0) throw DomainError("scaling needs n >= 1");
  Vector4 out;
  for (std::size_t i = 0; i < 4; ++i) out[i] = std::pow(static_cast<double>(n), exponents[i]);
  return out;
}

std::vector<double> repeat(const Vector4& d, std::size_t p) {
  std::vector<double> out;
  out.reserve(4 * p);
  for (std::size_t k = 0; k < p; ++k) out.insert(out.end(), d.begin(), d.end());
  return out;
}

// Pairwise sum of f(r) for r in [lo, hi).
template <typename F>
double pairwise_sum(std::size_t lo, std::size_t hi, const F& f) {
  if (hi - lo <= 128) {
    double s = 0.0;
    for (std::size_t r = lo; r < hi; ++r) s += f(r);
    return s;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(lo, mid, f) + pairwise_sum(mid, hi, f);
}

}  // namespace

ScalingExponents ScalingExponents::for_alpha(double alpha) {
  check_alpha(alpha);
  const double a = alpha;
  return {{-1.0 / a, -1.0 / a, -(1.0 + a) / a, -(1.0 + 2.0 * a) / a},
          {-(a - 1.0) / a, -(a - 1.0) / a, -(2.0 * a - 1.0) / a, -(3.0 * a - 1.0) / a}};
}

Vector4 scaling_d1(std::size_t n, double alpha) {
  return powers(n, ScalingExponents::for_alpha(alpha).d1);
}

Vector4 scaling_d2(std::size_t n, double alpha) {
  return powers(n, ScalingExponents::for_alpha(alpha).d2);
}

std::vector<double> block_scaling_d1(std::size_t n, double alpha, std::size_t p) {
  return repeat(scaling_d1(n, alpha), p);
}

std::vector<double> block_scaling_d2(std::size_t n, double alpha, std::size_t p) {
  return repeat(scaling_d2(n, alpha), p);
}

Eigen::Matrix4d gamma_matrix(double a, double b) {
  const double s = a * a + b * b;
  Eigen::Matrix4d g;
  g << 1.0, 0.0, b / 2.0, b / 3.0,
       0.0, 1.0, -a / 2.0, -a / 3.0,
       b / 2.0, -a / 2.0, s / 3.0, s / 4.0,
       b / 3.0, -a / 3.0, s / 4.0, s / 5.0;
  return g;
}

Eigen::Matrix4d gamma_inverse(double a, double b) {
  check_amplitudes(a, b);
  const double s = a * a + b * b;
  Eigen::Matrix4d g;
  g << a * a + 9.0 * b * b, -8.0 * a * b, -36.0 * b, 30.0 * b,
       -8.0 * a * b, 9.0 * a * a + b * b, 36.0 * a, -30.0 * a,
       -36.0 * b, 36.0 * a, 192.0, -180.0,
       30.0 * b, -30.0 * a, -180.0, 180.0;
  return g / s;
}

Eigen::MatrixXd gamma_block(const ChirpModel& model) {
  const auto p = static_cast<Eigen::Index>(model.p());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4 * p, 4 * p);
  for (Eigen::Index k = 0; k < p; ++k) {
    const auto& c = model[static_cast<std::size_t>(k)];
    g.block<4, 4>(4 * k, 4 * k) = gamma_matrix(c.a(), c.b());
  }
  return g;
}

double g_function(const ChirpComponent& xi, std::size_t r) {
  const double phi = reduced_phase(xi.theta1(), xi.theta2(), r);
  return xi.a() * std::sin(phi) - xi.b() * std::cos(phi);
}

double k_function(const Vector4& t, std::size_t r, std::size_t n, const ChirpComponent& xi) {
  const double phi = reduced_phase(xi.theta1(), xi.theta2(), r);
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  const double g = xi.a() * s - xi.b() * c;
  const double x = static_cast<double>(r) / static_cast<double>(n);
  return -t[0] * c - t[1] * s + x * t[2] * g + x * x * t[3] * g;
}

namespace {

double truncated_tau(const Vector4& t, const ChirpComponent& xi, double alpha, std::size_t n_approx) {
  const double sum = pairwise_sum(1, n_approx + 1, [&](std::size_t r) {
    return std::pow(std::abs(k_function(t, r, n_approx, xi)), alpha);
  });
  return sum / static_cast<double>(n_approx);
}

}  // namespace

double tau(const Vector4& t, const ChirpComponent& xi, double alpha, std::size_t n_approx) {
  check_alpha(alpha);
  if (n_approx < 1000) throw DomainError("tau needs n_approx >= 1000");
  return truncated_tau(t, xi, alpha, n_approx);
}

TauEstimate tau_with_diagnostic(const Vector4& t, const ChirpComponent& xi, double alpha,
                                std::size_t n_approx) {
  TauEstimate e;
  e.value = tau(t, xi, alpha, n_approx);
  e.coarse_value = truncated_tau(t, xi, alpha, std::max<std::size_t>(1, n_approx / 10));
  e.relative_gap = e.value > 0.0 ? std::abs(e.value - e.coarse_value) / e.value : 0.0;
  return e;
}

Vector4 v_transform(const Vector4& t, double a, double b) {
  const Eigen::Vector4d v = gamma_inverse(a, b) * Eigen::Vector4d(t[0], t[1], t[2], t[3]);
  return {v(0), v(1), v(2), v(3)};
}

double limiting_cf(const Vector4& t, const ChirpComponent& xi, double alpha, double sigma,
                   std::size_t n_approx) {
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  const Vector4 v = v_transform(t, xi.a(), xi.b());
  return std::exp(-std::pow(2.0 * sigma, alpha) * tau(v, xi, alpha, n_approx));
}

double limiting_cf(const std::vector<Vector4>& ts, const ChirpModel& model, double alpha,
                   double sigma, std::size_t n_approx) {
  if (ts.size() != model.p()) throw DomainError("need one argument block per component");
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  double exponent = 0.0;
  for (std::size_t j = 0; j < model.p(); ++j) {
    const auto& c = model[j];
    exponent += tau(v_transform(ts[j], c.a(), c.b()), c, alpha, n_approx);
  }
  return std::exp(-std::pow(2.0 * sigma, alpha) * exponent);
}

std::vector<TrigLimitEntry> trig_limit_check(double theta1, double theta2, std::size_t n, int k) {
  if (k < 0 || k > 2) throw DomainError("trig_limit_check supports k in {0, 1, 2}");
  if (n < 100) throw DomainError("trig_limit_check needs n >= 100");
  const ChirpComponent probe(1.0, 0.0, theta1, theta2);

  double cc = 0, ss = 0, cs = 0, c1 = 0, s1 = 0;
  for (std::size_t t = 1; t <= n; ++t) {
    const double phi = reduced_phase(theta1, theta2, t);
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const double w = std::pow(static_cast<double>(t), k);
    cc += w * c * c;
    ss += w * s * s;
    cs += w * c * s;
    c1 += w * c;
    s1 += w * s;
  }
  const double nd = static_cast<double>(n);
  const double full = std::pow(nd, k + 1);
  const double half = std::pow(nd, k + 0.5);
  const double square_limit = 1.0 / (2.0 * (k + 1));
  const std::string suffix = "_k" + std::to_string(k);

  std::vector<TrigLimitEntry> out = {
      {"cos2" + suffix, "square", cc / full, square_limit, 0},
      {"sin2" + suffix, "square", ss / full, square_limit, 0},
      {"cossin" + suffix, "cross", cs / full, 0.0, 0},
      {"cos" + suffix, "plain", c1 / full, 0.0, 0},
      {"sin" + suffix, "plain", s1 / full, 0.0, 0},
      {"cos_sqrt" + suffix, "sqrt_scaled", c1 / half, 0.0, 0},
      {"sin_sqrt" + suffix, "sqrt_scaled", s1 / half, 0.0, 0},
  };
  for (auto& e : out) e.gap = std::abs(e.value - e.limit);
  return out;
}

Eigen::Vector4d rss_gradient(const ChirpComponent& xi, const SampleSeries& y) {
  Eigen::Vector4d grad = Eigen::Vector4d::Zero();
  for (std::size_t t = 1; t <= y.n(); ++t) {
    const double phi = reduced_phase(xi.theta1(), xi.theta2(), t);
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const double td = static_cast<double>(t);
    const double r = y.at(t) - xi.a() * c - xi.b() * s;
    const double g = xi.a() * s - xi.b() * c;
    grad += 2.0 * r * Eigen::Vector4d(-c, -s, td * g, td * td * g);
  }
  return grad;
}

Eigen::Matrix4d rss_hessian(const ChirpComponent& xi, const SampleSeries& y) {
  // Q'' = 2 sum_t (dr dr^T + r d2r) with r = y - A cos(phi) - B sin(phi).
  Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
  for (std::size_t t = 1; t <= y.n(); ++t) {
    const double phi = reduced_phase(xi.theta1(), xi.theta2(), t);
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const double t1 = static_cast<double>(t);
    const double t2 = t1 * t1;
    const double r = y.at(t) - xi.a() * c - xi.b() * s;
    const double g = xi.a() * s - xi.b() * c;
    const double dg = xi.a() * c + xi.b() * s;
    const Eigen::Vector4d dr(-c, -s, t1 * g, t2 * g);
    Eigen::Matrix4d d2r;
    d2r << 0.0, 0.0, t1 * s, t2 * s,
           0.0, 0.0, -t1 * c, -t2 * c,
           t1 * s, -t1 * c, t2 * dg, t1 * t2 * dg,
           t2 * s, -t2 * c, t1 * t2 * dg, t2 * t2 * dg;
    h += 2.0 * (dr * dr.transpose() + r * d2r);
  }
  return h;
}

HessianLimitReport hessian_limit_check(const ChirpComponent& xi, std::size_t n) {
  if (n < 100) throw DomainError("hessian_limit_check needs n >= 100");
  const SampleSeries y = synthesize(ChirpModel({xi}), n);
  const Vector4 d1 = scaling_d1(n, 2.0);
  const Vector4 d2 = scaling_d2(n, 2.0);
  const Eigen::Matrix4d h = rss_hessian(xi, y);

  HessianLimitReport rep;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) rep.scaled(i, j) = d2[i] * h(i, j) * d1[j];
  }
  rep.gamma = gamma_matrix(xi.a(), xi.b());
  rep.max_gap = (rep.scaled - rep.gamma).cwiseAbs().maxCoeff();
  return rep;
}

}  // namespace chirp
