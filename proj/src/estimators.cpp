#include "chirp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include <Eigen/Dense>

#include "chirp/error.hpp"
#include "chirp/noise.hpp"

namespace chirp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kClipFactor = 3.0;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxCondition = 1e12;

bool interior(double theta) { return theta > 0.0 && theta < kPi; }
bool interior(FrequencyPair th) { return interior(th.theta1) && interior(th.theta2); }

// Maps (theta1, theta2) to (theta1 * n, theta2 * n^2) and back.
struct Scaling {
  double n;
  explicit Scaling(std::size_t samples) : n(static_cast<double>(samples)) {}
  FrequencyPair theta(std::span<const double> u, std::size_t k = 0) const {
    return {u[2 * k] / n, u[2 * k + 1] / (n * n)};
  }
  void put(FrequencyPair th, std::vector<double>& u) const {
    u.push_back(th.theta1 * n);
    u.push_back(th.theta2 * n * n);
  }
};

// cos/sin of the reduced phase for t = 1..n into caller-owned buffers.
void fill_trig(FrequencyPair th, std::size_t n, std::vector<double>& c, std::vector<double>& s) {
  c.resize(n);
  s.resize(n);
  for (std::size_t t = 1; t <= n; ++t) {
    const double phi = reduced_phase(th.theta1, th.theta2, t);
    c[t - 1] = std::cos(phi);
    s[t - 1] = std::sin(phi);
  }
}

void check_condition(double lambda_min, double lambda_max) {
  if (!(lambda_min > 0.0) || lambda_max / lambda_min > kMaxCondition) {
    throw DegenerateDesignError("design matrix X^T X is numerically singular");
  }
}

void require_interior(FrequencyPair th, const char* what) {
  if (!interior(th)) {
    throw RangeError(std::string(what) + " left (0, pi): theta1=" + std::to_string(th.theta1) +
                     " theta2=" + std::to_string(th.theta2));
  }
}

struct Refined {
  FrequencyPair theta;
  SimplexResult report;
};

// Minimizes a criterion over one (theta1, theta2) pair in scaled coordinates.
template <typename Criterion>
Refined refine_pair(const SampleSeries& y, FrequencyPair start, SimplexConfig cfg,
                    double default_step, Criterion&& criterion) {
  const Scaling sc(y.n());
  if (cfg.initial_steps.empty()) cfg.initial_steps = {default_step, default_step};
  std::vector<double> u0;
  sc.put(start, u0);
  const Objective f = [&](std::span<const double> u) {
    const FrequencyPair th = sc.theta(u);
    if (!interior(th)) return kInf;
    return criterion(th);
  };
  SimplexResult r = nelder_mead(f, u0, cfg);
  return {sc.theta(r.x), std::move(r)};
}

std::size_t next_power_of_two(std::size_t v) {
  std::size_t p = 1;
  while (p < v) p <<= 1;
  return p;
}

struct ScanHit {
  double value = -1.0;
  FrequencyPair theta;
};

// Best Fourier bin of the dechirped block; with reach > 0 only bins within
// reach of near are considered.
ScanHit best_in_row(DechirpScanner& scanner, std::span<const double> y, double theta2,
                    std::vector<double>& row, double near = 0.0, double reach = 0.0) {
  scanner.scan(y, theta2, row);
  ScanHit hit;
  // Bins 1 .. n_freq/2 - 1 are the interior of (0, pi).
  for (std::size_t j = 1; j < scanner.n_freq() / 2; ++j) {
    const double th1 = scanner.theta1(j);
    if (reach > 0.0 && std::abs(th1 - near) > reach) continue;
    if (row[j] > hit.value) hit = {row[j], {th1, theta2}};
  }
  return hit;
}

std::unique_ptr<DechirpScanner> make_scanner(std::size_t m, double theta1_factor) {
  const auto n_freq = next_power_of_two(std::max<std::size_t>(
      m, static_cast<std::size_t>(std::ceil(2.0 * theta1_factor * static_cast<double>(m)))));
  return std::make_unique<DechirpScanner>(m, n_freq);
}

// Coarse-to-fine in time. The theta2 lobe of a length-m block is about 1/m^2
// wide, so the row scan runs on a prefix short enough for the row spacing to
// resolve it; each surviving candidate is then re-centred while the prefix
// doubles up to n. Rates above pi/2 are skipped: (pi - theta1, pi - theta2)
// reproduces the same signal.
std::vector<FrequencyPair> blind_starts(const SampleSeries& y, const BlindSearch& cfg) {
  if (!(cfg.theta1_factor > 0.0) || !(cfg.theta2_factor > 0.0) || cfg.top_m == 0) {
    throw DomainError("blind search factors and top_m must be positive");
  }
  const std::size_t n = y.n();
  const double nd = static_cast<double>(n);
  // The scan only ranks candidates, so impulsive samples are clipped here to
  // keep them from flattening short-prefix spectra; refinement uses raw y.
  std::vector<double> clipped(y.values().begin(), y.values().end());
  {
    std::vector<double> mags(clipped.size());
    std::transform(clipped.begin(), clipped.end(), mags.begin(), [](double x) { return std::abs(x); });
    std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(n / 2), mags.end());
    const double limit = kClipFactor * mags[n / 2];
    if (limit > 0.0) {
      for (double& x : clipped) x = std::clamp(x, -limit, limit);
    }
  }
  const std::span<const double> v(clipped);
  const auto rows = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(cfg.theta2_factor * nd)));
  double step = 0.5 * kPi / static_cast<double>(rows);
  // A length-m block tolerates a rate error of about pi/m^2 once theta1 slides
  // along the ridge, so half the row spacing fixes the prefix length.
  std::size_t m = std::clamp<std::size_t>(static_cast<std::size_t>(std::sqrt(2.0 * kPi / step)),
                                          std::min<std::size_t>(n, 16), n);
  std::vector<double> buf;

  std::vector<ScanHit> hits;
  {
    auto scanner = make_scanner(m, cfg.theta1_factor);
    hits.reserve(rows);
    for (std::size_t k = 1; k <= rows; ++k) {
      hits.push_back(best_in_row(*scanner, v.first(m), step * static_cast<double>(k), buf));
    }
  }
  std::stable_sort(hits.begin(), hits.end(),
                   [](const ScanHit& a, const ScanHit& b) { return a.value > b.value; });
  const double md = static_cast<double>(m);
  std::vector<ScanHit> candidates;
  for (const ScanHit& h : hits) {
    if (candidates.size() == cfg.top_m) break;
    const bool near_existing = std::any_of(candidates.begin(), candidates.end(), [&](const ScanHit& c) {
      return std::abs(c.theta.theta2 - h.theta.theta2) * md * md < 2.0 * kPi &&
             std::abs((c.theta.theta1 - h.theta.theta1) +
                      (c.theta.theta2 - h.theta.theta2) * (md + 1.0)) * md < 2.0 * kPi;
    });
    if (!near_existing) candidates.push_back(h);
  }

  while (m < n) {
    const double previous = static_cast<double>(m);
    m = std::min(n, 2 * m);
    auto scanner = make_scanner(m, cfg.theta1_factor);
    const double half = 2.0 * kPi / (previous * previous);
    step = half / 16.0;
    const double reach = 4.0 * kPi / previous + half * static_cast<double>(m + 1);
    for (ScanHit& c : candidates) {
      const FrequencyPair center = c.theta;
      c.value = -1.0;
      for (int i = -16; i <= 16; ++i) {
        const double theta2 = center.theta2 + step * i;
        if (!interior(theta2)) continue;
        const ScanHit trial = best_in_row(*scanner, v.first(m), theta2, buf, center.theta1, reach);
        if (trial.value > c.value) c = trial;
      }
    }
  }

  auto scanner = make_scanner(n, cfg.theta1_factor);
  const double rate_resolution = 0.25 / (nd * nd);
  std::vector<FrequencyPair> starts;
  for (ScanHit hit : candidates) {
    for (double h = 4.0 * step; h > rate_resolution; h /= 4.0) {
      const double center = hit.theta.theta2;
      for (int i = -4; i <= 4; ++i) {
        const double theta2 = center + h * i / 4.0;
        if (i == 0 || !interior(theta2)) continue;
        const ScanHit trial = best_in_row(*scanner, v, theta2, buf, hit.theta.theta1, 4.0 * kPi / nd);
        if (trial.value > hit.value) hit = trial;
      }
    }
    const bool duplicate = std::any_of(starts.begin(), starts.end(), [&](FrequencyPair s) {
      return std::abs(s.theta1 - hit.theta.theta1) * nd < 1.0 &&
             std::abs(s.theta2 - hit.theta.theta2) * nd * nd < 1.0;
    });
    if (!duplicate) starts.push_back(hit.theta);
  }
  return starts;
}

FrequencyPair window_start(const SampleSeries& y, const WindowInit& w, std::size_t k) {
  if (k >= w.centers.size()) {
    throw DomainError("window initialization has " + std::to_string(w.centers.size()) +
                      " centers but component " + std::to_string(k + 1) + " was requested");
  }
  if (!(w.width > 0.0) || w.lattice == 0) throw DomainError("window width and lattice must be positive");
  const FrequencyPair c = w.centers[k];
  require_interior(c, "window center");
  const double nd = static_cast<double>(y.n());
  const double h1 = w.width * kPi / nd;
  const double h2 = w.width * kPi / (nd * nd);
  SplitMix64 rng(derive_seed({w.seed, k}));

  auto clamp = [](double v) { return std::clamp(v, 1e-12, kPi - 1e-12); };
  if (w.lattice == 1) {
    const double d1 = (2.0 * rng.uniform_open() - 1.0) * h1;
    const double d2 = (2.0 * rng.uniform_open() - 1.0) * h2;
    return {clamp(c.theta1 + d1), clamp(c.theta2 + d2)};
  }
  const double o1 = rng.uniform_open();
  const double o2 = rng.uniform_open();
  const double m = static_cast<double>(w.lattice);
  FrequencyPair best = c;
  double best_value = -1.0;
  for (std::size_t i = 0; i < w.lattice; ++i) {
    for (std::size_t j = 0; j < w.lattice; ++j) {
      const FrequencyPair th{clamp(c.theta1 - h1 + 2.0 * h1 * (static_cast<double>(i) + o1) / m),
                             clamp(c.theta2 - h2 + 2.0 * h2 * (static_cast<double>(j) + o2) / m)};
      const double v = periodogram(y, th);
      if (v > best_value) {
        best_value = v;
        best = th;
      }
    }
  }
  return best;
}

struct AlseStage {
  FrequencyPair theta;
  double value = 0.0;
  StageReport report;
};

AlseStage alse_stage(const SampleSeries& y, const SearchConfig& search, std::size_t k) {
  std::vector<FrequencyPair> starts;
  if (const auto* w = std::get_if<WindowInit>(&search.init)) {
    starts.push_back(window_start(y, *w, k));
  } else {
    starts = blind_starts(y, std::get<BlindSearch>(search.init));
  }
  AlseStage best;
  best.value = -kInf;
  best.report.stage = "alse:" + std::to_string(k + 1);
  best.report.init_mode = init_mode_name(search.init);
  for (FrequencyPair s : starts) {
    Refined r = refine_pair(y, s, search.simplex, 0.5,
                            [&](FrequencyPair th) { return -periodogram(y, th); });
    best.report.iterations += r.report.iterations;
    best.report.evaluations += r.report.evaluations;
    if (-r.report.value > best.value) {
      best.value = -r.report.value;
      best.theta = r.theta;
      best.report.converged = r.report.converged;
    }
  }
  require_interior(best.theta, "ALSE estimate");
  return best;
}

void sort_by_power(std::vector<ChirpComponent>& comps) {
  std::stable_sort(comps.begin(), comps.end(),
                   [](const ChirpComponent& a, const ChirpComponent& b) { return a.power() > b.power(); });
}

}  // namespace

std::string to_string(Method m) { return m == Method::LSE ? "lse" : "alse"; }

Method parse_method(const std::string& s) {
  if (s == "lse" || s == "LSE") return Method::LSE;
  if (s == "alse" || s == "ALSE") return Method::ALSE;
  throw DomainError("unknown method '" + s + "' (expected lse or alse)");
}

std::string init_mode_name(const InitMode& mode) {
  return std::holds_alternative<BlindSearch>(mode) ? "blind" : "oracle-window";
}

SimplexConfig SearchConfig::estimator_simplex() {
  SimplexConfig cfg;
  cfg.max_iterations = 2000;
  cfg.f_tolerance = 1e-13;
  cfg.x_tolerance = 1e-9;
  cfg.restarts = 3;
  return cfg;
}

bool EstimationResult::converged() const {
  return std::all_of(diagnostics.begin(), diagnostics.end(),
                     [](const StageReport& s) { return s.converged; });
}

DesignMatrix design_matrix(FrequencyPair theta, std::size_t n) {
  DesignMatrix x(static_cast<Eigen::Index>(n), 2);
  for (std::size_t t = 1; t <= n; ++t) {
    const double phi = reduced_phase(theta.theta1, theta.theta2, t);
    x(static_cast<Eigen::Index>(t - 1), 0) = std::cos(phi);
    x(static_cast<Eigen::Index>(t - 1), 1) = std::sin(phi);
  }
  return x;
}

ProfileFit profile_rss(FrequencyPair theta, const SampleSeries& y) {
  thread_local std::vector<double> c;
  thread_local std::vector<double> s;
  const std::size_t n = y.n();
  fill_trig(theta, n, c, s);
  const auto v = y.values();
  double cc = 0, ss = 0, cs = 0, yc = 0, ys = 0;
  for (std::size_t i = 0; i < n; ++i) {
    cc += c[i] * c[i];
    ss += s[i] * s[i];
    cs += c[i] * s[i];
    yc += v[i] * c[i];
    ys += v[i] * s[i];
  }
  // Closed-form 2x2 solve of the normal equations.
  const double det = cc * ss - cs * cs;
  const double half_trace = 0.5 * (cc + ss);
  const double disc = std::sqrt(std::max(0.0, half_trace * half_trace - det));
  check_condition(half_trace - disc, half_trace + disc);

  ProfileFit fit;
  fit.a = (ss * yc - cs * ys) / det;
  fit.b = (cc * ys - cs * yc) / det;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = v[i] - fit.a * c[i] - fit.b * s[i];
    sum += r * r;
  }
  fit.value = sum;
  return fit;
}

StackedFit profile_rss(std::span<const FrequencyPair> thetas, const SampleSeries& y) {
  if (thetas.empty()) throw DomainError("stacked profile needs at least one component");
  const auto n = static_cast<Eigen::Index>(y.n());
  const auto cols = static_cast<Eigen::Index>(2 * thetas.size());
  Eigen::MatrixXd x(n, cols);
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    x.middleCols(static_cast<Eigen::Index>(2 * k), 2) = design_matrix(thetas[k], y.n());
  }
  const Eigen::Map<const Eigen::VectorXd> yv(y.values().data(), n);
  const Eigen::MatrixXd gram = x.transpose() * x;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  check_condition(eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff());
  const Eigen::VectorXd psi = gram.ldlt().solve(x.transpose() * yv);

  StackedFit fit;
  fit.value = (yv - x * psi).squaredNorm();
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    fit.amplitudes.emplace_back(psi(static_cast<Eigen::Index>(2 * k)),
                                psi(static_cast<Eigen::Index>(2 * k + 1)));
  }
  return fit;
}

double periodogram(const SampleSeries& y, FrequencyPair theta) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t t = 1; t <= y.n(); ++t) {
    const double phi = reduced_phase(theta.theta1, theta.theta2, t);
    re += y.at(t) * std::cos(phi);
    im += y.at(t) * std::sin(phi);
  }
  return 2.0 / static_cast<double>(y.n()) * (re * re + im * im);
}

std::pair<double, double> alse_amplitudes(const SampleSeries& y, FrequencyPair theta) {
  double a = 0.0;
  double b = 0.0;
  for (std::size_t t = 1; t <= y.n(); ++t) {
    const double phi = reduced_phase(theta.theta1, theta.theta2, t);
    a += y.at(t) * std::cos(phi);
    b += y.at(t) * std::sin(phi);
  }
  const double scale = 2.0 / static_cast<double>(y.n());
  return {scale * a, scale * b};
}

EstimationResult lse_single(const SampleSeries& y, FrequencyPair init, const SimplexConfig& cfg) {
  require_interior(init, "LSE initial value");
  Refined r = refine_pair(y, init, cfg, 0.25, [&](FrequencyPair th) {
    try {
      return profile_rss(th, y).value;
    } catch (const DegenerateDesignError&) {
      return kInf;
    }
  });
  require_interior(r.theta, "LSE estimate");
  const ProfileFit fit = profile_rss(r.theta, y);

  EstimationResult out;
  out.method = Method::LSE;
  out.components.emplace_back(fit.a, fit.b, r.theta.theta1, r.theta.theta2);
  out.objective_value = fit.value;
  out.diagnostics.push_back(
      {"lse", "given", r.report.iterations, r.report.evaluations, r.report.converged});
  return out;
}

EstimationResult alse_single(const SampleSeries& y, const SearchConfig& search) {
  return estimate_multi(y, 1, Method::ALSE, search);
}

EstimationResult estimate_multi(const SampleSeries& y, std::size_t p, Method method,
                                const SearchConfig& search) {
  if (p == 0) throw DomainError("number of components must be at least 1");
  if (y.n() < 8 * p) {
    throw DomainError("need n >= 8p samples: n=" + std::to_string(y.n()) + " p=" + std::to_string(p));
  }

  EstimationResult alse;
  alse.method = Method::ALSE;
  std::vector<FrequencyPair> thetas;
  std::vector<double> residual(y.values().begin(), y.values().end());
  for (std::size_t k = 0; k < p; ++k) {
    const SampleSeries current(residual);
    AlseStage stage = alse_stage(current, search, k);
    thetas.push_back(stage.theta);
    alse.objective_value += stage.value;
    alse.diagnostics.push_back(stage.report);
    if (k + 1 < p) {
      const auto [a, b] = alse_amplitudes(current, stage.theta);
      for (std::size_t t = 1; t <= y.n(); ++t) {
        const double phi = reduced_phase(stage.theta.theta1, stage.theta.theta2, t);
        residual[t - 1] -= a * std::cos(phi) + b * std::sin(phi);
      }
    }
  }

  if (method == Method::ALSE) {
    for (FrequencyPair th : thetas) {
      const auto [a, b] = alse_amplitudes(y, th);
      alse.components.emplace_back(a, b, th.theta1, th.theta2);
    }
    sort_by_power(alse.components);
    return alse;
  }

  EstimationResult lse;
  lse.method = Method::LSE;
  lse.diagnostics = alse.diagnostics;
  SimplexConfig cfg = search.simplex;
  if (cfg.initial_steps.empty()) cfg.initial_steps.assign(2 * p, 0.25);

  const Scaling sc(y.n());
  std::vector<double> u0;
  for (FrequencyPair th : thetas) sc.put(th, u0);
  std::vector<FrequencyPair> trial(p);
  const Objective f = [&](std::span<const double> u) {
    for (std::size_t k = 0; k < p; ++k) {
      trial[k] = sc.theta(u, k);
      if (!interior(trial[k])) return kInf;
    }
    try {
      return p == 1 ? profile_rss(trial[0], y).value : profile_rss(trial, y).value;
    } catch (const DegenerateDesignError&) {
      return kInf;
    }
  };
  const SimplexResult r = nelder_mead(f, u0, cfg);
  lse.diagnostics.push_back(
      {"lse:joint", init_mode_name(search.init), r.iterations, r.evaluations, r.converged});

  for (std::size_t k = 0; k < p; ++k) {
    thetas[k] = sc.theta(r.x, k);
    require_interior(thetas[k], "LSE estimate");
  }
  const StackedFit fit = profile_rss(thetas, y);
  lse.objective_value = fit.value;
  for (std::size_t k = 0; k < p; ++k) {
    lse.components.emplace_back(fit.amplitudes[k].first, fit.amplitudes[k].second,
                                thetas[k].theta1, thetas[k].theta2);
  }
  sort_by_power(lse.components);
  return lse;
}

}  // namespace chirp
