#include "chirp/optim.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>

#include "chirp/error.hpp"

namespace chirp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sanitize(double v) { return std::isfinite(v) ? v : kInf; }

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

// FFTW's planner is not reentrant; execution on distinct plans is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct Simplex {
  std::vector<std::vector<double>> x;
  std::vector<double> f;
};

struct Counter {
  const Objective& f;
  int evaluations = 0;
  double operator()(std::span<const double> x) {
    ++evaluations;
    return sanitize(f(x));
  }
};

Simplex initial_simplex(Counter& eval, std::span<const double> x0, const SimplexConfig& cfg) {
  const std::size_t d = x0.size();
  Simplex s;
  s.x.assign(d + 1, std::vector<double>(x0.begin(), x0.end()));
  s.f.assign(d + 1, kInf);
  s.f[0] = eval(s.x[0]);
  if (!std::isfinite(s.f[0])) {
    throw ObjectiveError("objective is not finite at the initial point");
  }
  for (std::size_t i = 0; i < d; ++i) {
    const double step = cfg.initial_steps.empty()
                            ? std::max(std::abs(x0[i]) * 0.05, 1e-4)
                            : cfg.initial_steps[i];
    s.x[i + 1][i] = x0[i] + step;
    s.f[i + 1] = eval(s.x[i + 1]);
    if (!std::isfinite(s.f[i + 1])) {
      s.x[i + 1][i] = x0[i] - step;
      s.f[i + 1] = eval(s.x[i + 1]);
    }
    if (!std::isfinite(s.f[i + 1])) {
      throw ObjectiveError("objective is not finite on the initial simplex (coordinate " +
                           std::to_string(i) + ")");
    }
  }
  return s;
}

void order(Simplex& s) {
  std::vector<std::size_t> idx(s.x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return s.f[a] < s.f[b]; });
  Simplex sorted;
  for (auto i : idx) {
    sorted.x.push_back(std::move(s.x[i]));
    sorted.f.push_back(s.f[i]);
  }
  s = std::move(sorted);
}

bool small_enough(const Simplex& s, const SimplexConfig& cfg) {
  double diameter = 0.0;
  double scale = 1.0;
  for (std::size_t i = 0; i < s.x[0].size(); ++i) scale = std::max(scale, std::abs(s.x[0][i]));
  for (std::size_t j = 1; j < s.x.size(); ++j) {
    for (std::size_t i = 0; i < s.x[0].size(); ++i) {
      diameter = std::max(diameter, std::abs(s.x[j][i] - s.x[0][i]));
    }
  }
  if (diameter <= cfg.x_tolerance) return true;
  // The value test only counts once the simplex is already small: a simplex straddling a
  // symmetric minimum has equal vertex values without being anywhere near converged.
  const double fb = s.f.front();
  const double fw = s.f.back();
  return std::abs(fw - fb) <= cfg.f_tolerance * 0.5 * (std::abs(fb) + std::abs(fw)) + 1e-300 &&
         diameter <= std::sqrt(cfg.x_tolerance) * scale;
}

std::vector<double> affine(const std::vector<double>& base, const std::vector<double>& toward,
                           double scale) {
  std::vector<double> p(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) p[i] = base[i] + scale * (toward[i] - base[i]);
  return p;
}

// One simplex descent. Returns the iteration count and whether the
// tolerance test fired before the iteration budget ran out.
std::pair<int, bool> descend(Counter& eval, Simplex& s, const SimplexConfig& cfg,
                             int budget) {
  const std::size_t d = s.x.size() - 1;
  std::vector<double> centroid(d);
  for (int iter = 0; iter < budget; ++iter) {
    order(s);
    if (small_enough(s, cfg)) return {iter, true};

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t i = 0; i < d; ++i) centroid[i] += s.x[j][i];
    }
    for (auto& c : centroid) c /= static_cast<double>(d);

    const auto& worst = s.x[d];
    auto xr = affine(centroid, worst, -cfg.reflection);
    const double fr = eval(xr);

    if (fr < s.f[0]) {
      auto xe = affine(centroid, worst, -cfg.reflection * cfg.expansion);
      const double fe = eval(xe);
      if (fe < fr) {
        s.x[d] = std::move(xe);
        s.f[d] = fe;
      } else {
        s.x[d] = std::move(xr);
        s.f[d] = fr;
      }
      continue;
    }
    if (fr < s.f[d - 1]) {
      s.x[d] = std::move(xr);
      s.f[d] = fr;
      continue;
    }
    if (fr < s.f[d]) {
      auto xc = affine(centroid, xr, cfg.contraction);
      const double fc = eval(xc);
      if (fc <= fr) {
        s.x[d] = std::move(xc);
        s.f[d] = fc;
        continue;
      }
    } else {
      auto xc = affine(centroid, worst, cfg.contraction);
      const double fc = eval(xc);
      if (fc < s.f[d]) {
        s.x[d] = std::move(xc);
        s.f[d] = fc;
        continue;
      }
    }
    for (std::size_t j = 1; j <= d; ++j) {
      s.x[j] = affine(s.x[0], s.x[j], cfg.shrink);
      s.f[j] = eval(s.x[j]);
    }
  }
  order(s);
  return {budget, false};
}

}  // namespace

void SimplexConfig::validate() const {
  if (max_iterations < 1) throw DomainError("simplex max_iterations must be positive");
  if (!(reflection > 0.0)) throw DomainError("simplex reflection must be > 0");
  if (!(expansion > 1.0)) throw DomainError("simplex expansion must be > 1");
  if (!(contraction > 0.0 && contraction < 1.0)) {
    throw DomainError("simplex contraction must lie in (0, 1)");
  }
  if (!(shrink > 0.0 && shrink < 1.0)) throw DomainError("simplex shrink must lie in (0, 1)");
  if (f_tolerance < 0.0 || x_tolerance < 0.0) throw DomainError("simplex tolerances must be >= 0");
  if (restarts < 0) throw DomainError("simplex restarts must be >= 0");
  for (double s : initial_steps) {
    if (!(s != 0.0) || !std::isfinite(s)) throw DomainError("simplex steps must be finite and nonzero");
  }
}

SimplexResult nelder_mead(const Objective& f, std::span<const double> x0,
                          const SimplexConfig& cfg) {
  cfg.validate();
  if (x0.empty()) throw DomainError("nelder_mead needs at least one dimension");
  if (!cfg.initial_steps.empty() && cfg.initial_steps.size() != x0.size()) {
    throw DomainError("simplex initial_steps size does not match the dimension");
  }

  Counter eval{f};
  SimplexResult result;
  std::vector<double> start(x0.begin(), x0.end());
  double best = kInf;
  for (int round = 0; round <= cfg.restarts; ++round) {
    Simplex s = initial_simplex(eval, start, cfg);
    const int budget = cfg.max_iterations - result.iterations;
    auto [iters, converged] = descend(eval, s, cfg, budget);
    result.iterations += iters;
    const bool improved = s.f[0] < best;
    const double gain = best - s.f[0];
    if (improved) {
      best = s.f[0];
      result.x = s.x[0];
      result.value = s.f[0];
    }
    result.converged = converged;
    if (!converged || result.iterations >= cfg.max_iterations) break;
    // Stop once a restart no longer moves the value beyond the tolerance.
    if (round > 0 && (!improved || gain <= cfg.f_tolerance * std::abs(best) + 1e-300)) break;
    start = result.x;
  }
  result.evaluations = eval.evaluations;
  return result;
}

double GridAxis::at(std::size_t i) const {
  return lower + (upper - lower) * static_cast<double>(i) / static_cast<double>(points - 1);
}

std::size_t GridSpec::size() const {
  if (axes.empty()) return 0;
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.points;
  return total;
}

std::vector<double> GridSpec::point(std::size_t flat_index) const {
  std::vector<double> x(axes.size());
  for (std::size_t k = axes.size(); k-- > 0;) {
    x[k] = axes[k].at(flat_index % axes[k].points);
    flat_index /= axes[k].points;
  }
  return x;
}

void GridSpec::validate() const {
  if (axes.empty()) throw DomainError("grid has no axes");
  for (const auto& a : axes) {
    if (a.points < 2) throw DomainError("every grid axis needs at least 2 points");
    if (!(a.upper > a.lower)) throw DomainError("grid axis upper bound must exceed lower bound");
  }
}

std::vector<GridPoint> grid_search(const Objective& f, const GridSpec& grid, std::size_t top_m) {
  grid.validate();
  const std::size_t total = grid.size();
  if (top_m == 0 || top_m > total) {
    throw DomainError("grid_search top_m must lie in [1, grid size]");
  }
  std::vector<double> values(total);
  for (std::size_t i = 0; i < total; ++i) values[i] = sanitize(f(grid.point(i)));

  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(top_m), idx.end(),
                    [&](auto a, auto b) {
                      return values[a] < values[b] || (values[a] == values[b] && a < b);
                    });
  std::vector<GridPoint> out;
  out.reserve(top_m);
  for (std::size_t k = 0; k < top_m; ++k) out.push_back({grid.point(idx[k]), values[idx[k]], idx[k]});
  return out;
}

struct DechirpScanner::Plan {
  fftw_complex* buffer = nullptr;
  fftw_plan plan = nullptr;
};

DechirpScanner::DechirpScanner(std::size_t n, std::size_t n_freq)
    : n_(n), n_freq_(n_freq), plan_(std::make_unique<Plan>()) {
  if (n == 0) throw DomainError("dechirp scan needs n >= 1");
  if (n_freq < n) throw DomainError("dechirp scan needs n_freq >= n");
  if (!is_power_of_two(n_freq)) throw DomainError("dechirp scan needs n_freq to be a power of two");
  std::lock_guard lock(fftw_planner_mutex());
  plan_->buffer = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_freq));
  plan_->plan = fftw_plan_dft_1d(static_cast<int>(n_freq), plan_->buffer, plan_->buffer,
                                 FFTW_FORWARD, FFTW_ESTIMATE);
}

DechirpScanner::~DechirpScanner() {
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan_->plan);
  fftw_free(plan_->buffer);
}

double DechirpScanner::theta1(std::size_t j) const {
  return 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_freq_);
}

void DechirpScanner::scan(const SampleSeries& y, double theta2, std::vector<double>& out) {
  scan(y.values(), theta2, out);
}

void DechirpScanner::scan(std::span<const double> y, double theta2, std::vector<double>& out) {
  if (y.size() != n_) throw DomainError("dechirp scanner was planned for a different n");
  auto* buf = plan_->buffer;
  for (std::size_t t = 1; t <= n_; ++t) {
    const double phi = reduced_phase(0.0, theta2, t);
    buf[t - 1][0] = y[t - 1] * std::cos(phi);
    buf[t - 1][1] = -y[t - 1] * std::sin(phi);
  }
  for (std::size_t m = n_; m < n_freq_; ++m) buf[m][0] = buf[m][1] = 0.0;
  fftw_execute(plan_->plan);
  // Sample t sits at FFT index t - 1; that shift only multiplies each bin by
  // a unit-modulus factor.
  out.resize(n_freq_);
  const double scale = 2.0 / static_cast<double>(n_);
  for (std::size_t j = 0; j < n_freq_; ++j) {
    out[j] = scale * (buf[j][0] * buf[j][0] + buf[j][1] * buf[j][1]);
  }
}

std::vector<double> dechirp_scan(const SampleSeries& y, double theta2, std::size_t n_freq) {
  DechirpScanner scanner(y.n(), n_freq);
  std::vector<double> out;
  scanner.scan(y, theta2, out);
  return out;
}

}  // namespace chirp
