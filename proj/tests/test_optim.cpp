#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>

#include "chirp/error.hpp"
#include "chirp/estimators.hpp"
#include "chirp/optim.hpp"

using namespace chirp;

namespace {

double rosenbrock(std::span<const double> x) {
  return (1 - x[0]) * (1 - x[0]) + 100 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]);
}

// Direct O(n) evaluation of (2/n)|sum y(t) exp(-i(theta1 t + theta2 t^2))|^2.
double direct_periodogram(const SampleSeries& y, double theta1, double theta2) {
  std::complex<long double> s = 0;
  for (std::size_t t = 1; t <= y.n(); ++t) {
    const long double lt = static_cast<long double>(t);
    const long double phi = theta1 * lt + theta2 * lt * lt;
    s += static_cast<long double>(y.at(t)) * std::complex<long double>(std::cos(phi), -std::sin(phi));
  }
  return static_cast<double>(2.0L / y.n() * std::norm(s));
}

}  // namespace

TEST_CASE("nelder_mead on a quadratic bowl") {
  const std::vector<double> x0 = {0.0, 0.0};
  const auto r = nelder_mead([](std::span<const double> x) { return (x[0] - 1) * (x[0] - 1) + (x[1] - 2) * (x[1] - 2); }, x0);
  CHECK(r.converged);
  CHECK(std::abs(r.x[0] - 1) < 1e-6);
  CHECK(std::abs(r.x[1] - 2) < 1e-6);
}

TEST_CASE("nelder_mead on |x|") {
  const std::vector<double> x0 = {5.0};
  const auto r = nelder_mead([](std::span<const double> x) { return std::abs(x[0]); }, x0);
  CHECK(std::abs(r.x[0]) < 1e-6);
}

TEST_CASE("nelder_mead on Rosenbrock") {
  const std::vector<double> x0 = {-1.2, 1.0};
  const auto r = nelder_mead(rosenbrock, x0);
  CHECK(std::abs(r.x[0] - 1) < 1e-4);
  CHECK(std::abs(r.x[1] - 1) < 1e-4);
  // Dense grid oracle around the optimum: the simplex value is no worse than
  // the best grid point.
  double grid_best = std::numeric_limits<double>::infinity();
  for (int i = -200; i <= 200; ++i) {
    for (int j = -200; j <= 200; ++j) {
      const double p[2] = {1 + 1e-3 * i, 1 + 1e-3 * j};
      grid_best = std::min(grid_best, rosenbrock(p));
    }
  }
  CHECK(r.value <= grid_best + 1e-12);
}

TEST_CASE("nelder_mead reports non-finite starts and caps") {
  const std::vector<double> x0 = {1.0, 1.0};
  CHECK_THROWS_AS(nelder_mead([](std::span<const double>) { return std::nan(""); }, x0), ObjectiveError);
  CHECK_THROWS_AS(nelder_mead([](std::span<const double> x) { return x[0] == 1.0 ? 0.0 : INFINITY; }, x0),
                  ObjectiveError);
  SimplexConfig cfg;
  cfg.max_iterations = 5;
  cfg.restarts = 0;
  const auto r = nelder_mead(rosenbrock, std::vector<double>{-1.2, 1.0}, cfg);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 5);
  CHECK_THROWS_AS(nelder_mead(rosenbrock, std::vector<double>{}), DomainError);
}

TEST_CASE("nelder_mead respects a barrier") {
  // Minimum of the unconstrained bowl is at -1; the barrier keeps x > 0.
  const auto r = nelder_mead(
      [](std::span<const double> x) { return x[0] <= 0 ? INFINITY : (x[0] + 1) * (x[0] + 1); },
      std::vector<double>{2.0});
  CHECK(r.x[0] > 0.0);
  CHECK(r.x[0] < 1e-6);
}

TEST_CASE("simplex config validation") {
  SimplexConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.expansion = 1.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = {};
  cfg.contraction = 1.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = {};
  cfg.shrink = 0.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = {};
  cfg.reflection = 0.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = {};
  cfg.initial_steps = {0.1};
  CHECK_THROWS_AS(nelder_mead(rosenbrock, std::vector<double>{0.0, 0.0}, cfg), DomainError);
}

TEST_CASE("nelder_mead is deterministic") {
  const std::vector<double> x0 = {-1.2, 1.0};
  const auto a = nelder_mead(rosenbrock, x0);
  const auto b = nelder_mead(rosenbrock, x0);
  CHECK(a.x == b.x);
  CHECK(a.value == b.value);
  CHECK(a.evaluations == b.evaluations);
}

TEST_CASE("grid_search examples") {
  GridSpec line{{GridAxis{0.0, 1.0, 101}}};
  auto top = grid_search([](std::span<const double> x) { return (x[0] - 0.5) * (x[0] - 0.5); }, line, 1);
  REQUIRE(top.size() == 1);
  CHECK(top[0].x[0] == doctest::Approx(0.5).epsilon(1e-15));

  top = grid_search([](std::span<const double>) { return 1.0; }, line, 3);
  REQUIRE(top.size() == 3);
  CHECK(top[0].index == 0);
  CHECK(top[1].index == 1);
  CHECK(top[2].index == 2);

  CHECK_THROWS_AS(grid_search([](std::span<const double>) { return 1.0; }, GridSpec{}, 1), DomainError);
  CHECK_THROWS_AS(grid_search([](std::span<const double>) { return 1.0; }, line, 102), DomainError);
}

TEST_CASE("grid points are row-major with the last axis fastest") {
  const GridSpec g{{GridAxis{0.0, 1.0, 3}, GridAxis{10.0, 20.0, 2}}};
  CHECK(g.size() == 6);
  CHECK(g.point(0) == std::vector<double>{0.0, 10.0});
  CHECK(g.point(1) == std::vector<double>{0.0, 20.0});
  CHECK(g.point(2) == std::vector<double>{0.5, 10.0});
  CHECK(g.point(5) == std::vector<double>{1.0, 20.0});
}

TEST_CASE("simplex refinement never loses to the best grid point") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double c1 = u(gen), c2 = u(gen), w = std::abs(u(gen)) + 0.1;
    const Objective f = [&](std::span<const double> x) {
      return std::sin(3 * x[0]) * std::cos(2 * x[1]) + w * ((x[0] - c1) * (x[0] - c1) + (x[1] - c2) * (x[1] - c2));
    };
    const GridSpec g{{GridAxis{-3, 3, 25}, GridAxis{-3, 3, 25}}};
    const auto top = grid_search(f, g, 3);
    for (const auto& p : top) {
      const auto r = nelder_mead(f, p.x);
      CHECK(r.value <= p.value);
    }
  }
}

TEST_CASE("dechirp scan of zero data is zero") {
  const SampleSeries y(std::vector<double>(100, 0.0));
  for (double v : dechirp_scan(y, 0.3, 128)) CHECK(v == 0.0);
}

TEST_CASE("dechirp scan peak on noiseless model1") {
  const auto y = synthesize(model1(), 250);
  const auto row = dechirp_scan(y, 0.1, 1024);
  std::size_t best = 0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] > row[best]) best = j;
  }
  CHECK(std::abs(static_cast<double>(best) - 1.5 * 1024.0 / (2.0 * std::numbers::pi)) <= 1.0);
  CHECK(row[best] == doctest::Approx(direct_periodogram(y, 2 * std::numbers::pi * best / 1024.0, 0.1)).epsilon(1e-9));
}

TEST_CASE("dechirp scan equals direct periodogram evaluation") {
  std::mt19937_64 gen(21);
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<std::size_t> len(8, 256);
  std::uniform_real_distribution<double> rate(0.0, std::numbers::pi);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = len(gen);
    std::vector<double> v(n);
    for (double& x : v) x = nd(gen);
    const SampleSeries y(v);
    std::size_t n_freq = 1;
    while (n_freq < n) n_freq <<= 1;
    n_freq <<= trial % 3;
    const double theta2 = rate(gen);
    const auto row = dechirp_scan(y, theta2, n_freq);
    std::uniform_int_distribution<std::size_t> bin(0, n_freq - 1);
    for (int k = 0; k < 10; ++k) {
      const std::size_t j = bin(gen);
      const double direct = direct_periodogram(y, 2 * std::numbers::pi * j / n_freq, theta2);
      CHECK(std::abs(row[j] - direct) <= 1e-9 * std::max(direct, 1e-3));
      // Library periodogram agrees with the oracle too.
      if (j > 0 && 2 * j < n_freq) {
        CHECK(periodogram(y, {2 * std::numbers::pi * j / n_freq, theta2}) ==
              doctest::Approx(direct).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("dechirp scan preconditions") {
  const SampleSeries y(std::vector<double>(100, 1.0));
  CHECK_THROWS_AS(dechirp_scan(y, 0.1, 64), DomainError);
  CHECK_THROWS_AS(dechirp_scan(y, 0.1, 200), DomainError);
  DechirpScanner scanner(100, 128);
  std::vector<double> out;
  CHECK_THROWS_AS(scanner.scan(SampleSeries(std::vector<double>(99, 1.0)), 0.1, out), DomainError);
}

TEST_SUITE("slow") {
  TEST_CASE("coarse periodogram grid agrees with exhaustive evaluation") {
    // A 512 x 512 grid over (0, pi)^2 at n = 250 has a rate step of ~6e-3,
    // far wider than the ~1/n^2 rate lobe, so the best cell is decided by
    // smeared sidelobes rather than by the true peak. The grid search must
    // still return exactly the exhaustive argmax.
    const auto y = synthesize(model1(), 250);
    const double pi = std::numbers::pi;
    const GridAxis axis{pi / 513, pi * 512 / 513, 512};
    const GridSpec g{{axis, axis}};
    const auto top = grid_search([&](std::span<const double> x) { return -periodogram(y, {x[0], x[1]}); }, g, 1);
    double best = -1.0;
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < 512; ++i) {
      for (std::size_t j = 0; j < 512; ++j) {
        const double v = direct_periodogram(y, axis.at(i), axis.at(j));
        if (v > best * (1 + 1e-9)) {
          best = v;
          best_index = i * 512 + j;
        }
      }
    }
    CHECK(-top[0].value == doctest::Approx(best).epsilon(1e-9));
    const auto p = g.point(best_index);
    // Either the exhaustive winner or its exact mirror image.
    const bool same = top[0].index == best_index;
    const bool mirrored = std::abs(top[0].x[0] - (pi - p[0])) < 1e-9 && std::abs(top[0].x[1] - (pi - p[1])) < 1e-9;
    CHECK((same || mirrored));
    const double step = axis.at(1) - axis.at(0);
    const bool near_truth = std::abs(top[0].x[0] - 1.5) <= step && std::abs(top[0].x[1] - 0.1) <= step;
    CHECK_FALSE(near_truth);
  }
}
