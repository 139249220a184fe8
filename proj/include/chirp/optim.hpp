#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "chirp/model.hpp"

namespace chirp {

using Objective = std::function<double(std::span<const double>)>;

struct SimplexConfig {
  int max_iterations = 2000;
  double f_tolerance = 1e-12;  // relative spread of vertex values
  double x_tolerance = 1e-10;  // simplex diameter (max-norm from best vertex)
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  // Fresh simplexes rebuilt around the best point after convergence; a
  // restart that cannot improve the value ends the search.
  int restarts = 2;
  // Per-coordinate initial steps. Empty means max(|x0_i| * 0.05, 1e-4).
  std::vector<double> initial_steps;

  void validate() const;
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

// Minimizes f from x0. Non-finite objective values are treated as worse than
// any finite value, so a barrier returning +inf confines the search.
SimplexResult nelder_mead(const Objective& f, std::span<const double> x0,
                          const SimplexConfig& cfg = {});

struct GridAxis {
  double lower = 0.0;
  double upper = 1.0;
  std::size_t points = 2;  // inclusive of both bounds

  double at(std::size_t i) const;
};

struct GridSpec {
  std::vector<GridAxis> axes;

  std::size_t size() const;
  // Row-major: the last axis varies fastest.
  std::vector<double> point(std::size_t flat_index) const;
  void validate() const;
};

struct GridPoint {
  std::vector<double> x;
  double value = 0.0;
  std::size_t index = 0;
};

// Best top_m grid points by ascending objective; ties keep the lower flat index.
std::vector<GridPoint> grid_search(const Objective& f, const GridSpec& grid, std::size_t top_m);

// FFT evaluation of the chirp periodogram along theta1 = 2 pi j / n_freq for a
// fixed theta2. One instance owns an FFTW plan and may be reused for many
// theta2 values; it is not safe to share one instance across threads.
class DechirpScanner {
 public:
  DechirpScanner(std::size_t n, std::size_t n_freq);
  ~DechirpScanner();
  DechirpScanner(const DechirpScanner&) = delete;
  DechirpScanner& operator=(const DechirpScanner&) = delete;

  std::size_t n_freq() const { return n_freq_; }
  double theta1(std::size_t j) const;

  // Writes I(2 pi j / n_freq, theta2) for j = 0..n_freq-1 into out.
  void scan(const SampleSeries& y, double theta2, std::vector<double>& out);
  // Same, for a raw sample block y(1..n).
  void scan(std::span<const double> y, double theta2, std::vector<double>& out);

 private:
  struct Plan;
  std::size_t n_;
  std::size_t n_freq_;
  std::unique_ptr<Plan> plan_;
};

std::vector<double> dechirp_scan(const SampleSeries& y, double theta2, std::size_t n_freq);

}  // namespace chirp
