#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chirp/estimators.hpp"
#include "chirp/model.hpp"

namespace chirp {

enum class InitKind { Blind, OracleWindow };

std::string to_string(InitKind k);
InitKind parse_init_kind(const std::string& s);

struct ExperimentConfig {
  ChirpModel model = model1();
  std::string model_name = "model1";
  std::vector<double> alphas = {1.5};
  // sigma == 0 runs the cell noise-free.
  std::vector<double> sigmas = {0.1};
  std::vector<std::size_t> ns = {250};
  std::size_t replications = 500;
  std::vector<Method> methods = {Method::LSE, Method::ALSE};
  InitKind init = InitKind::OracleWindow;
  std::uint64_t master_seed = 20240101;
  double window_width = 1.0;
  std::size_t window_lattice = 3;
  BlindSearch blind;
  SimplexConfig simplex = SearchConfig::estimator_simplex();
  double amplitude_bound = 1e6;
  // Cells whose failure fraction exceeds this are aborted.
  double max_failure_fraction = 0.2;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const;
};

struct SummaryRow {
  Method method = Method::LSE;
  double alpha = 0.0;
  double sigma = 0.0;
  std::size_t n = 0;
  std::string parameter;
  double ave = 0.0;
  double mad = 0.0;
  std::size_t failures = 0;
};

struct CellReport {
  Method method = Method::LSE;
  double alpha = 0.0;
  double sigma = 0.0;
  std::size_t n = 0;
  std::size_t errors = 0;          // replications with no estimate
  std::size_t not_converged = 0;   // estimates kept but flagged
  bool aborted = false;
  std::string message;
};

// One estimate of one replication, for the optional raw dump.
struct RawRecord {
  Method method = Method::LSE;
  double alpha = 0.0;
  double sigma = 0.0;
  std::size_t n = 0;
  std::size_t replication = 0;
  std::vector<ChirpComponent> components;  // empty on error
  bool converged = false;
  std::string error;
};

struct SummaryTable {
  std::vector<SummaryRow> rows;
  std::vector<CellReport> cells;
  std::vector<RawRecord> raw;  // filled only when requested

  const SummaryRow* find(Method method, double alpha, double sigma, std::size_t n,
                         const std::string& parameter) const;
};

struct Summary {
  double ave = 0.0;
  double mad = 0.0;
};

// AVE = mean, MAD = mean |estimate - truth|.
Summary summarize(std::span<const double> estimates, double truth);

// Names of the 4p parameters in the order the estimates are reported:
// A, B, theta1, theta2 for one component, A_k, B_k, theta1_k, theta2_k otherwise.
std::vector<std::string> parameter_names(std::size_t p);

struct RunOptions {
  bool keep_raw = false;
  // Called after each finished replication with (done, total); may be empty.
  std::function<void(std::size_t, std::size_t)> progress;
};

SummaryTable run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

// Least-squares slope of log(MAD) against log(n) over the rows that match.
double rate_check(const SummaryTable& table, const std::string& parameter, Method method,
                  double alpha, double sigma);

// Seed of the noise stream of replication r in a cell. Depends only on the
// cell's values, never on its position in the configuration.
std::uint64_t replication_seed(std::uint64_t master, double alpha, double sigma, std::size_t n,
                               std::size_t replication);

}  // namespace chirp
