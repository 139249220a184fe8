#include "chirp/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include "chirp/error.hpp"
#include "chirp/noise.hpp"

namespace chirp {

namespace {

struct Cell {
  double alpha;
  double sigma;
  std::size_t n;
};

std::vector<double> flatten(const std::vector<ChirpComponent>& comps) {
  std::vector<double> v;
  for (const auto& c : comps) {
    v.insert(v.end(), {c.a(), c.b(), c.theta1(), c.theta2()});
  }
  return v;
}

SampleSeries make_data(const ExperimentConfig& cfg, const Cell& cell, std::size_t r) {
  if (cell.sigma == 0.0) return synthesize(cfg.model, cell.n);
  const StableNoiseSpec spec{cell.alpha, cell.sigma,
                             replication_seed(cfg.master_seed, cell.alpha, cell.sigma, cell.n, r)};
  const auto noise = sample_sas(spec, cell.n);
  return synthesize(cfg.model, cell.n, std::span<const double>(noise));
}

SearchConfig search_for(const ExperimentConfig& cfg, const Cell& cell, std::size_t r) {
  SearchConfig s;
  s.simplex = cfg.simplex;
  if (cfg.init == InitKind::Blind) {
    s.init = cfg.blind;
  } else {
    WindowInit w;
    for (const auto& c : cfg.model.components()) w.centers.push_back({c.theta1(), c.theta2()});
    w.seed = derive_seed({replication_seed(cfg.master_seed, cell.alpha, cell.sigma, cell.n, r),
                          0x77696e646f77ULL});
    w.width = cfg.window_width;
    w.lattice = cfg.window_lattice;
    s.init = w;
  }
  return s;
}

}  // namespace

std::string to_string(InitKind k) { return k == InitKind::Blind ? "blind" : "oracle-window"; }

InitKind parse_init_kind(const std::string& s) {
  if (s == "blind") return InitKind::Blind;
  if (s == "oracle-window" || s == "window") return InitKind::OracleWindow;
  throw DomainError("unknown init mode '" + s + "' (expected blind or oracle-window)");
}

void ExperimentConfig::validate() const {
  validate_true_model(model, amplitude_bound);
  if (alphas.empty() || sigmas.empty() || ns.empty() || methods.empty()) {
    throw DomainError("experiment needs at least one alpha, sigma, n and method");
  }
  for (double a : alphas) {
    if (!(a > 1.0 && a <= 2.0)) throw DomainError("experiment alpha must lie in (1, 2]");
  }
  for (double s : sigmas) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("experiment sigma must be >= 0");
  }
  for (std::size_t n : ns) {
    if (n < 8 * model.p()) throw DomainError("experiment n must be at least 8p");
  }
  if (replications < 2) throw DomainError("experiment needs at least 2 replications");
  if (!(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0)) {
    throw DomainError("max_failure_fraction must lie in [0, 1]");
  }
  simplex.validate();
}

const SummaryRow* SummaryTable::find(Method method, double alpha, double sigma, std::size_t n,
                                     const std::string& parameter) const {
  for (const auto& r : rows) {
    if (r.method == method && r.alpha == alpha && r.sigma == sigma && r.n == n &&
        r.parameter == parameter) {
      return &r;
    }
  }
  return nullptr;
}

Summary summarize(std::span<const double> estimates, double truth) {
  if (estimates.empty()) throw DomainError("summarize needs at least one estimate");
  Summary s;
  for (double e : estimates) {
    s.ave += e;
    s.mad += std::abs(e - truth);
  }
  const auto m = static_cast<double>(estimates.size());
  s.ave /= m;
  s.mad /= m;
  return s;
}

std::vector<std::string> parameter_names(std::size_t p) {
  std::vector<std::string> out;
  for (std::size_t k = 1; k <= p; ++k) {
    const std::string suffix = p == 1 ? "" : "_" + std::to_string(k);
    for (const char* base : {"A", "B", "theta1", "theta2"}) out.push_back(base + suffix);
  }
  return out;
}

std::uint64_t replication_seed(std::uint64_t master, double alpha, double sigma, std::size_t n,
                               std::size_t replication) {
  return derive_seed({master, std::bit_cast<std::uint64_t>(alpha),
                      std::bit_cast<std::uint64_t>(sigma), static_cast<std::uint64_t>(n),
                      static_cast<std::uint64_t>(replication)});
}

SummaryTable run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  std::vector<Cell> cells;
  for (double a : cfg.alphas) {
    for (double s : cfg.sigmas) {
      for (std::size_t n : cfg.ns) cells.push_back({a, s, n});
    }
  }
  const std::size_t reps = cfg.replications;
  const std::size_t n_methods = cfg.methods.size();
  const std::size_t total = cells.size() * reps;
  // records[(cell * n_methods + m) * reps + r]
  std::vector<RawRecord> records(total * n_methods);

  auto work = [&](std::size_t task) {
    const std::size_t ci = task / reps;
    const std::size_t r = task % reps;
    const Cell& cell = cells[ci];
    const SampleSeries y = make_data(cfg, cell, r);
    const SearchConfig search = search_for(cfg, cell, r);
    for (std::size_t m = 0; m < n_methods; ++m) {
      RawRecord& rec = records[(ci * n_methods + m) * reps + r];
      rec.method = cfg.methods[m];
      rec.alpha = cell.alpha;
      rec.sigma = cell.sigma;
      rec.n = cell.n;
      rec.replication = r;
      try {
        EstimationResult est = estimate_multi(y, cfg.model.p(), cfg.methods[m], search);
        rec.components = std::move(est.components);
        rec.converged = est.converged();
      } catch (const DomainError& e) {
        rec.error = e.what();
      }
    }
  };

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t task; (task = next.fetch_add(1)) < total;) {
      work(task);
      const std::size_t d = ++done;
      if (opts.progress) {
        std::lock_guard lock(progress_mutex);
        opts.progress(d, total);
      }
    }
  };
  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(total, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  // Reduction in replication order, independent of scheduling.
  SummaryTable table;
  const auto names = parameter_names(cfg.model.p());
  const auto truth = flatten(cfg.model.components());
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    for (std::size_t m = 0; m < n_methods; ++m) {
      const auto first = records.begin() + static_cast<std::ptrdiff_t>((ci * n_methods + m) * reps);
      CellReport report{cfg.methods[m], cells[ci].alpha, cells[ci].sigma, cells[ci].n, 0, 0, false, ""};
      std::vector<std::vector<double>> columns(truth.size());
      for (auto it = first; it != first + static_cast<std::ptrdiff_t>(reps); ++it) {
        if (!it->error.empty()) {
          ++report.errors;
          continue;
        }
        if (!it->converged) ++report.not_converged;
        const auto values = flatten(it->components);
        for (std::size_t i = 0; i < values.size(); ++i) columns[i].push_back(values[i]);
      }
      const std::size_t failures = report.errors + report.not_converged;
      if (static_cast<double>(failures) > cfg.max_failure_fraction * static_cast<double>(reps) ||
          columns[0].empty()) {
        report.aborted = true;
        report.message = std::to_string(failures) + " of " + std::to_string(reps) +
                         " replications failed";
        for (auto it = first; it != first + static_cast<std::ptrdiff_t>(reps); ++it) {
          if (!it->error.empty()) {
            report.message += "; first error: " + it->error;
            break;
          }
        }
      } else {
        for (std::size_t i = 0; i < truth.size(); ++i) {
          const Summary s = summarize(columns[i], truth[i]);
          table.rows.push_back({cfg.methods[m], cells[ci].alpha, cells[ci].sigma, cells[ci].n,
                                names[i], s.ave, s.mad, failures});
        }
      }
      table.cells.push_back(std::move(report));
    }
  }
  if (opts.keep_raw) table.raw = std::move(records);
  return table;
}

double rate_check(const SummaryTable& table, const std::string& parameter, Method method,
                  double alpha, double sigma) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : table.rows) {
    if (r.method == method && r.alpha == alpha && r.sigma == sigma && r.parameter == parameter) {
      if (!(r.mad > 0.0)) throw DomainError("rate_check needs positive MAD values");
      pts.emplace_back(std::log(static_cast<double>(r.n)), std::log(r.mad));
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](auto a, auto b) { return a.first == b.first; }),
            pts.end());
  if (pts.size() < 2) throw DomainError("rate_check needs at least two distinct n values");
  double mx = 0, my = 0;
  for (auto [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0, sxx = 0;
  for (auto [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  return sxy / sxx;
}

}  // namespace chirp
