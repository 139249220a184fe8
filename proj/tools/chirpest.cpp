// chirpest: estimate chirp parameters in symmetric alpha-stable noise.
//
//   chirpest synth --model model1 --n 250 --alpha 1.5 --sigma 0.1 --seed 7 --out y.csv
//   chirpest estimate --in y.csv --method alse --components 1 --init blind
//   chirpest experiment --config table1.json --out summary.csv [--raw raw.csv]
//   chirpest validate-noise --alpha 1.5 --sigma 0.1 --n 100000
//   chirpest asymptotics --model model1 --alpha 1.5 --sigma 0.1
//   chirpest rates --in summary.csv --parameter theta1 --method lse --alpha 1.9 --sigma 0.1
//
// Exit status: 0 success, 1 domain error, 2 usage error.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "chirp/asymptotics.hpp"
#include "chirp/error.hpp"
#include "chirp/estimators.hpp"
#include "chirp/io.hpp"
#include "chirp/montecarlo.hpp"
#include "chirp/noise.hpp"

namespace {

using nlohmann::json;

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

// Writes to the named file, or standard output when the path is empty.
template <typename Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty()) {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw chirp::DomainError("cannot write '" + path + "'");
  write(out);
  if (!out) throw chirp::DomainError("failed writing '" + path + "'");
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw CLI::ValidationError("bad number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

struct SynthArgs {
  std::string model = "model1";
  std::size_t n = 250;
  double alpha = 2.0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

struct EstimateArgs {
  std::string in;
  std::string method = "lse";
  std::size_t components = 1;
  std::string init = "blind";
  std::string model = "model1";
  std::uint64_t seed = 0;
  double window_width = 1.0;
  std::size_t window_lattice = 3;
  std::size_t top_m = 5;
  std::string out;
};

struct ExperimentArgs {
  std::string config;
  std::string out;
  std::string raw;
  std::optional<std::size_t> replications;
  std::optional<std::uint64_t> seed;
};

struct NoiseArgs {
  double alpha = 1.5;
  double sigma = 1.0;
  std::size_t n = 100000;
  std::uint64_t seed = 0;
  std::string ts = "0.5,1,2";
  std::string out;
};

struct AsymArgs {
  std::string model = "model1";
  double alpha = 1.5;
  double sigma = 0.1;
  std::size_t n = 250;
  std::size_t n_approx = 100000;
  std::string t = "1,0,0,0";
};

struct RatesArgs {
  std::string in;
  std::string parameter = "theta1";
  std::string method = "lse";
  double alpha = 1.9;
  double sigma = 0.1;
};

int run_synth(const SynthArgs& a) {
  const chirp::ChirpModel model = chirp::io::model_preset(a.model);
  std::optional<std::vector<double>> noise;
  if (a.sigma > 0.0) noise = chirp::sample_sas({a.alpha, a.sigma, a.seed}, a.n);
  const auto y = noise ? chirp::synthesize(model, a.n, std::span<const double>(*noise))
                       : chirp::synthesize(model, a.n);
  emit(a.out, [&](std::ostream& os) { chirp::io::write_series_csv(os, y); });
  return 0;
}

chirp::InitMode parse_init(const EstimateArgs& a) {
  if (a.init == "blind") {
    chirp::BlindSearch b;
    b.top_m = a.top_m;
    return b;
  }
  chirp::WindowInit w;
  w.seed = a.seed;
  w.width = a.window_width;
  w.lattice = a.window_lattice;
  if (a.init == "window") {
    for (const auto& c : chirp::io::model_preset(a.model).components()) {
      w.centers.push_back({c.theta1(), c.theta2()});
    }
    return w;
  }
  if (a.init.rfind("window:", 0) == 0) {
    const auto values = parse_list(a.init.substr(7));
    if (values.empty() || values.size() % 2 != 0) {
      throw CLI::ValidationError("window centers must be theta1,theta2 pairs");
    }
    for (std::size_t i = 0; i < values.size(); i += 2) w.centers.push_back({values[i], values[i + 1]});
    return w;
  }
  throw CLI::ValidationError("--init must be blind, window, or window:t1,t2,...");
}

int run_estimate(const EstimateArgs& a) {
  const chirp::SampleSeries y = chirp::io::read_series_csv(a.in);
  chirp::SearchConfig search;
  search.init = parse_init(a);
  const auto result = chirp::estimate_multi(y, a.components, chirp::parse_method(a.method), search);
  emit(a.out, [&](std::ostream& os) { os << chirp::io::to_json(result).dump(2) << '\n'; });
  return 0;
}

int run_experiment(const ExperimentArgs& a, unsigned threads, bool verbose) {
  chirp::ExperimentConfig cfg = chirp::io::read_experiment_config(a.config);
  if (a.replications) cfg.replications = *a.replications;
  if (a.seed) cfg.master_seed = *a.seed;
  if (threads) cfg.threads = threads;
  cfg.validate();

  chirp::RunOptions opts;
  opts.keep_raw = !a.raw.empty();
  if (verbose) {
    opts.progress = [](std::size_t done, std::size_t total) {
      if (done == total || done % 50 == 0) std::cerr << "replication " << done << "/" << total << "\n";
    };
  }
  const auto table = chirp::run_experiment(cfg, opts);
  for (const auto& c : table.cells) {
    if (c.aborted) {
      std::cerr << "warning: cell method=" << chirp::to_string(c.method) << " alpha=" << c.alpha
                << " sigma=" << c.sigma << " n=" << c.n << " aborted: " << one_line(c.message) << "\n";
    }
  }
  emit(a.out, [&](std::ostream& os) { chirp::io::write_summary_csv(os, table); });
  if (!a.raw.empty()) emit(a.raw, [&](std::ostream& os) { chirp::io::write_raw_csv(os, table); });
  return 0;
}

int run_validate_noise(const NoiseArgs& a) {
  const auto sample = chirp::sample_sas({a.alpha, a.sigma, a.seed}, a.n);
  const auto ts = parse_list(a.ts);
  emit(a.out, [&](std::ostream& os) {
    using chirp::io::format_double;
    os << "t,empirical_re,empirical_im,theoretical,abs_error\n";
    for (double t : ts) {
      const auto e = chirp::empirical_cf(sample, t);
      const double th = chirp::theoretical_cf(a.alpha, a.sigma, t);
      os << format_double(t) << ',' << format_double(e.real()) << ',' << format_double(e.imag())
         << ',' << format_double(th) << ',' << format_double(std::abs(e - th)) << '\n';
    }
  });
  return 0;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

int run_asymptotics(const AsymArgs& a) {
  const chirp::ChirpModel model = chirp::io::model_preset(a.model);
  const auto tv = parse_list(a.t);
  if (tv.size() != 4) throw CLI::ValidationError("--t needs four comma-separated values");
  const chirp::Vector4 t{tv[0], tv[1], tv[2], tv[3]};

  json comps = json::array();
  for (const auto& c : model.components()) {
    const auto tau = chirp::tau_with_diagnostic(chirp::v_transform(t, c.a(), c.b()), c, a.alpha, a.n_approx);
    comps.push_back({{"component", chirp::io::to_json(c)},
                     {"gamma", matrix_json(chirp::gamma_matrix(c.a(), c.b()))},
                     {"gamma_inverse", matrix_json(chirp::gamma_inverse(c.a(), c.b()))},
                     {"v", chirp::v_transform(t, c.a(), c.b())},
                     {"tau_v", tau.value},
                     {"tau_v_coarse", tau.coarse_value},
                     {"tau_v_relative_gap", tau.relative_gap},
                     {"limiting_cf", chirp::limiting_cf(t, c, a.alpha, a.sigma, a.n_approx)}});
  }
  const json out = {{"model", a.model},
                    {"alpha", a.alpha},
                    {"sigma", a.sigma},
                    {"n", a.n},
                    {"n_approx", a.n_approx},
                    {"t", t},
                    {"d1", chirp::scaling_d1(a.n, a.alpha)},
                    {"d2", chirp::scaling_d2(a.n, a.alpha)},
                    {"components", comps}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

int run_rates(const RatesArgs& a) {
  std::ifstream in(a.in);
  if (!in) throw chirp::DomainError("cannot open '" + a.in + "'");
  const auto table = chirp::io::read_summary_csv(in);
  const double slope = chirp::rate_check(table, a.parameter, chirp::parse_method(a.method), a.alpha, a.sigma);
  std::cout << "parameter,method,alpha,sigma,slope\n"
            << a.parameter << ',' << a.method << ',' << chirp::io::format_double(a.alpha) << ','
            << chirp::io::format_double(a.sigma) << ',' << chirp::io::format_double(slope) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chirp parameter estimation in symmetric alpha-stable noise"};
  app.require_subcommand(1);
  unsigned threads = 0;
  bool verbose = false;
  app.add_option("--threads", threads, "Worker thread cap (0: hardware)");
  app.add_flag("-v,--verbose", verbose, "Progress on standard error");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Synthesize a chirp series, optionally with SaS noise");
  s->add_option("--model", synth.model, "model1 or model2")->capture_default_str();
  s->add_option("--n", synth.n, "Sample count")->required()->check(CLI::PositiveNumber);
  s->add_option("--alpha", synth.alpha, "Stability index in (1, 2]")->capture_default_str();
  s->add_option("--sigma", synth.sigma, "Noise scale (0: noiseless)")->capture_default_str();
  s->add_option("--seed", synth.seed, "Noise seed")->capture_default_str();
  s->add_option("--out", synth.out, "Output CSV (default: stdout)");

  EstimateArgs est;
  auto* e = app.add_subcommand("estimate", "Estimate chirp parameters from a t,y CSV");
  e->add_option("--in", est.in, "Input CSV")->required()->check(CLI::ExistingFile);
  e->add_option("--method", est.method, "lse or alse")->check(CLI::IsMember({"lse", "alse"}))->capture_default_str();
  e->add_option("--components", est.components, "Number of chirp components p")->check(CLI::PositiveNumber)->capture_default_str();
  e->add_option("--init", est.init, "blind | window | window:t1,t2[,t1,t2...]")->capture_default_str();
  e->add_option("--model", est.model, "Preset whose frequencies center --init window")->capture_default_str();
  e->add_option("--seed", est.seed, "Seed of the window perturbation")->capture_default_str();
  e->add_option("--window-width", est.window_width, "Window half-width in units of pi/n, pi/n^2")->capture_default_str();
  e->add_option("--window-lattice", est.window_lattice, "Lattice points per window axis (1: single perturbed start)")->capture_default_str();
  e->add_option("--top-m", est.top_m, "Blind-search refinement starts")->capture_default_str();
  e->add_option("--out", est.out, "Output JSON (default: stdout)");

  ExperimentArgs exp;
  auto* x = app.add_subcommand("experiment", "Run a Monte Carlo experiment from a JSON config");
  x->add_option("--config", exp.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  x->add_option("--out", exp.out, "Summary CSV (default: stdout)");
  x->add_option("--raw", exp.raw, "Per-replication CSV dump");
  x->add_option("--replications", exp.replications, "Override replication count");
  x->add_option("--seed", exp.seed, "Override master seed");

  NoiseArgs noise;
  auto* nz = app.add_subcommand("validate-noise", "Compare empirical and theoretical SaS characteristic functions");
  nz->add_option("--alpha", noise.alpha)->capture_default_str();
  nz->add_option("--sigma", noise.sigma)->capture_default_str();
  nz->add_option("--n", noise.n)->check(CLI::PositiveNumber)->capture_default_str();
  nz->add_option("--seed", noise.seed)->capture_default_str();
  nz->add_option("--t", noise.ts, "Comma-separated arguments")->capture_default_str();
  nz->add_option("--out", noise.out, "Output CSV (default: stdout)");

  AsymArgs asym;
  auto* as = app.add_subcommand("asymptotics", "Print scaling matrices, Gamma, tau and limiting CF as JSON");
  as->add_option("--model", asym.model)->capture_default_str();
  as->add_option("--alpha", asym.alpha)->capture_default_str();
  as->add_option("--sigma", asym.sigma)->capture_default_str();
  as->add_option("--n", asym.n, "Sample size for D1/D2")->check(CLI::PositiveNumber)->capture_default_str();
  as->add_option("--n-approx", asym.n_approx, "Truncation of the tau limit")->check(CLI::PositiveNumber)->capture_default_str();
  as->add_option("--t", asym.t, "CF argument t1,t2,t3,t4")->capture_default_str();

  RatesArgs rates;
  auto* rt = app.add_subcommand("rates", "Fit the log-log slope of MAD against n");
  rt->add_option("--in", rates.in, "Summary CSV")->required()->check(CLI::ExistingFile);
  rt->add_option("--parameter", rates.parameter)->capture_default_str();
  rt->add_option("--method", rates.method)->check(CLI::IsMember({"lse", "alse"}))->capture_default_str();
  rt->add_option("--alpha", rates.alpha)->capture_default_str();
  rt->add_option("--sigma", rates.sigma)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*s) return run_synth(synth);
    if (*e) return run_estimate(est);
    if (*x) return run_experiment(exp, threads, verbose);
    if (*nz) return run_validate_noise(noise);
    if (*as) return run_asymptotics(asym);
    if (*rt) return run_rates(rates);
  } catch (const CLI::Error& err) {
    std::cerr << "error: usage: " << one_line(err.what()) << "\n";
    return 2;
  } catch (const chirp::DomainError& err) {
    std::cerr << "error: domain: " << one_line(err.what()) << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: domain: " << one_line(err.what()) << "\n";
    return 1;
  }
  return 2;
}
