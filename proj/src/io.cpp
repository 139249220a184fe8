#include "chirp/io.hpp"

#include <charconv>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "chirp/error.hpp"

namespace chirp::io {

namespace {

using nlohmann::json;

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw DomainError("line " + std::to_string(line) + ": cannot parse number '" + s + "'");
  }
  return v;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

void reject_unknown_keys(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw DomainError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw DomainError("cannot format number");
  return std::string(buf, ptr);
}

void write_series_csv(std::ostream& os, const SampleSeries& y) {
  os << "t,y\n";
  for (std::size_t t = 1; t <= y.n(); ++t) os << t << ',' << format_double(y.at(t)) << '\n';
}

SampleSeries read_series_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != "t,y") {
    throw DomainError("sample series CSV must start with header 't,y'");
  }
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DomainError("line " + std::to_string(lineno) + ": expected 't,y'");
    const double t = parse_double(trim(line.substr(0, comma)), lineno);
    if (t != static_cast<double>(values.size() + 1)) {
      throw DomainError("line " + std::to_string(lineno) + ": time index must run 1, 2, ..., n");
    }
    const double v = parse_double(trim(line.substr(comma + 1)), lineno);
    if (!std::isfinite(v)) throw DomainError("line " + std::to_string(lineno) + ": non-finite sample");
    values.push_back(v);
  }
  if (values.empty()) throw DomainError("sample series CSV has no rows");
  return SampleSeries(std::move(values));
}

SampleSeries read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open '" + path + "'");
  return read_series_csv(in);
}

json to_json(const ChirpComponent& c) {
  return {{"A", c.a()}, {"B", c.b()}, {"theta1", c.theta1()}, {"theta2", c.theta2()}};
}

json to_json(const EstimationResult& r) {
  json comps = json::array();
  for (const auto& c : r.components) comps.push_back(to_json(c));
  json diag = json::array();
  for (const auto& s : r.diagnostics) {
    diag.push_back({{"stage", s.stage},
                    {"init_mode", s.init_mode},
                    {"iterations", s.iterations},
                    {"evaluations", s.evaluations},
                    {"converged", s.converged}});
  }
  return {{"method", to_string(r.method)},
          {"components", comps},
          {"objective", r.objective_value},
          {"diagnostics", diag}};
}

void write_summary_csv(std::ostream& os, const SummaryTable& table) {
  os << "method,alpha,sigma,n,parameter,ave,mad,failures\n";
  for (const auto& r : table.rows) {
    os << to_string(r.method) << ',' << format_double(r.alpha) << ',' << format_double(r.sigma)
       << ',' << r.n << ',' << r.parameter << ',' << format_double(r.ave) << ','
       << format_double(r.mad) << ',' << r.failures << '\n';
  }
}

SummaryTable read_summary_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != "method,alpha,sigma,n,parameter,ave,mad,failures") {
    throw DomainError("summary CSV has an unexpected header");
  }
  SummaryTable table;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(trim(cell));
    if (f.size() != 8) throw DomainError("line " + std::to_string(lineno) + ": expected 8 columns");
    SummaryRow r;
    r.method = parse_method(f[0]);
    r.alpha = parse_double(f[1], lineno);
    r.sigma = parse_double(f[2], lineno);
    r.n = static_cast<std::size_t>(parse_double(f[3], lineno));
    r.parameter = f[4];
    r.ave = parse_double(f[5], lineno);
    r.mad = parse_double(f[6], lineno);
    r.failures = static_cast<std::size_t>(parse_double(f[7], lineno));
    table.rows.push_back(std::move(r));
  }
  return table;
}

void write_raw_csv(std::ostream& os, const SummaryTable& table) {
  os << "method,alpha,sigma,n,replication,component,A,B,theta1,theta2,converged,error\n";
  for (const auto& r : table.raw) {
    const std::string head = to_string(r.method) + ',' + format_double(r.alpha) + ',' +
                             format_double(r.sigma) + ',' + std::to_string(r.n) + ',' +
                             std::to_string(r.replication) + ',';
    if (!r.error.empty()) {
      std::string err = r.error;
      std::replace(err.begin(), err.end(), ',', ';');
      std::replace(err.begin(), err.end(), '\n', ' ');
      os << head << "0,,,,,0," << err << '\n';
      continue;
    }
    for (std::size_t k = 0; k < r.components.size(); ++k) {
      const auto& c = r.components[k];
      os << head << k + 1 << ',' << format_double(c.a()) << ',' << format_double(c.b()) << ','
         << format_double(c.theta1()) << ',' << format_double(c.theta2()) << ','
         << (r.converged ? 1 : 0) << ",\n";
    }
  }
}

ChirpModel model_preset(const std::string& name) {
  if (name == "model1") return model1();
  if (name == "model2") return model2();
  throw DomainError("unknown model preset '" + name + "' (expected model1 or model2)");
}

ChirpModel model_from_json(const json& j) {
  if (j.is_string()) return model_preset(j.get<std::string>());
  if (!j.is_object() || !j.contains("components")) {
    throw DomainError("model must be a preset name or an object with 'components'");
  }
  reject_unknown_keys(j, {"components"}, "model");
  std::vector<ChirpComponent> comps;
  try {
    for (const auto& c : j.at("components")) {
      reject_unknown_keys(c, {"A", "B", "theta1", "theta2"}, "model component");
      comps.emplace_back(c.at("A").get<double>(), c.at("B").get<double>(),
                         c.at("theta1").get<double>(), c.at("theta2").get<double>());
    }
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed model: ") + e.what());
  }
  return ChirpModel(std::move(comps));
}

ExperimentConfig experiment_config_from_json(const json& j) {
  try {
    if (!j.is_object()) throw DomainError("experiment config must be a JSON object");
    reject_unknown_keys(j,
                        {"model", "alphas", "sigmas", "ns", "replications", "methods", "init",
                         "master_seed", "window", "blind", "simplex", "threads",
                         "amplitude_bound", "max_failure_fraction"},
                        "experiment config");
    ExperimentConfig cfg;
    if (j.contains("model")) {
      cfg.model = model_from_json(j.at("model"));
      cfg.model_name = j.at("model").is_string() ? j.at("model").get<std::string>() : "custom";
    }
    read_if(j, "alphas", cfg.alphas);
    read_if(j, "sigmas", cfg.sigmas);
    read_if(j, "ns", cfg.ns);
    read_if(j, "replications", cfg.replications);
    if (j.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : j.at("methods")) cfg.methods.push_back(parse_method(m.get<std::string>()));
    }
    if (j.contains("init")) cfg.init = parse_init_kind(j.at("init").get<std::string>());
    read_if(j, "master_seed", cfg.master_seed);
    if (j.contains("window")) {
      const auto& w = j.at("window");
      reject_unknown_keys(w, {"width", "lattice"}, "window");
      read_if(w, "width", cfg.window_width);
      read_if(w, "lattice", cfg.window_lattice);
    }
    if (j.contains("blind")) {
      const auto& b = j.at("blind");
      reject_unknown_keys(b, {"theta1_factor", "theta2_factor", "top_m"}, "blind");
      read_if(b, "theta1_factor", cfg.blind.theta1_factor);
      read_if(b, "theta2_factor", cfg.blind.theta2_factor);
      read_if(b, "top_m", cfg.blind.top_m);
    }
    if (j.contains("simplex")) {
      const auto& s = j.at("simplex");
      reject_unknown_keys(s,
                          {"max_iterations", "f_tolerance", "x_tolerance", "reflection",
                           "expansion", "contraction", "shrink", "restarts"},
                          "simplex");
      read_if(s, "max_iterations", cfg.simplex.max_iterations);
      read_if(s, "f_tolerance", cfg.simplex.f_tolerance);
      read_if(s, "x_tolerance", cfg.simplex.x_tolerance);
      read_if(s, "reflection", cfg.simplex.reflection);
      read_if(s, "expansion", cfg.simplex.expansion);
      read_if(s, "contraction", cfg.simplex.contraction);
      read_if(s, "shrink", cfg.simplex.shrink);
      read_if(s, "restarts", cfg.simplex.restarts);
    }
    read_if(j, "threads", cfg.threads);
    read_if(j, "amplitude_bound", cfg.amplitude_bound);
    read_if(j, "max_failure_fraction", cfg.max_failure_fraction);
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed experiment config: ") + e.what());
  }
}

ExperimentConfig read_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DomainError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return experiment_config_from_json(j);
}

}  // namespace chirp::io
