#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "chirp/estimators.hpp"
#include "chirp/model.hpp"
#include "chirp/montecarlo.hpp"

namespace chirp::io {

// Shortest decimal string that parses back to exactly v.
std::string format_double(double v);

// CSV with header "t,y" and t = 1..n.
void write_series_csv(std::ostream& os, const SampleSeries& y);
SampleSeries read_series_csv(std::istream& is);
SampleSeries read_series_csv(const std::string& path);

nlohmann::json to_json(const EstimationResult& r);
nlohmann::json to_json(const ChirpComponent& c);

// Columns: method,alpha,sigma,n,parameter,ave,mad,failures
void write_summary_csv(std::ostream& os, const SummaryTable& table);
SummaryTable read_summary_csv(std::istream& is);
// Columns: method,alpha,sigma,n,replication,component,A,B,theta1,theta2,converged,error
void write_raw_csv(std::ostream& os, const SummaryTable& table);

// Strict key-per-field schema; unknown keys are rejected.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig read_experiment_config(const std::string& path);

ChirpModel model_from_json(const nlohmann::json& j);
ChirpModel model_preset(const std::string& name);

}  // namespace chirp::io
