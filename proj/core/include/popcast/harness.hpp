#pragma once

// Experiment orchestration and plot-ready CSV reports.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "popcast/config.hpp"
#include "popcast/oracle.hpp"
#include "popcast/predictors.hpp"

namespace popcast {

struct AlgorithmSummary {
  std::string algorithm;
  std::uint64_t instances = 0;
  double total_reward = 0.0;
  double perfect_reward = 0.0;
  std::optional<double> normalized_reward;  // total / perfect
  std::optional<double> true_positive_rate;
  std::optional<double> true_negative_rate;
  std::optional<double> mean_forecast_age;
  std::uint64_t fallbacks = 0;

  friend bool operator==(const AlgorithmSummary&, const AlgorithmSummary&) = default;
};

struct CurvePoint {
  std::string algorithm;
  std::uint64_t instances = 0;
  std::optional<double> window_normalized_reward;
  std::optional<double> cumulative_normalized_reward;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct ConfusionEntry {
  std::string algorithm;
  std::size_t true_status = 0;
  std::size_t predicted_status = 0;
  std::uint64_t count = 0;

  friend bool operator==(const ConfusionEntry&, const ConfusionEntry&) = default;
};

struct ForecastAgeCount {
  std::string algorithm;
  int forecast_age = 0;
  std::uint64_t count = 0;

  friend bool operator==(const ForecastAgeCount&, const ForecastAgeCount&) = default;
};

// Regret after k arrivals. instant is the expected (pseudo) regret of the
// k-th selection; cumulative_realized uses the sampled reward instead.
struct RegretPoint {
  std::uint64_t k = 0;
  double instant_regret = 0.0;
  double cumulative_regret = 0.0;
  double cumulative_realized_regret = 0.0;

  friend bool operator==(const RegretPoint&, const RegretPoint&) = default;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

struct Report {
  std::vector<AlgorithmSummary> summary;
  std::vector<CurvePoint> learning_curve;
  std::vector<ConfusionEntry> confusion;
  std::vector<ForecastAgeCount> forecast_ages;
  std::vector<RegretPoint> regret;
  KeyValues metrics;   // mode-specific scalar results
  KeyValues manifest;  // resolved configuration

  const AlgorithmSummary* find(std::string_view algorithm) const;
  std::optional<std::string> metric(std::string_view key) const;

  friend bool operator==(const Report&, const Report&) = default;
};

// Observer invoked after every processed video with the 1-based instance count.
using ProgressHook = std::function<void(std::uint64_t)>;

// Streams the corpus (generated or read from config.traces) through every
// configured algorithm in arrival order. VP models are refit prequentially:
// each trace is predicted before it joins the regression.
Report run_experiment(const ExperimentConfig& config, const ProgressHook& progress = {});

// Loads the configured world, or draws a random Markov world.
DiscreteWorldModel experiment_world(const ExperimentConfig& resolved);

struct OracleResult {
  TabularPolicy policy;
  double value = 0.0;
  Report report;
};

OracleResult oracle_experiment(const ExperimentConfig& config);

struct RegretResult {
  std::vector<RegretPoint> series;
  std::optional<double> slope;  // least squares of log R(k) on log k
  double split_exponent = 0.0;
  double theoretical_exponent = 0.0;
  Report report;
};

// Least-squares slope of log R(k) on log k over k >= from * K and R(k) > 0.
std::optional<double> fit_regret_slope(const std::vector<RegretPoint>& series, double from);

// Runs one age's learner on generated arrivals. Each arrival is mapped to the
// world symbol of its grid cell at config.grid_level (cell coordinates c_j
// give symbol sum_j c_j 2^(level j)), later ages follow the optimal policy,
// and rewards are sampled from the world conditional on that symbol.
RegretResult regret_experiment(const ExperimentConfig& config);

// Report files: summary.csv, learning_curve.csv, confusion.csv,
// forecast_ages.csv, regret.csv, metrics.csv, manifest.txt.
void emit_report(const Report& report, const std::filesystem::path& dir);
Report parse_report(const std::filesystem::path& dir);

inline constexpr const char* kSummaryHeader =
    "algorithm,instances,total_reward,perfect_reward,normalized_reward,true_positive_rate,true_negative_rate,"
    "mean_forecast_age,fallbacks";

}  // namespace popcast
