#pragma once

// Flat key=value experiment configuration. Unset keys resolve to defaults
// that depend on the mode and preset; the resolved form is echoed verbatim
// into every report manifest and parses back to the same configuration.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "popcast/model.hpp"
#include "popcast/simulator.hpp"

namespace popcast {

enum class Mode { simulate, run, oracle, regret, bench };
enum class Preset { binary, refined };
enum class RegretLearner { adaptive, optimal, worst };

std::string to_string(Mode m);
std::string to_string(Preset p);
std::string to_string(RegretLearner l);

struct ExperimentConfig {
  Mode mode = Mode::run;
  Preset preset = Preset::binary;
  std::string traces;  // trace CSV; empty means simulate
  std::optional<std::size_t> videos;
  std::optional<int> horizon;
  std::optional<double> w;
  std::vector<double> rewards;             // correct-forecast reward per status
  std::vector<std::vector<double>> theta;  // full accuracy matrix, overrides w/rewards
  double lambda = 0.01;
  Timeliness timeliness = Timeliness::remaining_periods;
  std::vector<double> thresholds;
  double views_cap = 200000;
  double brf_cap = 5000;
  bool period_views = false;
  double A = 1.0;
  std::optional<double> p;
  double alpha = 1.0;
  std::vector<std::string> algorithms;
  std::size_t window = 500;
  std::uint64_t seed = 1;
  std::string out = "out";
  std::string world;  // world CSV; empty means a random Markov world
  std::vector<std::size_t> world_alphabets;
  double world_gap = 0.0;
  double world_min_probability = 0.0;
  ArrivalKind arrival = ArrivalKind::worst;
  int regret_age = 1;
  std::size_t regret_dim = 2;
  unsigned grid_level = 1;
  double slope_from = 0.5;
  RegretLearner regret_learner = RegretLearner::adaptive;

  // Throws ConfigError for unknown keys and malformed values.
  void set(std::string_view key, std::string_view value);

  // Fills every defaulted field and validates ranges.
  ExperimentConfig resolved() const;
  void validate() const;

  // Valid after resolution.
  RewardSpec reward_spec() const;
  SimParams sim_params() const;
  std::size_t context_dim() const;

  // Resolved key=value pairs in a fixed order.
  std::vector<std::pair<std::string, std::string>> manifest() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// '#' starts a comment; blank lines are ignored.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "config");
ExperimentConfig load_config(const std::string& path);

// Algorithm names: SF, AU, AP, VP-<age>, Perfect.
bool is_vp(std::string_view algorithm);
int vp_age(std::string_view algorithm);

}  // namespace popcast
