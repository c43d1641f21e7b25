#pragma once

// Complete-information solver over an explicit finite world: a probability
// table over (x_1, ..., x_N, s) with small per-age context alphabets.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "popcast/model.hpp"

namespace popcast {

struct WorldSymbol {
  std::string name;
  std::optional<ContextVector> embedding;
};

struct WorldOutcome {
  std::vector<std::size_t> symbols;  // symbol index per age
  Status status;
  double probability = 0.0;
};

class DiscreteWorldModel {
 public:
  // Probabilities must sum to 1 within 1e-12. Symbols that never occur with
  // positive probability are recorded as unreachable.
  DiscreteWorldModel(RewardSpec spec, std::vector<std::vector<WorldSymbol>> alphabets,
                     std::vector<WorldOutcome> outcomes);

  int horizon() const noexcept { return spec_.horizon(); }
  const RewardSpec& reward_spec() const noexcept { return spec_; }
  const std::vector<WorldSymbol>& alphabet(int age) const;
  std::vector<WorldSymbol>& alphabet(int age);
  const std::vector<WorldOutcome>& outcomes() const noexcept { return outcomes_; }

  double marginal(int age, std::size_t symbol) const;
  bool reachable(int age, std::size_t symbol) const { return marginal(age, symbol) > 0.0; }
  std::optional<std::size_t> symbol_index(int age, std::string_view name) const;

 private:
  RewardSpec spec_;
  std::vector<std::vector<WorldSymbol>> alphabets_;
  std::vector<WorldOutcome> outcomes_;
  std::vector<std::vector<double>> marginals_;
};

// Deterministic policy: one action per (age, symbol); no Wait at age N.
class TabularPolicy {
 public:
  TabularPolicy() = default;
  static TabularPolicy constant(const DiscreteWorldModel& model, Action a);

  Action at(int age, std::size_t symbol) const { return table_.at(static_cast<std::size_t>(age - 1)).at(symbol); }
  void set(int age, std::size_t symbol, Action a) { table_.at(static_cast<std::size_t>(age - 1)).at(symbol) = a; }
  int horizon() const noexcept { return static_cast<int>(table_.size()); }
  const std::vector<Action>& age_map(int age) const { return table_.at(static_cast<std::size_t>(age - 1)); }

  friend bool operator==(const TabularPolicy&, const TabularPolicy&) = default;

 private:
  std::vector<std::vector<Action>> table_;
};

// Actions available at an age: every Predict, plus Wait before age N.
std::vector<Action> age_actions(const RewardSpec& spec, int age);

// Age-n reward of one outcome when `a` is taken at age n and `pi` is followed
// at later ages.
double continuation_reward(const DiscreteWorldModel& model, const WorldOutcome& outcome, int age, Action a,
                           const TabularPolicy& pi);

// Joint (unnormalized) expected reward: sum over outcomes with x_n = symbol of
// r_n(x | pi_{-n}, a) f(x). Throws DataError for zero-marginal symbols.
double expected_action_reward(const DiscreteWorldModel& model, int age, std::size_t symbol, Action a,
                              const TabularPolicy& pi);

// expected_action_reward divided by the symbol's marginal probability.
double conditional_action_reward(const DiscreteWorldModel& model, int age, std::size_t symbol, Action a,
                                 const TabularPolicy& pi);

// Per-(age, symbol) argmax of the expected action reward; ties go to the
// earliest action in canonical order. Unreachable symbols get Predict(0).
TabularPolicy best_response(const DiscreteWorldModel& model, const TabularPolicy& pi);

// N best-response iterations from the all-Predict(0) policy. Throws Error if
// one more iteration would still change the policy.
TabularPolicy solve(const DiscreteWorldModel& model);

// Expected overall reward sum_x r_1(x | pi) f(x).
double policy_value(const DiscreteWorldModel& model, const TabularPolicy& pi);

// Every deterministic policy of the model, for brute-force checks. Throws
// ContractError when there are more than `limit` of them.
std::vector<TabularPolicy> enumerate_policies(const DiscreteWorldModel& model, std::size_t limit = 4096);

// CSV with header x_1,...,x_N,s,probability; one row per outcome. Symbols are
// free-form names; s is the status index.
DiscreteWorldModel read_world(std::istream& in, const RewardSpec& spec, const std::string& source = "world");
DiscreteWorldModel load_world(const std::filesystem::path& path, const RewardSpec& spec);
void write_world(std::ostream& out, const DiscreteWorldModel& model);

struct RandomWorldOptions {
  std::vector<std::size_t> alphabet_sizes;  // one per age
  // Reject worlds where some symbol with marginal >= min_probability has an
  // optimal-action margin below min_gap (in units of u_max). 0 disables.
  double min_gap = 0.0;
  double min_probability = 0.0;
  int max_attempts = 1000;
};

// Markov-chain world: x_1 ~ Cat, x_{n+1} | x_n ~ Cat, s | x_N ~ Cat, with
// random weights. Symbols are named "<age>:<index>".
DiscreteWorldModel random_world(const RewardSpec& spec, const RandomWorldOptions& options, std::mt19937_64& rng);

// Smallest gap between the best and second-best conditional action reward
// over symbols with marginal >= min_probability, divided by u_max.
double min_action_gap(const DiscreteWorldModel& model, const TabularPolicy& optimal, double min_probability);

}  // namespace popcast
