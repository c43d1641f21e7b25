#pragma once

// Test-side reference implementations. They are written from the definitions
// (forward scans, brute-force enumeration) rather than by reusing library
// code paths.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "popcast/model.hpp"
#include "popcast/oracle.hpp"

namespace testsupport {

using namespace popcast;

// theta(a,s) + lambda (N - n), straight from the reward definition.
inline double U(const RewardSpec& spec, std::size_t a, std::size_t s, int n) {
  const double psi = spec.timeliness_kind() == Timeliness::none ? 0.0 : spec.horizon() - n;
  return spec.accuracy_matrix()[a][s] + spec.lambda() * psi;
}

// r_n by forward scan: the reward of the first Predict at or after age n.
inline double forward_reward(const std::vector<Action>& actions, std::size_t s, int n, const RewardSpec& spec) {
  for (int m = n; m <= spec.horizon(); ++m) {
    const Action a = actions[static_cast<std::size_t>(m - 1)];
    if (a.is_predict()) return U(spec, a.status().index, s, m);
  }
  return std::nan("");
}

// The tiny two-age world with hand-checked optimum 1.45.
inline DiscreteWorldModel tiny_world() {
  const RewardSpec spec = RewardSpec::binary(2, 2.0, 0.1);
  std::vector<std::vector<WorldSymbol>> alphabets{{{"a", {}}, {"b", {}}}, {{"c", {}}, {"d", {}}}};
  std::vector<WorldOutcome> outcomes{
      {{0, 0}, Status{1}, 0.4}, {{0, 1}, Status{0}, 0.1}, {{1, 0}, Status{0}, 0.25}, {{1, 1}, Status{0}, 0.25}};
  return DiscreteWorldModel(spec, std::move(alphabets), std::move(outcomes));
}

// Independent policy value: sum over outcomes of r_1 under the policy.
inline double brute_value(const DiscreteWorldModel& model, const std::function<Action(int, std::size_t)>& pi) {
  const auto& spec = model.reward_spec();
  double v = 0.0;
  for (const auto& o : model.outcomes()) {
    std::vector<Action> actions;
    for (int n = 1; n <= spec.horizon(); ++n) actions.push_back(pi(n, o.symbols[static_cast<std::size_t>(n - 1)]));
    v += o.probability * forward_reward(actions, o.status.index, 1, spec);
  }
  return v;
}

// Maximum policy value over every deterministic policy, by odometer
// enumeration of the per-(age, symbol) choices.
inline double brute_optimum(const DiscreteWorldModel& model) {
  const auto& spec = model.reward_spec();
  const int N = spec.horizon();
  const std::size_t S = spec.num_statuses();
  std::vector<std::pair<int, std::size_t>> slots;
  std::vector<std::size_t> radix;
  for (int n = 1; n <= N; ++n) {
    for (std::size_t i = 0; i < model.alphabet(n).size(); ++i) {
      slots.emplace_back(n, i);
      radix.push_back(n < N ? S + 1 : S);
    }
  }
  std::vector<std::size_t> digit(slots.size(), 0);
  double best = -1.0;
  while (true) {
    auto pi = [&](int n, std::size_t sym) {
      for (std::size_t j = 0; j < slots.size(); ++j) {
        if (slots[j].first == n && slots[j].second == sym) return Action::from_ordinal(digit[j], S);
      }
      return Action::predict(Status{0});
    };
    best = std::max(best, brute_value(model, pi));
    std::size_t j = 0;
    while (j < digit.size() && ++digit[j] == radix[j]) digit[j++] = 0;
    if (j == digit.size()) break;
  }
  return best;
}

inline std::vector<Action> random_actions(std::mt19937_64& rng, int N, std::size_t S) {
  std::vector<Action> actions;
  for (int n = 1; n <= N; ++n) {
    const std::size_t choices = n < N ? S + 1 : S;
    actions.push_back(Action::from_ordinal(std::uniform_int_distribution<std::size_t>(0, choices - 1)(rng), S));
  }
  return actions;
}

inline RewardSpec random_spec(std::mt19937_64& rng, int max_horizon = 6, std::size_t max_statuses = 4) {
  const int N = std::uniform_int_distribution<int>(1, max_horizon)(rng);
  const std::size_t S = std::uniform_int_distribution<std::size_t>(2, max_statuses)(rng);
  std::vector<std::vector<double>> theta(S, std::vector<double>(S));
  for (auto& row : theta) {
    for (auto& v : row) v = std::uniform_real_distribution<double>(0.0, 5.0)(rng);
  }
  const double lambda = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
  return RewardSpec(N, lambda, theta);
}

}  // namespace testsupport
