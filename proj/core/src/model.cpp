#include "popcast/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "popcast/error.hpp"

namespace popcast {

std::string to_string(Action a) {
  return a.is_wait() ? std::string("wait") : "predict_" + std::to_string(a.status().index);
}

Action parse_action(std::string_view text) {
  if (text == "wait") return Action::wait();
  constexpr std::string_view prefix = "predict_";
  if (text.starts_with(prefix)) {
    std::size_t index = 0;
    auto digits = text.substr(prefix.size());
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty()) {
      return Action::predict(Status{index});
    }
  }
  throw ContractError("unrecognized action '" + std::string(text) + "'");
}

ContextVector::ContextVector(std::vector<double> coords) : coords_(std::move(coords)) {
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    const double c = coords_[i];
    if (!(c >= 0.0 && c <= 1.0)) {
      throw ContractError("context coordinate " + std::to_string(i) + " = " + std::to_string(c) +
                          " is outside [0,1]");
    }
  }
}

std::string to_string(Timeliness t) {
  switch (t) {
    case Timeliness::remaining_periods: return "remaining";
    case Timeliness::none: return "none";
  }
  return "remaining";
}

Timeliness parse_timeliness(std::string_view text) {
  if (text == "remaining") return Timeliness::remaining_periods;
  if (text == "none") return Timeliness::none;
  throw ConfigError("unknown timeliness function '" + std::string(text) + "'");
}

RewardSpec::RewardSpec(int horizon, double lambda, std::vector<std::vector<double>> accuracy,
                       Timeliness timeliness)
    : horizon_(horizon), lambda_(lambda), accuracy_(std::move(accuracy)), timeliness_(timeliness) {
  if (horizon_ < 1) throw ConfigError("horizon N must be at least 1");
  if (!(lambda_ >= 0.0) || !std::isfinite(lambda_)) throw ConfigError("lambda must be a non-negative real");
  const std::size_t size = accuracy_.size();
  if (size < 2) throw ConfigError("status space needs at least two levels");
  double theta_max = 0.0;
  for (const auto& row : accuracy_) {
    if (row.size() != size) throw ConfigError("accuracy matrix must be square");
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("accuracy rewards must be non-negative reals");
      theta_max = std::max(theta_max, v);
    }
  }
  double psi_max = 0.0;
  for (int n = 1; n <= horizon_; ++n) psi_max = std::max(psi_max, this->timeliness(n));
  u_max_ = theta_max + lambda_ * psi_max;
  if (!(u_max_ > 0.0)) throw ConfigError("maximum reward must be positive");
}

RewardSpec RewardSpec::binary(int horizon, double w, double lambda) {
  if (!(w > 0.0)) throw ConfigError("popular reward w must be positive");
  return RewardSpec(horizon, lambda, {{1.0, 0.0}, {0.0, w}});
}

RewardSpec RewardSpec::diagonal(int horizon, std::vector<double> correct, double lambda) {
  std::vector<std::vector<double>> theta(correct.size(), std::vector<double>(correct.size(), 0.0));
  for (std::size_t i = 0; i < correct.size(); ++i) theta[i][i] = correct[i];
  return RewardSpec(horizon, lambda, std::move(theta));
}

double RewardSpec::timeliness(int age) const {
  if (age < 1 || age > horizon_) {
    throw ContractError("age " + std::to_string(age) + " outside [1," + std::to_string(horizon_) + "]");
  }
  switch (timeliness_) {
    case Timeliness::remaining_periods: return static_cast<double>(horizon_ - age);
    case Timeliness::none: return 0.0;
  }
  return 0.0;
}

double accuracy_reward(Status predicted, Status realized, const RewardSpec& spec) {
  const std::size_t size = spec.num_statuses();
  if (predicted.index >= size || realized.index >= size) {
    throw ConfigError("status index outside the configured status space");
  }
  return spec.accuracy_matrix()[predicted.index][realized.index];
}

double prediction_reward(Status predicted, Status realized, int age, const RewardSpec& spec) {
  const double psi = spec.timeliness(age);
  return accuracy_reward(predicted, realized, spec) + spec.lambda() * psi;
}

std::vector<double> age_reward_vector(std::span<const Action> actions, Status realized,
                                      const RewardSpec& spec) {
  const int horizon = spec.horizon();
  if (actions.size() != static_cast<std::size_t>(horizon)) {
    throw ContractError("action vector must have exactly N entries");
  }
  if (actions.back().is_wait()) throw ContractError("Wait is not allowed at age N");
  std::vector<double> rewards(actions.size());
  for (int n = horizon; n >= 1; --n) {
    const Action a = actions[n - 1];
    rewards[n - 1] = a.is_wait() ? rewards[n] : prediction_reward(a.status(), realized, n, spec);
  }
  return rewards;
}

double normalize_reward(double u, const RewardSpec& spec) {
  if (!(u >= 0.0 && u <= spec.u_max())) {
    throw ContractError("reward " + std::to_string(u) + " outside [0, u_max]");
  }
  return u / spec.u_max();
}

PredictionOutcome make_outcome(std::span<const Action> actions, Status realized,
                               const RewardSpec& spec) {
  PredictionOutcome out;
  out.age_rewards = age_reward_vector(actions, realized, spec);
  const auto first = std::find_if(actions.begin(), actions.end(), [](Action a) { return a.is_predict(); });
  out.forecast_age = static_cast<int>(first - actions.begin()) + 1;
  out.predicted = first->status();
  out.overall_reward = out.age_rewards.front();
  out.normalized_reward = normalize_reward(out.overall_reward, spec);
  return out;
}

std::vector<Action> forecast_at(int age, Status status, int horizon) {
  if (age < 1 || age > horizon) throw ContractError("forecast age outside [1, N]");
  std::vector<Action> actions(static_cast<std::size_t>(horizon), Action::predict(status));
  for (int n = 1; n < age; ++n) actions[n - 1] = Action::wait();
  return actions;
}

}  // namespace popcast
