#pragma once

// Domain vocabulary: popularity statuses, forecast actions, contexts and the
// accuracy/timeliness reward arithmetic shared by every predictor.

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace popcast {

// One level of the finite popularity status space. Index 0 is the least
// popular level; labels and view thresholds live in configuration.
struct Status {
  std::size_t index = 0;

  friend auto operator<=>(const Status&, const Status&) = default;
};

// Either Predict(status) or Wait. The canonical order is
// Predict(0) < Predict(1) < ... < Predict(|S|-1) < Wait and is used for every
// deterministic tie-break.
class Action {
 public:
  constexpr Action() = default;

  static constexpr Action predict(Status s) noexcept { return Action(false, s.index); }
  static constexpr Action wait() noexcept { return Action(true, 0); }

  constexpr bool is_wait() const noexcept { return wait_; }
  constexpr bool is_predict() const noexcept { return !wait_; }
  // Only meaningful for Predict actions.
  constexpr Status status() const noexcept { return Status{status_}; }

  // Position in the canonical order for a status space of the given size.
  constexpr std::size_t ordinal(std::size_t num_statuses) const noexcept {
    return wait_ ? num_statuses : status_;
  }
  static constexpr Action from_ordinal(std::size_t ordinal, std::size_t num_statuses) noexcept {
    return ordinal >= num_statuses ? wait() : predict(Status{ordinal});
  }

  friend constexpr bool operator==(const Action&, const Action&) = default;
  friend constexpr std::strong_ordering operator<=>(const Action& a, const Action& b) noexcept {
    if (a.wait_ != b.wait_) return a.wait_ ? std::strong_ordering::greater : std::strong_ordering::less;
    return a.status_ <=> b.status_;
  }

 private:
  constexpr Action(bool wait, std::size_t status) : wait_(wait), status_(status) {}

  bool wait_ = false;
  std::size_t status_ = 0;
};

// "predict_<i>" or "wait".
std::string to_string(Action a);
Action parse_action(std::string_view text);

// A point of the normalized context space [0,1]^d.
class ContextVector {
 public:
  ContextVector() = default;
  // Throws ContractError if any coordinate is NaN or outside [0,1].
  explicit ContextVector(std::vector<double> coords);
  ContextVector(std::initializer_list<double> coords) : ContextVector(std::vector<double>(coords)) {}

  std::size_t dim() const noexcept { return coords_.size(); }
  std::span<const double> coords() const noexcept { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }

  friend bool operator==(const ContextVector&, const ContextVector&) = default;

 private:
  std::vector<double> coords_;
};

// Timeliness reward psi(n).
enum class Timeliness {
  remaining_periods,  // psi(n) = N - n
  none,               // psi(n) = 0, accuracy only
};

std::string to_string(Timeliness t);
Timeliness parse_timeliness(std::string_view text);

// Reward U(a, s, n) = theta(a, s) + lambda * psi(n) over a horizon of N ages.
class RewardSpec {
 public:
  // accuracy[a][s]: row = predicted status, column = realized status.
  RewardSpec(int horizon, double lambda, std::vector<std::vector<double>> accuracy,
             Timeliness timeliness = Timeliness::remaining_periods);

  // theta = [[1, 0], [0, w]] over {Unpopular, Popular}.
  static RewardSpec binary(int horizon, double w, double lambda);
  // theta(a, s) = correct[s] if a == s, else 0.
  static RewardSpec diagonal(int horizon, std::vector<double> correct, double lambda);

  int horizon() const noexcept { return horizon_; }
  double lambda() const noexcept { return lambda_; }
  std::size_t num_statuses() const noexcept { return accuracy_.size(); }
  const std::vector<std::vector<double>>& accuracy_matrix() const noexcept { return accuracy_; }
  Timeliness timeliness_kind() const noexcept { return timeliness_; }
  double timeliness(int age) const;
  double u_max() const noexcept { return u_max_; }

  friend bool operator==(const RewardSpec&, const RewardSpec&) = default;

 private:
  int horizon_;
  double lambda_;
  std::vector<std::vector<double>> accuracy_;
  Timeliness timeliness_;
  double u_max_ = 0.0;
};

double accuracy_reward(Status predicted, Status realized, const RewardSpec& spec);

// U(a, s, n). Ages are 1-based.
double prediction_reward(Status predicted, Status realized, int age, const RewardSpec& spec);

// Backward recursion r_N = U(a_N, s, N); r_n = U(a_n, s, n) for a Predict,
// r_n = r_{n+1} for Wait. Wait at age N is rejected.
std::vector<double> age_reward_vector(std::span<const Action> actions, Status realized,
                                      const RewardSpec& spec);

// u / u_max, for 0 <= u <= u_max.
double normalize_reward(double u, const RewardSpec& spec);

struct PredictionOutcome {
  int forecast_age = 0;
  Status predicted;
  std::vector<double> age_rewards;
  double overall_reward = 0.0;
  double normalized_reward = 0.0;
};

// Outcome of a full action vector: forecast at the first non-Wait age.
PredictionOutcome make_outcome(std::span<const Action> actions, Status realized,
                               const RewardSpec& spec);

// Action vector that waits until `age` and then predicts `status`; used by the
// fixed-age benchmark predictors.
std::vector<Action> forecast_at(int age, Status status, int horizon);

}  // namespace popcast
