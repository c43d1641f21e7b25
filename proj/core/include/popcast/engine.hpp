#pragma once

// Online forecaster: one adaptive-partition learner per age. Each video is
// observed age by age; the first non-Wait selection is the issued forecast.
// When the status is realized every action of every age is credited with the
// reward it would have earned (the virtual update), which is possible because
// forecasts never influence how a video propagates.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "popcast/model.hpp"
#include "popcast/partition.hpp"

namespace popcast {

// Split exponent balancing the regret terms for uniformly spread arrivals:
// p = (3 alpha + sqrt(9 alpha^2 + 8 alpha d)) / 2.
double worst_case_split_exponent(double alpha, std::size_t dim);
// p = 3 alpha for arrivals concentrated in one small cube.
double best_case_split_exponent(double alpha);
// Regret growth exponent guaranteed with the worst-case split exponent.
double worst_case_regret_exponent(double alpha, std::size_t dim);
inline constexpr double kBestCaseRegretExponent = 2.0 / 3.0;

struct LearnerParams {
  std::vector<std::size_t> dims;  // context dimension per age, size N
  double A = 1.0;
  std::optional<double> p;        // default: worst_case_split_exponent(alpha, d_n)
  double alpha = 1.0;
};

// Work counters; per video they grow by exactly sum_n |actions_n| for both
// selections and updates.
struct OpCounters {
  std::uint64_t observations = 0;
  std::uint64_t action_evaluations = 0;
  std::uint64_t estimate_updates = 0;
  std::uint64_t splits = 0;
  std::uint64_t finalized = 0;
};

// Frozen copy of the learned per-age policies.
class PolicyView {
 public:
  Action operator()(int age, const ContextVector& x) const;
  int horizon() const noexcept { return static_cast<int>(learners_->size()); }

 private:
  friend class ForecastEngine;
  explicit PolicyView(std::shared_ptr<const std::vector<PartitionState>> learners)
      : learners_(std::move(learners)) {}

  std::shared_ptr<const std::vector<PartitionState>> learners_;
};

class ForecastEngine {
 public:
  ForecastEngine(RewardSpec spec, LearnerParams params);

  // Selects the action for video `video` at `age`. Ages of one video must be
  // observed in order 1..N; different videos may interleave.
  Action observe(std::uint64_t video, int age, const ContextVector& x);

  // Realizes the status of a fully observed video, applies the virtual update
  // at every age and returns the outcome of the selected actions.
  PredictionOutcome finalize(std::uint64_t video, Status realized);

  PolicyView policy_snapshot() const;

  const RewardSpec& reward_spec() const noexcept { return spec_; }
  const LearnerParams& params() const noexcept { return params_; }
  int horizon() const noexcept { return spec_.horizon(); }
  double split_exponent(int age) const { return learner(age).p(); }
  const PartitionState& learner(int age) const;
  const OpCounters& counters() const noexcept { return counters_; }
  std::size_t pending_count() const noexcept { return pending_.size(); }
  // Forecast issued so far for an in-flight video, if any.
  std::optional<std::pair<int, Status>> issued(std::uint64_t video) const;

  // Writes manifest.json plus one age_<n>.csv partition snapshot per age.
  // Only allowed when no video is in flight.
  void save(const std::filesystem::path& dir) const;
  static ForecastEngine load(const std::filesystem::path& dir);

 private:
  struct Pending {
    std::vector<CubeId> cubes;
    std::vector<Action> actions;
  };

  RewardSpec spec_;
  LearnerParams params_;
  std::vector<PartitionState> learners_;
  std::unordered_map<std::uint64_t, Pending> pending_;
  OpCounters counters_;
};

}  // namespace popcast
