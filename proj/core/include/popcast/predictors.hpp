#pragma once

// Comparison predictors: All-Unpopular (AU), All-Popular (AP), view-based
// log-linear regression issued at a fixed age (VP-n), and the Perfect
// forecaster whose corpus reward normalizes everything else.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "popcast/model.hpp"
#include "popcast/simulator.hpp"

namespace popcast {

// Predict(0) at age 1.
PredictionOutcome au_predict(const VideoTrace& trace, const RewardSpec& spec);
// Predict(|S|-1) at age 1.
PredictionOutcome ap_predict(const VideoTrace& trace, const RewardSpec& spec);

// U(s, s, 1): the correct status forecast at age 1.
double perfect_reward(const VideoTrace& trace, const RewardSpec& spec);
PredictionOutcome perfect_predict(const VideoTrace& trace, const RewardSpec& spec);

// Ordinary least squares of log10(1 + v_N) on log10(1 + v_age), refit after
// every added trace from running moments.
class VpModel {
 public:
  VpModel(int age, std::vector<double> thresholds);

  void add(double views_at_age, double final_views);
  void add(const VideoTrace& trace);

  int age() const noexcept { return age_; }
  std::size_t count() const noexcept { return count_; }
  // Fewer than two points, or no spread in the regressor.
  bool degenerate() const noexcept { return count_ < 2 || !(sxx_ > 0.0); }
  double beta0() const;
  double beta1() const;
  // 10^(beta0 + beta1 log10(1 + v)) - 1. Requires a non-degenerate fit.
  double predicted_views(double views_at_age) const;
  const std::vector<double>& thresholds() const noexcept { return thresholds_; }

 private:
  int age_;
  std::vector<double> thresholds_;
  std::size_t count_ = 0;
  double mean_x_ = 0.0, mean_y_ = 0.0, sxx_ = 0.0, sxy_ = 0.0;
};

VpModel vp_fit(std::span<const VideoTrace> history, int age, std::vector<double> thresholds);

struct VpPrediction {
  PredictionOutcome outcome;
  std::optional<double> predicted_views;  // empty on fallback
  bool fallback = false;                  // degenerate fit, Predict(0) issued
};

// Waits until the model age and predicts the threshold status of the
// regressed final views. Requires raw features on the trace.
VpPrediction vp_predict(const VpModel& model, const VideoTrace& trace, const RewardSpec& spec);

// Rows are realized statuses, columns predicted ones.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t num_statuses = 2);

  void add(Status realized, Status predicted, std::uint64_t count = 1);
  std::size_t num_statuses() const noexcept { return counts_.size(); }
  std::uint64_t at(Status realized, Status predicted) const;
  std::uint64_t total() const noexcept;
  // Fraction of status-s videos forecast as s; empty when none occurred.
  std::optional<double> recall(Status s) const;
  std::optional<double> true_positive_rate() const { return recall(Status{counts_.size() - 1}); }
  std::optional<double> true_negative_rate() const { return recall(Status{0}); }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::vector<std::vector<std::uint64_t>> counts_;
};

ConfusionMatrix classification_rates(std::span<const PredictionOutcome> outcomes, std::span<const VideoTrace> traces,
                                     std::size_t num_statuses);

}  // namespace popcast
