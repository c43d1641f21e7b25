#include "popcast/predictors.hpp"

#include <cmath>

#include "popcast/error.hpp"

namespace popcast {

namespace {

PredictionOutcome at_age_one(Status predicted, const VideoTrace& trace, const RewardSpec& spec) {
  const auto actions = forecast_at(1, predicted, spec.horizon());
  return make_outcome(actions, trace.status, spec);
}

}  // namespace

PredictionOutcome au_predict(const VideoTrace& trace, const RewardSpec& spec) {
  return at_age_one(Status{0}, trace, spec);
}

PredictionOutcome ap_predict(const VideoTrace& trace, const RewardSpec& spec) {
  return at_age_one(Status{spec.num_statuses() - 1}, trace, spec);
}

double perfect_reward(const VideoTrace& trace, const RewardSpec& spec) {
  return prediction_reward(trace.status, trace.status, 1, spec);
}

PredictionOutcome perfect_predict(const VideoTrace& trace, const RewardSpec& spec) {
  return at_age_one(trace.status, trace, spec);
}

VpModel::VpModel(int age, std::vector<double> thresholds) : age_(age), thresholds_(std::move(thresholds)) {
  if (age_ < 1) throw ConfigError("VP age must be at least 1");
  if (thresholds_.empty()) throw ConfigError("VP needs at least one threshold");
}

void VpModel::add(double views_at_age, double final_views) {
  if (!(views_at_age >= 0.0 && final_views >= 0.0)) throw ContractError("view counts must be non-negative");
  const double x = std::log10(1.0 + views_at_age);
  const double y = std::log10(1.0 + final_views);
  ++count_;
  const double n = static_cast<double>(count_);
  const double dx = x - mean_x_;
  mean_x_ += dx / n;
  mean_y_ += (y - mean_y_) / n;
  sxx_ += dx * (x - mean_x_);
  sxy_ += dx * (y - mean_y_);
}

void VpModel::add(const VideoTrace& trace) {
  if (trace.raw.size() < static_cast<std::size_t>(age_)) throw ContractError("VP needs raw views up to its age");
  add(static_cast<double>(trace.raw[static_cast<std::size_t>(age_ - 1)].cum_views),
      static_cast<double>(trace.raw.back().cum_views));
}

double VpModel::beta1() const {
  if (degenerate()) throw ContractError("VP fit is degenerate");
  return sxy_ / sxx_;
}

double VpModel::beta0() const { return mean_y_ - beta1() * mean_x_; }

double VpModel::predicted_views(double views_at_age) const {
  return std::pow(10.0, beta0() + beta1() * std::log10(1.0 + views_at_age)) - 1.0;
}

VpModel vp_fit(std::span<const VideoTrace> history, int age, std::vector<double> thresholds) {
  VpModel model(age, std::move(thresholds));
  for (const auto& t : history) model.add(t);
  return model;
}

VpPrediction vp_predict(const VpModel& model, const VideoTrace& trace, const RewardSpec& spec) {
  if (model.age() > spec.horizon()) throw ConfigError("VP age exceeds the horizon");
  if (trace.raw.size() < static_cast<std::size_t>(model.age())) {
    throw ContractError("VP needs raw views up to its age");
  }
  VpPrediction result;
  Status predicted{0};
  if (model.degenerate()) {
    result.fallback = true;
  } else {
    const double v = model.predicted_views(
        static_cast<double>(trace.raw[static_cast<std::size_t>(model.age() - 1)].cum_views));
    result.predicted_views = v;
    for (double t : model.thresholds()) {
      if (v > t) ++predicted.index;
    }
  }
  const auto actions = forecast_at(model.age(), predicted, spec.horizon());
  result.outcome = make_outcome(actions, trace.status, spec);
  return result;
}

ConfusionMatrix::ConfusionMatrix(std::size_t num_statuses)
    : counts_(num_statuses, std::vector<std::uint64_t>(num_statuses, 0)) {
  if (num_statuses < 2) throw ContractError("confusion matrix needs at least two statuses");
}

void ConfusionMatrix::add(Status realized, Status predicted, std::uint64_t count) {
  if (realized.index >= counts_.size() || predicted.index >= counts_.size()) {
    throw ContractError("status outside the confusion matrix");
  }
  counts_[realized.index][predicted.index] += count;
}

std::uint64_t ConfusionMatrix::at(Status realized, Status predicted) const {
  return counts_.at(realized.index).at(predicted.index);
}

std::uint64_t ConfusionMatrix::total() const noexcept {
  std::uint64_t sum = 0;
  for (const auto& row : counts_) {
    for (auto c : row) sum += c;
  }
  return sum;
}

std::optional<double> ConfusionMatrix::recall(Status s) const {
  const auto& row = counts_.at(s.index);
  std::uint64_t n = 0;
  for (auto c : row) n += c;
  if (n == 0) return std::nullopt;
  return static_cast<double>(row[s.index]) / static_cast<double>(n);
}

ConfusionMatrix classification_rates(std::span<const PredictionOutcome> outcomes, std::span<const VideoTrace> traces,
                                     std::size_t num_statuses) {
  if (outcomes.size() != traces.size()) throw ContractError("outcomes and traces are not aligned");
  ConfusionMatrix m(num_statuses);
  for (std::size_t i = 0; i < outcomes.size(); ++i) m.add(traces[i].status, outcomes[i].predicted);
  return m;
}

}  // namespace popcast
