#include "popcast/engine.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "popcast/error.hpp"

namespace popcast {

double worst_case_split_exponent(double alpha, std::size_t dim) {
  const double d = static_cast<double>(dim);
  return (3.0 * alpha + std::sqrt(9.0 * alpha * alpha + 8.0 * alpha * d)) / 2.0;
}

double best_case_split_exponent(double alpha) { return 3.0 * alpha; }

double worst_case_regret_exponent(double alpha, std::size_t dim) {
  const double d = static_cast<double>(dim);
  const double root = std::sqrt(9.0 * alpha * alpha + 8.0 * alpha * d) / 2.0;
  return (d + alpha / 2.0 + root) / (d + 3.0 * alpha / 2.0 + root);
}

Action PolicyView::operator()(int age, const ContextVector& x) const {
  if (age < 1 || age > horizon()) throw ContractError("age outside [1, N]");
  const PartitionState& learner = (*learners_)[static_cast<std::size_t>(age - 1)];
  return learner.best_action(learner.locate(x));
}

ForecastEngine::ForecastEngine(RewardSpec spec, LearnerParams params)
    : spec_(std::move(spec)), params_(std::move(params)) {
  const int horizon = spec_.horizon();
  if (params_.dims.size() == 1 && horizon > 1) params_.dims.assign(static_cast<std::size_t>(horizon), params_.dims[0]);
  if (params_.dims.size() != static_cast<std::size_t>(horizon)) {
    throw ConfigError("need one context dimension per age");
  }
  if (!(params_.alpha > 0.0)) throw ConfigError("Lipschitz exponent alpha must be positive");
  learners_.reserve(params_.dims.size());
  for (int n = 1; n <= horizon; ++n) {
    const std::size_t d = params_.dims[static_cast<std::size_t>(n - 1)];
    const double p = params_.p.value_or(worst_case_split_exponent(params_.alpha, d));
    learners_.emplace_back(d, ActionSet(spec_.num_statuses(), n < horizon), params_.A, p);
  }
}

const PartitionState& ForecastEngine::learner(int age) const {
  if (age < 1 || age > horizon()) throw ContractError("age outside [1, N]");
  return learners_[static_cast<std::size_t>(age - 1)];
}

Action ForecastEngine::observe(std::uint64_t video, int age, const ContextVector& x) {
  auto it = pending_.find(video);
  const int expected = it == pending_.end() ? 1 : static_cast<int>(it->second.cubes.size()) + 1;
  if (age != expected) {
    throw ProtocolError("video " + std::to_string(video) + ": observed age " + std::to_string(age) +
                        ", expected age " + std::to_string(expected));
  }
  if (age > horizon()) throw ProtocolError("video " + std::to_string(video) + " already observed N ages");
  PartitionState& learner = learners_[static_cast<std::size_t>(age - 1)];
  const CubeId cube = learner.locate(x);
  const Action action = learner.best_action(cube);
  if (learner.register_arrival(cube)) ++counters_.splits;
  ++counters_.observations;
  counters_.action_evaluations += learner.actions().size();

  Pending& pending = it == pending_.end() ? pending_[video] : it->second;
  if (pending.cubes.empty()) {
    pending.cubes.reserve(static_cast<std::size_t>(horizon()));
    pending.actions.reserve(static_cast<std::size_t>(horizon()));
  }
  pending.cubes.push_back(cube);
  pending.actions.push_back(action);
  return action;
}

std::optional<std::pair<int, Status>> ForecastEngine::issued(std::uint64_t video) const {
  auto it = pending_.find(video);
  if (it == pending_.end()) return std::nullopt;
  const auto& actions = it->second.actions;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i].is_predict()) return std::make_pair(static_cast<int>(i) + 1, actions[i].status());
  }
  return std::nullopt;
}

PredictionOutcome ForecastEngine::finalize(std::uint64_t video, Status realized) {
  auto it = pending_.find(video);
  if (it == pending_.end()) throw ProtocolError("finalize of unknown video " + std::to_string(video));
  if (it->second.cubes.size() != static_cast<std::size_t>(horizon())) {
    throw ProtocolError("finalize of video " + std::to_string(video) + " before all N ages were observed");
  }
  if (realized.index >= spec_.num_statuses()) throw ContractError("realized status outside status space");
  const Pending pending = std::move(it->second);
  pending_.erase(it);

  PredictionOutcome outcome = make_outcome(pending.actions, realized, spec_);
  const int horizon = spec_.horizon();
  for (int n = 1; n <= horizon; ++n) {
    PartitionState& learner = learners_[static_cast<std::size_t>(n - 1)];
    const CubeId cube = pending.cubes[static_cast<std::size_t>(n - 1)];
    const ActionSet& actions = learner.actions();
    for (std::size_t i = 0; i < actions.size(); ++i) {
      const Action a = actions.at(i);
      const double raw = a.is_wait() ? outcome.age_rewards[static_cast<std::size_t>(n)]
                                     : prediction_reward(a.status(), realized, n, spec_);
      learner.update_estimate(cube, a, normalize_reward(raw, spec_));
    }
    counters_.estimate_updates += actions.size();
  }
  ++counters_.finalized;
  return outcome;
}

PolicyView ForecastEngine::policy_snapshot() const {
  return PolicyView(std::make_shared<const std::vector<PartitionState>>(learners_));
}

void ForecastEngine::save(const std::filesystem::path& dir) const {
  if (!pending_.empty()) throw ProtocolError("cannot save an engine with videos in flight");
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["horizon"] = spec_.horizon();
  manifest["lambda"] = spec_.lambda();
  manifest["accuracy"] = spec_.accuracy_matrix();
  manifest["timeliness"] = to_string(spec_.timeliness_kind());
  manifest["dims"] = params_.dims;
  manifest["A"] = params_.A;
  manifest["alpha"] = params_.alpha;
  manifest["p_override"] = params_.p ? nlohmann::json(*params_.p) : nlohmann::json(nullptr);
  std::vector<double> ps;
  for (const auto& l : learners_) ps.push_back(l.p());
  manifest["p"] = ps;
  {
    std::ofstream out(dir / "manifest.json");
    if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
  }
  for (int n = 1; n <= horizon(); ++n) {
    const auto path = dir / ("age_" + std::to_string(n) + ".csv");
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    learners_[static_cast<std::size_t>(n - 1)].write_snapshot(out);
  }
}

ForecastEngine ForecastEngine::load(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot read " + manifest_path.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
    RewardSpec spec(manifest.at("horizon").get<int>(), manifest.at("lambda").get<double>(),
                    manifest.at("accuracy").get<std::vector<std::vector<double>>>(),
                    parse_timeliness(manifest.at("timeliness").get<std::string>()));
    LearnerParams params;
    params.dims = manifest.at("dims").get<std::vector<std::size_t>>();
    params.A = manifest.at("A").get<double>();
    params.alpha = manifest.at("alpha").get<double>();
    if (!manifest.at("p_override").is_null()) params.p = manifest.at("p_override").get<double>();
    const auto ps = manifest.at("p").get<std::vector<double>>();

    ForecastEngine engine(spec, params);
    if (ps.size() != engine.learners_.size()) throw DataError("manifest p list does not match horizon");
    for (int n = 1; n <= engine.horizon(); ++n) {
      const auto path = dir / ("age_" + std::to_string(n) + ".csv");
      std::ifstream snap(path);
      if (!snap) throw DataError("cannot read " + path.string());
      auto& slot = engine.learners_[static_cast<std::size_t>(n - 1)];
      slot = PartitionState::read_snapshot(snap, slot.dim(), slot.actions(), slot.A(),
                                           ps[static_cast<std::size_t>(n - 1)], path.string());
    }
    return engine;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
}

}  // namespace popcast
