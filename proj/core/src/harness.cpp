#include "popcast/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>

#include "popcast/csv.hpp"
#include "popcast/engine.hpp"
#include "popcast/error.hpp"
#include "popcast/partition.hpp"
#include "popcast/random.hpp"

namespace popcast {

const AlgorithmSummary* Report::find(std::string_view algorithm) const {
  for (const auto& s : summary) {
    if (s.algorithm == algorithm) return &s;
  }
  return nullptr;
}

std::optional<std::string> Report::metric(std::string_view key) const {
  for (const auto& [k, v] : metrics) {
    if (k == key) return v;
  }
  return std::nullopt;
}

namespace {

// Stream seeds derived from the master seed.
constexpr std::uint64_t kArrivalStream = 1;
constexpr std::uint64_t kOutcomeStream = 2;
constexpr std::uint64_t kWorldStream = 3;

std::optional<double> ratio(double num, double den) {
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

struct Tally {
  std::string name;
  ConfusionMatrix confusion;
  std::map<int, std::uint64_t> ages;
  std::optional<VpModel> vp;
  std::uint64_t instances = 0;
  double total = 0.0, perfect = 0.0, window_total = 0.0, window_perfect = 0.0, age_sum = 0.0;
  std::uint64_t fallbacks = 0;

  void add(const PredictionOutcome& o, const VideoTrace& t, double perfect_reward) {
    ++instances;
    total += o.overall_reward;
    perfect += perfect_reward;
    window_total += o.overall_reward;
    window_perfect += perfect_reward;
    age_sum += o.forecast_age;
    ++ages[o.forecast_age];
    confusion.add(t.status, o.predicted);
  }
};

std::string key_values_text(const KeyValues& kv) {
  std::string s;
  for (const auto& [k, v] : kv) s += k + "=" + v + "\n";
  return s;
}

}  // namespace

Report run_experiment(const ExperimentConfig& config, const ProgressHook& progress) {
  ExperimentConfig c = config.resolved();
  if (c.mode != Mode::run && c.mode != Mode::bench) {
    throw ConfigError("run_experiment needs mode run or bench, got " + to_string(c.mode));
  }
  const RewardSpec spec = c.reward_spec();
  const SimParams sim = c.sim_params();

  std::vector<VideoTrace> loaded;
  std::size_t count = *c.videos;
  if (!c.traces.empty()) {
    loaded = load_traces(c.traces, sim);
    if (!config.videos) {
      count = loaded.size();
    } else if (count > loaded.size()) {
      throw DataError("requested " + std::to_string(count) + " videos but " + c.traces + " holds " +
                      std::to_string(loaded.size()));
    }
    c.videos = count;
  }

  std::vector<Tally> tallies;
  std::optional<ForecastEngine> engine;
  for (const auto& name : c.algorithms) {
    Tally t{name, ConfusionMatrix(spec.num_statuses()), {}, {}};
    if (is_vp(name)) t.vp.emplace(vp_age(name), sim.thresholds);
    if (name == "SF") {
      LearnerParams params;
      params.dims = {sim.context_dim()};
      params.A = c.A;
      params.p = c.p;
      params.alpha = c.alpha;
      engine.emplace(spec, params);
    }
    tallies.push_back(std::move(t));
  }

  Report report;
  std::uint64_t top_status = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const VideoTrace trace = loaded.empty() ? generate_trace(sim, k) : loaded[k];
    if (trace.status.index >= spec.num_statuses()) throw DataError("trace status outside the status space");
    if (trace.status.index + 1 == spec.num_statuses()) ++top_status;
    const double perfect = perfect_reward(trace, spec);
    for (auto& t : tallies) {
      PredictionOutcome o;
      if (t.name == "SF") {
        for (int n = 1; n <= spec.horizon(); ++n) engine->observe(k, n, trace.contexts.at(static_cast<std::size_t>(n - 1)));
        o = engine->finalize(k, trace.status);
      } else if (t.name == "AU") {
        o = au_predict(trace, spec);
      } else if (t.name == "AP") {
        o = ap_predict(trace, spec);
      } else if (t.name == "Perfect") {
        o = perfect_predict(trace, spec);
      } else {
        VpPrediction vp = vp_predict(*t.vp, trace, spec);
        if (vp.fallback) ++t.fallbacks;
        o = std::move(vp.outcome);
        t.vp->add(trace);
      }
      t.add(o, trace, perfect);
    }
    const std::uint64_t done = k + 1;
    if (done % c.window == 0 || done == count) {
      for (auto& t : tallies) {
        report.learning_curve.push_back(
            {t.name, done, ratio(t.window_total, t.window_perfect), ratio(t.total, t.perfect)});
        t.window_total = t.window_perfect = 0.0;
      }
    }
    if (progress) progress(done);
  }

  if (count > 0) {
    for (const auto& t : tallies) {
      AlgorithmSummary s;
      s.algorithm = t.name;
      s.instances = t.instances;
      s.total_reward = t.total;
      s.perfect_reward = t.perfect;
      s.normalized_reward = ratio(t.total, t.perfect);
      s.true_positive_rate = t.confusion.true_positive_rate();
      s.true_negative_rate = t.confusion.true_negative_rate();
      s.mean_forecast_age = t.age_sum / static_cast<double>(t.instances);
      s.fallbacks = t.fallbacks;
      report.summary.push_back(s);
      for (std::size_t i = 0; i < spec.num_statuses(); ++i) {
        for (std::size_t j = 0; j < spec.num_statuses(); ++j) {
          report.confusion.push_back({t.name, i, j, t.confusion.at(Status{i}, Status{j})});
        }
      }
      for (const auto& [age, n] : t.ages) report.forecast_ages.push_back({t.name, age, n});
    }
    report.metrics.emplace_back("videos", std::to_string(count));
    report.metrics.emplace_back("top_status_fraction", csv::format(static_cast<double>(top_status) / count));
  }
  report.metrics.emplace_back("vp_training", "prequential");
  if (engine) {
    const auto& ops = engine->counters();
    std::size_t active = 0;
    unsigned max_level = 0;
    for (int n = 1; n <= spec.horizon(); ++n) {
      active += engine->learner(n).active_count();
      max_level = std::max(max_level, engine->learner(n).max_active_level());
    }
    report.metrics.emplace_back("sf_split_exponent", csv::format(engine->split_exponent(1)));
    report.metrics.emplace_back("sf_observations", std::to_string(ops.observations));
    report.metrics.emplace_back("sf_action_evaluations", std::to_string(ops.action_evaluations));
    report.metrics.emplace_back("sf_estimate_updates", std::to_string(ops.estimate_updates));
    report.metrics.emplace_back("sf_splits", std::to_string(ops.splits));
    report.metrics.emplace_back("sf_active_cubes", std::to_string(active));
    report.metrics.emplace_back("sf_max_level", std::to_string(max_level));
  }
  report.manifest = c.manifest();
  return report;
}

DiscreteWorldModel experiment_world(const ExperimentConfig& c) {
  const RewardSpec spec = c.reward_spec();
  if (!c.world.empty()) return load_world(c.world, spec);
  std::mt19937_64 rng(derive_seed(c.seed, kWorldStream));
  RandomWorldOptions options;
  options.alphabet_sizes = c.world_alphabets;
  options.min_gap = c.world_gap;
  options.min_probability = c.world_min_probability;
  return random_world(spec, options, rng);
}

OracleResult oracle_experiment(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.mode = Mode::oracle;
  c = c.resolved();
  const DiscreteWorldModel model = experiment_world(c);
  OracleResult result;
  result.policy = solve(model);
  result.value = policy_value(model, result.policy);
  auto& m = result.report.metrics;
  m.emplace_back("value", csv::format(result.value));
  m.emplace_back("normalized_value", csv::format(result.value / model.reward_spec().u_max()));
  for (int n = 1; n <= model.horizon(); ++n) {
    const auto& alphabet = model.alphabet(n);
    for (std::size_t i = 0; i < alphabet.size(); ++i) {
      m.emplace_back("policy:" + std::to_string(n) + ":" + alphabet[i].name, to_string(result.policy.at(n, i)));
    }
  }
  result.report.manifest = c.manifest();
  return result;
}

std::optional<double> fit_regret_slope(const std::vector<RegretPoint>& series, double from) {
  if (series.empty()) return std::nullopt;
  const double start = from * static_cast<double>(series.back().k);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (const auto& pt : series) {
    if (static_cast<double>(pt.k) < start || !(pt.cumulative_regret > 0.0)) continue;
    const double x = std::log(static_cast<double>(pt.k));
    const double y = std::log(pt.cumulative_regret);
    ++n;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  if (n < 2) return std::nullopt;
  const double nn = static_cast<double>(n);
  const double var = sxx - sx * sx / nn;
  if (!(var > 0.0)) return std::nullopt;
  return (sxy - sx * sy / nn) / var;
}

RegretResult regret_experiment(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.mode = Mode::regret;
  c = c.resolved();
  const DiscreteWorldModel model = experiment_world(c);
  const RewardSpec& spec = model.reward_spec();
  const int age = c.regret_age;
  const std::size_t dim = c.regret_dim;
  const std::size_t cells = std::size_t{1} << (c.grid_level * dim);
  const auto& alphabet = model.alphabet(age);
  if (alphabet.size() != cells) {
    throw ConfigError("world alphabet at age " + std::to_string(age) + " has " + std::to_string(alphabet.size()) +
                      " symbols; grid_level " + std::to_string(c.grid_level) + " in " + std::to_string(dim) +
                      " dimensions needs " + std::to_string(cells));
  }

  const TabularPolicy optimal = solve(model);
  const auto actions = age_actions(spec, age);
  const double u_max = spec.u_max();

  // Ground truth mu(symbol, action) and realized rewards per outcome, in units of u_max.
  constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<double>> mu(cells, std::vector<double>(actions.size(), kMissing));
  std::vector<std::vector<std::size_t>> outcomes_of(cells);
  std::vector<std::vector<double>> cumulative_of(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    if (!model.reachable(age, i)) continue;
    for (std::size_t j = 0; j < actions.size(); ++j) {
      mu[i][j] = conditional_action_reward(model, age, i, actions[j], optimal) / u_max;
    }
  }
  const auto& outcomes = model.outcomes();
  std::vector<std::vector<double>> realized(outcomes.size());
  for (std::size_t o = 0; o < outcomes.size(); ++o) {
    const auto& outcome = outcomes[o];
    if (!(outcome.probability > 0.0)) continue;
    const std::size_t sym = outcome.symbols.at(static_cast<std::size_t>(age - 1));
    outcomes_of[sym].push_back(o);
    const double prev = cumulative_of[sym].empty() ? 0.0 : cumulative_of[sym].back();
    cumulative_of[sym].push_back(prev + outcome.probability);
    for (const auto& a : actions) realized[o].push_back(continuation_reward(model, outcome, age, a, optimal) / u_max);
  }

  std::mt19937_64 arrival_rng(derive_seed(c.seed, kArrivalStream));
  std::mt19937_64 outcome_rng(derive_seed(c.seed, kOutcomeStream));
  const auto contexts = generate_arrival_contexts(c.arrival, *c.videos, dim, *c.p, arrival_rng);
  PartitionState learner(dim, ActionSet(spec.num_statuses(), age < spec.horizon()), c.A, *c.p);

  RegretResult result;
  result.split_exponent = *c.p;
  result.theoretical_exponent =
      c.arrival == ArrivalKind::best ? kBestCaseRegretExponent : worst_case_regret_exponent(c.alpha, dim);
  result.series.reserve(contexts.size());
  double cumulative = 0.0, cumulative_realized = 0.0;
  for (std::size_t k = 0; k < contexts.size(); ++k) {
    const ContextVector& x = contexts[k];
    std::size_t sym = 0;
    for (std::size_t j = 0; j < dim; ++j) sym |= cell_index(x[j], c.grid_level) << (c.grid_level * j);
    const auto& m = mu[sym];
    if (std::isnan(m.front())) {
      throw DataError("no ground-truth reward for world symbol " + alphabet[sym].name + " at age " +
                      std::to_string(age));
    }
    const auto best_it = std::max_element(m.begin(), m.end());
    const double best = *best_it;

    std::size_t chosen = 0;
    CubeId cube{};
    switch (c.regret_learner) {
      case RegretLearner::adaptive:
        cube = learner.locate(x);
        chosen = learner.actions().index_of(learner.best_action(cube));
        learner.register_arrival(cube);
        break;
      case RegretLearner::optimal:
        chosen = static_cast<std::size_t>(best_it - m.begin());
        break;
      case RegretLearner::worst:
        chosen = static_cast<std::size_t>(std::min_element(m.begin(), m.end()) - m.begin());
        break;
    }

    // Sample the rest of the world given this symbol.
    const auto& cum = cumulative_of[sym];
    const double u = uniform01(outcome_rng) * cum.back();
    const std::size_t pick = std::min<std::size_t>(
        static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin()), cum.size() - 1);
    const auto& r = realized[outcomes_of[sym][pick]];
    if (c.regret_learner == RegretLearner::adaptive) {
      for (std::size_t j = 0; j < actions.size(); ++j) learner.update_estimate(cube, actions[j], r[j]);
    }

    const double instant = best - m[chosen];
    cumulative += instant;
    cumulative_realized += best - r[chosen];
    result.series.push_back({k + 1, instant, cumulative, cumulative_realized});
  }
  result.slope = fit_regret_slope(result.series, c.slope_from);

  auto& metrics = result.report.metrics;
  metrics.emplace_back("arrivals", std::to_string(contexts.size()));
  metrics.emplace_back("split_exponent", csv::format(result.split_exponent));
  metrics.emplace_back("theoretical_exponent", csv::format(result.theoretical_exponent));
  metrics.emplace_back("fitted_slope", csv::format(result.slope));
  metrics.emplace_back("final_regret", csv::format(cumulative));
  metrics.emplace_back("final_realized_regret", csv::format(cumulative_realized));
  metrics.emplace_back("optimal_value", csv::format(policy_value(model, optimal) / u_max));
  metrics.emplace_back("active_cubes", std::to_string(learner.active_count()));
  metrics.emplace_back("max_level", std::to_string(learner.max_active_level()));
  result.report.regret = result.series;
  result.report.manifest = c.manifest();
  return result;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("failed writing " + path.string());
}

std::string fmt_opt(const std::optional<double>& v) { return csv::format(v); }

void write_key_values(const std::filesystem::path& path, const KeyValues& kv, bool as_csv) {
  auto out = open_out(path);
  if (as_csv) {
    out << "metric,value\n";
    for (const auto& [k, v] : kv) out << k << ',' << v << '\n';
  } else {
    out << key_values_text(kv);
  }
  finish(out, path);
}

struct CsvFile {
  std::ifstream in;
  csv::Reader reader;
  std::string source;

  CsvFile(const std::filesystem::path& path, std::string_view header)
      : in(path, std::ios::binary), reader(in, path.string()), source(path.string()) {
    if (!in) throw DataError("cannot read " + source);
    reader.expect_header(header);
  }

  // Next row split into exactly `columns` fields.
  bool row(std::vector<std::string>& fields, std::size_t columns) {
    std::string line;
    while (reader.next(line)) {
      if (line.empty()) continue;
      fields = csv::split(line);
      if (fields.size() != columns) {
        throw ParseError(source, reader.line_number(), "expected " + std::to_string(columns) + " columns");
      }
      return true;
    }
    return false;
  }

  std::size_t line() const { return reader.line_number(); }
};

}  // namespace

void emit_report(const Report& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());

  {
    const auto path = dir / "summary.csv";
    auto out = open_out(path);
    out << kSummaryHeader << '\n';
    for (const auto& s : report.summary) {
      out << s.algorithm << ',' << s.instances << ',' << csv::format(s.total_reward) << ','
          << csv::format(s.perfect_reward) << ',' << fmt_opt(s.normalized_reward) << ','
          << fmt_opt(s.true_positive_rate) << ',' << fmt_opt(s.true_negative_rate) << ','
          << fmt_opt(s.mean_forecast_age) << ',' << s.fallbacks << '\n';
    }
    finish(out, path);
  }
  {
    const auto path = dir / "learning_curve.csv";
    auto out = open_out(path);
    out << "algorithm,instances,window_normalized_reward,cumulative_normalized_reward\n";
    for (const auto& p : report.learning_curve) {
      out << p.algorithm << ',' << p.instances << ',' << fmt_opt(p.window_normalized_reward) << ','
          << fmt_opt(p.cumulative_normalized_reward) << '\n';
    }
    finish(out, path);
  }
  {
    const auto path = dir / "confusion.csv";
    auto out = open_out(path);
    out << "algorithm,true_status,predicted_status,count\n";
    for (const auto& e : report.confusion) {
      out << e.algorithm << ',' << e.true_status << ',' << e.predicted_status << ',' << e.count << '\n';
    }
    finish(out, path);
  }
  {
    const auto path = dir / "forecast_ages.csv";
    auto out = open_out(path);
    out << "algorithm,forecast_age,count\n";
    for (const auto& a : report.forecast_ages) out << a.algorithm << ',' << a.forecast_age << ',' << a.count << '\n';
    finish(out, path);
  }
  {
    const auto path = dir / "regret.csv";
    auto out = open_out(path);
    out << "k,instant_regret,cumulative_regret,cumulative_realized_regret\n";
    for (const auto& r : report.regret) {
      out << r.k << ',' << csv::format(r.instant_regret) << ',' << csv::format(r.cumulative_regret) << ','
          << csv::format(r.cumulative_realized_regret) << '\n';
    }
    finish(out, path);
  }
  write_key_values(dir / "metrics.csv", report.metrics, true);
  write_key_values(dir / "manifest.txt", report.manifest, false);
}

Report parse_report(const std::filesystem::path& dir) {
  Report report;
  std::vector<std::string> f;
  {
    CsvFile file(dir / "summary.csv", kSummaryHeader);
    while (file.row(f, 9)) {
      const auto& src = file.source;
      const auto ln = file.line();
      report.summary.push_back({f[0], csv::to_uint(f[1], src, ln), csv::to_double(f[2], src, ln),
                                csv::to_double(f[3], src, ln), csv::to_optional_double(f[4], src, ln),
                                csv::to_optional_double(f[5], src, ln), csv::to_optional_double(f[6], src, ln),
                                csv::to_optional_double(f[7], src, ln), csv::to_uint(f[8], src, ln)});
    }
  }
  {
    CsvFile file(dir / "learning_curve.csv",
                 "algorithm,instances,window_normalized_reward,cumulative_normalized_reward");
    while (file.row(f, 4)) {
      report.learning_curve.push_back({f[0], csv::to_uint(f[1], file.source, file.line()),
                                       csv::to_optional_double(f[2], file.source, file.line()),
                                       csv::to_optional_double(f[3], file.source, file.line())});
    }
  }
  {
    CsvFile file(dir / "confusion.csv", "algorithm,true_status,predicted_status,count");
    while (file.row(f, 4)) {
      report.confusion.push_back({f[0], csv::to_uint(f[1], file.source, file.line()),
                                  csv::to_uint(f[2], file.source, file.line()),
                                  csv::to_uint(f[3], file.source, file.line())});
    }
  }
  {
    CsvFile file(dir / "forecast_ages.csv", "algorithm,forecast_age,count");
    while (file.row(f, 3)) {
      report.forecast_ages.push_back({f[0], static_cast<int>(csv::to_int(f[1], file.source, file.line())),
                                      csv::to_uint(f[2], file.source, file.line())});
    }
  }
  {
    CsvFile file(dir / "regret.csv", "k,instant_regret,cumulative_regret,cumulative_realized_regret");
    while (file.row(f, 4)) {
      report.regret.push_back({csv::to_uint(f[0], file.source, file.line()),
                               csv::to_double(f[1], file.source, file.line()),
                               csv::to_double(f[2], file.source, file.line()),
                               csv::to_double(f[3], file.source, file.line())});
    }
  }
  {
    CsvFile file(dir / "metrics.csv", "metric,value");
    while (file.row(f, 2)) report.metrics.emplace_back(f[0], f[1]);
  }
  {
    const auto path = dir / "manifest.txt";
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
      ++number;
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError(path.string(), number, "expected key=value");
      report.manifest.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
  }
  return report;
}

}  // namespace popcast
