#include "popcast/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include "popcast/csv.hpp"
#include "popcast/engine.hpp"
#include "popcast/error.hpp"

namespace popcast {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::simulate: return "simulate";
    case Mode::run: return "run";
    case Mode::oracle: return "oracle";
    case Mode::regret: return "regret";
    case Mode::bench: return "bench";
  }
  return "run";
}

std::string to_string(Preset p) { return p == Preset::binary ? "binary" : "refined"; }

std::string to_string(RegretLearner l) {
  switch (l) {
    case RegretLearner::adaptive: return "adaptive";
    case RegretLearner::optimal: return "optimal";
    case RegretLearner::worst: return "worst";
  }
  return "adaptive";
}

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key) + ": expected " +
                    std::string(expected));
}

double parse_double(std::string_view key, std::string_view text) {
  text = csv::trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty() || !std::isfinite(v)) {
    bad_value(key, text, "a real number");
  }
  return v;
}

std::uint64_t parse_uint(std::string_view key, std::string_view text) {
  text = csv::trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    bad_value(key, text, "a non-negative integer");
  }
  return v;
}

int parse_int(std::string_view key, std::string_view text) {
  const auto v = parse_uint(key, text);
  if (v > 1'000'000) bad_value(key, text, "an integer up to 1000000");
  return static_cast<int>(v);
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = csv::trim(text);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  bad_value(key, text, "true or false");
}

std::vector<std::string> parse_list(std::string_view text) {
  std::vector<std::string> items;
  if (csv::trim(text).empty()) return items;
  for (const auto& item : csv::split(text)) items.emplace_back(csv::trim(item));
  return items;
}

std::vector<double> parse_doubles(std::string_view key, std::string_view text) {
  std::vector<double> v;
  for (const auto& item : parse_list(text)) v.push_back(parse_double(key, item));
  return v;
}

std::string join(const std::vector<std::string>& items, char sep = ',') {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) s += sep;
    s += items[i];
  }
  return s;
}

std::string join_doubles(const std::vector<double>& values) {
  std::vector<std::string> items;
  for (double v : values) items.push_back(csv::format(v));
  return join(items);
}

template <class T>
std::string opt(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) {
    return csv::format(*v);
  } else {
    return std::to_string(*v);
  }
}

}  // namespace

bool is_vp(std::string_view algorithm) { return algorithm.starts_with("VP-"); }

int vp_age(std::string_view algorithm) {
  if (!is_vp(algorithm)) throw ConfigError("not a VP algorithm: " + std::string(algorithm));
  return parse_int("algorithms", algorithm.substr(3));
}

void ExperimentConfig::set(std::string_view key_view, std::string_view raw) {
  const std::string key(csv::trim(key_view));
  const std::string_view value = csv::trim(raw);
  if (key == "mode") {
    if (value == "simulate") mode = Mode::simulate;
    else if (value == "run") mode = Mode::run;
    else if (value == "oracle") mode = Mode::oracle;
    else if (value == "regret") mode = Mode::regret;
    else if (value == "bench") mode = Mode::bench;
    else bad_value(key, value, "simulate, run, oracle, regret or bench");
  } else if (key == "preset") {
    if (value == "binary") preset = Preset::binary;
    else if (value == "refined") preset = Preset::refined;
    else bad_value(key, value, "binary or refined");
  } else if (key == "traces") {
    traces = value;
  } else if (key == "videos") {
    videos = value.empty() ? std::nullopt : std::optional<std::size_t>(parse_uint(key, value));
  } else if (key == "horizon") {
    horizon = value.empty() ? std::nullopt : std::optional<int>(parse_int(key, value));
  } else if (key == "w") {
    w = value.empty() ? std::nullopt : std::optional<double>(parse_double(key, value));
  } else if (key == "rewards") {
    rewards = parse_doubles(key, value);
  } else if (key == "theta") {
    theta.clear();
    if (!value.empty()) {
      for (const auto& row : csv::split(value, ';')) theta.push_back(parse_doubles(key, row));
    }
  } else if (key == "lambda") {
    lambda = parse_double(key, value);
  } else if (key == "timeliness") {
    try {
      timeliness = parse_timeliness(value);
    } catch (const Error&) {
      bad_value(key, value, "remaining or none");
    }
  } else if (key == "thresholds") {
    thresholds = parse_doubles(key, value);
  } else if (key == "views_cap") {
    views_cap = parse_double(key, value);
  } else if (key == "brf_cap") {
    brf_cap = parse_double(key, value);
  } else if (key == "period_views") {
    period_views = parse_bool(key, value);
  } else if (key == "A") {
    A = parse_double(key, value);
  } else if (key == "p") {
    p = value.empty() ? std::nullopt : std::optional<double>(parse_double(key, value));
  } else if (key == "alpha") {
    alpha = parse_double(key, value);
  } else if (key == "algorithms") {
    algorithms = parse_list(value);
  } else if (key == "window") {
    window = parse_uint(key, value);
  } else if (key == "seed") {
    seed = parse_uint(key, value);
  } else if (key == "out") {
    out = value;
  } else if (key == "world") {
    world = value;
  } else if (key == "world_alphabets") {
    world_alphabets.clear();
    for (const auto& item : parse_list(value)) world_alphabets.push_back(parse_uint(key, item));
  } else if (key == "world_gap") {
    world_gap = parse_double(key, value);
  } else if (key == "world_min_probability") {
    world_min_probability = parse_double(key, value);
  } else if (key == "arrival") {
    try {
      arrival = parse_arrival_kind(value);
    } catch (const Error&) {
      bad_value(key, value, "worst or best");
    }
  } else if (key == "regret_age") {
    regret_age = parse_int(key, value);
  } else if (key == "regret_dim") {
    regret_dim = parse_uint(key, value);
  } else if (key == "grid_level") {
    grid_level = static_cast<unsigned>(parse_int(key, value));
  } else if (key == "slope_from") {
    slope_from = parse_double(key, value);
  } else if (key == "regret_learner") {
    if (value == "adaptive") regret_learner = RegretLearner::adaptive;
    else if (value == "optimal") regret_learner = RegretLearner::optimal;
    else if (value == "worst") regret_learner = RegretLearner::worst;
    else bad_value(key, value, "adaptive, optimal or worst");
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

std::size_t ExperimentConfig::context_dim() const { return period_views ? 4 : 3; }

ExperimentConfig ExperimentConfig::resolved() const {
  ExperimentConfig c = *this;
  const bool world_mode = c.mode == Mode::oracle || c.mode == Mode::regret;
  if (!c.videos) c.videos = c.mode == Mode::regret ? 100000 : 10000;
  if (!c.horizon) c.horizon = world_mode ? 2 : 100;

  if (c.preset == Preset::binary) {
    if (!c.w) c.w = 10.0;
    if (c.rewards.empty()) c.rewards = {1.0, *c.w};
  } else {
    if (c.w) throw ConfigError("w applies to the binary preset only; use rewards");
    if (c.rewards.empty()) c.rewards = {1.0, 5.0, 10.0};
  }
  if (c.theta.empty()) {
    c.theta.assign(c.rewards.size(), std::vector<double>(c.rewards.size(), 0.0));
    for (std::size_t i = 0; i < c.rewards.size(); ++i) c.theta[i][i] = c.rewards[i];
  }
  if (c.thresholds.empty()) {
    c.thresholds = c.preset == Preset::binary ? std::vector<double>{10000} : std::vector<double>{2000, 10000};
  }

  if (c.algorithms.empty() && (c.mode == Mode::run || c.mode == Mode::bench)) {
    if (c.mode == Mode::run) c.algorithms.push_back("SF");
    c.algorithms.insert(c.algorithms.end(), {"AU", "AP"});
    for (int age : {25, 50, 75}) {
      if (age <= *c.horizon) c.algorithms.push_back("VP-" + std::to_string(age));
    }
    c.algorithms.push_back("Perfect");
  }

  if (!c.p) {
    if (c.mode == Mode::regret) {
      c.p = c.arrival == ArrivalKind::best ? best_case_split_exponent(c.alpha)
                                           : worst_case_split_exponent(c.alpha, c.regret_dim);
    } else {
      c.p = worst_case_split_exponent(c.alpha, c.context_dim());
    }
  }

  if (world_mode && c.world.empty() && c.world_alphabets.empty()) {
    c.world_alphabets.assign(static_cast<std::size_t>(*c.horizon), 2);
    if (c.mode == Mode::regret && c.regret_age >= 1 && c.regret_age <= *c.horizon &&
        c.grid_level * c.regret_dim < 20) {
      c.world_alphabets[static_cast<std::size_t>(c.regret_age - 1)] = std::size_t{1}
                                                                      << (c.grid_level * c.regret_dim);
    }
  }
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  if (!videos || !horizon || !p || theta.empty()) throw ConfigError("configuration is not resolved");
  if (*horizon < 1) throw ConfigError("horizon must be at least 1");
  (void)reward_spec();
  if (thresholds.size() + 1 != theta.size()) {
    throw ConfigError("need exactly one threshold fewer than statuses (" + std::to_string(theta.size()) + ")");
  }
  if (!(views_cap > 0.0 && brf_cap > 0.0)) throw ConfigError("feature caps must be positive");
  if (!(A > 0.0)) throw ConfigError("A must be positive");
  if (!(*p > 0.0)) throw ConfigError("p must be positive");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (window < 1) throw ConfigError("window must be at least 1");

  bool has_sf = false;
  for (const auto& a : algorithms) {
    if (a == "SF") {
      has_sf = true;
    } else if (is_vp(a)) {
      const int age = vp_age(a);
      if (age < 1 || age > *horizon) {
        throw ConfigError("VP age " + std::to_string(age) + " outside [1, " + std::to_string(*horizon) + "]");
      }
    } else if (a != "AU" && a != "AP" && a != "Perfect") {
      throw ConfigError("unknown algorithm '" + a + "'");
    }
  }
  if (mode == Mode::bench && has_sf) throw ConfigError("bench mode runs benchmarks only; remove SF");
  if (mode == Mode::run || mode == Mode::bench || mode == Mode::simulate) sim_params().validate();

  if (mode == Mode::oracle || mode == Mode::regret) {
    if (world.empty() && world_alphabets.size() != static_cast<std::size_t>(*horizon)) {
      throw ConfigError("world_alphabets needs one size per age");
    }
    if (!(world_gap >= 0.0) || !(world_min_probability >= 0.0 && world_min_probability <= 1.0)) {
      throw ConfigError("world_gap and world_min_probability must be non-negative");
    }
  }
  if (mode == Mode::regret) {
    if (*videos < 1) throw ConfigError("regret experiments need at least one arrival");
    if (regret_age < 1 || regret_age > *horizon) throw ConfigError("regret_age outside [1, horizon]");
    if (regret_dim < 1 || regret_dim > 16) throw ConfigError("regret_dim must be in [1, 16]");
    if (grid_level < 1 || grid_level * regret_dim >= 20) throw ConfigError("grid_level too small or too fine");
    if (!(slope_from > 0.0 && slope_from < 1.0)) throw ConfigError("slope_from must be in (0, 1)");
  }
}

RewardSpec ExperimentConfig::reward_spec() const {
  if (!horizon || theta.empty()) throw ConfigError("configuration is not resolved");
  return RewardSpec(*horizon, lambda, theta, timeliness);
}

SimParams ExperimentConfig::sim_params() const {
  SimParams s = preset == Preset::binary ? SimParams::binary_default() : SimParams::refined_default();
  if (horizon) s.horizon = *horizon;
  if (!thresholds.empty() && thresholds != s.thresholds) {
    s.thresholds = thresholds;
    s.status_labels.clear();
    for (std::size_t i = 0; i <= thresholds.size(); ++i) s.status_labels.push_back("status_" + std::to_string(i));
  }
  s.caps.views_cap = views_cap;
  s.caps.brf_cap = brf_cap;
  s.caps.period_views = period_views;
  s.seed = seed;
  return s;
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::manifest() const {
  std::vector<std::string> theta_rows;
  for (const auto& row : theta) theta_rows.push_back(join_doubles(row));
  std::vector<std::string> alphabets;
  for (auto a : world_alphabets) alphabets.push_back(std::to_string(a));
  return {
      {"mode", to_string(mode)},
      {"preset", to_string(preset)},
      {"traces", traces},
      {"videos", opt(videos)},
      {"horizon", opt(horizon)},
      {"w", opt(w)},
      {"rewards", join_doubles(rewards)},
      {"theta", join(theta_rows, ';')},
      {"lambda", csv::format(lambda)},
      {"timeliness", to_string(timeliness)},
      {"thresholds", join_doubles(thresholds)},
      {"views_cap", csv::format(views_cap)},
      {"brf_cap", csv::format(brf_cap)},
      {"period_views", period_views ? "true" : "false"},
      {"A", csv::format(A)},
      {"p", opt(p)},
      {"alpha", csv::format(alpha)},
      {"algorithms", join(algorithms)},
      {"window", std::to_string(window)},
      {"seed", std::to_string(seed)},
      {"world", world},
      {"world_alphabets", join(alphabets)},
      {"world_gap", csv::format(world_gap)},
      {"world_min_probability", csv::format(world_min_probability)},
      {"arrival", to_string(arrival)},
      {"regret_age", std::to_string(regret_age)},
      {"regret_dim", std::to_string(regret_dim)},
      {"grid_level", std::to_string(grid_level)},
      {"slope_from", csv::format(slope_from)},
      {"regret_learner", to_string(regret_learner)},
  };
}

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  ExperimentConfig c;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string_view body = csv::trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(source + ":" + std::to_string(number) + ": expected key=value");
    }
    try {
      c.set(body.substr(0, eq), body.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  return parse_config(in, path);
}

}  // namespace popcast
