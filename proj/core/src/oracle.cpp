#include "popcast/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "popcast/csv.hpp"
#include "popcast/error.hpp"
#include "popcast/random.hpp"

namespace popcast {

DiscreteWorldModel::DiscreteWorldModel(RewardSpec spec, std::vector<std::vector<WorldSymbol>> alphabets,
                                       std::vector<WorldOutcome> outcomes)
    : spec_(std::move(spec)), alphabets_(std::move(alphabets)), outcomes_(std::move(outcomes)) {
  const auto horizon = static_cast<std::size_t>(spec_.horizon());
  if (alphabets_.size() != horizon) throw ConfigError("world needs one context alphabet per age");
  for (const auto& alpha : alphabets_) {
    if (alpha.empty()) throw ConfigError("world context alphabets must be non-empty");
  }
  marginals_.resize(horizon);
  for (std::size_t n = 0; n < horizon; ++n) marginals_[n].assign(alphabets_[n].size(), 0.0);

  double total = 0.0;
  for (const auto& o : outcomes_) {
    if (o.symbols.size() != horizon) throw DataError("world outcome must list one symbol per age");
    if (o.status.index >= spec_.num_statuses()) throw DataError("world outcome status outside status space");
    if (!(o.probability >= 0.0) || !std::isfinite(o.probability)) {
      throw DataError("world outcome probabilities must be non-negative");
    }
    for (std::size_t n = 0; n < horizon; ++n) {
      if (o.symbols[n] >= alphabets_[n].size()) throw DataError("world outcome symbol outside alphabet");
      marginals_[n][o.symbols[n]] += o.probability;
    }
    total += o.probability;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DataError("world outcome probabilities sum to " + csv::format(total) + ", not 1");
  }
}

const std::vector<WorldSymbol>& DiscreteWorldModel::alphabet(int age) const {
  if (age < 1 || age > horizon()) throw ContractError("age outside [1, N]");
  return alphabets_[static_cast<std::size_t>(age - 1)];
}

std::vector<WorldSymbol>& DiscreteWorldModel::alphabet(int age) {
  if (age < 1 || age > horizon()) throw ContractError("age outside [1, N]");
  return alphabets_[static_cast<std::size_t>(age - 1)];
}

double DiscreteWorldModel::marginal(int age, std::size_t symbol) const {
  if (age < 1 || age > horizon()) throw ContractError("age outside [1, N]");
  return marginals_[static_cast<std::size_t>(age - 1)].at(symbol);
}

std::optional<std::size_t> DiscreteWorldModel::symbol_index(int age, std::string_view name) const {
  const auto& alpha = alphabet(age);
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i].name == name) return i;
  }
  return std::nullopt;
}

TabularPolicy TabularPolicy::constant(const DiscreteWorldModel& model, Action a) {
  TabularPolicy pi;
  for (int n = 1; n <= model.horizon(); ++n) {
    const Action here = (n == model.horizon() && a.is_wait()) ? Action::predict(Status{0}) : a;
    pi.table_.emplace_back(model.alphabet(n).size(), here);
  }
  return pi;
}

std::vector<Action> age_actions(const RewardSpec& spec, int age) {
  std::vector<Action> out;
  for (std::size_t s = 0; s < spec.num_statuses(); ++s) out.push_back(Action::predict(Status{s}));
  if (age < spec.horizon()) out.push_back(Action::wait());
  return out;
}

double continuation_reward(const DiscreteWorldModel& model, const WorldOutcome& outcome, int age, Action a,
                           const TabularPolicy& pi) {
  const RewardSpec& spec = model.reward_spec();
  for (int m = age; m <= model.horizon(); ++m) {
    const Action b = m == age ? a : pi.at(m, outcome.symbols[static_cast<std::size_t>(m - 1)]);
    if (b.is_predict()) return prediction_reward(b.status(), outcome.status, m, spec);
  }
  throw ContractError("policy waits at age N");
}

double expected_action_reward(const DiscreteWorldModel& model, int age, std::size_t symbol, Action a,
                              const TabularPolicy& pi) {
  if (!model.reachable(age, symbol)) {
    throw DataError("context symbol '" + model.alphabet(age).at(symbol).name + "' has zero probability at age " +
                    std::to_string(age));
  }
  double sum = 0.0;
  for (const auto& o : model.outcomes()) {
    if (o.symbols[static_cast<std::size_t>(age - 1)] != symbol || o.probability == 0.0) continue;
    sum += continuation_reward(model, o, age, a, pi) * o.probability;
  }
  return sum;
}

double conditional_action_reward(const DiscreteWorldModel& model, int age, std::size_t symbol, Action a,
                                 const TabularPolicy& pi) {
  return expected_action_reward(model, age, symbol, a, pi) / model.marginal(age, symbol);
}

TabularPolicy best_response(const DiscreteWorldModel& model, const TabularPolicy& pi) {
  TabularPolicy next = pi;
  const RewardSpec& spec = model.reward_spec();
  for (int n = 1; n <= model.horizon(); ++n) {
    const auto actions = age_actions(spec, n);
    const std::size_t symbols = model.alphabet(n).size();
    std::vector<std::vector<double>> mu(symbols, std::vector<double>(actions.size(), 0.0));
    for (const auto& o : model.outcomes()) {
      if (o.probability == 0.0) continue;
      auto& row = mu[o.symbols[static_cast<std::size_t>(n - 1)]];
      for (std::size_t i = 0; i < actions.size(); ++i) {
        row[i] += continuation_reward(model, o, n, actions[i], pi) * o.probability;
      }
    }
    for (std::size_t x = 0; x < symbols; ++x) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < actions.size(); ++i) {
        if (mu[x][i] > mu[x][best]) best = i;
      }
      next.set(n, x, actions[best]);
    }
  }
  return next;
}

TabularPolicy solve(const DiscreteWorldModel& model) {
  TabularPolicy pi = TabularPolicy::constant(model, Action::predict(Status{0}));
  for (int i = 0; i < model.horizon(); ++i) pi = best_response(model, pi);
  if (!(best_response(model, pi) == pi)) {
    throw Error("best-response iteration did not reach a fixed point after N iterations");
  }
  return pi;
}

double policy_value(const DiscreteWorldModel& model, const TabularPolicy& pi) {
  double value = 0.0;
  for (const auto& o : model.outcomes()) {
    if (o.probability == 0.0) continue;
    value += continuation_reward(model, o, 1, pi.at(1, o.symbols[0]), pi) * o.probability;
  }
  return value;
}

std::vector<TabularPolicy> enumerate_policies(const DiscreteWorldModel& model, std::size_t limit) {
  struct Slot {
    int age;
    std::size_t symbol;
    std::size_t choices;
  };
  std::vector<Slot> slots;
  double count = 1.0;
  for (int n = 1; n <= model.horizon(); ++n) {
    const std::size_t choices = age_actions(model.reward_spec(), n).size();
    for (std::size_t x = 0; x < model.alphabet(n).size(); ++x) {
      slots.push_back({n, x, choices});
      count *= static_cast<double>(choices);
    }
  }
  if (count > static_cast<double>(limit)) {
    throw ContractError("policy space too large to enumerate (" + csv::format(count) + " policies)");
  }
  std::vector<TabularPolicy> out;
  std::vector<std::size_t> digits(slots.size(), 0);
  TabularPolicy pi = TabularPolicy::constant(model, Action::predict(Status{0}));
  while (true) {
    for (std::size_t i = 0; i < slots.size(); ++i) {
      pi.set(slots[i].age, slots[i].symbol, age_actions(model.reward_spec(), slots[i].age)[digits[i]]);
    }
    out.push_back(pi);
    std::size_t i = 0;
    while (i < slots.size() && ++digits[i] == slots[i].choices) digits[i++] = 0;
    if (i == slots.size()) break;
  }
  return out;
}

DiscreteWorldModel read_world(std::istream& in, const RewardSpec& spec, const std::string& source) {
  csv::Reader reader(in, source);
  std::string header = "";
  for (int n = 1; n <= spec.horizon(); ++n) header += "x_" + std::to_string(n) + ",";
  header += "s,probability";
  reader.expect_header(header);

  const auto horizon = static_cast<std::size_t>(spec.horizon());
  std::vector<std::vector<WorldSymbol>> alphabets(horizon);
  std::vector<WorldOutcome> outcomes;
  std::string line;
  while (reader.next(line)) {
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split(line);
    const std::size_t ln = reader.line_number();
    if (fields.size() != horizon + 2) throw ParseError(source, ln, "wrong number of columns");
    WorldOutcome o;
    for (std::size_t n = 0; n < horizon; ++n) {
      const std::string name(csv::trim(fields[n]));
      if (name.empty()) throw ParseError(source, ln, "empty context symbol");
      auto& alpha = alphabets[n];
      auto it = std::find_if(alpha.begin(), alpha.end(), [&](const WorldSymbol& s) { return s.name == name; });
      if (it == alpha.end()) {
        alpha.push_back(WorldSymbol{name, std::nullopt});
        it = alpha.end() - 1;
      }
      o.symbols.push_back(static_cast<std::size_t>(it - alpha.begin()));
    }
    o.status = Status{csv::to_uint(fields[horizon], source, ln)};
    if (o.status.index >= spec.num_statuses()) throw ParseError(source, ln, "status outside status space");
    o.probability = csv::to_double(fields[horizon + 1], source, ln);
    if (!(o.probability >= 0.0)) throw ParseError(source, ln, "negative probability");
    outcomes.push_back(std::move(o));
  }
  if (outcomes.empty()) throw DataError(source + ": world has no outcomes");
  return DiscreteWorldModel(spec, std::move(alphabets), std::move(outcomes));
}

DiscreteWorldModel load_world(const std::filesystem::path& path, const RewardSpec& spec) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read world file " + path.string());
  return read_world(in, spec, path.string());
}

void write_world(std::ostream& out, const DiscreteWorldModel& model) {
  for (int n = 1; n <= model.horizon(); ++n) out << "x_" << n << ',';
  out << "s,probability\n";
  for (const auto& o : model.outcomes()) {
    for (int n = 1; n <= model.horizon(); ++n) {
      out << model.alphabet(n)[o.symbols[static_cast<std::size_t>(n - 1)]].name << ',';
    }
    out << o.status.index << ',' << csv::format(o.probability) << '\n';
  }
}

namespace {

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t size) {
  std::vector<double> w(size);
  double total = 0.0;
  for (auto& v : w) {
    v = -std::log(1.0 - uniform01(rng));
    total += v;
  }
  for (auto& v : w) v /= total;
  return w;
}

DiscreteWorldModel draw_markov_world(const RewardSpec& spec, const std::vector<std::size_t>& sizes,
                                     std::mt19937_64& rng) {
  const auto horizon = static_cast<std::size_t>(spec.horizon());
  std::vector<std::vector<WorldSymbol>> alphabets(horizon);
  for (std::size_t n = 0; n < horizon; ++n) {
    for (std::size_t i = 0; i < sizes[n]; ++i) {
      alphabets[n].push_back(WorldSymbol{std::to_string(n + 1) + ":" + std::to_string(i), std::nullopt});
    }
  }
  const auto initial = random_simplex(rng, sizes[0]);
  std::vector<std::vector<std::vector<double>>> transitions(horizon - 1);
  for (std::size_t n = 0; n + 1 < horizon; ++n) {
    for (std::size_t i = 0; i < sizes[n]; ++i) transitions[n].push_back(random_simplex(rng, sizes[n + 1]));
  }
  std::vector<std::vector<double>> status_given_last;
  for (std::size_t i = 0; i < sizes[horizon - 1]; ++i) {
    status_given_last.push_back(random_simplex(rng, spec.num_statuses()));
  }

  std::vector<WorldOutcome> outcomes;
  std::vector<std::size_t> path(horizon, 0);
  double total = 0.0;
  while (true) {
    double prob = initial[path[0]];
    for (std::size_t n = 0; n + 1 < horizon; ++n) prob *= transitions[n][path[n]][path[n + 1]];
    for (std::size_t s = 0; s < spec.num_statuses(); ++s) {
      const double p = prob * status_given_last[path[horizon - 1]][s];
      outcomes.push_back(WorldOutcome{path, Status{s}, p});
      total += p;
    }
    bool wrapped = true;
    for (std::size_t n = horizon; n-- > 0;) {
      if (++path[n] < sizes[n]) {
        wrapped = false;
        break;
      }
      path[n] = 0;
    }
    if (wrapped) break;
  }
  for (auto& o : outcomes) o.probability /= total;
  return DiscreteWorldModel(spec, std::move(alphabets), std::move(outcomes));
}

}  // namespace

double min_action_gap(const DiscreteWorldModel& model, const TabularPolicy& optimal, double min_probability) {
  double gap = std::numeric_limits<double>::infinity();
  const RewardSpec& spec = model.reward_spec();
  for (int n = 1; n <= model.horizon(); ++n) {
    const auto actions = age_actions(spec, n);
    for (std::size_t x = 0; x < model.alphabet(n).size(); ++x) {
      if (!model.reachable(n, x) || model.marginal(n, x) < min_probability) continue;
      std::vector<double> mu;
      for (Action a : actions) mu.push_back(conditional_action_reward(model, n, x, a, optimal));
      std::sort(mu.begin(), mu.end(), std::greater<>());
      gap = std::min(gap, (mu[0] - mu[1]) / spec.u_max());
    }
  }
  return gap;
}

DiscreteWorldModel random_world(const RewardSpec& spec, const RandomWorldOptions& options, std::mt19937_64& rng) {
  if (options.alphabet_sizes.size() != static_cast<std::size_t>(spec.horizon())) {
    throw ConfigError("random world needs one alphabet size per age");
  }
  for (auto size : options.alphabet_sizes) {
    if (size == 0) throw ConfigError("random world alphabets must be non-empty");
  }
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    DiscreteWorldModel model = draw_markov_world(spec, options.alphabet_sizes, rng);
    if (options.min_gap <= 0.0) return model;
    if (min_action_gap(model, solve(model), options.min_probability) >= options.min_gap) return model;
  }
  throw ConfigError("no random world met the action-gap requirement");
}

}  // namespace popcast
