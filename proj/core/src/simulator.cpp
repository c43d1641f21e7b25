#include "popcast/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>
#include <ostream>

#include "popcast/csv.hpp"
#include "popcast/error.hpp"
#include "popcast/random.hpp"

namespace popcast {

std::string to_string(Archetype a) {
  switch (a) {
    case Archetype::steady: return "steady";
    case Archetype::early_reach: return "early_reach";
    case Archetype::late_takeoff: return "late_takeoff";
  }
  return "steady";
}

namespace {

ArchetypeParams steady(double weight, double views_min, double views_max, double reach, double share_max) {
  ArchetypeParams a;
  a.kind = Archetype::steady;
  a.weight = weight;
  a.views_min = views_min;
  a.views_max = views_max;
  a.reach_median = reach;
  a.reach_sigma = 0.8;
  a.share_min = 0.01;
  a.share_max = share_max;
  a.decay_min = 4;
  a.decay_max = 30;
  return a;
}

ArchetypeParams early_reach(double weight, double views_min, double views_max, double reach, double share_min,
                            double share_max, double decay_min, double decay_max) {
  ArchetypeParams a;
  a.kind = Archetype::early_reach;
  a.weight = weight;
  a.views_min = views_min;
  a.views_max = views_max;
  a.reach_median = reach;
  a.reach_sigma = 0.6;
  a.share_min = share_min;
  a.share_max = share_max;
  a.decay_min = decay_min;
  a.decay_max = decay_max;
  return a;
}

ArchetypeParams late_takeoff(double weight, double views_min, double views_max, double share_min, double share_max,
                             int takeoff_min, int takeoff_max) {
  ArchetypeParams a;
  a.kind = Archetype::late_takeoff;
  a.weight = weight;
  a.views_min = views_min;
  a.views_max = views_max;
  a.reach_median = 20;
  a.reach_sigma = 0.6;
  a.share_min = share_min;
  a.share_max = share_max;
  a.takeoff_min = takeoff_min;
  a.takeoff_max = takeoff_max;
  return a;
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

constexpr double kShareRatePrior = 0.05;
constexpr double kShareRateWeight = 20.0;  // pseudo-viewers

}  // namespace

SimParams SimParams::binary_default() {
  SimParams p;
  p.classes = {
      LatentClass{"Unpopular", 0.9,
                  {steady(0.8, 20, 8000, 12, 0.12),
                   early_reach(0.2, 200, 8000, 60, 0.01, 0.10, 3, 15)}},
      LatentClass{"Popular", 0.1,
                  {early_reach(0.55, 12000, 150000, 350, 0.05, 0.20, 8, 30),
                   late_takeoff(0.45, 12000, 80000, 0.18, 0.45, 30, 60)}},
  };
  p.thresholds = {10000};
  p.status_labels = {"Unpopular", "Popular"};
  return p;
}

SimParams SimParams::refined_default() {
  SimParams p;
  p.classes = {
      LatentClass{"Low", 0.6,
                  {steady(0.85, 20, 1800, 10, 0.10),
                   early_reach(0.15, 100, 1800, 40, 0.01, 0.08, 3, 15)}},
      LatentClass{"Medium", 0.3,
                  {early_reach(0.5, 2300, 9000, 80, 0.03, 0.15, 5, 25),
                   late_takeoff(0.5, 2300, 9000, 0.12, 0.30, 25, 55)}},
      LatentClass{"High", 0.1,
                  {early_reach(0.55, 12000, 150000, 350, 0.05, 0.20, 8, 30),
                   late_takeoff(0.45, 12000, 80000, 0.18, 0.45, 30, 60)}},
  };
  p.thresholds = {2000, 10000};
  p.status_labels = {"Low", "Medium", "High"};
  return p;
}

void SimParams::validate() const {
  if (horizon < 1) throw ConfigError("horizon must be at least 1");
  if (classes.empty()) throw ConfigError("at least one latent class is required");
  double total = 0.0;
  for (const auto& c : classes) {
    if (!(c.prior >= 0.0)) throw ConfigError("class priors must be non-negative");
    total += c.prior;
    if (c.archetypes.empty()) throw ConfigError("class " + c.name + " has no archetypes");
    double weights = 0.0;
    for (const auto& a : c.archetypes) {
      if (!(a.weight >= 0.0)) throw ConfigError("archetype weights must be non-negative");
      weights += a.weight;
      if (!(a.views_min > 0.0 && a.views_min <= a.views_max)) throw ConfigError("invalid final-view range");
      if (!(a.reach_median > 0.0 && a.reach_sigma >= 0.0)) throw ConfigError("invalid BrF parameters");
      if (!(a.share_min >= 0.0 && a.share_min <= a.share_max && a.share_max <= 1.0)) {
        throw ConfigError("invalid ShR range");
      }
      if (!(a.decay_min > 0.0 && a.decay_min <= a.decay_max)) throw ConfigError("invalid growth constants");
      if (a.takeoff_min > a.takeoff_max) throw ConfigError("invalid takeoff range");
      if (!(a.base_min >= 0.0 && a.base_min <= a.base_max && a.base_max < 1.0)) {
        throw ConfigError("invalid pre-takeoff fraction");
      }
      if (!(a.steepness_min > 0.0 && a.steepness_min <= a.steepness_max)) throw ConfigError("invalid steepness");
    }
    if (!(weights > 0.0)) throw ConfigError("class " + c.name + " has zero total archetype weight");
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("class priors must sum to 1");
  if (thresholds.empty()) throw ConfigError("at least one popularity threshold is required");
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > thresholds[i - 1])) throw ConfigError("thresholds must be strictly increasing");
  }
  if (status_labels.size() != thresholds.size() + 1) throw ConfigError("need one status label per level");
  if (!(caps.views_cap > 0.0 && caps.brf_cap > 0.0)) throw ConfigError("feature caps must be positive");
}

Status threshold_status(std::uint64_t final_views, const std::vector<double>& thresholds) {
  std::size_t level = 0;
  for (double t : thresholds) {
    if (static_cast<double>(final_views) > t) ++level;
  }
  return Status{level};
}

ContextVector normalize_features(const RawFeatures& raw, const FeatureCaps& caps) {
  if (!(caps.views_cap > 0.0 && caps.brf_cap > 0.0)) throw ConfigError("feature caps must be positive");
  auto log_ratio = [](double v, double cap) {
    return std::clamp(std::log1p(v) / std::log1p(cap), 0.0, 1.0);
  };
  std::vector<double> x{log_ratio(static_cast<double>(raw.cum_views), caps.views_cap),
                        log_ratio(static_cast<double>(raw.brf), caps.brf_cap), std::clamp(raw.shr, 0.0, 1.0)};
  if (caps.period_views) x.push_back(log_ratio(static_cast<double>(raw.period_views), caps.views_cap));
  return ContextVector(std::move(x));
}

VideoTrace generate_trace(const SimParams& params, std::uint64_t id) {
  std::mt19937_64 rng(derive_seed(params.seed, id));
  return generate_trace(params, id, rng);
}

VideoTrace generate_trace(const SimParams& params, std::uint64_t id, std::mt19937_64& rng) {
  // Latent class, then archetype within it.
  double u = uniform01(rng);
  const LatentClass* cls = &params.classes.back();
  for (const auto& c : params.classes) {
    if (u < c.prior) {
      cls = &c;
      break;
    }
    u -= c.prior;
  }
  double total_weight = 0.0;
  for (const auto& a : cls->archetypes) total_weight += a.weight;
  double v = uniform01(rng) * total_weight;
  const ArchetypeParams* arch = &cls->archetypes.back();
  for (const auto& a : cls->archetypes) {
    if (v < a.weight) {
      arch = &a;
      break;
    }
    v -= a.weight;
  }

  const int horizon = params.horizon;
  const double final_views = log_uniform(rng, arch->views_min, arch->views_max);
  const double reach = arch->reach_median * std::exp(arch->reach_sigma * standard_normal(rng));
  const double share = uniform(rng, arch->share_min, arch->share_max);
  const double reach_decay = uniform(rng, 2.0, 6.0);

  // Normalized cumulative-view curve f(n), f(0) = 0, f(N) = 1.
  std::vector<double> curve(static_cast<std::size_t>(horizon) + 1, 0.0);
  if (arch->kind == Archetype::late_takeoff) {
    const double takeoff = static_cast<double>(arch->takeoff_min) +
                           static_cast<double>(uniform_index(rng, static_cast<std::uint64_t>(
                                                                      arch->takeoff_max - arch->takeoff_min + 1)));
    const double base = uniform(rng, arch->base_min, arch->base_max);
    const double width = uniform(rng, arch->steepness_min, arch->steepness_max);
    const double lo = logistic(-takeoff / width);
    const double hi = logistic((horizon - takeoff) / width);
    for (int n = 1; n <= horizon; ++n) {
      const double growth = (logistic((n - takeoff) / width) - lo) / (hi - lo);
      curve[static_cast<std::size_t>(n)] = base * n / horizon + (1.0 - base) * growth;
    }
  } else {
    const double tau = uniform(rng, arch->decay_min, arch->decay_max);
    const double norm = 1.0 - std::exp(-horizon / tau);
    for (int n = 1; n <= horizon; ++n) curve[static_cast<std::size_t>(n)] = (1.0 - std::exp(-n / tau)) / norm;
  }

  std::vector<RawFeatures> raw(static_cast<std::size_t>(horizon));
  const double reach_norm = 1.0 - std::exp(-horizon / reach_decay);
  std::uint64_t prev_views = 0;
  double noise = standard_normal(rng);
  for (int n = 1; n <= horizon; ++n) {
    auto& r = raw[static_cast<std::size_t>(n - 1)];
    const double target = n == horizon ? final_views : final_views * curve[static_cast<std::size_t>(n)];
    r.cum_views = std::max(prev_views, static_cast<std::uint64_t>(std::llround(target)));
    r.period_views = r.cum_views - prev_views;
    prev_views = r.cum_views;

    const double brf = reach * (1.0 - std::exp(-n / reach_decay)) / reach_norm;
    r.brf = std::min(r.cum_views, static_cast<std::uint64_t>(std::llround(brf)));

    // Spreaders among the viewers so far, with persistent sampling noise. The
    // reported rate is shrunk toward kShareRatePrior so that a handful of early
    // viewers cannot produce an extreme ShR.
    noise = 0.8 * noise + 0.6 * standard_normal(rng);
    const double viewers = static_cast<double>(r.cum_views);
    const double spreaders =
        std::clamp(std::round(share * viewers + std::sqrt(viewers * share * (1.0 - share)) * noise), 0.0, viewers);
    r.shr = (spreaders + kShareRatePrior * kShareRateWeight) / (viewers + kShareRateWeight);
  }
  return trace_from_raw(id, std::move(raw), params);
}

VideoTrace trace_from_raw(std::uint64_t id, std::vector<RawFeatures> raw, const SimParams& params) {
  if (raw.size() != static_cast<std::size_t>(params.horizon)) {
    throw DataError("trace " + std::to_string(id) + " does not cover N ages");
  }
  VideoTrace trace;
  trace.id = id;
  trace.contexts.reserve(raw.size());
  for (const auto& r : raw) trace.contexts.push_back(normalize_features(r, params.caps));
  trace.status = threshold_status(raw.back().cum_views, params.thresholds);
  trace.raw = std::move(raw);
  return trace;
}

std::vector<VideoTrace> generate_corpus(const SimParams& params, std::size_t count) {
  params.validate();
  std::vector<VideoTrace> traces;
  traces.reserve(count);
  for (std::size_t k = 0; k < count; ++k) traces.push_back(generate_trace(params, k));
  return traces;
}

void write_traces(std::ostream& out, const std::vector<VideoTrace>& traces) {
  out << "video_id,age,cum_views,period_views,brf,shr,final_status\n";
  for (const auto& t : traces) {
    if (t.raw.empty()) throw ContractError("trace " + std::to_string(t.id) + " has no raw features to write");
    for (std::size_t n = 0; n < t.raw.size(); ++n) {
      const auto& r = t.raw[n];
      out << t.id << ',' << n + 1 << ',' << r.cum_views << ',' << r.period_views << ',' << r.brf << ','
          << csv::format(r.shr) << ',' << t.status.index << '\n';
    }
  }
}

std::vector<VideoTrace> read_traces(std::istream& in, const SimParams& params, const std::string& source) {
  csv::Reader reader(in, source);
  reader.expect_header("video_id,age,cum_views,period_views,brf,shr,final_status");
  const auto horizon = static_cast<std::size_t>(params.horizon);
  std::vector<VideoTrace> traces;
  std::vector<RawFeatures> raw;
  std::uint64_t current = 0;
  std::uint64_t declared = 0;
  std::size_t last_line = 0;

  auto flush = [&]() {
    if (raw.empty()) return;
    if (raw.size() != horizon) {
      throw ParseError(source, last_line, "video " + std::to_string(current) + " has " + std::to_string(raw.size()) +
                                              " ages, expected " + std::to_string(horizon));
    }
    VideoTrace t = trace_from_raw(current, std::move(raw), params);
    if (t.status.index != declared) {
      throw ParseError(source, last_line, "final_status " + std::to_string(declared) +
                                              " disagrees with the threshold rule (" +
                                              std::to_string(t.status.index) + ")");
    }
    traces.push_back(std::move(t));
    raw.clear();
  };

  std::string line;
  while (reader.next(line)) {
    if (csv::trim(line).empty()) continue;
    const std::size_t ln = reader.line_number();
    const auto f = csv::split(line);
    if (f.size() != 7) throw ParseError(source, ln, "expected 7 columns");
    const std::uint64_t id = csv::to_uint(f[0], source, ln);
    const std::uint64_t age = csv::to_uint(f[1], source, ln);
    RawFeatures r;
    r.cum_views = csv::to_uint(f[2], source, ln);
    r.period_views = csv::to_uint(f[3], source, ln);
    r.brf = csv::to_uint(f[4], source, ln);
    r.shr = csv::to_double(f[5], source, ln);
    const std::uint64_t status = csv::to_uint(f[6], source, ln);

    if (raw.empty() || id != current) {
      flush();
      current = id;
      if (age != 1) throw ParseError(source, ln, "video " + std::to_string(id) + " must start at age 1");
    } else if (age != raw.size() + 1) {
      throw ParseError(source, ln, "ages must be contiguous, got " + std::to_string(age));
    } else if (r.cum_views < raw.back().cum_views) {
      throw ParseError(source, ln, "cumulative views decrease");
    }
    if (!(r.shr >= 0.0 && r.shr <= 1.0)) throw ParseError(source, ln, "shr outside [0,1]");
    if (age > horizon) throw ParseError(source, ln, "age exceeds horizon");
    declared = status;
    last_line = ln;
    raw.push_back(r);
  }
  flush();
  return traces;
}

std::vector<VideoTrace> load_traces(const std::filesystem::path& path, const SimParams& params) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read trace file " + path.string());
  return read_traces(in, params, path.string());
}

std::string to_string(ArrivalKind k) { return k == ArrivalKind::worst ? "worst" : "best"; }

ArrivalKind parse_arrival_kind(std::string_view text) {
  if (text == "worst") return ArrivalKind::worst;
  if (text == "best") return ArrivalKind::best;
  throw ConfigError("arrival kind must be 'worst' or 'best', got '" + std::string(text) + "'");
}

unsigned best_case_level(std::size_t count, double p) {
  const double levels = std::ceil(std::log2(static_cast<double>(count)) / p);
  return static_cast<unsigned>(levels) + 1;
}

std::vector<ContextVector> generate_arrival_contexts(ArrivalKind kind, std::size_t count, std::size_t dim, double p,
                                                     std::mt19937_64& rng) {
  if (count == 0) throw ConfigError("arrival count must be at least 1");
  if (dim == 0) throw ConfigError("arrival dimension must be at least 1");
  if (!(p > 0.0)) throw ConfigError("split exponent p must be positive");
  std::vector<ContextVector> points;

  if (kind == ArrivalKind::best) {
    const unsigned level = best_case_level(count, p);
    if (level > 50) throw ConfigError("best-case cube level too deep");
    points.reserve(count);
    const double side = std::ldexp(1.0, -static_cast<int>(level));
    std::vector<double> corner(dim);
    for (auto& c : corner) c = static_cast<double>(uniform_index(rng, std::uint64_t{1} << level)) * side;
    for (std::size_t k = 0; k < count; ++k) {
      std::vector<double> x(dim);
      for (std::size_t i = 0; i < dim; ++i) x[i] = corner[i] + uniform01(rng) * side;
      points.emplace_back(std::move(x));
    }
    return points;
  }

  // Smallest m with m^d >= K; then (m-1)^d < K so the grid spacing 1/(m-1)
  // exceeds K^(-1/d).
  const double k = static_cast<double>(count);
  const double d = static_cast<double>(dim);
  auto m = static_cast<std::uint64_t>(std::max(1.0, std::floor(std::pow(k, 1.0 / d))));
  while (std::pow(static_cast<double>(m), d) < k) ++m;
  while (m > 1 && std::pow(static_cast<double>(m - 1), d) >= k) --m;
  const double grid_points = std::pow(static_cast<double>(m), d);
  if (grid_points > 0x1.0p62) {
    throw ConfigError("infeasible arrival process: the " + std::to_string(count) + "-point grid in " +
                      std::to_string(dim) + " dimensions cannot be indexed");
  }
  if (m == 1) {
    std::vector<double> x(dim);
    for (auto& c : x) c = uniform01(rng);
    points.emplace_back(std::move(x));
    return points;
  }
  const double spacing = 1.0 / static_cast<double>(m - 1);
  const double min_distance = std::pow(k, -1.0 / d);
  if (spacing - min_distance < 1e-9 * min_distance) {
    throw ConfigError("infeasible arrival process: separation K^(-1/d) for K = " + std::to_string(count) +
                      " is below floating-point resolution");
  }
  const double jitter = (spacing - min_distance) / 2.0 * (1.0 - 1e-6);

  points.reserve(count);

  // K distinct grid cells (Floyd's sampling), then a random order.
  const auto grid_size = static_cast<std::uint64_t>(grid_points);
  std::vector<std::uint64_t> cells;
  cells.reserve(count);
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(count * 2);
  for (std::uint64_t j = grid_size - count; j < grid_size; ++j) {
    const std::uint64_t t = uniform_index(rng, j + 1);
    const std::uint64_t pick = chosen.insert(t).second ? t : j;
    if (pick == j) chosen.insert(j);
    cells.push_back(pick);
  }
  for (std::size_t i = cells.size(); i > 1; --i) std::swap(cells[i - 1], cells[uniform_index(rng, i)]);

  for (std::uint64_t cell : cells) {
    std::vector<double> x(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      const auto g = static_cast<double>(cell % m);
      cell /= m;
      x[i] = std::clamp(g * spacing + jitter * (2.0 * uniform01(rng) - 1.0), 0.0, 1.0);
    }
    points.emplace_back(std::move(x));
  }
  return points;
}

void write_arrivals(std::ostream& out, const std::vector<ContextVector>& points) {
  out << "index";
  const std::size_t dim = points.empty() ? 0 : points.front().dim();
  for (std::size_t i = 0; i < dim; ++i) out << ",x_" << i;
  out << '\n';
  for (std::size_t k = 0; k < points.size(); ++k) {
    out << k;
    for (double c : points[k].coords()) out << ',' << csv::format(c);
    out << '\n';
  }
}

}  // namespace popcast
