#pragma once

// Synthetic propagation traces with views, branching factor (BrF, viewers who
// directly follow the initiator) and share rate (ShR, fraction of viewers who
// re-share), plus the arrival processes used for regret experiments.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "popcast/model.hpp"

namespace popcast {

// Propagation shapes. steady: views saturate from age 1. early_reach: same
// curve but a large initiator audience. late_takeoff: little traffic until a
// takeoff age, then logistic growth driven by a high share rate.
enum class Archetype { steady, early_reach, late_takeoff };

std::string to_string(Archetype a);

struct ArchetypeParams {
  Archetype kind = Archetype::steady;
  double weight = 1.0;                       // share within the latent class
  double views_min = 20, views_max = 8000;   // final views, log-uniform
  double reach_median = 12, reach_sigma = 0.7;  // final BrF, log-normal
  double share_min = 0.01, share_max = 0.12;    // ShR level, uniform
  double decay_min = 4, decay_max = 30;         // growth time constant (periods)
  int takeoff_min = 30, takeoff_max = 60;       // late_takeoff only
  double base_min = 0.02, base_max = 0.08;      // pre-takeoff share of final views
  double steepness_min = 3, steepness_max = 8;  // logistic width (periods)
};

struct LatentClass {
  std::string name;
  double prior = 0.0;
  std::vector<ArchetypeParams> archetypes;
};

struct FeatureCaps {
  double views_cap = 200000;
  double brf_cap = 5000;
  bool period_views = false;  // adds log period views as a 4th coordinate
};

struct SimParams {
  int horizon = 100;
  std::vector<LatentClass> classes;
  std::vector<double> thresholds{10000};  // status = number of thresholds strictly exceeded
  std::vector<std::string> status_labels{"Unpopular", "Popular"};
  FeatureCaps caps;
  std::uint64_t seed = 1;

  // Unpopular/Popular with a 10% popular prior and a 10000-view threshold.
  static SimParams binary_default();
  // Low/Medium/High at 60/30/10% with thresholds 2000 and 10000.
  static SimParams refined_default();

  void validate() const;
  std::size_t num_statuses() const noexcept { return thresholds.size() + 1; }
  std::size_t context_dim() const noexcept { return caps.period_views ? 4 : 3; }
};

struct RawFeatures {
  std::uint64_t cum_views = 0;
  std::uint64_t period_views = 0;
  std::uint64_t brf = 0;
  double shr = 0.0;

  friend bool operator==(const RawFeatures&, const RawFeatures&) = default;
};

struct VideoTrace {
  std::uint64_t id = 0;
  std::vector<ContextVector> contexts;  // ages 1..N
  Status status;
  std::vector<RawFeatures> raw;  // empty when only contexts are known

  friend bool operator==(const VideoTrace&, const VideoTrace&) = default;
};

Status threshold_status(std::uint64_t final_views, const std::vector<double>& thresholds);

// (log(1+views)/log(1+V_cap), log(1+BrF)/log(1+B_cap), ShR[, log(1+period)/log(1+V_cap)])
// with every coordinate clamped to [0,1].
ContextVector normalize_features(const RawFeatures& raw, const FeatureCaps& caps);

// Deterministic per trace: the generator is seeded from (params.seed, id).
VideoTrace generate_trace(const SimParams& params, std::uint64_t id);
VideoTrace generate_trace(const SimParams& params, std::uint64_t id, std::mt19937_64& rng);
std::vector<VideoTrace> generate_corpus(const SimParams& params, std::size_t count);

// Builds a trace (contexts and label) from raw features.
VideoTrace trace_from_raw(std::uint64_t id, std::vector<RawFeatures> raw, const SimParams& params);

// Trace CSV: video_id,age,cum_views,period_views,brf,shr,final_status
void write_traces(std::ostream& out, const std::vector<VideoTrace>& traces);
std::vector<VideoTrace> read_traces(std::istream& in, const SimParams& params, const std::string& source = "traces");
std::vector<VideoTrace> load_traces(const std::filesystem::path& path, const SimParams& params);

enum class ArrivalKind { worst, best };

std::string to_string(ArrivalKind k);
ArrivalKind parse_arrival_kind(std::string_view text);

// worst: K points of a jittered grid in random order, pairwise (sup-norm and
// Euclidean) distance >= K^(-1/d). best: K uniform points inside one level
// ceil(log2(K)/p)+1 cube.
std::vector<ContextVector> generate_arrival_contexts(ArrivalKind kind, std::size_t count, std::size_t dim, double p,
                                                     std::mt19937_64& rng);

// Level of the best-case containing cube for K arrivals.
unsigned best_case_level(std::size_t count, double p);

// Arrival CSV: index,x_0,...,x_{d-1}
void write_arrivals(std::ostream& out, const std::vector<ContextVector>& points);

}  // namespace popcast
