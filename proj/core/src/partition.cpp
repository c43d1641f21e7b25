#include "popcast/partition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "popcast/csv.hpp"
#include "popcast/error.hpp"

namespace popcast {

namespace {

// Deep enough for any reachable partition: reaching level 60 needs more than
// 2^60 arrivals under the split rule with A >= 1 and p >= 1.
constexpr unsigned kMaxLevel = 60;

}  // namespace

ActionSet::ActionSet(std::size_t num_statuses, bool allow_wait)
    : num_statuses_(num_statuses), allow_wait_(allow_wait) {
  if (num_statuses_ < 2) throw ConfigError("action set needs at least two statuses");
}

bool ActionSet::contains(Action a) const noexcept {
  return a.is_wait() ? allow_wait_ : a.status().index < num_statuses_;
}

std::size_t ActionSet::index_of(Action a) const {
  if (!contains(a)) throw ContractError("action " + to_string(a) + " is not in this action set");
  return a.ordinal(num_statuses_);
}

double Hypercube::side() const { return std::ldexp(1.0, -static_cast<int>(level)); }

std::uint64_t cell_index(double x, unsigned level) {
  const std::uint64_t cells = std::uint64_t{1} << level;
  const double scaled = std::floor(std::ldexp(x, static_cast<int>(level)));
  if (scaled <= 0.0) return 0;
  const auto idx = static_cast<std::uint64_t>(scaled);
  return std::min(idx, cells - 1);
}

bool Hypercube::contains(const ContextVector& x) const {
  if (x.dim() != coords.size()) return false;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (cell_index(x[i], level) != coords[i]) return false;
  }
  return true;
}

std::vector<double> Hypercube::center() const {
  std::vector<double> c(coords.size());
  const double s = side();
  for (std::size_t i = 0; i < coords.size(); ++i) c[i] = (static_cast<double>(coords[i]) + 0.5) * s;
  return c;
}

PartitionState::PartitionState(std::size_t dim, ActionSet actions, double A, double p)
    : dim_(dim), actions_(actions), A_(A), p_(p) {
  if (dim_ == 0 || dim_ > 16) throw ConfigError("context dimension must be in [1,16]");
  if (!(A_ > 0.0) || !std::isfinite(A_)) throw ConfigError("split parameter A must be positive");
  if (!(p_ > 0.0) || !std::isfinite(p_)) throw ConfigError("split exponent p must be positive");
  records_.push_back(Record{Hypercube{0, std::vector<std::uint64_t>(dim_, 0)}, fresh_stats()});
}

CubeStats PartitionState::fresh_stats() const {
  return CubeStats{0, std::vector<std::uint64_t>(actions_.size(), 0), std::vector<double>(actions_.size(), 0.0)};
}

double PartitionState::split_threshold(unsigned level) const {
  return A_ * std::exp2(p_ * static_cast<double>(level));
}

const PartitionState::Record& PartitionState::record(CubeId id) const {
  if (id.value >= records_.size()) throw ContractError("unknown cube handle");
  return records_[id.value];
}

PartitionState::Record& PartitionState::record(CubeId id) {
  if (id.value >= records_.size()) throw ContractError("unknown cube handle");
  return records_[id.value];
}

CubeId PartitionState::locate(const ContextVector& x) const {
  if (x.dim() != dim_) {
    throw ContractError("context has dimension " + std::to_string(x.dim()) + ", partition expects " +
                        std::to_string(dim_));
  }
  std::uint32_t index = 0;
  while (!records_[index].active) {
    const Record& rec = records_[index];
    const unsigned child_level = rec.cube.level + 1;
    std::uint32_t offset = 0;
    for (std::size_t i = 0; i < dim_; ++i) {
      offset |= static_cast<std::uint32_t>(cell_index(x[i], child_level) & 1u) << i;
    }
    index = rec.first_child + offset;
  }
  return CubeId{index};
}

bool PartitionState::register_arrival(CubeId id) {
  Record& rec = record(id);
  if (!rec.active) throw ContractError("stale cube handle: cube has already split");
  ++rec.stats.arrivals;
  ++instances_;
  if (static_cast<double>(rec.stats.arrivals) >= split_threshold(rec.cube.level)) {
    split(id.value);
    return true;
  }
  return false;
}

void PartitionState::split(std::uint32_t index) {
  const unsigned level = records_[index].cube.level;
  if (level >= kMaxLevel) throw ContractError("partition exceeded the maximum supported depth");
  const std::uint32_t children = std::uint32_t{1} << dim_;
  const auto first = static_cast<std::uint32_t>(records_.size());
  records_.reserve(records_.size() + children);
  const std::vector<std::uint64_t> parent = records_[index].cube.coords;
  for (std::uint32_t offset = 0; offset < children; ++offset) {
    Hypercube child{level + 1, std::vector<std::uint64_t>(dim_)};
    for (std::size_t i = 0; i < dim_; ++i) child.coords[i] = 2 * parent[i] + ((offset >> i) & 1u);
    records_.push_back(Record{std::move(child), fresh_stats()});
  }
  records_[index].active = false;
  records_[index].first_child = first;
  active_count_ += children - 1;
}

void PartitionState::update_estimate(CubeId id, Action a, double reward) {
  if (!(reward >= 0.0 && reward <= 1.0)) {
    throw ContractError("reward " + std::to_string(reward) + " outside [0,1]");
  }
  CubeStats& stats = record(id).stats;
  const std::size_t i = actions_.index_of(a);
  const auto m = ++stats.counts[i];
  stats.means[i] += (reward - stats.means[i]) / static_cast<double>(m);
}

Action PartitionState::best_action(CubeId id) const {
  const CubeStats& stats = record(id).stats;
  std::size_t best = 0;
  for (std::size_t i = 1; i < stats.means.size(); ++i) {
    if (stats.means[i] > stats.means[best]) best = i;
  }
  return actions_.at(best);
}

std::vector<CubeId> PartitionState::active_cubes() const {
  std::vector<CubeId> out;
  out.reserve(active_count_);
  for (std::uint32_t i = 0; i < records_.size(); ++i) {
    if (records_[i].active) out.push_back(CubeId{i});
  }
  return out;
}

unsigned PartitionState::max_active_level() const {
  unsigned level = 0;
  for (const auto& rec : records_) {
    if (rec.active) level = std::max(level, rec.cube.level);
  }
  return level;
}

void PartitionState::write_snapshot(std::ostream& out) const {
  out << "level";
  for (std::size_t i = 0; i < dim_; ++i) out << ",c" << i;
  out << ",active,arrivals";
  for (std::size_t a = 0; a < actions_.size(); ++a) {
    const std::string name = to_string(actions_.at(a));
    out << ",n_" << name << ",mean_" << name;
  }
  out << '\n';
  for (const auto& rec : records_) {
    out << rec.cube.level;
    for (auto c : rec.cube.coords) out << ',' << c;
    out << ',' << (rec.active ? 1 : 0) << ',' << rec.stats.arrivals;
    for (std::size_t a = 0; a < actions_.size(); ++a) {
      out << ',' << rec.stats.counts[a] << ',' << csv::format(rec.stats.means[a]);
    }
    out << '\n';
  }
}

PartitionState PartitionState::read_snapshot(std::istream& in, std::size_t dim, ActionSet actions,
                                             double A, double p, const std::string& source) {
  PartitionState state(dim, actions, A, p);
  state.records_.clear();
  state.active_count_ = 0;

  csv::Reader reader(in, source);
  std::string header = "level";
  for (std::size_t i = 0; i < dim; ++i) header += ",c" + std::to_string(i);
  header += ",active,arrivals";
  for (std::size_t a = 0; a < actions.size(); ++a) {
    const std::string name = to_string(actions.at(a));
    header += ",n_" + name + ",mean_" + name;
  }
  reader.expect_header(header);

  const std::size_t columns = dim + 3 + 2 * actions.size();
  std::map<std::pair<unsigned, std::vector<std::uint64_t>>, std::uint32_t> index_of;
  std::string line;
  while (reader.next(line)) {
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    const std::size_t ln = reader.line_number();
    if (fields.size() != columns) throw ParseError(source, ln, "wrong number of columns");
    Record rec;
    rec.cube.level = static_cast<unsigned>(csv::to_uint(fields[0], source, ln));
    for (std::size_t i = 0; i < dim; ++i) rec.cube.coords.push_back(csv::to_uint(fields[1 + i], source, ln));
    rec.active = csv::to_uint(fields[dim + 1], source, ln) != 0;
    rec.stats = state.fresh_stats();
    rec.stats.arrivals = csv::to_uint(fields[dim + 2], source, ln);
    for (std::size_t a = 0; a < actions.size(); ++a) {
      rec.stats.counts[a] = csv::to_uint(fields[dim + 3 + 2 * a], source, ln);
      rec.stats.means[a] = csv::to_double(fields[dim + 4 + 2 * a], source, ln);
    }
    const auto self = static_cast<std::uint32_t>(state.records_.size());
    if (self == 0) {
      if (rec.cube.level != 0) throw DataError(source + ": first record must be the root cube");
    } else {
      std::vector<std::uint64_t> parent_coords(rec.cube.coords);
      for (auto& c : parent_coords) c >>= 1;
      auto parent = index_of.find({rec.cube.level - 1, parent_coords});
      if (rec.cube.level == 0 || parent == index_of.end()) {
        throw ParseError(source, ln, "cube has no parent record");
      }
      Record& pr = state.records_[parent->second];
      std::uint32_t offset = 0;
      for (std::size_t i = 0; i < dim; ++i) offset |= static_cast<std::uint32_t>(rec.cube.coords[i] & 1u) << i;
      if (offset == 0) {
        if (pr.active) throw ParseError(source, ln, "children listed under an active cube");
        pr.first_child = self;
      } else if (pr.first_child == kNoChildren || pr.first_child + offset != self) {
        throw ParseError(source, ln, "sibling cubes must be contiguous and ordered");
      }
    }
    if (!index_of.emplace(std::make_pair(rec.cube.level, rec.cube.coords), self).second) {
      throw ParseError(source, ln, "duplicate cube");
    }
    if (rec.active) ++state.active_count_;
    state.records_.push_back(std::move(rec));
  }
  if (state.records_.empty()) throw DataError(source + ": snapshot has no cubes");
  for (const auto& rec : state.records_) {
    if (!rec.active && (rec.first_child == kNoChildren ||
                        rec.first_child + (std::size_t{1} << dim) > state.records_.size())) {
      throw DataError(source + ": inactive cube without a complete set of children");
    }
    state.instances_ += rec.stats.arrivals;
  }
  return state;
}

}  // namespace popcast
