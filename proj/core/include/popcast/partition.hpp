#pragma once

// Adaptive dyadic partition of [0,1]^d with per-cube, per-action reward
// statistics. A level-l cube stays active until it has received A * 2^(p*l)
// context arrivals, at which point its 2^d level-(l+1) children replace it.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "popcast/model.hpp"

namespace popcast {

// Actions available to one age learner: every Predict plus, optionally, Wait.
class ActionSet {
 public:
  ActionSet(std::size_t num_statuses, bool allow_wait);

  std::size_t num_statuses() const noexcept { return num_statuses_; }
  bool allows_wait() const noexcept { return allow_wait_; }
  std::size_t size() const noexcept { return num_statuses_ + (allow_wait_ ? 1 : 0); }
  // i-th action in canonical order.
  Action at(std::size_t i) const noexcept { return Action::from_ordinal(i, num_statuses_); }
  bool contains(Action a) const noexcept;
  std::size_t index_of(Action a) const;

  friend bool operator==(const ActionSet&, const ActionSet&) = default;

 private:
  std::size_t num_statuses_;
  bool allow_wait_;
};

// Box prod_i [c_i 2^-l, (c_i + 1) 2^-l), closed on the upper face at 1.0.
struct Hypercube {
  unsigned level = 0;
  std::vector<std::uint64_t> coords;

  double side() const;
  bool contains(const ContextVector& x) const;
  std::vector<double> center() const;

  friend bool operator==(const Hypercube&, const Hypercube&) = default;
};

// Cell index of coordinate x at the given level; 1.0 maps to the last cell.
std::uint64_t cell_index(double x, unsigned level);

struct CubeStats {
  std::uint64_t arrivals = 0;
  std::vector<std::uint64_t> counts;
  std::vector<double> means;

  friend bool operator==(const CubeStats&, const CubeStats&) = default;
};

struct CubeId {
  std::uint32_t value = 0;

  friend auto operator<=>(const CubeId&, const CubeId&) = default;
};

class PartitionState {
 public:
  PartitionState(std::size_t dim, ActionSet actions, double A, double p);

  std::size_t dim() const noexcept { return dim_; }
  const ActionSet& actions() const noexcept { return actions_; }
  double A() const noexcept { return A_; }
  double p() const noexcept { return p_; }
  // Number of arrivals registered so far (instance counter k).
  std::uint64_t instances() const noexcept { return instances_; }

  double split_threshold(unsigned level) const;

  // Active cube containing x.
  CubeId locate(const ContextVector& x) const;

  // Counts one arrival in an active cube and splits it once the count reaches
  // the level threshold. Returns true if the cube split.
  bool register_arrival(CubeId id);

  // Folds one reward in [0,1] into the running mean of (cube, action). The
  // cube may have split since it was located; its record is retained and the
  // children are not touched.
  void update_estimate(CubeId id, Action a, double reward);

  // Highest estimate, ties broken by canonical action order.
  Action best_action(CubeId id) const;

  const Hypercube& cube(CubeId id) const { return record(id).cube; }
  const CubeStats& stats(CubeId id) const { return record(id).stats; }
  bool is_active(CubeId id) const { return record(id).active; }

  std::size_t cube_count() const noexcept { return records_.size(); }
  std::size_t active_count() const noexcept { return active_count_; }
  std::vector<CubeId> active_cubes() const;
  unsigned max_active_level() const;

  // CSV snapshot, one row per cube record (active and retained):
  // level,c0..c{d-1},active,arrivals,n_<action>,mean_<action>...
  void write_snapshot(std::ostream& out) const;
  static PartitionState read_snapshot(std::istream& in, std::size_t dim, ActionSet actions, double A,
                                      double p, const std::string& source = "snapshot");

  friend bool operator==(const PartitionState&, const PartitionState&) = default;

 private:
  static constexpr std::uint32_t kNoChildren = 0xffffffffu;

  struct Record {
    Hypercube cube;
    CubeStats stats;
    std::uint32_t first_child = kNoChildren;
    bool active = true;

    friend bool operator==(const Record&, const Record&) = default;
  };

  const Record& record(CubeId id) const;
  Record& record(CubeId id);
  CubeStats fresh_stats() const;
  void split(std::uint32_t index);

  std::size_t dim_;
  ActionSet actions_;
  double A_;
  double p_;
  std::uint64_t instances_ = 0;
  std::size_t active_count_ = 1;
  std::vector<Record> records_;
};

}  // namespace popcast
