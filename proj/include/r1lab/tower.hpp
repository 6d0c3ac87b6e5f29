#ifndef R1LAB_TOWER_HPP_
#define R1LAB_TOWER_HPP_

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "r1lab/bigmath.hpp"
#include "r1lab/sequences.hpp"

namespace r1lab {

// Cutting-and-stacking schedules.
//
// Stage j is a tower of h_j floors of width w_j. It is cut into r_j columns,
// s_j(i) spacer floors go on top of column i, and the columns are stacked:
//   h_{j+1} = r_j * h_j + sum_i s_j(i),   w_{j+1} = w_j / r_j.
// Column i's bottom floor sits at offset sum_{m<i} (h_j + s_j(m)) inside the
// stage-(j+1) index range, so floor k of stage j embeds at the indices
// {offset_i + k}. Everything downstream (floor sets, the shift map, block
// permutations) works on these integer indices with exact arithmetic.

enum class Preset { halving, katok, custom };

struct CustomStageRule {
  int cuts = 2;
  std::vector<Int> spacers;
};

struct ConstructionParams {
  Preset preset = Preset::halving;
  Rat base_width = Rat(1);
  // Stages built with Katok spacers (r_j = 2j; j zeros then j ones).
  std::set<int> modification_stages;
  // 0: spacer s_j(2) = max{p(j h_j), q(j h_j)} + 1 (smallest admissible).
  // k >= 1: s_j(2) = max{p,q}(k*j*h_j + 1) + 2 h_j + 1, which pushes the
  // stage-j checkpoint past k*j*h_j.
  long growth_multiplier = 0;
  // custom preset: rule for stage j is custom_stages[j-1], with the last
  // entry reused beyond the list. The final spacer of a stage is the
  // headroom the next stage gains above top-adjacent sets, so a schedule
  // meant to absorb large shifts needs a generous final spacer somewhere.
  std::vector<CustomStageRule> custom_stages;
};

struct TowerStage {
  int index = 0;  // j, 1-based
  Int height;     // h_j
  Rat width;      // w_j
  int cuts = 0;   // r_j
  std::vector<Int> spacers;  // s_j(1..r_j)
  std::vector<Int> offsets;  // column bottom offsets inside stage j+1
  Int next_height;           // h_{j+1}
};

class TowerSchedule {
 public:
  TowerSchedule() = default;
  TowerSchedule(ConstructionParams params, std::vector<TowerStage> stages);

  int j_max() const { return static_cast<int>(stages_.size()); }
  const ConstructionParams& params() const { return params_; }
  const std::vector<TowerStage>& stages() const { return stages_; }
  const TowerStage& stage(int j) const;  // 1 <= j <= j_max

  // Heights and widths are defined up to the ceiling stage j_max + 1.
  const Int& height(int j) const;
  const Rat& width(int j) const;
  bool is_halving_stage(int j) const;  // r_j = 2 and s_j(1) = 0

  // Offsets of all copies of stage `from` inside stage `to` (sorted sums of
  // per-stage column offsets). from <= to <= j_max + 1.
  std::vector<Int> embedding_offsets(int from, int to) const;

  std::string digest() const;  // stable fingerprint for trace metadata

 private:
  ConstructionParams params_;
  std::vector<TowerStage> stages_;
  Rat ceiling_width_;
};

// Builds stages 1..j_max; the halving preset derives spacers from the
// supplied sequences, Katok stages come from params.modification_stages.
TowerSchedule build_schedule(const ConstructionParams& params,
                             const SequencePair& seq, int j_max);

// A measurable set at a fixed stage: sorted disjoint half-open index runs.
struct Run {
  Int lo;
  Int hi;  // exclusive
  bool operator==(const Run& o) const { return lo == o.lo && hi == o.hi; }
};

struct FloorSet {
  int stage = 1;
  std::vector<Run> runs;  // sorted, disjoint, non-adjacent

  bool empty() const { return runs.empty(); }
  Int total_length() const;
  const Int& min_index() const { return runs.front().lo; }
  const Int& max_index() const { return runs.back().hi; }  // exclusive
};

FloorSet make_floor_set(int stage, std::vector<Run> runs);  // normalizes
FloorSet empty_set(int stage);
FloorSet tower_set(const TowerSchedule& s, int j);              // X_j
FloorSet floor_set(const TowerSchedule& s, int j, const Int& k);  // one floor

// Re-expresses the same point set at a higher stage; measure is unchanged.
FloorSet lift(const FloorSet& set, const TowerSchedule& s, int target_stage);

// S^k(set). Positive k auto-lifts until the translate fits below the top
// floor; negative k is an in-stage translation (the minimum index of a set
// is invariant under lifting, so no lift can help).
FloorSet shift(const FloorSet& set, const Int& k, const TowerSchedule& s);

FloorSet intersect(const FloorSet& a, const FloorSet& b, const TowerSchedule& s);
FloorSet unite(const FloorSet& a, const FloorSet& b, const TowerSchedule& s);
FloorSet difference(const FloorSet& a, const FloorSet& b, const TowerSchedule& s);
bool is_disjoint(const FloorSet& a, const FloorSet& b, const TowerSchedule& s);
bool equals(const FloorSet& a, const FloorSet& b, const TowerSchedule& s);

Rat measure(const FloorSet& set, const TowerSchedule& s);

// mu(S^k a  intersect  b)
Rat correlation(const FloorSet& a, const FloorSet& b, const Int& k,
                const TowerSchedule& s);

}  // namespace r1lab

#endif  // R1LAB_TOWER_HPP_
