#ifndef R1LAB_CONJUGATOR_HPP_
#define R1LAB_CONJUGATOR_HPP_

#include <optional>
#include <utility>
#include <vector>

#include "r1lab/tower.hpp"

namespace r1lab {

// Stage permutations and the conjugated transformation T = P S P^{-1}.
//
// The stage-j permutation exchanges blocks of 2 h_j consecutive stage-(j+1)
// floor indices: for each placed n, the source block starting at q(n) swaps
// with the destination block starting at p(n) (even mode) or p(n) + 2 h_j
// (odd mode). All blocks live inside [2 h_j, h_{j+1}), so each P_j fixes
// X_j pointwise. Supports of distinct P_j are disjoint, hence P = prod P_j
// applies stagewise in any order and is an involution.
//
// Stage permutations are only built on halving-shaped stages (r_j = 2,
// s_j(1) = 0); there X_j occupies exactly the indices [0, 2 h_j) of stage
// j+1, which is what makes the block window well defined.

enum class PermMode { odd, even, identity };
enum class ApplyDirection { forward, inverse };

struct BlockSwap {
  Int src;  // block [src, src + block_len)
  Int dst;  // block [dst, dst + block_len)
};

struct CandidateWindow {
  bool empty = true;
  Int lo;  // candidate n range, inclusive
  Int hi;
};

// One piece to translate: indices [piece.lo, piece.hi) move by delta.
using Transfer = std::pair<Run, Int>;

struct BlockPermutation {
  int stage = 0;
  PermMode mode = PermMode::identity;
  Int block_len;  // 2 h_j
  CandidateWindow window;

  // Greedily placed candidates: n in [window.lo, scanned_hi], collisions
  // skipped. `swaps` is sorted by src and aligned with `realized`;
  // `dst_sorted` is the same list ordered by destination start.
  std::vector<Int> realized;
  std::vector<BlockSwap> swaps;
  std::vector<BlockSwap> dst_sorted;
  Int scanned_hi = Int(-1);

  // When set, every candidate n in [cert_from, window.hi] is provably
  // collision-free and therefore placed; their blocks are reconstructed
  // on demand from the sequence pair instead of being stored.
  std::optional<Int> cert_from;
  const SequencePair* seq = nullptr;

  bool is_identity() const;
  Int dest_start(const Int& n) const;  // p(n) (+ block_len in odd mode)
  bool is_realized(const Int& n) const;
  Int realized_count_up_to(const Int& n) const;
  Int candidate_count() const;

  // Appends (piece, delta) for every block piece of this permutation that
  // intersects the local index range [lo, hi) of stage stage+1.
  void collect_transfers(const Int& lo, const Int& hi,
                         std::vector<Transfer>* out) const;
};

struct PermBuildOptions {
  long greedy_cap = 20000;  // max candidates scanned explicitly
  bool enable_certificates = true;
};

// Greedy builder; throws EmptyWindow when the stage window has no candidates.
BlockPermutation build_block_perm(const TowerSchedule& schedule, int stage,
                                  PermMode mode, const SequencePair& seq,
                                  const PermBuildOptions& opts = {});

// Least n such that the six block-disjointness inequalities hold for every
// candidate >= n (monotone polynomial conditions); nullopt when the pair
// admits no such tail certificate on this stage.
std::optional<Int> certified_threshold(const TowerSchedule& schedule,
                                       int stage, PermMode mode,
                                       const SequencePair& seq,
                                       const CandidateWindow& window);

struct ConjugationPlan {
  const TowerSchedule* schedule = nullptr;
  const SequencePair* seq = nullptr;
  std::vector<BlockPermutation> perms;  // stages 1..max built stage

  const BlockPermutation* perm_at(int stage) const;
  // Stage whose candidate window contains n (windows are disjoint).
  std::optional<int> window_stage_of(const Int& n) const;
  bool is_realized(const Int& n) const;
};

// Builds permutations for stages 1..max_stage (default j_max); stages with
// empty windows, Katok stages and non-halving-shaped stages get identity.
ConjugationPlan build_plan(const TowerSchedule& schedule,
                           const SequencePair& seq,
                           const PermBuildOptions& opts = {},
                           int max_stage = -1);

FloorSet apply_perm(const FloorSet& set, const ConjugationPlan& plan,
                    ApplyDirection dir);

// T^m(set) with T = P S P^{-1}.
FloorSet t_power(const FloorSet& set, const Int& m,
                 const ConjugationPlan& plan);

// Involutive exchange of two same-stage floors E and RE; identity outside
// F = E u RE.
struct InvolutionR {
  int stage = 1;
  Int e_index;
  Int re_index;
};

FloorSet involution_floor_e(const InvolutionR& r, const TowerSchedule& s);
FloorSet involution_floor_re(const InvolutionR& r, const TowerSchedule& s);
FloorSet involution_support(const InvolutionR& r, const TowerSchedule& s);
FloorSet apply_involution(const FloorSet& set, const InvolutionR& r,
                          const TowerSchedule& s);

struct HomoclinicData {
  FloorSet overlap;  // T^n F  intersect  F
  Rat overlap_measure;
  FloorSet e;
  FloorSet re;
  FloorSet conj_e;   // T^{-n} R T^n E
  FloorSet conj_re;  // T^{-n} R T^n RE
};

// Base quantities for the non-recurrence study; here T is the plain
// rank-one map of the schedule.
HomoclinicData homoclinic_quantities(const TowerSchedule& schedule,
                                     const InvolutionR& r, const Int& n);

}  // namespace r1lab

#endif  // R1LAB_CONJUGATOR_HPP_
