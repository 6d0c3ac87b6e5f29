#include "r1lab/conjugator.hpp"

#include <algorithm>
#include <map>

#include "r1lab/errors.hpp"

namespace r1lab {

bool BlockPermutation::is_identity() const {
  return mode == PermMode::identity ||
         (realized.empty() && !cert_from.has_value());
}

Int BlockPermutation::dest_start(const Int& n) const {
  Int d = seq->p_at(n);
  if (mode == PermMode::odd) d += block_len;
  return d;
}

bool BlockPermutation::is_realized(const Int& n) const {
  if (mode == PermMode::identity) return false;
  if (cert_from && n >= *cert_from && !window.empty && n <= window.hi) {
    return true;
  }
  return std::binary_search(realized.begin(), realized.end(), n);
}

Int BlockPermutation::realized_count_up_to(const Int& n) const {
  Int count(0);
  auto it = std::upper_bound(realized.begin(), realized.end(), n);
  count += Int(static_cast<long>(it - realized.begin()));
  if (cert_from && !window.empty) {
    Int hi = std::min(n, window.hi);
    if (hi >= *cert_from) count += hi - *cert_from + 1;
  }
  return count;
}

Int BlockPermutation::candidate_count() const {
  if (window.empty) return Int(0);
  return window.hi - window.lo + 1;
}

namespace {

constexpr long kTransferGuard = 2000000;

void push_block_overlap(const Int& lo, const Int& hi, const Int& start,
                        const Int& len, const Int& delta,
                        std::vector<Transfer>* out) {
  Int a = std::max(lo, start);
  Int b = std::min(hi, Int(start + len));
  if (a < b) out->push_back({Run{a, b}, delta});
}

}  // namespace

void BlockPermutation::collect_transfers(const Int& lo, const Int& hi,
                                         std::vector<Transfer>* out) const {
  if (is_identity() || lo >= hi) return;
  // Explicit swaps: both sides of every swap, found by binary search over
  // the src-sorted list plus the dst-sorted view.
  if (!swaps.empty()) {
    auto first = std::lower_bound(
        swaps.begin(), swaps.end(), lo,
        [this](const BlockSwap& sw, const Int& v) {
          return sw.src + block_len <= v;
        });
    for (auto it = first; it != swaps.end() && it->src < hi; ++it) {
      push_block_overlap(lo, hi, it->src, block_len, it->dst - it->src, out);
    }
    auto dfirst = std::lower_bound(
        dst_sorted.begin(), dst_sorted.end(), lo,
        [this](const BlockSwap& sw, const Int& v) {
          return sw.dst + block_len <= v;
        });
    for (auto it = dfirst; it != dst_sorted.end() && it->dst < hi; ++it) {
      push_block_overlap(lo, hi, it->dst, block_len, it->src - it->dst, out);
    }
  }
  if (!cert_from || window.empty) return;
  // Certified tail: blocks are reconstructed from the sequences. A block
  // [f(n)+d0, f(n)+d0+L) meets [lo, hi) iff lo - d0 - L < f(n) < hi - d0.
  auto scan = [&](bool source_side) {
    const bool use_q = source_side;
    const Int d0 =
        (source_side || mode == PermMode::even) ? Int(0) : block_len;
    Int n1 = seq->min_n_above(use_q, lo - d0 - block_len);
    auto n2 = seq->max_n_below(use_q, hi - d0);
    if (!n2) return;
    Int a = std::max(n1, *cert_from);
    Int b = std::min(*n2, window.hi);
    if (b - a > kTransferGuard) {
      throw Error("certified transfer enumeration too large");
    }
    for (Int n = a; n <= b; ++n) {
      Int src = seq->q_at(n);
      Int dst = dest_start(n);
      if (source_side) {
        push_block_overlap(lo, hi, src, block_len, dst - src, out);
      } else {
        push_block_overlap(lo, hi, dst, block_len, src - dst, out);
      }
    }
  };
  scan(true);   // source side
  scan(false);  // destination side
}

namespace {

CandidateWindow stage_window(const TowerSchedule& schedule, int stage,
                             const SequencePair& seq) {
  CandidateWindow w;
  const Int h = schedule.height(stage);
  const Int bound = schedule.height(stage + 1) - 4 * h;
  if (bound <= 2 * h) return w;
  Int lo = std::max(seq.min_n_above(false, 2 * h), seq.min_n_above(true, 2 * h));
  auto hi_p = seq.max_n_below(false, bound);
  auto hi_q = seq.max_n_below(true, bound);
  if (!hi_p || !hi_q) return w;
  Int hi = std::min(*hi_p, *hi_q);
  if (lo > hi) return w;
  w.empty = false;
  w.lo = lo;
  w.hi = hi;
  return w;
}

// Disjoint-interval bookkeeping for the greedy pass.
class BlockLedger {
 public:
  bool collides(const Int& start, const Int& len) const {
    auto it = blocks_.upper_bound(start);
    if (it != blocks_.begin()) {
      auto prev = std::prev(it);
      if (prev->second > start) return true;
    }
    return it != blocks_.end() && it->first < start + len;
  }
  void place(const Int& start, const Int& len) {
    blocks_.emplace(start, start + len);
  }

 private:
  std::map<Int, Int> blocks_;  // start -> end
};

}  // namespace

std::optional<Int> certified_threshold(const TowerSchedule& schedule,
                                       int stage, PermMode mode,
                                       const SequencePair& seq,
                                       const CandidateWindow& window) {
  if (window.empty || mode == PermMode::identity) return std::nullopt;
  const Int h = schedule.height(stage);
  const Rat len(2 * h);
  const Rat delta = mode == PermMode::odd ? len : Rat(0);

  const Polynomial& p = seq.p;
  const Polynomial& q = seq.q;
  // Edge gaps between the blocks of candidate n and its neighbours; each
  // must be >= 0 for the whole certified tail:
  //   src(n) = [q(n), q(n)+L),  dest(n) = [p(n)+d, p(n)+d+L).
  std::vector<Polynomial> conds;
  conds.push_back(q - q.shifted(-1) - Polynomial({len}));             // src prev
  conds.push_back(p - p.shifted(-1) - Polynomial({len}));             // dest prev
  conds.push_back(q - p - Polynomial({delta + len}));                 // own pair
  conds.push_back(p.with_constant_added(delta - len) - q.shifted(-1));  // dest above prev src
  conds.push_back(p.shifted(1).with_constant_added(delta - len) - q);   // next dest above src
  conds.push_back(q.shifted(1) - p - Polynomial({delta + len}));        // next src above dest

  Int threshold = window.lo;
  for (const Polynomial& g : conds) {
    if (!g.nondecreasing_on_nonneg()) return std::nullopt;
    if (g.eval(Rat(window.hi)) < 0) return std::nullopt;
    if (g.eval(Rat(window.lo)) >= 0) continue;
    Int lo = window.lo, hi = window.hi;  // g(lo) < 0 <= g(hi)
    while (hi - lo > 1) {
      Int mid = (lo + hi) / 2;
      if (g.eval(Rat(mid)) >= 0) hi = mid;
      else lo = mid;
    }
    threshold = std::max(threshold, hi);
  }
  return threshold;
}

BlockPermutation build_block_perm(const TowerSchedule& schedule, int stage,
                                  PermMode mode, const SequencePair& seq,
                                  const PermBuildOptions& opts) {
  BlockPermutation perm;
  perm.stage = stage;
  perm.mode = mode;
  perm.seq = &seq;
  perm.block_len = 2 * schedule.height(stage);
  if (mode == PermMode::identity) return perm;
  if (!schedule.is_halving_stage(stage)) {
    throw ConfigInvalid("block permutation requires a halving-shaped stage");
  }
  perm.window = stage_window(schedule, stage, seq);
  if (perm.window.empty) {
    throw EmptyWindow("stage " + std::to_string(stage) +
                      " window has no candidates");
  }
  if (opts.enable_certificates) {
    perm.cert_from =
        certified_threshold(schedule, stage, mode, seq, perm.window);
  }

  Int scan_hi = perm.window.hi;
  if (perm.cert_from) scan_hi = std::min(scan_hi, Int(*perm.cert_from - 1));
  if (opts.greedy_cap >= 0) {
    scan_hi = std::min(scan_hi, Int(perm.window.lo + opts.greedy_cap - 1));
  }
  BlockLedger ledger;
  for (Int n = perm.window.lo; n <= scan_hi; ++n) {
    Int src = seq.q_at(n);
    Int dst = perm.dest_start(n);
    // self-collision, then collision with anything already placed
    bool ok = (src + perm.block_len <= dst || dst + perm.block_len <= src) &&
              !ledger.collides(src, perm.block_len) &&
              !ledger.collides(dst, perm.block_len);
    if (!ok) continue;
    ledger.place(src, perm.block_len);
    ledger.place(dst, perm.block_len);
    perm.realized.push_back(n);
    perm.swaps.push_back(BlockSwap{src, dst});
  }
  perm.scanned_hi = scan_hi;
  perm.dst_sorted = perm.swaps;
  std::sort(perm.dst_sorted.begin(), perm.dst_sorted.end(),
            [](const BlockSwap& a, const BlockSwap& b) { return a.dst < b.dst; });
  return perm;
}

const BlockPermutation* ConjugationPlan::perm_at(int stage) const {
  for (const BlockPermutation& p : perms) {
    if (p.stage == stage) return &p;
  }
  return nullptr;
}

std::optional<int> ConjugationPlan::window_stage_of(const Int& n) const {
  for (const BlockPermutation& p : perms) {
    if (!p.window.empty && n >= p.window.lo && n <= p.window.hi) {
      return p.stage;
    }
  }
  return std::nullopt;
}

bool ConjugationPlan::is_realized(const Int& n) const {
  for (const BlockPermutation& p : perms) {
    if (!p.window.empty && n >= p.window.lo && n <= p.window.hi) {
      return p.is_realized(n);
    }
  }
  return false;
}

ConjugationPlan build_plan(const TowerSchedule& schedule,
                           const SequencePair& seq,
                           const PermBuildOptions& opts, int max_stage) {
  ConjugationPlan plan;
  plan.schedule = &schedule;
  plan.seq = &seq;
  if (max_stage < 0) max_stage = schedule.j_max();
  max_stage = std::min(max_stage, schedule.j_max());
  for (int j = 1; j <= max_stage; ++j) {
    PermMode mode;
    if (schedule.params().modification_stages.count(j) > 0 ||
        !schedule.is_halving_stage(j)) {
      mode = PermMode::identity;
    } else {
      mode = (j % 2 == 1) ? PermMode::odd : PermMode::even;
    }
    try {
      plan.perms.push_back(build_block_perm(schedule, j, mode, seq, opts));
    } catch (const EmptyWindow&) {
      BlockPermutation id;
      id.stage = j;
      id.mode = PermMode::identity;
      id.block_len = 2 * schedule.height(j);
      id.seq = &seq;
      plan.perms.push_back(std::move(id));
    }
  }
  return plan;
}

namespace {

FloorSet apply_one_perm(const FloorSet& set, const BlockPermutation& perm,
                        const TowerSchedule& schedule) {
  // Sets at stage <= perm.stage live inside X_stage and are fixed.
  if (perm.is_identity() || set.stage <= perm.stage || set.empty()) return set;
  const int target = perm.stage + 1;
  const Int h_next = schedule.height(target);
  std::vector<Int> copies = schedule.embedding_offsets(target, set.stage);

  std::vector<Transfer> transfers;
  for (const Run& run : set.runs) {
    // copies of stage target intersecting this run
    auto it = std::upper_bound(copies.begin(), copies.end(), run.lo);
    if (it != copies.begin()) --it;
    for (; it != copies.end() && *it < run.hi; ++it) {
      const Int& off = *it;
      Int lo = std::max(run.lo, off) - off;
      Int hi = std::min(run.hi, Int(off + h_next)) - off;
      if (lo >= hi) continue;
      size_t before = transfers.size();
      perm.collect_transfers(lo, hi, &transfers);
      for (size_t i = before; i < transfers.size(); ++i) {
        transfers[i].first.lo += off;
        transfers[i].first.hi += off;
      }
    }
  }
  if (transfers.empty()) return set;

  std::vector<Run> moved_src;
  std::vector<Run> moved_dst;
  moved_src.reserve(transfers.size());
  moved_dst.reserve(transfers.size());
  for (const Transfer& t : transfers) {
    moved_src.push_back(t.first);
    moved_dst.push_back(Run{t.first.lo + t.second, t.first.hi + t.second});
  }
  FloorSet removed = make_floor_set(set.stage, std::move(moved_src));
  FloorSet added = make_floor_set(set.stage, std::move(moved_dst));
  return unite(difference(set, removed, schedule), added, schedule);
}

}  // namespace

FloorSet apply_perm(const FloorSet& set, const ConjugationPlan& plan,
                    ApplyDirection /*dir*/) {
  // Every P_j here is an involution assembled from disjoint block swaps,
  // so the forward and inverse maps coincide.
  FloorSet cur = set;
  for (const BlockPermutation& perm : plan.perms) {
    cur = apply_one_perm(cur, perm, *plan.schedule);
  }
  return cur;
}

FloorSet t_power(const FloorSet& set, const Int& m,
                 const ConjugationPlan& plan) {
  FloorSet inner = apply_perm(set, plan, ApplyDirection::inverse);
  FloorSet shifted = shift(inner, m, *plan.schedule);
  return apply_perm(shifted, plan, ApplyDirection::forward);
}

FloorSet involution_floor_e(const InvolutionR& r, const TowerSchedule& s) {
  return floor_set(s, r.stage, r.e_index);
}

FloorSet involution_floor_re(const InvolutionR& r, const TowerSchedule& s) {
  return floor_set(s, r.stage, r.re_index);
}

FloorSet involution_support(const InvolutionR& r, const TowerSchedule& s) {
  return unite(involution_floor_e(r, s), involution_floor_re(r, s), s);
}

FloorSet apply_involution(const FloorSet& set, const InvolutionR& r,
                          const TowerSchedule& s) {
  if (r.e_index == r.re_index) throw ConfigInvalid("E and RE must differ");
  FloorSet e = involution_floor_e(r, s);
  FloorSet re = involution_floor_re(r, s);
  FloorSet piece_e = intersect(set, e, s);
  FloorSet piece_re = intersect(set, re, s);
  if (piece_e.empty() && piece_re.empty()) return set;
  const Int delta = r.re_index - r.e_index;
  FloorSet rest = difference(difference(set, e, s), re, s);
  // Parallel translation floor-to-floor; copies of E and RE share offsets.
  auto translate = [](FloorSet f, const Int& d) {
    for (Run& run : f.runs) {
      run.lo += d;
      run.hi += d;
    }
    return f;
  };
  FloorSet out = unite(rest, translate(std::move(piece_e), delta), s);
  return unite(out, translate(std::move(piece_re), -delta), s);
}

HomoclinicData homoclinic_quantities(const TowerSchedule& schedule,
                                     const InvolutionR& r, const Int& n) {
  if (n < 0) throw ConfigInvalid("n must be >= 0");
  HomoclinicData data;
  data.e = involution_floor_e(r, schedule);
  data.re = involution_floor_re(r, schedule);
  FloorSet f = involution_support(r, schedule);
  FloorSet tf = shift(f, n, schedule);
  data.overlap = intersect(tf, f, schedule);
  data.overlap_measure = measure(data.overlap, schedule);

  auto conjugate = [&](const FloorSet& base) {
    FloorSet tn = shift(base, n, schedule);
    if (is_disjoint(tn, f, schedule)) return base;  // R fixes T^n(base)
    FloorSet moved = apply_involution(tn, r, schedule);
    return shift(moved, -n, schedule);
  };
  data.conj_e = conjugate(data.e);
  data.conj_re = conjugate(data.re);
  return data;
}

}  // namespace r1lab
