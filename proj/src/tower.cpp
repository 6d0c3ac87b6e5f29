#include "r1lab/tower.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "r1lab/errors.hpp"

namespace r1lab {

TowerSchedule::TowerSchedule(ConstructionParams params,
                             std::vector<TowerStage> stages)
    : params_(std::move(params)), stages_(std::move(stages)) {
  if (stages_.empty()) throw ConfigInvalid("schedule needs at least one stage");
  ceiling_width_ = stages_.back().width / stages_.back().cuts;
}

const TowerStage& TowerSchedule::stage(int j) const {
  if (j < 1 || j > j_max()) {
    throw ConfigInvalid("stage index out of range: " + std::to_string(j));
  }
  return stages_[static_cast<size_t>(j - 1)];
}

const Int& TowerSchedule::height(int j) const {
  if (j == j_max() + 1) return stages_.back().next_height;
  return stage(j).height;
}

const Rat& TowerSchedule::width(int j) const {
  if (j == j_max() + 1) return ceiling_width_;
  return stage(j).width;
}

bool TowerSchedule::is_halving_stage(int j) const {
  const TowerStage& st = stage(j);
  return st.cuts == 2 && st.spacers[0] == 0;
}

std::vector<Int> TowerSchedule::embedding_offsets(int from, int to) const {
  if (from < 1 || to > j_max() + 1 || from > to) {
    throw ConfigInvalid("bad embedding range");
  }
  std::vector<Int> offsets{Int(0)};
  for (int m = from; m < to; ++m) {
    const TowerStage& st = stage(m);
    std::vector<Int> next;
    next.reserve(offsets.size() * st.offsets.size());
    for (const Int& col : st.offsets) {
      for (const Int& o : offsets) next.push_back(o + col);
    }
    offsets = std::move(next);
  }
  std::sort(offsets.begin(), offsets.end());
  return offsets;
}

std::string TowerSchedule::digest() const {
  // FNV-1a over the height sequence; enough to tie traces to a schedule.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  for (const TowerStage& st : stages_) {
    mix(st.height.get_str());
    mix(std::to_string(st.cuts));
  }
  mix(stages_.back().next_height.get_str());
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

namespace {

std::vector<Int> stage_spacers(const ConstructionParams& params,
                               const SequencePair& seq, int j, const Int& h_j,
                               int* cuts_out) {
  if (params.modification_stages.count(j) > 0) {
    // Katok spacers: r_j = 2j, j zeros then j ones.
    *cuts_out = 2 * j;
    std::vector<Int> s(static_cast<size_t>(2 * j), Int(0));
    for (int i = j; i < 2 * j; ++i) s[static_cast<size_t>(i)] = 1;
    return s;
  }
  switch (params.preset) {
    case Preset::halving: {
      *cuts_out = 2;
      Int arg = Int(j) * h_j;
      Int spacer;
      if (params.growth_multiplier <= 0) {
        spacer = std::max(seq.p_at(arg), seq.q_at(arg)) + 1;
      } else {
        Int garg = Int(params.growth_multiplier) * arg + 1;
        spacer = std::max(seq.p_at(garg), seq.q_at(garg)) + 2 * h_j + 1;
      }
      return {Int(0), spacer};
    }
    case Preset::katok: {
      *cuts_out = 2 * j;
      std::vector<Int> s(static_cast<size_t>(2 * j), Int(0));
      for (int i = j; i < 2 * j; ++i) s[static_cast<size_t>(i)] = 1;
      return s;
    }
    case Preset::custom: {
      if (params.custom_stages.empty()) {
        throw ConfigInvalid("custom preset needs at least one stage rule");
      }
      const size_t idx =
          std::min(static_cast<size_t>(j), params.custom_stages.size()) - 1;
      const CustomStageRule& rule = params.custom_stages[idx];
      *cuts_out = rule.cuts;
      return rule.spacers;
    }
  }
  throw ConfigInvalid("unknown preset");
}

}  // namespace

TowerSchedule build_schedule(const ConstructionParams& params,
                             const SequencePair& seq, int j_max) {
  if (j_max < 1) throw ConfigInvalid("j_max must be >= 1");
  if (params.base_width <= 0) throw ConfigInvalid("base_width must be > 0");
  std::vector<TowerStage> stages;
  Int h(1);
  Rat w = params.base_width;
  for (int j = 1; j <= j_max; ++j) {
    TowerStage st;
    st.index = j;
    st.height = h;
    st.width = w;
    st.spacers = stage_spacers(params, seq, j, h, &st.cuts);
    if (st.cuts < 2) throw ConfigInvalid("cut count must be >= 2");
    if (st.spacers.size() != static_cast<size_t>(st.cuts)) {
      throw ConfigInvalid("spacer rule returned " +
                          std::to_string(st.spacers.size()) + " values for " +
                          std::to_string(st.cuts) + " columns at stage " +
                          std::to_string(j));
    }
    Int off(0);
    st.offsets.reserve(static_cast<size_t>(st.cuts));
    for (int i = 0; i < st.cuts; ++i) {
      if (st.spacers[static_cast<size_t>(i)] < 0) {
        throw ConfigInvalid("negative spacer at stage " + std::to_string(j));
      }
      st.offsets.push_back(off);
      off += h + st.spacers[static_cast<size_t>(i)];
    }
    st.next_height = off;
    stages.push_back(st);
    h = off;
    w /= st.cuts;
  }
  return TowerSchedule(params, std::move(stages));
}

Int FloorSet::total_length() const {
  Int len(0);
  for (const Run& r : runs) len += r.hi - r.lo;
  return len;
}

FloorSet make_floor_set(int stage, std::vector<Run> runs) {
  std::erase_if(runs, [](const Run& r) { return r.hi <= r.lo; });
  std::sort(runs.begin(), runs.end(),
            [](const Run& a, const Run& b) { return a.lo < b.lo; });
  std::vector<Run> merged;
  for (Run& r : runs) {
    if (!merged.empty() && r.lo <= merged.back().hi) {
      if (r.hi > merged.back().hi) merged.back().hi = r.hi;
    } else {
      merged.push_back(r);
    }
  }
  return FloorSet{stage, std::move(merged)};
}

FloorSet empty_set(int stage) { return FloorSet{stage, {}}; }

FloorSet tower_set(const TowerSchedule& s, int j) {
  return FloorSet{j, {Run{Int(0), s.height(j)}}};
}

FloorSet floor_set(const TowerSchedule& s, int j, const Int& k) {
  if (k < 0 || k >= s.height(j)) throw ConfigInvalid("floor index out of range");
  return FloorSet{j, {Run{k, k + 1}}};
}

namespace {

FloorSet lift_one(const FloorSet& set, const TowerSchedule& s) {
  int j = set.stage;
  if (j > s.j_max()) {
    throw StageExhausted("cannot lift beyond stage " +
                         std::to_string(s.j_max() + 1));
  }
  const TowerStage& st = s.stage(j);
  std::vector<Run> out;
  out.reserve(set.runs.size() * st.offsets.size());
  for (const Int& off : st.offsets) {
    for (const Run& r : set.runs) out.push_back(Run{off + r.lo, off + r.hi});
  }
  return make_floor_set(j + 1, std::move(out));
}

}  // namespace

FloorSet lift(const FloorSet& set, const TowerSchedule& s, int target_stage) {
  if (target_stage < set.stage) {
    throw ConfigInvalid("lift target below set stage");
  }
  FloorSet cur = set;
  while (cur.stage < target_stage) cur = lift_one(cur, s);
  return cur;
}

FloorSet shift(const FloorSet& set, const Int& k, const TowerSchedule& s) {
  if (set.empty()) return set;
  FloorSet cur = set;
  if (k < 0 && cur.min_index() + k < 0) {
    // The minimum index never changes under lifting (the first column offset
    // is always 0), so a negative shift either fits in place or nowhere.
    throw StageExhausted("negative shift past the tower bottom");
  }
  if (k > 0) {
    while (cur.max_index() + k > s.height(cur.stage)) {
      cur = lift_one(cur, s);
    }
  }
  std::vector<Run> out;
  out.reserve(cur.runs.size());
  for (const Run& r : cur.runs) out.push_back(Run{r.lo + k, r.hi + k});
  return FloorSet{cur.stage, std::move(out)};
}

namespace {

void to_common_stage(const FloorSet& a, const FloorSet& b,
                     const TowerSchedule& s, FloorSet* la, FloorSet* lb) {
  int stage = std::max(a.stage, b.stage);
  *la = lift(a, s, stage);
  *lb = lift(b, s, stage);
}

}  // namespace

FloorSet intersect(const FloorSet& a, const FloorSet& b,
                   const TowerSchedule& s) {
  FloorSet la, lb;
  to_common_stage(a, b, s, &la, &lb);
  std::vector<Run> out;
  size_t i = 0, j = 0;
  while (i < la.runs.size() && j < lb.runs.size()) {
    const Run& x = la.runs[i];
    const Run& y = lb.runs[j];
    Int lo = std::max(x.lo, y.lo);
    Int hi = std::min(x.hi, y.hi);
    if (lo < hi) out.push_back(Run{lo, hi});
    if (x.hi < y.hi) ++i;
    else ++j;
  }
  return FloorSet{la.stage, std::move(out)};
}

FloorSet unite(const FloorSet& a, const FloorSet& b, const TowerSchedule& s) {
  FloorSet la, lb;
  to_common_stage(a, b, s, &la, &lb);
  std::vector<Run> out = la.runs;
  out.insert(out.end(), lb.runs.begin(), lb.runs.end());
  return make_floor_set(la.stage, std::move(out));
}

FloorSet difference(const FloorSet& a, const FloorSet& b,
                    const TowerSchedule& s) {
  FloorSet la, lb;
  to_common_stage(a, b, s, &la, &lb);
  std::vector<Run> out;
  size_t j = 0;
  for (const Run& x : la.runs) {
    Int lo = x.lo;
    while (j < lb.runs.size() && lb.runs[j].hi <= lo) ++j;
    size_t jj = j;
    while (jj < lb.runs.size() && lb.runs[jj].lo < x.hi) {
      if (lb.runs[jj].lo > lo) out.push_back(Run{lo, lb.runs[jj].lo});
      if (lb.runs[jj].hi > lo) lo = lb.runs[jj].hi;
      ++jj;
    }
    if (lo < x.hi) out.push_back(Run{lo, x.hi});
  }
  return FloorSet{la.stage, std::move(out)};
}

bool is_disjoint(const FloorSet& a, const FloorSet& b,
                 const TowerSchedule& s) {
  return intersect(a, b, s).empty();
}

bool equals(const FloorSet& a, const FloorSet& b, const TowerSchedule& s) {
  FloorSet la, lb;
  to_common_stage(a, b, s, &la, &lb);
  return la.runs == lb.runs;
}

Rat measure(const FloorSet& set, const TowerSchedule& s) {
  return s.width(set.stage) * Rat(set.total_length());
}

Rat correlation(const FloorSet& a, const FloorSet& b, const Int& k,
                const TowerSchedule& s) {
  return measure(intersect(shift(a, k, s), b, s), s);
}

}  // namespace r1lab
