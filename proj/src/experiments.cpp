#include "r1lab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "r1lab/errors.hpp"

namespace r1lab {

std::vector<Checkpoint> checkpoints(const TowerSchedule& schedule,
                                    const SequencePair& seq) {
  std::vector<Checkpoint> out;
  for (int j = 1; j <= schedule.j_max(); ++j) {
    const Int h = schedule.height(j);
    const Int bound = schedule.height(j + 1) - 4 * h;
    if (bound <= 0) continue;
    auto np = seq.max_n_below(false, bound);
    auto nq = seq.max_n_below(true, bound);
    if (!np || !nq) continue;
    Checkpoint cp;
    cp.stage = j;
    cp.n = std::min(*np, *nq);
    cp.height = h;
    cp.growth_ok = cp.n > Int(j) * h;
    cp.prev_below_height = out.empty() || out.back().n < h;
    out.push_back(cp);
  }
  if (out.empty()) {
    throw EmptyCheckpoint("no stage yields a checkpoint; schedule too small");
  }
  return out;
}

bool ratios_strictly_decreasing(const std::vector<Checkpoint>& cps) {
  // N_{j-1}/N_j > N_j/N_{j+1}  <=>  N_{j-1} * N_{j+1} > N_j^2
  for (size_t i = 2; i < cps.size(); ++i) {
    if (cps[i - 2].n * cps[i].n <= cps[i - 1].n * cps[i - 1].n) return false;
  }
  return true;
}

std::vector<const TraceRow*> AverageTrace::checkpoint_rows() const {
  std::vector<const TraceRow*> out;
  for (const TraceRow& r : rows) {
    if (r.is_checkpoint) out.push_back(&r);
  }
  return out;
}

namespace {

struct TermResult {
  ExactProb prob;
  Rat base;
  int stage = 0;
  int parity = 0;
  bool realized = false;
};

class Theorem1Runner {
 public:
  explicit Theorem1Runner(const Theorem1Config& cfg) : cfg_(cfg) {
    if (!cfg_.schedule || !cfg_.plan || !cfg_.seq) {
      throw ConfigInvalid("theorem1 config missing schedule/plan/seq");
    }
    a_ = cfg_.a.empty() ? tower_set(*cfg_.schedule, 1) : cfg_.a;
    mu_a_ = measure(a_, *cfg_.schedule);
    c_ = ExactProb::exp_term(Rat(1), mu_a_);
    c2_ = ExactProb::exp_term(Rat(1), 2 * mu_a_);
  }

  AverageTrace run() {
    AverageTrace trace;
    trace.schedule_digest = cfg_.schedule->digest();
    trace.seq_desc = cfg_.seq->p_name + "," + cfg_.seq->q_name;
    trace.mu_a = mu_a_;
    trace.per_term_cap = cfg_.per_term_cap;
    trace.secondary_cap = cfg_.secondary_cap;
    if (cfg_.per_term_cap < 1) throw ConfigInvalid("per_term_cap must be >= 1");

    std::vector<Checkpoint> cps = checkpoints(*cfg_.schedule, *cfg_.seq);
    if (cfg_.trace_max_stage > 0) {
      std::erase_if(cps, [&](const Checkpoint& c) {
        return c.stage > cfg_.trace_max_stage;
      });
      if (cps.empty()) throw EmptyCheckpoint("trace_max_stage excludes all");
    }
    if (cfg_.per_term_cap < cps.front().n) {
      throw CapConflict("per_term_cap below the first checkpoint");
    }

    budget_ = cfg_.secondary_cap;
    Int n(1);
    for (const Checkpoint& cp : cps) {
      advance(n, cp.n, &trace);
      n = cp.n + 1;
      emit_checkpoint(cp, &trace);
    }
    return trace;
  }

 private:
  const BlockPermutation* window_of(const Int& n) const {
    for (const BlockPermutation& p : cfg_.plan->perms) {
      if (!p.window.empty && n >= p.window.lo && n <= p.window.hi) return &p;
    }
    return nullptr;
  }

  Int next_window_lo(const Int& n) const {
    Int best(-1);
    for (const BlockPermutation& p : cfg_.plan->perms) {
      if (!p.window.empty && p.window.lo > n) {
        if (best < 0 || p.window.lo < best) best = p.window.lo;
      }
    }
    return best;
  }

  static int stage_parity(int stage) { return stage % 2 == 0 ? 1 : -1; }

  bool constants_ok(const BlockPermutation& perm) const {
    // Eq-based constants need A inside X_stage.
    return perm.stage >= a_.stage;
  }

  TermResult compute_term(const Int& n) const {
    const TowerSchedule& s = *cfg_.schedule;
    TermResult res;
    Int pn = cfg_.seq->p_at(n);
    Int qn = cfg_.seq->q_at(n);
    FloorSet spa = shift(a_, pn, s);
    FloorSet tqa = t_power(a_, qn, *cfg_.plan);
    res.base = measure(intersect(spa, tqa, s), s);
    Rat uni = measure(unite(spa, tqa, s), s);
    if (uni != 2 * mu_a_ - res.base) {
      throw Error("union/intersection measures inconsistent at n=" +
                  n.get_str());
    }
    res.prob = ExactProb::exp_term(Rat(1), uni);
    if (const BlockPermutation* perm = window_of(n)) {
      res.stage = perm->stage;
      res.parity = stage_parity(perm->stage);
      res.realized = perm->is_realized(n);
      if (res.realized && constants_ok(*perm)) {
        // Machine check of the two displayed identities.
        const bool even = res.parity > 0;
        if (!(res.prob == (even ? c_ : c2_)) ||
            res.base != (even ? mu_a_ : Rat(0))) {
          throw Error("realized term violates the stage identity at n=" +
                      n.get_str());
        }
      }
    }
    return res;
  }

  void consume_term(const Int& n, TermResult res, AverageTrace* trace) {
    exact_sum_ = exact_sum_ + res.prob;
    if (res.realized) realized_total_ += 1;
    if (n <= cfg_.row_emit_cap) {
      TraceRow row;
      row.n = n;
      row.stage = res.stage;
      row.parity = res.parity;
      row.realized = res.realized;
      row.base_overlap = res.base;
      row.prob = std::move(res.prob);
      trace->rows.push_back(std::move(row));
    }
  }

  void exact_block(const Int& from, const Int& to, AverageTrace* trace) {
    if (from > to) return;
    const long len = to.get_si() - from.get_si() + 1;  // caps keep this small
    const int workers = std::max(1, cfg_.workers);
    if (workers == 1 || len < 256) {
      for (Int n = from; n <= to; ++n) consume_term(n, compute_term(n), trace);
      return;
    }
    std::vector<TermResult> results(static_cast<size_t>(len));
    std::vector<std::thread> pool;
    std::atomic<long> next{0};
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        while (true) {
          long i = next.fetch_add(64);
          if (i >= len) return;
          long end = std::min(len, i + 64);
          for (long k = i; k < end; ++k) {
            results[static_cast<size_t>(k)] = compute_term(from + Int(k));
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
    for (long k = 0; k < len; ++k) {
      consume_term(from + Int(k), std::move(results[static_cast<size_t>(k)]),
                   trace);
    }
  }

  // Unclassified stretch: exact terms while the secondary budget lasts,
  // the remainder enclosed by [c^2, c].
  void unknown_block(const Int& from, const Int& to, AverageTrace* trace) {
    if (from > to) return;
    Int n = from;
    if (budget_ > 0) {
      Int take = std::min(Int(to - n + 1), budget_);
      exact_block(n, n + take - 1, trace);
      budget_ -= take;
      n += take;
    }
    if (n <= to) unknown_count_ += to - n + 1;
  }

  void advance(Int n, const Int& target, AverageTrace* trace) {
    while (n <= target) {
      if (n <= cfg_.per_term_cap) {
        Int hi = std::min(target, cfg_.per_term_cap);
        exact_block(n, hi, trace);
        n = hi + 1;
        continue;
      }
      const BlockPermutation* perm = window_of(n);
      if (perm == nullptr) {
        Int nb = next_window_lo(n);
        Int hi = (nb < 0) ? target : std::min(target, Int(nb - 1));
        unknown_block(n, hi, trace);
        n = hi + 1;
        continue;
      }
      const bool use_const = constants_ok(*perm);
      if (perm->cert_from && n >= *perm->cert_from) {
        Int hi = std::min(target, perm->window.hi);
        Int len = hi - n + 1;
        realized_total_ += len;
        if (use_const) {
          (stage_parity(perm->stage) > 0 ? cnt_even_ : cnt_odd_) += len;
        } else {
          unknown_count_ += len;
        }
        n = hi + 1;
        continue;
      }
      if (n <= perm->scanned_hi) {
        Int hi = std::min(target, perm->scanned_hi);
        for (; n <= hi; ++n) {
          if (perm->is_realized(n)) {
            realized_total_ += 1;
            if (use_const) {
              (stage_parity(perm->stage) > 0 ? cnt_even_ : cnt_odd_) += 1;
            } else {
              unknown_block(n, n, trace);
            }
          } else {
            unknown_block(n, n, trace);
          }
        }
        continue;
      }
      // Window candidates beyond the greedy scan and below any certificate:
      // unplaced in this plan, value unclassified.
      Int hi = perm->cert_from ? std::min(target, Int(*perm->cert_from - 1))
                               : std::min(target, perm->window.hi);
      unknown_block(n, hi, trace);
      n = hi + 1;
    }
  }

  void emit_checkpoint(const Checkpoint& cp, AverageTrace* trace) {
    TraceRow row;
    row.is_checkpoint = true;
    row.n = cp.n;
    row.stage = cp.stage;
    row.parity = stage_parity(cp.stage);
    const Rat inv_n = make_rat(Int(1), cp.n);
    ExactProb known = exact_sum_ + c_.scaled(Rat(cnt_even_)) +
                      c2_.scaled(Rat(cnt_odd_));
    row.lower = (known + c2_.scaled(Rat(unknown_count_))).scaled(inv_n);
    row.upper = (known + c_.scaled(Rat(unknown_count_))).scaled(inv_n);
    row.realized_fraction = Rat(realized_total_) * inv_n;
    trace->rows.push_back(std::move(row));
  }

  const Theorem1Config& cfg_;
  FloorSet a_;
  Rat mu_a_;
  ExactProb c_;   // e^{-mu(A)}
  ExactProb c2_;  // e^{-2 mu(A)}

  ExactProb exact_sum_;
  Int cnt_even_ = 0;
  Int cnt_odd_ = 0;
  Int unknown_count_ = 0;
  Int realized_total_ = 0;
  Int budget_ = 0;
};

}  // namespace

AverageTrace theorem1_run(const Theorem1Config& config) {
  return Theorem1Runner(config).run();
}

std::vector<OscillationPair> oscillation_pairs(const AverageTrace& trace,
                                               int min_stage) {
  std::vector<const TraceRow*> cps = trace.checkpoint_rows();
  std::vector<OscillationPair> out;
  for (size_t i = 1; i < cps.size(); ++i) {
    const TraceRow* a = cps[i - 1];
    const TraceRow* b = cps[i];
    if (a->stage < min_stage || b->stage < min_stage) continue;
    if (a->parity * b->parity != -1) continue;
    const TraceRow* even = a->parity > 0 ? a : b;
    const TraceRow* odd = a->parity > 0 ? b : a;
    OscillationPair pair;
    pair.even_stage = even->stage;
    pair.odd_stage = odd->stage;
    pair.margin = even->lower - odd->upper;
    out.push_back(std::move(pair));
  }
  return out;
}

NonrecTrace nonrecurrence_run(const NonrecConfig& config) {
  if (!config.schedule) throw ConfigInvalid("nonrecurrence config missing schedule");
  if (config.n_max < 1) throw ConfigInvalid("n_max must be >= 1");
  const TowerSchedule& s = *config.schedule;
  NonrecTrace trace;
  FloorSet e = involution_floor_e(config.r, s);
  FloorSet re = involution_floor_re(config.r, s);
  trace.f_measure = measure(involution_support(config.r, s), s);

  {
    // n = 0: RD and D demand different counts on the same floors.
    NonrecRow row;
    row.n = 0;
    row.base = trace.f_measure;
    row.prob = nonrecurrence_prob(e, re, e, re, s);
    trace.rows.push_back(std::move(row));
  }
  double max_ratio = 0.0;
  for (long n = 1; n <= config.n_max; ++n) {
    HomoclinicData data = homoclinic_quantities(s, config.r, Int(n));
    NonrecRow row;
    row.n = n;
    row.base = data.overlap_measure;
    row.prob = nonrecurrence_prob(data.e, data.re, data.conj_e, data.conj_re, s);
    row.identity_case = row.base == 0;
    if (row.identity_case && !row.prob.is_zero()) {
      throw Error("zero overlap must force zero probability at n=" +
                  std::to_string(n));
    }
    if (!row.identity_case) {
      double ratio = row.prob.to_double() / row.base.get_d();
      if (ratio > max_ratio) max_ratio = ratio;
      trace.has_ratio = true;
    }
    trace.rows.push_back(std::move(row));
  }
  trace.c_empirical = max_ratio;
  return trace;
}

namespace {

std::string exact_prob_json(const ExactProb& p, int digits) {
  std::ostringstream os;
  os << "{\"terms\":[";
  bool first = true;
  for (const auto& [e, c] : p.terms()) {
    if (!first) os << ",";
    first = false;
    os << "[\"" << c.get_num().get_str() << "\",\"" << c.get_den().get_str()
       << "\",\"" << e.get_num().get_str() << "\",\"" << e.get_den().get_str()
       << "\"]";
  }
  os << "],\"float\":\"" << to_float(p, digits) << "\"}";
  return os.str();
}

std::string csv_quote(const std::string& field) {
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += "\"\"";
    else out += ch;
  }
  out += "\"";
  return out;
}

const char* parity_label(int parity) {
  return parity > 0 ? "even" : (parity < 0 ? "odd" : "");
}

}  // namespace

void write_trace_csv(const AverageTrace& trace, std::ostream& out,
                     int digits) {
  out << "n_or_N,stage,parity,base_overlap_num,base_overlap_den,"
         "prob_exact_json,prob_float,lower_bound,upper_bound,"
         "realized_fraction\n";
  for (const TraceRow& row : trace.rows) {
    out << row.n.get_str() << "," << row.stage << ","
        << parity_label(row.parity) << ",";
    if (row.is_checkpoint) {
      out << ",,,," << to_float(row.lower, digits) << ","
          << to_float(row.upper, digits) << ","
          << row.realized_fraction.get_num().get_str() << "/"
          << row.realized_fraction.get_den().get_str();
    } else {
      out << row.base_overlap.get_num().get_str() << ","
          << row.base_overlap.get_den().get_str() << ","
          << csv_quote(exact_prob_json(row.prob, digits)) << ","
          << to_float(row.prob, digits) << ",,,";
    }
    out << "\n";
  }
}

void write_nonrec_csv(const NonrecTrace& trace, std::ostream& out,
                      int digits) {
  out << "n,base_overlap_num,base_overlap_den,prob_exact_json,prob_float,"
         "ratio,identity_case\n";
  for (const NonrecRow& row : trace.rows) {
    out << row.n.get_str() << "," << row.base.get_num().get_str() << ","
        << row.base.get_den().get_str() << ","
        << csv_quote(exact_prob_json(row.prob, digits)) << ","
        << to_float(row.prob, digits) << ",";
    if (row.base > 0) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.*e", digits,
                    row.prob.to_double() / row.base.get_d());
      out << buf;
    }
    out << "," << (row.identity_case ? 1 : 0) << "\n";
  }
}

std::vector<std::string> bundle_names() {
  return {"default", "mild", "mild-trace", "default-growth", "mild-growth",
          "chacon"};
}

std::vector<CylinderEvent> random_cylinder_events(
    const TowerSchedule& schedule, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int top_stage = std::min(4, schedule.j_max());
  auto rand_int = [&rng](long lo, long hi) {
    return lo + static_cast<long>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  std::vector<CylinderEvent> events;
  events.reserve(static_cast<size_t>(count));
  for (int e = 0; e < count; ++e) {
    CylinderEvent ev;
    const int n_constraints = static_cast<int>(rand_int(1, 3));
    for (int c = 0; c < n_constraints; ++c) {
      const int stage = static_cast<int>(rand_int(2, top_stage));
      const long h = schedule.height(stage).get_si();
      FloorSet set = empty_set(stage);
      const int n_floors = static_cast<int>(rand_int(1, 4));
      for (int f = 0; f < n_floors; ++f) {
        set = unite(set, floor_set(schedule, stage, Int(rand_int(0, h - 1))),
                    schedule);
      }
      // counts 0 and 1 dominate; 2 exercises the factorial terms
      const long roll = rand_int(0, 99);
      const int cnt = roll < 50 ? 0 : (roll < 85 ? 1 : 2);
      ev.constraints.push_back(CylinderConstraint{std::move(set), cnt});
    }
    events.push_back(std::move(ev));
  }
  return events;
}

std::unique_ptr<ExperimentBundle> make_bundle(const std::string& preset_name,
                                              int j_max_override) {
  auto bundle = std::make_unique<ExperimentBundle>();
  bundle->name = preset_name;
  ConstructionParams params;
  PermBuildOptions perm_opts;
  int j_max = 0;
  bool build_perms = true;

  if (preset_name == "default") {
    bundle->seq = make_squares_cubes();
    j_max = 4;
    bundle->trace_max_stage = 3;
  } else if (preset_name == "mild") {
    bundle->seq = make_squares_plus_linear();
    j_max = 6;
    bundle->trace_max_stage = 2;
  } else if (preset_name == "mild-trace") {
    bundle->seq = make_squares_plus_linear();
    params.growth_multiplier = 16;
    j_max = 5;
    bundle->trace_max_stage = 5;
  } else if (preset_name == "default-growth") {
    bundle->seq = make_squares_cubes();
    params.growth_multiplier = 1;
    j_max = 4;
    bundle->trace_max_stage = 2;
  } else if (preset_name == "mild-growth") {
    bundle->seq = make_squares_plus_linear();
    params.growth_multiplier = 1;
    j_max = 6;
    bundle->trace_max_stage = 2;
  } else if (preset_name == "chacon") {
    bundle->seq = make_squares_cubes();
    params.preset = Preset::custom;
    // Chacon spacers at the working stages; the top stage adds a large
    // final spacer so shifts up to a few hundred stay inside the ceiling.
    CustomStageRule chacon{3, {Int(0), Int(1), Int(0)}};
    params.custom_stages.assign(6, chacon);
    params.custom_stages.push_back(
        CustomStageRule{3, {Int(0), Int(1), Int(1000000)}});
    j_max = 7;
    build_perms = false;
  } else {
    throw ConfigInvalid("unknown preset: " + preset_name);
  }
  if (j_max_override > 0) j_max = j_max_override;
  bundle->schedule = build_schedule(params, bundle->seq, j_max);
  if (build_perms) {
    bundle->plan = build_plan(bundle->schedule, bundle->seq, perm_opts);
  } else {
    bundle->plan.schedule = &bundle->schedule;
    bundle->plan.seq = &bundle->seq;
  }
  // re-point the plan at the bundle-owned objects
  bundle->plan.schedule = &bundle->schedule;
  bundle->plan.seq = &bundle->seq;
  for (BlockPermutation& p : bundle->plan.perms) p.seq = &bundle->seq;
  return bundle;
}

}  // namespace r1lab
