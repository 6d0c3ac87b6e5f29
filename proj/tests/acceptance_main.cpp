// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Heavier end-to-end runs live here; fine-grained cases are in the
// unit suites.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "oracle_models.hpp"
#include "r1lab/errors.hpp"
#include "r1lab/experiments.hpp"
#include "r1lab/poisson.hpp"

using namespace r1lab;

namespace {

int g_failures = 0;

void report(int id, const char* label, bool ok, double seconds,
            const std::string& detail = "") {
  std::printf("%s [%d] %-34s (%6.2fs)%s%s\n", ok ? "PASS" : "FAIL", id, label,
              seconds, detail.empty() ? "" : " : ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

double run_timed(const std::function<bool(std::string*)>& body, int id,
                 const char* label, double time_limit = 0.0) {
  const auto start = std::chrono::steady_clock::now();
  bool ok = false;
  std::string detail;
  try {
    ok = body(&detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
    ok = false;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (time_limit > 0 && secs > time_limit) {
    ok = false;
    detail += " [over time limit]";
  }
  report(id, label, ok, secs, detail);
  return secs;
}

FloorSet random_set(const TowerSchedule& s, int stage, std::mt19937_64* rng) {
  const long h = s.height(stage).get_si();
  std::uniform_int_distribution<long> pick(0, h - 1);
  std::uniform_int_distribution<long> len(1, std::max<long>(1, h / 8));
  std::uniform_int_distribution<int> n_runs(1, 4);
  std::vector<Run> runs;
  for (int i = 0; i < n_runs(*rng); ++i) {
    long a = pick(*rng);
    runs.push_back(Run{Int(a), Int(std::min<long>(h, a + len(*rng)))});
  }
  return make_floor_set(stage, std::move(runs));
}

// 1. Exact halving law on both bundled schedules.
bool criterion_halving(std::string* detail) {
  auto def = make_bundle("default");  // j_max 4
  FloorSet x1 = tower_set(def->schedule, 1);
  for (int j = 2; j <= def->schedule.j_max(); ++j) {
    if (correlation(x1, x1, def->schedule.height(j), def->schedule) !=
        Rat(1, 2)) {
      *detail = "default schedule stage " + std::to_string(j);
      return false;
    }
  }
  auto mild = make_bundle("mild");  // j_max 6
  FloorSet y1 = tower_set(mild->schedule, 1);
  for (int j = 2; j <= mild->schedule.j_max(); ++j) {
    if (correlation(y1, y1, mild->schedule.height(j), mild->schedule) !=
        Rat(1, 2)) {
      *detail = "mild schedule stage " + std::to_string(j);
      return false;
    }
  }
  *detail = "1/2 exactly at stages 2..4 (default) and 2..6 (mild)";
  return true;
}

// 2. The two displayed identities for every placed candidate.
bool criterion_identities(std::string* detail) {
  auto bundle = make_bundle("default");
  const TowerSchedule& s = bundle->schedule;
  FloorSet a = tower_set(s, 1);
  long total_realized = 0;
  std::ostringstream fractions;
  for (const BlockPermutation& perm : bundle->plan.perms) {
    if (perm.is_identity() || perm.window.empty) continue;
    const Int two_h = 2 * s.height(perm.stage);
    for (const Int& n : perm.realized) {
      FloorSet lhs = t_power(a, bundle->seq.q_at(n), bundle->plan);
      if (perm.mode == PermMode::even) {
        if (!equals(lhs, shift(a, bundle->seq.p_at(n), s), s)) {
          *detail = "even identity fails at n=" + n.get_str();
          return false;
        }
      } else {
        if (!equals(lhs, shift(a, bundle->seq.p_at(n) + two_h, s), s)) {
          *detail = "odd identity fails at n=" + n.get_str();
          return false;
        }
        if (!is_disjoint(lhs, shift(a, bundle->seq.p_at(n), s), s)) {
          *detail = "odd disjointness fails at n=" + n.get_str();
          return false;
        }
      }
    }
    total_realized += static_cast<long>(perm.realized.size());
    Int scanned = perm.scanned_hi - perm.window.lo + 1;
    fractions << " stage" << perm.stage << ":"
              << perm.realized.size() << "/" << scanned.get_str()
              << " scanned of " << perm.candidate_count().get_str();
  }
  if (total_realized < 20) {
    *detail = "only " + std::to_string(total_realized) + " realized";
    return false;
  }
  *detail = std::to_string(total_realized) + " realized checked;" +
            fractions.str();
  return true;
}

// 3. Checkpoint growth claims on margin-bearing schedules.
bool criterion_checkpoints(std::string* detail) {
  for (const char* name : {"default-growth", "mild-growth", "mild-trace"}) {
    auto bundle = make_bundle(name);
    std::vector<Checkpoint> cps = checkpoints(bundle->schedule, bundle->seq);
    if (cps.size() < 3) {
      *detail = std::string(name) + ": too few checkpoints";
      return false;
    }
    for (const Checkpoint& cp : cps) {
      if (!cp.growth_ok) {
        *detail = std::string(name) + ": N_j <= j*h_j at stage " +
                  std::to_string(cp.stage);
        return false;
      }
    }
    if (!ratios_strictly_decreasing(cps)) {
      *detail = std::string(name) + ": ratios not strictly decreasing";
      return false;
    }
  }
  *detail = "N_j > j*h_j and N_{j-1}/N_j strictly decreasing on all three";
  return true;
}

// 4. Rigorous enclosure separation at adjacent parities.
bool criterion_oscillation(std::string* detail) {
  auto bundle = make_bundle("mild-trace");
  Theorem1Config cfg;
  cfg.schedule = &bundle->schedule;
  cfg.plan = &bundle->plan;
  cfg.seq = &bundle->seq;
  cfg.trace_max_stage = bundle->trace_max_stage;
  AverageTrace trace = theorem1_run(cfg);

  ExactProb c = ExactProb::exp_term(Rat(1), trace.mu_a);
  ExactProb c2 = ExactProb::exp_term(Rat(1), 2 * trace.mu_a);
  ExactProb half_gap = (c - c2).scaled(make_rat(Int(1), Int(2)));

  std::vector<OscillationPair> pairs = oscillation_pairs(trace, 3);
  if (pairs.empty()) {
    *detail = "no adjacent parities with both stages >= 3";
    return false;
  }
  std::ostringstream os;
  for (const OscillationPair& pr : pairs) {
    ExactProb slack = pr.margin - half_gap;
    if (slack.sign() < 0) {
      *detail = "margin below (c-c^2)/2 for stages " +
                std::to_string(pr.even_stage) + "/" +
                std::to_string(pr.odd_stage);
      return false;
    }
    os << " (" << pr.even_stage << "," << pr.odd_stage
       << "): " << to_float(pr.margin, 4);
  }
  *detail = std::to_string(pairs.size()) + " pair(s), margins vs 0.1163:" +
            os.str();
  return true;
}

// 5. Exact calculus against the Monte-Carlo oracle.
bool criterion_mc_agreement(std::string* detail) {
  auto bundle = make_bundle("chacon", 5);
  const std::uint64_t seed = 20240717;
  std::vector<CylinderEvent> events =
      random_cylinder_events(bundle->schedule, 12, seed);
  double worst = 0.0;
  for (size_t i = 0; i < events.size(); ++i) {
    ExactProb exact = cylinder_prob(events[i], bundle->schedule);
    McResult mc = mc_oracle(events[i], bundle->schedule, 100000,
                            seed + 1000 + static_cast<std::uint64_t>(i));
    const double dev = std::abs(exact.to_double() - mc.estimate);
    if (dev > 0 && dev > 4.0 * mc.stderr_est) {
      *detail = "event " + std::to_string(i) + " off by " +
                std::to_string(dev) + " (4sigma = " +
                std::to_string(4 * mc.stderr_est) + ")";
      return false;
    }
    if (mc.stderr_est > 0) worst = std::max(worst, dev / mc.stderr_est);
  }
  std::ostringstream os;
  os << "12 events within 4 sigma; worst deviation " << worst << " sigma";
  *detail = os.str();
  return true;
}

// 6. Non-recurrence identities and the row-wise bound.
bool criterion_nonrecurrence(std::string* detail) {
  auto bundle = make_bundle("chacon");
  NonrecConfig cfg;
  cfg.schedule = &bundle->schedule;
  cfg.r = InvolutionR{4, Int(20), Int(22)};
  cfg.n_max = 200;
  NonrecTrace trace = nonrecurrence_run(cfg);

  if (!trace.rows[0].prob.is_zero()) {
    *detail = "mu_o(RD ^ D) != 0";
    return false;
  }
  long zero_rows = 0, bound_rows = 0;
  for (const NonrecRow& row : trace.rows) {
    if (row.n == 0) continue;
    if (row.base == 0) {
      ++zero_rows;
      if (!row.prob.is_zero()) {
        *detail = "identity case violated at n=" + row.n.get_str();
        return false;
      }
    } else {
      ++bound_rows;
      if (row.prob.to_double() >
          trace.c_empirical * row.base.get_d() * (1 + 1e-12)) {
        *detail = "bound violated at n=" + row.n.get_str();
        return false;
      }
    }
  }
  std::ostringstream os;
  os << zero_rows << " identity rows exact zero, " << bound_rows
     << " bounded rows, C = " << trace.c_empirical;
  *detail = os.str();
  return true;
}

// 7. Randomized property suites (>= 1000 cases each).
bool criterion_properties(std::string* detail) {
  ConstructionParams chacon_params;
  chacon_params.preset = Preset::custom;
  chacon_params.custom_stages.assign(
      6, CustomStageRule{3, {Int(0), Int(1), Int(0)}});
  chacon_params.custom_stages.push_back(
      CustomStageRule{3, {Int(0), Int(1), Int(1000000)}});
  SequencePair seq = make_squares_cubes();
  TowerSchedule chacon = build_schedule(chacon_params, seq, 7);
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> stage_pick(2, 6);
  std::uniform_int_distribution<long> shift_pick(-50, 400);

  // set algebra + lift/shift commutation (top-touching shifts may exhaust
  // the schedule and are discarded; well over 1000 cases remain)
  int shift_cases = 0;
  for (int it = 0; it < 2000; ++it) {
    int stage = stage_pick(rng);
    FloorSet a = random_set(chacon, stage, &rng);
    FloorSet b = random_set(chacon, stage_pick(rng), &rng);
    Rat lhs = measure(unite(a, b, chacon), chacon);
    Rat rhs = measure(a, chacon) + measure(b, chacon) -
              measure(intersect(a, b, chacon), chacon);
    if (lhs != rhs) {
      *detail = "inclusion-exclusion failed";
      return false;
    }
    Int k(std::abs(shift_pick(rng)));
    FloorSet moved;
    try {
      moved = shift(a, k, chacon);
    } catch (const StageExhausted&) {
      continue;
    }
    ++shift_cases;
    if (measure(moved, chacon) != measure(a, chacon) ||
        !equals(shift(moved, -k, chacon), a, chacon) ||
        !equals(shift(lift(a, chacon, stage + 1), k, chacon), moved, chacon)) {
      *detail = "lift/shift property failed";
      return false;
    }
  }
  if (shift_cases < 1000) {
    *detail = "too few shift cases survived";
    return false;
  }

  // brute-force oracle agreement
  for (int it = 0; it < 1000; ++it) {
    FloorSet a = random_set(chacon, stage_pick(rng), &rng);
    FloorSet b = random_set(chacon, stage_pick(rng), &rng);
    oracle::BfSet ba = oracle::from_floor_set(a);
    oracle::BfSet bb = oracle::from_floor_set(b);
    if (measure(a, chacon) != oracle::bf_measure(ba, chacon)) {
      *detail = "oracle measure mismatch";
      return false;
    }
    long k = std::abs(shift_pick(rng));
    if (correlation(a, b, Int(k), chacon) !=
        oracle::bf_correlation(ba, bb, k, chacon)) {
      *detail = "oracle correlation mismatch";
      return false;
    }
  }

  // conjugation composition
  auto bundle = make_bundle("default", 3);
  std::uniform_int_distribution<long> m_pick(0, 120);
  for (int it = 0; it < 1000; ++it) {
    FloorSet a = random_set(bundle->schedule, 2, &rng);
    Int m1(m_pick(rng)), m2(m_pick(rng));
    FloorSet two = t_power(t_power(a, m1, bundle->plan), m2, bundle->plan);
    if (!equals(two, t_power(a, m1 + m2, bundle->plan), bundle->schedule)) {
      *detail = "t_power additivity failed";
      return false;
    }
  }

  // exact zero test
  std::uniform_int_distribution<long> num(0, 40);
  std::uniform_int_distribution<long> den(1, 8);
  std::uniform_int_distribution<int> terms(1, 5);
  for (int it = 0; it < 1000; ++it) {
    ExactProb p;
    for (int t = 0; t < terms(rng); ++t) {
      p.add_term(make_rat(Int(num(rng)) - 20, Int(den(rng))),
                 make_rat(Int(num(rng)), Int(den(rng))));
    }
    if (it % 2 == 0) p = p - p;
    std::string rendered = to_float(p, 31);
    bool tiny = true;
    for (char ch : rendered) {
      if (ch != '0' && ch != '.' && ch != '-') tiny = false;
    }
    if (p.is_zero() != tiny) {
      *detail = "zero test disagreement";
      return false;
    }
  }
  *detail = "4000+ randomized cases across the four suites";
  return true;
}

// 8. Byte-identical repeated runs.
bool criterion_determinism(std::string* detail) {
  auto render = []() {
    auto bundle = make_bundle("default");
    Theorem1Config cfg;
    cfg.schedule = &bundle->schedule;
    cfg.plan = &bundle->plan;
    cfg.seq = &bundle->seq;
    cfg.trace_max_stage = bundle->trace_max_stage;
    std::ostringstream csv;
    write_trace_csv(theorem1_run(cfg), csv, 6);
    return csv.str();
  };
  const std::string first = render();
  const std::string second = render();
  if (first != second) {
    *detail = "CSV bytes differ between runs";
    return false;
  }
  *detail = "two full runs, " + std::to_string(first.size()) +
            " bytes each, identical";
  return true;
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  run_timed(criterion_halving, 1, "halving law, exact", 60.0);
  run_timed(criterion_identities, 2, "stage identities, exact");
  run_timed(criterion_checkpoints, 3, "checkpoint growth");
  run_timed(criterion_oscillation, 4, "oscillation enclosure");
  run_timed(criterion_mc_agreement, 5, "poisson calculus vs oracle", 120.0);
  run_timed(criterion_nonrecurrence, 6, "non-recurrence identities", 60.0);
  run_timed(criterion_properties, 7, "property suites");
  run_timed(criterion_determinism, 8, "determinism");
  if (g_failures > 0) {
    std::printf("%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
