#include <doctest.h>

#include <sstream>

#include "oracle_models.hpp"
#include "r1lab/errors.hpp"
#include "r1lab/experiments.hpp"

using namespace r1lab;

namespace {

ExactProb c() { return ExactProb::exp_term(Rat(1), Rat(1)); }
ExactProb c2() { return ExactProb::exp_term(Rat(1), Rat(2)); }

}  // namespace

TEST_CASE("checkpoints on the default schedule") {
  auto bundle = make_bundle("default");
  std::vector<Checkpoint> cps = checkpoints(bundle->schedule, bundle->seq);
  REQUIRE(cps.size() == 3);  // stage 1 has no candidates
  CHECK(cps[0].stage == 2);
  CHECK(cps[0].n == 7);
  CHECK(cps[1].stage == 3);
  CHECK(cps[2].stage == 4);

  // N_3 is pinned by the defining inequalities rather than a frozen value
  const Int bound = bundle->schedule.height(4) - 4 * bundle->schedule.height(3);
  CHECK(bundle->seq.q_at(cps[1].n) < bound);
  CHECK(bundle->seq.q_at(cps[1].n + 1) >= bound);

  // under the smallest admissible spacers the checkpoint sits just below
  // j*h_j, so the growth comparison fails by one index
  CHECK(cps[0].n == Int(2) * bundle->schedule.height(2) - 1);
  CHECK(!cps[0].growth_ok);
  CHECK(cps[1].prev_below_height);
  CHECK(ratios_strictly_decreasing(cps));
}

TEST_CASE("growth-margin schedules satisfy the checkpoint growth claims") {
  for (const char* name : {"default-growth", "mild-growth"}) {
    auto bundle = make_bundle(name);
    std::vector<Checkpoint> cps = checkpoints(bundle->schedule, bundle->seq);
    CHECK(cps.size() >= 4);
    for (const Checkpoint& cp : cps) {
      CHECK(cp.growth_ok);
      CHECK(cp.prev_below_height);
    }
    CHECK(ratios_strictly_decreasing(cps));
  }
}

TEST_CASE("checkpoints require a usable window") {
  // plain Chacon spacers leave h_{j+1} - 4 h_j <= 0 at every stage
  ConstructionParams params;
  params.preset = Preset::custom;
  params.custom_stages = {CustomStageRule{3, {Int(0), Int(1), Int(0)}}};
  SequencePair seq = make_squares_cubes();
  TowerSchedule s = build_schedule(params, seq, 6);
  CHECK_THROWS_AS(checkpoints(s, seq), EmptyCheckpoint);
}

TEST_CASE("theorem1 trace on the default schedule") {
  auto bundle = make_bundle("default");
  Theorem1Config cfg;
  cfg.schedule = &bundle->schedule;
  cfg.plan = &bundle->plan;
  cfg.seq = &bundle->seq;
  cfg.trace_max_stage = bundle->trace_max_stage;
  AverageTrace trace = theorem1_run(cfg);

  auto cps = trace.checkpoint_rows();
  REQUIRE(cps.size() == 2);

  // First seven terms, worked at the index level: candidates 3, 6, 7 are
  // realized (value c); n = 1 stays clear of every block, so its images
  // coincide (value c); S^8 A straddles the placed destination block
  // [9,17), leaving an overlap of one stage-3 floor: e^{-7/4};
  // the skipped candidates 4, 5 have disjoint images, value c^2.
  const TraceRow* at7 = cps[0];
  CHECK(at7->stage == 2);
  CHECK(at7->parity == 1);
  ExactProb expected7 = (c().scaled(Rat(4)) + c2().scaled(Rat(2)) +
                         ExactProb::exp_term(Rat(1), make_rat(Int(7), Int(4))))
                            .scaled(make_rat(Int(1), Int(7)));
  CHECK(at7->lower == expected7);
  CHECK(at7->upper == expected7);
  CHECK(at7->realized_fraction == make_rat(Int(3), Int(7)));

  // all terms up to N_3 are computed exactly: the enclosure is a point
  const TraceRow* at_n3 = cps[1];
  CHECK(at_n3->stage == 3);
  CHECK(at_n3->parity == -1);
  CHECK(at_n3->lower == at_n3->upper);
  CHECK((at_n3->lower - c2()).sign() > 0);     // average sits above c^2
  CHECK((c() - at_n3->upper).sign() > 0);      // and below c

  // per-term rows for the first checkpoint window
  REQUIRE(trace.rows.size() > 8);
  const std::vector<Rat> bases = {Rat(1), make_rat(Int(1), Int(4)), Rat(1),
                                  Rat(0), Rat(0), Rat(1), Rat(1)};
  for (int i = 0; i < 7; ++i) {
    const TraceRow& row = trace.rows[static_cast<size_t>(i)];
    CHECK(!row.is_checkpoint);
    CHECK(row.n == i + 1);
    CHECK(row.base_overlap == bases[static_cast<size_t>(i)]);
    CHECK(row.prob == ExactProb::exp_term(Rat(1), 2 - bases[static_cast<size_t>(i)]));
  }
}

TEST_CASE("first terms agree with the index-level oracle") {
  auto bundle = make_bundle("default");
  const TowerSchedule& s = bundle->schedule;
  Theorem1Config cfg;
  cfg.schedule = &s;
  cfg.plan = &bundle->plan;
  cfg.seq = &bundle->seq;
  cfg.trace_max_stage = 3;
  AverageTrace trace = theorem1_run(cfg);

  const BlockPermutation* perm2 = bundle->plan.perm_at(2);
  FloorSet x1 = tower_set(s, 1);
  oracle::BfSet a3 = oracle::from_floor_set(lift(x1, s, 3));
  for (long n = 1; n <= 8; ++n) {
    long p = n * n, q = n * n * n;
    oracle::BfSet img = oracle::bf_apply_perm(a3, *perm2, s);
    img = oracle::bf_shift(img, q, s);
    img = oracle::bf_apply_perm(img, *perm2, s);
    oracle::BfSet sp = oracle::bf_shift(a3, p, s);
    oracle::BfSet both{img.stage, {}};
    oracle::BfSet lifted_sp = oracle::bf_lift(sp, s, img.stage);
    for (long i : img.idx) {
      if (lifted_sp.idx.count(i)) both.idx.insert(i);
    }
    Rat expected = oracle::bf_measure(both, s);
    CHECK(trace.rows[static_cast<size_t>(n - 1)].base_overlap == expected);
  }
}

TEST_CASE("theorem1 enclosures stay ordered and within range on a growth run") {
  ConstructionParams params;
  params.growth_multiplier = 2;
  auto bundle = std::make_unique<ExperimentBundle>();
  bundle->seq = make_squares_plus_linear();
  bundle->schedule = build_schedule(params, bundle->seq, 3);
  bundle->plan = build_plan(bundle->schedule, bundle->seq);
  bundle->plan.schedule = &bundle->schedule;
  bundle->plan.seq = &bundle->seq;
  for (BlockPermutation& p : bundle->plan.perms) p.seq = &bundle->seq;

  Theorem1Config cfg;
  cfg.schedule = &bundle->schedule;
  cfg.plan = &bundle->plan;
  cfg.seq = &bundle->seq;
  cfg.per_term_cap = 100;
  cfg.secondary_cap = 50;
  AverageTrace trace = theorem1_run(cfg);
  for (const TraceRow* row : trace.checkpoint_rows()) {
    CHECK((row->upper - row->lower).sign() >= 0);
    CHECK((row->lower - c2()).sign() >= 0);
    CHECK((c() - row->upper).sign() >= 0);
    CHECK(row->realized_fraction >= 0);
    CHECK(row->realized_fraction <= 1);
  }
}

TEST_CASE("cap conflicts are rejected") {
  auto bundle = make_bundle("default");
  Theorem1Config cfg;
  cfg.schedule = &bundle->schedule;
  cfg.plan = &bundle->plan;
  cfg.seq = &bundle->seq;
  cfg.per_term_cap = 5;  // below N_2 = 7
  CHECK_THROWS_AS(theorem1_run(cfg), CapConflict);
}

TEST_CASE("theorem1 CSV output is byte deterministic") {
  auto bundle = make_bundle("default");
  Theorem1Config cfg;
  cfg.schedule = &bundle->schedule;
  cfg.plan = &bundle->plan;
  cfg.seq = &bundle->seq;
  cfg.trace_max_stage = bundle->trace_max_stage;

  std::ostringstream a, b;
  write_trace_csv(theorem1_run(cfg), a, 6);
  write_trace_csv(theorem1_run(cfg), b, 6);
  CHECK(a.str() == b.str());
  CHECK(a.str().find("n_or_N,stage,parity") == 0);
}

TEST_CASE("non-recurrence run on the chacon schedule") {
  auto bundle = make_bundle("chacon");
  const TowerSchedule& s = bundle->schedule;
  NonrecConfig cfg;
  cfg.schedule = &s;
  cfg.r = InvolutionR{4, Int(20), Int(22)};
  cfg.n_max = 200;
  NonrecTrace trace = nonrecurrence_run(cfg);
  REQUIRE(trace.rows.size() == 201);

  // row 0 is RD vs D
  CHECK(trace.rows[0].prob.is_zero());
  CHECK(trace.rows[0].base == trace.f_measure);
  CHECK(trace.f_measure == make_rat(Int(2), Int(27)));

  std::set<long> nonzero;
  for (const NonrecRow& row : trace.rows) {
    if (row.n == 0) continue;
    if (!row.identity_case) nonzero.insert(row.n.get_si());
    if (row.identity_case) CHECK(row.prob.is_zero());
  }
  // spot checks from the copy-offset arithmetic: the stage-4 copies sit at
  // {0,40,81} + {0,121,243} inside stage 6, and E/RE differ by 2
  const std::set<long> expected = {2,   38,  39,  40,  41,  42,  43,  78,
                                   79,  80,  81,  82,  83,  84,  119, 120,
                                   121, 122, 123, 124, 159, 160, 161, 162,
                                   163, 164, 165, 199, 200};
  CHECK(nonzero == expected);

  // bases (and hence the overlap pattern) agree with the index oracle
  oracle::BfSet f = oracle::from_floor_set(involution_support(cfg.r, s));
  for (const NonrecRow& row : trace.rows) {
    if (row.n == 0) continue;
    CHECK(row.base == oracle::bf_correlation(f, f, row.n.get_si(), s));
  }

  // the n = 40 row, frozen from an independent index enumeration
  CHECK(trace.rows[40].base == make_rat(Int(80), Int(2187)));
  CHECK(trace.rows[40].prob ==
        ExactProb::exp_term(make_rat(Int(40), Int(2187)),
                            make_rat(Int(2), Int(27))));
  CHECK(trace.has_ratio);
  CHECK(trace.c_empirical > 0.0);

  // row-wise bound with the reported constant
  for (const NonrecRow& row : trace.rows) {
    if (row.base > 0) {
      CHECK(row.prob.to_double() <=
            trace.c_empirical * row.base.get_d() * (1 + 1e-12));
    }
  }

  std::ostringstream csv;
  write_nonrec_csv(trace, csv, 6);
  CHECK(csv.str().find("n,base_overlap_num") == 0);
}

TEST_CASE("random cylinder events are deterministic per seed") {
  auto bundle = make_bundle("chacon", 5);
  auto a = random_cylinder_events(bundle->schedule, 5, 99);
  auto b = random_cylinder_events(bundle->schedule, 5, 99);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].constraints.size() == b[i].constraints.size());
    for (size_t j = 0; j < a[i].constraints.size(); ++j) {
      CHECK(a[i].constraints[j].count == b[i].constraints[j].count);
      CHECK(equals(a[i].constraints[j].set, b[i].constraints[j].set,
                   bundle->schedule));
    }
  }
}
