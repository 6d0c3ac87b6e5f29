#ifndef R1LAB_EXPERIMENTS_HPP_
#define R1LAB_EXPERIMENTS_HPP_

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "r1lab/conjugator.hpp"
#include "r1lab/poisson.hpp"
#include "r1lab/sequences.hpp"
#include "r1lab/tower.hpp"

namespace r1lab {

// Checkpoint N_j = max{n : p(n), q(n) < h_{j+1} - 4 h_j}. Stages whose
// window admits no n are skipped (stage 1 usually has none under the
// smallest spacer rule).
struct Checkpoint {
  int stage = 0;
  Int n;       // N_j
  Int height;  // h_j
  bool growth_ok = false;      // N_j > j * h_j
  bool prev_below_height = false;  // N_{j-1} < h_j (true when no previous)
};

std::vector<Checkpoint> checkpoints(const TowerSchedule& schedule,
                                    const SequencePair& seq);

// N_{j-1}/N_j strictly decreasing, by exact cross-multiplication.
bool ratios_strictly_decreasing(const std::vector<Checkpoint>& cps);

// One row of the divergence trace: either a fully computed term n or a
// checkpoint with a rigorous enclosure of the partial average.
struct TraceRow {
  bool is_checkpoint = false;
  Int n;
  int stage = 0;   // window stage for terms, checkpoint stage otherwise
  int parity = 0;  // +1 even stage, -1 odd stage, 0 none
  bool realized = false;
  Rat base_overlap;  // mu(S^{p(n)} A  intersect  T^{q(n)} A)
  ExactProb prob;    // per-term suspension correlation
  ExactProb lower;   // checkpoint: enclosure of the partial average
  ExactProb upper;
  Rat realized_fraction;
};

struct AverageTrace {
  std::vector<TraceRow> rows;
  std::string schedule_digest;
  std::string seq_desc;
  Rat mu_a;
  Int per_term_cap;
  Int secondary_cap;

  std::vector<const TraceRow*> checkpoint_rows() const;
};

struct Theorem1Config {
  const TowerSchedule* schedule = nullptr;
  const ConjugationPlan* plan = nullptr;
  const SequencePair* seq = nullptr;
  FloorSet a;                 // defaults to X_1 when runs empty
  Int per_term_cap = 5000;    // exact value for every n up to this
  Int secondary_cap = 100000; // further exact terms for unclassified n
  int trace_max_stage = 0;    // 0 = all checkpoint stages
  Int row_emit_cap = 2000;    // per-term rows kept in the trace
  int workers = 1;
};

// Computes partial averages of mu_o(S^{p(n)} C  intersect  T^{q(n)} C) at
// every checkpoint. Terms from placed candidates contribute e^{-mu(A)}
// (even stages) or e^{-2 mu(A)} (odd stages) exactly; unclassified terms
// are either computed exactly (within the caps) or enclosed by
// [e^{-2 mu(A)}, e^{-mu(A)}], so every emitted average is a rigorous
// enclosure.
AverageTrace theorem1_run(const Theorem1Config& config);

// Adjacent even/odd checkpoint separation: lower(even) - upper(odd).
struct OscillationPair {
  int even_stage = 0;
  int odd_stage = 0;
  ExactProb margin;  // lower(even) - upper(odd) - (c - c^2)/2 summand-free
};

// Pairs of adjacent checkpoints with opposite parity, both stages >= min_stage.
std::vector<OscillationPair> oscillation_pairs(const AverageTrace& trace,
                                               int min_stage);

// Non-recurrence table.
struct NonrecRow {
  Int n;
  Rat base;        // mu(T^n F  intersect  F)
  ExactProb prob;  // n = 0: mu_o(RD  intersect  D)
  bool identity_case = false;  // base == 0
};

struct NonrecTrace {
  std::vector<NonrecRow> rows;
  Rat f_measure;
  double c_empirical = 0.0;  // max prob/base over rows with base > 0
  bool has_ratio = false;
};

struct NonrecConfig {
  const TowerSchedule* schedule = nullptr;
  InvolutionR r;
  long n_max = 200;
};

NonrecTrace nonrecurrence_run(const NonrecConfig& config);

// CSV emission (decimal strings; byte-deterministic for a fixed config).
void write_trace_csv(const AverageTrace& trace, std::ostream& out, int digits);
void write_nonrec_csv(const NonrecTrace& trace, std::ostream& out, int digits);

// Bundled configurations shared by the CLI and the test suites. The plan
// holds pointers into the bundle, so bundles live on the heap.
struct ExperimentBundle {
  std::string name;
  SequencePair seq;
  TowerSchedule schedule;
  ConjugationPlan plan;  // empty perms list when not built
  int trace_max_stage = 0;
};

std::unique_ptr<ExperimentBundle> make_bundle(const std::string& preset_name,
                                              int j_max_override = 0);

std::vector<std::string> bundle_names();

// Randomized low-stage cylinder events, deterministic per seed; shared by
// the Monte-Carlo agreement report and its tests.
std::vector<CylinderEvent> random_cylinder_events(
    const TowerSchedule& schedule, int count, std::uint64_t seed);

}  // namespace r1lab

#endif  // R1LAB_EXPERIMENTS_HPP_
