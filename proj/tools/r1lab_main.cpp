// Command-line front end: schedule building, the two experiment runners,
// the Monte-Carlo agreement report and the sequence gap check.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "r1lab/errors.hpp"
#include "r1lab/experiments.hpp"
#include "r1lab/serialize.hpp"

namespace fs = std::filesystem;
using namespace r1lab;

namespace {

int log_level() {
  const char* v = std::getenv("RANK1_LOG");
  if (v == nullptr) return 0;
  std::string s(v);
  if (s == "debug") return 2;
  if (s == "info") return 1;
  return 0;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[r1lab] " << msg << "\n";
}

Polynomial parse_polynomial(const std::string& text) {
  std::string t;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  }
  if (t.rfind("poly:", 0) == 0) {
    std::vector<Rat> coeffs;
    std::stringstream ss(t.substr(5));
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto slash = item.find('/');
      if (slash == std::string::npos) {
        coeffs.push_back(Rat(Int(item)));
      } else {
        coeffs.push_back(make_rat(Int(item.substr(0, slash)),
                                  Int(item.substr(slash + 1))));
      }
    }
    return Polynomial(std::move(coeffs));
  }
  // sums of terms a*n^k, n^k, a
  std::vector<Rat> coeffs;
  auto bump = [&coeffs](size_t k, const Rat& a) {
    if (coeffs.size() <= k) coeffs.resize(k + 1, Rat(0));
    coeffs[k] += a;
  };
  size_t pos = 0;
  while (pos < t.size()) {
    size_t next = t.find('+', pos + 1);
    if (next == std::string::npos) next = t.size();
    std::string term = t.substr(pos, next - pos);
    pos = next + (next < t.size() ? 1 : 0);
    Rat a(1);
    size_t npos = term.find('n');
    std::string coef = term.substr(0, npos == std::string::npos ? term.size() : npos);
    if (!coef.empty() && coef != "+") {
      if (coef.back() == '*') coef.pop_back();
      if (!coef.empty()) a = Rat(Int(coef));
    }
    if (npos == std::string::npos) {
      bump(0, a);
      continue;
    }
    size_t k = 1;
    size_t caret = term.find('^', npos);
    if (caret != std::string::npos) k = std::stoul(term.substr(caret + 1));
    bump(k, a);
  }
  return Polynomial(std::move(coeffs));
}

struct CommonOpts {
  std::string preset = "default";
  std::string p_text;
  std::string q_text;
  int jmax = 0;
  long growth_k = -1;
  int cuts = 0;
  std::string spacers_text;
  std::string katok_text;
  std::string out_dir = ".";
  int precision = 6;
  int workers = 1;
};

std::unique_ptr<ExperimentBundle> bundle_from_opts(const CommonOpts& o) {
  const bool custom_seq = !o.p_text.empty() || !o.q_text.empty();
  const bool custom_build = o.growth_k >= 0 || o.cuts > 0 ||
                            !o.spacers_text.empty() || !o.katok_text.empty();
  if (!custom_seq && !custom_build) {
    return make_bundle(o.preset, o.jmax);
  }
  auto bundle = std::make_unique<ExperimentBundle>();
  bundle->name = "custom";
  if (custom_seq) {
    if (o.p_text.empty() || o.q_text.empty()) {
      throw ConfigInvalid("--p and --q must be given together");
    }
    bundle->seq = make_pair(parse_polynomial(o.p_text),
                            parse_polynomial(o.q_text), o.p_text, o.q_text);
  } else {
    bundle->seq = make_squares_cubes();
  }
  ConstructionParams params;
  if (o.cuts > 0 || !o.spacers_text.empty()) {
    params.preset = Preset::custom;
    CustomStageRule rule;
    rule.cuts = o.cuts > 0 ? o.cuts : 2;
    std::stringstream ss(o.spacers_text);
    std::string item;
    while (std::getline(ss, item, ',')) rule.spacers.emplace_back(item);
    params.custom_stages.push_back(std::move(rule));
  }
  if (o.growth_k >= 0) params.growth_multiplier = o.growth_k;
  if (!o.katok_text.empty()) {
    std::stringstream ss(o.katok_text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      params.modification_stages.insert(std::stoi(item));
    }
  }
  int jmax = o.jmax > 0 ? o.jmax : 4;
  bundle->schedule = build_schedule(params, bundle->seq, jmax);
  if (params.preset != Preset::custom) {
    bundle->plan = build_plan(bundle->schedule, bundle->seq);
  }
  bundle->plan.schedule = &bundle->schedule;
  bundle->plan.seq = &bundle->seq;
  for (BlockPermutation& p : bundle->plan.perms) p.seq = &bundle->seq;
  return bundle;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigInvalid("cannot open output file: " + path.string());
  out << content;
}

int cmd_build(const CommonOpts& opts) {
  auto bundle = bundle_from_opts(opts);
  fs::create_directories(opts.out_dir);
  write_file(fs::path(opts.out_dir) / "schedule.json",
             schedule_to_json(bundle->schedule).dump(2) + "\n");
  write_file(fs::path(opts.out_dir) / "plan.json",
             plan_to_json(bundle->plan).dump(2) + "\n");
  try {
    Json cps = checkpoints_to_json(checkpoints(bundle->schedule, bundle->seq));
    write_file(fs::path(opts.out_dir) / "checkpoints.json", cps.dump(2) + "\n");
  } catch (const EmptyCheckpoint&) {
    log_info("no checkpoints for this schedule");
  }
  std::cout << "h = [";
  for (int j = 1; j <= bundle->schedule.j_max(); ++j) {
    if (j > 1) std::cout << ", ";
    std::cout << bundle->schedule.height(j).get_str();
  }
  std::cout << "]\n";
  std::cout << "schedule.json, plan.json written to " << opts.out_dir << "\n";
  return 0;
}

int cmd_theorem1(const CommonOpts& opts, long cap, long secondary_cap,
                 int trace_max_stage, long row_cap) {
  auto bundle = bundle_from_opts(opts);
  Theorem1Config cfg;
  cfg.schedule = &bundle->schedule;
  cfg.plan = &bundle->plan;
  cfg.seq = &bundle->seq;
  cfg.per_term_cap = cap;
  cfg.secondary_cap = secondary_cap;
  cfg.trace_max_stage =
      trace_max_stage >= 0 ? trace_max_stage : bundle->trace_max_stage;
  cfg.row_emit_cap = row_cap;
  cfg.workers = opts.workers;
  AverageTrace trace = theorem1_run(cfg);

  fs::create_directories(opts.out_dir);
  std::ostringstream csv;
  write_trace_csv(trace, csv, opts.precision);
  write_file(fs::path(opts.out_dir) / "theorem1_trace.csv", csv.str());

  ExactProb c = ExactProb::exp_term(Rat(1), trace.mu_a);
  ExactProb c2 = ExactProb::exp_term(Rat(1), 2 * trace.mu_a);
  Json summary;
  summary["schedule_digest"] = trace.schedule_digest;
  summary["sequences"] = trace.seq_desc;
  summary["mu_A"] = to_string(trace.mu_a);
  summary["c"] = to_float(c, opts.precision);
  summary["c_squared"] = to_float(c2, opts.precision);
  Json cps = Json::array();
  for (const TraceRow* row : trace.checkpoint_rows()) {
    cps.push_back(Json{{"N", row->n.get_str()},
                       {"stage", row->stage},
                       {"parity", row->parity > 0 ? "even" : "odd"},
                       {"lower", to_float(row->lower, opts.precision)},
                       {"upper", to_float(row->upper, opts.precision)},
                       {"realized_fraction",
                        to_string(row->realized_fraction)}});
  }
  summary["checkpoints"] = cps;
  Json pairs = Json::array();
  ExactProb gap_target = (c - c2).scaled(make_rat(Int(1), Int(2)));
  for (const OscillationPair& pr : oscillation_pairs(trace, 3)) {
    pairs.push_back(
        Json{{"even_stage", pr.even_stage},
             {"odd_stage", pr.odd_stage},
             {"margin", to_float(pr.margin, opts.precision)},
             {"exceeds_half_gap", (pr.margin - gap_target).sign() >= 0}});
  }
  summary["oscillation_pairs"] = pairs;
  write_file(fs::path(opts.out_dir) / "theorem1_summary.json",
             summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_nonrecurrence(const CommonOpts& opts, long n_max, int stage,
                      long e_floor, long re_floor) {
  auto bundle = bundle_from_opts(opts);
  NonrecConfig cfg;
  cfg.schedule = &bundle->schedule;
  cfg.n_max = n_max;
  cfg.r.stage = stage;
  cfg.r.e_index = e_floor;
  cfg.r.re_index = re_floor;
  NonrecTrace trace = nonrecurrence_run(cfg);

  fs::create_directories(opts.out_dir);
  std::ostringstream csv;
  write_nonrec_csv(trace, csv, opts.precision);
  write_file(fs::path(opts.out_dir) / "nonrecurrence_trace.csv", csv.str());

  long zero_rows = 0;
  long nonzero_rows = 0;
  for (const NonrecRow& row : trace.rows) {
    if (row.identity_case) ++zero_rows;
    else ++nonzero_rows;
  }
  Json summary;
  summary["n_max"] = n_max;
  summary["mu_F"] = to_string(trace.f_measure);
  summary["identity_rows"] = zero_rows;
  summary["overlap_rows"] = nonzero_rows;
  summary["empirical_C"] = trace.c_empirical;
  write_file(fs::path(opts.out_dir) / "nonrecurrence_summary.json",
             summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_oracle(const CommonOpts& opts, int events, long mc_samples,
               std::uint64_t seed) {
  auto bundle = make_bundle("chacon", 5);
  std::vector<CylinderEvent> evs =
      random_cylinder_events(bundle->schedule, events, seed);
  Json rows = Json::array();
  bool all_ok = true;
  for (size_t i = 0; i < evs.size(); ++i) {
    ExactProb exact = cylinder_prob(evs[i], bundle->schedule);
    McResult mc = mc_oracle(evs[i], bundle->schedule, mc_samples,
                            seed + 1000 + static_cast<std::uint64_t>(i));
    double ex = exact.to_double();
    double dev = std::abs(ex - mc.estimate);
    bool ok = dev <= 4.0 * mc.stderr_est || dev == 0.0;
    all_ok = all_ok && ok;
    rows.push_back(Json{{"event", static_cast<int>(i)},
                        {"exact", to_float(exact, opts.precision)},
                        {"estimate", mc.estimate},
                        {"stderr", mc.stderr_est},
                        {"within_4_sigma", ok}});
  }
  Json report;
  report["samples_per_event"] = mc_samples;
  report["seed"] = seed;
  report["events"] = rows;
  report["all_within_4_sigma"] = all_ok;
  fs::create_directories(opts.out_dir);
  write_file(fs::path(opts.out_dir) / "oracle_report.json",
             report.dump(2) + "\n");
  std::cout << report.dump(2) << "\n";
  return all_ok ? 0 : 10;
}

int cmd_check(const CommonOpts& opts, long probe) {
  SequencePair seq;
  if (!opts.p_text.empty() && !opts.q_text.empty()) {
    seq = make_pair(parse_polynomial(opts.p_text), parse_polynomial(opts.q_text),
                    opts.p_text, opts.q_text);
  } else {
    auto bundle = make_bundle(opts.preset, 1);
    seq = bundle->seq;
  }
  GapReport rep = gap_condition_check(seq, probe);
  Json out;
  out["p"] = seq.p_name;
  out["q"] = seq.q_name;
  out["p_symbolic"] = rep.p_symbolic_pass;
  out["q_symbolic"] = rep.q_symbolic_pass;
  out["p_probe"] = rep.p_probe_pass;
  out["q_probe"] = rep.q_probe_pass;
  out["p_min_tail_gap"] = rep.p_min_tail_gap.get_str();
  out["q_min_tail_gap"] = rep.q_min_tail_gap.get_str();
  out["pass"] = rep.pass();
  out["note"] = "probe verdicts are empirical, not proofs";
  std::cout << out.dump(2) << "\n";
  return rep.pass() ? 0 : 1;
}

int dispatch_error(const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  if (dynamic_cast<const ConfigInvalid*>(&e)) return 2;
  if (dynamic_cast<const StageExhausted*>(&e)) return 3;
  if (dynamic_cast<const EmptyWindow*>(&e)) return 4;
  if (dynamic_cast<const CountTooLarge*>(&e)) return 5;
  if (dynamic_cast<const Degenerate*>(&e)) return 6;
  if (dynamic_cast<const EmptyCheckpoint*>(&e)) return 7;
  if (dynamic_cast<const CapConflict*>(&e)) return 8;
  return 9;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rank-one construction laboratory"};
  app.set_config("--config");
  app.require_subcommand(1);

  CommonOpts opts;
  long cap = 5000, secondary_cap = 100000, row_cap = 2000;
  int trace_max_stage = -1;
  long n_max = 200, e_floor = 20, re_floor = 22, probe = 200;
  int nr_stage = 4, events = 12;
  long mc_samples = 100000;
  std::uint64_t seed = 20240717;

  auto add_common = [&](CLI::App* cmd, bool with_build = true) {
    cmd->add_option("--preset", opts.preset,
                    "one of: default, mild, mild-trace, default-growth, "
                    "mild-growth, chacon");
    cmd->add_option("--p", opts.p_text, "p sequence, e.g. n^2 or poly:0,0,1");
    cmd->add_option("--q", opts.q_text, "q sequence, e.g. n^3");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--precision", opts.precision, "digits after the point")
        ->check(CLI::Range(1, 50));
    cmd->add_option("--workers", opts.workers, "worker threads");
    if (with_build) {
      cmd->add_option("--jmax", opts.jmax, "number of stages");
      cmd->add_option("--growth-k", opts.growth_k,
                      "spacer margin multiplier (0 = smallest spacers)");
      cmd->add_option("--cuts", opts.cuts, "custom preset: cuts per stage");
      cmd->add_option("--spacers", opts.spacers_text,
                      "custom preset: comma-separated spacers");
      cmd->add_option("--katok-stages", opts.katok_text,
                      "comma-separated stages built with Katok spacers");
    }
  };

  CLI::App* build = app.add_subcommand("build", "emit schedule and permutation audit");
  add_common(build);

  CLI::App* theorem1 = app.add_subcommand("theorem1", "divergence trace");
  add_common(theorem1);
  theorem1->add_option("--cap", cap, "exact per-term cap");
  theorem1->add_option("--secondary-cap", secondary_cap,
                       "extra exact terms for unclassified n");
  theorem1->add_option("--trace-max-stage", trace_max_stage,
                       "last checkpoint stage (-1 = preset default)");
  theorem1->add_option("--row-cap", row_cap, "per-term rows kept in the CSV");

  CLI::App* nonrec = app.add_subcommand("nonrecurrence", "non-recurrence table");
  add_common(nonrec);
  nonrec->add_option("--nmax", n_max, "last n");
  nonrec->add_option("--stage", nr_stage, "stage of the exchanged floors");
  nonrec->add_option("--e-floor", e_floor, "floor index of E");
  nonrec->add_option("--re-floor", re_floor, "floor index of RE");

  CLI::App* oracle = app.add_subcommand("oracle", "exact vs Monte-Carlo report");
  add_common(oracle, false);
  oracle->add_option("--events", events, "number of randomized events");
  oracle->add_option("--mc-samples", mc_samples, "samples per event");
  oracle->add_option("--seed", seed, "RNG seed");

  CLI::App* check = app.add_subcommand("check", "gap condition report");
  add_common(check, false);
  check->add_option("--probe", probe, "probe range for empirical checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed()) return cmd_build(opts);
    if (theorem1->parsed()) {
      return cmd_theorem1(opts, cap, secondary_cap, trace_max_stage, row_cap);
    }
    if (nonrec->parsed()) {
      if (opts.preset == "default" && !nonrec->count("--preset")) {
        opts.preset = "chacon";
      }
      return cmd_nonrecurrence(opts, n_max, nr_stage, e_floor, re_floor);
    }
    if (oracle->parsed()) return cmd_oracle(opts, events, mc_samples, seed);
    if (check->parsed()) return cmd_check(opts, probe);
  } catch (const std::exception& e) {
    return dispatch_error(e);
  }
  return 0;
}
