#include "r1lab/serialize.hpp"

#include "r1lab/errors.hpp"

namespace r1lab {

Json floor_set_to_json(const FloorSet& set) {
  Json runs = Json::array();
  for (const Run& r : set.runs) {
    runs.push_back(Json::array({r.lo.get_str(), r.hi.get_str()}));
  }
  return Json{{"stage", set.stage}, {"runs", runs}};
}

FloorSet floor_set_from_json(const Json& j) {
  std::vector<Run> runs;
  for (const Json& r : j.at("runs")) {
    runs.push_back(Run{Int(r.at(0).get<std::string>()),
                       Int(r.at(1).get<std::string>())});
  }
  return make_floor_set(j.at("stage").get<int>(), std::move(runs));
}

Json schedule_to_json(const TowerSchedule& schedule) {
  Json stages = Json::array();
  for (const TowerStage& st : schedule.stages()) {
    Json spacers = Json::array();
    for (const Int& s : st.spacers) spacers.push_back(s.get_str());
    Json offsets = Json::array();
    for (const Int& o : st.offsets) offsets.push_back(o.get_str());
    stages.push_back(Json{{"j", st.index},
                          {"height", st.height.get_str()},
                          {"width_num", st.width.get_num().get_str()},
                          {"width_den", st.width.get_den().get_str()},
                          {"cuts", st.cuts},
                          {"spacers", spacers},
                          {"offsets", offsets},
                          {"next_height", st.next_height.get_str()}});
  }
  return Json{{"j_max", schedule.j_max()},
              {"digest", schedule.digest()},
              {"stages", stages}};
}

TowerSchedule schedule_from_json(const Json& j) {
  std::vector<TowerStage> stages;
  for (const Json& sj : j.at("stages")) {
    TowerStage st;
    st.index = sj.at("j").get<int>();
    st.height = Int(sj.at("height").get<std::string>());
    st.width = make_rat(Int(sj.at("width_num").get<std::string>()),
                        Int(sj.at("width_den").get<std::string>()));
    st.cuts = sj.at("cuts").get<int>();
    for (const Json& s : sj.at("spacers")) {
      st.spacers.emplace_back(s.get<std::string>());
    }
    for (const Json& o : sj.at("offsets")) {
      st.offsets.emplace_back(o.get<std::string>());
    }
    st.next_height = Int(sj.at("next_height").get<std::string>());
    stages.push_back(std::move(st));
  }
  ConstructionParams params;
  params.preset = Preset::custom;
  TowerSchedule schedule(params, std::move(stages));
  // Revalidate the height recursion and offset structure.
  for (int idx = 1; idx <= schedule.j_max(); ++idx) {
    const TowerStage& st = schedule.stage(idx);
    if (st.spacers.size() != static_cast<size_t>(st.cuts) ||
        st.offsets.size() != static_cast<size_t>(st.cuts)) {
      throw ConfigInvalid("stage arity mismatch in schedule JSON");
    }
    Int off(0);
    Int total = st.height * st.cuts;
    for (int i = 0; i < st.cuts; ++i) {
      if (st.offsets[static_cast<size_t>(i)] != off) {
        throw ConfigInvalid("offset mismatch in schedule JSON");
      }
      off += st.height + st.spacers[static_cast<size_t>(i)];
      total += st.spacers[static_cast<size_t>(i)];
    }
    if (total != st.next_height || off != st.next_height) {
      throw ConfigInvalid("height recursion violated in schedule JSON");
    }
    if (idx < schedule.j_max() &&
        schedule.stage(idx + 1).height != st.next_height) {
      throw ConfigInvalid("stage heights disagree in schedule JSON");
    }
  }
  return schedule;
}

Json perm_to_json(const BlockPermutation& perm) {
  Json out;
  out["stage"] = perm.stage;
  out["mode"] = perm.mode == PermMode::odd
                    ? "odd"
                    : (perm.mode == PermMode::even ? "even" : "identity");
  out["block_len"] = perm.block_len.get_str();
  if (perm.window.empty) {
    out["window"] = nullptr;
  } else {
    out["window"] = Json{{"lo", perm.window.lo.get_str()},
                         {"hi", perm.window.hi.get_str()}};
  }
  Json swaps = Json::array();
  for (const BlockSwap& sw : perm.swaps) {
    swaps.push_back(Json::array(
        {sw.src.get_str(), sw.dst.get_str(), perm.block_len.get_str()}));
  }
  out["swaps"] = swaps;
  Json realized = Json::array();
  for (const Int& n : perm.realized) realized.push_back(n.get_str());
  out["realized"] = realized;
  out["scanned_hi"] = perm.scanned_hi.get_str();
  if (perm.cert_from) {
    out["certified_from"] = perm.cert_from->get_str();
    out["realized_count"] =
        perm.realized_count_up_to(perm.window.hi).get_str();
  }
  out["candidates"] = perm.candidate_count().get_str();
  return out;
}

Json plan_to_json(const ConjugationPlan& plan) {
  Json perms = Json::array();
  for (const BlockPermutation& p : plan.perms) perms.push_back(perm_to_json(p));
  return Json{{"perms", perms}};
}

Json exact_prob_to_json(const ExactProb& p, int digits) {
  Json terms = Json::array();
  for (const auto& [e, c] : p.terms()) {
    terms.push_back(Json::array({c.get_num().get_str(), c.get_den().get_str(),
                                 e.get_num().get_str(), e.get_den().get_str()}));
  }
  return Json{{"terms", terms}, {"float", to_float(p, digits)}};
}

ExactProb exact_prob_from_json(const Json& j) {
  ExactProb p;
  for (const Json& t : j.at("terms")) {
    Rat coeff = make_rat(Int(t.at(0).get<std::string>()),
                         Int(t.at(1).get<std::string>()));
    Rat expo = make_rat(Int(t.at(2).get<std::string>()),
                        Int(t.at(3).get<std::string>()));
    p.add_term(coeff, expo);
  }
  return p;
}

Json checkpoints_to_json(const std::vector<Checkpoint>& cps) {
  Json out = Json::array();
  for (const Checkpoint& cp : cps) {
    out.push_back(Json{{"stage", cp.stage},
                       {"n", cp.n.get_str()},
                       {"height", cp.height.get_str()},
                       {"growth_ok", cp.growth_ok},
                       {"prev_below_height", cp.prev_below_height}});
  }
  return out;
}

}  // namespace r1lab
