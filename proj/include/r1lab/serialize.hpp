#ifndef R1LAB_SERIALIZE_HPP_
#define R1LAB_SERIALIZE_HPP_

#include <json.hpp>

#include "r1lab/conjugator.hpp"
#include "r1lab/experiments.hpp"
#include "r1lab/poisson.hpp"
#include "r1lab/tower.hpp"

namespace r1lab {

using Json = nlohmann::ordered_json;

// Big integers travel as decimal strings: stage heights overflow 64-bit
// well before the configurations of interest.

Json floor_set_to_json(const FloorSet& set);
FloorSet floor_set_from_json(const Json& j);

Json schedule_to_json(const TowerSchedule& schedule);
TowerSchedule schedule_from_json(const Json& j);  // revalidates the recursion

Json perm_to_json(const BlockPermutation& perm);
Json plan_to_json(const ConjugationPlan& plan);

Json exact_prob_to_json(const ExactProb& p, int digits);
ExactProb exact_prob_from_json(const Json& j);

Json checkpoints_to_json(const std::vector<Checkpoint>& cps);

}  // namespace r1lab

#endif  // R1LAB_SERIALIZE_HPP_
