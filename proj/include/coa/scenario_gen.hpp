#ifndef COA_SCENARIO_GEN_HPP
#define COA_SCENARIO_GEN_HPP

#include <string>
#include <vector>

#include "coa/scenario.hpp"

namespace coa {

// Parameterized scenario for one of the 15 task classes. `noisy` switches
// between the clean fixture flavor (no noise, no jitter) and the suite
// flavor (per-primitive noise rates plus region jitter).
ScenarioSpec make_scenario(const std::string& task_class, bool noisy);

// All scenarios of one flavor, in task-class order.
std::vector<ScenarioSpec> make_all_scenarios(bool noisy);

}  // namespace coa

#endif
