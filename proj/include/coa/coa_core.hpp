#ifndef COA_COA_CORE_HPP
#define COA_COA_CORE_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "coa/action_lang.hpp"
#include "coa/scene_text.hpp"
#include "coa/scenario.hpp"
#include "coa/world.hpp"

namespace coa {

// ---------------------------------------------------------------------------
// Static catalog: what the reasoner knows about the scenario up front.
// Region geometry and object identities are task knowledge; object
// locations are not (they come from observation and belief).

struct EntityInfo {
    std::string id;
    std::string category;
    AffordanceVector affordance;
    double weight_kg = 0.5;
    double footprint_m = 0.1;
};

struct Catalog {
    std::vector<EntityInfo> entities;
    std::vector<Region> regions;  // open flag = initial scenario state
    std::vector<JointDescriptor> joints;
    double reach_m = 0.8;
    SensingConfig sensing;

    static Catalog from_scenario(const ScenarioSpec& s);
    IdCatalog ids() const;
    const EntityInfo* find_entity(const std::string& id) const;
    const Region* find_region(const std::string& id) const;
};

// ---------------------------------------------------------------------------
// Region co-occurrence priors: substitute for the visual-semantic
// similarity backing the softmax spatial prior.

struct PriorTable {
    std::map<std::pair<std::string, std::string>, double> rows;  // (object cat, region cat) -> score
    double floor = 0.1;

    double score(const std::string& object_category, const std::string& region_category) const;
    static PriorTable from_csv_file(const std::string& path);
    static PriorTable builtin_defaults();
};

// ---------------------------------------------------------------------------
// Reasoning states and score traces.

struct AffordanceState {
    struct EntityEntry {
        std::string entity;
        // Action types whose gates pass, with the soft gate product as score.
        std::vector<std::pair<ActionType, double>> feasible;
    };
    std::vector<EntityEntry> entries;
};

struct SpatialState {
    std::vector<std::pair<std::string, double>> weights;  // region id -> w_k, sums to 1
    std::string target;                                   // entity or region id the weights are about
};

struct BodyState {
    std::vector<std::pair<ActionType, double>> feasibility;  // generic per-primitive psi
};

struct ReasoningState {
    int index = 0;  // position in R = {R_1..R_N}
    std::variant<AffordanceState, SpatialState, BodyState> state;
};

struct ScoreBreakdown {
    Action action;
    double aff = 1.0;
    double spatial = 0.0;
    double body = 1.0;
    double combined = 0.0;
};

struct ChainResult {
    std::vector<ReasoningState> reasoning;
    Plan plan;
    std::vector<ScoreBreakdown> per_step;
    std::string backend;
    bool horizon_exceeded = false;
    // Region each step is aimed at (empty when none); parallel to plan.
    std::vector<std::string> step_targets;

    std::string to_json() const;
};

// ---------------------------------------------------------------------------
// Decoder configuration.

enum class DecodeMode { Greedy, Exhaustive };

struct DecodeConfig {
    double lambda_aff = 1.0;
    double lambda_sp = 1.0;
    double lambda_body = 1.0;
    double epsilon = 1e-9;        // floor inside the log pooling
    double region_floor = 0.01;   // Phi value for non-targeted regions
    double collapse_floor = 1e-3; // residual weight after an observation collapse
    double decay = 0.2;           // failed-search decay delta
    int horizon = 30;
    DecodeMode mode = DecodeMode::Greedy;
    // Uniform scale knobs for the proportionality-invariance property.
    double phi_scale = 1.0;
    double region_scale = 1.0;
    double psi_scale = 1.0;
    double move_step_max = 2.0;    // meters per MOVE candidate
    double approach_offset = 0.45; // stand-off distance from a region center
    std::size_t exhaustive_guard = 1000000;

    static DecodeConfig from_json_text(const std::string& text);
    static DecodeConfig from_file(const std::string& path);
    std::string to_json_text() const;
};

// ---------------------------------------------------------------------------
// Scoring primitives.

// Numerically stable softmax; positive weights summing to 1.
std::vector<double> softmax(const std::vector<double>& scores);

// Gate product phi: compatibility of an action with an object's affordance
// vector. Logistic gates with steepness k=10; actions without gates score 1.
double phi(const Action& action, const AffordanceVector& a);

// Per-entity feasible-action sets from hard gate thresholds, scored with
// the soft gate product.
AffordanceState affordance_analyze(const std::vector<EntityInfo>& entities);

// Softmax prior over candidate regions for a target description.
// Throws EmptyRegions when regions is empty.
std::vector<std::pair<std::string, double>> spatial_prior(const std::vector<Region>& regions,
                                                          const std::string& target_text,
                                                          const PriorTable& prior);

// Fuse observation and search history into the spatial weights: collapse
// onto the observed region when the target is visible; decay regions whose
// search already failed.
SpatialState spatial_update(const std::string& target,
                            const std::optional<std::string>& observed_region,
                            const std::vector<std::pair<std::string, double>>& priors,
                            const std::vector<std::string>& failed_regions,
                            double decay, double collapse_floor);

// Region compatibility indicator: 1 when the action is aimed at the
// region, region_floor otherwise.
double region_compat(const std::string& action_target_region, const std::string& region_id,
                     double region_floor);

// Sum_k w_k * Phi_j(r_k) for an action aimed at `action_target_region`
// (empty = aimed at no region).
double spatial_score(const std::string& action_target_region,
                     const std::vector<std::pair<std::string, double>>& weights, double region_floor);

// Alignment of an action with the embodiment: sum over role-matching
// joints of range availability times the torque gate. Actions with no role
// demand score 1. Throws MissingRole when a demanded role is absent.
double body_feasibility(const Action& action, const std::vector<JointDescriptor>& joints,
                        const EntityInfo* entity);

// ---------------------------------------------------------------------------
// Decoder input and belief state.

struct DecodeInput {
    Catalog catalog;
    GoalPredicate goal;
    Observation obs;
    PriorTable priors;
    TokenSeq instruction_tokens;
    TokenSeq scene_tokens;
    // Episode memory maintained by the harness across replans.
    std::map<std::string, std::string> known_locations;  // entity -> region
    std::set<std::string> known_open;                    // containers seen/made open
    std::set<std::string> localized;                     // entities already FINDed
    // Chronological (entity, region) pairs for searches that came up empty.
    std::vector<std::pair<std::string, std::string>> failed_searches;
    int ordered_achieved = 0;                            // achieved prefix of goal.ordered
};

// Symbolic belief the decoder simulates plans against.
struct BeliefState {
    Vec2 robot_pos;
    double heading = 0.0;
    int height = 0;
    std::optional<std::string> left_hand, right_hand;
    std::map<std::string, std::string> entity_region;  // believed region; absent = unknown
    std::map<std::string, Hand> held;
    std::set<std::string> open_containers;
    std::set<std::string> localized;
    std::set<std::string> carried;
    std::optional<std::string> find_anchor;
    int ordered_achieved = 0;
};

struct Candidate {
    Action action;
    std::string target_region;  // region the action is aimed at; may be empty
};

BeliefState belief_init(const DecodeInput& input);
bool belief_goal_satisfied(const BeliefState& b, const DecodeInput& input);
// Current spatial weights given the pending goal atom and search history.
SpatialState belief_spatial(const BeliefState& b, const DecodeInput& input, const DecodeConfig& cfg);
// Symbolically valid, belief-progressing instantiations of the library.
std::vector<Candidate> decode_candidates(const BeliefState& b, const DecodeInput& input,
                                         const DecodeConfig& cfg);
ScoreBreakdown score_candidate(const Candidate& c, const BeliefState& b, const SpatialState& spatial,
                               const DecodeInput& input, const DecodeConfig& cfg);
void belief_apply(BeliefState& b, const Candidate& c, const DecodeInput& input,
                  const DecodeConfig& cfg);

// ---------------------------------------------------------------------------
// Factorized decoding: reasoning states first, then step-by-step action
// selection. Greedy picks the per-step argmax (ties broken on canonical
// action text); exhaustive enumerates all plans up to the horizon and
// maximizes total score. Output always passes validate_plan.
ChainResult decode_chain(const DecodeInput& input, const DecodeConfig& cfg);

// Re-decode the suffix after `executed_prefix` steps, keeping the executed
// prefix immutable and refreshing the spatial state from the new input.
ChainResult replan(const ChainResult& prev, int executed_prefix, const DecodeInput& input,
                   const DecodeConfig& cfg);

}  // namespace coa

#endif
