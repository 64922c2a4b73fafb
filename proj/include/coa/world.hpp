#ifndef COA_WORLD_HPP
#define COA_WORLD_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "coa/action_lang.hpp"
#include "coa/scenario.hpp"

namespace coa {

struct RobotState {
    Vec2 pos;
    double heading = 0.0;     // normalized to (-pi, pi]
    int height_level = 0;     // in {-1, 0, +1}
    std::optional<std::string> left_hand;
    std::optional<std::string> right_hand;
    std::vector<JointDescriptor> joints;
    double reach_m = 0.8;
};

struct Observation {
    std::vector<Entity> visible_entities;
    std::vector<Region> visible_regions;
    RobotState robot;
    std::uint64_t tick = 0;
};

enum class StepError {
    None,
    PreconditionFailed,
    OutOfBounds,
    HandsOccupied,
    NotHeld,
    NotVisible,
    NotReachable,
    ExecutionFault,  // stochastic failure injected by the noise model
};

const char* step_error_name(StepError e);

struct StepOutcome {
    Action action;
    bool ok = true;
    StepError error = StepError::None;
    std::string reason;
    std::uint64_t ticks = 0;  // duration charged for this primitive
};

// Tick cost per primitive, used only for tick accounting.
std::uint64_t primitive_duration_ticks(ActionType t);

struct WorldBounds {
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    bool contains(const Vec2& p) const {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }
};

// Ground-truth 2.5D household scene plus a primitive executor. One episode
// owns a World at a time; observation snapshots are immutable values.
class World {
  public:
    // Deterministic for a given (scenario, seed). The seed drives region
    // jitter and the primitive noise stream.
    static World spawn(const ScenarioSpec& scenario, std::uint64_t seed = 0);

    Observation observe() const;
    StepOutcome apply(const Action& action);

    const std::vector<Region>& regions() const { return regions_; }
    const std::vector<Entity>& entities() const { return entities_; }
    const RobotState& robot() const { return robot_; }
    std::uint64_t tick() const { return tick_; }
    std::uint64_t seed() const { return seed_; }
    const WorldBounds& bounds() const { return bounds_; }
    const SensingConfig& sensing() const { return sensing_; }

    const Region* find_region(const std::string& id) const;
    const Entity* find_entity(const std::string& id) const;
    // Position of an entity: its region's center, or the robot pose if held.
    Vec2 entity_position(const Entity& e) const;

    bool region_in_fov(const Region& r) const;
    bool entity_visible(const Entity& e) const;
    bool carried_at_chest(const std::string& entity_id) const { return carried_.count(entity_id) > 0; }

  private:
    StepOutcome do_apply(const Action& action);
    StepOutcome fail(const Action& a, StepError e, std::string reason) const;
    Region* region_mut(const std::string& id);
    Entity* entity_mut(const std::string& id);
    void maybe_open_by_approach();
    void check_invariants() const;

    std::vector<Region> regions_;
    std::vector<Entity> entities_;
    RobotState robot_;
    SensingConfig sensing_;
    NoiseConfig noise_;
    WorldBounds bounds_;
    std::uint64_t seed_ = 0;
    std::uint64_t tick_ = 0;
    std::mt19937_64 rng_;
    std::optional<std::string> find_anchor_;  // region of the last FIND target
    std::set<std::string> carried_;           // carried-at-chest entity ids
};

}  // namespace coa

#endif
