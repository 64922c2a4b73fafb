#ifndef COA_SCENARIO_HPP
#define COA_SCENARIO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coa/action_lang.hpp"
#include "coa/geom.hpp"

namespace coa {

struct AffordanceVector {
    double size = 0.5;
    double weight = 0.5;
    double rigidity = 0.5;
    double movability = 0.5;
    double actionability = 0.5;
};

enum class JointRole { Reach, Grasp, Locomotion, Posture };

const char* joint_role_name(JointRole r);

struct JointDescriptor {
    std::string id;
    double range_min = 0.0;
    double range_max = 0.0;
    double torque_limit = 1.0;  // proxy: max liftable kg for arm-role joints
    JointRole role = JointRole::Reach;
};

struct Region {
    std::string id;
    std::string category;
    Vec2 center;
    Vec2 extent;  // half-widths
    bool container = false;
    bool open = false;               // meaningful only if container
    bool openable_by_approach = false;

    bool contains(const Vec2& p) const {
        return std::abs(p.x - center.x) <= extent.x && std::abs(p.y - center.y) <= extent.y;
    }
};

struct Entity {
    std::string id;
    std::string category;
    std::string region;               // empty iff held
    std::optional<Hand> held_in;      // Left/Right/Both
    AffordanceVector affordance;
    double weight_kg = 0.5;
    double footprint_m = 0.1;

    bool is_held() const { return held_in.has_value(); }
};

struct RobotSpec {
    Vec2 pos;
    double heading = 0.0;
    int height_level = 0;  // in {-1, 0, +1}
    double reach_m = 0.8;
    std::vector<JointDescriptor> joints;  // empty -> default embodiment
};

std::vector<JointDescriptor> default_joints();

// Goal predicate: conjunction of atoms plus an optional ordered sequence
// checked against the step trace.
struct GoalAtom {
    enum class Type { In, Held, RobotNear, RobotFacing };
    Type type = Type::In;
    std::string object;   // In/Held
    std::string region;   // In/RobotNear/RobotFacing; Put destination
    std::optional<Hand> hand;  // Held; nullopt = any hand
    double radius = 0.8;       // RobotNear
    double tolerance = 0.2;    // RobotFacing, radians
};

struct GoalPredicate {
    std::vector<GoalAtom> atoms;    // unordered conjunction
    std::vector<GoalAtom> ordered;  // must become true in this order

    bool empty() const { return atoms.empty() && ordered.empty(); }
};

struct NoiseConfig {
    bool enabled = false;
    // Per-primitive success probability; missing entries succeed always.
    std::vector<std::pair<ActionType, double>> overrides;

    static NoiseConfig table_defaults();  // per-primitive field rates
    static NoiseConfig none();
    double success_prob(ActionType t) const;
};

// Sensing geometry; the defaults make occlusion tasks nontrivial at desk
// scale.
struct SensingConfig {
    double fov_deg = 120.0;
    double fov_range_m = 4.0;
    double open_radius_m = 1.0;  // approach distance that opens a container
};

struct ScenarioSpec {
    std::string id;
    std::string instruction;
    std::string task_class;
    std::vector<Region> regions;
    std::vector<Entity> objects;
    RobotSpec robot;
    GoalPredicate goal;
    NoiseConfig noise;
    SensingConfig sensing;
    int step_budget = 20;
    double position_jitter = 0.0;  // per-seed uniform jitter on region centers

    // Throws SchemaError on duplicate ids, dangling references or bad values.
    void validate() const;

    static ScenarioSpec from_json_text(const std::string& text);
    static ScenarioSpec from_file(const std::string& path);
    std::string to_json_text() const;
};

extern const std::vector<std::string> kTaskClasses;  // the 15 task classes

}  // namespace coa

#endif
