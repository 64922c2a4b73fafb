#include "coa/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "coa/errors.hpp"
#include "json.hpp"

namespace coa {

using nlohmann::json;

const std::vector<std::string> kTaskClasses = {
    "object_grasping",
    "object_relocation",
    "spatial_placement",
    "sequential_manipulation",
    "rearrangement",
    "target_approach",
    "pose_adjustment",
    "sequential_navigation",
    "navigation_under_occlusion",
    "long_horizon_relocation",
    "mobile_pick",
    "mobile_place",
    "sequential_locoman",
    "occlusion_aware_locoman",
    "long_horizon_locoman",
};

const char* joint_role_name(JointRole r) {
    switch (r) {
        case JointRole::Reach: return "reach";
        case JointRole::Grasp: return "grasp";
        case JointRole::Locomotion: return "locomotion";
        case JointRole::Posture: return "posture";
    }
    return "?";
}

std::vector<JointDescriptor> default_joints() {
    return {
        {"left_arm", -1.5, 1.5, 3.0, JointRole::Reach},
        {"right_arm", -1.5, 1.5, 3.0, JointRole::Reach},
        {"left_gripper", 0.0, 1.5, 3.0, JointRole::Grasp},
        {"right_gripper", 0.0, 1.5, 3.0, JointRole::Grasp},
        {"left_leg", -0.75, 0.75, 60.0, JointRole::Locomotion},
        {"right_leg", -0.75, 0.75, 60.0, JointRole::Locomotion},
        {"torso", -0.4, 0.4, 30.0, JointRole::Posture},
    };
}

NoiseConfig NoiseConfig::none() { return {}; }

NoiseConfig NoiseConfig::table_defaults() {
    NoiseConfig n;
    n.enabled = true;
    n.overrides = {
        {ActionType::Find, 0.971},   {ActionType::Move, 0.966},   {ActionType::Hold, 0.880},
        {ActionType::Release, 0.966}, {ActionType::Grasp, 0.966},  {ActionType::Lift, 1.0},
        {ActionType::Raise, 1.0},     {ActionType::Rearrange, 0.733}, {ActionType::Put, 0.949},
    };
    return n;
}

double NoiseConfig::success_prob(ActionType t) const {
    if (!enabled) return 1.0;
    for (const auto& [type, p] : overrides)
        if (type == t) return p;
    return 1.0;
}

namespace {

JointRole role_from_string(const std::string& s) {
    if (s == "reach") return JointRole::Reach;
    if (s == "grasp") return JointRole::Grasp;
    if (s == "locomotion") return JointRole::Locomotion;
    if (s == "posture") return JointRole::Posture;
    throw SchemaError("unknown joint role: " + s);
}

Hand hand_from_string(const std::string& s) {
    if (s == "left") return Hand::Left;
    if (s == "right") return Hand::Right;
    if (s == "both") return Hand::Both;
    throw SchemaError("unknown hand: " + s);
}

ActionType action_type_from_name(const std::string& s) {
    static const std::vector<std::pair<std::string, ActionType>> names = {
        {"FIND", ActionType::Find}, {"MOVE", ActionType::Move}, {"ROTATE", ActionType::Rotate},
        {"STOP", ActionType::Stop}, {"INCREASE_HEIGHT", ActionType::IncreaseHeight},
        {"DECREASE_HEIGHT", ActionType::DecreaseHeight}, {"HOLD", ActionType::Hold},
        {"RELEASE", ActionType::Release}, {"GRASP", ActionType::Grasp}, {"LIFT", ActionType::Lift},
        {"RAISE", ActionType::Raise}, {"REARRANGE", ActionType::Rearrange}, {"PUT", ActionType::Put},
    };
    for (const auto& [n, t] : names)
        if (n == s) return t;
    throw SchemaError("unknown action name in noise overrides: " + s);
}

GoalAtom atom_from_json(const json& j) {
    GoalAtom a;
    std::string type = j.at("type").get<std::string>();
    if (type == "in") {
        a.type = GoalAtom::Type::In;
        a.object = j.at("object").get<std::string>();
        a.region = j.at("region").get<std::string>();
    } else if (type == "held") {
        a.type = GoalAtom::Type::Held;
        a.object = j.at("object").get<std::string>();
        if (j.contains("hand") && j["hand"].get<std::string>() != "any")
            a.hand = hand_from_string(j["hand"].get<std::string>());
    } else if (type == "robot_near") {
        a.type = GoalAtom::Type::RobotNear;
        a.region = j.at("region").get<std::string>();
        a.radius = j.value("radius", 0.8);
    } else if (type == "robot_facing") {
        a.type = GoalAtom::Type::RobotFacing;
        a.region = j.at("region").get<std::string>();
        a.tolerance = j.value("tolerance", 0.2);
    } else {
        throw SchemaError("unknown goal atom type: " + type);
    }
    return a;
}

json atom_to_json(const GoalAtom& a) {
    json j;
    switch (a.type) {
        case GoalAtom::Type::In:
            j = {{"type", "in"}, {"object", a.object}, {"region", a.region}};
            break;
        case GoalAtom::Type::Held:
            j = {{"type", "held"}, {"object", a.object}, {"hand", a.hand ? hand_name(*a.hand) : "any"}};
            break;
        case GoalAtom::Type::RobotNear:
            j = {{"type", "robot_near"}, {"region", a.region}, {"radius", a.radius}};
            break;
        case GoalAtom::Type::RobotFacing:
            j = {{"type", "robot_facing"}, {"region", a.region}, {"tolerance", a.tolerance}};
            break;
    }
    return j;
}

}  // namespace

ScenarioSpec ScenarioSpec::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("scenario JSON parse error: ") + e.what());
    }
    try {
        ScenarioSpec s;
        s.id = j.value("id", "scenario");
        s.instruction = j.value("instruction", "");
        s.task_class = j.value("task_class", "");
        for (const auto& rj : j.value("regions", json::array())) {
            Region r;
            r.id = rj.at("id").get<std::string>();
            r.category = rj.value("category", r.id);
            r.center = {rj.at("center").at(0).get<double>(), rj.at("center").at(1).get<double>()};
            r.extent = {rj.at("extent").at(0).get<double>(), rj.at("extent").at(1).get<double>()};
            r.container = rj.value("container", false);
            r.open = rj.value("open", !r.container);
            r.openable_by_approach = rj.value("openable_by_approach", false);
            s.regions.push_back(r);
        }
        for (const auto& oj : j.value("objects", json::array())) {
            Entity e;
            e.id = oj.at("id").get<std::string>();
            e.category = oj.value("category", e.id);
            const auto& loc = oj.at("location");
            if (loc.is_string()) {
                e.region = loc.get<std::string>();
            } else {
                e.held_in = hand_from_string(loc.at("held").get<std::string>());
            }
            if (oj.contains("affordance")) {
                const auto& aj = oj["affordance"];
                e.affordance.size = aj.value("size", 0.5);
                e.affordance.weight = aj.value("weight", 0.5);
                e.affordance.rigidity = aj.value("rigidity", 0.5);
                e.affordance.movability = aj.value("movability", 0.5);
                e.affordance.actionability = aj.value("actionability", 0.5);
            }
            e.weight_kg = oj.value("weight_kg", 0.5);
            e.footprint_m = oj.value("footprint_m", 0.1);
            s.objects.push_back(e);
        }
        if (j.contains("robot")) {
            const auto& rj = j["robot"];
            if (rj.contains("pose")) {
                s.robot.pos = {rj["pose"].at(0).get<double>(), rj["pose"].at(1).get<double>()};
                s.robot.heading = rj["pose"].at(2).get<double>();
            }
            s.robot.height_level = rj.value("height_level", 0);
            s.robot.reach_m = rj.value("reach_m", 0.8);
            for (const auto& jj : rj.value("joints", json::array())) {
                JointDescriptor d;
                d.id = jj.at("id").get<std::string>();
                d.range_min = jj.at("range").at(0).get<double>();
                d.range_max = jj.at("range").at(1).get<double>();
                d.torque_limit = jj.value("torque_limit", 1.0);
                d.role = role_from_string(jj.at("role").get<std::string>());
                s.robot.joints.push_back(d);
            }
        }
        if (s.robot.joints.empty()) s.robot.joints = default_joints();
        if (j.contains("goal")) {
            for (const auto& aj : j["goal"].value("atoms", json::array()))
                s.goal.atoms.push_back(atom_from_json(aj));
            for (const auto& aj : j["goal"].value("ordered", json::array()))
                s.goal.ordered.push_back(atom_from_json(aj));
        }
        if (j.contains("noise")) {
            const auto& nj = j["noise"];
            s.noise.enabled = nj.value("enabled", false);
            if (s.noise.enabled) s.noise = NoiseConfig::table_defaults();
            s.noise.enabled = nj.value("enabled", false);
            if (nj.contains("overrides")) {
                for (auto it = nj["overrides"].begin(); it != nj["overrides"].end(); ++it) {
                    ActionType t = action_type_from_name(it.key());
                    bool found = false;
                    for (auto& [type, p] : s.noise.overrides)
                        if (type == t) { p = it.value().get<double>(); found = true; }
                    if (!found) s.noise.overrides.emplace_back(t, it.value().get<double>());
                }
            }
        }
        if (j.contains("sensing")) {
            const auto& sj = j["sensing"];
            s.sensing.fov_deg = sj.value("fov_deg", 120.0);
            s.sensing.fov_range_m = sj.value("fov_range_m", 4.0);
            s.sensing.open_radius_m = sj.value("open_radius_m", 1.0);
        }
        s.step_budget = j.value("step_budget", 20);
        s.position_jitter = j.value("position_jitter", 0.0);
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("scenario schema error: ") + e.what());
    }
}

ScenarioSpec ScenarioSpec::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string ScenarioSpec::to_json_text() const {
    json j;
    j["id"] = id;
    j["instruction"] = instruction;
    j["task_class"] = task_class;
    j["regions"] = json::array();
    for (const auto& r : regions) {
        json rj = {{"id", r.id},
                   {"category", r.category},
                   {"center", {r.center.x, r.center.y}},
                   {"extent", {r.extent.x, r.extent.y}}};
        if (r.container) {
            rj["container"] = true;
            rj["open"] = r.open;
            rj["openable_by_approach"] = r.openable_by_approach;
        }
        j["regions"].push_back(rj);
    }
    j["objects"] = json::array();
    for (const auto& e : objects) {
        json oj = {{"id", e.id}, {"category", e.category}};
        if (e.held_in) oj["location"] = {{"held", hand_name(*e.held_in)}};
        else oj["location"] = e.region;
        oj["affordance"] = {{"size", e.affordance.size},
                            {"weight", e.affordance.weight},
                            {"rigidity", e.affordance.rigidity},
                            {"movability", e.affordance.movability},
                            {"actionability", e.affordance.actionability}};
        oj["weight_kg"] = e.weight_kg;
        oj["footprint_m"] = e.footprint_m;
        j["objects"].push_back(oj);
    }
    json joints = json::array();
    for (const auto& d : robot.joints) {
        joints.push_back({{"id", d.id},
                          {"range", {d.range_min, d.range_max}},
                          {"torque_limit", d.torque_limit},
                          {"role", joint_role_name(d.role)}});
    }
    j["robot"] = {{"pose", {robot.pos.x, robot.pos.y, robot.heading}},
                  {"height_level", robot.height_level},
                  {"reach_m", robot.reach_m},
                  {"joints", joints}};
    json atoms = json::array(), ordered = json::array();
    for (const auto& a : goal.atoms) atoms.push_back(atom_to_json(a));
    for (const auto& a : goal.ordered) ordered.push_back(atom_to_json(a));
    j["goal"] = {{"atoms", atoms}, {"ordered", ordered}};
    json overrides = json::object();
    for (const auto& [t, p] : noise.overrides) overrides[action_name(t)] = p;
    j["noise"] = {{"enabled", noise.enabled}, {"overrides", overrides}};
    j["sensing"] = {{"fov_deg", sensing.fov_deg},
                    {"fov_range_m", sensing.fov_range_m},
                    {"open_radius_m", sensing.open_radius_m}};
    j["step_budget"] = step_budget;
    j["position_jitter"] = position_jitter;
    return j.dump(2);
}

void ScenarioSpec::validate() const {
    std::set<std::string> ids;
    for (const auto& r : regions) {
        if (!ids.insert(r.id).second) throw SchemaError("duplicate id: " + r.id);
        if (r.extent.x <= 0 || r.extent.y <= 0) throw SchemaError("non-positive extent for region " + r.id);
    }
    for (const auto& e : objects) {
        if (!ids.insert(e.id).second) throw SchemaError("duplicate id: " + e.id);
        if (!e.is_held()) {
            bool found = false;
            for (const auto& r : regions)
                if (r.id == e.region) found = true;
            if (!found) throw SchemaError("object " + e.id + " references unknown region " + e.region);
        }
        auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
        const auto& a = e.affordance;
        if (!in01(a.size) || !in01(a.weight) || !in01(a.rigidity) || !in01(a.movability) || !in01(a.actionability))
            throw SchemaError("affordance components of " + e.id + " must be in [0,1]");
        if (e.weight_kg < 0) throw SchemaError("negative weight for " + e.id);
        if (e.footprint_m <= 0) throw SchemaError("non-positive footprint for " + e.id);
    }
    // Both hands cannot start holding different objects via 'both'.
    int left = 0, right = 0;
    for (const auto& e : objects) {
        if (!e.held_in) continue;
        if (*e.held_in == Hand::Left || *e.held_in == Hand::Both) ++left;
        if (*e.held_in == Hand::Right || *e.held_in == Hand::Both) ++right;
    }
    if (left > 1 || right > 1) throw SchemaError("more than one object held per hand");
    if (robot.height_level < -1 || robot.height_level > 1) throw SchemaError("height_level out of range");
    if (robot.reach_m <= 0) throw SchemaError("reach_m must be positive");
    for (const auto& d : robot.joints) {
        if (d.range_min >= d.range_max) throw SchemaError("bad joint range for " + d.id);
        if (d.torque_limit <= 0) throw SchemaError("bad torque limit for " + d.id);
    }
    auto check_atom = [&](const GoalAtom& a) {
        auto has_region = [&](const std::string& id) {
            for (const auto& r : regions)
                if (r.id == id) return true;
            return false;
        };
        auto has_object = [&](const std::string& id) {
            for (const auto& e : objects)
                if (e.id == id) return true;
            return false;
        };
        if ((a.type == GoalAtom::Type::In || a.type == GoalAtom::Type::Held) && !has_object(a.object))
            throw SchemaError("goal references unknown object " + a.object);
        if (a.type != GoalAtom::Type::Held && !has_region(a.region))
            throw SchemaError("goal references unknown region " + a.region);
    };
    for (const auto& a : goal.atoms) check_atom(a);
    for (const auto& a : goal.ordered) check_atom(a);
    if (!task_class.empty()) {
        bool known = false;
        for (const auto& c : kTaskClasses)
            if (c == task_class) known = true;
        if (!known) throw SchemaError("unknown task_class: " + task_class);
    }
    if (step_budget <= 0) throw SchemaError("step_budget must be positive");
}

}  // namespace coa
