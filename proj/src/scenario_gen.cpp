#include "coa/scenario_gen.hpp"

#include "coa/errors.hpp"

namespace coa {

namespace {

Region furniture(const std::string& id, const std::string& category, Vec2 center, Vec2 extent) {
    Region r;
    r.id = id;
    r.category = category;
    r.center = center;
    r.extent = extent;
    return r;
}

Region closed_box(const std::string& id, const std::string& category, Vec2 center, Vec2 extent) {
    Region r = furniture(id, category, center, extent);
    r.container = true;
    r.open = false;
    r.openable_by_approach = true;
    return r;
}

Entity item(const std::string& id, const std::string& category, const std::string& region) {
    Entity e;
    e.id = id;
    e.category = category;
    e.region = region;
    e.affordance = {0.3, 0.3, 0.7, 0.9, 0.9};
    e.weight_kg = 0.4;
    e.footprint_m = 0.1;
    return e;
}

GoalAtom atom_in(const std::string& obj, const std::string& region) {
    GoalAtom a;
    a.type = GoalAtom::Type::In;
    a.object = obj;
    a.region = region;
    return a;
}

GoalAtom atom_held(const std::string& obj) {
    GoalAtom a;
    a.type = GoalAtom::Type::Held;
    a.object = obj;
    return a;
}

GoalAtom atom_near(const std::string& region, double radius = 0.8) {
    GoalAtom a;
    a.type = GoalAtom::Type::RobotNear;
    a.region = region;
    a.radius = radius;
    return a;
}

GoalAtom atom_facing(const std::string& region, double tolerance = 0.2) {
    GoalAtom a;
    a.type = GoalAtom::Type::RobotFacing;
    a.region = region;
    a.tolerance = tolerance;
    return a;
}

// Shared apartment layout; every scenario takes the subset it names.
Region kitchen_counter() { return furniture("kitchen_counter", "kitchen_counter", {2.5, 0.5}, {0.5, 0.5}); }
Region white_table() { return furniture("white_table", "white_table", {2.5, -1.5}, {0.5, 0.5}); }
Region dining_table() { return furniture("dining_table", "dining_table", {5.5, 0.0}, {0.6, 0.6}); }
Region shelf() { return furniture("shelf", "shelf", {1.5, 2.5}, {0.4, 0.4}); }
Region sofa() { return furniture("sofa", "sofa", {-2.5, 0.0}, {0.6, 0.6}); }
Region bed() { return furniture("bed", "bed", {-2.5, -2.5}, {0.7, 0.7}); }
Region box1() { return closed_box("box_1", "box", {3.0, 1.5}, {0.35, 0.35}); }
Region box2() { return closed_box("box_2", "box", {3.0, -1.5}, {0.35, 0.35}); }
Region box3() { return closed_box("box_3", "box", {5.0, 0.0}, {0.35, 0.35}); }
Region fridge() { return closed_box("refrigerator", "refrigerator", {5.5, -2.5}, {0.45, 0.45}); }

ScenarioSpec base(const std::string& task_class, const std::string& instruction, int budget) {
    ScenarioSpec s;
    s.id = task_class;
    s.task_class = task_class;
    s.instruction = instruction;
    s.robot.pos = {0.0, 0.0};
    s.robot.heading = 0.0;
    s.robot.joints = default_joints();
    s.step_budget = budget;
    return s;
}

ScenarioSpec build(const std::string& task_class) {
    if (task_class == "object_grasping") {
        ScenarioSpec s = base(task_class, "Pick up the cup from the kitchen counter.", 20);
        s.robot.pos = {1.8, 0.5};
        s.regions = {kitchen_counter(), white_table()};
        s.objects = {item("cup_1", "cup", "kitchen_counter")};
        s.goal.atoms = {atom_held("cup_1")};
        return s;
    }
    if (task_class == "object_relocation") {
        ScenarioSpec s = base(task_class, "Move the cup from the kitchen counter to the white table.", 20);
        s.regions = {kitchen_counter(), white_table()};
        s.objects = {item("cup_1", "cup", "kitchen_counter")};
        s.goal.atoms = {atom_in("cup_1", "white_table")};
        return s;
    }
    if (task_class == "spatial_placement") {
        ScenarioSpec s = base(task_class, "Place the plate on the kitchen counter.", 30);
        s.regions = {kitchen_counter(), white_table(), dining_table()};
        s.objects = {item("plate_1", "plate", "dining_table")};
        s.goal.atoms = {atom_in("plate_1", "kitchen_counter")};
        return s;
    }
    if (task_class == "sequential_manipulation") {
        ScenarioSpec s = base(task_class,
                              "Move the cup to the white table, then move the plate to the white table.", 30);
        s.regions = {kitchen_counter(), white_table()};
        s.objects = {item("cup_1", "cup", "kitchen_counter"), item("plate_1", "plate", "kitchen_counter")};
        s.goal.ordered = {atom_in("cup_1", "white_table"), atom_in("plate_1", "white_table")};
        return s;
    }
    if (task_class == "rearrangement") {
        ScenarioSpec s = base(task_class,
                              "Swap the toy and the ball between the white table and the kitchen counter.", 30);
        s.regions = {kitchen_counter(), white_table()};
        s.objects = {item("toy_1", "toy", "white_table"), item("ball_1", "ball", "kitchen_counter")};
        s.goal.ordered = {atom_in("toy_1", "kitchen_counter"), atom_in("ball_1", "white_table")};
        return s;
    }
    if (task_class == "target_approach") {
        ScenarioSpec s = base(task_class, "Walk over to the dining table.", 20);
        s.regions = {kitchen_counter(), dining_table()};
        s.goal.atoms = {atom_near("dining_table")};
        return s;
    }
    if (task_class == "pose_adjustment") {
        ScenarioSpec s = base(task_class, "Turn to face the sofa.", 20);
        s.regions = {kitchen_counter(), sofa()};
        s.goal.atoms = {atom_facing("sofa")};
        return s;
    }
    if (task_class == "sequential_navigation") {
        ScenarioSpec s = base(task_class, "Go to the shelf, then continue to the dining table.", 30);
        s.regions = {shelf(), dining_table(), kitchen_counter()};
        s.goal.ordered = {atom_near("shelf"), atom_near("dining_table")};
        return s;
    }
    if (task_class == "navigation_under_occlusion") {
        ScenarioSpec s = base(task_class, "Find the ball hidden in one of the boxes and pick it up.", 40);
        s.regions = {kitchen_counter(), white_table(), box1(), box2(), box3()};
        s.objects = {item("ball_1", "ball", "box_3")};
        s.goal.atoms = {atom_held("ball_1")};
        return s;
    }
    if (task_class == "long_horizon_relocation") {
        ScenarioSpec s = base(task_class,
                              "Bring the cup to the dining table, the plate to the kitchen counter, "
                              "and the book to the white table.",
                              60);
        s.regions = {kitchen_counter(), white_table(), dining_table(), shelf()};
        s.objects = {item("cup_1", "cup", "kitchen_counter"), item("plate_1", "plate", "dining_table"),
                     item("book_1", "book", "shelf")};
        s.goal.ordered = {atom_in("cup_1", "dining_table"), atom_in("plate_1", "kitchen_counter"),
                          atom_in("book_1", "white_table")};
        return s;
    }
    if (task_class == "mobile_pick") {
        ScenarioSpec s = base(task_class, "Walk to the dining table and pick up the bottle.", 20);
        s.regions = {kitchen_counter(), dining_table()};
        s.objects = {item("bottle_1", "bottle", "dining_table")};
        s.goal.atoms = {atom_held("bottle_1")};
        return s;
    }
    if (task_class == "mobile_place") {
        ScenarioSpec s = base(task_class, "Carry the toy you are holding over to the bed.", 20);
        s.regions = {kitchen_counter(), bed()};
        Entity toy = item("toy_1", "toy", "");
        toy.region.clear();
        toy.held_in = Hand::Right;
        s.objects = {toy};
        s.goal.atoms = {atom_in("toy_1", "bed")};
        return s;
    }
    if (task_class == "sequential_locoman") {
        ScenarioSpec s = base(task_class, "Put the cup on the dining table, then go to the sofa.", 40);
        s.regions = {kitchen_counter(), dining_table(), sofa()};
        s.objects = {item("cup_1", "cup", "kitchen_counter")};
        s.goal.ordered = {atom_in("cup_1", "dining_table"), atom_near("sofa")};
        return s;
    }
    if (task_class == "occlusion_aware_locoman") {
        ScenarioSpec s = base(task_class,
                              "Get the bottle out of the refrigerator and put it on the dining table.", 40);
        s.regions = {kitchen_counter(), dining_table(), fridge()};
        s.objects = {item("bottle_1", "bottle", "refrigerator")};
        s.goal.atoms = {atom_in("bottle_1", "dining_table")};
        return s;
    }
    if (task_class == "long_horizon_locoman") {
        ScenarioSpec s = base(task_class,
                              "Put the bottle from the refrigerator on the kitchen counter, move the "
                              "cup to the shelf, then wait by the sofa.",
                              60);
        s.regions = {kitchen_counter(), white_table(), shelf(), sofa(), fridge()};
        s.objects = {item("bottle_1", "bottle", "refrigerator"), item("cup_1", "cup", "white_table")};
        s.goal.ordered = {atom_in("bottle_1", "kitchen_counter"), atom_in("cup_1", "shelf"),
                          atom_near("sofa")};
        return s;
    }
    throw SchemaError("unknown task class: " + task_class);
}

}  // namespace

ScenarioSpec make_scenario(const std::string& task_class, bool noisy) {
    ScenarioSpec s = build(task_class);
    if (noisy) {
        s.id = task_class + "_noisy";
        s.noise = NoiseConfig::table_defaults();
        s.position_jitter = 0.05;
    } else {
        s.noise = NoiseConfig::none();
        s.position_jitter = 0.0;
    }
    s.validate();
    return s;
}

std::vector<ScenarioSpec> make_all_scenarios(bool noisy) {
    std::vector<ScenarioSpec> out;
    for (const auto& c : kTaskClasses) out.push_back(make_scenario(c, noisy));
    return out;
}

}  // namespace coa
