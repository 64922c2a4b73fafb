#include "coa/world.hpp"

#include <algorithm>
#include <cassert>

#include "coa/errors.hpp"

namespace coa {

const char* step_error_name(StepError e) {
    switch (e) {
        case StepError::None: return "None";
        case StepError::PreconditionFailed: return "PreconditionFailed";
        case StepError::OutOfBounds: return "OutOfBounds";
        case StepError::HandsOccupied: return "HandsOccupied";
        case StepError::NotHeld: return "NotHeld";
        case StepError::NotVisible: return "NotVisible";
        case StepError::NotReachable: return "NotReachable";
        case StepError::ExecutionFault: return "ExecutionFault";
    }
    return "?";
}

std::uint64_t primitive_duration_ticks(ActionType t) {
    // Rounded per-primitive execution times; ticks only, not wall time.
    switch (t) {
        case ActionType::Find: return 11;
        case ActionType::Move: return 25;
        case ActionType::Rotate: return 3;
        case ActionType::Stop: return 1;
        case ActionType::IncreaseHeight: return 2;
        case ActionType::DecreaseHeight: return 2;
        case ActionType::Hold: return 13;
        case ActionType::Release: return 1;
        case ActionType::Grasp: return 12;
        case ActionType::Lift: return 8;
        case ActionType::Raise: return 9;
        case ActionType::Rearrange: return 23;
        case ActionType::Put: return 12;
    }
    return 1;
}

World World::spawn(const ScenarioSpec& scenario, std::uint64_t seed) {
    scenario.validate();
    World w;
    w.regions_ = scenario.regions;
    w.entities_ = scenario.objects;
    w.robot_.pos = scenario.robot.pos;
    w.robot_.heading = wrap_angle(scenario.robot.heading);
    w.robot_.height_level = scenario.robot.height_level;
    w.robot_.reach_m = scenario.robot.reach_m;
    w.robot_.joints = scenario.robot.joints;
    w.sensing_ = scenario.sensing;
    w.noise_ = scenario.noise;
    w.seed_ = seed;
    w.rng_.seed(seed ^ 0x9e3779b97f4a7c15ULL);

    for (const auto& e : w.entities_) {
        if (!e.held_in) continue;
        if (*e.held_in == Hand::Left || *e.held_in == Hand::Both) w.robot_.left_hand = e.id;
        if (*e.held_in == Hand::Right || *e.held_in == Hand::Both) w.robot_.right_hand = e.id;
    }

    if (scenario.position_jitter > 0.0) {
        std::uniform_real_distribution<double> d(-scenario.position_jitter, scenario.position_jitter);
        for (auto& r : w.regions_) {
            r.center.x += d(w.rng_);
            r.center.y += d(w.rng_);
        }
    }

    // World bounds: bounding box of regions and robot, with margin.
    const double margin = 2.0;
    WorldBounds b{w.robot_.pos.x, w.robot_.pos.x, w.robot_.pos.y, w.robot_.pos.y};
    for (const auto& r : w.regions_) {
        b.xmin = std::min(b.xmin, r.center.x - r.extent.x);
        b.xmax = std::max(b.xmax, r.center.x + r.extent.x);
        b.ymin = std::min(b.ymin, r.center.y - r.extent.y);
        b.ymax = std::max(b.ymax, r.center.y + r.extent.y);
    }
    b.xmin -= margin;
    b.xmax += margin;
    b.ymin -= margin;
    b.ymax += margin;
    w.bounds_ = b;
    w.check_invariants();
    return w;
}

const Region* World::find_region(const std::string& id) const {
    for (const auto& r : regions_)
        if (r.id == id) return &r;
    return nullptr;
}

const Entity* World::find_entity(const std::string& id) const {
    for (const auto& e : entities_)
        if (e.id == id) return &e;
    return nullptr;
}

Region* World::region_mut(const std::string& id) {
    for (auto& r : regions_)
        if (r.id == id) return &r;
    return nullptr;
}

Entity* World::entity_mut(const std::string& id) {
    for (auto& e : entities_)
        if (e.id == id) return &e;
    return nullptr;
}

Vec2 World::entity_position(const Entity& e) const {
    if (e.is_held()) return robot_.pos;
    const Region* r = find_region(e.region);
    return r ? r->center : Vec2{};
}

bool World::region_in_fov(const Region& r) const {
    if (r.contains(robot_.pos)) return true;
    Vec2 d = r.center - robot_.pos;
    double dist = d.norm();
    if (dist > sensing_.fov_range_m) return false;
    if (dist < 1e-9) return true;
    double bearing = std::atan2(d.y, d.x);
    double off = std::abs(wrap_angle(bearing - robot_.heading));
    return off <= (sensing_.fov_deg * M_PI / 180.0) / 2.0;
}

bool World::entity_visible(const Entity& e) const {
    if (e.is_held()) return true;
    const Region* r = find_region(e.region);
    if (!r) return false;
    if (r->container && !r->open) return false;
    return region_in_fov(*r);
}

Observation World::observe() const {
    Observation obs;
    obs.robot = robot_;
    obs.tick = tick_;
    for (const auto& r : regions_)
        if (region_in_fov(r)) obs.visible_regions.push_back(r);
    for (const auto& e : entities_)
        if (entity_visible(e)) obs.visible_entities.push_back(e);
    return obs;
}

StepOutcome World::fail(const Action& a, StepError e, std::string reason) const {
    StepOutcome out;
    out.action = a;
    out.ok = false;
    out.error = e;
    out.reason = std::move(reason);
    out.ticks = primitive_duration_ticks(a.type);
    return out;
}

StepOutcome World::apply(const Action& action) {
    StepOutcome out = do_apply(action);
    tick_ += out.ticks;
    check_invariants();
    return out;
}

StepOutcome World::do_apply(const Action& a) {
    StepOutcome ok_out;
    ok_out.action = a;
    ok_out.ticks = primitive_duration_ticks(a.type);

    auto held_hand = [&](const std::string& obj) -> std::optional<Hand> {
        const Entity* e = find_entity(obj);
        return e ? e->held_in : std::nullopt;
    };
    auto within_reach = [&](const Vec2& p) { return (p - robot_.pos).norm() <= robot_.reach_m; };

    // Precondition and transition per primitive; the stochastic fault draw
    // happens only after preconditions pass.
    auto draw_fault = [&]() {
        double p = noise_.success_prob(a.type);
        if (p >= 1.0) return false;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        return u(rng_) > p;
    };

    switch (a.type) {
        case ActionType::Find: {
            const Entity* e = find_entity(a.object);
            const Region* r = e ? nullptr : find_region(a.object);
            if (e) {
                if (!entity_visible(*e)) return fail(a, StepError::NotVisible, a.object + " is not visible");
                if (draw_fault()) return fail(a, StepError::ExecutionFault, "stochastic fault on FIND");
                find_anchor_ = e->is_held() ? std::optional<std::string>{} : std::optional<std::string>{e->region};
            } else if (r) {
                if (!region_in_fov(*r)) return fail(a, StepError::NotVisible, a.object + " is not visible");
                if (draw_fault()) return fail(a, StepError::ExecutionFault, "stochastic fault on FIND");
                find_anchor_ = r->id;
            } else {
                return fail(a, StepError::PreconditionFailed, "unknown identifier: " + a.object);
            }
            maybe_open_by_approach();
            return ok_out;
        }
        case ActionType::Move: {
            Vec2 target = robot_.pos + robot_to_world({a.x, a.y}, robot_.heading);
            if (!bounds_.contains(target))
                return fail(a, StepError::OutOfBounds, "move exits the world bounds");
            if (draw_fault()) return fail(a, StepError::ExecutionFault, "stochastic fault on MOVE");
            robot_.pos = target;
            maybe_open_by_approach();
            return ok_out;
        }
        case ActionType::Rotate:
            if (draw_fault()) return fail(a, StepError::ExecutionFault, "stochastic fault on ROTATE");
            robot_.heading = wrap_angle(robot_.heading + a.rz);
            return ok_out;
        case ActionType::Stop:
            return ok_out;
        case ActionType::IncreaseHeight:
            if (robot_.height_level >= 1)
                return fail(a, StepError::PreconditionFailed, "height already at upper bound");
            if (draw_fault()) return fail(a, StepError::ExecutionFault, "stochastic fault");
            robot_.height_level += 1;
            return ok_out;
        case ActionType::DecreaseHeight:
            if (robot_.height_level <= -1)
                return fail(a, StepError::PreconditionFailed, "height already at lower bound");
            if (draw_fault()) return fail(a, StepError::ExecutionFault, "stochastic fault");
            robot_.height_level -= 1;
            return ok_out;
        case ActionType::Grasp: {
            Entity* e = entity_mut(a.object);
            if (!e) return fail(a, StepError::PreconditionFailed, "unknown object: " + a.object);
            if (e->is_held()) return fail(a, StepError::PreconditionFailed, a.object + " is already held");
            if (!entity_visible(*e)) return fail(a, StepError::NotVisible, a.object + " is not visible");
            if (!within_reach(entity_position(*e)))
                return fail(a, StepError::NotReachable, a.object + " is out of reach");
            bool need_left = a.hand == Hand::Left || a.hand == Hand::Both;
            bool need_right = a.hand == Hand::Right || a.hand == Hand::Both;
            if ((need_left && robot_.left_hand) || (need_right && robot_.right_hand))
                return fail(a, StepError::HandsOccupied, "hand(s) occupied");
            if (draw_fault()) return fail(a, StepError::ExecutionFault, "stochastic fault on GRASP");
            e->region.clear();
            e->held_in = a.hand;
            if (need_left) robot_.left_hand = e->id;
            if (need_right) robot_.right_hand = e->id;
            return ok_out;
        }
        case ActionType::Hold: {
            auto h = held_hand(a.object);
            if (!h) return fail(a, StepError::NotHeld, a.object + " is not held");
            if (draw_fault()) return fail(a, StepError::ExecutionFault, "stochastic fault on HOLD");
            return ok_out;  // maintained grasp, no state change
        }
        case ActionType::Release: {
            Entity* e = entity_mut(a.object);
            if (!e || !e->is_held()) return fail(a, StepError::NotHeld, a.object + " is not held");
            const Region* nearest = nullptr;
            double best = 1e30;
            for (const auto& r : regions_) {
                double d = (r.center - robot_.pos).norm();
                if (d <= robot_.reach_m && d < best) {
                    best = d;
                    nearest = &r;
                }
            }
            if (!nearest) return fail(a, StepError::NotReachable, "no region within reach to release into");
            if (draw_fault()) return fail(a, StepError::ExecutionFault, "stochastic fault on RELEASE");
            Hand h = *e->held_in;
            if (h == Hand::Left || h == Hand::Both) robot_.left_hand.reset();
            if (h == Hand::Right || h == Hand::Both) robot_.right_hand.reset();
            e->held_in.reset();
            e->region = nearest->id;
            carried_.erase(e->id);
            return ok_out;
        }
        case ActionType::Lift:
        case ActionType::Raise: {
            auto h = held_hand(a.object);
            if (!h) return fail(a, StepError::NotHeld, a.object + " is not held");
            if (a.type == ActionType::Raise && *h != Hand::Both)
                return fail(a, StepError::PreconditionFailed, "RAISE requires a both-hand grasp");
            if (draw_fault()) return fail(a, StepError::ExecutionFault, "stochastic fault");
            carried_.insert(a.object);
            return ok_out;
        }
        case ActionType::Rearrange: {
            const Entity* e = find_entity(a.object);
            if (!e) return fail(a, StepError::PreconditionFailed, "unknown object: " + a.object);
            if (!entity_visible(*e)) return fail(a, StepError::NotVisible, a.object + " is not visible");
            if (!within_reach(entity_position(*e)))
                return fail(a, StepError::NotReachable, a.object + " is out of reach");
            if (draw_fault()) return fail(a, StepError::ExecutionFault, "stochastic fault on REARRANGE");
            return ok_out;  // relocated within its region's workspace
        }
        case ActionType::Put: {
            Entity* e = entity_mut(a.object);
            if (!e || !e->is_held()) return fail(a, StepError::NotHeld, a.object + " is not held");
            const Region* r = find_region(a.location);
            if (!r) return fail(a, StepError::PreconditionFailed, "unknown location: " + a.location);
            if (!within_reach(r->center))
                return fail(a, StepError::NotReachable, a.location + " is out of reach");
            if (draw_fault()) return fail(a, StepError::ExecutionFault, "stochastic fault on PUT");
            Hand h = *e->held_in;
            if (h == Hand::Left || h == Hand::Both) robot_.left_hand.reset();
            if (h == Hand::Right || h == Hand::Both) robot_.right_hand.reset();
            e->held_in.reset();
            e->region = r->id;
            carried_.erase(e->id);
            return ok_out;
        }
    }
    return fail(a, StepError::PreconditionFailed, "unhandled action");
}

void World::maybe_open_by_approach() {
    if (!find_anchor_) return;
    Region* r = region_mut(*find_anchor_);
    if (!r || !r->container || r->open || !r->openable_by_approach) return;
    if ((r->center - robot_.pos).norm() <= sensing_.open_radius_m) r->open = true;
}

void World::check_invariants() const {
    for (const auto& e : entities_) {
        assert(e.is_held() == e.region.empty());
        (void)e;
    }
    if (robot_.left_hand) assert(find_entity(*robot_.left_hand) && find_entity(*robot_.left_hand)->is_held());
    if (robot_.right_hand) assert(find_entity(*robot_.right_hand) && find_entity(*robot_.right_hand)->is_held());
}

}  // namespace coa
