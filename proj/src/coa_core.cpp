#include "coa/coa_core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "coa/errors.hpp"
#include "json.hpp"

namespace coa {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Catalog

Catalog Catalog::from_scenario(const ScenarioSpec& s) {
    Catalog c;
    for (const auto& o : s.objects)
        c.entities.push_back({o.id, o.category, o.affordance, o.weight_kg, o.footprint_m});
    c.regions = s.regions;
    c.joints = s.robot.joints;
    c.reach_m = s.robot.reach_m;
    c.sensing = s.sensing;
    return c;
}

IdCatalog Catalog::ids() const {
    IdCatalog ids;
    for (const auto& e : entities) ids.entities.insert(e.id);
    for (const auto& r : regions) ids.regions.insert(r.id);
    return ids;
}

const EntityInfo* Catalog::find_entity(const std::string& id) const {
    for (const auto& e : entities)
        if (e.id == id) return &e;
    return nullptr;
}

const Region* Catalog::find_region(const std::string& id) const {
    for (const auto& r : regions)
        if (r.id == id) return &r;
    return nullptr;
}

// ---------------------------------------------------------------------------
// PriorTable

double PriorTable::score(const std::string& object_category, const std::string& region_category) const {
    auto it = rows.find({object_category, region_category});
    return it == rows.end() ? floor : it->second;
}

PriorTable PriorTable::from_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open prior table: " + path);
    PriorTable t;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string obj, reg, score;
        if (!std::getline(ss, obj, ',') || !std::getline(ss, reg, ',') || !std::getline(ss, score, ','))
            continue;
        if (obj == "object_category") continue;  // header
        t.rows[{obj, reg}] = std::stod(score);
    }
    return t;
}

PriorTable PriorTable::builtin_defaults() {
    PriorTable t;
    auto add = [&](const char* o, const char* r, double s) { t.rows[{o, r}] = s; };
    add("cup", "kitchen_counter", 0.9); add("cup", "dining_table", 0.7); add("cup", "white_table", 0.6);
    add("cup", "shelf", 0.4); add("cup", "cabinet", 0.5); add("cup", "box", 0.2);
    add("bottle", "refrigerator", 0.9); add("bottle", "kitchen_counter", 0.8);
    add("bottle", "dining_table", 0.5); add("bottle", "box", 0.4); add("bottle", "white_table", 0.4);
    add("book", "shelf", 0.9); add("book", "sofa", 0.5); add("book", "bed", 0.4); add("book", "box", 0.3);
    add("ball", "box", 0.7); add("ball", "sofa", 0.4); add("ball", "bed", 0.3);
    add("plate", "kitchen_counter", 0.9); add("plate", "dining_table", 0.8); add("plate", "cabinet", 0.6);
    add("toy", "box", 0.8); add("toy", "sofa", 0.5); add("toy", "bed", 0.4);
    add("box", "white_table", 0.6); add("box", "dining_table", 0.5);
    return t;
}

// ---------------------------------------------------------------------------
// Scoring primitives

std::vector<double> softmax(const std::vector<double>& scores) {
    std::vector<double> out(scores.size());
    if (scores.empty()) return out;
    double m = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp(scores[i] - m);
        sum += out[i];
    }
    for (auto& v : out) v /= sum;
    return out;
}

namespace {

constexpr double kGateSteepness = 10.0;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double phi(const Action& action, const AffordanceVector& a) {
    const double k = kGateSteepness;
    switch (action.type) {
        case ActionType::Grasp:
            return sigmoid(k * (a.movability - 0.5)) * sigmoid(k * (0.7 - a.size));
        case ActionType::Lift:
        case ActionType::Raise:
            return sigmoid(k * (0.6 - a.weight));
        case ActionType::Rearrange:
        case ActionType::Put:
            return sigmoid(k * (a.movability - 0.5));
        case ActionType::Find:
            return sigmoid(k * a.actionability);
        default:
            return 1.0;  // empty gate product
    }
}

AffordanceState affordance_analyze(const std::vector<EntityInfo>& entities) {
    AffordanceState state;
    for (const auto& e : entities) {
        AffordanceState::EntityEntry entry;
        entry.entity = e.id;
        const auto& a = e.affordance;
        auto gates_pass = [&](ActionType t) {
            switch (t) {
                case ActionType::Grasp: return a.movability >= 0.5 && a.size <= 0.7;
                case ActionType::Lift:
                case ActionType::Raise: return a.weight <= 0.6 && a.movability >= 0.5;
                case ActionType::Rearrange:
                case ActionType::Put: return a.movability >= 0.5;
                case ActionType::Find: return a.actionability > 0.0;
                default: return true;
            }
        };
        for (ActionType t : {ActionType::Find, ActionType::Grasp, ActionType::Hold, ActionType::Release,
                             ActionType::Lift, ActionType::Raise, ActionType::Rearrange, ActionType::Put}) {
            if (!gates_pass(t)) continue;
            Action probe;
            probe.type = t;
            entry.feasible.emplace_back(t, phi(probe, a));
        }
        state.entries.push_back(std::move(entry));
    }
    return state;
}

namespace {

std::vector<std::string> split_tokens(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == '_' || c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

double token_overlap_bonus(const std::string& target_text, const Region& r) {
    auto a = split_tokens(target_text);
    auto b = split_tokens(r.id + "_" + r.category);
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    std::vector<std::string> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    return 0.25 * static_cast<double>(common.size());
}

}  // namespace

std::vector<std::pair<std::string, double>> spatial_prior(const std::vector<Region>& regions,
                                                          const std::string& target_text,
                                                          const PriorTable& prior) {
    if (regions.empty()) throw EmptyRegions("spatial_prior needs at least one candidate region");
    // Target category = first token of the target text.
    auto toks = split_tokens(target_text);
    std::string category = toks.empty() ? target_text : toks.front();
    std::vector<double> scores;
    scores.reserve(regions.size());
    for (size_t i = 0; i < regions.size(); ++i) {
        const auto& r = regions[i];
        // Tiny index-ordered decrement so equally plausible regions never
        // tie exactly; the decoder then commits to one hypothesis instead
        // of dithering between symmetric candidates.
        scores.push_back(prior.score(category, r.category) + token_overlap_bonus(target_text, r) -
                         1e-8 * static_cast<double>(i));
    }
    auto w = softmax(scores);
    std::vector<std::pair<std::string, double>> out;
    for (size_t i = 0; i < regions.size(); ++i) out.emplace_back(regions[i].id, w[i]);
    return out;
}

SpatialState spatial_update(const std::string& target,
                            const std::optional<std::string>& observed_region,
                            const std::vector<std::pair<std::string, double>>& priors,
                            const std::vector<std::string>& failed_regions,
                            double decay, double collapse_floor) {
    SpatialState s;
    s.target = target;
    s.weights = priors;
    if (observed_region) {
        // Collapse the mass onto the observed region, floor elsewhere.
        for (auto& [id, w] : s.weights) w = (id == *observed_region) ? 1.0 : collapse_floor;
    } else {
        for (const auto& f : failed_regions)
            for (auto& [id, w] : s.weights)
                if (id == f) w *= decay;
    }
    double sum = 0.0;
    for (auto& [id, w] : s.weights) {
        if (w < 1e-12) w = 1e-12;
        sum += w;
    }
    for (auto& [id, w] : s.weights) w /= sum;
    return s;
}

double region_compat(const std::string& action_target_region, const std::string& region_id,
                     double region_floor) {
    return (!action_target_region.empty() && action_target_region == region_id) ? 1.0 : region_floor;
}

double spatial_score(const std::string& action_target_region,
                     const std::vector<std::pair<std::string, double>>& weights, double region_floor) {
    double s = 0.0;
    for (const auto& [id, w] : weights) s += w * region_compat(action_target_region, id, region_floor);
    return s;
}

namespace {

JointRole demanded_role(ActionType t, bool& has_demand) {
    has_demand = true;
    switch (t) {
        case ActionType::Move:
        case ActionType::Rotate:
        case ActionType::Stop:
            return JointRole::Locomotion;
        case ActionType::IncreaseHeight:
        case ActionType::DecreaseHeight:
            return JointRole::Posture;
        case ActionType::Grasp:
        case ActionType::Hold:
        case ActionType::Release:
            return JointRole::Grasp;
        case ActionType::Lift:
        case ActionType::Raise:
        case ActionType::Put:
        case ActionType::Rearrange:
            return JointRole::Reach;
        case ActionType::Find:
            has_demand = false;
            return JointRole::Reach;
    }
    has_demand = false;
    return JointRole::Reach;
}

double range_factor(const JointDescriptor& j) {
    double f = (j.range_max - j.range_min) / M_PI;
    return std::clamp(f, 0.0, 1.0);
}

}  // namespace

double body_feasibility(const Action& action, const std::vector<JointDescriptor>& joints,
                        const EntityInfo* entity) {
    bool has_demand = false;
    JointRole role = demanded_role(action.type, has_demand);
    if (!has_demand) return 1.0;

    double torque_factor = 1.0;
    if (entity) {
        double min_torque = 1e30;
        for (const auto& j : joints)
            if (j.role == JointRole::Grasp || j.role == JointRole::Reach)
                min_torque = std::min(min_torque, j.torque_limit);
        if (min_torque < 1e30 && entity->weight_kg > min_torque) torque_factor = 0.0;
    }

    double sum = 0.0;
    bool found = false;
    for (const auto& j : joints) {
        if (j.role != role) continue;
        found = true;
        sum += range_factor(j) * torque_factor;
    }
    if (!found)
        throw MissingRole(std::string(action_name(action.type)) + " demands role " +
                          joint_role_name(role) + " which is absent from the joint set");
    return sum;
}

// ---------------------------------------------------------------------------
// Belief machinery

namespace {

bool action_takes_object(ActionType t) {
    switch (t) {
        case ActionType::Find:
        case ActionType::Hold:
        case ActionType::Release:
        case ActionType::Grasp:
        case ActionType::Lift:
        case ActionType::Raise:
        case ActionType::Rearrange:
        case ActionType::Put:
            return true;
        default:
            return false;
    }
}

bool belief_region_open(const BeliefState& b, const Region& r) {
    if (!r.container) return true;
    return r.open || b.open_containers.count(r.id) > 0;
}

// Deliberately tighter than the simulator's sector test: the margins keep
// belief-claimed visibility true in the world even under region jitter, so
// a planned FIND never fails for field-of-view reasons. When a region sits
// just outside the tight cone, the ROTATE candidate closes the gap.
bool belief_region_in_fov(const BeliefState& b, const Region& r, const SensingConfig& sensing) {
    constexpr double kAngleMargin = 0.2;   // radians
    constexpr double kRangeMargin = 0.25;  // meters
    Vec2 d = r.center - b.robot_pos;
    double dist = d.norm();
    if (dist > sensing.fov_range_m - kRangeMargin) return false;
    if (dist < 1e-9) return true;
    double off = std::abs(wrap_angle(std::atan2(d.y, d.x) - b.heading));
    double half = (sensing.fov_deg * M_PI / 180.0) / 2.0;
    return off <= std::max(half - kAngleMargin, half / 2.0);
}

bool atom_satisfied(const BeliefState& b, const GoalAtom& atom, const Catalog& cat) {
    switch (atom.type) {
        case GoalAtom::Type::In: {
            if (b.held.count(atom.object)) return false;
            auto it = b.entity_region.find(atom.object);
            return it != b.entity_region.end() && it->second == atom.region;
        }
        case GoalAtom::Type::Held: {
            auto it = b.held.find(atom.object);
            if (it == b.held.end()) return false;
            if (!atom.hand) return true;
            return it->second == *atom.hand || it->second == Hand::Both;
        }
        case GoalAtom::Type::RobotNear: {
            const Region* r = cat.find_region(atom.region);
            return r && (r->center - b.robot_pos).norm() <= atom.radius;
        }
        case GoalAtom::Type::RobotFacing: {
            const Region* r = cat.find_region(atom.region);
            if (!r) return false;
            Vec2 d = r->center - b.robot_pos;
            if (d.norm() < 1e-9) return true;
            return std::abs(wrap_angle(std::atan2(d.y, d.x) - b.heading)) <= atom.tolerance;
        }
    }
    return false;
}

const GoalAtom* pending_atom(const BeliefState& b, const DecodeInput& input) {
    if (b.ordered_achieved < static_cast<int>(input.goal.ordered.size()))
        return &input.goal.ordered[b.ordered_achieved];
    for (const auto& a : input.goal.atoms)
        if (!atom_satisfied(b, a, input.catalog)) return &a;
    return nullptr;
}

std::string argmax_region(const std::vector<std::pair<std::string, double>>& weights) {
    std::string best_id;
    double best_w = -1.0;
    for (const auto& [id, w] : weights) {
        if (w > best_w + 1e-15 || (std::abs(w - best_w) <= 1e-15 && (best_id.empty() || id < best_id))) {
            best_w = w;
            best_id = id;
        }
    }
    return best_id;
}

std::string entity_target_text(const EntityInfo& e) { return e.category + " " + e.id; }

std::vector<std::string> failed_regions_for(const DecodeInput& input, const std::string& entity_id) {
    std::vector<std::string> out;
    for (const auto& [ent, reg] : input.failed_searches)
        if (ent == entity_id) out.push_back(reg);
    return out;
}

// Believed region of an entity: committed belief, else the current search
// hypothesis, else its own prior argmax with failed searches decayed.
std::string believed_region(const std::string& entity_id, const BeliefState& b,
                            const SpatialState& spatial, const DecodeInput& input,
                            const DecodeConfig& cfg) {
    if (b.held.count(entity_id)) return "";
    auto it = b.entity_region.find(entity_id);
    if (it != b.entity_region.end()) return it->second;
    if (spatial.target == entity_id) return argmax_region(spatial.weights);
    const EntityInfo* info = input.catalog.find_entity(entity_id);
    if (!info || input.catalog.regions.empty()) return "";
    auto priors = spatial_prior(input.catalog.regions, entity_target_text(*info), input.priors);
    SpatialState s = spatial_update(entity_id, std::nullopt, priors,
                                    failed_regions_for(input, entity_id), cfg.decay,
                                    cfg.collapse_floor);
    return argmax_region(s.weights);
}

}  // namespace

BeliefState belief_init(const DecodeInput& input) {
    BeliefState b;
    b.robot_pos = input.obs.robot.pos;
    b.heading = input.obs.robot.heading;
    b.height = input.obs.robot.height_level;
    b.left_hand = input.obs.robot.left_hand;
    b.right_hand = input.obs.robot.right_hand;
    b.localized = input.localized;
    b.ordered_achieved = input.ordered_achieved;
    for (const auto& [id, reg] : input.known_locations) b.entity_region[id] = reg;
    for (const auto& e : input.obs.visible_entities) {
        if (e.is_held()) {
            b.held[e.id] = *e.held_in;
            b.entity_region.erase(e.id);
        } else {
            b.entity_region[e.id] = e.region;
        }
    }
    for (const auto& r : input.obs.visible_regions)
        if (r.container && r.open) b.open_containers.insert(r.id);
    for (const auto& id : input.known_open) b.open_containers.insert(id);
    return b;
}

bool belief_goal_satisfied(const BeliefState& b, const DecodeInput& input) {
    if (b.ordered_achieved < static_cast<int>(input.goal.ordered.size())) return false;
    for (const auto& a : input.goal.atoms)
        if (!atom_satisfied(b, a, input.catalog)) return false;
    return true;
}

SpatialState belief_spatial(const BeliefState& b, const DecodeInput& input, const DecodeConfig& cfg) {
    const auto& regions = input.catalog.regions;
    if (regions.empty()) throw EmptyRegions("decoder needs at least one region");

    auto uniform = [&]() {
        std::vector<std::pair<std::string, double>> w;
        for (const auto& r : regions) w.emplace_back(r.id, 1.0 / regions.size());
        return w;
    };

    const GoalAtom* atom = pending_atom(b, input);
    if (!atom) {
        SpatialState s;
        s.weights = uniform();
        return s;
    }

    // Region-directed atoms, and In-atoms whose object is already in hand,
    // aim at a known region: collapse onto it.
    std::string target_entity;
    std::string known_region;
    switch (atom->type) {
        case GoalAtom::Type::RobotNear:
        case GoalAtom::Type::RobotFacing:
            return spatial_update(atom->region, atom->region, uniform(), {}, cfg.decay,
                                  cfg.collapse_floor);
        case GoalAtom::Type::In:
            if (b.held.count(atom->object))
                return spatial_update(atom->region, atom->region, uniform(), {}, cfg.decay,
                                      cfg.collapse_floor);
            target_entity = atom->object;
            break;
        case GoalAtom::Type::Held:
            target_entity = atom->object;
            break;
    }

    auto it = b.entity_region.find(target_entity);
    std::optional<std::string> observed;
    if (it != b.entity_region.end()) observed = it->second;
    const EntityInfo* info = input.catalog.find_entity(target_entity);
    std::string text = info ? entity_target_text(*info) : target_entity;
    auto priors = spatial_prior(regions, text, input.priors);
    return spatial_update(target_entity, observed, priors, failed_regions_for(input, target_entity),
                          cfg.decay, cfg.collapse_floor);
}

std::vector<Candidate> decode_candidates(const BeliefState& b, const DecodeInput& input,
                                         const DecodeConfig& cfg) {
    std::vector<Candidate> out;
    const Catalog& cat = input.catalog;
    SpatialState spatial = belief_spatial(b, input, cfg);

    auto region_dist = [&](const Region& r) { return (r.center - b.robot_pos).norm(); };
    auto hand_free = [&](Hand h) {
        bool need_left = h == Hand::Left || h == Hand::Both;
        bool need_right = h == Hand::Right || h == Hand::Both;
        return !(need_left && b.left_hand) && !(need_right && b.right_hand);
    };

    if (b.height < 1) out.push_back({Action::increase_height(), ""});
    if (b.height > -1) out.push_back({Action::decrease_height(), ""});

    // One ROTATE candidate, aimed at the pending focus region.
    const GoalAtom* atom = pending_atom(b, input);
    std::string focus;
    if (atom) {
        if (atom->type == GoalAtom::Type::RobotNear || atom->type == GoalAtom::Type::RobotFacing ||
            (atom->type == GoalAtom::Type::In && b.held.count(atom->object)))
            focus = atom->region;
        else
            focus = believed_region(atom->object, b, spatial, input, cfg);
    }
    if (!focus.empty()) {
        const Region* r = cat.find_region(focus);
        if (r) {
            Vec2 d = r->center - b.robot_pos;
            if (d.norm() > 1e-9) {
                double delta = wrap_angle(std::atan2(d.y, d.x) - b.heading);
                if (std::abs(delta) > 0.05) out.push_back({Action::rotate(delta), focus});
            }
        }
    }

    // MOVE waypoints toward each region's stand-off point.
    for (const auto& r : cat.regions) {
        Vec2 d = r.center - b.robot_pos;
        double dist = d.norm();
        if (dist < 1e-9 || dist <= cfg.approach_offset) continue;
        Vec2 target = r.center - d * (cfg.approach_offset / dist);
        Vec2 delta = target - b.robot_pos;
        double len = delta.norm();
        if (len < 0.3) continue;
        if (len > cfg.move_step_max) delta = delta * (cfg.move_step_max / len);
        // robot frame
        double c = std::cos(-b.heading), s = std::sin(-b.heading);
        Vec2 local{c * delta.x - s * delta.y, s * delta.x + c * delta.y};
        out.push_back({Action::move(local.x, local.y), r.id});
    }

    // FIND of entities not yet localized whose believed region is in view.
    for (const auto& e : cat.entities) {
        if (b.localized.count(e.id) || b.held.count(e.id)) continue;
        std::string rb = believed_region(e.id, b, spatial, input, cfg);
        if (rb.empty()) continue;
        const Region* r = cat.find_region(rb);
        if (!r) continue;
        if (!belief_region_in_fov(b, *r, cat.sensing)) continue;
        if (!belief_region_open(b, *r)) continue;
        out.push_back({Action::find(e.id), rb});
    }

    // FIND of the focus container while it is believed closed (anchors the
    // approach that opens it). Skipped once it is already the anchor, so a
    // plan never repeats the same anchor-setting FIND.
    if (!focus.empty() && b.find_anchor != std::optional<std::string>(focus)) {
        const Region* r = cat.find_region(focus);
        if (r && r->container && r->openable_by_approach && !belief_region_open(b, *r) &&
            belief_region_in_fov(b, *r, cat.sensing))
            out.push_back({Action::find(r->id), r->id});
    }

    // GRASP only the pending atom's object: picking anything else never
    // progresses the goal and would churn under score ties.
    std::string pending_obj;
    if (atom && (atom->type == GoalAtom::Type::In || atom->type == GoalAtom::Type::Held) &&
        !b.held.count(atom->object))
        pending_obj = atom->object;
    if (!pending_obj.empty() && b.localized.count(pending_obj)) {
        auto it = b.entity_region.find(pending_obj);
        if (it != b.entity_region.end()) {
            const Region* r = cat.find_region(it->second);
            if (r && region_dist(*r) <= cat.reach_m && belief_region_open(b, *r))
                for (Hand h : {Hand::Both, Hand::Left, Hand::Right})
                    if (hand_free(h)) out.push_back({Action::grasp(pending_obj, h), it->second});
        }
    }

    // Held-object actions. A held object is only put toward its own pending
    // destination; objects the goal no longer mentions may go anywhere in
    // reach, which frees the hands.
    auto pending_dest = [&](const std::string& id) -> std::optional<std::string> {
        if (atom && atom->type == GoalAtom::Type::In && atom->object == id) return atom->region;
        return std::nullopt;
    };
    for (const auto& [id, hand] : b.held) {
        if (!b.carried.count(id)) {
            out.push_back({Action::lift(id), ""});
            if (hand == Hand::Both) out.push_back({Action::raise(id), ""});
        }
        std::optional<std::string> dest = pending_dest(id);
        bool goal_relevant = dest.has_value() || (atom && atom->object == id);
        if (!dest && goal_relevant) continue;  // pending Held atom: keep holding
        // RELEASE into the nearest region within reach.
        const Region* nearest = nullptr;
        double best = 1e30;
        for (const auto& r : cat.regions) {
            double d = region_dist(r);
            if (d <= cat.reach_m && d < best) {
                best = d;
                nearest = &r;
            }
        }
        if (nearest && !dest) out.push_back({Action::release(id), nearest->id});
        for (const auto& r : cat.regions) {
            if (dest && r.id != *dest) continue;
            if (region_dist(r) > cat.reach_m || !belief_region_open(b, r)) continue;
            out.push_back({Action::put(id, r.id), r.id});
        }
    }

    return out;
}

ScoreBreakdown score_candidate(const Candidate& c, const BeliefState& b, const SpatialState& spatial,
                               const DecodeInput& input, const DecodeConfig& cfg) {
    (void)b;
    ScoreBreakdown sb;
    sb.action = c.action;
    const EntityInfo* info = nullptr;
    double aff = 0.5;  // neutral gate value for actions without a target object
    if (action_takes_object(c.action.type)) {
        info = input.catalog.find_entity(c.action.object);
        aff = info ? phi(c.action, info->affordance) : 1.0;
    }
    sb.aff = aff * cfg.phi_scale;
    sb.spatial = spatial_score(c.target_region, spatial.weights, cfg.region_floor) * cfg.region_scale;
    sb.body = body_feasibility(c.action, input.catalog.joints, info) * cfg.psi_scale;
    // Floored logs keep the pooling defined at zero while preserving exact
    // argmax invariance under uniform scaling of any one factor.
    sb.combined = cfg.lambda_aff * std::log(std::max(sb.aff, cfg.epsilon)) +
                  cfg.lambda_sp * std::log(std::max(sb.spatial, cfg.epsilon)) +
                  cfg.lambda_body * std::log(std::max(sb.body, cfg.epsilon));
    return sb;
}

void belief_apply(BeliefState& b, const Candidate& c, const DecodeInput& input,
                  const DecodeConfig& cfg) {
    const Catalog& cat = input.catalog;
    const Action& a = c.action;

    auto maybe_open = [&]() {
        if (!b.find_anchor) return;
        const Region* r = cat.find_region(*b.find_anchor);
        if (!r || !r->container || !r->openable_by_approach || belief_region_open(b, *r)) return;
        if ((r->center - b.robot_pos).norm() <= cat.sensing.open_radius_m)
            b.open_containers.insert(r->id);
    };

    switch (a.type) {
        case ActionType::Find:
            if (cat.find_entity(a.object)) {
                b.localized.insert(a.object);
                if (!c.target_region.empty()) b.entity_region[a.object] = c.target_region;
                b.find_anchor = c.target_region.empty() ? std::nullopt
                                                        : std::optional<std::string>(c.target_region);
            } else {
                b.find_anchor = a.object;
            }
            maybe_open();
            break;
        case ActionType::Move:
            b.robot_pos = b.robot_pos + robot_to_world({a.x, a.y}, b.heading);
            maybe_open();
            break;
        case ActionType::Rotate:
            b.heading = wrap_angle(b.heading + a.rz);
            break;
        case ActionType::Stop:
            break;
        case ActionType::IncreaseHeight:
            b.height = std::min(1, b.height + 1);
            break;
        case ActionType::DecreaseHeight:
            b.height = std::max(-1, b.height - 1);
            break;
        case ActionType::Grasp: {
            b.held[a.object] = a.hand;
            b.entity_region.erase(a.object);
            if (a.hand == Hand::Left || a.hand == Hand::Both) b.left_hand = a.object;
            if (a.hand == Hand::Right || a.hand == Hand::Both) b.right_hand = a.object;
            break;
        }
        case ActionType::Hold:
            break;
        case ActionType::Lift:
        case ActionType::Raise:
            b.carried.insert(a.object);
            break;
        case ActionType::Release:
        case ActionType::Put: {
            auto it = b.held.find(a.object);
            if (it != b.held.end()) {
                Hand h = it->second;
                if (h == Hand::Left || h == Hand::Both) b.left_hand.reset();
                if (h == Hand::Right || h == Hand::Both) b.right_hand.reset();
                b.held.erase(it);
            }
            b.entity_region[a.object] =
                a.type == ActionType::Put ? a.location : c.target_region;
            b.carried.erase(a.object);
            break;
        }
        case ActionType::Rearrange:
            break;
    }
    (void)cfg;

    while (b.ordered_achieved < static_cast<int>(input.goal.ordered.size()) &&
           atom_satisfied(b, input.goal.ordered[b.ordered_achieved], cat))
        ++b.ordered_achieved;
}

// ---------------------------------------------------------------------------
// Decoding

namespace {

std::vector<ReasoningState> build_reasoning(const DecodeInput& input, const DecodeConfig& cfg,
                                            const BeliefState& b) {
    std::vector<ReasoningState> states;
    int index = 1;
    if (cfg.lambda_aff > 0.0) {
        std::vector<EntityInfo> visible;
        for (const auto& e : input.obs.visible_entities)
            visible.push_back({e.id, e.category, e.affordance, e.weight_kg, e.footprint_m});
        states.push_back({index++, affordance_analyze(visible)});
    }
    if (cfg.lambda_sp > 0.0) states.push_back({index++, belief_spatial(b, input, cfg)});
    if (cfg.lambda_body > 0.0) {
        BodyState body;
        for (ActionType t :
             {ActionType::Find, ActionType::Move, ActionType::Rotate, ActionType::Stop,
              ActionType::IncreaseHeight, ActionType::DecreaseHeight, ActionType::Hold,
              ActionType::Release, ActionType::Grasp, ActionType::Lift, ActionType::Raise,
              ActionType::Rearrange, ActionType::Put}) {
            Action probe;
            probe.type = t;
            double psi = 0.0;
            try {
                psi = body_feasibility(probe, input.catalog.joints, nullptr);
            } catch (const MissingRole&) {
                psi = 0.0;
            }
            body.feasibility.emplace_back(t, psi);
        }
        states.push_back({index++, std::move(body)});
    }
    return states;
}

ScoreBreakdown stop_breakdown(const BeliefState& b, const DecodeInput& input, const DecodeConfig& cfg) {
    Candidate stop{Action::stop(), ""};
    SpatialState spatial = belief_spatial(b, input, cfg);
    return score_candidate(stop, b, spatial, input, cfg);
}

struct GreedyStep {
    Candidate cand;
    ScoreBreakdown score;
};

std::optional<GreedyStep> greedy_pick(const BeliefState& b, const DecodeInput& input,
                                      const DecodeConfig& cfg) {
    SpatialState spatial = belief_spatial(b, input, cfg);
    auto cands = decode_candidates(b, input, cfg);
    if (cands.empty()) return std::nullopt;
    std::optional<GreedyStep> best;
    std::string best_text;
    for (const auto& c : cands) {
        ScoreBreakdown sb = score_candidate(c, b, spatial, input, cfg);
        std::string text = format_action(c.action);
        if (!best || sb.combined > best->score.combined + 1e-12 ||
            (std::abs(sb.combined - best->score.combined) <= 1e-12 && text < best_text)) {
            best = GreedyStep{c, sb};
            best_text = text;
        }
    }
    return best;
}

ChainResult decode_greedy(const DecodeInput& input, const DecodeConfig& cfg) {
    ChainResult res;
    res.backend = "deterministic";
    BeliefState b = belief_init(input);
    res.reasoning = build_reasoning(input, cfg, b);

    if (belief_goal_satisfied(b, input)) {
        res.plan.actions.push_back(Action::stop());
        res.per_step.push_back(stop_breakdown(b, input, cfg));
        res.step_targets.emplace_back();
        res.plan.source_text = format_plan(res.plan);
        return res;
    }

    bool terminal = false;
    for (int step = 0; step < cfg.horizon; ++step) {
        auto pick = greedy_pick(b, input, cfg);
        if (!pick) break;
        res.plan.actions.push_back(pick->cand.action);
        res.per_step.push_back(pick->score);
        res.step_targets.push_back(pick->cand.target_region);
        belief_apply(b, pick->cand, input, cfg);
        if (belief_goal_satisfied(b, input)) {
            terminal = true;
            break;
        }
    }
    if (res.plan.actions.empty()) {
        res.plan.actions.push_back(Action::stop());
        res.per_step.push_back(stop_breakdown(b, input, cfg));
        res.step_targets.emplace_back();
    }
    res.horizon_exceeded = !terminal;
    res.plan.source_text = format_plan(res.plan);
    return res;
}

struct ExhaustiveBest {
    double total = -1e300;
    std::vector<Candidate> seq;
    std::vector<ScoreBreakdown> scores;
    bool terminal = false;
    bool found = false;
};

void exhaustive_walk(const BeliefState& b, const DecodeInput& input, const DecodeConfig& cfg,
                     int depth, double acc, std::vector<Candidate>& seq,
                     std::vector<ScoreBreakdown>& scores, std::size_t& nodes, ExhaustiveBest& best) {
    auto consider = [&](bool terminal) {
        std::string text;
        for (const auto& c : seq) text += format_action(c.action) + "\n";
        std::string best_text;
        for (const auto& c : best.seq) best_text += format_action(c.action) + "\n";
        if (!best.found || acc > best.total + 1e-12 ||
            (std::abs(acc - best.total) <= 1e-12 && text < best_text)) {
            best.total = acc;
            best.seq = seq;
            best.scores = scores;
            best.terminal = terminal;
            best.found = true;
        }
    };

    if (belief_goal_satisfied(b, input)) {
        consider(true);
        return;
    }
    if (depth >= cfg.horizon) {
        consider(false);
        return;
    }
    SpatialState spatial = belief_spatial(b, input, cfg);
    auto cands = decode_candidates(b, input, cfg);
    if (cands.empty()) {
        consider(false);
        return;
    }
    for (const auto& c : cands) {
        if (++nodes > cfg.exhaustive_guard)
            throw CandidateExplosion("exhaustive decode exceeded the candidate bound");
        ScoreBreakdown sb = score_candidate(c, b, spatial, input, cfg);
        BeliefState nb = b;
        belief_apply(nb, c, input, cfg);
        seq.push_back(c);
        scores.push_back(sb);
        exhaustive_walk(nb, input, cfg, depth + 1, acc + sb.combined, seq, scores, nodes, best);
        seq.pop_back();
        scores.pop_back();
    }
}

ChainResult decode_exhaustive(const DecodeInput& input, const DecodeConfig& cfg) {
    ChainResult res;
    res.backend = "deterministic";
    BeliefState b = belief_init(input);
    res.reasoning = build_reasoning(input, cfg, b);

    if (belief_goal_satisfied(b, input)) {
        res.plan.actions.push_back(Action::stop());
        res.per_step.push_back(stop_breakdown(b, input, cfg));
        res.step_targets.emplace_back();
        res.plan.source_text = format_plan(res.plan);
        return res;
    }

    ExhaustiveBest best;
    std::vector<Candidate> seq;
    std::vector<ScoreBreakdown> scores;
    std::size_t nodes = 0;
    exhaustive_walk(b, input, cfg, 0, 0.0, seq, scores, nodes, best);

    for (size_t i = 0; i < best.seq.size(); ++i) {
        res.plan.actions.push_back(best.seq[i].action);
        res.per_step.push_back(best.scores[i]);
        res.step_targets.push_back(best.seq[i].target_region);
    }
    if (res.plan.actions.empty()) {
        res.plan.actions.push_back(Action::stop());
        res.per_step.push_back(stop_breakdown(b, input, cfg));
        res.step_targets.emplace_back();
    }
    res.horizon_exceeded = !best.terminal;
    res.plan.source_text = format_plan(res.plan);
    return res;
}

}  // namespace

ChainResult decode_chain(const DecodeInput& input, const DecodeConfig& cfg) {
    if (cfg.horizon < 1) throw Error("decode horizon must be >= 1");
    return cfg.mode == DecodeMode::Greedy ? decode_greedy(input, cfg) : decode_exhaustive(input, cfg);
}

ChainResult replan(const ChainResult& prev, int executed_prefix, const DecodeInput& input,
                   const DecodeConfig& cfg) {
    if (executed_prefix < 0 || executed_prefix > static_cast<int>(prev.plan.actions.size()))
        throw Error("executed_prefix out of range");
    ChainResult suffix = decode_chain(input, cfg);
    ChainResult res;
    res.backend = suffix.backend;
    res.reasoning = suffix.reasoning;
    res.horizon_exceeded = suffix.horizon_exceeded;
    for (int i = 0; i < executed_prefix; ++i) {
        res.plan.actions.push_back(prev.plan.actions[i]);
        res.per_step.push_back(prev.per_step[i]);
        res.step_targets.push_back(i < static_cast<int>(prev.step_targets.size())
                                       ? prev.step_targets[i]
                                       : std::string());
    }
    for (size_t i = 0; i < suffix.plan.actions.size(); ++i) {
        res.plan.actions.push_back(suffix.plan.actions[i]);
        res.per_step.push_back(suffix.per_step[i]);
        res.step_targets.push_back(suffix.step_targets[i]);
    }
    res.plan.source_text = format_plan(res.plan);
    return res;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json reasoning_to_json(const ReasoningState& r) {
    json j;
    j["index"] = r.index;
    if (std::holds_alternative<AffordanceState>(r.state)) {
        j["kind"] = "affordance";
        json entries = json::array();
        for (const auto& e : std::get<AffordanceState>(r.state).entries) {
            json feas = json::array();
            for (const auto& [t, s] : e.feasible) feas.push_back({{"action", action_name(t)}, {"score", s}});
            entries.push_back({{"entity", e.entity}, {"feasible", feas}});
        }
        j["entries"] = entries;
    } else if (std::holds_alternative<SpatialState>(r.state)) {
        j["kind"] = "spatial";
        const auto& s = std::get<SpatialState>(r.state);
        j["target"] = s.target;
        json w = json::array();
        for (const auto& [id, v] : s.weights) w.push_back({{"region", id}, {"weight", v}});
        j["weights"] = w;
    } else {
        j["kind"] = "body";
        json f = json::array();
        for (const auto& [t, v] : std::get<BodyState>(r.state).feasibility)
            f.push_back({{"action", action_name(t)}, {"psi", v}});
        j["feasibility"] = f;
    }
    return j;
}

}  // namespace

std::string ChainResult::to_json() const {
    json j;
    j["backend"] = backend;
    j["horizon_exceeded"] = horizon_exceeded;
    j["plan"] = format_plan(plan);
    j["reasoning"] = json::array();
    for (const auto& r : reasoning) j["reasoning"].push_back(reasoning_to_json(r));
    j["per_step"] = json::array();
    for (size_t i = 0; i < per_step.size(); ++i) {
        const auto& s = per_step[i];
        j["per_step"].push_back({{"action", format_action(s.action)},
                                 {"aff", s.aff},
                                 {"spatial", s.spatial},
                                 {"body", s.body},
                                 {"combined", s.combined},
                                 {"target_region", i < step_targets.size() ? step_targets[i] : ""}});
    }
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// DecodeConfig I/O

DecodeConfig DecodeConfig::from_json_text(const std::string& text) {
    json j = json::parse(text);
    DecodeConfig c;
    c.lambda_aff = j.value("lambda_aff", c.lambda_aff);
    c.lambda_sp = j.value("lambda_sp", c.lambda_sp);
    c.lambda_body = j.value("lambda_body", c.lambda_body);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.region_floor = j.value("region_floor", c.region_floor);
    c.collapse_floor = j.value("collapse_floor", c.collapse_floor);
    c.decay = j.value("decay", c.decay);
    c.horizon = j.value("horizon", c.horizon);
    std::string mode = j.value("mode", "greedy");
    c.mode = mode == "exhaustive" ? DecodeMode::Exhaustive : DecodeMode::Greedy;
    c.phi_scale = j.value("phi_scale", c.phi_scale);
    c.region_scale = j.value("region_scale", c.region_scale);
    c.psi_scale = j.value("psi_scale", c.psi_scale);
    c.move_step_max = j.value("move_step_max", c.move_step_max);
    c.approach_offset = j.value("approach_offset", c.approach_offset);
    return c;
}

DecodeConfig DecodeConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string DecodeConfig::to_json_text() const {
    json j;
    j["lambda_aff"] = lambda_aff;
    j["lambda_sp"] = lambda_sp;
    j["lambda_body"] = lambda_body;
    j["epsilon"] = epsilon;
    j["region_floor"] = region_floor;
    j["collapse_floor"] = collapse_floor;
    j["decay"] = decay;
    j["horizon"] = horizon;
    j["mode"] = mode == DecodeMode::Exhaustive ? "exhaustive" : "greedy";
    j["phi_scale"] = phi_scale;
    j["region_scale"] = region_scale;
    j["psi_scale"] = psi_scale;
    j["move_step_max"] = move_step_max;
    j["approach_offset"] = approach_offset;
    return j.dump(2);
}

}  // namespace coa
