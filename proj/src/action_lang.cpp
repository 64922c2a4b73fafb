#include "coa/action_lang.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <map>
#include <sstream>

#include "json.hpp"

namespace coa {

const char* action_name(ActionType t) {
    switch (t) {
        case ActionType::Find: return "FIND";
        case ActionType::Move: return "MOVE";
        case ActionType::Rotate: return "ROTATE";
        case ActionType::Stop: return "STOP";
        case ActionType::IncreaseHeight: return "INCREASE_HEIGHT";
        case ActionType::DecreaseHeight: return "DECREASE_HEIGHT";
        case ActionType::Hold: return "HOLD";
        case ActionType::Release: return "RELEASE";
        case ActionType::Grasp: return "GRASP";
        case ActionType::Lift: return "LIFT";
        case ActionType::Raise: return "RAISE";
        case ActionType::Rearrange: return "REARRANGE";
        case ActionType::Put: return "PUT";
    }
    return "?";
}

const char* hand_name(Hand h) {
    switch (h) {
        case Hand::Left: return "left";
        case Hand::Right: return "right";
        case Hand::Both: return "both";
    }
    return "?";
}

const char* diagnostic_code_name(DiagnosticCode c) {
    switch (c) {
        case DiagnosticCode::UnknownAction: return "UnknownAction";
        case DiagnosticCode::ArityError: return "ArityError";
        case DiagnosticCode::TypeError: return "TypeError";
        case DiagnosticCode::BadHand: return "BadHand";
        case DiagnosticCode::EmptyPlan: return "EmptyPlan";
    }
    return "?";
}

bool Action::operator==(const Action& o) const {
    if (type != o.type) return false;
    switch (type) {
        case ActionType::Find:
        case ActionType::Hold:
        case ActionType::Release:
        case ActionType::Lift:
        case ActionType::Raise:
        case ActionType::Rearrange:
            return object == o.object;
        case ActionType::Grasp:
            return object == o.object && hand == o.hand;
        case ActionType::Put:
            return object == o.object && location == o.location;
        case ActionType::Move:
            return x == o.x && y == o.y;
        case ActionType::Rotate:
            return rz == o.rz;
        default:
            return true;
    }
}

Action Action::find(std::string obj) { Action a; a.type = ActionType::Find; a.object = std::move(obj); return a; }
Action Action::move(double x, double y) { Action a; a.type = ActionType::Move; a.x = x; a.y = y; return a; }
Action Action::rotate(double rz) { Action a; a.type = ActionType::Rotate; a.rz = rz; return a; }
Action Action::stop() { Action a; a.type = ActionType::Stop; return a; }
Action Action::increase_height() { Action a; a.type = ActionType::IncreaseHeight; return a; }
Action Action::decrease_height() { Action a; a.type = ActionType::DecreaseHeight; return a; }
Action Action::hold(std::string obj) { Action a; a.type = ActionType::Hold; a.object = std::move(obj); return a; }
Action Action::release(std::string obj) { Action a; a.type = ActionType::Release; a.object = std::move(obj); return a; }
Action Action::grasp(std::string obj, Hand hand) { Action a; a.type = ActionType::Grasp; a.object = std::move(obj); a.hand = hand; return a; }
Action Action::lift(std::string obj) { Action a; a.type = ActionType::Lift; a.object = std::move(obj); return a; }
Action Action::raise(std::string obj) { Action a; a.type = ActionType::Raise; a.object = std::move(obj); return a; }
Action Action::rearrange(std::string obj) { Action a; a.type = ActionType::Rearrange; a.object = std::move(obj); return a; }
Action Action::put(std::string obj, std::string location) {
    Action a; a.type = ActionType::Put; a.object = std::move(obj); a.location = std::move(location); return a;
}

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string to_upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    return s;
}

bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!(std::islower(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s) {
        if (!(std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) || c == '_'))
            return false;
    }
    return true;
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    // decimal with optional sign, fraction and exponent
    size_t i = 0;
    if (s[i] == '+' || s[i] == '-') ++i;
    bool digits = false;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) { ++i; digits = true; }
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) { ++i; digits = true; }
    }
    if (!digits) return false;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
        bool exp_digits = false;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) { ++i; exp_digits = true; }
        if (!exp_digits) return false;
    }
    if (i != s.size()) return false;
    out = std::strtod(s.c_str(), nullptr);
    return true;
}

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

const std::map<std::string, ActionType>& name_table() {
    static const std::map<std::string, ActionType> table = {
        {"FIND", ActionType::Find},
        {"MOVE", ActionType::Move},
        {"ROTATE", ActionType::Rotate},
        {"STOP", ActionType::Stop},
        {"INCREASE_HEIGHT", ActionType::IncreaseHeight},
        {"DECREASE_HEIGHT", ActionType::DecreaseHeight},
        {"HOLD", ActionType::Hold},
        {"RELEASE", ActionType::Release},
        {"GRASP", ActionType::Grasp},
        {"LIFT", ActionType::Lift},
        {"RAISE", ActionType::Raise},
        {"REARRANGE", ActionType::Rearrange},
        {"PUT", ActionType::Put},
    };
    return table;
}

struct LineParse {
    std::optional<Action> action;
    std::optional<Diagnostic> diag;
};

Diagnostic make_diag(int line, DiagnosticCode code, std::string msg) {
    Diagnostic d;
    d.line = line;
    d.code = code;
    d.message = std::move(msg);
    return d;
}

LineParse parse_line(const std::string& raw, int line_no) {
    LineParse out;
    std::string head, body;
    bool has_parens = false;
    size_t open = raw.find('(');
    if (open == std::string::npos) {
        head = trim(raw);
    } else {
        if (raw.back() != ')') {
            out.diag = make_diag(line_no, DiagnosticCode::TypeError, "unbalanced parentheses: " + raw);
            return out;
        }
        head = trim(raw.substr(0, open));
        body = raw.substr(open + 1, raw.size() - open - 2);
        has_parens = true;
    }
    std::string name = to_upper(head);
    auto it = name_table().find(name);
    if (it == name_table().end()) {
        out.diag = make_diag(line_no, DiagnosticCode::UnknownAction, "unknown action: " + head);
        return out;
    }
    ActionType type = it->second;

    std::vector<std::string> args;
    if (has_parens && !trim(body).empty()) {
        std::stringstream ss(body);
        std::string part;
        while (std::getline(ss, part, ',')) args.push_back(trim(part));
    }

    auto want = [&](size_t n) {
        if (args.size() != n) {
            out.diag = make_diag(line_no, DiagnosticCode::ArityError,
                                 name + " expects " + std::to_string(n) + " argument(s), got " +
                                     std::to_string(args.size()));
            return false;
        }
        return true;
    };
    auto ident = [&](const std::string& s, Action& a, std::string Action::*field) {
        std::string id = to_lower(s);
        if (!is_identifier(id)) {
            out.diag = make_diag(line_no, DiagnosticCode::TypeError, "expected identifier, got '" + s + "'");
            return false;
        }
        a.*field = id;
        return true;
    };
    auto number = [&](const std::string& s, double& v) {
        if (!parse_number(s, v)) {
            out.diag = make_diag(line_no, DiagnosticCode::TypeError, "expected number, got '" + s + "'");
            return false;
        }
        return true;
    };

    Action a;
    a.type = type;
    switch (type) {
        case ActionType::Stop:
        case ActionType::IncreaseHeight:
        case ActionType::DecreaseHeight:
            if (!want(0)) return out;
            break;
        case ActionType::Find:
        case ActionType::Hold:
        case ActionType::Release:
        case ActionType::Lift:
        case ActionType::Raise:
        case ActionType::Rearrange:
            if (!want(1) || !ident(args[0], a, &Action::object)) return out;
            break;
        case ActionType::Move:
            if (!want(2) || !number(args[0], a.x) || !number(args[1], a.y)) return out;
            break;
        case ActionType::Rotate:
            if (!want(1) || !number(args[0], a.rz)) return out;
            break;
        case ActionType::Grasp: {
            if (!want(2) || !ident(args[0], a, &Action::object)) return out;
            std::string h = to_lower(args[1]);
            if (h == "left") a.hand = Hand::Left;
            else if (h == "right") a.hand = Hand::Right;
            else if (h == "both") a.hand = Hand::Both;
            else {
                out.diag = make_diag(line_no, DiagnosticCode::BadHand,
                                     "hand must be left/right/both, got '" + args[1] + "'");
                return out;
            }
            break;
        }
        case ActionType::Put:
            if (!want(2) || !ident(args[0], a, &Action::object) || !ident(args[1], a, &Action::location))
                return out;
            break;
    }
    out.action = a;
    return out;
}

}  // namespace

ParseResult parse_plan(const std::string& text) {
    ParseResult result;
    std::vector<Action> actions;
    std::vector<Diagnostic> diags;

    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        LineParse lp = parse_line(t, line_no);
        if (lp.diag) diags.push_back(*lp.diag);
        else if (lp.action) actions.push_back(*lp.action);
    }
    if (actions.empty() && diags.empty()) {
        diags.push_back(make_diag(std::max(1, line_no), DiagnosticCode::EmptyPlan, "plan contains no actions"));
    }
    if (!diags.empty()) {
        result.diagnostics = std::move(diags);
        return result;
    }
    Plan p;
    p.actions = std::move(actions);
    p.source_text = text;
    result.plan = std::move(p);
    return result;
}

std::string format_action(const Action& a) {
    std::string s = action_name(a.type);
    switch (a.type) {
        case ActionType::Stop:
        case ActionType::IncreaseHeight:
        case ActionType::DecreaseHeight:
            break;
        case ActionType::Find:
        case ActionType::Hold:
        case ActionType::Release:
        case ActionType::Lift:
        case ActionType::Raise:
        case ActionType::Rearrange:
            s += "(" + a.object + ")";
            break;
        case ActionType::Move:
            s += "(" + format_number(a.x) + ", " + format_number(a.y) + ")";
            break;
        case ActionType::Rotate:
            s += "(" + format_number(a.rz) + ")";
            break;
        case ActionType::Grasp:
            s += "(" + a.object + ", " + std::string(hand_name(a.hand)) + ")";
            break;
        case ActionType::Put:
            s += "(" + a.object + ", " + a.location + ")";
            break;
    }
    return s;
}

std::string format_plan(const Plan& p) {
    std::string out;
    for (size_t i = 0; i < p.actions.size(); ++i) {
        if (i) out += "\n";
        out += format_action(p.actions[i]);
    }
    return out;
}

namespace {

const char* validate_code_name(ValidateCode c) {
    switch (c) {
        case ValidateCode::Ok: return "Ok";
        case ValidateCode::UnknownIdentifier: return "UnknownIdentifier";
        case ValidateCode::NotHeld: return "NotHeld";
        case ValidateCode::HandsOccupied: return "HandsOccupied";
        case ValidateCode::AlreadyHeld: return "AlreadyHeld";
        case ValidateCode::NeedsBothHands: return "NeedsBothHands";
    }
    return "?";
}

}  // namespace

ExecutabilityReport validate_plan(const Plan& plan, const IdCatalog& catalog) {
    return validate_plan(plan, catalog, {});
}

ExecutabilityReport validate_plan(const Plan& plan, const IdCatalog& catalog,
                                  const std::map<std::string, Hand>& initial_held) {
    ExecutabilityReport report;
    // Symbolic hand occupancy: which entity each hand holds, if any.
    std::optional<std::string> left, right;
    std::map<std::string, Hand> held = initial_held;  // entity -> grasping hand(s)
    for (const auto& [obj, h] : held) {
        if (h == Hand::Left || h == Hand::Both) left = obj;
        if (h == Hand::Right || h == Hand::Both) right = obj;
    }

    auto free_hands_for = [&](const std::string& obj) {
        auto it = held.find(obj);
        if (it == held.end()) return;
        if (it->second == Hand::Left || it->second == Hand::Both) left.reset();
        if (it->second == Hand::Right || it->second == Hand::Both) right.reset();
        held.erase(it);
    };

    for (size_t i = 0; i < plan.actions.size(); ++i) {
        const Action& a = plan.actions[i];
        ActionCheck check;
        check.index = static_cast<int>(i);
        auto fail = [&](ValidateCode code, std::string msg) {
            check.ok = false;
            check.code = code;
            check.message = std::move(msg);
        };

        switch (a.type) {
            case ActionType::Stop:
            case ActionType::IncreaseHeight:
            case ActionType::DecreaseHeight:
            case ActionType::Move:
            case ActionType::Rotate:
                break;
            case ActionType::Find:
                if (!catalog.has_any(a.object))
                    fail(ValidateCode::UnknownIdentifier, "unknown identifier: " + a.object);
                break;
            case ActionType::Rearrange:
                if (!catalog.has_entity(a.object))
                    fail(ValidateCode::UnknownIdentifier, "unknown object: " + a.object);
                break;
            case ActionType::Grasp: {
                if (!catalog.has_entity(a.object)) {
                    fail(ValidateCode::UnknownIdentifier, "unknown object: " + a.object);
                    break;
                }
                if (held.count(a.object)) {
                    fail(ValidateCode::AlreadyHeld, a.object + " is already grasped");
                    break;
                }
                bool need_left = a.hand == Hand::Left || a.hand == Hand::Both;
                bool need_right = a.hand == Hand::Right || a.hand == Hand::Both;
                if ((need_left && left) || (need_right && right)) {
                    fail(ValidateCode::HandsOccupied, "hand(s) occupied for grasp of " + a.object);
                    break;
                }
                if (need_left) left = a.object;
                if (need_right) right = a.object;
                held[a.object] = a.hand;
                break;
            }
            case ActionType::Hold:
            case ActionType::Lift:
                if (!held.count(a.object))
                    fail(ValidateCode::NotHeld, a.object + " is not grasped");
                break;
            case ActionType::Raise:
                if (!held.count(a.object))
                    fail(ValidateCode::NotHeld, a.object + " is not grasped");
                else if (held[a.object] != Hand::Both)
                    fail(ValidateCode::NeedsBothHands, "RAISE requires a both-hand grasp of " + a.object);
                break;
            case ActionType::Release:
                if (!held.count(a.object)) fail(ValidateCode::NotHeld, a.object + " is not grasped");
                else free_hands_for(a.object);
                break;
            case ActionType::Put:
                if (!catalog.has_region(a.location)) {
                    fail(ValidateCode::UnknownIdentifier, "unknown location: " + a.location);
                } else if (!held.count(a.object)) {
                    fail(ValidateCode::NotHeld, a.object + " is not grasped");
                } else {
                    free_hands_for(a.object);
                }
                break;
        }
        if (!check.ok) report.executable = false;
        report.checks.push_back(std::move(check));
    }
    return report;
}

std::string ExecutabilityReport::to_json() const {
    nlohmann::json j;
    j["executable"] = executable;
    j["failures"] = nlohmann::json::array();
    for (const auto& c : checks) {
        if (c.ok) continue;
        j["failures"].push_back({{"index", c.index}, {"code", validate_code_name(c.code)}, {"message", c.message}});
    }
    return j.dump(2);
}

}  // namespace coa
