#ifndef COA_ACTION_LANG_HPP
#define COA_ACTION_LANG_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace coa {

// The closed library of 13 primitive skills.
enum class ActionType {
    Find,
    Move,
    Rotate,
    Stop,
    IncreaseHeight,
    DecreaseHeight,
    Hold,
    Release,
    Grasp,
    Lift,
    Raise,
    Rearrange,
    Put,
};

enum class Hand { Left, Right, Both };

const char* action_name(ActionType t);
const char* hand_name(Hand h);

struct Action {
    ActionType type = ActionType::Stop;
    std::string object;    // Find/Hold/Release/Grasp/Lift/Raise/Rearrange/Put
    std::string location;  // Put
    Hand hand = Hand::Right;  // Grasp only
    double x = 0.0, y = 0.0;  // Move
    double rz = 0.0;          // Rotate

    bool operator==(const Action& o) const;

    static Action find(std::string obj);
    static Action move(double x, double y);
    static Action rotate(double rz);
    static Action stop();
    static Action increase_height();
    static Action decrease_height();
    static Action hold(std::string obj);
    static Action release(std::string obj);
    static Action grasp(std::string obj, Hand hand);
    static Action lift(std::string obj);
    static Action raise(std::string obj);
    static Action rearrange(std::string obj);
    static Action put(std::string obj, std::string location);
};

struct Plan {
    std::vector<Action> actions;
    std::string source_text;
};

enum class DiagnosticCode { UnknownAction, ArityError, TypeError, BadHand, EmptyPlan };

struct Diagnostic {
    int line = 0;
    DiagnosticCode code = DiagnosticCode::UnknownAction;
    std::string message;
};

const char* diagnostic_code_name(DiagnosticCode c);

struct ParseResult {
    std::optional<Plan> plan;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return plan.has_value(); }
};

// One action per line; NAME or NAME(arg{,arg}*); '#' comments and blank
// lines ignored; names case-insensitive. All diagnostics are collected.
ParseResult parse_plan(const std::string& text);

// Canonical text form; parse_plan(format_plan(p)) reproduces p.
std::string format_action(const Action& a);
std::string format_plan(const Plan& p);

// Static identifier catalog for the Executable check.
struct IdCatalog {
    std::set<std::string> entities;
    std::set<std::string> regions;

    bool has_entity(const std::string& id) const { return entities.count(id) > 0; }
    bool has_region(const std::string& id) const { return regions.count(id) > 0; }
    bool has_any(const std::string& id) const { return has_entity(id) || has_region(id); }
};

enum class ValidateCode {
    Ok,
    UnknownIdentifier,
    NotHeld,
    HandsOccupied,
    AlreadyHeld,
    NeedsBothHands,
};

struct ActionCheck {
    int index = 0;
    bool ok = true;
    ValidateCode code = ValidateCode::Ok;
    std::string message;
};

struct ExecutabilityReport {
    bool executable = true;
    std::vector<ActionCheck> checks;  // one per action, in order

    std::string to_json() const;
};

// Purely static check: identifiers resolve against the catalog and the
// symbolic hand-occupancy chain holds. Never consults world geometry.
// `initial_held` seeds the chain with entities already in hand.
ExecutabilityReport validate_plan(const Plan& plan, const IdCatalog& catalog);
ExecutabilityReport validate_plan(const Plan& plan, const IdCatalog& catalog,
                                  const std::map<std::string, Hand>& initial_held);

}  // namespace coa

#endif
