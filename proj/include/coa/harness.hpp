#ifndef COA_HARNESS_HPP
#define COA_HARNESS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "coa/coa_core.hpp"
#include "coa/llm_backend.hpp"
#include "coa/scenario.hpp"
#include "coa/world.hpp"

namespace coa {

enum class BackendKind { Deterministic, Llm };

struct HarnessConfig {
    DecodeConfig decode;
    BackendKind backend = BackendKind::Deterministic;
    PriorTable priors = PriorTable::builtin_defaults();
    int max_replans = 5;
    // LLM-backend plumbing; unused by the deterministic backend.
    EndpointConfig endpoint;
    ReplayCache* cache = nullptr;
    Transport* transport = nullptr;
};

struct EpisodeStep {
    Action action;
    StepOutcome outcome;
};

struct EpisodeResult {
    std::string scenario_id;
    std::string task_class;
    std::uint64_t seed = 0;
    bool executable = false;
    bool success = false;
    std::vector<EpisodeStep> steps;
    int replans = 0;
    std::uint64_t ticks = 0;
    std::vector<ChainResult> chain_traces;
    std::string error;  // backend failure (parse/network), empty otherwise

    std::string to_json() const;
};

// Closed-loop perception -> description -> decoding -> validation ->
// execution, replanning on any primitive failure. Deterministic for a
// given (scenario, seed) with the deterministic backend.
EpisodeResult run_episode(const ScenarioSpec& scenario, const HarnessConfig& config,
                          std::uint64_t seed);

struct ClassAggregate {
    int episodes = 0;
    int executable = 0;
    int success = 0;
};

struct PrimitiveAggregate {
    int attempts = 0;
    int successes = 0;
    std::uint64_t ticks = 0;
};

struct SuiteReport {
    std::map<std::string, ClassAggregate> per_class;
    std::map<std::string, PrimitiveAggregate> per_primitive;  // keyed by action name
    int episodes = 0;
    int executable = 0;
    int success = 0;
    // Config echo.
    double lambda_aff = 1.0, lambda_sp = 1.0, lambda_body = 1.0;
    std::string backend;
    std::vector<std::uint64_t> seeds;

    double executable_pct() const;
    double success_pct() const;
    std::string to_json() const;
    static SuiteReport from_json_text(const std::string& text);
};

// Runs every (scenario, seed) pair; episodes are independent and may run
// on up to `jobs` threads, with a fixed-order reduction so the report is
// identical regardless of scheduling.
SuiteReport run_suite(const std::vector<ScenarioSpec>& scenarios, const HarnessConfig& config,
                      const std::vector<std::uint64_t>& seeds, int jobs = 1);

// Scenario files from a suite directory: suite.json manifest when present,
// otherwise every *.json file in lexicographic order.
std::vector<ScenarioSpec> load_suite(const std::string& dir);

enum class ReportFormat { Json, Csv, Md };

// Byte-deterministic rendering of a finalized report.
std::string emit_report(const SuiteReport& report, ReportFormat format);

}  // namespace coa

#endif
