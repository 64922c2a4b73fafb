#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cstdio>

#include "coa/errors.hpp"
#include "coa/harness.hpp"
#include "coa/scenario_gen.hpp"
#include "doctest.h"

using namespace coa;

namespace {

std::string fixtures_dir() { return std::string(COA_SOURCE_DIR) + "/scenarios/fixtures"; }
std::string suite_dir() { return std::string(COA_SOURCE_DIR) + "/scenarios/suite"; }

std::string wrap_plan(const std::string& plan_block) {
    return "Affordance: per-object feasibility.\n"
           "Spatial: the believed target region.\n"
           "Body: joint roles per action.\n"
           "```\n" + plan_block + "\n```\n";
}

}  // namespace

TEST_CASE("a goal-free scenario succeeds immediately with a STOP plan") {
    auto s = make_scenario("target_approach", false);
    s.goal.atoms.clear();
    s.goal.ordered.clear();
    EpisodeResult r = run_episode(s, HarnessConfig{}, 1);
    CHECK(r.executable);
    CHECK(r.success);
    CHECK(r.steps.empty());  // goal holds before anything needs to run
    REQUIRE(r.chain_traces.size() == 1);
    REQUIRE(r.chain_traces[0].plan.actions.size() == 1);
    CHECK(r.chain_traces[0].plan.actions[0] == Action::stop());
}

TEST_CASE("episodes are deterministic per (scenario, seed) and independent of order") {
    auto a = make_scenario("object_relocation", true);
    auto b = make_scenario("navigation_under_occlusion", true);
    HarnessConfig cfg;

    std::string a_first = run_episode(a, cfg, 9).to_json();
    std::string b_first = run_episode(b, cfg, 9).to_json();
    // reversed order, fresh config
    std::string b_second = run_episode(b, HarnessConfig{}, 9).to_json();
    std::string a_second = run_episode(a, HarnessConfig{}, 9).to_json();
    CHECK(a_first == a_second);
    CHECK(b_first == b_second);

    CHECK(run_episode(a, cfg, 9).to_json() == a_first);
    CHECK(run_episode(a, cfg, 10).seed == 10);
}

TEST_CASE("success implies executable across a noisy batch") {
    HarnessConfig cfg;
    for (const auto& s : make_all_scenarios(true)) {
        for (std::uint64_t seed : {1, 2, 3}) {
            EpisodeResult r = run_episode(s, cfg, seed);
            if (r.success) CHECK(r.executable);
            CHECK(r.scenario_id == s.id);
            CHECK(r.task_class == s.task_class);
            CHECK(static_cast<int>(r.steps.size()) <= s.step_budget);
            std::uint64_t ticks = 0;
            for (const auto& st : r.steps) ticks += st.outcome.ticks;
            CHECK(ticks == r.ticks);
        }
    }
}

TEST_CASE("spatial reasoning is what solves the occlusion fixture") {
    auto s = ScenarioSpec::from_file(fixtures_dir() + "/navigation_under_occlusion.json");
    HarnessConfig full;
    CHECK(run_episode(s, full, 7).success);
    HarnessConfig no_sp;
    no_sp.decode.lambda_sp = 0.0;
    CHECK(!run_episode(s, no_sp, 7).success);
}

TEST_CASE("load_suite reads the manifest in task-class order") {
    auto fixtures = load_suite(fixtures_dir());
    auto suite = load_suite(suite_dir());
    REQUIRE(fixtures.size() == kTaskClasses.size());
    REQUIRE(suite.size() == kTaskClasses.size());
    for (size_t i = 0; i < fixtures.size(); ++i) {
        CHECK(fixtures[i].task_class == kTaskClasses[i]);
        CHECK(!fixtures[i].noise.enabled);
        CHECK(suite[i].noise.enabled);
    }
    CHECK_THROWS_AS(load_suite("/nonexistent/dir"), IoError);
}

TEST_CASE("run_suite: thread count never changes the report") {
    auto scenarios = load_suite(suite_dir());
    HarnessConfig cfg;
    std::vector<std::uint64_t> seeds = {1, 2};
    SuiteReport serial = run_suite(scenarios, cfg, seeds, 1);
    SuiteReport parallel = run_suite(scenarios, cfg, seeds, 8);
    CHECK(serial.to_json() == parallel.to_json());

    CHECK(serial.episodes == static_cast<int>(scenarios.size() * seeds.size()));
    int class_sum = 0;
    for (const auto& [name, agg] : serial.per_class) class_sum += agg.episodes;
    CHECK(class_sum == serial.episodes);
    CHECK(serial.success <= serial.executable);
    CHECK(serial.backend == "deterministic");
    CHECK(serial.seeds == seeds);
    CHECK(serial.lambda_sp == 1.0);
}

TEST_CASE("suite report json round-trips and renders in every format") {
    auto scenarios = load_suite(suite_dir());
    SuiteReport rep = run_suite(scenarios, HarnessConfig{}, {5}, 4);

    std::string j = rep.to_json();
    SuiteReport back = SuiteReport::from_json_text(j);
    CHECK(back.to_json() == j);

    CHECK(emit_report(rep, ReportFormat::Json) == j);
    std::string csv = emit_report(rep, ReportFormat::Csv);
    CHECK(csv.rfind("section,name,", 0) == 0);
    CHECK(csv.find("class,") != std::string::npos);
    std::string md = emit_report(rep, ReportFormat::Md);
    CHECK(md.find("| Task class |") != std::string::npos);
    CHECK(md.find("| Primitive |") != std::string::npos);
    // rendering is byte-deterministic
    CHECK(emit_report(rep, ReportFormat::Md) == md);
}

TEST_CASE("module masks shift suite success in the expected direction") {
    auto scenarios = load_suite(suite_dir());
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    HarnessConfig full;
    HarnessConfig none;
    none.decode.lambda_aff = none.decode.lambda_sp = none.decode.lambda_body = 0.0;
    SuiteReport rf = run_suite(scenarios, full, seeds, 8);
    SuiteReport rn = run_suite(scenarios, none, seeds, 8);
    CHECK(rf.success_pct() >= rn.success_pct() + 15.0);
}

TEST_CASE("llm backend: record once, then replay with zero network access") {
    auto s = ScenarioSpec::from_file(fixtures_dir() + "/target_approach.json");

    // Reference actions from the deterministic backend on the same world.
    EpisodeResult ref = run_episode(s, HarnessConfig{}, 7);
    REQUIRE(ref.success);
    Plan plan;
    for (const auto& st : ref.steps) plan.actions.push_back(st.action);
    std::string response = wrap_plan(format_plan(plan));

    std::string path = "harness_replay_cache.jsonl";
    std::string recorded_json;
    {
        ScriptedTransport transport({response});
        ReplayCache cache(CacheMode::Record);
        HarnessConfig cfg;
        cfg.backend = BackendKind::Llm;
        cfg.cache = &cache;
        cfg.transport = &transport;
        EpisodeResult r = run_episode(s, cfg, 7);
        CHECK(r.success);
        CHECK(r.executable);
        CHECK(r.error.empty());
        CHECK(transport.calls() == 1);
        CHECK(cache.size() == 1);
        cache.save(path);
        recorded_json = r.to_json();
    }
    {
        ReplayCache cache = ReplayCache::load(path, CacheMode::Replay);
        ThrowingTransport never;
        HarnessConfig cfg;
        cfg.backend = BackendKind::Llm;
        cfg.cache = &cache;
        cfg.transport = &never;
        EpisodeResult r = run_episode(s, cfg, 7);
        CHECK(r.success);
        CHECK(r.error.empty());
        CHECK(r.to_json() == recorded_json);
    }
    std::remove(path.c_str());
}

TEST_CASE("llm backend: an unparseable endpoint surfaces as a failed episode, not a crash") {
    auto s = ScenarioSpec::from_file(fixtures_dir() + "/target_approach.json");
    ScriptedTransport transport({"garbage", "more garbage", "still garbage"});
    ReplayCache cache(CacheMode::Live);
    HarnessConfig cfg;
    cfg.backend = BackendKind::Llm;
    cfg.cache = &cache;
    cfg.transport = &transport;
    EpisodeResult r = run_episode(s, cfg, 7);
    CHECK(!r.success);
    CHECK(!r.executable);
    CHECK(!r.error.empty());
    CHECK(transport.calls() == 3);
}
