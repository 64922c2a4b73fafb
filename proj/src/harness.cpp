#include "coa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "coa/errors.hpp"
#include "coa/scene_text.hpp"
#include "json.hpp"

namespace coa {

using nlohmann::json;

namespace {

std::string pct_str(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

bool world_atom_holds(const World& w, const GoalAtom& a) {
    switch (a.type) {
        case GoalAtom::Type::In: {
            const Entity* e = w.find_entity(a.object);
            return e && !e->is_held() && e->region == a.region;
        }
        case GoalAtom::Type::Held: {
            const Entity* e = w.find_entity(a.object);
            if (!e || !e->is_held()) return false;
            if (!a.hand) return true;
            return *e->held_in == *a.hand || *e->held_in == Hand::Both;
        }
        case GoalAtom::Type::RobotNear: {
            const Region* r = w.find_region(a.region);
            return r && (r->center - w.robot().pos).norm() <= a.radius;
        }
        case GoalAtom::Type::RobotFacing: {
            const Region* r = w.find_region(a.region);
            if (!r) return false;
            Vec2 d = r->center - w.robot().pos;
            if (d.norm() < 1e-9) return true;
            return std::abs(wrap_angle(std::atan2(d.y, d.x) - w.robot().heading)) <= a.tolerance;
        }
    }
    return false;
}

std::map<std::string, Hand> held_map(const World& w) {
    std::map<std::string, Hand> h;
    for (const auto& e : w.entities())
        if (e.is_held()) h[e.id] = *e.held_in;
    return h;
}

}  // namespace

EpisodeResult run_episode(const ScenarioSpec& scenario, const HarnessConfig& config,
                          std::uint64_t seed) {
    scenario.validate();
    World world = World::spawn(scenario, seed);
    Catalog cat = Catalog::from_scenario(scenario);
    IdCatalog ids = cat.ids();
    Tokenizer tok = Tokenizer::with_default_vocab();

    EpisodeResult res;
    res.scenario_id = scenario.id;
    res.task_class = scenario.task_class;
    res.seed = seed;

    DecodeConfig dcfg = config.decode;
    dcfg.horizon = std::max(dcfg.horizon, scenario.step_budget);

    // Episode memory carried across replans.
    std::map<std::string, std::string> known_locations;
    std::set<std::string> known_open, localized;
    std::vector<std::pair<std::string, std::string>> failed_searches;
    int ordered_achieved = 0;
    const std::map<std::string, Hand> episode_initial_held = held_map(world);

    Observation obs = world.observe();

    auto absorb_obs = [&]() {
        for (const auto& e : obs.visible_entities) {
            if (e.is_held()) known_locations.erase(e.id);
            else known_locations[e.id] = e.region;
        }
        for (const auto& r : obs.visible_regions)
            if (r.container && r.open) known_open.insert(r.id);
    };
    auto latch_ordered = [&]() {
        while (ordered_achieved < static_cast<int>(scenario.goal.ordered.size()) &&
               world_atom_holds(world, scenario.goal.ordered[ordered_achieved]))
            ++ordered_achieved;
    };
    auto goal_holds = [&]() {
        if (ordered_achieved < static_cast<int>(scenario.goal.ordered.size())) return false;
        for (const auto& a : scenario.goal.atoms)
            if (!world_atom_holds(world, a)) return false;
        return true;
    };
    auto make_input = [&]() {
        DecodeInput in;
        in.catalog = cat;
        in.goal = scenario.goal;
        in.obs = obs;
        in.priors = config.priors;
        in.instruction_tokens = tok.tokenize(scenario.instruction);
        in.scene_tokens = tok.tokenize(describe_scene(obs).text);
        in.known_locations = known_locations;
        in.known_open = known_open;
        in.localized = localized;
        in.failed_searches = failed_searches;
        in.ordered_achieved = ordered_achieved;
        return in;
    };

    absorb_obs();
    latch_ordered();

    const bool llm = config.backend == BackendKind::Llm;
    auto llm_generate = [&](const ChainResult* prior, const StepOutcome* feedback) {
        if (!config.cache || !config.transport)
            throw NetworkError("llm backend requires a cache and transport");
        PromptBundle prompt = build_prompt(scenario.instruction, describe_scene(obs), prior, feedback);
        BackendResponse resp = complete(prompt, *config.cache, *config.transport, config.endpoint);
        ChainResult chain;
        chain.backend = "llm";
        chain.plan = *resp.extracted_plan;
        chain.step_targets.assign(chain.plan.actions.size(), "");
        return chain;
    };

    ChainResult chain;
    try {
        chain = llm ? llm_generate(nullptr, nullptr) : decode_chain(make_input(), dcfg);
    } catch (const Error& e) {
        res.error = e.what();
        return res;
    }
    res.chain_traces.push_back(chain);
    res.executable = validate_plan(chain.plan, ids, episode_initial_held).executable;

    if (!res.executable) return res;

    int idx = 0;  // next action in chain.plan
    bool success = false;
    while (static_cast<int>(res.steps.size()) < scenario.step_budget) {
        if (goal_holds()) {
            success = true;
            break;
        }
        if (idx >= static_cast<int>(chain.plan.actions.size())) {
            // Plan exhausted without reaching the goal: continue with a
            // fresh suffix, budget permitting.
            if (res.replans >= config.max_replans) break;
            ++res.replans;
            try {
                chain = llm ? llm_generate(&chain, nullptr) : replan(chain, idx, make_input(), dcfg);
            } catch (const Error& e) {
                res.error = e.what();
                break;
            }
            if (llm) idx = 0;
            res.chain_traces.push_back(chain);
            bool ok = llm ? validate_plan(chain.plan, ids, held_map(world)).executable
                          : validate_plan(chain.plan, ids, episode_initial_held).executable;
            res.executable = res.executable && ok;
            if (!ok) break;
            if (idx >= static_cast<int>(chain.plan.actions.size())) break;  // no progress
            continue;
        }

        const Action a = chain.plan.actions[idx];
        StepOutcome outcome = world.apply(a);
        res.steps.push_back({a, outcome});
        res.ticks += outcome.ticks;
        obs = world.observe();
        absorb_obs();
        latch_ordered();

        if (outcome.ok) {
            if (a.type == ActionType::Find && cat.find_entity(a.object)) localized.insert(a.object);
            ++idx;
            continue;
        }

        // Genuine FIND miss (not a stochastic fault): the target is absent
        // from the searched region, so decay it.
        if (a.type == ActionType::Find && outcome.error == StepError::NotVisible &&
            cat.find_entity(a.object)) {
            std::string searched =
                idx < static_cast<int>(chain.step_targets.size()) ? chain.step_targets[idx] : "";
            if (!searched.empty()) failed_searches.emplace_back(a.object, searched);
            localized.erase(a.object);
            known_locations.erase(a.object);
        }

        if (res.replans >= config.max_replans) break;
        ++res.replans;
        try {
            chain = llm ? llm_generate(&chain, &outcome) : replan(chain, idx, make_input(), dcfg);
        } catch (const Error& e) {
            res.error = e.what();
            break;
        }
        if (llm) idx = 0;
        res.chain_traces.push_back(chain);
        bool ok = llm ? validate_plan(chain.plan, ids, held_map(world)).executable
                      : validate_plan(chain.plan, ids, episode_initial_held).executable;
        res.executable = res.executable && ok;
        if (!ok) break;
    }
    if (!success) success = goal_holds();
    res.success = success && res.executable;
    return res;
}

std::string EpisodeResult::to_json() const {
    json j;
    j["scenario_id"] = scenario_id;
    j["task_class"] = task_class;
    j["seed"] = seed;
    j["executable"] = executable;
    j["success"] = success;
    j["replans"] = replans;
    j["ticks"] = ticks;
    j["error"] = error;
    j["steps"] = json::array();
    for (const auto& s : steps)
        j["steps"].push_back({{"action", format_action(s.action)},
                              {"ok", s.outcome.ok},
                              {"error", step_error_name(s.outcome.error)},
                              {"reason", s.outcome.reason},
                              {"ticks", s.outcome.ticks}});
    j["chains"] = json::array();
    for (const auto& c : chain_traces) j["chains"].push_back(json::parse(c.to_json()));
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// Suite

double SuiteReport::executable_pct() const {
    return episodes == 0 ? 0.0 : 100.0 * executable / episodes;
}

double SuiteReport::success_pct() const {
    return episodes == 0 ? 0.0 : 100.0 * success / episodes;
}

SuiteReport run_suite(const std::vector<ScenarioSpec>& scenarios, const HarnessConfig& config,
                      const std::vector<std::uint64_t>& seeds, int jobs) {
    struct Task {
        const ScenarioSpec* scenario;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (const auto& s : scenarios)
        for (std::uint64_t seed : seeds) tasks.push_back({&s, seed});

    std::vector<EpisodeResult> results(tasks.size());
    if (config.backend == BackendKind::Llm) jobs = 1;  // rate-limited queue
    jobs = std::max(1, jobs);

    auto worker_body = [&](std::atomic<std::size_t>& next) {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                results[i] = run_episode(*tasks[i].scenario, config, tasks[i].seed);
            } catch (const Error& e) {
                results[i].scenario_id = tasks[i].scenario->id;
                results[i].task_class = tasks[i].scenario->task_class;
                results[i].seed = tasks[i].seed;
                results[i].error = e.what();
            }
        }
    };
    std::atomic<std::size_t> next{0};
    if (jobs == 1) {
        worker_body(next);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back([&] { worker_body(next); });
        for (auto& t : pool) t.join();
    }

    // Fixed-order reduction: identical report regardless of scheduling.
    SuiteReport rep;
    rep.lambda_aff = config.decode.lambda_aff;
    rep.lambda_sp = config.decode.lambda_sp;
    rep.lambda_body = config.decode.lambda_body;
    rep.backend = config.backend == BackendKind::Llm ? "llm" : "deterministic";
    rep.seeds = seeds;
    for (const auto& r : results) {
        auto& cls = rep.per_class[r.task_class];
        ++cls.episodes;
        ++rep.episodes;
        if (r.executable) {
            ++cls.executable;
            ++rep.executable;
        }
        if (r.success) {
            ++cls.success;
            ++rep.success;
        }
        for (const auto& s : r.steps) {
            auto& prim = rep.per_primitive[action_name(s.action.type)];
            ++prim.attempts;
            if (s.outcome.ok) ++prim.successes;
            prim.ticks += s.outcome.ticks;
        }
    }
    return rep;
}

std::vector<ScenarioSpec> load_suite(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw IoError("not a suite directory: " + dir);
    std::vector<std::string> files;
    fs::path manifest = fs::path(dir) / "suite.json";
    if (fs::exists(manifest)) {
        std::ifstream in(manifest);
        json j = json::parse(in);
        for (const auto& f : j.at("scenarios"))
            files.push_back((fs::path(dir) / f.get<std::string>()).string());
    } else {
        for (const auto& e : fs::directory_iterator(dir))
            if (e.path().extension() == ".json") files.push_back(e.path().string());
        std::sort(files.begin(), files.end());
    }
    std::vector<ScenarioSpec> out;
    for (const auto& f : files) out.push_back(ScenarioSpec::from_file(f));
    if (out.empty()) throw IoError("suite directory has no scenarios: " + dir);
    return out;
}

std::string SuiteReport::to_json() const {
    json j;
    j["backend"] = backend;
    j["lambda"] = {{"aff", lambda_aff}, {"sp", lambda_sp}, {"body", lambda_body}};
    j["seeds"] = seeds;
    j["episodes"] = episodes;
    j["executable"] = executable;
    j["success"] = success;
    j["executable_pct"] = executable_pct();
    j["success_pct"] = success_pct();
    j["per_class"] = json::object();
    for (const auto& [name, c] : per_class)
        j["per_class"][name] = {{"episodes", c.episodes},
                                {"executable", c.executable},
                                {"success", c.success}};
    j["per_primitive"] = json::object();
    for (const auto& [name, p] : per_primitive)
        j["per_primitive"][name] = {{"attempts", p.attempts},
                                    {"successes", p.successes},
                                    {"ticks", p.ticks}};
    return j.dump(2);
}

SuiteReport SuiteReport::from_json_text(const std::string& text) {
    json j = json::parse(text);
    SuiteReport r;
    r.backend = j.at("backend").get<std::string>();
    r.lambda_aff = j.at("lambda").at("aff").get<double>();
    r.lambda_sp = j.at("lambda").at("sp").get<double>();
    r.lambda_body = j.at("lambda").at("body").get<double>();
    r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    r.episodes = j.at("episodes").get<int>();
    r.executable = j.at("executable").get<int>();
    r.success = j.at("success").get<int>();
    for (const auto& [name, c] : j.at("per_class").items())
        r.per_class[name] = {c.at("episodes").get<int>(), c.at("executable").get<int>(),
                             c.at("success").get<int>()};
    for (const auto& [name, p] : j.at("per_primitive").items())
        r.per_primitive[name] = {p.at("attempts").get<int>(), p.at("successes").get<int>(),
                                 p.at("ticks").get<std::uint64_t>()};
    return r;
}

std::string emit_report(const SuiteReport& report, ReportFormat format) {
    if (format == ReportFormat::Json) return report.to_json();
    if (format == ReportFormat::Csv) {
        std::string out = "section,name,episodes_or_attempts,executable_or_successes,success,"
                          "executable_pct,success_pct,mean_ticks\n";
        for (const auto& [name, c] : report.per_class) {
            double ep = 100.0 * c.executable / std::max(1, c.episodes);
            double sp = 100.0 * c.success / std::max(1, c.episodes);
            out += "class," + name + "," + std::to_string(c.episodes) + "," +
                   std::to_string(c.executable) + "," + std::to_string(c.success) + "," +
                   pct_str(ep) + "," + pct_str(sp) + ",\n";
        }
        for (const auto& [name, p] : report.per_primitive) {
            double sp = 100.0 * p.successes / std::max(1, p.attempts);
            double mt = static_cast<double>(p.ticks) / std::max(1, p.attempts);
            out += "primitive," + name + "," + std::to_string(p.attempts) + "," +
                   std::to_string(p.successes) + ",," + pct_str(sp) + ",," + pct_str(mt) + "\n";
        }
        out += "total,all," + std::to_string(report.episodes) + "," +
               std::to_string(report.executable) + "," + std::to_string(report.success) + "," +
               pct_str(report.executable_pct()) + "," + pct_str(report.success_pct()) + ",\n";
        return out;
    }
    // Markdown
    std::string out;
    out += "Backend: " + report.backend + " | lambda aff/sp/body: " + pct_str(report.lambda_aff) +
           "/" + pct_str(report.lambda_sp) + "/" + pct_str(report.lambda_body) + "\n\n";
    out += "| Task class | Episodes | Executable (%) | Success (%) |\n";
    out += "|---|---|---|---|\n";
    for (const auto& [name, c] : report.per_class) {
        double ep = 100.0 * c.executable / std::max(1, c.episodes);
        double sp = 100.0 * c.success / std::max(1, c.episodes);
        out += "| " + name + " | " + std::to_string(c.episodes) + " | " + pct_str(ep) + " | " +
               pct_str(sp) + " |\n";
    }
    out += "| **all** | " + std::to_string(report.episodes) + " | " +
           pct_str(report.executable_pct()) + " | " + pct_str(report.success_pct()) + " |\n";
    out += "\n| Primitive | Attempts | Success (%) | Mean ticks |\n";
    out += "|---|---|---|---|\n";
    for (const auto& [name, p] : report.per_primitive) {
        double sp = 100.0 * p.successes / std::max(1, p.attempts);
        double mt = static_cast<double>(p.ticks) / std::max(1, p.attempts);
        out += "| " + name + " | " + std::to_string(p.attempts) + " | " + pct_str(sp) + " | " +
               pct_str(mt) + " |\n";
    }
    return out;
}

}  // namespace coa
