#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "coa/errors.hpp"
#include "coa/harness.hpp"
#include "coa/scenario_gen.hpp"

namespace {

using namespace coa;

void apply_mask(DecodeConfig& cfg, const std::string& mask) {
    cfg.lambda_aff = mask.find("aff") != std::string::npos ? 1.0 : 0.0;
    cfg.lambda_sp = mask.find("sp") != std::string::npos ? 1.0 : 0.0;
    cfg.lambda_body = mask.find("body") != std::string::npos ? 1.0 : 0.0;
}

std::vector<std::uint64_t> parse_seed_range(const std::string& spec) {
    auto dots = spec.find("..");
    std::vector<std::uint64_t> seeds;
    if (dots == std::string::npos) {
        seeds.push_back(std::stoull(spec));
        return seeds;
    }
    std::uint64_t a = std::stoull(spec.substr(0, dots));
    std::uint64_t b = std::stoull(spec.substr(dots + 2));
    for (std::uint64_t s = a; s <= b; ++s) seeds.push_back(s);
    return seeds;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chain-of-action household robot planner"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run one scenario episode");
    std::string run_scenario, run_backend = "det", run_mask = "aff,sp,body", run_trace;
    std::uint64_t run_seed = 0;
    run->add_option("scenario", run_scenario, "Scenario JSON file")->required();
    run->add_option("--backend", run_backend, "det or llm")->check(CLI::IsMember({"det", "llm"}));
    run->add_option("--seed", run_seed, "World seed");
    run->add_option("--mask", run_mask, "Enabled score modules, e.g. aff,sp,body");
    run->add_option("--trace", run_trace, "Write the episode trace JSON to this file");
    std::string run_cache;
    run->add_option("--replay-cache", run_cache, "Replay cache for the llm backend");

    // suite
    auto* suite = app.add_subcommand("suite", "Run a scenario suite");
    std::string suite_dir, suite_seeds = "1..30", suite_mask = "aff,sp,body", suite_out;
    int suite_jobs = 1;
    suite->add_option("dir", suite_dir, "Suite directory")->required();
    suite->add_option("--seeds", suite_seeds, "Seed range a..b");
    suite->add_option("--jobs", suite_jobs, "Worker threads");
    suite->add_option("--mask", suite_mask, "Enabled score modules");
    suite->add_option("--out", suite_out, "Write the report JSON to this file");

    // validate
    auto* validate = app.add_subcommand("validate", "Statically check a plan file");
    std::string val_plan, val_catalog;
    validate->add_option("plan", val_plan, "Plan text file")->required();
    validate->add_option("--catalog", val_catalog, "Scenario JSON providing the id catalog")->required();

    // report
    auto* report = app.add_subcommand("report", "Render a suite report");
    std::string rep_input, rep_format = "md";
    report->add_option("results", rep_input, "Report JSON file")->required();
    report->add_option("--format", rep_format, "json, csv or md")
        ->check(CLI::IsMember({"json", "csv", "md"}));

    // gen
    auto* gen = app.add_subcommand("gen", "Write the built-in scenario files");
    std::string gen_dir;
    bool gen_noisy = false;
    gen->add_option("dir", gen_dir, "Output directory")->required();
    gen->add_flag("--noisy", gen_noisy, "Suite flavor: primitive noise + position jitter");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            ScenarioSpec s = ScenarioSpec::from_file(run_scenario);
            HarnessConfig cfg;
            apply_mask(cfg.decode, run_mask);
            ReplayCache cache;
            ThrowingTransport transport;
            if (run_backend == "llm") {
                if (run_cache.empty()) {
                    std::cerr << "llm backend requires --replay-cache\n";
                    return 2;
                }
                cache = ReplayCache::load(run_cache, CacheMode::Replay);
                cfg.backend = BackendKind::Llm;
                cfg.cache = &cache;
                cfg.transport = &transport;
            }
            EpisodeResult r = run_episode(s, cfg, run_seed);
            if (!run_trace.empty()) {
                std::ofstream out(run_trace);
                out << r.to_json() << "\n";
            }
            std::cout << "scenario=" << r.scenario_id << " seed=" << r.seed
                      << " executable=" << (r.executable ? "true" : "false")
                      << " success=" << (r.success ? "true" : "false") << " steps=" << r.steps.size()
                      << " replans=" << r.replans << " ticks=" << r.ticks << "\n";
            if (!r.error.empty()) std::cerr << "backend error: " << r.error << "\n";
            return r.success ? 0 : 1;
        }
        if (*suite) {
            auto scenarios = load_suite(suite_dir);
            HarnessConfig cfg;
            apply_mask(cfg.decode, suite_mask);
            SuiteReport rep = run_suite(scenarios, cfg, parse_seed_range(suite_seeds), suite_jobs);
            if (!suite_out.empty()) {
                std::ofstream out(suite_out);
                out << rep.to_json() << "\n";
            }
            std::cout << emit_report(rep, ReportFormat::Md);
            return rep.success == rep.episodes ? 0 : 1;
        }
        if (*validate) {
            ScenarioSpec s = ScenarioSpec::from_file(val_catalog);
            ParseResult parsed = parse_plan(read_file(val_plan));
            if (!parsed.ok()) {
                for (const auto& d : parsed.diagnostics)
                    std::cerr << "line " << d.line << ": " << diagnostic_code_name(d.code) << ": "
                              << d.message << "\n";
                return 1;
            }
            ExecutabilityReport rep = validate_plan(*parsed.plan, Catalog::from_scenario(s).ids());
            std::cout << rep.to_json() << "\n";
            return rep.executable ? 0 : 1;
        }
        if (*report) {
            SuiteReport rep = SuiteReport::from_json_text(read_file(rep_input));
            ReportFormat fmt = rep_format == "json" ? ReportFormat::Json
                               : rep_format == "csv" ? ReportFormat::Csv
                                                     : ReportFormat::Md;
            std::cout << emit_report(rep, fmt);
            return 0;
        }
        if (*gen) {
            std::filesystem::create_directories(gen_dir);
            nlohmann::json manifest;
            manifest["scenarios"] = nlohmann::json::array();
            for (const auto& s : make_all_scenarios(gen_noisy)) {
                std::string file = s.task_class + ".json";
                std::ofstream out(std::filesystem::path(gen_dir) / file);
                out << s.to_json_text() << "\n";
                manifest["scenarios"].push_back(file);
            }
            std::ofstream out(std::filesystem::path(gen_dir) / "suite.json");
            out << manifest.dump(2) << "\n";
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
