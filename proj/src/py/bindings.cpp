#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "coa/coa_core.hpp"
#include "coa/errors.hpp"
#include "coa/harness.hpp"
#include "coa/scenario_gen.hpp"
#include "coa/scene_text.hpp"
#include "coa/world.hpp"

namespace py = pybind11;
using namespace coa;

namespace {

DecodeConfig masked(double lambda_aff, double lambda_sp, double lambda_body) {
    DecodeConfig d;
    d.lambda_aff = lambda_aff;
    d.lambda_sp = lambda_sp;
    d.lambda_body = lambda_body;
    return d;
}

std::string run_episode_json(const std::string& scenario_json, std::uint64_t seed, double lambda_aff,
                             double lambda_sp, double lambda_body) {
    ScenarioSpec s = ScenarioSpec::from_json_text(scenario_json);
    HarnessConfig cfg;
    cfg.decode = masked(lambda_aff, lambda_sp, lambda_body);
    return run_episode(s, cfg, seed).to_json();
}

std::string run_suite_json(const std::string& suite_directory, const std::vector<std::uint64_t>& seeds,
                           int jobs, double lambda_aff, double lambda_sp, double lambda_body) {
    HarnessConfig cfg;
    cfg.decode = masked(lambda_aff, lambda_sp, lambda_body);
    return run_suite(load_suite(suite_directory), cfg, seeds, jobs).to_json();
}

std::string decode_plan_text(const std::string& scenario_json, std::uint64_t seed, double lambda_aff,
                             double lambda_sp, double lambda_body) {
    ScenarioSpec s = ScenarioSpec::from_json_text(scenario_json);
    DecodeInput in;
    in.catalog = Catalog::from_scenario(s);
    in.goal = s.goal;
    in.obs = World::spawn(s, seed).observe();
    in.priors = PriorTable::builtin_defaults();
    return decode_chain(in, masked(lambda_aff, lambda_sp, lambda_body)).plan.source_text;
}

std::string describe_scene_text(const std::string& scenario_json, std::uint64_t seed) {
    ScenarioSpec s = ScenarioSpec::from_json_text(scenario_json);
    return describe_scene(World::spawn(s, seed).observe()).text;
}

py::dict parse_plan_py(const std::string& text) {
    ParseResult r = parse_plan(text);
    py::dict out;
    out["ok"] = r.ok();
    if (r.ok()) out["plan"] = format_plan(*r.plan);
    py::list diags;
    for (const auto& d : r.diagnostics)
        diags.append(py::make_tuple(d.line, diagnostic_code_name(d.code), d.message));
    out["diagnostics"] = diags;
    return out;
}

std::string validate_plan_json(const std::string& plan_text, const std::string& scenario_json) {
    ParseResult parsed = parse_plan(plan_text);
    if (!parsed.ok()) throw Error("plan text did not parse");
    ScenarioSpec s = ScenarioSpec::from_json_text(scenario_json);
    return validate_plan(*parsed.plan, Catalog::from_scenario(s).ids()).to_json();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Chain-of-affordance planning core";

    py::register_exception<Error>(m, "CoaError");

    m.def("task_classes", [] { return kTaskClasses; }, "The 15 supported task classes.");
    m.def(
        "make_scenario",
        [](const std::string& task_class, bool noisy) { return make_scenario(task_class, noisy).to_json_text(); },
        py::arg("task_class"), py::arg("noisy") = false,
        "Generated scenario for a task class, as JSON text.");
    m.def("softmax", [](const std::vector<double>& v) { return softmax(v); });
    m.def("parse_plan", &parse_plan_py, py::arg("text"),
          "Parse plan text; returns {ok, plan, diagnostics}.");
    m.def("validate_plan", &validate_plan_json, py::arg("plan_text"), py::arg("scenario_json"),
          "Static executability report for a plan against a scenario catalog, as JSON.");
    m.def("describe_scene", &describe_scene_text, py::arg("scenario_json"), py::arg("seed") = 0,
          "First-observation scene description for a scenario.");
    m.def("decode_plan", &decode_plan_text, py::arg("scenario_json"), py::arg("seed") = 0,
          py::arg("lambda_aff") = 1.0, py::arg("lambda_sp") = 1.0, py::arg("lambda_body") = 1.0,
          "One-shot decoded plan text for a scenario's first observation.");
    m.def("run_episode", &run_episode_json, py::arg("scenario_json"), py::arg("seed") = 0,
          py::arg("lambda_aff") = 1.0, py::arg("lambda_sp") = 1.0, py::arg("lambda_body") = 1.0,
          "Closed-loop episode result, as JSON.");
    m.def("run_suite", &run_suite_json, py::arg("suite_directory"), py::arg("seeds"),
          py::arg("jobs") = 1, py::arg("lambda_aff") = 1.0, py::arg("lambda_sp") = 1.0,
          py::arg("lambda_body") = 1.0, "Aggregated suite report, as JSON.");
}
