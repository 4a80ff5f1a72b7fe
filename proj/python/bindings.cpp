#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "isoclock/burnup.hpp"
#include "isoclock/cli.hpp"
#include "isoclock/hfclock.hpp"
#include "isoclock/ladder.hpp"
#include "isoclock/nuclide_db.hpp"
#include "isoclock/scenario.hpp"
#include "isoclock/separation.hpp"

namespace py = pybind11;
using namespace isoclock;

namespace {

Subcommand subcommand(const std::string& name) {
    if (auto cmd = parse_subcommand(name)) return *cmd;
    throw DomainError("unknown subcommand: " + name);
}

NuclideId nuclide(const std::string& name) {
    if (auto id = parse_nuclide_id(name)) return *id;
    throw DomainError("bad nuclide name: " + name);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "isoclock core: neutron-capture inventories, isotope purification, hyperfine clocks, jump ladders";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<NotFoundError>(m, "NotFoundError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<FitError>(m, "FitError", base.ptr());
    py::register_exception<ScenarioError>(m, "ScenarioError", base.ptr());

    py::class_<NuclideRegistry>(m, "Registry")
        .def_static("from_text", [](const std::string& text) { return load_registry(text); })
        .def_static("from_file", [](const std::string& path) { return load_registry_file(path); })
        .def("serialize", [](const NuclideRegistry& r) { return serialize(r); })
        .def("violations",
             [](const NuclideRegistry& r) {
                 std::vector<std::tuple<std::string, std::string, std::string>> out;
                 for (const auto& v : validate_registry(r)) out.emplace_back(v.entry, v.rule, v.detail);
                 return out;
             })
        .def("names",
             [](const NuclideRegistry& r) {
                 std::vector<std::string> out;
                 for (const auto& [id, entry] : r.nuclides()) out.push_back(to_string(id));
                 return out;
             })
        .def("half_life_s",
             [](const NuclideRegistry& r, const std::string& name) { return r.lookup(name).half_life_s; })
        .def("set_capture_sigma",
             [](NuclideRegistry& r, const std::string& target, const std::string& product, double sigma) {
                 r.set_capture_sigma(nuclide(target), nuclide(product), sigma);
             })
        .def("__contains__", [](const NuclideRegistry& r, const std::string& name) {
            auto id = parse_nuclide_id(name);
            return id && r.contains(*id);
        });

    // Runs a subcommand on scenario text; returns {suffix: csv} and the summary line.
    m.def(
        "run_scenario",
        [](const std::string& command, const std::string& text, const NuclideRegistry& registry,
           std::optional<std::uint64_t> seed) {
            const auto cmd = subcommand(command);
            const auto doc = parse_scenario(text, cmd);
            RunOutput result;
            {
                py::gil_scoped_release release;
                result = execute(cmd, doc, registry, seed.value_or(doc.seed().value_or(0)));
            }
            py::dict files;
            for (const auto& f : result.files) files[py::str(f.suffix)] = f.content;
            return py::make_tuple(files, result.summary);
        },
        py::arg("command"), py::arg("text"), py::arg("registry"), py::arg("seed") = py::none());

    m.def(
        "solve_chain",
        [](const NuclideRegistry& registry, const std::string& target, double mass_g, double enrichment,
           std::vector<std::pair<double, double>> segments, int depth, std::size_t grid_points) {
            const auto id = nuclide(target);
            const std::vector<NuclideId> seeds{id};
            const auto chain = build_chain(registry, seeds, depth);
            IrradiationScenario scenario;
            for (const auto& [duration, flux] : segments) scenario.segments.push_back({duration, flux});
            scenario.initial_inventory = inventory_from_target(registry, id, mass_g, enrichment);
            scenario.grid_points = grid_points;
            const auto traj = solve_inventory(chain, scenario);
            py::dict counts;
            for (std::size_t i = 0; i < traj.nuclides.size(); ++i) counts[py::str(to_string(traj.nuclides[i]))] = traj.counts[i];
            return py::make_tuple(traj.times, counts);
        },
        py::arg("registry"), py::arg("target"), py::arg("mass_g"), py::arg("enrichment"), py::arg("segments"),
        py::arg("depth") = 2, py::arg("grid_points") = 301,
        "Returns (times_s, {nuclide: atoms}) for an irradiation given as [(duration_s, flux), ...].");

    m.def(
        "purity",
        [](const std::map<std::string, double>& composition, const std::string& product,
           const std::vector<std::pair<double, double>>& stages) {
            SeparationPlan plan;
            plan.product = nuclide(product);
            for (const auto& [name, fraction] : composition) plan.composition[nuclide(name)] = fraction;
            for (const auto& [suppression, recovery] : stages) plan.stages.push_back({suppression, recovery});
            const auto result = purity_after(plan);
            std::map<std::string, double> out;
            for (const auto& [id, fraction] : result.composition) out[to_string(id)] = fraction;
            return py::make_tuple(out, result.recovered_fraction);
        },
        py::arg("composition"), py::arg("product"), py::arg("stages"),
        "stages is [(suppression, recovery), ...]; returns (final composition, recovered product fraction).");

    m.def("stages_required", &stages_required, py::arg("per_stage"), py::arg("target"));
    m.def("required_shots", &required_shots, py::arg("target_sigma"), py::arg("nu0_hz"), py::arg("free_s"));
    m.def("estimate_age",
          [](double amplitude, double tau_s, double measured, double sigma, double confidence) {
              const auto e = estimate_age(amplitude, tau_s, measured, sigma, confidence);
              return py::make_tuple(e.value, e.lower, e.upper);
          },
          py::arg("amplitude"), py::arg("tau_s"), py::arg("measured"), py::arg("sigma"), py::arg("confidence") = 0.95);
    m.def("exp_divided_difference", [](const std::vector<double>& z) { return exp_divided_difference(z); });

    m.def(
        "memoryless_test",
        [](const std::vector<double>& decay_times, std::uint64_t seed, int resamples) {
            MemorylessResult r;
            {
                py::gil_scoped_release release;
                r = test_memoryless(decay_times, seed, resamples);
            }
            return py::make_tuple(r.ks_statistic, r.p_value, r.rate);
        },
        py::arg("decay_times"), py::arg("seed"), py::arg("resamples") = 1000,
        "Returns (ks_statistic, p_value, ml_rate).");
}
