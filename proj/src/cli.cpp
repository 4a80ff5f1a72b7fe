#include "isoclock/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "isoclock/burnup.hpp"
#include "isoclock/hfclock.hpp"
#include "isoclock/ladder.hpp"
#include "isoclock/rng.hpp"
#include "isoclock/separation.hpp"
#include "isoclock/units.hpp"

#ifndef ISOCLOCK_DATA_DIR
#define ISOCLOCK_DATA_DIR "data"
#endif

namespace isoclock {
namespace {

using units::format_double;

std::string header(std::uint64_t seed) { return "# seed=" + std::to_string(seed) + "\n"; }

std::string fixed(double v, int digits = 6) {
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

RunOutput run_chain(const ScenarioDocument& doc, const NuclideRegistry& registry, std::uint64_t seed) {
    const auto setup = chain_setup(doc, registry);
    const auto chain = build_chain(registry, setup.seeds, setup.depth);
    if (!chain.contains(setup.product)) {
        throw NotFoundError("product " + to_string(setup.product) + " is not reachable from the target");
    }
    const auto traj = solve_inventory(chain, setup.scenario);

    std::string csv = header(seed) + "time_s";
    for (const auto& id : traj.nuclides) csv += "," + to_string(id);
    csv += '\n';
    for (std::size_t t = 0; t < traj.times.size(); ++t) {
        csv += format_double(traj.times[t]);
        for (const auto& series : traj.counts) csv += "," + format_double(series[t]);
        csv += '\n';
    }

    const auto report = yield_report(chain, traj, setup.product, setup.negligible);
    std::string summary = "chain: " + to_string(report.nuclide) + " " + fixed(report.atoms) + " atoms (" +
                          fixed(report.mass_g * 1e3) + " mg) after " +
                          fixed(traj.times.back() / units::kSecondsPerDay) + " d, nonlinearity " +
                          fixed(100.0 * report.linearity, 3) + "%";
    for (const auto& c : report.contaminants) {
        summary += ", " + to_string(c.nuclide) + " ratio " + fixed(100.0 * c.ratio, 3) + "% (" +
                   (c.negligible ? "negligible" : "NOT negligible") + ")";
    }
    return {{{"", std::move(csv)}}, std::move(summary)};
}

RunOutput run_separation(const ScenarioDocument& doc, std::uint64_t seed) {
    const auto setup = separation_setup(doc);
    const auto result = purity_after(setup.plan);

    std::string csv = header(seed) + "nuclide,initial_fraction,final_fraction,role\n";
    for (const auto& [id, initial] : setup.plan.composition) {
        const auto final_it = result.composition.find(id);
        csv += to_string(id) + "," + format_double(initial) + "," +
               format_double(final_it == result.composition.end() ? 0.0 : final_it->second) + "," +
               (id == setup.plan.product ? "product" : "contaminant") + "\n";
    }

    double residual = 0.0;
    for (const auto& [id, f] : result.composition) {
        if (id != setup.plan.product) residual += f;
    }
    std::string summary = "separation: " + to_string(setup.plan.product) + " residual contaminants " +
                          fixed(residual) + ", suppression " +
                          fixed(cascade_suppression(setup.plan)) + " over " +
                          std::to_string(setup.plan.stages.size()) + " stage(s), recovery " +
                          fixed(result.recovered_fraction);
    if (setup.target_suppression && setup.per_stage) {
        summary += ", " + std::to_string(stages_required(*setup.per_stage, *setup.target_suppression)) +
                   " stage(s) of " + fixed(*setup.per_stage) + " reach " + fixed(*setup.target_suppression);
    }
    return {{{"", std::move(csv)}}, std::move(summary)};
}

RunOutput run_ramsey(const ScenarioDocument& doc, std::uint64_t seed) {
    const auto clock = clock_setup(doc);
    const auto cfg = ramsey_setup(doc, clock);
    const double offset = ramsey_true_offset(doc);
    const auto fringe = simulate_fringe(clock, cfg, offset, derive_seed(seed, SeedStream::Fringe, 0));
    const auto estimate = estimate_frequency(fringe);

    std::string csv = header(seed) + "detuning_hz,successes,shots\n";
    for (std::size_t i = 0; i < fringe.detuning_rad_s.size(); ++i) {
        csv += format_double(fringe.detuning_rad_s[i] / (2.0 * std::numbers::pi)) + "," +
               format_double(fringe.successes[i]) + "," + std::to_string(fringe.shots[i]) + "\n";
    }
    std::string summary = "ramsey: " + to_string(clock.nuclide) + " fractional offset " + fixed(estimate.fractional) +
                          " +- " + fixed(estimate.sigma_fractional) + " (" + std::to_string(cfg.shots) +
                          " shots, T=" + fixed(cfg.free_s) + " s, true " + fixed(offset) + ")";
    return {{{"", std::move(csv)}}, std::move(summary)};
}

RunOutput run_campaign_cmd(const ScenarioDocument& doc, std::uint64_t seed) {
    const auto clock = clock_setup(doc);
    const auto cfg = ramsey_setup(doc, clock);
    const auto drift = drift_setup(doc);
    const auto campaign = campaign_setup(doc);
    const auto result = run_campaign(clock, cfg, drift, campaign, seed);

    std::vector<const Reading*> ordered;
    for (std::size_t i = 0; i < result.new_readings.size(); ++i) {
        ordered.push_back(&result.new_readings[i]);
        ordered.push_back(&result.natural_readings[i]);
    }
    std::string csv = header(seed) + "ion_id,epoch_s,estimate,sigma\n";
    for (const auto* r : ordered) {
        csv += r->ion_id + "," + format_double(r->epoch_s) + "," + format_double(r->fractional) + "," +
               format_double(r->sigma) + "\n";
    }
    const auto& c = result.comparison;
    std::string summary = "campaign: new - natural = " + fixed(c.delta_fractional) + " +- " +
                          fixed(c.sigma_fractional) + ", z=" + fixed(c.z_score, 4) + ", " +
                          (c.distinguishable ? "distinguishable" : "not distinguishable") + " at alpha=" +
                          fixed(c.alpha);
    return {{{"", std::move(csv)}}, std::move(summary)};
}

RunOutput run_jumps(const ScenarioDocument& doc, std::uint64_t seed) {
    const auto setup = ladder_setup(doc);
    const auto runs = simulate_runs(setup.config, setup.runs, seed);

    std::string decays = header(seed) + "run_id,decay_time_s\n";
    std::string probes = header(seed) + "run_id,t_probe_s,freq_frac,sigma\n";
    std::vector<double> times;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto id = std::to_string(i);
        decays += id + "," + format_double(runs[i].decay_time_s) + "\n";
        times.push_back(runs[i].decay_time_s);
        for (const auto& p : runs[i].probes) {
            probes += id + "," + format_double(p.t_probe_s) + "," + format_double(p.freq_frac) + "," +
                      format_double(p.sigma) + "\n";
        }
    }

    const double mean = std::accumulate(times.begin(), times.end(), 0.0) / static_cast<double>(times.size());
    std::string summary = "jumps: " + std::to_string(runs.size()) + " runs, mean decay time " + fixed(mean) + " s";
    if (times.size() >= 10) {
        // Thread count does not affect the result, so leave it to the hardware.
        const auto m = test_memoryless(times, seed, setup.bootstrap);
        summary += ", memoryless KS p=" + fixed(m.p_value, 4);
    }
    std::size_t probe_count = 0;
    for (const auto& r : runs) probe_count += r.probes.size();
    if (probe_count >= 2 && setup.config.probe_sigma_frac > 0.0) {
        const auto aging = detect_aging(runs);
        summary += ", aging beta " + fixed(aging.beta) + " +- " + fixed(aging.sigma) + " /s (z=" +
                   fixed(aging.z, 4) + ")";
    }
    return {{{"", std::move(decays)}, {"_probes", std::move(probes)}}, std::move(summary)};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out.flush()) throw Error("failed writing " + path.string());
}

}  // namespace

RunOutput execute(Subcommand command, const ScenarioDocument& doc, const NuclideRegistry& registry,
                  std::uint64_t seed) {
    switch (command) {
        case Subcommand::Chain: return run_chain(doc, registry, seed);
        case Subcommand::Separation: return run_separation(doc, seed);
        case Subcommand::Ramsey: return run_ramsey(doc, seed);
        case Subcommand::Campaign: return run_campaign_cmd(doc, seed);
        case Subcommand::Jumps: return run_jumps(doc, seed);
    }
    throw Error("unknown subcommand");
}

std::filesystem::path default_nuclides_path() {
    if (const char* env = std::getenv("ISOCLOCK_NUCLIDES"); env && *env) return env;
    return std::filesystem::path(ISOCLOCK_DATA_DIR) / "nuclides.dat";
}

std::filesystem::path output_path(Subcommand command, const ScenarioDocument& doc, const RunOptions& options) {
    if (options.out) return *options.out;
    if (auto p = doc.output_path()) return *p;
    return options.scenario.stem().string() + "_" + std::string(to_string(command)) + ".csv";
}

int run(Subcommand command, const RunOptions& options, std::ostream& out, std::ostream& err) {
    try {
        const auto doc = load_scenario_file(options.scenario.string(), command);
        NuclideRegistry registry;
        if (command == Subcommand::Chain) {
            registry = load_registry_file(options.nuclides ? options.nuclides->string() : default_nuclides_path().string());
        }
        const std::uint64_t seed = options.seed.value_or(doc.seed().value_or(0));
        const auto result = execute(command, doc, registry, seed);

        const auto base = output_path(command, doc, options);
        for (const auto& file : result.files) {
            auto path = base;
            if (!file.suffix.empty()) {
                path = base.parent_path() / (base.stem().string() + file.suffix + base.extension().string());
            }
            write_file(path, file.content);
            if (!options.quiet) err << "wrote " << path.string() << "\n";
        }
        if (!options.quiet) out << result.summary << "\n";
        return 0;
    } catch (const ScenarioError& e) {
        err << options.scenario.string() << ": " << e.issues().size() << " error(s)\n";
        for (const auto& issue : e.issues()) {
            err << "  " << options.scenario.string();
            if (issue.line) err << ":" << issue.line;
            err << ": " << issue.message << "\n";
        }
    } catch (const ParseError& e) {
        err << "nuclide data: " << e.what() << "\n";
    } catch (const std::exception& e) {
        err << to_string(command) << ": " << e.what() << "\n";
    }
    return 1;
}

}  // namespace isoclock
