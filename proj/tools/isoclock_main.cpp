#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "isoclock/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Isotope-clock artifact: burnup chains, separation, Ramsey clocks and quantum-jump ladders"};
    app.require_subcommand(1);

    isoclock::RunOptions options;
    std::string out, nuclides, format = "csv";
    std::uint64_t seed = 0;

    struct Entry {
        isoclock::Subcommand command;
        const char* help;
    };
    const Entry entries[] = {
        {isoclock::Subcommand::Chain, "Solve a capture/decay chain under a flux history"},
        {isoclock::Subcommand::Separation, "Apply a separation cascade to a composition"},
        {isoclock::Subcommand::Ramsey, "Simulate and fit one Ramsey fringe"},
        {isoclock::Subcommand::Campaign, "Compare new and natural ion ensembles"},
        {isoclock::Subcommand::Jumps, "Simulate quantum-jump ladder runs"},
    };
    for (const auto& entry : entries) {
        auto* sub = app.add_subcommand(std::string(isoclock::to_string(entry.command)), entry.help);
        sub->add_option("scenario", options.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "Output CSV path (default <scenario>_<command>.csv)");
        sub->add_option("--seed", seed, "Master seed (overrides [output] seed)");
        sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv"}));
        sub->add_flag("--quiet", options.quiet, "Suppress the summary line");
        sub->add_option("--nuclides", nuclides, "Nuclide data file")->check(CLI::ExistingFile);
    }

    CLI11_PARSE(app, argc, argv);

    for (const auto& entry : entries) {
        auto* sub = app.get_subcommand(std::string(isoclock::to_string(entry.command)));
        if (!sub->parsed()) continue;
        if (sub->count("--out")) options.out = out;
        if (sub->count("--seed")) options.seed = seed;
        if (sub->count("--nuclides")) options.nuclides = nuclides;
        return isoclock::run(entry.command, options, std::cout, std::cerr);
    }
    return 1;
}
