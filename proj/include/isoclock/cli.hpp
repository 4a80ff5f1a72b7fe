#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "isoclock/nuclide_db.hpp"
#include "isoclock/scenario.hpp"

namespace isoclock {

struct OutputFile {
    std::string suffix;  // appended to the output stem, e.g. "" or "_probes"
    std::string content;
};

struct RunOutput {
    std::vector<OutputFile> files;
    std::string summary;  // one line, no trailing newline
};

// Runs a subcommand in memory. Every random draw derives from `seed`, so
// equal (document, seed) pairs give byte-identical files.
RunOutput execute(Subcommand command, const ScenarioDocument& doc, const NuclideRegistry& registry,
                  std::uint64_t seed);

struct RunOptions {
    std::filesystem::path scenario;
    std::optional<std::filesystem::path> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> nuclides;
    bool quiet = false;
};

// Registry path: explicit option, then $ISOCLOCK_NUCLIDES, then the bundled file.
std::filesystem::path default_nuclides_path();

// Output path: --out, then [output] out, then <scenario stem>_<command>.csv.
std::filesystem::path output_path(Subcommand command, const ScenarioDocument& doc, const RunOptions& options);

// Full invocation: load, validate, execute, write. Returns the exit status;
// diagnostics go to `err`, the summary line to `out`.
int run(Subcommand command, const RunOptions& options, std::ostream& out, std::ostream& err);

}  // namespace isoclock
