#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "isoclock/burnup.hpp"
#include "isoclock/error.hpp"
#include "isoclock/hfclock.hpp"
#include "isoclock/ladder.hpp"
#include "isoclock/separation.hpp"

namespace isoclock {

enum class Subcommand { Chain, Separation, Ramsey, Campaign, Jumps };

std::string_view to_string(Subcommand cmd);
std::optional<Subcommand> parse_subcommand(std::string_view name);

struct ScenarioIssue {
    std::size_t line = 0;  // 0 when the issue is not tied to a line
    std::string message;
};

// Carries every problem found in a document, not just the first.
class ScenarioError : public Error {
public:
    explicit ScenarioError(std::vector<ScenarioIssue> issues);
    const std::vector<ScenarioIssue>& issues() const noexcept { return issues_; }

private:
    std::vector<ScenarioIssue> issues_;
};

struct ScenarioValue {
    std::string text;
    std::size_t line = 0;
};

// Sectioned key=value text:
//   [reactor]
//   flux=1.0e13
//   segments=5d@1.0e13,25d
// Sections: target reactor output separation clock ramsey drift campaign ladder.
struct ScenarioDocument {
    std::map<std::string, std::map<std::string, ScenarioValue>> sections;

    bool has(std::string_view section) const;
    std::optional<std::string> get(std::string_view section, std::string_view key) const;
    std::optional<std::uint64_t> seed() const;
    std::optional<std::string> output_path() const;
};

// Parses and validates syntax, known sections/keys and value formats. When
// `command` is given, also checks the sections and keys it requires.
// Throws ScenarioError listing all issues.
ScenarioDocument parse_scenario(std::string_view text, std::optional<Subcommand> command = std::nullopt);
ScenarioDocument load_scenario_file(const std::string& path, std::optional<Subcommand> command = std::nullopt);

struct ChainSetup {
    NuclideId target;
    int depth = 2;
    std::vector<NuclideId> seeds;
    IrradiationScenario scenario;
    NuclideId product;
    double negligible = 0.05;
};

ChainSetup chain_setup(const ScenarioDocument& doc, const NuclideRegistry& registry);

struct SeparationSetup {
    SeparationPlan plan;
    std::optional<double> target_suppression;
    std::optional<double> per_stage;
};

SeparationSetup separation_setup(const ScenarioDocument& doc);
HyperfineClockSpec clock_setup(const ScenarioDocument& doc);
RamseyConfig ramsey_setup(const ScenarioDocument& doc, const HyperfineClockSpec& clock);
double ramsey_true_offset(const ScenarioDocument& doc);
DriftModel drift_setup(const ScenarioDocument& doc);
CampaignConfig campaign_setup(const ScenarioDocument& doc);

struct LadderSetup {
    JumpLadderConfig config;
    std::size_t runs = 100;
    int bootstrap = 1000;
};

LadderSetup ladder_setup(const ScenarioDocument& doc);

}  // namespace isoclock
