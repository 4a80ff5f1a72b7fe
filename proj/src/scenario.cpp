#include "isoclock/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "isoclock/units.hpp"

namespace isoclock {
namespace {

using Check = std::function<std::optional<std::string>(std::string_view)>;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

std::optional<std::string> real_check(std::string_view v, double lo, double hi, bool lo_open, bool hi_open,
                                      const char* what) {
    auto x = units::parse_real(v);
    if (!x) return "expected a number, got '" + std::string(v) + "'";
    const bool below = lo_open ? !(*x > lo) : !(*x >= lo);
    const bool above = hi_open ? !(*x < hi) : !(*x <= hi);
    if (below || above) return "value " + std::string(v) + " must be " + what;
    return std::nullopt;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

const Check kReal = [](std::string_view v) { return real_check(v, -kInf, kInf, false, false, "finite"); };
const Check kPositive = [](std::string_view v) { return real_check(v, 0.0, kInf, true, true, "positive"); };
const Check kNonNegative = [](std::string_view v) { return real_check(v, 0.0, kInf, false, true, "non-negative"); };
const Check kFraction = [](std::string_view v) { return real_check(v, 0.0, 1.0, false, false, "in [0, 1]"); };
const Check kOpenFraction = [](std::string_view v) { return real_check(v, 0.0, 1.0, true, true, "in (0, 1)"); };
const Check kHalfOpenFraction = [](std::string_view v) { return real_check(v, 0.0, 1.0, false, true, "in [0, 1)"); };
const Check kAtLeastOne = [](std::string_view v) { return real_check(v, 1.0, kInf, false, true, ">= 1"); };

Check integer_at_least(long long min) {
    return [min](std::string_view v) -> std::optional<std::string> {
        auto x = units::parse_integer(v);
        if (!x) {
            // Accept integral values written in exponent form, e.g. shots=2.5e6.
            auto r = units::parse_real(v);
            if (!r || *r != std::floor(*r) || std::abs(*r) > 9e18) return "expected an integer, got '" + std::string(v) + "'";
            x = static_cast<long long>(*r);
        }
        if (*x < min) return "value " + std::string(v) + " must be >= " + std::to_string(min);
        return std::nullopt;
    };
}

const Check kSeed = [](std::string_view v) -> std::optional<std::string> {
    std::uint64_t x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || ptr != v.data() + v.size()) return "expected an unsigned 64-bit seed";
    return std::nullopt;
};

Check duration_check(bool allow_zero) {
    return [allow_zero](std::string_view v) -> std::optional<std::string> {
        auto s = units::parse_duration(v);
        if (!s) return "cannot parse duration '" + std::string(v) + "' (units: ns us ms s m h d y)";
        if (allow_zero ? !(*s >= 0.0) : !(*s > 0.0)) {
            return std::string("duration must be ") + (allow_zero ? "non-negative" : "positive");
        }
        return std::nullopt;
    };
}

const Check kNuclide = [](std::string_view v) -> std::optional<std::string> {
    if (!parse_nuclide_id(v)) return "malformed nuclide name '" + std::string(v) + "'";
    return std::nullopt;
};

const Check kNuclideFractions = [](std::string_view v) -> std::optional<std::string> {
    for (const auto item : split(v, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 2) return "expected <nuclide>:<fraction>, got '" + std::string(item) + "'";
        if (auto e = kNuclide(parts[0])) return e;
        if (auto e = kFraction(parts[1])) return e;
    }
    return std::nullopt;
};

const Check kSegments = [](std::string_view v) -> std::optional<std::string> {
    for (const auto item : split(v, ',')) {
        const auto parts = split(item, '@');
        if (parts.size() > 2) return "expected <duration>[@<flux>], got '" + std::string(item) + "'";
        if (auto e = duration_check(false)(parts[0])) return e;
        if (parts.size() == 2) {
            if (auto e = kNonNegative(parts[1])) return "segment flux: " + *e;
        }
    }
    return std::nullopt;
};

const Check kStages = [](std::string_view v) -> std::optional<std::string> {
    if (trim(v).empty()) return std::nullopt;
    for (const auto item : split(v, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() > 2) return "expected <suppression>[:<recovery>], got '" + std::string(item) + "'";
        if (auto e = kAtLeastOne(parts[0])) return "stage suppression: " + *e;
        if (parts.size() == 2) {
            if (auto e = real_check(parts[1], 0.0, 1.0, true, false, "in (0, 1]")) return "stage recovery: " + *e;
        }
    }
    return std::nullopt;
};

const Check kRealList = [](std::string_view v) -> std::optional<std::string> {
    for (const auto item : split(v, ',')) {
        if (auto e = kPositive(item)) return e;
    }
    return std::nullopt;
};

Check one_of(std::vector<std::string> options) {
    return [options = std::move(options)](std::string_view v) -> std::optional<std::string> {
        if (std::find(options.begin(), options.end(), v) != options.end()) return std::nullopt;
        std::string all;
        for (const auto& o : options) all += (all.empty() ? "" : "|") + o;
        return "expected one of " + all + ", got '" + std::string(v) + "'";
    };
}

using Schema = std::map<std::string, std::map<std::string, Check>>;

const Schema& schema() {
    static const Schema s{
        {"target",
         {{"nuclide", kNuclide},
          {"mass_g", kNonNegative},
          {"enrichment", kFraction},
          {"impurities", kNuclideFractions},
          {"depth", integer_at_least(0)}}},
        {"reactor", {{"flux", kNonNegative}, {"segments", kSegments}}},
        {"output",
         {{"grid_points", integer_at_least(2)},
          {"product", kNuclide},
          {"negligible", kFraction},
          {"seed", kSeed},
          {"out", [](std::string_view) -> std::optional<std::string> { return std::nullopt; }}}},
        {"separation",
         {{"product", kNuclide},
          {"composition", kNuclideFractions},
          {"stages", kStages},
          {"target", kAtLeastOne},
          {"per_stage", kPositive},
          {"wavelengths_nm", kRealList}}},
        {"clock",
         {{"nuclide", kNuclide},
          {"nu0_hz", kPositive},
          {"f_lower", kNonNegative},
          {"f_upper", kNonNegative},
          {"pump_nm", kPositive},
          {"detect_nm", kPositive}}},
        {"ramsey",
         {{"free", duration_check(false)},
          {"pulse", duration_check(false)},
          {"rabi_rad_s", kPositive},
          {"shots", integer_at_least(1)},
          {"target_sigma", kPositive},
          {"points", integer_at_least(1)},
          {"span", kPositive},
          {"bright_mean", kNonNegative},
          {"dark_mean", kNonNegative},
          {"threshold", integer_at_least(1)},
          {"offset", kReal}}},
        {"drift",
         {{"kind", one_of({"none", "relaxation", "predecay"})},
          {"amplitude", kReal},
          {"tau", duration_check(false)},
          {"kappa", kReal},
          {"decay_time", duration_check(false)}}},
        {"campaign",
         {{"ions", integer_at_least(2)},
          {"alpha", kOpenFraction},
          {"new_age", duration_check(true)},
          {"natural_age", duration_check(true)},
          {"inject", kReal}}},
        {"ladder",
         {{"lifetime_e1", duration_check(false)},
          {"lifetime_e2", duration_check(false)},
          {"probe_interval", duration_check(false)},
          {"horizon", duration_check(false)},
          {"epsilon", kHalfOpenFraction},
          {"cycling_rate", kPositive},
          {"efficiency", [](std::string_view v) { return real_check(v, 0.0, 1.0, true, false, "in (0, 1]"); }},
          {"window", duration_check(false)},
          {"dark_mean", kNonNegative},
          {"threshold", integer_at_least(1)},
          {"beta", kReal},
          {"probe_sigma", kPositive},
          {"runs", integer_at_least(1)},
          {"bootstrap", integer_at_least(1)}}},
    };
    return s;
}

struct Requirement {
    std::vector<std::string> sections;
    std::vector<std::pair<std::string, std::string>> keys;
};

Requirement requirement(Subcommand cmd) {
    switch (cmd) {
        case Subcommand::Chain:
            return {{"target", "reactor", "output"},
                    {{"target", "nuclide"}, {"target", "mass_g"}, {"reactor", "segments"}, {"output", "product"}}};
        case Subcommand::Separation:
            return {{"separation"}, {{"separation", "product"}, {"separation", "composition"}}};
        case Subcommand::Ramsey:
            return {{"clock", "ramsey"}, {{"clock", "nu0_hz"}, {"ramsey", "free"}, {"ramsey", "pulse"}}};
        case Subcommand::Campaign:
            return {{"clock", "ramsey", "drift", "campaign"},
                    {{"clock", "nu0_hz"}, {"ramsey", "free"}, {"ramsey", "pulse"}, {"drift", "kind"}}};
        case Subcommand::Jumps:
            return {{"ladder"},
                    {{"ladder", "lifetime_e1"},
                     {"ladder", "lifetime_e2"},
                     {"ladder", "probe_interval"},
                     {"ladder", "horizon"},
                     {"ladder", "probe_sigma"}}};
    }
    return {};
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& i : items) out += (out.empty() ? "" : ", ") + i;
    return out;
}

void check_requirements(const ScenarioDocument& doc, Subcommand cmd, std::vector<ScenarioIssue>& issues) {
    const auto req = requirement(cmd);
    for (const auto& section : req.sections) {
        if (!doc.has(section)) {
            issues.push_back({0, "missing section [" + section + "] (" + std::string(to_string(cmd)) +
                                     " requires: " + join(req.sections) + ")"});
        }
    }
    for (const auto& [section, key] : req.keys) {
        if (doc.has(section) && !doc.get(section, key)) {
            issues.push_back({0, "missing key " + key + " in [" + section + "]"});
        }
    }
    if (cmd == Subcommand::Chain && doc.has("reactor") && !doc.get("reactor", "flux")) {
        if (const auto segs = doc.get("reactor", "segments")) {
            for (const auto item : split(*segs, ',')) {
                if (item.find('@') == std::string_view::npos) {
                    issues.push_back({0, "segment '" + std::string(item) + "' has no @flux and [reactor] has no flux"});
                }
            }
        }
    }
    if ((cmd == Subcommand::Ramsey || cmd == Subcommand::Campaign) && doc.has("ramsey") &&
        !doc.get("ramsey", "shots") && !doc.get("ramsey", "target_sigma")) {
        issues.push_back({0, "[ramsey] needs shots or target_sigma"});
    }
    if (cmd == Subcommand::Campaign && doc.has("drift")) {
        const auto kind = doc.get("drift", "kind").value_or("none");
        auto need = [&](const char* key) {
            if (!doc.get("drift", key)) issues.push_back({0, "drift kind " + kind + " needs key " + key});
        };
        if (kind == "relaxation") {
            need("amplitude");
            need("tau");
        } else if (kind == "predecay") {
            need("kappa");
            need("decay_time");
        }
    }
}

// Accessors below assume the document passed schema validation.
[[noreturn]] void missing(std::string_view section, std::string_view key) {
    throw ScenarioError({{0, "missing key " + std::string(key) + " in [" + std::string(section) + "]"}});
}

std::string require(const ScenarioDocument& doc, std::string_view section, std::string_view key) {
    auto v = doc.get(section, key);
    if (!v) missing(section, key);
    return *v;
}

double real_of(std::string_view v) { return *units::parse_real(v); }
double duration_of(std::string_view v) { return *units::parse_duration(v); }
long long integer_of(std::string_view v) {
    if (auto i = units::parse_integer(v)) return *i;
    return static_cast<long long>(*units::parse_real(v));
}

double real_or(const ScenarioDocument& doc, std::string_view section, std::string_view key, double fallback) {
    auto v = doc.get(section, key);
    return v ? real_of(*v) : fallback;
}

double duration_or(const ScenarioDocument& doc, std::string_view section, std::string_view key, double fallback) {
    auto v = doc.get(section, key);
    return v ? duration_of(*v) : fallback;
}

std::map<NuclideId, double> nuclide_fractions(std::string_view v) {
    std::map<NuclideId, double> out;
    for (const auto item : split(v, ',')) {
        const auto parts = split(item, ':');
        out[*parse_nuclide_id(parts[0])] += real_of(parts[1]);
    }
    return out;
}

}  // namespace

std::string_view to_string(Subcommand cmd) {
    switch (cmd) {
        case Subcommand::Chain: return "chain";
        case Subcommand::Separation: return "separation";
        case Subcommand::Ramsey: return "ramsey";
        case Subcommand::Campaign: return "campaign";
        case Subcommand::Jumps: return "jumps";
    }
    return "?";
}

std::optional<Subcommand> parse_subcommand(std::string_view name) {
    for (auto cmd : {Subcommand::Chain, Subcommand::Separation, Subcommand::Ramsey, Subcommand::Campaign,
                     Subcommand::Jumps}) {
        if (to_string(cmd) == name) return cmd;
    }
    return std::nullopt;
}

ScenarioError::ScenarioError(std::vector<ScenarioIssue> issues)
    : Error([&] {
          std::string msg;
          for (const auto& i : issues) {
              if (!msg.empty()) msg += '\n';
              if (i.line) msg += "line " + std::to_string(i.line) + ": ";
              msg += i.message;
          }
          return msg;
      }()),
      issues_(std::move(issues)) {}

bool ScenarioDocument::has(std::string_view section) const { return sections.contains(std::string(section)); }

std::optional<std::string> ScenarioDocument::get(std::string_view section, std::string_view key) const {
    const auto s = sections.find(std::string(section));
    if (s == sections.end()) return std::nullopt;
    const auto k = s->second.find(std::string(key));
    if (k == s->second.end()) return std::nullopt;
    return k->second.text;
}

std::optional<std::uint64_t> ScenarioDocument::seed() const {
    auto v = get("output", "seed");
    if (!v) return std::nullopt;
    std::uint64_t x = 0;
    std::from_chars(v->data(), v->data() + v->size(), x);
    return x;
}

std::optional<std::string> ScenarioDocument::output_path() const { return get("output", "out"); }

ScenarioDocument parse_scenario(std::string_view text, std::optional<Subcommand> command) {
    ScenarioDocument doc;
    std::vector<ScenarioIssue> issues;
    const auto& known = schema();

    std::string current;
    bool section_known = false;
    std::size_t line_no = 0;
    for (auto raw : split(text, '\n')) {
        ++line_no;
        // Comments: '#' anywhere, ';' at line start.
        if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = trim(raw.substr(0, hash));
        if (raw.empty() || raw.front() == ';') continue;
        if (raw.front() == '[') {
            if (raw.back() != ']') {
                issues.push_back({line_no, "malformed section header '" + std::string(raw) + "'"});
                section_known = false;
                continue;
            }
            current = std::string(trim(raw.substr(1, raw.size() - 2)));
            section_known = known.contains(current);
            if (!section_known) issues.push_back({line_no, "unknown section [" + current + "]"});
            else if (doc.has(current)) issues.push_back({line_no, "duplicate section [" + current + "]"});
            else doc.sections[current];
            continue;
        }
        const auto eq = raw.find('=');
        if (eq == std::string_view::npos) {
            issues.push_back({line_no, "expected key=value, got '" + std::string(raw) + "'"});
            continue;
        }
        const std::string key(trim(raw.substr(0, eq)));
        const std::string value(trim(raw.substr(eq + 1)));
        if (current.empty()) {
            issues.push_back({line_no, "key " + key + " appears before any section"});
            continue;
        }
        if (!section_known) continue;
        const auto& keys = known.at(current);
        const auto check = keys.find(key);
        if (check == keys.end()) {
            issues.push_back({line_no, "unknown key " + key + " in [" + current + "]"});
            continue;
        }
        if (auto problem = check->second(value)) {
            issues.push_back({line_no, "[" + current + "] " + key + ": " + *problem});
            continue;
        }
        auto& slot = doc.sections[current];
        if (slot.contains(key)) {
            issues.push_back({line_no, "duplicate key " + key + " in [" + current + "]"});
            continue;
        }
        slot[key] = {value, line_no};
    }

    if (command) check_requirements(doc, *command, issues);
    if (!issues.empty()) throw ScenarioError(std::move(issues));
    return doc;
}

ScenarioDocument load_scenario_file(const std::string& path, std::optional<Subcommand> command) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open scenario file " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str(), command);
}

ChainSetup chain_setup(const ScenarioDocument& doc, const NuclideRegistry& registry) {
    ChainSetup out;
    out.target = *parse_nuclide_id(require(doc, "target", "nuclide"));
    out.depth = static_cast<int>(integer_of(doc.get("target", "depth").value_or("2")));
    const double mass = real_of(require(doc, "target", "mass_g"));
    const double enrichment = real_or(doc, "target", "enrichment", 1.0);
    std::map<NuclideId, double> impurities;
    if (auto v = doc.get("target", "impurities")) impurities = nuclide_fractions(*v);

    out.seeds.push_back(out.target);
    for (const auto& [id, f] : impurities) {
        if (id != out.target) out.seeds.push_back(id);
    }
    out.scenario.initial_inventory = inventory_from_target(registry, out.target, mass, enrichment, impurities);

    const auto default_flux = doc.get("reactor", "flux");
    const auto segments = require(doc, "reactor", "segments");
    for (const auto item : split(segments, ',')) {
        const auto parts = split(item, '@');
        FluxSegment seg;
        seg.duration_s = duration_of(parts[0]);
        if (parts.size() == 2) seg.flux = real_of(parts[1]);
        else if (default_flux) seg.flux = real_of(*default_flux);
        else throw ScenarioError({{0, "segment '" + std::string(item) + "' has no flux"}});
        out.scenario.segments.push_back(seg);
    }
    out.scenario.grid_points = static_cast<std::size_t>(integer_of(doc.get("output", "grid_points").value_or("301")));
    out.product = *parse_nuclide_id(require(doc, "output", "product"));
    out.negligible = real_or(doc, "output", "negligible", 0.05);
    return out;
}

SeparationSetup separation_setup(const ScenarioDocument& doc) {
    SeparationSetup out;
    out.plan.product = *parse_nuclide_id(require(doc, "separation", "product"));
    out.plan.composition = nuclide_fractions(require(doc, "separation", "composition"));
    if (auto v = doc.get("separation", "stages"); v && !trim(*v).empty()) {
        for (const auto item : split(*v, ',')) {
            const auto parts = split(item, ':');
            out.plan.stages.push_back({real_of(parts[0]), parts.size() == 2 ? real_of(parts[1]) : 1.0});
        }
    }
    if (auto v = doc.get("separation", "wavelengths_nm")) {
        for (const auto item : split(*v, ',')) out.plan.wavelengths_nm.push_back(real_of(item));
    }
    if (auto v = doc.get("separation", "target")) out.target_suppression = real_of(*v);
    if (auto v = doc.get("separation", "per_stage")) out.per_stage = real_of(*v);
    return out;
}

HyperfineClockSpec clock_setup(const ScenarioDocument& doc) {
    HyperfineClockSpec spec;
    if (auto v = doc.get("clock", "nuclide")) spec.nuclide = *parse_nuclide_id(*v);
    spec.nu0_hz = real_of(require(doc, "clock", "nu0_hz"));
    spec.f_lower = real_or(doc, "clock", "f_lower", 0.0);
    spec.f_upper = real_or(doc, "clock", "f_upper", spec.f_lower + 1.0);
    spec.pump_nm = real_or(doc, "clock", "pump_nm", 0.0);
    spec.detect_nm = real_or(doc, "clock", "detect_nm", 0.0);
    validate(spec);
    return spec;
}

RamseyConfig ramsey_setup(const ScenarioDocument& doc, const HyperfineClockSpec& clock) {
    const double free = duration_of(require(doc, "ramsey", "free"));
    const double pulse = duration_of(require(doc, "ramsey", "pulse"));
    std::int64_t shots = 0;
    if (auto v = doc.get("ramsey", "shots")) shots = integer_of(*v);
    else shots = required_shots(real_of(require(doc, "ramsey", "target_sigma")), clock.nu0_hz, free);

    auto cfg = RamseyConfig::standard(free, pulse, shots);
    if (auto v = doc.get("ramsey", "rabi_rad_s")) cfg.rabi_rad_s = real_of(*v);
    if (auto v = doc.get("ramsey", "points")) cfg.grid_points = static_cast<std::size_t>(integer_of(*v));
    if (auto v = doc.get("ramsey", "span")) cfg.span = real_of(*v);
    if (doc.get("ramsey", "bright_mean")) {
        cfg.detection = DetectionModel{real_of(*doc.get("ramsey", "bright_mean")),
                                       real_or(doc, "ramsey", "dark_mean", 0.0),
                                       static_cast<int>(integer_of(doc.get("ramsey", "threshold").value_or("1")))};
    }
    validate(cfg);
    return cfg;
}

double ramsey_true_offset(const ScenarioDocument& doc) { return real_or(doc, "ramsey", "offset", 0.0); }

DriftModel drift_setup(const ScenarioDocument& doc) {
    const auto kind = doc.get("drift", "kind").value_or("none");
    if (kind == "relaxation") {
        return DriftModel::relaxation(real_of(require(doc, "drift", "amplitude")),
                                      duration_of(require(doc, "drift", "tau")));
    }
    if (kind == "predecay") {
        return DriftModel::predecay(real_of(require(doc, "drift", "kappa")),
                                    duration_of(require(doc, "drift", "decay_time")));
    }
    return DriftModel::none();
}

CampaignConfig campaign_setup(const ScenarioDocument& doc) {
    CampaignConfig c;
    c.ions_per_ensemble = static_cast<std::size_t>(integer_of(doc.get("campaign", "ions").value_or("10")));
    c.alpha = real_or(doc, "campaign", "alpha", 0.05);
    c.new_age_s = duration_or(doc, "campaign", "new_age", 0.0);
    c.natural_age_s = duration_or(doc, "campaign", "natural_age", 0.0);
    c.injected_fractional = real_or(doc, "campaign", "inject", 0.0);
    return c;
}

LadderSetup ladder_setup(const ScenarioDocument& doc) {
    LadderSetup out;
    auto& c = out.config;
    c.lifetime_e1_s = duration_of(require(doc, "ladder", "lifetime_e1"));
    c.lifetime_e2_s = duration_of(require(doc, "ladder", "lifetime_e2"));
    c.probe_interval_s = duration_of(require(doc, "ladder", "probe_interval"));
    c.horizon_s = duration_of(require(doc, "ladder", "horizon"));
    c.probe_sigma_frac = real_of(require(doc, "ladder", "probe_sigma"));
    c.probe_perturbation = real_or(doc, "ladder", "epsilon", 0.0);
    c.cycling_rate_per_s = real_or(doc, "ladder", "cycling_rate", c.cycling_rate_per_s);
    c.collection_efficiency = real_or(doc, "ladder", "efficiency", c.collection_efficiency);
    c.window_s = duration_or(doc, "ladder", "window", c.window_s);
    c.dark_mean = real_or(doc, "ladder", "dark_mean", c.dark_mean);
    if (auto v = doc.get("ladder", "threshold")) c.threshold = static_cast<int>(integer_of(*v));
    c.aging_beta_per_s = real_or(doc, "ladder", "beta", 0.0);
    if (auto v = doc.get("ladder", "runs")) out.runs = static_cast<std::size_t>(integer_of(*v));
    if (auto v = doc.get("ladder", "bootstrap")) out.bootstrap = static_cast<int>(integer_of(*v));
    validate(c);
    return out;
}

}  // namespace isoclock
