#include "isoclock/nuclide_db.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "isoclock/error.hpp"
#include "isoclock/units.hpp"

namespace isoclock {
namespace {

constexpr std::array<std::string_view, 119> kElements{
    "n",  "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si",
    "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu",
    "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru",
    "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
    "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",
    "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac",
    "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf",
    "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
};

constexpr double kBranchingTolerance = 1e-9;

void check_identity(const NuclideId& id) {
    if (id.z < 1 || id.z >= static_cast<int>(kElements.size()) || id.n < 0) {
        throw DomainError("malformed nuclide identity (z=" + std::to_string(id.z) +
                          ", n=" + std::to_string(id.n) + ")");
    }
}

struct Token {
    std::string_view text;
    std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        if (i >= line.size()) break;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        tokens.push_back({line.substr(start, i - start), start + 1});
    }
    return tokens;
}

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
        parts.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

std::optional<DecayMode> parse_mode(std::string_view text) {
    if (text == "beta-" || text == "B-" || text == "b-") return DecayMode::BetaMinus;
    if (text == "IT" || text == "it") return DecayMode::IsomericTransition;
    if (text == "EC" || text == "ec") return DecayMode::ElectronCapture;
    return std::nullopt;
}

std::optional<int> parse_twice_spin(std::string_view text) {
    if (const auto slash = text.find('/'); slash != std::string_view::npos) {
        if (text.substr(slash + 1) != "2") return std::nullopt;
        auto num = units::parse_integer(text.substr(0, slash));
        if (!num || *num < 0) return std::nullopt;
        return static_cast<int>(*num);
    }
    auto value = units::parse_real(text);
    if (!value || *value < 0.0) return std::nullopt;
    const double twice = 2.0 * *value;
    if (twice != std::round(twice)) return std::nullopt;
    return static_cast<int>(twice);
}

std::string format_spin(int twice_spin) {
    if (twice_spin % 2 == 0) return std::to_string(twice_spin / 2);
    return std::to_string(twice_spin) + "/2";
}

struct PendingNuclide {
    Nuclide value;
    std::string provenance;
    std::size_t line;
};

struct PendingCapture {
    CaptureReaction value;
    std::string provenance;
    std::size_t line;
};

class RecordParser {
public:
    RecordParser(std::size_t line_no, std::vector<Token> tokens) : line_(line_no), tokens_(std::move(tokens)) {}

    [[noreturn]] void fail(const std::string& what, std::size_t column) const {
        throw ParseError(what, line_, column);
    }

    NuclideId name_at(std::size_t index) const {
        const auto& tok = tokens_.at(index);
        auto id = parse_nuclide_id(tok.text);
        if (!id) fail("malformed nuclide name '" + std::string(tok.text) + "'", tok.column);
        return *id;
    }

    Nuclide parse_nuclide() const {
        if (tokens_.size() < 2) fail("NUCLIDE record needs a name", tokens_[0].column);
        const NuclideId named = name_at(1);
        Nuclide out;
        out.id.isomer = named.isomer;
        bool have_z = false, have_n = false, have_half = false, have_spin = false, have_moment = false;
        for (std::size_t i = 2; i < tokens_.size(); ++i) {
            const auto& tok = tokens_[i];
            const auto eq = tok.text.find('=');
            if (eq == std::string_view::npos) fail("expected key=value, got '" + std::string(tok.text) + "'", tok.column);
            const auto key = tok.text.substr(0, eq);
            const auto value = tok.text.substr(eq + 1);
            const std::size_t vcol = tok.column + eq + 1;
            if (key == "z" || key == "n") {
                auto v = units::parse_integer(value);
                if (!v) fail("bad integer for " + std::string(key), vcol);
                (key == "z" ? out.id.z : out.id.n) = static_cast<int>(*v);
                (key == "z" ? have_z : have_n) = true;
            } else if (key == "halflife") {
                have_half = true;
                if (value == "stable") {
                    out.half_life_s.reset();
                    continue;
                }
                auto secs = units::parse_duration(value);
                if (!secs) fail("bad half-life '" + std::string(value) + "'", vcol);
                if (!(*secs > 0.0)) fail("half-life must be positive", vcol);
                out.half_life_s = *secs;
            } else if (key == "spin") {
                auto s = parse_twice_spin(value);
                if (!s) fail("spin must be a non-negative multiple of 1/2", vcol);
                out.twice_spin = *s;
                have_spin = true;
            } else if (key == "moment") {
                auto m = units::parse_real(value);
                if (!m) fail("bad magnetic moment", vcol);
                out.magnetic_moment_nm = *m;
                have_moment = true;
            } else if (key == "mass") {
                auto m = units::parse_real(value);
                if (!m || *m <= 0.0) fail("bad atomic mass", vcol);
                out.atomic_mass_u = *m;
            } else if (key == "decay") {
                out.decays = parse_decays(value, vcol);
            } else {
                fail("unknown key '" + std::string(key) + "'", tok.column);
            }
        }
        if (!have_z || !have_n || !have_half || !have_spin || !have_moment) {
            fail("NUCLIDE record requires z, n, halflife, spin and moment", tokens_[0].column);
        }
        if (out.id.z != named.z || out.id.n != named.n) {
            fail("name " + std::string(tokens_[1].text) + " disagrees with z/n", tokens_[1].column);
        }
        return out;
    }

    CaptureReaction parse_capture() const {
        if (tokens_.size() < 5 || tokens_[2].text != "->") {
            fail("expected 'CAPTURE <target> -> <product> sigma=<value>b'", tokens_[0].column);
        }
        CaptureReaction out;
        out.target = name_at(1);
        out.product = name_at(3);
        bool have_sigma = false;
        for (std::size_t i = 4; i < tokens_.size(); ++i) {
            const auto& tok = tokens_[i];
            const auto eq = tok.text.find('=');
            if (eq == std::string_view::npos) fail("expected key=value, got '" + std::string(tok.text) + "'", tok.column);
            const auto key = tok.text.substr(0, eq);
            auto value = tok.text.substr(eq + 1);
            const std::size_t vcol = tok.column + eq + 1;
            if (key == "sigma") {
                if (!value.ends_with('b')) fail("cross section needs a 'b' (barn) suffix", vcol);
                value.remove_suffix(1);
                auto s = units::parse_real(value);
                if (!s) fail("bad cross section", vcol);
                if (!(*s > 0.0)) fail("cross section must be positive", vcol);
                out.sigma_barns = *s;
                have_sigma = true;
            } else if (key == "ground") {
                auto g = units::parse_real(value);
                if (!g || *g < 0.0 || *g > 1.0) fail("ground fraction must lie in [0, 1]", vcol);
                out.ground_fraction = *g;
            } else {
                fail("unknown key '" + std::string(key) + "'", tok.column);
            }
        }
        if (!have_sigma) fail("CAPTURE record requires sigma", tokens_[0].column);
        return out;
    }

private:
    std::vector<DecayBranch> parse_decays(std::string_view value, std::size_t column) const {
        std::vector<DecayBranch> out;
        double sum = 0.0;
        for (const auto part : split(value, ',')) {
            const auto fields = split(part, ':');
            if (fields.size() != 3) fail("decay entries are <mode>:<daughter>:<fraction>", column);
            auto mode = parse_mode(fields[0]);
            if (!mode) fail("unknown decay mode '" + std::string(fields[0]) + "'", column);
            auto daughter = parse_nuclide_id(fields[1]);
            if (!daughter) fail("malformed daughter '" + std::string(fields[1]) + "'", column);
            auto fraction = units::parse_real(fields[2]);
            if (!fraction || *fraction < 0.0 || *fraction > 1.0) fail("branching fraction must lie in [0, 1]", column);
            out.push_back({*mode, *daughter, *fraction});
            sum += *fraction;
        }
        if (std::abs(sum - 1.0) > kBranchingTolerance) {
            std::ostringstream msg;
            msg << "branching sum " << sum;
            fail(msg.str(), column);
        }
        return out;
    }

    std::size_t line_;
    std::vector<Token> tokens_;
};

}  // namespace

std::optional<int> element_z(std::string_view symbol) {
    for (std::size_t z = 1; z < kElements.size(); ++z) {
        if (kElements[z] == symbol) return static_cast<int>(z);
    }
    return std::nullopt;
}

std::string to_string(const NuclideId& id) {
    check_identity(id);
    std::string out(kElements[static_cast<std::size_t>(id.z)]);
    out += '-';
    out += std::to_string(id.mass_number());
    if (id.isomer) out += 'm';
    return out;
}

std::optional<NuclideId> parse_nuclide_id(std::string_view name) {
    const auto dash = name.find('-');
    if (dash == std::string_view::npos || dash == 0) return std::nullopt;
    auto z = element_z(name.substr(0, dash));
    if (!z) return std::nullopt;
    auto rest = name.substr(dash + 1);
    bool isomer = false;
    if (rest.ends_with('m')) {
        isomer = true;
        rest.remove_suffix(1);
    }
    auto a = units::parse_integer(rest);
    if (!a || rest.front() == '+' || *a < *z) return std::nullopt;
    return NuclideId{*z, static_cast<int>(*a) - *z, isomer};
}

std::string_view to_string(DecayMode mode) {
    switch (mode) {
        case DecayMode::BetaMinus: return "beta-";
        case DecayMode::IsomericTransition: return "IT";
        case DecayMode::ElectronCapture: return "EC";
    }
    return "?";
}

double Nuclide::decay_constant() const noexcept {
    return half_life_s ? std::numbers::ln2 / *half_life_s : 0.0;
}

double Nuclide::mass_u() const noexcept {
    return atomic_mass_u > 0.0 ? atomic_mass_u : static_cast<double>(id.mass_number());
}

void NuclideRegistry::add(Nuclide nuclide, std::string provenance) {
    check_identity(nuclide.id);
    const auto key = nuclide.id;
    if (nuclides_.contains(key)) throw DomainError("duplicate nuclide " + to_string(key));
    nuclides_.emplace(key, RegistryEntry<Nuclide>{std::move(nuclide), std::move(provenance)});
}

void NuclideRegistry::add(CaptureReaction capture, std::string provenance) {
    check_identity(capture.target);
    check_identity(capture.product);
    const CaptureKey key{capture.target, capture.product};
    if (captures_.contains(key)) {
        throw DomainError("duplicate capture " + to_string(capture.target) + " -> " + to_string(capture.product));
    }
    captures_.emplace(key, RegistryEntry<CaptureReaction>{capture, std::move(provenance)});
}

const Nuclide* NuclideRegistry::find(const NuclideId& id) const noexcept {
    const auto it = nuclides_.find(id);
    return it == nuclides_.end() ? nullptr : &it->second.value;
}

const Nuclide& NuclideRegistry::lookup(const NuclideId& id) const {
    check_identity(id);
    if (const auto* found = find(id)) return *found;
    throw NotFoundError("nuclide " + to_string(id) + " not in registry");
}

const Nuclide& NuclideRegistry::lookup(std::string_view name) const {
    auto id = parse_nuclide_id(name);
    if (!id) throw DomainError("malformed nuclide name '" + std::string(name) + "'");
    return lookup(*id);
}

std::vector<CaptureReaction> NuclideRegistry::captures_of(const NuclideId& id) const {
    std::vector<CaptureReaction> out;
    for (auto it = captures_.lower_bound({id, NuclideId{}}); it != captures_.end() && it->first.first == id; ++it) {
        out.push_back(it->second.value);
    }
    return out;
}

void NuclideRegistry::set_capture_sigma(const NuclideId& target, const NuclideId& product, double sigma_barns) {
    const auto it = captures_.find({target, product});
    if (it == captures_.end()) {
        throw NotFoundError("capture " + to_string(target) + " -> " + to_string(product) + " not in registry");
    }
    if (!(sigma_barns > 0.0)) throw DomainError("cross section must be positive");
    it->second.value.sigma_barns = sigma_barns;
}

NuclideRegistry load_registry(std::string_view source) {
    std::vector<PendingNuclide> nuclides;
    std::vector<PendingCapture> captures;

    std::size_t line_no = 0;
    for (const auto raw : split(source, '\n')) {
        ++line_no;
        std::string_view body = raw;
        std::string provenance;
        if (const auto hash = raw.find('#'); hash != std::string_view::npos) {
            body = raw.substr(0, hash);
            provenance = std::string(trim(raw.substr(hash + 1)));
        }
        auto tokens = tokenize(body);
        if (tokens.empty()) continue;
        const auto keyword = tokens.front();
        RecordParser parser(line_no, std::move(tokens));
        if (keyword.text == "NUCLIDE") {
            nuclides.push_back({parser.parse_nuclide(), std::move(provenance), line_no});
        } else if (keyword.text == "CAPTURE") {
            captures.push_back({parser.parse_capture(), std::move(provenance), line_no});
        } else {
            parser.fail("unknown record type '" + std::string(keyword.text) + "'", keyword.column);
        }
    }

    NuclideRegistry registry;
    for (auto& p : nuclides) {
        if (registry.contains(p.value.id)) throw ParseError("duplicate key " + to_string(p.value.id), p.line, 1);
        registry.add(std::move(p.value), std::move(p.provenance));
    }
    for (auto& p : captures) {
        if (registry.captures().contains({p.value.target, p.value.product})) {
            throw ParseError("duplicate key CAPTURE " + to_string(p.value.target) + " -> " + to_string(p.value.product),
                             p.line, 1);
        }
        registry.add(p.value, std::move(p.provenance));
    }
    return registry;
}

NuclideRegistry load_registry_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open nuclide data file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_registry(buffer.str());
}

std::string serialize(const NuclideRegistry& registry) {
    std::ostringstream out;
    for (const auto& [id, entry] : registry.nuclides()) {
        const auto& n = entry.value;
        out << "NUCLIDE " << to_string(id) << " z=" << id.z << " n=" << id.n << " halflife="
            << (n.half_life_s ? units::format_double(*n.half_life_s) + "s" : std::string("stable"))
            << " spin=" << format_spin(n.twice_spin) << " moment=" << units::format_double(n.magnetic_moment_nm);
        if (n.atomic_mass_u > 0.0) out << " mass=" << units::format_double(n.atomic_mass_u);
        if (!n.decays.empty()) {
            out << " decay=";
            for (std::size_t i = 0; i < n.decays.size(); ++i) {
                const auto& d = n.decays[i];
                if (i) out << ',';
                out << to_string(d.mode) << ':' << to_string(d.daughter) << ':' << units::format_double(d.fraction);
            }
        }
        if (!entry.provenance.empty()) out << "  # " << entry.provenance;
        out << '\n';
    }
    for (const auto& [key, entry] : registry.captures()) {
        const auto& c = entry.value;
        out << "CAPTURE " << to_string(c.target) << " -> " << to_string(c.product)
            << " sigma=" << units::format_double(c.sigma_barns) << 'b';
        if (c.ground_fraction > 0.0) out << " ground=" << units::format_double(c.ground_fraction);
        if (!entry.provenance.empty()) out << "  # " << entry.provenance;
        out << '\n';
    }
    return out.str();
}

std::vector<Violation> validate_registry(const NuclideRegistry& registry) {
    std::vector<Violation> out;
    auto report = [&out](const std::string& entry, std::string rule, std::string detail) {
        out.push_back({entry, std::move(rule), std::move(detail)});
    };

    for (const auto& [id, entry] : registry.nuclides()) {
        const auto& n = entry.value;
        const auto name = to_string(id);
        if (n.half_life_s && !(*n.half_life_s > 0.0)) report(name, "half-life", "half-life must be positive");
        if (n.stable() != n.decays.empty()) {
            report(name, "stable-iff-no-decays", n.stable() ? "stable nuclide lists decays" : "radioactive nuclide has no decays");
        }
        if (!n.decays.empty()) {
            double sum = 0.0;
            for (const auto& d : n.decays) sum += d.fraction;
            if (std::abs(sum - 1.0) > kBranchingTolerance) {
                std::ostringstream msg;
                msg << "branching sum " << sum;
                report(name, "branching-sum", msg.str());
            }
        }
        if (id.z % 2 == 0 && id.n % 2 == 0 && !id.isomer && (n.twice_spin != 0 || n.magnetic_moment_nm != 0.0)) {
            report(name, "even-even-moment", "even-Z even-N ground state must have spin 0 and moment 0");
        }
        for (const auto& d : n.decays) {
            NuclideId expected = id;
            switch (d.mode) {
                case DecayMode::IsomericTransition:
                    if (!id.isomer) report(name, "isomeric-transition", "only isomers decay by IT");
                    expected.isomer = false;
                    break;
                case DecayMode::BetaMinus:
                    expected = {id.z + 1, id.n - 1, d.daughter.isomer};
                    break;
                case DecayMode::ElectronCapture:
                    expected = {id.z - 1, id.n + 1, d.daughter.isomer};
                    break;
            }
            if (d.daughter != expected && d.mode == DecayMode::IsomericTransition) {
                report(name, "isomeric-transition",
                       "IT daughter " + to_string(d.daughter) + " is not the ground state " + to_string(expected));
            } else if (d.daughter != expected) {
                report(name, "daughter-identity",
                       std::string(to_string(d.mode)) + " daughter " + to_string(d.daughter) + " is not " + to_string(expected));
            }
            if (!registry.contains(d.daughter)) {
                report(name, "dangling-daughter", "daughter " + to_string(d.daughter) + " not in registry");
            }
        }
    }

    for (const auto& [key, entry] : registry.captures()) {
        const auto& c = entry.value;
        const auto name = "CAPTURE " + to_string(c.target) + " -> " + to_string(c.product);
        if (!(c.sigma_barns > 0.0)) report(name, "capture-sigma", "cross section must be positive");
        if (c.product.z != c.target.z || c.product.n != c.target.n + 1) {
            report(name, "capture-product", "product must be (z, n+1) of the target");
        }
        if (!registry.contains(c.target)) report(name, "dangling-capture", "target not in registry");
        if (!registry.contains(c.product)) report(name, "dangling-capture", "product not in registry");
        if (c.ground_fraction < 0.0 || c.ground_fraction > 1.0) {
            report(name, "ground-fraction", "ground fraction must lie in [0, 1]");
        }
        if (c.ground_fraction > 0.0) {
            const NuclideId ground{c.product.z, c.product.n, false};
            if (!c.product.isomer) report(name, "ground-fraction", "ground fraction only applies to isomeric products");
            else if (!registry.contains(ground)) report(name, "dangling-capture", "ground state " + to_string(ground) + " not in registry");
        }
    }
    return out;
}

}  // namespace isoclock
