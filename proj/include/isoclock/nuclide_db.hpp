#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace isoclock {

// (Z, N, isomer) identity of a nuclear state.
struct NuclideId {
    int z = 0;
    int n = 0;
    bool isomer = false;

    int mass_number() const noexcept { return z + n; }
    auto operator<=>(const NuclideId&) const = default;
};

// "Sr-87m" style name. Throws DomainError for Z outside the periodic table.
std::string to_string(const NuclideId& id);
// Inverse of to_string; nullopt when the text is not a well-formed name.
std::optional<NuclideId> parse_nuclide_id(std::string_view name);
std::optional<int> element_z(std::string_view symbol);

enum class DecayMode { BetaMinus, IsomericTransition, ElectronCapture };

std::string_view to_string(DecayMode mode);

struct DecayBranch {
    DecayMode mode = DecayMode::BetaMinus;
    NuclideId daughter;
    double fraction = 1.0;

    bool operator==(const DecayBranch&) const = default;
};

struct Nuclide {
    NuclideId id;
    // nullopt is the STABLE sentinel; everything radioactive carries a finite value.
    std::optional<double> half_life_s;
    // Spin is a non-negative multiple of 1/2, so it is stored doubled.
    int twice_spin = 0;
    double magnetic_moment_nm = 0.0;
    // Atomic mass in u; 0 when not tabulated (mass_u() then falls back to A).
    double atomic_mass_u = 0.0;
    std::vector<DecayBranch> decays;

    bool stable() const noexcept { return !half_life_s.has_value(); }
    double spin() const noexcept { return 0.5 * twice_spin; }
    // ln2 / half-life in s^-1; 0 for stable nuclides.
    double decay_constant() const noexcept;
    double mass_u() const noexcept;

    bool operator==(const Nuclide&) const = default;
};

// Thermal (n, gamma) reaction. When the product is an isomer, ground_fraction
// of the captures populate the ground state (z, n+1) directly.
struct CaptureReaction {
    NuclideId target;
    NuclideId product;
    double sigma_barns = 0.0;
    double ground_fraction = 0.0;

    bool operator==(const CaptureReaction&) const = default;
};

template <typename T>
struct RegistryEntry {
    T value;
    std::string provenance;

    bool operator==(const RegistryEntry&) const = default;
};

// Immutable once populated; concurrent readers need no locking.
class NuclideRegistry {
public:
    using CaptureKey = std::pair<NuclideId, NuclideId>;

    // Both throw DomainError on a duplicate key.
    void add(Nuclide nuclide, std::string provenance = {});
    void add(CaptureReaction capture, std::string provenance = {});

    // Throws DomainError for a malformed identity (z < 1, n < 0) and
    // NotFoundError when the identity is well formed but absent.
    const Nuclide& lookup(const NuclideId& id) const;
    const Nuclide& lookup(std::string_view name) const;
    const Nuclide* find(const NuclideId& id) const noexcept;
    bool contains(const NuclideId& id) const noexcept { return find(id) != nullptr; }

    // Capture reactions whose target is id, in product order.
    std::vector<CaptureReaction> captures_of(const NuclideId& id) const;
    // Replaces the cross section of an existing capture; used for what-if runs.
    void set_capture_sigma(const NuclideId& target, const NuclideId& product, double sigma_barns);

    const std::map<NuclideId, RegistryEntry<Nuclide>>& nuclides() const noexcept { return nuclides_; }
    const std::map<CaptureKey, RegistryEntry<CaptureReaction>>& captures() const noexcept { return captures_; }
    bool empty() const noexcept { return nuclides_.empty() && captures_.empty(); }

    bool operator==(const NuclideRegistry&) const = default;

private:
    std::map<NuclideId, RegistryEntry<Nuclide>> nuclides_;
    std::map<CaptureKey, RegistryEntry<CaptureReaction>> captures_;
};

// Parses the line-oriented data format:
//   NUCLIDE Sr-87m z=38 n=49 halflife=2.8h spin=1/2 moment=0 decay=IT:Sr-87:1  # provenance
//   CAPTURE Sr-86 -> Sr-87m sigma=1.04b [ground=<fraction>]
// A trailing comment on a record line becomes that entry's provenance.
// Throws ParseError with line/column on syntax errors, duplicate keys,
// non-positive half-lives or cross sections, and branching sums != 1.
NuclideRegistry load_registry(std::string_view source);
NuclideRegistry load_registry_file(const std::filesystem::path& path);

// Emits a document that load_registry parses back to an equal registry.
std::string serialize(const NuclideRegistry& registry);

struct Violation {
    std::string entry;
    std::string rule;
    std::string detail;
};

// Empty iff every entry satisfies the nuclide, capture, and reference rules.
std::vector<Violation> validate_registry(const NuclideRegistry& registry);

}  // namespace isoclock
