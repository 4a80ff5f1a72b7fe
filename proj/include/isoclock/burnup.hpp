#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "isoclock/nuclide_db.hpp"

namespace isoclock {

struct CaptureEdge {
    std::size_t from = 0;
    std::size_t to = 0;
    double sigma_barns = 0.0;
};

struct DecayEdge {
    std::size_t from = 0;
    std::size_t to = 0;
    double lambda = 0.0;  // s^-1 of the parent
    double branching = 1.0;
    DecayMode mode = DecayMode::BetaMinus;
};

// Reaction/decay DAG. nuclides is in topological order, so every edge runs
// from a lower to a higher index and the rate matrix is lower-triangular.
// Nuclides reached at the depth limit are sinks: they carry no edges, which
// keeps the chain closed (atoms are transmuted, never lost).
struct ChainSpec {
    std::vector<NuclideId> nuclides;
    std::vector<double> mass_u;
    std::vector<CaptureEdge> captures;
    std::vector<DecayEdge> decays;

    std::size_t size() const noexcept { return nuclides.size(); }
    // Throws NotFoundError when id is not part of the chain.
    std::size_t index_of(const NuclideId& id) const;
    bool contains(const NuclideId& id) const noexcept;
};

// Transitive closure of capture and decay edges from the seeds. Depth counts
// neutron captures; decays do not consume depth. Throws NotFoundError for a
// missing seed or product, DomainError on a cycle.
ChainSpec build_chain(const NuclideRegistry& registry, std::span<const NuclideId> seeds, int depth_limit);

// Rate matrix in s^-1 for flux in n cm^-2 s^-1: A(j, i) is the feeding rate
// i -> j and A(i, i) = -(sum of rates out of i). Columns sum to zero.
Eigen::MatrixXd burnup_matrix(const ChainSpec& chain, double flux);

struct FluxSegment {
    double duration_s = 0.0;
    double flux = 0.0;
};

struct IrradiationScenario {
    std::vector<FluxSegment> segments;
    std::map<NuclideId, double> initial_inventory;  // atoms
    std::size_t grid_points = 301;
};

// Atom inventory for mass_g of material holding the target at mass fraction
// `enrichment` and the listed impurities at their mass fractions.
std::map<NuclideId, double> inventory_from_target(const NuclideRegistry& registry, const NuclideId& target,
                                                  double mass_g, double enrichment,
                                                  const std::map<NuclideId, double>& impurities = {});

struct InventoryTrajectory {
    std::vector<NuclideId> nuclides;
    std::vector<double> times;                // s, strictly increasing, starts at 0
    std::vector<std::vector<double>> counts;  // counts[nuclide][time]
    std::vector<std::size_t> segment_ends;    // grid index of each segment's end

    const std::vector<double>& series(const NuclideId& id) const;
    double total_at(std::size_t time_index) const;
};

// Exact solution of dN/dt = A N for one constant-flux interval of length dt.
std::vector<double> propagate(const ChainSpec& chain, double flux, std::span<const double> initial, double dt);

// Piecewise solution sampled on a uniform grid merged with segment ends.
InventoryTrajectory solve_inventory(const ChainSpec& chain, const IrradiationScenario& scenario);

struct ContaminantRatio {
    NuclideId nuclide;  // capture product of the reported nuclide
    double ratio = 0.0; // (that product + its in-chain descendants) / reported nuclide
    bool negligible = true;
};

struct YieldReport {
    NuclideId nuclide;
    double atoms = 0.0;
    double mass_g = 0.0;
    // max |y - fit| / max |y| against the least-squares line through the series.
    double linearity = 0.0;
    std::vector<ContaminantRatio> contaminants;
};

YieldReport yield_report(const ChainSpec& chain, const InventoryTrajectory& trajectory, const NuclideId& nuclide,
                         double negligible_threshold = 0.05);

// Divided difference of exp over the points z, stable for clustered and
// coincident points. Exposed for testing.
double exp_divided_difference(std::span<const double> z);

}  // namespace isoclock
