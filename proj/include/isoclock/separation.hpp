#pragma once

#include <map>
#include <vector>

#include "isoclock/nuclide_db.hpp"

namespace isoclock {

struct SeparationStage {
    double suppression = 1.0;  // attenuation of every non-product species, >= 1
    double recovery = 1.0;     // product fraction kept, in (0, 1]
};

struct SeparationPlan {
    std::vector<SeparationStage> stages;
    std::map<NuclideId, double> composition;  // mass fractions, sum to 1
    NuclideId product;
    // Excitation/ionization wavelengths in nm; descriptive only.
    std::vector<double> wavelengths_nm;
};

struct PurityResult {
    std::map<NuclideId, double> composition;
    double recovered_fraction = 1.0;
};

// Throws DomainError when the plan violates its invariants.
void validate(const SeparationPlan& plan);

double cascade_suppression(const SeparationPlan& plan);

// Smallest k with per_stage^k >= target.
int stages_required(double per_stage, double target);

PurityResult purity_after(const SeparationPlan& plan);

}  // namespace isoclock
