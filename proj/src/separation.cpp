#include "isoclock/separation.hpp"

#include <cmath>

#include "isoclock/error.hpp"

namespace isoclock {

void validate(const SeparationPlan& plan) {
    for (const auto& s : plan.stages) {
        if (!(s.suppression >= 1.0)) throw DomainError("stage suppression must be >= 1");
        if (!(s.recovery > 0.0 && s.recovery <= 1.0)) throw DomainError("stage recovery must lie in (0, 1]");
    }
    double sum = 0.0;
    for (const auto& [id, f] : plan.composition) {
        if (!(f >= 0.0)) throw DomainError("composition fraction of " + to_string(id) + " is negative");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DomainError("composition fractions must sum to 1");
}

double cascade_suppression(const SeparationPlan& plan) {
    validate(plan);
    // Summing logs keeps the product independent of stage order.
    double log_total = 0.0;
    for (const auto& s : plan.stages) log_total += std::log10(s.suppression);
    return std::pow(10.0, log_total);
}

int stages_required(double per_stage, double target) {
    if (!(target >= 1.0)) throw DomainError("target suppression must be >= 1");
    if (target == 1.0) return 0;
    if (!(per_stage > 1.0)) throw DomainError("per-stage suppression must exceed 1 to reach a target above 1");
    const double ratio = std::log(target) / std::log(per_stage);
    auto k = static_cast<int>(std::ceil(ratio - 1e-12 * ratio));
    // Guard the log rounding in both directions.
    while (k > 0 && std::pow(per_stage, k - 1) >= target) --k;
    while (std::pow(per_stage, k) < target) ++k;
    return k;
}

PurityResult purity_after(const SeparationPlan& plan) {
    validate(plan);
    if (!plan.composition.contains(plan.product)) {
        throw DomainError("product " + to_string(plan.product) + " is absent from the composition");
    }
    const double suppression = cascade_suppression(plan);
    PurityResult out;
    for (const auto& s : plan.stages) out.recovered_fraction *= s.recovery;

    double total = 0.0;
    for (const auto& [id, f] : plan.composition) {
        const double kept = id == plan.product ? f : f / suppression;
        out.composition[id] = kept;
        total += kept;
    }
    for (auto& [id, f] : out.composition) f /= total;
    return out;
}

}  // namespace isoclock
