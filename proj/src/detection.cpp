#include "isoclock/detection.hpp"

#include <boost/math/distributions/poisson.hpp>

#include "isoclock/error.hpp"

namespace isoclock {
namespace {

// P(Poisson(mean) <= k), with the mean == 0 case handled explicitly.
double poisson_cdf(double mean, int k) {
    if (k < 0) return 0.0;
    if (mean == 0.0) return 1.0;
    return boost::math::cdf(boost::math::poisson_distribution<double>(mean), static_cast<double>(k));
}

}  // namespace

void validate(const DetectionModel& detection) {
    if (!(detection.bright_mean >= 0.0) || !(detection.dark_mean >= 0.0)) {
        throw DomainError("detection count means must be non-negative");
    }
    if (detection.threshold < 1) throw DomainError("detection threshold must be at least 1 count");
}

DetectionModel DetectionModel::from_rates(double cycling_rate_per_s, double collection_efficiency, double window_s,
                                          double dark_mean, int threshold) {
    if (!(cycling_rate_per_s > 0.0)) throw DomainError("cycling rate must be positive");
    if (!(collection_efficiency > 0.0 && collection_efficiency <= 1.0)) {
        throw DomainError("collection efficiency must lie in (0, 1]");
    }
    if (!(window_s > 0.0)) throw DomainError("detection window must be positive");
    DetectionModel d{cycling_rate_per_s * collection_efficiency * window_s, dark_mean, threshold};
    validate(d);
    return d;
}

double DetectionModel::bright_miss() const { return poisson_cdf(bright_mean, threshold - 1); }

double DetectionModel::dark_false() const { return 1.0 - poisson_cdf(dark_mean, threshold - 1); }

std::int64_t DetectionModel::draw_counts(bool bright, Rng& rng) const {
    const double mean = bright ? bright_mean : dark_mean;
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<std::int64_t>(mean)(rng);
}

}  // namespace isoclock
