#pragma once

#include <cstdint>

#include "isoclock/rng.hpp"

namespace isoclock {

// State-selective fluorescence detection: photon counts are Poisson with
// bright_mean (ion in the cycling state) or dark_mean (background), and a
// shot reads "bright" when counts >= threshold.
struct DetectionModel {
    double bright_mean = 0.0;
    double dark_mean = 0.0;
    int threshold = 1;

    static DetectionModel from_rates(double cycling_rate_per_s, double collection_efficiency, double window_s,
                                     double dark_mean, int threshold);

    // P(counts < threshold | bright).
    double bright_miss() const;
    // P(counts >= threshold | dark).
    double dark_false() const;

    std::int64_t draw_counts(bool bright, Rng& rng) const;
    bool read(bool bright, Rng& rng) const { return draw_counts(bright, rng) >= threshold; }
};

// Throws DomainError on negative means or a threshold below 1.
void validate(const DetectionModel& detection);

}  // namespace isoclock
