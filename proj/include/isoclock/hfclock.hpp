#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isoclock/detection.hpp"
#include "isoclock/nuclide_db.hpp"

namespace isoclock {

// Ground-state microwave hyperfine transition F=f_lower -> F=f_upper.
struct HyperfineClockSpec {
    NuclideId nuclide;
    double nu0_hz = 0.0;
    double f_lower = 0.0;
    double f_upper = 1.0;
    double pump_nm = 0.0;    // metadata
    double detect_nm = 0.0;  // metadata
};

struct RamseyConfig {
    double rabi_rad_s = 0.0;
    double pulse_s = 0.0;
    double free_s = 0.0;
    // Total shots over the whole fringe grid.
    std::int64_t shots = 0;
    std::size_t grid_points = 9;
    // Grid half-width in units of pi / free_s (1 reaches the first fringe zeros).
    double span = 0.75;
    std::optional<DetectionModel> detection;
    // Allowed relative error of rabi * pulse against pi/2.
    double pulse_area_tolerance = 1e-6;

    // pi/2 pulses of length pulse_s around a free evolution of free_s.
    static RamseyConfig standard(double free_s, double pulse_s, std::int64_t shots);
};

void validate(const HyperfineClockSpec& spec);
void validate(const RamseyConfig& config);

// Two-pulse Ramsey excitation probability at detuning delta (rad/s).
double ramsey_probability(const RamseyConfig& config, double detuning_rad_s);

// Probability that a shot reads bright, including detection misclassification.
double readout_probability(const RamseyConfig& config, double detuning_rad_s);

struct FringeData {
    double nu0_hz = 0.0;
    RamseyConfig config;
    std::vector<double> detuning_rad_s;  // applied detuning from nu0
    std::vector<double> successes;       // bright reads (expected values in analytic mode)
    std::vector<std::int64_t> shots;
};

std::vector<double> fringe_grid(const RamseyConfig& config);

// Binomial projection noise plus detection misclassification. The atom sees
// detuning delta - 2 pi nu0 * offset. Deterministic for a fixed seed.
FringeData simulate_fringe(const HyperfineClockSpec& spec, const RamseyConfig& config, double true_fractional_offset,
                           std::uint64_t seed);

// Infinite-shot limit: successes are shots times the readout probability.
FringeData analytic_fringe(const HyperfineClockSpec& spec, const RamseyConfig& config, double true_fractional_offset);

struct FrequencyEstimate {
    double fractional = 0.0;
    double sigma_fractional = 0.0;
    int iterations = 0;
};

// Binomial maximum-likelihood fit (Fisher scoring) of the Ramsey model with
// the frequency offset as the only free parameter, seeded by a three-point
// parabola on the central fringe. Throws FitError on non-convergence or when
// the central fringe cannot be bracketed.
FrequencyEstimate estimate_frequency(const FringeData& fringe);

// Shots needed for a fractional standard error target under projection
// noise, sigma_f = 1 / (2 pi T sqrt(N)).
std::int64_t required_shots(double target_sigma_fractional, double nu0_hz, double free_s);

// Hyperfine splitting scales linearly with the nuclear moment.
double moment_to_frequency(const HyperfineClockSpec& spec, double moment_ratio);

struct DriftModel {
    enum class Kind { None, Relaxation, Predecay };
    Kind kind = Kind::None;
    double amplitude = 0.0;     // relaxation A (fractional)
    double tau_relax_s = 0.0;   // relaxation time constant
    double kappa_s = 0.0;       // predecay kappa
    double decay_time_s = 0.0;  // predecay t_d

    static DriftModel none() { return {}; }
    static DriftModel relaxation(double amplitude, double tau_s) { return {Kind::Relaxation, amplitude, tau_s, 0.0, 0.0}; }
    static DriftModel predecay(double kappa_s, double decay_time_s) {
        return {Kind::Predecay, 0.0, 0.0, kappa_s, decay_time_s};
    }
};

// Fractional moment shift at age t:
//   none -> 0, relaxation -> A exp(-t / tau), predecay -> kappa / (t_d - t).
double drift_fraction(const DriftModel& model, double t_since_creation_s);

struct IntervalEstimate {
    double value = 0.0;
    double sigma = 0.0;  // linearized standard error
    double lower = 0.0;
    double upper = 0.0;
};

// Inverts the relaxation model: t = tau ln(A / measured). The interval maps
// measured +- z sigma through the (monotone) inverse.
IntervalEstimate estimate_age(double amplitude, double tau_s, double measured, double sigma, double confidence = 0.95);

struct DriftSample {
    double t_s = 0.0;
    double fraction = 0.0;
    double sigma = 0.0;
};

struct DecayPrediction {
    IntervalEstimate decay_time;  // absolute t_d
    double remaining_s = 0.0;     // t_d - last sample time
    int iterations = 0;
};

// Weighted least-squares fit of kappa / (t_d - t) for t_d.
DecayPrediction predict_decay_time(double kappa_s, std::span<const DriftSample> series, double confidence = 0.95);

struct Reading {
    std::string ion_id;
    double epoch_s = 0.0;
    double fractional = 0.0;
    double sigma = 0.0;
};

struct ComparisonResult {
    double delta_fractional = 0.0;
    double sigma_fractional = 0.0;
    double z_score = 0.0;
    double alpha = 0.05;
    bool distinguishable = false;
};

// Inverse-variance weighted means of each ensemble, differenced.
ComparisonResult compare_ensembles(std::span<const Reading> readings_new, std::span<const Reading> readings_natural,
                                   double alpha = 0.05);

struct CampaignConfig {
    std::size_t ions_per_ensemble = 10;
    double alpha = 0.05;
    double new_age_s = 0.0;
    double natural_age_s = 0.0;
    // Extra fractional shift applied to every new ion.
    double injected_fractional = 0.0;
};

struct CampaignResult {
    std::vector<Reading> new_readings;
    std::vector<Reading> natural_readings;
    ComparisonResult comparison;
};

// Alternating new/natural ions, each interrogated with one simulated fringe.
// Ion i of ensemble e uses seed derive_seed(master, stream(e), i).
CampaignResult run_campaign(const HyperfineClockSpec& spec, const RamseyConfig& ramsey, const DriftModel& drift,
                            const CampaignConfig& campaign, std::uint64_t master_seed);

// Two-sided standard-normal quantile for the given confidence level.
double normal_two_sided_quantile(double confidence);

}  // namespace isoclock
