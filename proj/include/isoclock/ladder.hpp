#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "isoclock/detection.hpp"

namespace isoclock {

// Three-level ladder g -> e1 (clock 1, long-lived) -> e2 (clock 2, shorter),
// with e2 read out on a cycling transition to e3. The ion is prepared in e1
// and clock 2 is probed periodically until e1 decays.
struct JumpLadderConfig {
    double lifetime_e1_s = 0.0;
    double lifetime_e2_s = 0.0;
    double probe_interval_s = 0.0;
    double probe_perturbation = 0.0;  // per-probe induced decay probability epsilon
    double horizon_s = 0.0;           // probing stops here even if e1 survives

    double cycling_rate_per_s = 5.9e7;
    double collection_efficiency = 1e-3;
    double window_s = 100e-6;
    double dark_mean = 0.1;
    int threshold = 2;

    double aging_beta_per_s = 0.0;  // fractional clock-2 drift per second spent in e1
    double probe_sigma_frac = 0.0;  // projection-noise sigma of one clock-2 reading

    // Optional: maps the memoryless decay-time draw to a modified one.
    // Empty by default; no parameterization is assumed.
    std::function<double(double)> decay_time_hook;

    DetectionModel detection() const {
        return DetectionModel::from_rates(cycling_rate_per_s, collection_efficiency, window_s, dark_mean, threshold);
    }
    // Natural plus time-averaged probe-induced hazard while probing, s^-1.
    double effective_hazard() const { return 1.0 / lifetime_e1_s + probe_perturbation / probe_interval_s; }
};

void validate(const JumpLadderConfig& config);

// Shortest probe interval keeping probe-induced hazard within 1% of the
// natural e1 hazard: epsilon * lifetime_e1 / 0.01.
double min_probe_interval(const JumpLadderConfig& config);

// Uniform probe times interval, 2 interval, ... up to the horizon. Throws
// DomainError when the interval violates the Zeno budget.
std::vector<double> make_schedule(const JumpLadderConfig& config);

struct ProbeRecord {
    double t_probe_s = 0.0;
    double freq_frac = 0.0;  // clock-2 fractional frequency estimate
    double sigma = 0.0;
    std::int64_t counts = 0;
    bool bright = false;
};

struct JumpRun {
    std::vector<ProbeRecord> probes;  // all strictly before decay_time_s
    double decay_time_s = 0.0;
    std::uint64_t seed = 0;
};

// Decay time is the earlier of a natural exponential draw and the first probe
// whose Bernoulli(epsilon) back-action fires; a probe that fires is not recorded.
JumpRun simulate_run(const JumpLadderConfig& config, std::uint64_t seed);

// Run i uses derive_seed(master, SeedStream::LadderRun, i).
std::vector<JumpRun> simulate_runs(const JumpLadderConfig& config, std::size_t count, std::uint64_t master_seed);

struct AgingEstimate {
    double beta = 0.0;
    double sigma = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double z = 0.0;
    std::size_t probes = 0;
};

// Pooled weighted regression of clock-2 fractional frequency on time in e1.
AgingEstimate detect_aging(std::span<const JumpRun> runs, double confidence = 0.95);

struct MemorylessResult {
    double ks_statistic = 0.0;
    double p_value = 1.0;
    double rate = 0.0;  // maximum-likelihood exponential rate
};

// KS distance between the sample CDF and an exponential CDF with the given rate.
double ks_exponential(std::span<const double> samples, double rate);

// KS test against an exponential with ML-fitted rate. The p-value comes
// from a parametric bootstrap (refitting the rate for every resample);
// resample b uses derive_seed(seed, SeedStream::Bootstrap, b), so the result
// does not depend on the thread count (0 picks hardware concurrency).
MemorylessResult test_memoryless(std::span<const double> decay_times, std::uint64_t seed, int resamples = 1000,
                                 unsigned threads = 0);

}  // namespace isoclock
