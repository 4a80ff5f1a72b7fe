#include "isoclock/hfclock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/normal.hpp>

#include "isoclock/error.hpp"
#include "isoclock/rng.hpp"

namespace isoclock {
namespace {

using std::numbers::pi;

constexpr int kMaxIterations = 100;
constexpr double kRelativeTolerance = 1e-12;
constexpr double kPerturbativeLimit = 1e-3;

struct ProbabilityAndSlope {
    double p;
    double dp;  // d/d(detuning), per rad/s
};

// Two-pulse Ramsey probability and its analytic derivative in the detuning.
ProbabilityAndSlope ramsey_with_slope(const RamseyConfig& cfg, double delta) {
    const double omega = cfg.rabi_rad_s;
    const double tau = cfg.pulse_s;
    const double t_free = cfg.free_s;

    const double omega_eff = std::hypot(omega, delta);
    const double a = 0.5 * omega_eff * tau;
    const double b = 0.5 * delta * t_free;
    const double s = std::sin(a), c = std::cos(a);
    const double sb = std::sin(b), cb = std::cos(b);
    const double r = delta / omega_eff;

    // P = 4 Omega^2 Q^2 B^2 with Q = s / Omega', B = c cb - r s sb.
    const double q = s / omega_eff;
    const double bracket = c * cb - r * s * sb;
    const double p = 4.0 * omega * omega * q * q * bracket * bracket;

    const double da = 0.5 * tau * r;
    const double dq = (c * da * omega_eff - s * r) / (omega_eff * omega_eff);
    const double dr = omega * omega / (omega_eff * omega_eff * omega_eff);
    const double dbracket = -s * da * cb - c * sb * 0.5 * t_free - (dr * s * sb + r * c * da * sb + r * s * cb * 0.5 * t_free);
    const double dp = 8.0 * omega * omega * q * bracket * (dq * bracket + q * dbracket);
    return {std::clamp(p, 0.0, 1.0), dp};
}

ProbabilityAndSlope readout_with_slope(const RamseyConfig& cfg, double delta) {
    auto ps = ramsey_with_slope(cfg, delta);
    if (!cfg.detection) return ps;
    const double miss = cfg.detection->bright_miss();
    const double false_bright = cfg.detection->dark_false();
    const double contrast = 1.0 - miss - false_bright;
    return {false_bright + contrast * ps.p, contrast * ps.dp};
}

std::vector<std::int64_t> distribute_shots(const RamseyConfig& cfg) {
    const auto points = static_cast<std::int64_t>(cfg.grid_points);
    std::vector<std::int64_t> shots(cfg.grid_points, cfg.shots / points);
    for (std::int64_t i = 0; i < cfg.shots % points; ++i) ++shots[static_cast<std::size_t>(i)];
    return shots;
}

}  // namespace

RamseyConfig RamseyConfig::standard(double free_s, double pulse_s, std::int64_t shots) {
    RamseyConfig cfg;
    cfg.free_s = free_s;
    cfg.pulse_s = pulse_s;
    cfg.rabi_rad_s = 0.5 * pi / pulse_s;
    cfg.shots = shots;
    return cfg;
}

void validate(const HyperfineClockSpec& spec) {
    if (!(spec.nu0_hz > 0.0)) throw DomainError("clock frequency nu0 must be positive");
    if (spec.f_upper != spec.f_lower + 1.0) throw DomainError("ground-state clock needs f_upper = f_lower + 1");
}

void validate(const RamseyConfig& cfg) {
    if (!(cfg.rabi_rad_s > 0.0) || !(cfg.pulse_s > 0.0) || !(cfg.free_s > 0.0)) {
        throw DomainError("Ramsey rabi frequency, pulse and free-evolution times must be positive");
    }
    const double area = cfg.rabi_rad_s * cfg.pulse_s;
    if (std::abs(area - 0.5 * pi) > cfg.pulse_area_tolerance * 0.5 * pi) {
        throw DomainError("Ramsey pulses are not pi/2 pulses within tolerance");
    }
    if (cfg.grid_points < 1) throw DomainError("fringe grid needs at least one point");
    if (cfg.shots < static_cast<std::int64_t>(cfg.grid_points)) {
        throw DomainError("need at least one shot per fringe point");
    }
    if (!(cfg.span > 0.0)) throw DomainError("fringe span must be positive");
    if (cfg.detection) validate(*cfg.detection);
}

double ramsey_probability(const RamseyConfig& config, double detuning_rad_s) {
    return ramsey_with_slope(config, detuning_rad_s).p;
}

double readout_probability(const RamseyConfig& config, double detuning_rad_s) {
    return readout_with_slope(config, detuning_rad_s).p;
}

std::vector<double> fringe_grid(const RamseyConfig& config) {
    std::vector<double> grid(config.grid_points, 0.0);
    if (config.grid_points == 1) return grid;
    const double half_width = config.span * pi / config.free_s;
    const auto last = static_cast<double>(config.grid_points - 1);
    for (std::size_t j = 0; j < config.grid_points; ++j) {
        grid[j] = half_width * (2.0 * static_cast<double>(j) / last - 1.0);
    }
    return grid;
}

FringeData simulate_fringe(const HyperfineClockSpec& spec, const RamseyConfig& config, double true_fractional_offset,
                           std::uint64_t seed) {
    validate(spec);
    validate(config);
    FringeData out;
    out.nu0_hz = spec.nu0_hz;
    out.config = config;
    out.detuning_rad_s = fringe_grid(config);
    out.shots = distribute_shots(config);

    Rng rng(seed);
    const double shift = 2.0 * pi * spec.nu0_hz * true_fractional_offset;
    const double miss = config.detection ? config.detection->bright_miss() : 0.0;
    const double false_bright = config.detection ? config.detection->dark_false() : 0.0;
    for (std::size_t j = 0; j < out.detuning_rad_s.size(); ++j) {
        const double p = ramsey_probability(config, out.detuning_rad_s[j] - shift);
        const auto n = out.shots[j];
        const auto excited = std::binomial_distribution<std::int64_t>(n, p)(rng);
        std::int64_t bright = excited;
        if (config.detection) {
            // Per-shot Poisson thresholding, drawn in aggregate.
            bright = std::binomial_distribution<std::int64_t>(excited, 1.0 - miss)(rng) +
                     std::binomial_distribution<std::int64_t>(n - excited, false_bright)(rng);
        }
        out.successes.push_back(static_cast<double>(bright));
    }
    return out;
}

FringeData analytic_fringe(const HyperfineClockSpec& spec, const RamseyConfig& config, double true_fractional_offset) {
    validate(spec);
    validate(config);
    FringeData out;
    out.nu0_hz = spec.nu0_hz;
    out.config = config;
    out.detuning_rad_s = fringe_grid(config);
    out.shots = distribute_shots(config);
    const double shift = 2.0 * pi * spec.nu0_hz * true_fractional_offset;
    for (std::size_t j = 0; j < out.detuning_rad_s.size(); ++j) {
        out.successes.push_back(static_cast<double>(out.shots[j]) *
                                readout_probability(config, out.detuning_rad_s[j] - shift));
    }
    return out;
}

FrequencyEstimate estimate_frequency(const FringeData& fringe) {
    const auto& cfg = fringe.config;
    validate(cfg);
    const std::size_t points = fringe.detuning_rad_s.size();
    if (points < 5) throw DomainError("frequency estimation needs at least 5 fringe points");
    if (fringe.successes.size() != points || fringe.shots.size() != points) {
        throw DomainError("fringe arrays have mismatched lengths");
    }
    if (!(fringe.nu0_hz > 0.0)) throw DomainError("fringe carries no clock frequency");

    std::vector<double> fraction(points);
    for (std::size_t j = 0; j < points; ++j) {
        fraction[j] = fringe.successes[j] / static_cast<double>(fringe.shots[j]);
    }

    // Seed: parabola through the brightest point and its neighbours.
    const auto peak = static_cast<std::size_t>(std::max_element(fraction.begin(), fraction.end()) - fraction.begin());
    if (peak == 0 || peak + 1 == points) {
        throw FitError("fringe ambiguity: brightest point sits on the grid edge, central fringe not bracketed");
    }
    const double spacing = fringe.detuning_rad_s[peak + 1] - fringe.detuning_rad_s[peak];
    const double ym = fraction[peak - 1], y0 = fraction[peak], yp = fraction[peak + 1];
    const double curvature = ym - 2.0 * y0 + yp;
    double delta_seed = fringe.detuning_rad_s[peak];
    if (curvature < 0.0) delta_seed += 0.5 * spacing * (ym - yp) / curvature;
    if (std::abs(delta_seed) * cfg.free_s >= pi) {
        throw FitError("fringe ambiguity: seed lies outside the central fringe");
    }

    const double max_step_hz = 0.1 / cfg.free_s;
    double shift_hz = delta_seed / (2.0 * pi);
    double info = 0.0;
    int iterations = 0;
    for (;;) {
        if (++iterations > kMaxIterations) throw FitError("frequency fit did not converge in 100 iterations");
        double score = 0.0;
        info = 0.0;
        for (std::size_t j = 0; j < points; ++j) {
            const auto ps = readout_with_slope(cfg, fringe.detuning_rad_s[j] - 2.0 * pi * shift_hz);
            const double slope_hz = -2.0 * pi * ps.dp;
            if (slope_hz == 0.0) continue;
            const double variance = std::max(ps.p * (1.0 - ps.p), 1e-15);
            const auto n = static_cast<double>(fringe.shots[j]);
            score += n * (fraction[j] - ps.p) * slope_hz / variance;
            info += n * slope_hz * slope_hz / variance;
        }
        if (!(info > 0.0)) throw FitError("frequency fit has no information (flat fringe)");
        const double step = std::clamp(score / info, -max_step_hz, max_step_hz);
        shift_hz += step;
        if (std::abs(step) <= kRelativeTolerance * std::max(std::abs(shift_hz), 1.0 / cfg.free_s)) break;
    }
    if (std::abs(2.0 * pi * shift_hz) > cfg.span * pi / cfg.free_s) {
        throw FitError("fringe ambiguity: fitted centre left the sampled fringe");
    }
    return {shift_hz / fringe.nu0_hz, 1.0 / std::sqrt(info) / fringe.nu0_hz, iterations};
}

std::int64_t required_shots(double target_sigma_fractional, double nu0_hz, double free_s) {
    if (!(target_sigma_fractional > 0.0) || !(nu0_hz > 0.0) || !(free_s > 0.0)) {
        throw DomainError("required_shots needs positive target, frequency and free-evolution time");
    }
    const double x = 1.0 / (2.0 * pi * free_s * nu0_hz * target_sigma_fractional);
    // Shave rounding noise so an exactly attainable target is not bumped up a shot.
    const double n = std::ceil(x * x * (1.0 - 1e-12));
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(n));
}

double moment_to_frequency(const HyperfineClockSpec& spec, double moment_ratio) {
    if (!(moment_ratio > 0.0)) throw DomainError("moment ratio must be positive");
    return spec.nu0_hz * moment_ratio;
}

double drift_fraction(const DriftModel& model, double t) {
    if (!(t >= 0.0)) throw DomainError("time since creation must be non-negative");
    switch (model.kind) {
        case DriftModel::Kind::None:
            return 0.0;
        case DriftModel::Kind::Relaxation:
            if (!(model.tau_relax_s > 0.0)) throw DomainError("relaxation time must be positive");
            return model.amplitude * std::exp(-t / model.tau_relax_s);
        case DriftModel::Kind::Predecay:
            if (t >= model.decay_time_s) throw DomainError("predecay model evaluated at or after the decay time");
            return model.kappa_s / (model.decay_time_s - t);
    }
    return 0.0;
}

double normal_two_sided_quantile(double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("confidence must lie in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + 0.5 * confidence);
}

IntervalEstimate estimate_age(double amplitude, double tau_s, double measured, double sigma, double confidence) {
    if (!(tau_s > 0.0)) throw DomainError("relaxation time must be positive");
    if (amplitude == 0.0) throw DomainError("relaxation amplitude must be non-zero");
    if (!(sigma >= 0.0)) throw DomainError("measurement sigma must be non-negative");
    const double ratio = measured / amplitude;
    if (!(ratio > 0.0) || ratio > 1.0) {
        throw DomainError("measured fraction is outside (0, A]: excluded by the relaxation model");
    }
    auto age_of = [&](double m) {
        const double r = m / amplitude;
        if (r <= 0.0) return std::numeric_limits<double>::infinity();
        if (r >= 1.0) return 0.0;
        return tau_s * std::log(1.0 / r);
    };
    const double z = normal_two_sided_quantile(confidence);
    IntervalEstimate out;
    out.value = age_of(measured);
    out.sigma = tau_s * sigma / std::abs(measured);
    const double a = age_of(measured - z * sigma);
    const double b = age_of(measured + z * sigma);
    out.lower = std::min(a, b);
    out.upper = std::max(a, b);
    return out;
}

DecayPrediction predict_decay_time(double kappa_s, std::span<const DriftSample> series, double confidence) {
    if (kappa_s == 0.0) throw DomainError("kappa = 0 leaves the decay time unidentifiable");
    if (series.size() < 2) throw DomainError("decay-time prediction needs at least two samples");
    double t_last = -std::numeric_limits<double>::infinity();
    for (const auto& s : series) {
        if (!(s.sigma > 0.0)) throw DomainError("every drift sample needs a positive sigma");
        t_last = std::max(t_last, s.t_s);
    }

    // Seed with the weighted mean of the per-point inversions t + kappa / y.
    double seed_num = 0.0, seed_den = 0.0;
    for (const auto& s : series) {
        if (s.fraction / kappa_s <= 0.0) continue;
        const double w = 1.0 / (s.sigma * s.sigma);
        seed_num += w * (s.t_s + kappa_s / s.fraction);
        seed_den += w;
    }
    if (seed_den == 0.0) throw FitError("no sample has the sign implied by kappa; cannot seed the fit");
    double t_d = seed_num / seed_den;
    const double floor_gap = 1e-9 * std::max(1.0, std::abs(t_last));
    if (t_d <= t_last) t_d = t_last + floor_gap;

    double info = 0.0;
    int iterations = 0;
    for (;;) {
        if (++iterations > kMaxIterations) throw FitError("decay-time fit did not converge in 100 iterations");
        double score = 0.0;
        info = 0.0;
        for (const auto& s : series) {
            const double gap = t_d - s.t_s;
            const double model = kappa_s / gap;
            const double jac = -kappa_s / (gap * gap);
            const double w = 1.0 / (s.sigma * s.sigma);
            score += w * (s.fraction - model) * jac;
            info += w * jac * jac;
        }
        double step = score / info;
        // Stay strictly beyond the last sample.
        while (t_d + step <= t_last) step *= 0.5;
        t_d += step;
        if (std::abs(step) <= kRelativeTolerance * std::abs(t_d)) break;
    }

    const double z = normal_two_sided_quantile(confidence);
    DecayPrediction out;
    out.decay_time.value = t_d;
    out.decay_time.sigma = 1.0 / std::sqrt(info);
    out.decay_time.lower = t_d - z * out.decay_time.sigma;
    out.decay_time.upper = t_d + z * out.decay_time.sigma;
    out.remaining_s = t_d - t_last;
    out.iterations = iterations;
    return out;
}

ComparisonResult compare_ensembles(std::span<const Reading> readings_new, std::span<const Reading> readings_natural,
                                   double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    auto weighted = [](std::span<const Reading> readings, const char* label) {
        if (readings.size() < 2) throw DomainError(std::string(label) + " ensemble needs at least two readings");
        double sw = 0.0, swx = 0.0;
        for (const auto& r : readings) {
            if (!(r.sigma > 0.0) || !std::isfinite(r.sigma)) {
                throw DomainError(std::string(label) + " ensemble has a reading with zero or non-finite sigma");
            }
            const double w = 1.0 / (r.sigma * r.sigma);
            sw += w;
            swx += w * r.fractional;
        }
        return std::pair{swx / sw, 1.0 / sw};
    };
    const auto [mean_new, var_new] = weighted(readings_new, "new");
    const auto [mean_nat, var_nat] = weighted(readings_natural, "natural");

    ComparisonResult out;
    out.alpha = alpha;
    out.delta_fractional = mean_new - mean_nat;
    out.sigma_fractional = std::sqrt(var_new + var_nat);
    out.z_score = out.delta_fractional / out.sigma_fractional;
    out.distinguishable = std::abs(out.z_score) > normal_two_sided_quantile(1.0 - alpha);
    return out;
}

CampaignResult run_campaign(const HyperfineClockSpec& spec, const RamseyConfig& ramsey, const DriftModel& drift,
                            const CampaignConfig& campaign, std::uint64_t master_seed) {
    if (campaign.ions_per_ensemble < 2) throw DomainError("each ensemble needs at least two ions");
    const double offset_new = drift_fraction(drift, campaign.new_age_s) + campaign.injected_fractional;
    const double offset_nat = drift_fraction(drift, campaign.natural_age_s);
    if (std::abs(offset_new) >= kPerturbativeLimit || std::abs(offset_nat) >= kPerturbativeLimit) {
        throw DomainError("fractional shift outside the perturbative regime (|shift| < 1e-3)");
    }

    const double per_ion_s = static_cast<double>(ramsey.shots) * (ramsey.free_s + 2.0 * ramsey.pulse_s);
    CampaignResult out;
    for (std::size_t i = 0; i < campaign.ions_per_ensemble; ++i) {
        const auto fresh = estimate_frequency(
            simulate_fringe(spec, ramsey, offset_new, derive_seed(master_seed, SeedStream::CampaignNew, i)));
        out.new_readings.push_back(
            {"new-" + std::to_string(i), static_cast<double>(2 * i) * per_ion_s, fresh.fractional, fresh.sigma_fractional});
        const auto natural = estimate_frequency(
            simulate_fringe(spec, ramsey, offset_nat, derive_seed(master_seed, SeedStream::CampaignNatural, i)));
        out.natural_readings.push_back({"nat-" + std::to_string(i), static_cast<double>(2 * i + 1) * per_ion_s,
                                        natural.fractional, natural.sigma_fractional});
    }
    out.comparison = compare_ensembles(out.new_readings, out.natural_readings, campaign.alpha);
    return out;
}

}  // namespace isoclock
