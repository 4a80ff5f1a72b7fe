#include "isoclock/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "isoclock/error.hpp"
#include "isoclock/hfclock.hpp"
#include "isoclock/rng.hpp"

namespace isoclock {
namespace {

constexpr double kZenoBudget = 0.01;
constexpr std::size_t kMaxProbes = 50'000'000;

}  // namespace

void validate(const JumpLadderConfig& c) {
    if (!(c.lifetime_e2_s > 0.0) || !(c.lifetime_e1_s > c.lifetime_e2_s)) {
        throw DomainError("ladder lifetimes must satisfy lifetime_e1 > lifetime_e2 > 0");
    }
    if (!(c.probe_perturbation >= 0.0 && c.probe_perturbation < 1.0)) {
        throw DomainError("probe perturbation must lie in [0, 1)");
    }
    if (!(c.probe_interval_s > 0.0)) throw DomainError("probe interval must be positive");
    if (!(c.horizon_s > 0.0)) throw DomainError("probe horizon must be positive");
    if (!(c.probe_sigma_frac >= 0.0)) throw DomainError("probe sigma must be non-negative");
    validate(c.detection());
}

double min_probe_interval(const JumpLadderConfig& c) {
    return c.probe_perturbation * c.lifetime_e1_s / kZenoBudget;
}

std::vector<double> make_schedule(const JumpLadderConfig& c) {
    validate(c);
    // epsilon / interval <= 0.01 / lifetime_e1, written without division.
    if (c.probe_perturbation * c.lifetime_e1_s > kZenoBudget * c.probe_interval_s) {
        throw DomainError("Zeno budget violated: probe interval must be at least " +
                          std::to_string(min_probe_interval(c)) + " s");
    }
    const auto count = static_cast<std::size_t>(std::floor(c.horizon_s / c.probe_interval_s * (1.0 + 1e-12)));
    if (count > kMaxProbes) throw DomainError("probe schedule too long; raise the interval or shorten the horizon");
    std::vector<double> times;
    times.reserve(count);
    for (std::size_t k = 1; k <= count; ++k) times.push_back(static_cast<double>(k) * c.probe_interval_s);
    return times;
}

JumpRun simulate_run(const JumpLadderConfig& config, std::uint64_t seed) {
    const auto schedule = make_schedule(config);
    const auto detection = config.detection();

    Rng rng(seed);
    JumpRun run;
    run.seed = seed;
    run.decay_time_s = std::exponential_distribution<double>(1.0 / config.lifetime_e1_s)(rng);
    // Each probe independently kicks the ion out of e1 with probability epsilon.
    if (config.probe_perturbation > 0.0) {
        const auto misses = std::geometric_distribution<std::int64_t>(config.probe_perturbation)(rng);
        if (static_cast<std::uint64_t>(misses) < schedule.size()) {
            run.decay_time_s = std::min(run.decay_time_s, schedule[static_cast<std::size_t>(misses)]);
        }
    }
    if (config.decay_time_hook) run.decay_time_s = config.decay_time_hook(run.decay_time_s);

    std::normal_distribution<double> noise(0.0, 1.0);
    for (const double t : schedule) {
        if (t >= run.decay_time_s) break;
        ProbeRecord probe;
        probe.t_probe_s = t;
        probe.sigma = config.probe_sigma_frac;
        probe.freq_frac = config.aging_beta_per_s * t + config.probe_sigma_frac * noise(rng);
        // Still in e1, so the clock-2 pulse shelves into e2 and the cycling transition lights up.
        probe.counts = detection.draw_counts(true, rng);
        probe.bright = probe.counts >= detection.threshold;
        run.probes.push_back(probe);
    }
    return run;
}

std::vector<JumpRun> simulate_runs(const JumpLadderConfig& config, std::size_t count, std::uint64_t master_seed) {
    std::vector<JumpRun> runs;
    runs.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        runs.push_back(simulate_run(config, derive_seed(master_seed, SeedStream::LadderRun, i)));
    }
    return runs;
}

AgingEstimate detect_aging(std::span<const JumpRun> runs, double confidence) {
    double sw = 0.0, swt = 0.0, swy = 0.0;
    std::size_t probes = 0;
    for (const auto& run : runs) {
        for (const auto& p : run.probes) {
            if (!(p.sigma > 0.0)) throw DomainError("probe records need a positive sigma for weighting");
            const double w = 1.0 / (p.sigma * p.sigma);
            sw += w;
            swt += w * p.t_probe_s;
            swy += w * p.freq_frac;
            ++probes;
        }
    }
    if (probes < 2) throw DomainError("aging regression needs at least two probes");
    const double t_mean = swt / sw;
    const double y_mean = swy / sw;
    double stt = 0.0, sty = 0.0;
    for (const auto& run : runs) {
        for (const auto& p : run.probes) {
            const double w = 1.0 / (p.sigma * p.sigma);
            stt += w * (p.t_probe_s - t_mean) * (p.t_probe_s - t_mean);
            sty += w * (p.t_probe_s - t_mean) * (p.freq_frac - y_mean);
        }
    }
    if (!(stt > 0.0)) throw DomainError("all probes at one time: aging slope is unidentifiable");

    AgingEstimate out;
    out.probes = probes;
    out.beta = sty / stt;
    out.sigma = 1.0 / std::sqrt(stt);
    const double z = normal_two_sided_quantile(confidence);
    out.lower = out.beta - z * out.sigma;
    out.upper = out.beta + z * out.sigma;
    out.z = out.beta / out.sigma;
    return out;
}

double ks_exponential(std::span<const double> samples, double rate) {
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double cdf = -std::expm1(-rate * sorted[i]);
        const auto k = static_cast<double>(i);
        d = std::max({d, (k + 1.0) / n - cdf, cdf - k / n});
    }
    return d;
}

MemorylessResult test_memoryless(std::span<const double> decay_times, std::uint64_t seed, int resamples,
                                 unsigned threads) {
    if (decay_times.size() < 10) throw DomainError("memoryless test needs at least 10 decay times");
    if (resamples < 1) throw DomainError("bootstrap needs at least one resample");
    for (const double t : decay_times) {
        if (!(t > 0.0)) throw DomainError("decay times must be positive");
    }
    const std::size_t n = decay_times.size();
    const double sum = std::accumulate(decay_times.begin(), decay_times.end(), 0.0);

    MemorylessResult out;
    out.rate = static_cast<double>(n) / sum;
    out.ks_statistic = ks_exponential(decay_times, out.rate);

    // The fitted-rate KS statistic is scale free, so resampling from a unit
    // exponential is exact. Order statistics come straight from the Renyi
    // representation X_(k) = sum_{i<=k} E_i / (n - i + 1), no sort needed.
    auto resample_statistic = [n](std::uint64_t resample_seed, std::vector<double>& xs) {
        Rng rng(resample_seed);
        std::exponential_distribution<double> unit(1.0);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += unit(rng) / static_cast<double>(n - i);
            xs[i] = acc;
        }
        double total = 0.0;
        for (const double x : xs) total += x;
        const double rate = static_cast<double>(n) / total;
        const auto nd = static_cast<double>(n);
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double cdf = -std::expm1(-rate * xs[i]);
            const auto k = static_cast<double>(i);
            d = std::max({d, (k + 1.0) / nd - cdf, cdf - k / nd});
        }
        return d;
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(resamples));
    std::vector<std::size_t> exceed(threads, 0);
    auto worker = [&](unsigned id) {
        std::vector<double> xs(n);
        for (int b = static_cast<int>(id); b < resamples; b += static_cast<int>(threads)) {
            const auto d = resample_statistic(derive_seed(seed, SeedStream::Bootstrap, static_cast<std::uint64_t>(b)), xs);
            if (d >= out.ks_statistic) ++exceed[id];
        }
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned id = 0; id < threads; ++id) pool.emplace_back(worker, id);
    }
    const auto count = std::accumulate(exceed.begin(), exceed.end(), std::size_t{0});
    out.p_value = (1.0 + static_cast<double>(count)) / (1.0 + static_cast<double>(resamples));
    return out;
}

}  // namespace isoclock
