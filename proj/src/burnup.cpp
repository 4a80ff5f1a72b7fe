#include "isoclock/burnup.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>

#include "isoclock/error.hpp"
#include "isoclock/units.hpp"

namespace isoclock {
namespace {

struct OutEdge {
    std::size_t to;
    double rate;
};

// Per-node outgoing rates (s^-1) with zero-rate edges dropped, plus the
// diagonal (negative total removal rate).
struct RateGraph {
    std::vector<std::vector<OutEdge>> out;
    std::vector<double> diagonal;
};

RateGraph rate_graph(const ChainSpec& chain, double flux) {
    RateGraph g;
    g.out.resize(chain.size());
    g.diagonal.assign(chain.size(), 0.0);
    for (const auto& c : chain.captures) {
        const double rate = c.sigma_barns * units::kBarnCm2 * flux;
        if (rate > 0.0) g.out[c.from].push_back({c.to, rate});
    }
    for (const auto& d : chain.decays) {
        const double rate = d.lambda * d.branching;
        if (rate > 0.0) g.out[d.from].push_back({d.to, rate});
    }
    for (std::size_t i = 0; i < chain.size(); ++i) {
        double total = 0.0;
        for (const auto& e : g.out[i]) total += e.rate;
        g.diagonal[i] = -total;
    }
    return g;
}

// Points are sorted ascending.
double divided_difference_sorted(std::span<const double> z) {
    if (z.size() == 1) return std::exp(z.front());
    const double spread = z.back() - z.front();
    if (spread > 1.0) {
        return (divided_difference_sorted(z.subspan(1)) - divided_difference_sorted(z.first(z.size() - 1))) / spread;
    }
    // Clustered: Taylor series about the midpoint,
    // e^c * sum_m h_m(w) / (m + k)!, with h_m the complete homogeneous
    // symmetric polynomials of the offsets w (|w| <= 1/2).
    const double center = 0.5 * (z.front() + z.back());
    const std::size_t k = z.size() - 1;
    constexpr std::size_t kTerms = 30;
    std::array<double, kTerms> h{};
    h.fill(0.0);
    {
        const double w0 = z[0] - center;
        double p = 1.0;
        for (std::size_t m = 0; m < kTerms; ++m, p *= w0) h[m] = p;
    }
    for (std::size_t j = 1; j < z.size(); ++j) {
        const double w = z[j] - center;
        for (std::size_t m = 1; m < kTerms; ++m) h[m] += w * h[m - 1];
    }
    double inv_fact = 1.0;
    for (std::size_t i = 2; i <= k; ++i) inv_fact /= static_cast<double>(i);
    double sum = 0.0;
    for (std::size_t m = 0; m < kTerms; ++m) {
        sum += h[m] * inv_fact;
        inv_fact /= static_cast<double>(m + k + 1);
    }
    return std::exp(center) * sum;
}

std::vector<double> propagate_graph(const RateGraph& g, std::span<const double> initial, double dt) {
    const std::size_t n = g.diagonal.size();
    std::vector<double> result(n, 0.0);
    std::vector<double> path_z;
    std::vector<double> sorted;

    // Every path s -> ... -> v through the DAG contributes
    // N_s(0) * prod(rate * dt) * expdd(diag * dt along the path).
    std::function<void(std::size_t, double, double)> walk = [&](std::size_t node, double weight, double source) {
        path_z.push_back(g.diagonal[node] * dt);
        sorted.assign(path_z.begin(), path_z.end());
        std::sort(sorted.begin(), sorted.end());
        result[node] += source * weight * divided_difference_sorted(sorted);
        for (const auto& e : g.out[node]) walk(e.to, weight * e.rate * dt, source);
        path_z.pop_back();
    };

    for (std::size_t s = 0; s < n; ++s) {
        if (initial[s] == 0.0) continue;
        if (dt == 0.0) {
            result[s] += initial[s];
            continue;
        }
        walk(s, 1.0, initial[s]);
    }
    return result;
}

}  // namespace

double exp_divided_difference(std::span<const double> z) {
    if (z.empty()) throw DomainError("divided difference needs at least one point");
    std::vector<double> sorted(z.begin(), z.end());
    std::sort(sorted.begin(), sorted.end());
    return divided_difference_sorted(sorted);
}

std::size_t ChainSpec::index_of(const NuclideId& id) const {
    const auto it = std::find(nuclides.begin(), nuclides.end(), id);
    if (it == nuclides.end()) throw NotFoundError(to_string(id) + " is not part of the chain");
    return static_cast<std::size_t>(it - nuclides.begin());
}

bool ChainSpec::contains(const NuclideId& id) const noexcept {
    return std::find(nuclides.begin(), nuclides.end(), id) != nuclides.end();
}

ChainSpec build_chain(const NuclideRegistry& registry, std::span<const NuclideId> seeds, int depth_limit) {
    if (depth_limit < 0) throw DomainError("depth limit must be non-negative");

    // 0-1 BFS: decay edges cost 0, captures cost 1, so nodes pop in
    // non-decreasing capture depth and each is expanded once at its minimum.
    std::vector<NuclideId> discovered;
    std::map<NuclideId, int> depth;
    std::deque<std::pair<NuclideId, int>> queue;
    auto relax = [&](const NuclideId& id, int d, bool front) {
        const auto it = depth.find(id);
        if (it != depth.end() && it->second <= d) return;
        if (it == depth.end()) discovered.push_back(id);
        depth[id] = d;
        if (front) queue.emplace_front(id, d);
        else queue.emplace_back(id, d);
    };
    for (const auto& seed : seeds) {
        registry.lookup(seed);
        relax(seed, 0, false);
    }

    struct RawEdge {
        NuclideId from, to;
        bool capture;
        double sigma_or_lambda;
        double branching;
        DecayMode mode;
    };
    std::vector<RawEdge> raw;
    std::map<NuclideId, bool> expanded;

    while (!queue.empty()) {
        const auto [id, d] = queue.front();
        queue.pop_front();
        if (depth.at(id) != d || expanded[id]) continue;
        expanded[id] = true;
        if (d >= depth_limit) continue;  // sink

        const auto& nuclide = registry.lookup(id);
        for (const auto& branch : nuclide.decays) {
            if (!registry.contains(branch.daughter)) {
                throw NotFoundError("decay daughter " + to_string(branch.daughter) + " of " + to_string(id) +
                                    " is not in the registry");
            }
            raw.push_back({id, branch.daughter, false, nuclide.decay_constant(), branch.fraction, branch.mode});
            relax(branch.daughter, d, true);
        }
        for (const auto& capture : registry.captures_of(id)) {
            if (!registry.contains(capture.product)) {
                throw NotFoundError("capture product " + to_string(capture.product) + " is not in the registry");
            }
            const double direct = capture.ground_fraction;
            if (direct > 0.0) {
                const NuclideId ground{capture.product.z, capture.product.n, false};
                if (!registry.contains(ground)) {
                    throw NotFoundError("capture ground state " + to_string(ground) + " is not in the registry");
                }
                raw.push_back({id, ground, true, capture.sigma_barns * direct, 1.0, DecayMode::BetaMinus});
                relax(ground, d + 1, false);
            }
            if (direct < 1.0) {
                raw.push_back({id, capture.product, true, capture.sigma_barns * (1.0 - direct), 1.0, DecayMode::BetaMinus});
                relax(capture.product, d + 1, false);
            }
        }
    }

    // Kahn's algorithm, ties broken by discovery order for reproducible layouts.
    std::map<NuclideId, std::size_t> discovery_index;
    for (std::size_t i = 0; i < discovered.size(); ++i) discovery_index[discovered[i]] = i;
    std::vector<std::size_t> indegree(discovered.size(), 0);
    std::vector<std::vector<std::size_t>> succ(discovered.size());
    for (const auto& e : raw) {
        const auto from = discovery_index.at(e.from);
        const auto to = discovery_index.at(e.to);
        if (from == to) throw DomainError("cycle detected at " + to_string(e.from));
        succ[from].push_back(to);
        ++indegree[to];
    }
    std::vector<std::size_t> order;
    std::vector<bool> ready_flag(discovered.size(), false);
    while (order.size() < discovered.size()) {
        std::size_t next = discovered.size();
        for (std::size_t i = 0; i < discovered.size(); ++i) {
            if (!ready_flag[i] && indegree[i] == 0) {
                next = i;
                break;
            }
        }
        if (next == discovered.size()) {
            throw DomainError("cycle detected in reaction/decay graph (check isomer decay modes)");
        }
        ready_flag[next] = true;
        order.push_back(next);
        for (const auto s : succ[next]) --indegree[s];
    }

    ChainSpec chain;
    std::vector<std::size_t> position(discovered.size());
    for (std::size_t p = 0; p < order.size(); ++p) {
        position[order[p]] = p;
        chain.nuclides.push_back(discovered[order[p]]);
        chain.mass_u.push_back(registry.lookup(discovered[order[p]]).mass_u());
    }
    for (const auto& e : raw) {
        const auto from = position[discovery_index.at(e.from)];
        const auto to = position[discovery_index.at(e.to)];
        if (e.capture) chain.captures.push_back({from, to, e.sigma_or_lambda});
        else chain.decays.push_back({from, to, e.sigma_or_lambda, e.branching, e.mode});
    }
    return chain;
}

Eigen::MatrixXd burnup_matrix(const ChainSpec& chain, double flux) {
    const auto g = rate_graph(chain, flux);
    const auto n = static_cast<Eigen::Index>(chain.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < chain.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        a(col, col) = g.diagonal[i];
        for (const auto& e : g.out[i]) a(static_cast<Eigen::Index>(e.to), col) += e.rate;
    }
    return a;
}

std::map<NuclideId, double> inventory_from_target(const NuclideRegistry& registry, const NuclideId& target,
                                                  double mass_g, double enrichment,
                                                  const std::map<NuclideId, double>& impurities) {
    if (!(mass_g >= 0.0)) throw DomainError("target mass must be non-negative");
    double fraction_sum = enrichment;
    if (enrichment < 0.0 || enrichment > 1.0) throw DomainError("enrichment must lie in [0, 1]");
    for (const auto& [id, f] : impurities) {
        if (f < 0.0 || f > 1.0) throw DomainError("impurity fraction for " + to_string(id) + " must lie in [0, 1]");
        fraction_sum += f;
    }
    if (fraction_sum > 1.0 + 1e-12) throw DomainError("enrichment and impurity fractions sum above 1");

    std::map<NuclideId, double> inventory;
    auto add = [&](const NuclideId& id, double fraction) {
        const auto& nuclide = registry.lookup(id);
        inventory[id] += mass_g * fraction / nuclide.mass_u() * units::kAvogadro;
    };
    add(target, enrichment);
    for (const auto& [id, f] : impurities) add(id, f);
    return inventory;
}

const std::vector<double>& InventoryTrajectory::series(const NuclideId& id) const {
    const auto it = std::find(nuclides.begin(), nuclides.end(), id);
    if (it == nuclides.end()) throw NotFoundError(to_string(id) + " is not in the trajectory");
    return counts[static_cast<std::size_t>(it - nuclides.begin())];
}

double InventoryTrajectory::total_at(std::size_t time_index) const {
    double total = 0.0;
    for (const auto& s : counts) total += s.at(time_index);
    return total;
}

std::vector<double> propagate(const ChainSpec& chain, double flux, std::span<const double> initial, double dt) {
    if (initial.size() != chain.size()) throw DomainError("inventory size does not match the chain");
    if (!(dt >= 0.0)) throw DomainError("propagation interval must be non-negative");
    if (!(flux >= 0.0)) throw DomainError("flux must be non-negative");
    return propagate_graph(rate_graph(chain, flux), initial, dt);
}

InventoryTrajectory solve_inventory(const ChainSpec& chain, const IrradiationScenario& scenario) {
    for (const auto& seg : scenario.segments) {
        if (!(seg.duration_s > 0.0)) throw DomainError("segment durations must be positive");
        if (!(seg.flux >= 0.0)) throw DomainError("segment flux must be non-negative");
    }
    if (scenario.grid_points < 2) throw DomainError("grid_points must be at least 2");

    std::vector<double> state(chain.size(), 0.0);
    for (const auto& [id, atoms] : scenario.initial_inventory) {
        if (!(atoms >= 0.0)) throw DomainError("initial atom counts must be non-negative");
        state[chain.index_of(id)] += atoms;
    }

    // Uniform grid merged with segment ends; grid points within 1e-9 of a
    // boundary snap onto it.
    std::vector<double> ends;
    double total = 0.0;
    for (const auto& seg : scenario.segments) ends.push_back(total += seg.duration_s);

    InventoryTrajectory out;
    out.nuclides = chain.nuclides;
    out.counts.assign(chain.size(), {});
    out.times.push_back(0.0);
    if (total > 0.0) {
        std::vector<double> grid;
        const auto steps = scenario.grid_points - 1;
        for (std::size_t i = 1; i <= steps; ++i) {
            grid.push_back(total * static_cast<double>(i) / static_cast<double>(steps));
        }
        std::vector<double> merged = ends;
        const double snap = 1e-9 * total;
        for (const double t : grid) {
            const bool near_end = std::any_of(ends.begin(), ends.end(), [&](double e) { return std::abs(e - t) <= snap; });
            if (!near_end) merged.push_back(t);
        }
        std::sort(merged.begin(), merged.end());
        out.times.insert(out.times.end(), merged.begin(), merged.end());
    }

    auto record = [&](const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) out.counts[i].push_back(values[i]);
    };
    record(state);

    std::size_t time_index = 1;
    double segment_start = 0.0;
    for (std::size_t s = 0; s < scenario.segments.size(); ++s) {
        const auto graph = rate_graph(chain, scenario.segments[s].flux);
        const double segment_end = ends[s];
        while (time_index < out.times.size() && out.times[time_index] < segment_end) {
            record(propagate_graph(graph, state, out.times[time_index] - segment_start));
            ++time_index;
        }
        state = propagate_graph(graph, state, segment_end - segment_start);
        record(state);
        out.segment_ends.push_back(time_index);
        ++time_index;
        segment_start = segment_end;
    }
    return out;
}

YieldReport yield_report(const ChainSpec& chain, const InventoryTrajectory& trajectory, const NuclideId& nuclide,
                         double negligible_threshold) {
    const auto idx = chain.index_of(nuclide);
    const auto& y = trajectory.series(nuclide);
    const auto& t = trajectory.times;

    YieldReport report;
    report.nuclide = nuclide;
    report.atoms = y.back();
    report.mass_g = report.atoms * chain.mass_u[idx] / units::kAvogadro;

    const double n = static_cast<double>(t.size());
    const double t_mean = std::accumulate(t.begin(), t.end(), 0.0) / n;
    const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double stt = 0.0, sty = 0.0, ymax = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        stt += (t[i] - t_mean) * (t[i] - t_mean);
        sty += (t[i] - t_mean) * (y[i] - y_mean);
        ymax = std::max(ymax, std::abs(y[i]));
    }
    const double slope = stt > 0.0 ? sty / stt : 0.0;
    if (ymax > 0.0) {
        double worst = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            worst = std::max(worst, std::abs(y[i] - (y_mean + slope * (t[i] - t_mean))));
        }
        report.linearity = worst / ymax;
    }

    // Everything downstream of a capture on the product counts as double-capture material.
    std::vector<std::vector<std::size_t>> succ(chain.size());
    for (const auto& c : chain.captures) succ[c.from].push_back(c.to);
    for (const auto& d : chain.decays) succ[d.from].push_back(d.to);
    for (const auto& c : chain.captures) {
        if (c.from != idx) continue;
        std::vector<bool> seen(chain.size(), false);
        std::vector<std::size_t> stack{c.to};
        double atoms = 0.0;
        while (!stack.empty()) {
            const auto v = stack.back();
            stack.pop_back();
            if (seen[v]) continue;
            seen[v] = true;
            atoms += trajectory.counts[v].back();
            for (const auto w : succ[v]) stack.push_back(w);
        }
        ContaminantRatio ratio;
        ratio.nuclide = chain.nuclides[c.to];
        ratio.ratio = report.atoms > 0.0 ? atoms / report.atoms : 0.0;
        ratio.negligible = ratio.ratio < negligible_threshold;
        report.contaminants.push_back(ratio);
    }
    return report;
}

}  // namespace isoclock
