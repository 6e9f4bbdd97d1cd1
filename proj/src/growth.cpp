#include "mesotree/growth.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "mesotree/errors.hpp"

namespace mesotree {

SamplerStats& SamplerStats::operator+=(const SamplerStats& other) {
    draws += other.draws;
    proposals += other.proposals;
    max_proposals_single_draw = std::max(max_proposals_single_draw, other.max_proposals_single_draw);
    return *this;
}

namespace {

double affine_alpha(const AttachmentKernel& kernel) {
    if (kernel.is_affine()) return kernel.alpha();
    if (kernel.is_uniform()) return 0.0;
    throw StrategyError("edge-endpoint sampling needs an affine or uniform kernel");
}

}  // namespace

Vertex sample_parent_affine(const SnapshotIndex& index, Time m, const AttachmentKernel& kernel,
                            Rng& rng) {
    if (m <= 1) return 1;
    if (kernel.is_uniform()) return static_cast<Vertex>(1 + rng.below(static_cast<std::uint64_t>(m)));
    const double alpha = affine_alpha(kernel);
    const auto edges2 = static_cast<std::uint64_t>(2 * (m - 1));
    if (alpha > 0.0) {
        const double md = static_cast<double>(m);
        const double psi = static_cast<double>(edges2) + md * alpha;
        if (rng.uniform() * psi < md * alpha)
            return static_cast<Vertex>(1 + rng.below(static_cast<std::uint64_t>(m)));
    }
    return index.endpoints()[rng.below(edges2)];
}

Vertex sample_parent_rejection(const TreeTrace& trace, const SnapshotIndex& index, Time m, Rng& rng,
                               SamplerStats* stats) {
    const auto& kernel = trace.kernel();
    if (!kernel.monotone())
        throw StrategyError("rejection sampling requires a non-decreasing attachment function");
    if (m <= 1) {
        if (stats) {
            ++stats->draws;
            ++stats->proposals;
            stats->max_proposals_single_draw = std::max<std::uint64_t>(stats->max_proposals_single_draw, 1);
        }
        return 1;
    }
    const double total = index.weight_prefix(m);
    const bool current = m == trace.size();
    std::uint64_t tries = 0;
    for (;;) {
        ++tries;
        const Vertex v = index.weight_search(rng.uniform() * total, m);
        // Snapshot degree never exceeds the current one, so the ratio is <= 1.
        bool accept = current;
        if (!accept) {
            const double w_now = index.weight(v);
            const double w_then = kernel.evaluate(trace.deg_at(v, m));
            accept = w_then >= w_now || rng.uniform() * w_now < w_then;
        }
        if (accept) {
            if (stats) {
                ++stats->draws;
                stats->proposals += tries;
                stats->max_proposals_single_draw = std::max(stats->max_proposals_single_draw, tries);
            }
            return v;
        }
    }
}

Vertex sample_parent_scan(const TreeTrace& trace, Time m, Rng& rng) {
    if (m <= 1) return 1;
    std::vector<double> cumulative(static_cast<std::size_t>(m));
    double acc = 0.0;
    for (Time v = 1; v <= m; ++v) {
        acc += trace.kernel().evaluate(trace.deg_at(static_cast<Vertex>(v), m));
        cumulative[static_cast<std::size_t>(v - 1)] = acc;
    }
    const double x = rng.uniform() * acc;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
    const auto idx = std::min<std::ptrdiff_t>(it - cumulative.begin(), m - 1);
    return static_cast<Vertex>(idx + 1);
}

std::vector<double> attachment_law_scan(const TreeTrace& trace, Time m) {
    std::vector<double> law(static_cast<std::size_t>(m));
    double total = 0.0;
    for (Time v = 1; v <= m; ++v) {
        const double w = trace.kernel().evaluate(trace.deg_at(static_cast<Vertex>(v), m));
        law[static_cast<std::size_t>(v - 1)] = w;
        total += w;
    }
    for (auto& p : law) p /= total;
    return law;
}

std::vector<double> attachment_law_affine(const SnapshotIndex& index, Time m,
                                          const AttachmentKernel& kernel) {
    std::vector<double> law(static_cast<std::size_t>(m), 0.0);
    if (m <= 1) {
        law[0] = 1.0;
        return law;
    }
    const double md = static_cast<double>(m);
    if (kernel.is_uniform()) {
        std::fill(law.begin(), law.end(), 1.0 / md);
        return law;
    }
    const double alpha = affine_alpha(kernel);
    const auto edges2 = static_cast<std::size_t>(2 * (m - 1));
    const double psi = static_cast<double>(edges2) + md * alpha;
    const double p_uniform = md * alpha / psi;
    for (auto& p : law) p = p_uniform / md;
    const double per_endpoint = (1.0 - p_uniform) / static_cast<double>(edges2);
    const auto ends = index.endpoints();
    for (std::size_t i = 0; i < edges2; ++i) law[ends[i] - 1] += per_endpoint;
    return law;
}

std::vector<double> attachment_law_rejection(const TreeTrace& trace, const SnapshotIndex& index,
                                             Time m) {
    // Stationary law of the accept/retry loop: proposal q_v times acceptance
    // a_v, renormalised.
    std::vector<double> law(static_cast<std::size_t>(m));
    const double total = index.weight_prefix(m);
    double accepted = 0.0;
    for (Time v = 1; v <= m; ++v) {
        const auto u = static_cast<Vertex>(v);
        const double q = (index.weight_prefix(v) - index.weight_prefix(v - 1)) / total;
        const double a =
            std::min(1.0, trace.kernel().evaluate(trace.deg_at(u, m)) / index.weight(u));
        law[static_cast<std::size_t>(v - 1)] = q * a;
        accepted += q * a;
    }
    for (auto& p : law) p /= accepted;
    return law;
}

TreeTrace grow(const GrowthConfig& config, SamplerStats* stats) {
    config.validate();
    const auto strategy = config.resolved_sampler();
    const auto& kernel = config.kernel;
    if (strategy == SamplerStrategy::AffineEdgeTrick && !(kernel.is_affine() || kernel.is_uniform()))
        throw StrategyError("edge-endpoint sampling needs an affine or uniform kernel");
    if (strategy == SamplerStrategy::FenwickRejection && !kernel.monotone())
        throw StrategyError("rejection sampling requires a non-decreasing attachment function");

    Rng rng(config.seed);
    TreeTrace trace(kernel);
    SnapshotIndex index(trace, {.weights = strategy == SamplerStrategy::FenwickRejection,
                                .endpoints = strategy == SamplerStrategy::AffineEdgeTrick});
    const double beta = config.delay.beta();

    // T(2) is forced.
    trace.append(1, 0.0, 1);
    index.on_append(trace);

    for (Time n = 2; n < config.n_final; ++n) {
        const double xi = config.delay.sample(rng);
        const Time m = snapshot_time(n, xi, beta);
        Vertex parent = 1;
        switch (strategy) {
            case SamplerStrategy::AffineEdgeTrick:
                parent = sample_parent_affine(index, m, kernel, rng);
                break;
            case SamplerStrategy::FenwickRejection:
                parent = sample_parent_rejection(trace, index, m, rng, stats);
                break;
            case SamplerStrategy::LinearScanOracle:
            case SamplerStrategy::Auto:
                parent = sample_parent_scan(trace, m, rng);
                break;
        }
        trace.append(parent, xi, m);
        index.on_append(trace);
    }
    return trace;
}

void write_trace(std::ostream& os, const TreeTrace& trace, const std::string& config_hash) {
    fmt::print(os, "# config_hash={} n={}\n", config_hash, trace.size());
    fmt::print(os, "# child parent xi m\n");
    for (Time v = 1; v <= trace.size(); ++v) {
        const auto u = static_cast<Vertex>(v);
        fmt::print(os, "{} {} {} {}\n", v, trace.parent(u), trace.xi(u), trace.snapshot(u));
    }
}

}  // namespace mesotree
