#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mesotree/kernels.hpp"
#include "mesotree/rng.hpp"
#include "mesotree/trace.hpp"

namespace mesotree {

/// Counters for the rejection sampler.
struct SamplerStats {
    std::uint64_t draws = 0;      // accepted samples
    std::uint64_t proposals = 0;  // including the accepted ones
    std::uint64_t max_proposals_single_draw = 0;

    double mean_proposals() const {
        return draws == 0 ? 0.0 : static_cast<double>(proposals) / static_cast<double>(draws);
    }
    SamplerStats& operator+=(const SamplerStats& other);
};

/// Exact draw for f(k) = k + alpha (or f == 1) using the edge-endpoint list:
/// with probability m*alpha/Psi(m) a uniform vertex of [m], otherwise a
/// uniform endpoint among the first m-1 edges.
Vertex sample_parent_affine(const SnapshotIndex& index, Time m, const AttachmentKernel& kernel,
                            Rng& rng);

/// Exact draw for non-decreasing kernels: proposals proportional to current
/// weights restricted to [m], accepted with probability
/// f(deg(v, m)) / f(deg(v, n)). Throws StrategyError for non-monotone kernels.
Vertex sample_parent_rejection(const TreeTrace& trace, const SnapshotIndex& index, Time m,
                               Rng& rng, SamplerStats* stats = nullptr);

/// Reference draw: inverse CDF over the explicitly computed snapshot weights.
Vertex sample_parent_scan(const TreeTrace& trace, Time m, Rng& rng);

/// Exact attachment law of each sampler, computed from the structures that
/// sampler reads. Entry v-1 holds P(parent = v).
std::vector<double> attachment_law_scan(const TreeTrace& trace, Time m);
std::vector<double> attachment_law_affine(const SnapshotIndex& index, Time m,
                                          const AttachmentKernel& kernel);
std::vector<double> attachment_law_rejection(const TreeTrace& trace, const SnapshotIndex& index,
                                             Time m);

/// Grows T(1), ..., T(config.n_final). Deterministic given the config.
TreeTrace grow(const GrowthConfig& config, SamplerStats* stats = nullptr);

/// Edge-list export: a `#` header carrying the config hash, then one line
/// per vertex in birth order: "child parent xi m" (root: "1 0 0 1").
void write_trace(std::ostream& os, const TreeTrace& trace, const std::string& config_hash);

}  // namespace mesotree
