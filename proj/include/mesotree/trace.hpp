#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mesotree/fenwick.hpp"
#include "mesotree/kernels.hpp"

namespace mesotree {

/// Vertices are numbered 1..n by birth time. 0 means "no vertex".
using Vertex = std::uint32_t;
using Time = std::int64_t;

/// Append-only record of a grown tree.
///
/// Degrees follow the graph convention: a non-root vertex has degree
/// 1 + (number of children), the root has degree equal to its number of
/// children, and every vertex has degree 1 at its birth time (so the root's
/// degree is 1 at times 1 and 2).
class TreeTrace {
public:
    /// T(1): the root alone.
    explicit TreeTrace(const AttachmentKernel& kernel);

    Time size() const { return static_cast<Time>(parent_.size()) - 1; }

    /// Appends vertex size()+1 as a child of `parent`; `xi` and `snapshot`
    /// are recorded for export only.
    Vertex append(Vertex parent, double xi, Time snapshot);

    Vertex parent(Vertex v) const { return parent_[v]; }
    /// Children of v in birth order; a child's index is its birth time.
    std::span<const Vertex> children(Vertex v) const { return children_[v]; }
    double xi(Vertex v) const { return xi_[v]; }
    Time snapshot(Vertex v) const { return snapshot_[v]; }

    /// deg(v, m); 0 if v is born after m. Throws if m is outside [1, size()].
    Degree deg_at(Vertex v, Time m) const;
    /// deg(v, size()).
    Degree degree(Vertex v) const;

    /// Psi(m) = sum over v <= m of f(deg(v, m)), maintained incrementally.
    double psi(Time m) const { return psi_[static_cast<std::size_t>(m)]; }
    /// Psi(m) recomputed from the child lists.
    double psi_from_scratch(Time m) const;

    const AttachmentKernel& kernel() const { return kernel_; }

private:
    AttachmentKernel kernel_;
    std::vector<Vertex> parent_;
    std::vector<std::vector<Vertex>> children_;
    std::vector<double> xi_;
    std::vector<Time> snapshot_;
    std::vector<double> psi_;
};

/// Structures supporting exact draws from "v in [m] with probability
/// proportional to f(deg(v, m))" without materialising snapshots.
class SnapshotIndex {
public:
    struct Features {
        bool weights = true;    // Fenwick tree over current weights f(deg(v, n))
        bool endpoints = true;  // flat edge-endpoint list
    };

    SnapshotIndex(const TreeTrace& trace, Features features);

    /// Must be called after every `TreeTrace::append`.
    void on_append(const TreeTrace& trace);

    /// Sum over v <= m of f(deg(v, n)) with n the current size.
    double weight_prefix(Time m) const { return fenwick_.prefix(static_cast<std::size_t>(m)); }
    double weight(Vertex v) const { return weights_[v]; }
    /// Smallest v with weight_prefix(v) > x, clamped to [1, limit].
    Vertex weight_search(double x, Time limit) const;

    /// Entries 2j-2, 2j-1 (0-based) are (child, parent) of the j-th edge.
    std::span<const Vertex> endpoints() const { return endpoints_; }

    const Features& features() const { return features_; }

private:
    Features features_;
    FenwickTree<double> fenwick_;
    std::vector<double> weights_;  // weights_[0] unused
    std::vector<Vertex> endpoints_;
};

}  // namespace mesotree
