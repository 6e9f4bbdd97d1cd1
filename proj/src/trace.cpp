#include "mesotree/trace.hpp"

#include <algorithm>
#include <stdexcept>

namespace mesotree {

TreeTrace::TreeTrace(const AttachmentKernel& kernel)
    : kernel_(kernel), parent_{0, 0}, children_(2), xi_{0.0, 0.0}, snapshot_{0, 1},
      psi_{0.0, kernel.evaluate(1)} {}

Vertex TreeTrace::append(Vertex parent, double xi, Time snapshot) {
    const Time n = size();
    if (parent < 1 || parent > n) throw std::out_of_range("parent must be an existing vertex");
    const Degree d = degree(parent);
    const auto child = static_cast<Vertex>(n + 1);
    parent_.push_back(parent);
    children_.emplace_back();
    children_[parent].push_back(child);
    xi_.push_back(xi);
    snapshot_.push_back(snapshot);
    const Degree d_new = degree(parent);
    double next = psi_.back() + kernel_.evaluate(1);
    if (d_new != d) next += kernel_.evaluate(d_new) - kernel_.evaluate(d);
    psi_.push_back(next);
    return child;
}

Degree TreeTrace::deg_at(Vertex v, Time m) const {
    if (m < 1 || m > size()) throw std::invalid_argument("deg_at: time outside [1, n]");
    if (v < 1 || static_cast<Time>(v) > size()) throw std::invalid_argument("deg_at: unknown vertex");
    if (static_cast<Time>(v) > m) return 0;
    const auto& c = children_[v];
    const auto count = static_cast<Degree>(
        std::upper_bound(c.begin(), c.end(), static_cast<Vertex>(m)) - c.begin());
    if (v == 1) return std::max<Degree>(count, 1);
    return count + 1;
}

Degree TreeTrace::degree(Vertex v) const {
    const auto count = static_cast<Degree>(children_[v].size());
    if (v == 1) return std::max<Degree>(count, 1);
    return count + 1;
}

double TreeTrace::psi_from_scratch(Time m) const {
    double sum = 0.0;
    for (Time v = 1; v <= m; ++v) sum += kernel_.evaluate(deg_at(static_cast<Vertex>(v), m));
    return sum;
}

SnapshotIndex::SnapshotIndex(const TreeTrace& trace, Features features)
    : features_(features), weights_{0.0} {
    const Time n = trace.size();
    if (features_.weights) {
        for (Time v = 1; v <= n; ++v) {
            const double w = trace.kernel().evaluate(trace.degree(static_cast<Vertex>(v)));
            weights_.push_back(w);
            fenwick_.push_back(w);
        }
    }
    if (features_.endpoints) {
        for (Time v = 2; v <= n; ++v) {
            endpoints_.push_back(static_cast<Vertex>(v));
            endpoints_.push_back(trace.parent(static_cast<Vertex>(v)));
        }
    }
}

void SnapshotIndex::on_append(const TreeTrace& trace) {
    const auto child = static_cast<Vertex>(trace.size());
    const Vertex parent = trace.parent(child);
    if (features_.weights) {
        const double w_parent = trace.kernel().evaluate(trace.degree(parent));
        fenwick_.add(parent, w_parent - weights_[parent]);
        weights_[parent] = w_parent;
        const double w_child = trace.kernel().evaluate(1);
        weights_.push_back(w_child);
        fenwick_.push_back(w_child);
    }
    if (features_.endpoints) {
        endpoints_.push_back(child);
        endpoints_.push_back(parent);
    }
}

Vertex SnapshotIndex::weight_search(double x, Time limit) const {
    const auto pos = fenwick_.upper_search(x);
    return static_cast<Vertex>(std::clamp<std::size_t>(pos, 1, static_cast<std::size_t>(limit)));
}

}  // namespace mesotree
