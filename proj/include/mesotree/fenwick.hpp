#pragma once

#include <cstddef>
#include <vector>

namespace mesotree {

/// Binary indexed tree over positions 1..size() with prefix sums and
/// prefix-sum search. Positions can be appended at the end.
template <typename T>
class FenwickTree {
public:
    FenwickTree() : tree_(1, T{}) {}

    std::size_t size() const { return tree_.size() - 1; }

    /// Appends position size()+1 holding `value`.
    void push_back(T value) {
        const std::size_t i = tree_.size();
        // Node i covers (i - lowbit(i), i]; fold in the already-built children.
        T node = value;
        const std::size_t low = i & (~i + 1);
        for (std::size_t step = 1; step < low; step <<= 1) node += tree_[i - step];
        tree_.push_back(node);
    }

    void add(std::size_t pos, T delta) {
        for (; pos < tree_.size(); pos += pos & (~pos + 1)) tree_[pos] += delta;
    }

    /// Sum over positions 1..pos.
    T prefix(std::size_t pos) const {
        T sum{};
        for (; pos > 0; pos -= pos & (~pos + 1)) sum += tree_[pos];
        return sum;
    }

    /// Smallest position p with prefix(p) > target, or size()+1 if none.
    std::size_t upper_search(T target) const {
        std::size_t pos = 0;
        std::size_t mask = 1;
        while (mask * 2 < tree_.size()) mask *= 2;
        for (; mask > 0; mask >>= 1) {
            const std::size_t next = pos + mask;
            if (next < tree_.size() && !(target < tree_[next])) {
                pos = next;
                target -= tree_[next];
            }
        }
        return pos + 1;
    }

private:
    std::vector<T> tree_;  // tree_[0] unused
};

}  // namespace mesotree
