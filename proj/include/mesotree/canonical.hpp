#pragma once

#include <compare>
#include <span>
#include <string>
#include <vector>

namespace mesotree {

/// Rooted unordered tree in AHU canonical form: a vertex is encoded as "("
/// followed by the sorted codes of its children and ")". Two rooted trees
/// share a code exactly when a root-preserving isomorphism maps one onto the
/// other.
class CanonicalTree {
public:
    /// The one-vertex tree.
    CanonicalTree();

    /// From a parent array: parents[0] < 0 marks the root, every other entry
    /// names the parent's index.
    static CanonicalTree from_parents(std::span<const int> parents);
    /// From an already canonical code; throws std::invalid_argument if the
    /// string is not well formed or not in canonical order.
    static CanonicalTree from_code(std::string code);
    /// Root with the given child subtrees.
    static CanonicalTree join(std::vector<std::string> child_codes);

    const std::string& code() const { return code_; }
    int size() const { return static_cast<int>(code_.size() / 2); }
    int root_children() const;
    /// Codes of the root's child subtrees, in canonical (sorted) order.
    std::vector<std::string> child_codes() const;

    /// A representative in preorder: entry 0 is the root (parent -1) and
    /// every parent index is smaller than its child's.
    std::vector<int> to_parents() const;

    /// Number of root-preserving automorphisms, from the code's symmetry.
    long long automorphisms() const;

    friend auto operator<=>(const CanonicalTree&, const CanonicalTree&) = default;

private:
    explicit CanonicalTree(std::string code) : code_(std::move(code)) {}
    std::string code_;
};

/// Canonical code of the subtree rooted at each vertex of a parent array
/// (same conventions as CanonicalTree::from_parents).
std::vector<std::string> subtree_codes(std::span<const int> parents);

/// All distinct rooted trees with 1..max_size vertices, grouped by size
/// (index s-1 holds the trees on s vertices, sorted by code).
std::vector<std::vector<CanonicalTree>> enumerate_trees(int max_size);

/// Path on `size` vertices rooted at one end.
CanonicalTree path_tree(int size);
/// Root with `leaves` leaf children.
CanonicalTree star_tree(int leaves);

}  // namespace mesotree
