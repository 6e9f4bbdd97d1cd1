#include "mesotree/canonical.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string_view>

namespace mesotree {

namespace {

std::vector<std::vector<int>> children_lists(std::span<const int> parents, int& root) {
    const auto n = static_cast<int>(parents.size());
    std::vector<std::vector<int>> children(static_cast<std::size_t>(n));
    root = -1;
    for (int v = 0; v < n; ++v) {
        const int p = parents[static_cast<std::size_t>(v)];
        if (p < 0) {
            if (root >= 0) throw std::invalid_argument("parent array has more than one root");
            root = v;
        } else {
            if (p >= n) throw std::invalid_argument("parent index out of range");
            children[static_cast<std::size_t>(p)].push_back(v);
        }
    }
    if (root < 0) throw std::invalid_argument("parent array has no root");
    return children;
}

}  // namespace

CanonicalTree::CanonicalTree() : code_("()") {}

std::vector<std::string> subtree_codes(std::span<const int> parents) {
    int root = -1;
    const auto children = children_lists(parents, root);
    std::vector<int> order;
    order.reserve(parents.size());
    order.push_back(root);
    for (std::size_t i = 0; i < order.size(); ++i)
        for (int c : children[static_cast<std::size_t>(order[i])]) order.push_back(c);
    if (order.size() != parents.size()) throw std::invalid_argument("parent array is not a tree");

    std::vector<std::string> codes(parents.size());
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const auto v = static_cast<std::size_t>(*it);
        std::vector<std::string_view> sub;
        sub.reserve(children[v].size());
        for (int c : children[v]) sub.emplace_back(codes[static_cast<std::size_t>(c)]);
        std::sort(sub.begin(), sub.end());
        std::string code = "(";
        for (auto s : sub) code += s;
        code += ')';
        codes[v] = std::move(code);
    }
    return codes;
}

CanonicalTree CanonicalTree::from_parents(std::span<const int> parents) {
    int root = -1;
    children_lists(parents, root);
    return CanonicalTree(subtree_codes(parents)[static_cast<std::size_t>(root)]);
}

CanonicalTree CanonicalTree::from_code(std::string code) {
    CanonicalTree probe(code);
    std::vector<int> parents;
    try {
        parents = probe.to_parents();
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("malformed tree code '" + code + "'");
    }
    auto canon = from_parents(parents);
    if (canon.code_ != code) throw std::invalid_argument("tree code '" + code + "' is not canonical");
    return canon;
}

CanonicalTree CanonicalTree::join(std::vector<std::string> child_codes) {
    std::sort(child_codes.begin(), child_codes.end());
    std::string code = "(";
    for (auto& c : child_codes) code += c;
    code += ')';
    return CanonicalTree(std::move(code));
}

int CanonicalTree::root_children() const {
    int depth = 0;
    int count = 0;
    for (char ch : code_) {
        if (ch == '(') {
            if (depth == 1) ++count;
            ++depth;
        } else {
            --depth;
        }
    }
    return count;
}

std::vector<std::string> CanonicalTree::child_codes() const {
    std::vector<std::string> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < code_.size(); ++i) {
        if (code_[i] == '(') {
            if (depth == 1) start = i;
            ++depth;
        } else {
            --depth;
            if (depth == 1) out.push_back(code_.substr(start, i - start + 1));
        }
    }
    return out;
}

std::vector<int> CanonicalTree::to_parents() const {
    std::vector<int> parents;
    std::vector<int> stack;
    for (char ch : code_) {
        if (ch == '(') {
            if (stack.empty() && !parents.empty())
                throw std::invalid_argument("tree code has several roots");
            parents.push_back(stack.empty() ? -1 : stack.back());
            stack.push_back(static_cast<int>(parents.size()) - 1);
        } else if (ch == ')') {
            if (stack.empty()) throw std::invalid_argument("unbalanced tree code");
            stack.pop_back();
        } else {
            throw std::invalid_argument("tree code may only contain parentheses");
        }
    }
    if (!stack.empty() || parents.empty()) throw std::invalid_argument("unbalanced tree code");
    return parents;
}

long long CanonicalTree::automorphisms() const {
    const auto parents = to_parents();
    const auto codes = subtree_codes(parents);
    std::vector<std::map<std::string, int>> groups(parents.size());
    for (std::size_t v = 1; v < parents.size(); ++v)
        ++groups[static_cast<std::size_t>(parents[v])][codes[v]];
    long long total = 1;
    for (const auto& g : groups)
        for (const auto& [code, mult] : g)
            for (int i = 2; i <= mult; ++i) total *= i;
    return total;
}

std::vector<std::vector<CanonicalTree>> enumerate_trees(int max_size) {
    std::vector<std::vector<CanonicalTree>> levels;
    if (max_size < 1) return levels;
    levels.push_back({CanonicalTree{}});
    for (int s = 2; s <= max_size; ++s) {
        std::set<CanonicalTree> next;
        for (const auto& t : levels.back()) {
            auto parents = t.to_parents();
            for (int v = 0; v < static_cast<int>(parents.size()); ++v) {
                parents.push_back(v);
                next.insert(CanonicalTree::from_parents(parents));
                parents.pop_back();
            }
        }
        levels.emplace_back(next.begin(), next.end());
    }
    return levels;
}

CanonicalTree path_tree(int size) {
    if (size < 1) throw std::invalid_argument("path needs at least one vertex");
    std::vector<int> parents(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) parents[static_cast<std::size_t>(i)] = i - 1;
    return CanonicalTree::from_parents(parents);
}

CanonicalTree star_tree(int leaves) {
    if (leaves < 0) throw std::invalid_argument("star needs a non-negative leaf count");
    return CanonicalTree::join(std::vector<std::string>(static_cast<std::size_t>(leaves), "()"));
}

}  // namespace mesotree
