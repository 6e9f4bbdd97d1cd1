#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "mesotree/canonical.hpp"

using namespace mesotree;

namespace {

// Every increasing parent array on s vertices (parent[i] < i).
void all_recursive_trees(int s, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == s) {
        out.push_back(cur);
        return;
    }
    const int i = static_cast<int>(cur.size());
    for (int p = 0; p < i; ++p) {
        cur.push_back(p);
        all_recursive_trees(s, cur, out);
        cur.pop_back();
    }
}

std::vector<std::vector<int>> recursive_trees(int s) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur{-1};
    all_recursive_trees(s, cur, out);
    return out;
}

// Bijections fixing the root that carry parent relations of a onto b.
long long count_isomorphisms(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return 0;
    const int s = static_cast<int>(a.size());
    std::vector<int> perm(s);
    std::iota(perm.begin(), perm.end(), 0);
    long long count = 0;
    do {
        if (perm[0] != 0) continue;
        bool ok = true;
        for (int i = 1; i < s && ok; ++i) ok = perm[a[i]] == b[perm[i]];
        if (ok) ++count;
    } while (std::next_permutation(perm.begin() + 1, perm.end()));
    return count;
}

}  // namespace

TEST_CASE("rooted tree counts by size") {
    const auto trees = enumerate_trees(9);
    const std::vector<std::size_t> expected{1, 1, 2, 4, 9, 20, 48, 115, 286};
    REQUIRE(trees.size() == expected.size());
    for (std::size_t s = 0; s < expected.size(); ++s) {
        CHECK(trees[s].size() == expected[s]);
        for (const auto& t : trees[s]) CHECK(t.size() == static_cast<int>(s) + 1);
        CHECK(std::is_sorted(trees[s].begin(), trees[s].end()));
    }
}

TEST_CASE("codes agree with brute-force isomorphism") {
    for (int s = 1; s <= 6; ++s) {
        const auto arrays = recursive_trees(s);
        for (std::size_t i = 0; i < arrays.size(); ++i) {
            const auto ci = CanonicalTree::from_parents(arrays[i]);
            // sample pairs to keep the quadratic loop small
            for (std::size_t j = i; j < arrays.size(); j += 1 + arrays.size() / 40) {
                const auto cj = CanonicalTree::from_parents(arrays[j]);
                REQUIRE((ci == cj) == (count_isomorphisms(arrays[i], arrays[j]) > 0));
            }
        }
        std::set<CanonicalTree> classes;
        for (const auto& a : arrays) classes.insert(CanonicalTree::from_parents(a));
        const auto listed = enumerate_trees(s)[s - 1];
        CHECK(std::vector<CanonicalTree>(classes.begin(), classes.end()) == listed);
    }
}

TEST_CASE("automorphism counts") {
    const auto all = enumerate_trees(7);
    for (const auto& level : all)
        for (const auto& t : level) {
            const auto p = t.to_parents();
            INFO(t.code());
            CHECK(t.automorphisms() == count_isomorphisms(p, p));
        }
    CHECK(star_tree(4).automorphisms() == 24);
    CHECK(path_tree(5).automorphisms() == 1);
}

TEST_CASE("code round trips and representatives") {
    const auto all = enumerate_trees(8);
    for (const auto& level : all)
        for (const auto& t : level) {
            CHECK(CanonicalTree::from_code(t.code()) == t);
            const auto p = t.to_parents();
            REQUIRE(p[0] == -1);
            for (std::size_t i = 1; i < p.size(); ++i) REQUIRE((p[i] >= 0 && p[i] < static_cast<int>(i)));
            CHECK(CanonicalTree::from_parents(p) == t);
            CHECK(CanonicalTree::join(t.child_codes()) == t);
            CHECK(static_cast<int>(t.child_codes().size()) == t.root_children());
        }
}

TEST_CASE("malformed or non-canonical codes are rejected") {
    CHECK_THROWS_AS(CanonicalTree::from_code("(()"), std::invalid_argument);
    CHECK_THROWS_AS(CanonicalTree::from_code("()()"), std::invalid_argument);
    CHECK_THROWS_AS(CanonicalTree::from_code(""), std::invalid_argument);
    CHECK_THROWS_AS(CanonicalTree::from_code("(x)"), std::invalid_argument);
    CHECK_THROWS_AS(CanonicalTree::from_code("(()(()))"), std::invalid_argument);
    CHECK_NOTHROW(CanonicalTree::from_code("((())())"));
}

TEST_CASE("named shapes") {
    CHECK(CanonicalTree().code() == "()");
    CHECK(path_tree(3).code() == "((()))");
    CHECK(star_tree(2).code() == "(()())");
    CHECK(star_tree(0) == CanonicalTree());
    CHECK(path_tree(1) == CanonicalTree());
    CHECK(star_tree(3).root_children() == 3);
}

TEST_CASE("subtree codes of a parent array") {
    // 0 -> {1, 2}, 1 -> {3}
    const std::vector<int> p{-1, 0, 0, 1};
    const auto codes = subtree_codes(p);
    REQUIRE(codes.size() == 4);
    CHECK(codes[3] == "()");
    CHECK(codes[2] == "()");
    CHECK(codes[1] == "(())");
    CHECK(codes[0] == "((())())");
}
