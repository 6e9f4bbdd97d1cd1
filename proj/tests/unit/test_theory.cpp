#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "mesotree/canonical.hpp"
#include "mesotree/errors.hpp"
#include "mesotree/theory.hpp"

using namespace mesotree;

namespace {

// Direct partial sum of the rho-hat series until terms are negligible.
double rho_hat_by_summation(const AttachmentKernel& k, double lambda, long long max_terms = 5'000'000) {
    double prod = 1.0, sum = 0.0;
    for (long long i = 1; i <= max_terms; ++i) {
        const double f = k.evaluate(static_cast<Degree>(i));
        prod *= f / (lambda + f);
        sum += prod;
        if (prod < 1e-18) break;
    }
    return sum;
}

double solve_by_summation(const AttachmentKernel& k, double lo, double hi) {
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (rho_hat_by_summation(k, mid) > 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

void grow_labelled(const AttachmentKernel& k, double lambda, int max_size, std::vector<int>& parents,
                   std::vector<int>& children, double weight_so_far, double history,
                   std::map<std::string, double>& out) {
    // history = product of jump probabilities to reach this labelled tree
    const double w = weight_so_far;
    const auto code = CanonicalTree::from_parents(parents).code();
    out[code] += history * lambda / (lambda + w);
    if (static_cast<int>(parents.size()) == max_size) return;
    for (int v = 0; v < static_cast<int>(parents.size()); ++v) {
        const double rate = k.evaluate(children[v] + 1);
        const double new_w = w - rate + k.evaluate(children[v] + 2) + k.evaluate(1);
        parents.push_back(v);
        ++children[v];
        children.push_back(0);
        grow_labelled(k, lambda, max_size, parents, children, new_w, history * rate / (lambda + w), out);
        children.pop_back();
        --children[v];
        parents.pop_back();
    }
}

// Fringe law by summing over all labelled (recursive) histories, no symmetry
// quotient needed.
std::map<std::string, double> fringe_by_histories(const AttachmentKernel& k, double lambda, int max_size) {
    std::map<std::string, double> out;
    std::vector<int> parents{-1}, children{0};
    grow_labelled(k, lambda, max_size, parents, children, k.evaluate(1), 1.0, out);
    return out;
}

std::vector<AttachmentKernel> sample_kernels() {
    return {AttachmentKernel::affine(0.0), AttachmentKernel::affine(1.5), AttachmentKernel::uniform(),
            AttachmentKernel::tabulated({1.0, 3.0, 2.0}, ConstantTail{}, 1.0, false),
            AttachmentKernel::tabulated({1.0, 1.5}, PowerTail{0.5}, 1.0, true)};
}

}  // namespace

TEST_CASE("rho-hat of affine kernels") {
    for (double alpha : {0.0, 0.5, 2.0}) {
        const auto k = AttachmentKernel::affine(alpha);
        for (double lambda : {2.5, 3.0, 4.5}) {
            const auto r = rho_hat(k, lambda);
            REQUIRE(r.finite);
            CHECK(r.value == doctest::Approx((1.0 + alpha) / (lambda - 1.0)).epsilon(1e-12));
        }
    }
    // independent check by brute summation where it converges fast enough
    const auto k = AttachmentKernel::affine(0.0);
    CHECK(rho_hat(k, 4.0).value == doctest::Approx(rho_hat_by_summation(k, 4.0)).epsilon(1e-9));

    CHECK(rho_hat_abscissa(k) == 1.0);
    CHECK_FALSE(rho_hat(k, 1.0).finite);
    CHECK_FALSE(rho_hat(k, 0.5).finite);
    CHECK(std::isinf(rho_hat(k, 0.5).value));
    CHECK_THROWS_AS(rho_hat(k, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(rho_hat(k, -1.0), std::invalid_argument);
}

TEST_CASE("rho-hat matches direct summation and decreases") {
    for (const auto& k : sample_kernels()) {
        const double base = rho_hat_abscissa(k);
        double prev = std::numeric_limits<double>::infinity();
        for (double lambda : {base + 0.8, base + 1.0, base + 1.7, base + 3.0, base + 6.0}) {
            const auto r = rho_hat(k, lambda);
            INFO(k.describe(), " lambda=", lambda);
            REQUIRE(r.finite);
            CHECK(r.value < prev);
            prev = r.value;
            if (base == 0.0) CHECK(r.value == doctest::Approx(rho_hat_by_summation(k, lambda)).epsilon(1e-9));
        }
    }
}

TEST_CASE("Malthusian parameter") {
    for (double alpha : {0.0, 0.5, 1.0, 2.0}) {
        const auto res = solve_malthusian(AttachmentKernel::affine(alpha));
        CHECK(res.lambda_star == doctest::Approx(2.0 + alpha).epsilon(1e-10));
        CHECK(res.rho_hat_at_solution == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(res.bracket_lo <= res.lambda_star);
        CHECK(res.bracket_hi >= res.lambda_star);
    }
    CHECK(solve_malthusian(AttachmentKernel::uniform()).lambda_star == doctest::Approx(1.0).epsilon(1e-10));
    // f = (1, 2, 2, ...): rho_hat = (lambda + 2) / (lambda (lambda + 1)), so lambda^2 = 2
    const auto tab = AttachmentKernel::tabulated({1.0, 2.0}, ConstantTail{}, 1.0, true);
    CHECK(solve_malthusian(tab).lambda_star == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));

    for (const auto& k : sample_kernels()) {
        if (rho_hat_abscissa(k) != 0.0) continue;
        INFO(k.describe());
        CHECK(solve_malthusian(k).lambda_star == doctest::Approx(solve_by_summation(k, 1e-3, 20.0)).epsilon(1e-8));
    }
}

TEST_CASE("degree law") {
    const auto p = degree_law(AttachmentKernel::affine(0.0), 2.0, 200);
    REQUIRE(p.size() == 200);
    double sum = 0.0;
    for (int k = 1; k <= 200; ++k) {
        CHECK(p[k - 1] == doctest::Approx(4.0 / (k * (k + 1.0) * (k + 2.0))).epsilon(1e-12));
        sum += p[k - 1];
    }
    // telescoping: sum_{k<=K} 4/(k(k+1)(k+2)) = 1 - 2/((K+1)(K+2))
    CHECK(std::abs(sum - (1.0 - 2.0 / (201.0 * 202.0))) < 1e-12);

    CHECK(degree_law(AttachmentKernel::affine(1.0), 3.0, 1)[0] == doctest::Approx(0.6));
    const auto u = degree_law(AttachmentKernel::uniform(), 1.0, 30);
    for (int k = 1; k <= 30; ++k) CHECK(u[k - 1] == doctest::Approx(std::pow(0.5, k)).epsilon(1e-12));

    for (const auto& k : sample_kernels()) {
        const double lam = solve_malthusian(k).lambda_star;
        const auto q = degree_law(k, lam, 4000);
        double s = 0.0;
        for (double x : q) {
            REQUIRE(x >= 0.0);
            s += x;
        }
        CHECK(s <= 1.0 + 1e-12);
        CHECK(s > 0.999);
    }
}

TEST_CASE("fringe weights and small fringe probabilities") {
    const auto k0 = AttachmentKernel::affine(0.0);
    const auto single = CanonicalTree();
    const auto path2 = path_tree(2);
    const auto cherry = star_tree(2);
    CHECK(fringe_weight(single, k0) == 1.0);
    CHECK(fringe_weight(path2, k0) == 3.0);
    CHECK(fringe_weight(cherry, k0) == 5.0);

    const auto table = fringe_recursion(4, k0, 2.0);
    CHECK(table.at(single) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(table.at(path2) == doctest::Approx(2.0 / 15.0).epsilon(1e-12));
    CHECK(table.at(cherry) == doctest::Approx(4.0 / 105.0).epsilon(1e-12));
    CHECK(table.at(star_tree(5)) == 0.0);

    const auto ut = fringe_recursion(3, AttachmentKernel::uniform(), 1.0);
    CHECK(ut.at(single) == doctest::Approx(0.5));
    CHECK(ut.at(path2) == doctest::Approx(1.0 / 6.0));

    CHECK_THROWS_AS(fringe_bruteforce(star_tree(6), k0, 2.0, 6), std::invalid_argument);
}

TEST_CASE("fringe brute force, recursion and labelled histories agree") {
    for (const auto& k : sample_kernels()) {
        const double lam = solve_malthusian(k).lambda_star;
        const auto table = fringe_recursion(6, k, lam);
        const auto hist = fringe_by_histories(k, lam, 6);
        const auto trees = enumerate_trees(6);
        for (std::size_t s = 0; s < trees.size(); ++s)
            for (const auto& t : trees[s]) {
                INFO(k.describe(), " ", t.code());
                CHECK(table.at(t) == doctest::Approx(hist.at(t.code())).epsilon(1e-12));
                if (s < 5) CHECK(fringe_bruteforce(t, k, lam) == doctest::Approx(table.at(t)).epsilon(1e-12));
            }
    }
}

TEST_CASE("fringe table structure") {
    for (const auto& k : sample_kernels()) {
        const double lam = solve_malthusian(k).lambda_star;
        const auto p = degree_law(k, lam, 8);
        double prev_total = 0.0;
        for (int cap = 1; cap <= 7; ++cap) {
            const auto table = fringe_recursion(cap, k, lam);
            const double total = table.total_mass();
            CHECK(total <= 1.0 + 1e-12);
            CHECK(total > prev_total);
            prev_total = total;
            for (int s = 1; s <= cap; ++s) CHECK(table.mass_of_size(s) > 0.0);
            CHECK(table.mass_of_size(cap + 1) == 0.0);

            CHECK(table.at(CanonicalTree()) == doctest::Approx(p[0]).epsilon(1e-12));
            // root-child marginals never exceed the degree law
            std::vector<double> by_children(cap, 0.0);
            for (const auto& [t, w] : table.probability) by_children[t.root_children()] += w;
            for (int c = 0; c < cap; ++c) CHECK(by_children[c] <= p[c] + 1e-12);
        }
    }
}

TEST_CASE("subtree incidence matrix") {
    const auto single = CanonicalTree();
    CHECK(q_matrix(star_tree(2), single) == 2);
    CHECK(q_matrix(path_tree(3), path_tree(2)) == 1);
    CHECK(q_matrix(path_tree(3), single) == 0);
    CHECK(q_matrix(single, single) == 0);
    CHECK(q_matrix(CanonicalTree::from_code("((())()())"), single) == 2);
}

TEST_CASE("extended fringe law") {
    const auto k0 = AttachmentKernel::affine(0.0);
    const auto table = fringe_recursion(5, k0, 2.0);

    const auto d0 = extended_fringe_law(table, 0);
    CHECK(d0.depth == 0);
    for (const auto& [t, w] : table.probability) CHECK(d0.mass.at({t}) == w);

    const auto d1 = extended_fringe_law(table, 1);
    const auto single = CanonicalTree();
    const auto cherry = star_tree(2);
    CHECK(d1.mass.at({single, cherry}) == doctest::Approx(2.0 * table.at(cherry)));
    CHECK(d1.mass.at({single, path_tree(2)}) == doctest::Approx(table.at(path_tree(2))));

    // marginal over t0 for fixed t1 counts children; over t1 it stays below the fringe law
    std::map<CanonicalTree, double> over_t1;
    for (const auto& [key, w] : d1.mass) {
        REQUIRE(key.size() == 2);
        CHECK(w > 0.0);
        CHECK(key[0].size() < key[1].size());
        over_t1[key[0]] += w;
    }
    for (const auto& [t0, w] : over_t1) CHECK(w <= table.at(t0) + 1e-12);

    CHECK_THROWS(extended_fringe_law(table, 2));
}

TEST_CASE("affine constants") {
    // leaves of the plane-oriented recursive tree: mean 2n/3, variance n/9
    const auto c0 = clt_constants(0.0);
    CHECK(c0.p1 == doctest::Approx(2.0 / 3.0));
    CHECK(c0.sigma1_sq == doctest::Approx(1.0 / 9.0));
    const auto c1 = clt_constants(1.0);
    CHECK(c1.p1 == doctest::Approx(0.6));
    CHECK(c1.sigma1_sq == doctest::Approx(18.0 / 175.0));
    CHECK_THROWS(clt_constants(-0.5));

    const auto light = root_degree_constants(0.0, DelayLaw(Uniform01Delay{}, 0.5));
    CHECK(light.theta == doctest::Approx(0.5));
    CHECK(light.regime == RootRegime::L2Convergent);
    CHECK_FALSE(light.x_mean_infinite);
    CHECK(light.ex_x_truncated(1000.0) == doctest::Approx(1.0 / 3.0));

    const auto heavy = root_degree_constants(0.0, DelayLaw(InversePowerDelay{2.0}, 0.5));
    CHECK(heavy.regime == RootRegime::Heavy);
    CHECK(heavy.x_mean_infinite);
    CHECK(to_string(RootRegime::Heavy) == "heavy");
    CHECK(to_string(RootRegime::L2Convergent) == "L2-convergent");

    CHECK(root_degree_constants(1.0, DelayLaw(ZeroDelay{}, 0.5)).theta == doctest::Approx(1.0 / 3.0));
}
