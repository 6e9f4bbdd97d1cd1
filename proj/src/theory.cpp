#include "mesotree/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mesotree/errors.hpp"

namespace mesotree {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Terms summed explicitly before the closed-form affine tail takes over.
constexpr int kAffineTerms = 64;
constexpr long long kMaxTerms = 50'000'000;
constexpr double kDivergenceCap = 1e6;

RhoHatValue divergent(long long terms) {
    RhoHatValue r;
    r.value = kInf;
    r.finite = false;
    r.terms = terms;
    r.tail = kInf;
    r.certificate = TailCertificate::Divergent;
    return r;
}

std::vector<int> child_counts(const std::vector<int>& parents) {
    std::vector<int> counts(parents.size(), 0);
    for (std::size_t v = 1; v < parents.size(); ++v) ++counts[static_cast<std::size_t>(parents[v])];
    return counts;
}

}  // namespace

RhoHatValue rho_hat(const AttachmentKernel& kernel, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("rho_hat requires lambda > 0");

    if (kernel.is_uniform()) {
        const double r = 1.0 / (1.0 + lambda);
        RhoHatValue out;
        out.terms = 1;
        out.tail = r * r / (1.0 - r);
        out.value = r + out.tail;
        out.certificate = TailCertificate::Geometric;
        return out;
    }

    if (kernel.is_affine()) {
        // prod_{i<=k} (i+a)/(i+a+lambda) ~ k^{-lambda}; the tail after K terms
        // sums to P_K (K + 1 + a) / (lambda - 1) by the Gauss summation of
        // the ratio of Gamma functions.
        if (lambda <= 1.0) return divergent(0);
        const double a = kernel.alpha();
        double p = 1.0;
        double partial = 0.0;
        for (int k = 1; k <= kAffineTerms; ++k) {
            const double f = k + a;
            p *= f / (lambda + f);
            partial += p;
        }
        RhoHatValue out;
        out.terms = kAffineTerms;
        out.tail = p * (kAffineTerms + 1 + a) / (lambda - 1.0);
        out.value = partial + out.tail;
        out.certificate = TailCertificate::Affine;
        return out;
    }

    const auto& tab = std::get<TabulatedKernel>(kernel.kind());
    const auto K = static_cast<long long>(tab.values.size());
    double p = 1.0;
    double partial = 0.0;
    for (long long k = 1; k <= K; ++k) {
        const double f = tab.values[static_cast<std::size_t>(k - 1)];
        p *= f / (lambda + f);
        partial += p;
    }
    if (std::holds_alternative<ConstantTail>(tab.tail)) {
        const double c = tab.values.back();
        const double r = c / (lambda + c);
        RhoHatValue out;
        out.terms = K;
        out.tail = p * r / (1.0 - r);
        out.value = partial + out.tail;
        out.certificate = TailCertificate::Geometric;
        return out;
    }

    const double expo = std::get<PowerTail>(tab.tail).exponent;
    for (long long k = K + 1; k <= kMaxTerms; ++k) {
        const double f = std::pow(static_cast<double>(k), expo);
        const double r = f / (lambda + f);
        p *= r;
        partial += p;
        if (partial > kDivergenceCap) return divergent(k);
        const double tail = p * r / (1.0 - r);
        if (p < 1e-15 && tail < 1e-13 * std::max(1.0, partial)) {
            RhoHatValue out;
            out.terms = k;
            out.tail = tail;
            out.value = partial + tail;
            out.certificate = TailCertificate::Extrapolated;
            return out;
        }
    }
    return divergent(kMaxTerms);
}

double rho_hat_abscissa(const AttachmentKernel& kernel) { return kernel.is_affine() ? 1.0 : 0.0; }

MalthusianResult solve_malthusian(const AttachmentKernel& kernel) {
    const double base = rho_hat_abscissa(kernel);
    const auto above_one = [&](double lambda) {
        const auto r = rho_hat(kernel, lambda);
        return !r.finite || r.value > 1.0;
    };

    double lo = base + 1.0;
    while (!above_one(lo)) {
        lo = base + 0.5 * (lo - base);
        if (lo - base < 1e-12)
            throw AssumptionViolation("rho_hat does not exceed 1 near the abscissa of convergence");
    }
    double hi = base + 1.0;
    while (above_one(hi)) {
        hi = base + 2.0 * (hi - base);
        if (hi > 1e12) throw AssumptionViolation("rho_hat stays above 1 on the whole feasible ray");
    }

    MalthusianResult out;
    out.bracket_lo = lo;
    out.bracket_hi = hi;
    for (int it = 0; it < 400 && hi - lo > 2.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (above_one(mid))
            lo = mid;
        else
            hi = mid;
    }
    const double lambda = 0.5 * (lo + hi);
    const auto r = rho_hat(kernel, lambda);
    out.lambda_star = lambda;
    out.rho_hat_at_solution = r.value;
    out.truncation_K = r.terms;
    return out;
}

std::vector<double> degree_law(const AttachmentKernel& kernel, double lambda_star, int k_max) {
    std::vector<double> p(static_cast<std::size_t>(std::max(k_max, 0)));
    double survive = 1.0;  // prod_{j<k} f(j)/(lambda + f(j))
    for (int k = 1; k <= k_max; ++k) {
        const double f = kernel.evaluate(k);
        p[static_cast<std::size_t>(k - 1)] = survive * lambda_star / (lambda_star + f);
        survive *= f / (lambda_star + f);
    }
    return p;
}

double fringe_weight(const CanonicalTree& tree, const AttachmentKernel& kernel) {
    const auto counts = child_counts(tree.to_parents());
    double w = 0.0;
    for (int c : counts) w += kernel.evaluate(c + 1);
    return w;
}

double fringe_bruteforce(const CanonicalTree& tree, const AttachmentKernel& kernel,
                         double lambda_star, int size_cap) {
    const int s = tree.size();
    if (s > size_cap) throw std::invalid_argument("fringe_bruteforce: tree larger than the size cap");
    const auto parents = tree.to_parents();
    const auto sz = static_cast<std::size_t>(s);

    // Birth orders of the labelled representative: permutations of the
    // non-root vertices in which every parent precedes its children.
    std::vector<int> order(sz - 1);
    std::iota(order.begin(), order.end(), 1);
    double total = 0.0;
    std::vector<int> position(sz);
    std::vector<int> children(sz);
    do {
        position[0] = 0;
        for (std::size_t i = 0; i < order.size(); ++i) position[static_cast<std::size_t>(order[i])] = static_cast<int>(i) + 1;
        bool valid = true;
        for (std::size_t v = 1; v < sz && valid; ++v)
            valid = position[static_cast<std::size_t>(parents[v])] < position[v];
        if (!valid) continue;

        std::fill(children.begin(), children.end(), 0);
        double weight = kernel.evaluate(1);  // W of the root alone
        double product = 1.0;
        for (int v : order) {
            const auto p = static_cast<std::size_t>(parents[static_cast<std::size_t>(v)]);
            const double rate = kernel.evaluate(children[p] + 1);
            product *= rate / (lambda_star + weight);
            weight += kernel.evaluate(children[p] + 2) - rate + kernel.evaluate(1);
            ++children[p];
        }
        total += product * lambda_star / (lambda_star + weight);
    } while (std::next_permutation(order.begin(), order.end()));

    // Each history is counted once per automorphism of the representative.
    std::vector<int> sigma(sz);
    std::iota(sigma.begin(), sigma.end(), 0);
    long long automorphisms = 0;
    do {
        bool ok = true;
        for (std::size_t v = 1; v < sz && ok; ++v)
            ok = parents[static_cast<std::size_t>(sigma[v])] == sigma[static_cast<std::size_t>(parents[v])];
        if (ok) ++automorphisms;
    } while (std::next_permutation(sigma.begin() + 1, sigma.end()));

    return total / static_cast<double>(automorphisms);
}

double FringeTable::at(const CanonicalTree& t) const {
    const auto it = probability.find(t);
    return it == probability.end() ? 0.0 : it->second;
}

double FringeTable::mass_of_size(int size) const {
    double m = 0.0;
    for (const auto& [t, p] : probability)
        if (t.size() == size) m += p;
    return m;
}

double FringeTable::total_mass() const {
    double m = 0.0;
    for (const auto& [t, p] : probability) m += p;
    return m;
}

FringeTable fringe_recursion(int size_cap, const AttachmentKernel& kernel, double lambda_star) {
    FringeTable table;
    table.size_cap = size_cap;
    table.lambda_star = lambda_star;
    if (size_cap < 1) return table;

    // A tree S on s vertices arises from S' on s-1 vertices by giving some
    // vertex v' of S' a new youngest child; summing over labelled vertices v'
    // accounts for every ordered history of S exactly once.
    std::vector<std::pair<CanonicalTree, double>> level{
        {CanonicalTree{}, lambda_star / (lambda_star + kernel.evaluate(1))}};
    table.probability.insert(level.front());
    for (int s = 2; s <= size_cap; ++s) {
        std::map<CanonicalTree, double> inflow;
        for (const auto& [prev, mass] : level) {
            auto parents = prev.to_parents();
            const auto counts = child_counts(parents);
            for (int v = 0; v < static_cast<int>(parents.size()); ++v) {
                parents.push_back(v);
                inflow[CanonicalTree::from_parents(parents)] +=
                    mass * kernel.evaluate(counts[static_cast<std::size_t>(v)] + 1);
                parents.pop_back();
            }
        }
        level.clear();
        for (const auto& [t, in] : inflow) {
            const double p = in / (lambda_star + fringe_weight(t, kernel));
            level.emplace_back(t, p);
            table.probability.emplace(t, p);
        }
    }
    return table;
}

int q_matrix(const CanonicalTree& s, const CanonicalTree& t) {
    const auto codes = s.child_codes();
    return static_cast<int>(std::count(codes.begin(), codes.end(), t.code()));
}

ExtendedFringeLaw extended_fringe_law(const FringeTable& table, int depth) {
    if (depth < 0 || depth > 1) throw std::invalid_argument("extended fringe law supports depth 0 or 1");
    ExtendedFringeLaw law;
    law.depth = depth;
    for (const auto& [t, p] : table.probability) {
        if (depth == 0) {
            law.mass[{t}] = p;
            continue;
        }
        auto codes = t.child_codes();
        codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
        for (const auto& c : codes) {
            const auto t0 = CanonicalTree::from_code(c);
            law.mass[{t0, t}] = p * q_matrix(t, t0);
        }
    }
    return law;
}

CltConstants clt_constants(double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be finite and >= 0");
    const double a = alpha;
    CltConstants c;
    c.p1 = (2.0 + a) / (3.0 + 2.0 * a);
    c.sigma1_sq = (1.0 + a) * (2.0 + a) * (2.0 + a) / ((3.0 + 2.0 * a) * (3.0 + 2.0 * a) * (4.0 + 3.0 * a));
    return c;
}

std::string to_string(RootRegime r) {
    return r == RootRegime::L2Convergent ? "L2-convergent" : "heavy";
}

RootDegreeConstants root_degree_constants(double alpha, const DelayLaw& delay) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
    RootDegreeConstants c;
    c.theta = 1.0 / (2.0 + alpha);
    c.regime = delay.x_moment_finite(1.0 - c.theta) ? RootRegime::L2Convergent : RootRegime::Heavy;
    c.x_mean_infinite = !delay.x_moment_finite(1.0);
    c.ex_x_truncated = [delay](double n) { return delay.x_truncated_mean(n); };
    return c;
}

}  // namespace mesotree
