#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mesotree/canonical.hpp"
#include "mesotree/kernels.hpp"

namespace mesotree {

// ---------------------------------------------------------------------------
// Malthusian parameter
// ---------------------------------------------------------------------------

/// How the tail of the rho-hat series beyond the summed terms was handled.
enum class TailCertificate {
    Geometric,   // constant ratio f/(lambda+f) in the tail, summed exactly
    Affine,      // f(k) = k + alpha, tail summed in closed form
    Extrapolated,  // geometric extrapolation with the current ratio fell below tolerance
    Divergent,     // the series is infinite (or could not be certified)
};

struct RhoHatValue {
    double value = 0.0;    // +infinity when `finite` is false
    bool finite = true;
    long long terms = 0;   // explicitly summed terms
    double tail = 0.0;     // tail mass added or bounded
    TailCertificate certificate = TailCertificate::Divergent;
};

/// rho_hat(lambda) = sum_{k>=1} prod_{i<=k} f(i) / (lambda + f(i)).
/// Throws std::invalid_argument for lambda <= 0.
RhoHatValue rho_hat(const AttachmentKernel& kernel, double lambda);

/// Infimum of lambda with rho_hat(lambda) finite.
double rho_hat_abscissa(const AttachmentKernel& kernel);

struct MalthusianResult {
    double lambda_star = 0.0;
    double rho_hat_at_solution = 0.0;
    long long truncation_K = 0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
};

/// Unique root of rho_hat(lambda) = 1 by bisection. Throws
/// AssumptionViolation when rho_hat never exceeds 1 on the feasible ray.
MalthusianResult solve_malthusian(const AttachmentKernel& kernel);

// ---------------------------------------------------------------------------
// Degree law
// ---------------------------------------------------------------------------

/// p_k = lambda/(lambda + f(k)) * prod_{j<k} f(j)/(lambda + f(j)) for
/// k = 1..k_max (entry k-1).
std::vector<double> degree_law(const AttachmentKernel& kernel, double lambda_star, int k_max);

// ---------------------------------------------------------------------------
// Fringe measure
// ---------------------------------------------------------------------------

/// W(t) = sum over vertices of f(children + 1).
double fringe_weight(const CanonicalTree& tree, const AttachmentKernel& kernel);

/// Limit probability that a uniform vertex's fringe is `tree`, by summing the
/// jump-chain product over every historical ordering of a labelled
/// representative and quotienting by its automorphisms. Throws
/// std::invalid_argument if tree.size() > size_cap.
double fringe_bruteforce(const CanonicalTree& tree, const AttachmentKernel& kernel,
                         double lambda_star, int size_cap = 6);

struct FringeTable {
    std::map<CanonicalTree, double> probability;
    int size_cap = 0;
    double lambda_star = 0.0;

    double at(const CanonicalTree& t) const;
    /// Total mass of trees with exactly `size` vertices.
    double mass_of_size(int size) const;
    double total_mass() const;
};

/// All trees up to size_cap, built bottom-up from the leaf-removal recursion.
FringeTable fringe_recursion(int size_cap, const AttachmentKernel& kernel, double lambda_star);

/// Number of root subtrees of `s` isomorphic to `t`.
int q_matrix(const CanonicalTree& s, const CanonicalTree& t);

/// Law of the monotone sin-tree representation truncated at `depth` (0 or 1).
/// Keys are (t0) for depth 0 and (t0, t1_bar) for depth 1.
struct ExtendedFringeLaw {
    int depth = 0;
    std::map<std::vector<CanonicalTree>, double> mass;
};

ExtendedFringeLaw extended_fringe_law(const FringeTable& table, int depth);

// ---------------------------------------------------------------------------
// Affine-kernel constants
// ---------------------------------------------------------------------------

struct CltConstants {
    double p1 = 0.0;
    double sigma1_sq = 0.0;
};

/// Leaf-count CLT constants for f(k) = k + alpha.
CltConstants clt_constants(double alpha);

enum class RootRegime { L2Convergent, Heavy };

std::string to_string(RootRegime r);

struct RootDegreeConstants {
    double theta = 0.0;
    RootRegime regime = RootRegime::L2Convergent;
    bool x_mean_infinite = false;
    /// n -> E[min(X, n)].
    std::function<double(double)> ex_x_truncated;
};

/// theta = 1/(2 + alpha); the regime is L2Convergent iff E[X^{1-theta}] is finite.
RootDegreeConstants root_degree_constants(double alpha, const DelayLaw& delay);

}  // namespace mesotree
