#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mesotree/canonical.hpp"
#include "mesotree/kernels.hpp"
#include "mesotree/trace.hpp"

namespace mesotree {

// ---------------------------------------------------------------------------
// Degree counts
// ---------------------------------------------------------------------------

struct DegreeHist {
    /// counts[k] = N_k(n); counts[0] is always 0.
    std::vector<std::int64_t> counts;
    Time n = 0;

    std::int64_t at(Degree k) const;
    double proportion(Degree k) const;
    Degree max_degree() const { return static_cast<Degree>(counts.size()) - 1; }
};

DegreeHist degree_hist(const TreeTrace& trace);

// ---------------------------------------------------------------------------
// Fringe censuses
// ---------------------------------------------------------------------------

struct FringeCensus {
    std::map<CanonicalTree, std::int64_t> counts;
    Time n = 0;
    int cap = 0;
    /// Vertices whose fringe has more than `cap` vertices.
    std::int64_t oversized = 0;

    std::int64_t at(const CanonicalTree& t) const;
    double truncated_mass() const;
};

/// c_n(t) for every fringe shape with at most `cap` vertices, in one pass
/// over the vertices in reverse birth order.
FringeCensus fringe_census(const TreeTrace& trace, int cap);

/// Counts of (fringe at v, fringe at parent of v), keyed {t0, t1}. The root
/// and vertices whose parent's fringe exceeds the cap are counted as
/// truncated.
struct PairCensus {
    std::map<std::vector<CanonicalTree>, std::int64_t> counts;
    Time n = 0;
    int cap = 0;
    std::int64_t truncated = 0;

    double frequency(const CanonicalTree& t0, const CanonicalTree& t1) const;
    double truncated_mass() const;
};

PairCensus extended_fringe_census(const TreeTrace& trace, int cap);

// ---------------------------------------------------------------------------
// Leaf-count CLT
// ---------------------------------------------------------------------------

struct LeafClt {
    Time n = 0;
    double p1 = 0.0;
    /// s_r = sqrt(n) (N_1^{(r)}/n - p_1), in replicate order.
    std::vector<double> standardized;
    double mean = 0.0;
    double variance = 0.0;  // unbiased sample variance
};

/// Throws std::invalid_argument for fewer than two replicates or replicates
/// of different sizes.
LeafClt leaf_clt_statistic(std::span<const DegreeHist> replicates, double alpha);

/// Deterministic-in-the-delay part of the random centering: X_{n+1} =
/// k_n X_n + A_n with A_n replaced by 1, started from X_2 = 2.
struct RandomCentering {
    Time n = 0;
    double x_n = 0.0;
    /// sqrt(n) (X_n / n - p_1).
    double gap = 0.0;
    /// Bound on |A_{n-1} - 1|: gamma e_{n-1} + P(n - 1 - (n-1)^beta xi < 1).
    double a_error_bound = 0.0;
};

RandomCentering random_centering(const DelayLaw& delay, double alpha, Time n);

// ---------------------------------------------------------------------------
// Root degree
// ---------------------------------------------------------------------------

/// n_j = ceil(2^{j/2}) for j = 0, 1, ..., deduplicated and capped at n_final
/// (which is always the last point).
std::vector<Time> geometric_grid(Time n_final);

struct RootTrajectory {
    std::vector<Time> times;
    std::vector<Degree> degree;         // M(rho, n_j)
    std::vector<double> over_ntheta;    // M / n_j^theta
    std::vector<double> over_ex;        // M / E[X ^ n_j]; empty without a callable
    double theta = 0.0;
};

/// Throws std::invalid_argument if the grid is not increasing within [1, n].
RootTrajectory root_trajectory(const TreeTrace& trace, double theta, std::span<const Time> grid,
                               const std::function<double(double)>& ex_x_truncated = {});

// ---------------------------------------------------------------------------
// Delay-condition diagnostics
// ---------------------------------------------------------------------------

enum class DelayVerdict { Satisfied, Violated, Inconclusive };
std::string to_string(DelayVerdict v);

enum class ScanMethod { Quadrature, MonteCarlo };

struct DelayScanRow {
    Time n = 0;
    /// E[n^beta xi 1{n - n^beta xi >= 1} / floor(n - n^beta xi)].
    double e_n = 0.0;
    double stderr_ = 0.0;  // 0 for quadrature
    /// n log n P(ceil(X) = n).
    double tail_term = 0.0;
};

struct DelayScan {
    std::vector<DelayScanRow> rows;
    /// Least-squares slope of log e_n against log n; nullopt when e_n
    /// vanishes identically.
    std::optional<double> decay_slope;
    bool e_monotone = true;  // e_n non-increasing along the grid
    DelayVerdict verdict = DelayVerdict::Inconclusive;
};

/// e_n for one n by summing over the values j = floor(n - n^beta xi).
double delay_expectation(const DelayLaw& delay, Time n);

/// Throws std::invalid_argument unless the grid is increasing with n >= 2.
DelayScan delay_condition_scan(const DelayLaw& delay, std::span<const Time> n_grid,
                               ScanMethod method = ScanMethod::Quadrature,
                               std::uint64_t seed = 1, std::int64_t mc_samples = 1'000'000);

}  // namespace mesotree
