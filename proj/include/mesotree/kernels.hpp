#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mesotree/rng.hpp"

namespace mesotree {

using Degree = std::int64_t;

// ---------------------------------------------------------------------------
// Attachment functions
// ---------------------------------------------------------------------------

struct UniformKernel {};

struct AffineKernel {
    double alpha = 0.0;
};

/// Tail of a tabulated kernel beyond the last table entry K.
struct ConstantTail {};       // f(k) = f(K)
struct PowerTail {            // f(k) = k^exponent, 0 < exponent < 1
    double exponent = 0.5;
};
using TailRule = std::variant<ConstantTail, PowerTail>;

struct TabulatedKernel {
    std::vector<double> values;  // f(1), ..., f(K)
    TailRule tail;
};

/// Attachment function f on degrees k >= 1. Immutable after construction.
class AttachmentKernel {
public:
    using Kind = std::variant<UniformKernel, AffineKernel, TabulatedKernel>;

    static AttachmentKernel uniform();
    static AttachmentKernel affine(double alpha);
    /// Tabulated kernels carry an explicit infimum f_* and monotonicity flag.
    static AttachmentKernel tabulated(std::vector<double> values, TailRule tail, double f_star,
                                      bool monotone);

    /// f(k). Throws std::invalid_argument for k < 1.
    double evaluate(Degree k) const;
    double operator()(Degree k) const { return evaluate(k); }

    const Kind& kind() const { return kind_; }
    bool is_affine() const { return std::holds_alternative<AffineKernel>(kind_); }
    bool is_uniform() const { return std::holds_alternative<UniformKernel>(kind_); }
    bool is_tabulated() const { return std::holds_alternative<TabulatedKernel>(kind_); }
    /// alpha for affine kernels; throws for the others.
    double alpha() const;

    double f_star() const { return f_star_; }
    bool monotone() const { return monotone_; }
    /// C with f(k) <= C k for all k >= 1.
    double linear_bound() const { return linear_bound_; }
    std::optional<double> lipschitz_bound() const { return lipschitz_; }
    /// limsup f(k)/k == 0.
    bool sublinear() const;

    std::string describe() const;

private:
    explicit AttachmentKernel(Kind kind) : kind_(std::move(kind)) {}

    Kind kind_;
    double f_star_ = 1.0;
    bool monotone_ = true;
    double linear_bound_ = 1.0;
    std::optional<double> lipschitz_;
};

// ---------------------------------------------------------------------------
// Delay distributions
// ---------------------------------------------------------------------------

struct ZeroDelay {};
struct ConstantDelay {
    double value = 0.0;
};
struct Uniform01Delay {};
/// xi = U^{-p}.
struct InversePowerDelay {
    double power = 1.0;
};
/// P(xi > s) = (scale / s)^tail_index for s >= scale.
struct ParetoDelay {
    double tail_index = 1.0;
    double scale = 1.0;
};
/// Piecewise-linear quantile function through (u, q) knots spanning [0, 1].
struct QuantileTableDelay {
    std::vector<std::pair<double, double>> knots;
};

/// Law mu of the normalized delay xi together with the time-scale exponent
/// beta, which fixes X = xi^{1/(1-beta)}.
class DelayLaw {
public:
    using Kind = std::variant<ZeroDelay, ConstantDelay, Uniform01Delay, InversePowerDelay,
                              ParetoDelay, QuantileTableDelay>;

    DelayLaw(Kind kind, double beta);

    const Kind& kind() const { return kind_; }
    double beta() const { return beta_; }

    double sample(Rng& rng) const { return quantile(rng.uniform()); }
    /// Generalized inverse of the CDF, u in (0, 1).
    double quantile(double u) const;
    /// P(xi <= x).
    double cdf(double x) const;
    /// E[xi ; xi <= a].
    double partial_mean(double a) const;
    bool bounded() const;
    /// Supremum of the support (infinity for unbounded families).
    double support_max() const;

    /// P(X > x) where X = xi^{1/(1-beta)}.
    double x_tail(double x) const;
    /// E[min(X, n)].
    double x_truncated_mean(double n) const;
    /// Whether E[X^r] is finite.
    bool x_moment_finite(double r) const;
    /// Tail index g of X (P(X > x) ~ c x^{-g}); nullopt for bounded families.
    std::optional<double> x_tail_index() const;

    std::string describe() const;

private:
    Kind kind_;
    double beta_;
};

/// m = max(floor(n - n^beta * xi), 1).
std::int64_t snapshot_time(std::int64_t n, double xi, double beta);

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

enum class SamplerStrategy { Auto, AffineEdgeTrick, FenwickRejection, LinearScanOracle };

std::string to_string(SamplerStrategy s);
SamplerStrategy parse_sampler(const std::string& s);

struct GrowthConfig {
    std::int64_t n_final = 2;
    AttachmentKernel kernel = AttachmentKernel::affine(0.0);
    DelayLaw delay{ZeroDelay{}, 0.5};
    std::uint64_t seed = 1;
    SamplerStrategy sampler = SamplerStrategy::Auto;
    int fringe_size_cap = 6;

    /// Throws std::invalid_argument when an invariant fails.
    void validate() const;
    /// Auto resolved against the kernel.
    SamplerStrategy resolved_sampler() const;
};

}  // namespace mesotree
