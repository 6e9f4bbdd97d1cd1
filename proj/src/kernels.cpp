#include "mesotree/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mesotree {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

double adaptive_simpson(const std::function<double(double)>& g, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = g(lm);
    const double frm = g(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& g, double a, double b, double tol) {
    if (b <= a) return 0.0;
    const double fa = g(a);
    const double fb = g(b);
    const double fm = g(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(g, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

// ---------------------------------------------------------------------------
// AttachmentKernel
// ---------------------------------------------------------------------------

AttachmentKernel AttachmentKernel::uniform() {
    AttachmentKernel k{UniformKernel{}};
    k.f_star_ = 1.0;
    k.monotone_ = true;
    k.linear_bound_ = 1.0;
    k.lipschitz_ = 0.0;
    return k;
}

AttachmentKernel AttachmentKernel::affine(double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("affine kernel requires alpha >= 0");
    AttachmentKernel k{AffineKernel{alpha}};
    k.f_star_ = 1.0 + alpha;
    k.monotone_ = true;
    k.linear_bound_ = 1.0 + alpha;
    k.lipschitz_ = 1.0;
    return k;
}

AttachmentKernel AttachmentKernel::tabulated(std::vector<double> values, TailRule tail,
                                             double f_star, bool monotone) {
    if (values.empty()) throw std::invalid_argument("tabulated kernel needs at least one value");
    for (double v : values)
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument("tabulated kernel values must be positive and finite");
    if (const auto* p = std::get_if<PowerTail>(&tail)) {
        if (!(p->exponent > 0.0 && p->exponent < 1.0))
            throw std::invalid_argument("power tail exponent must lie in (0, 1)");
    }
    const auto K = static_cast<double>(values.size());

    // Infimum over the table and the tail. A power tail k^a is increasing, so
    // its infimum is attained at k = K + 1.
    double inf = *std::min_element(values.begin(), values.end());
    double tail_first = values.back();
    if (const auto* p = std::get_if<PowerTail>(&tail)) tail_first = std::pow(K + 1.0, p->exponent);
    inf = std::min(inf, tail_first);
    if (!(f_star > 0.0)) throw std::invalid_argument("f_star must be positive");
    if (f_star > inf * (1.0 + 1e-12))
        throw std::invalid_argument("f_star exceeds the infimum of the tabulated kernel");

    if (monotone) {
        for (std::size_t i = 1; i < values.size(); ++i)
            if (values[i] < values[i - 1])
                throw std::invalid_argument("tabulated kernel flagged monotone but decreases");
        if (tail_first < values.back())
            throw std::invalid_argument("tabulated kernel flagged monotone but tail decreases");
    }

    double bound = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        bound = std::max(bound, values[i] / static_cast<double>(i + 1));
    bound = std::max(bound, tail_first / (K + 1.0));

    AttachmentKernel k{TabulatedKernel{std::move(values), tail}};
    k.f_star_ = f_star;
    k.monotone_ = monotone;
    k.linear_bound_ = bound;
    return k;
}

double AttachmentKernel::evaluate(Degree k) const {
    if (k < 1) throw std::invalid_argument("attachment function is defined for degrees >= 1");
    return std::visit(
        overloaded{
            [](const UniformKernel&) { return 1.0; },
            [k](const AffineKernel& a) { return static_cast<double>(k) + a.alpha; },
            [k](const TabulatedKernel& t) {
                const auto K = static_cast<Degree>(t.values.size());
                if (k <= K) return t.values[static_cast<std::size_t>(k - 1)];
                if (const auto* p = std::get_if<PowerTail>(&t.tail))
                    return std::pow(static_cast<double>(k), p->exponent);
                return t.values.back();
            },
        },
        kind_);
}

double AttachmentKernel::alpha() const {
    if (const auto* a = std::get_if<AffineKernel>(&kind_)) return a->alpha;
    throw std::logic_error("alpha() requested for a non-affine kernel");
}

bool AttachmentKernel::sublinear() const { return !is_affine(); }

std::string AttachmentKernel::describe() const {
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const UniformKernel&) { os << "uniform"; },
                   [&](const AffineKernel& a) { os << "affine(alpha=" << a.alpha << ")"; },
                   [&](const TabulatedKernel& t) {
                       os << "tabulated(K=" << t.values.size() << ", tail=";
                       if (const auto* p = std::get_if<PowerTail>(&t.tail))
                           os << "power " << p->exponent;
                       else
                           os << "constant";
                       os << ")";
                   },
               },
               kind_);
    return os.str();
}

// ---------------------------------------------------------------------------
// DelayLaw
// ---------------------------------------------------------------------------

DelayLaw::DelayLaw(Kind kind, double beta) : kind_(std::move(kind)), beta_(beta) {
    if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in [0, 1)");
    std::visit(overloaded{
                   [](const ZeroDelay&) {},
                   [](const ConstantDelay& c) {
                       if (!(c.value >= 0.0) || !std::isfinite(c.value))
                           throw std::invalid_argument("constant delay must be finite and >= 0");
                   },
                   [](const Uniform01Delay&) {},
                   [](const InversePowerDelay& d) {
                       if (!(d.power > 0.0) || !std::isfinite(d.power))
                           throw std::invalid_argument("inverse-power delay needs p > 0");
                   },
                   [](const ParetoDelay& d) {
                       if (!(d.tail_index > 0.0) || !(d.scale > 0.0))
                           throw std::invalid_argument("pareto delay needs positive parameters");
                   },
                   [](const QuantileTableDelay& d) {
                       const auto& k = d.knots;
                       if (k.size() < 2) throw std::invalid_argument("quantile table needs >= 2 knots");
                       if (k.front().first != 0.0 || k.back().first != 1.0)
                           throw std::invalid_argument("quantile table must span u in [0, 1]");
                       for (std::size_t i = 0; i < k.size(); ++i) {
                           if (!(k[i].second >= 0.0) || !std::isfinite(k[i].second))
                               throw std::invalid_argument("quantile table values must be >= 0");
                           if (i > 0 && !(k[i].first > k[i - 1].first))
                               throw std::invalid_argument("quantile table u must increase");
                           if (i > 0 && k[i].second < k[i - 1].second)
                               throw std::invalid_argument("quantile table q must be non-decreasing");
                       }
                   },
               },
               kind_);
}

double DelayLaw::quantile(double u) const {
    return std::visit(
        overloaded{
            [](const ZeroDelay&) { return 0.0; },
            [](const ConstantDelay& c) { return c.value; },
            [u](const Uniform01Delay&) { return u; },
            [u](const InversePowerDelay& d) { return std::pow(1.0 - u, -d.power); },
            [u](const ParetoDelay& d) { return d.scale * std::pow(1.0 - u, -1.0 / d.tail_index); },
            [u](const QuantileTableDelay& d) {
                const auto& k = d.knots;
                if (u <= 0.0) return k.front().second;
                if (u >= 1.0) return k.back().second;
                auto it = std::upper_bound(k.begin(), k.end(), u,
                                           [](double x, const auto& p) { return x < p.first; });
                const auto& hi = *it;
                const auto& lo = *(it - 1);
                const double w = (u - lo.first) / (hi.first - lo.first);
                return lo.second + w * (hi.second - lo.second);
            },
        },
        kind_);
}

double DelayLaw::cdf(double x) const {
    return std::visit(
        overloaded{
            [x](const ZeroDelay&) { return x >= 0.0 ? 1.0 : 0.0; },
            [x](const ConstantDelay& c) { return x >= c.value ? 1.0 : 0.0; },
            [x](const Uniform01Delay&) { return std::clamp(x, 0.0, 1.0); },
            [x](const InversePowerDelay& d) {
                return x <= 1.0 ? 0.0 : 1.0 - std::pow(x, -1.0 / d.power);
            },
            [x](const ParetoDelay& d) {
                return x <= d.scale ? 0.0 : 1.0 - std::pow(d.scale / x, d.tail_index);
            },
            [x](const QuantileTableDelay& d) {
                const auto& k = d.knots;
                if (x < k.front().second) return 0.0;
                if (x >= k.back().second) return 1.0;
                // First knot with q > x; x lies in [q_{j-1}, q_j).
                auto it = std::upper_bound(k.begin(), k.end(), x,
                                           [](double v, const auto& p) { return v < p.second; });
                const auto& hi = *it;
                const auto& lo = *(it - 1);
                const double w = (x - lo.second) / (hi.second - lo.second);
                return lo.first + w * (hi.first - lo.first);
            },
        },
        kind_);
}

double DelayLaw::partial_mean(double a) const {
    return std::visit(
        overloaded{
            [](const ZeroDelay&) { return 0.0; },
            [a](const ConstantDelay& c) { return a >= c.value ? c.value : 0.0; },
            [a](const Uniform01Delay&) {
                const double t = std::clamp(a, 0.0, 1.0);
                return 0.5 * t * t;
            },
            [a](const InversePowerDelay& d) {
                if (a <= 1.0) return 0.0;
                const double p = d.power;
                if (std::abs(p - 1.0) < 1e-14) return std::log(a);
                return (1.0 - std::pow(a, (p - 1.0) / p)) / (1.0 - p);
            },
            [a](const ParetoDelay& d) {
                if (a <= d.scale) return 0.0;
                const double g = d.tail_index;
                const double s = d.scale;
                if (std::abs(g - 1.0) < 1e-14) return s * std::log(a / s);
                return g * std::pow(s, g) * (std::pow(a, 1.0 - g) - std::pow(s, 1.0 - g)) / (1.0 - g);
            },
            [this, a](const QuantileTableDelay& d) {
                const auto& k = d.knots;
                if (a < k.front().second) return 0.0;
                const double u_star = cdf(a);
                double acc = 0.0;
                for (std::size_t i = 1; i < k.size(); ++i) {
                    const auto& lo = k[i - 1];
                    const auto& hi = k[i];
                    if (hi.first <= u_star) {
                        acc += 0.5 * (lo.second + hi.second) * (hi.first - lo.first);
                    } else {
                        if (u_star > lo.first) {
                            const double w = (u_star - lo.first) / (hi.first - lo.first);
                            const double q = lo.second + w * (hi.second - lo.second);
                            acc += 0.5 * (lo.second + q) * (u_star - lo.first);
                        }
                        break;
                    }
                }
                return acc;
            },
        },
        kind_);
}

bool DelayLaw::bounded() const { return std::isfinite(support_max()); }

double DelayLaw::support_max() const {
    return std::visit(overloaded{
                          [](const ZeroDelay&) { return 0.0; },
                          [](const ConstantDelay& c) { return c.value; },
                          [](const Uniform01Delay&) { return 1.0; },
                          [](const InversePowerDelay&) { return kInf; },
                          [](const ParetoDelay&) { return kInf; },
                          [](const QuantileTableDelay& d) { return d.knots.back().second; },
                      },
                      kind_);
}

double DelayLaw::x_tail(double x) const {
    if (x < 0.0) return 1.0;
    return 1.0 - cdf(std::pow(x, 1.0 - beta_));
}

std::optional<double> DelayLaw::x_tail_index() const {
    if (const auto* d = std::get_if<InversePowerDelay>(&kind_)) return (1.0 - beta_) / d->power;
    if (const auto* d = std::get_if<ParetoDelay>(&kind_)) return d->tail_index * (1.0 - beta_);
    return std::nullopt;
}

bool DelayLaw::x_moment_finite(double r) const {
    if (r <= 0.0) return true;
    const auto g = x_tail_index();
    if (!g) return true;
    return *g > r;
}

double DelayLaw::x_truncated_mean(double n) const {
    if (n <= 0.0) return 0.0;
    const double a = 1.0 / (1.0 - beta_);  // X = xi^a

    // Power-tail families: P(X > x) = min(1, (x0/x)^g).
    const auto power_tail = [n](double x0, double g) {
        if (n <= x0) return n;
        if (std::abs(g - 1.0) < 1e-14) return x0 + x0 * std::log(n / x0);
        return x0 + std::pow(x0, g) * (std::pow(n, 1.0 - g) - std::pow(x0, 1.0 - g)) / (1.0 - g);
    };

    return std::visit(
        overloaded{
            [](const ZeroDelay&) { return 0.0; },
            [n, a](const ConstantDelay& c) { return std::min(std::pow(c.value, a), n); },
            [n, a](const Uniform01Delay&) {
                // X = U^a on [0, 1]; P(X > x) = 1 - x^{1/a}.
                if (n >= 1.0) return 1.0 / (a + 1.0);
                const double e = 1.0 / a + 1.0;
                return n - std::pow(n, e) / e;
            },
            [&](const InversePowerDelay& d) { return power_tail(1.0, (1.0 - beta_) / d.power); },
            [&](const ParetoDelay& d) {
                return power_tail(std::pow(d.scale, a), d.tail_index * (1.0 - beta_));
            },
            [this, n, a](const QuantileTableDelay& d) {
                const auto g = [this, n, a](double u) { return std::min(std::pow(quantile(u), a), n); };
                const auto& k = d.knots;
                const double cut = std::pow(n, 1.0 / a);
                double acc = 0.0;
                // Segment by segment, splitting where xi^a crosses n, so every
                // kink of the integrand sits on an interval end.
                for (std::size_t i = 1; i < k.size(); ++i) {
                    const double lo = k[i - 1].first;
                    const double hi = k[i].first;
                    if (k[i - 1].second < cut && k[i].second > cut) {
                        const double w = (cut - k[i - 1].second) / (k[i].second - k[i - 1].second);
                        const double mid = lo + w * (hi - lo);
                        acc += integrate(g, lo, mid, 1e-13) + integrate(g, mid, hi, 1e-13);
                    } else {
                        acc += integrate(g, lo, hi, 1e-13);
                    }
                }
                return acc;
            },
        },
        kind_);
}

std::string DelayLaw::describe() const {
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const ZeroDelay&) { os << "zero"; },
                   [&](const ConstantDelay& c) { os << "constant(" << c.value << ")"; },
                   [&](const Uniform01Delay&) { os << "uniform(0,1)"; },
                   [&](const InversePowerDelay& d) { os << "U^-" << d.power; },
                   [&](const ParetoDelay& d) {
                       os << "pareto(tail=" << d.tail_index << ", scale=" << d.scale << ")";
                   },
                   [&](const QuantileTableDelay& d) { os << "quantile-table(" << d.knots.size() << ")"; },
               },
               kind_);
    os << ", beta=" << beta_;
    return os.str();
}

std::int64_t snapshot_time(std::int64_t n, double xi, double beta) {
    const auto nd = static_cast<double>(n);
    const double target = std::floor(nd - std::pow(nd, beta) * xi);
    if (!(target >= 1.0)) return 1;
    if (target >= nd) return n;
    return static_cast<std::int64_t>(target);
}

// ---------------------------------------------------------------------------
// GrowthConfig
// ---------------------------------------------------------------------------

std::string to_string(SamplerStrategy s) {
    switch (s) {
        case SamplerStrategy::Auto: return "auto";
        case SamplerStrategy::AffineEdgeTrick: return "affine";
        case SamplerStrategy::FenwickRejection: return "rejection";
        case SamplerStrategy::LinearScanOracle: return "scan";
    }
    return "auto";
}

SamplerStrategy parse_sampler(const std::string& s) {
    if (s == "auto") return SamplerStrategy::Auto;
    if (s == "affine") return SamplerStrategy::AffineEdgeTrick;
    if (s == "rejection") return SamplerStrategy::FenwickRejection;
    if (s == "scan") return SamplerStrategy::LinearScanOracle;
    throw std::invalid_argument("unknown sampler strategy '" + s + "'");
}

void GrowthConfig::validate() const {
    if (n_final < 2) throw std::invalid_argument("n_final must be >= 2");
    if (fringe_size_cap < 1) throw std::invalid_argument("fringe_size_cap must be >= 1");
}

SamplerStrategy GrowthConfig::resolved_sampler() const {
    if (sampler != SamplerStrategy::Auto) return sampler;
    if (kernel.is_affine() || kernel.is_uniform()) return SamplerStrategy::AffineEdgeTrick;
    if (kernel.monotone()) return SamplerStrategy::FenwickRejection;
    return SamplerStrategy::LinearScanOracle;
}

}  // namespace mesotree
