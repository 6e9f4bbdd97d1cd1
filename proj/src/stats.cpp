#include "mesotree/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace mesotree {

double tv_distance(std::span<const double> empirical, std::span<const double> theory) {
    if (empirical.size() != theory.size()) throw std::invalid_argument("tv_distance: support sizes differ");
    double diff = 0.0;
    double rest_e = 1.0;
    double rest_t = 1.0;
    for (std::size_t i = 0; i < empirical.size(); ++i) {
        diff += std::abs(empirical[i] - theory[i]);
        rest_e -= empirical[i];
        rest_t -= theory[i];
    }
    return 0.5 * (diff + std::abs(std::max(rest_e, 0.0) - std::max(rest_t, 0.0)));
}

double tv_distance(const DegreeHist& empirical, std::span<const double> theory) {
    std::vector<double> p(theory.size());
    for (std::size_t k = 0; k < theory.size(); ++k) p[k] = empirical.proportion(static_cast<Degree>(k + 1));
    return tv_distance(p, theory);
}

double tv_distance(const FringeCensus& empirical, const FringeTable& theory) {
    std::vector<double> e;
    std::vector<double> t;
    for (const auto& [tree, prob] : theory.probability) {
        e.push_back(empirical.n == 0 ? 0.0
                                     : static_cast<double>(empirical.at(tree)) / static_cast<double>(empirical.n));
        t.push_back(prob);
    }
    return tv_distance(e, t);
}

ChiSquareResult chi_square_test(std::span<const std::int64_t> observed, std::span<const double> probs,
                                double min_expected) {
    if (observed.size() != probs.size()) throw std::invalid_argument("chi_square_test: size mismatch");
    const double total = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::int64_t{0}));
    if (total <= 0.0) throw std::invalid_argument("chi_square_test: no observations");

    std::vector<double> obs;
    std::vector<double> expct;
    double o = 0.0;
    double e = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        o += static_cast<double>(observed[i]);
        e += probs[i] * total;
        if (e >= min_expected) {
            obs.push_back(o);
            expct.push_back(e);
            o = e = 0.0;
        }
    }
    if (e > 0.0 || o > 0.0) {
        if (expct.empty()) {
            obs.push_back(o);
            expct.push_back(e);
        } else {
            obs.back() += o;
            expct.back() += e;
        }
    }

    ChiSquareResult r;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (expct[i] <= 0.0) {
            if (obs[i] > 0.0) return {std::numeric_limits<double>::infinity(), 0, 0.0};
            continue;
        }
        r.statistic += (obs[i] - expct[i]) * (obs[i] - expct[i]) / expct[i];
    }
    r.dof = static_cast<int>(obs.size()) - 1;
    if (r.dof < 1) return {r.statistic, 0, 1.0};
    const boost::math::chi_squared dist(r.dof);
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
    return r;
}

AndersonDarlingResult anderson_darling_normal(std::vector<double> sample) {
    const auto n = sample.size();
    if (n < 8) throw std::invalid_argument("Anderson-Darling needs at least 8 observations");
    std::sort(sample.begin(), sample.end());
    const double nd = static_cast<double>(n);
    const double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / nd;
    double ss = 0.0;
    for (double x : sample) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (nd - 1.0));
    if (!(sd > 0.0)) return {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0.0};

    const auto phi = [&](double x) { return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0))); };
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = std::clamp(phi(sample[i]), 1e-300, 1.0 - 1e-16);
        const double hi = std::clamp(phi(sample[n - 1 - i]), 1e-300, 1.0 - 1e-16);
        s += (2.0 * static_cast<double>(i) + 1.0) * (std::log(lo) + std::log1p(-hi));
    }
    AndersonDarlingResult r;
    r.a2 = -nd - s / nd;
    r.a2_star = r.a2 * (1.0 + 0.75 / nd + 2.25 / (nd * nd));
    const double a = r.a2_star;
    // D'Agostino and Stephens (1986), Table 4.9.
    if (a >= 0.6)
        r.p_value = std::exp(1.2937 - 5.709 * a + 0.0186 * a * a);
    else if (a >= 0.34)
        r.p_value = std::exp(0.9177 - 4.279 * a - 1.38 * a * a);
    else if (a >= 0.2)
        r.p_value = 1.0 - std::exp(-8.318 + 42.796 * a - 59.938 * a * a);
    else
        r.p_value = 1.0 - std::exp(-13.436 + 101.14 * a - 223.73 * a * a);
    r.p_value = std::clamp(r.p_value, 0.0, 1.0);
    return r;
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw std::invalid_argument("ks_distance: empty sample");
    std::sort(sample.begin(), sample.end());
    const double nd = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / nd - f, f - static_cast<double>(i) / nd});
    }
    return d;
}

}  // namespace mesotree
