#include "mesotree/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string_view>

#include "mesotree/theory.hpp"

namespace mesotree {

std::int64_t DegreeHist::at(Degree k) const {
    if (k < 0 || k >= static_cast<Degree>(counts.size())) return 0;
    return counts[static_cast<std::size_t>(k)];
}

double DegreeHist::proportion(Degree k) const {
    return n == 0 ? 0.0 : static_cast<double>(at(k)) / static_cast<double>(n);
}

DegreeHist degree_hist(const TreeTrace& trace) {
    DegreeHist h;
    h.n = trace.size();
    h.counts.assign(2, 0);
    for (Time v = 1; v <= h.n; ++v) {
        const auto d = static_cast<std::size_t>(trace.degree(static_cast<Vertex>(v)));
        if (d >= h.counts.size()) h.counts.resize(d + 1, 0);
        ++h.counts[d];
    }
    return h;
}

// ---------------------------------------------------------------------------

namespace {

/// Subtree sizes (saturated at cap + 1) and codes of every capped fringe,
/// indexed by vertex.
struct CappedCodes {
    std::vector<int> size;
    std::vector<std::string> code;  // empty when the fringe exceeds the cap
};

CappedCodes capped_codes(const TreeTrace& trace, int cap) {
    const auto n = static_cast<std::size_t>(trace.size());
    CappedCodes out;
    out.size.assign(n + 1, 0);
    out.code.assign(n + 1, {});
    std::vector<std::string_view> parts;
    for (std::size_t v = n; v >= 1; --v) {
        int s = 1;
        for (Vertex c : trace.children(static_cast<Vertex>(v))) s = std::min(s + out.size[c], cap + 1);
        out.size[v] = s;
        if (s > cap) continue;
        parts.clear();
        for (Vertex c : trace.children(static_cast<Vertex>(v))) parts.emplace_back(out.code[c]);
        std::sort(parts.begin(), parts.end());
        std::string code = "(";
        for (auto p : parts) code += p;
        code += ')';
        out.code[v] = std::move(code);
    }
    return out;
}

}  // namespace

std::int64_t FringeCensus::at(const CanonicalTree& t) const {
    const auto it = counts.find(t);
    return it == counts.end() ? 0 : it->second;
}

double FringeCensus::truncated_mass() const {
    return n == 0 ? 0.0 : static_cast<double>(oversized) / static_cast<double>(n);
}

FringeCensus fringe_census(const TreeTrace& trace, int cap) {
    if (cap < 1) throw std::invalid_argument("fringe cap must be at least 1");
    const auto codes = capped_codes(trace, cap);
    std::map<std::string, std::int64_t> by_code;
    FringeCensus census;
    census.n = trace.size();
    census.cap = cap;
    for (Time v = 1; v <= census.n; ++v) {
        const auto& c = codes.code[static_cast<std::size_t>(v)];
        if (c.empty())
            ++census.oversized;
        else
            ++by_code[c];
    }
    for (const auto& [c, k] : by_code) census.counts.emplace(CanonicalTree::from_code(c), k);
    return census;
}

double PairCensus::frequency(const CanonicalTree& t0, const CanonicalTree& t1) const {
    const auto it = counts.find({t0, t1});
    if (it == counts.end() || n == 0) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(n);
}

double PairCensus::truncated_mass() const {
    return n == 0 ? 0.0 : static_cast<double>(truncated) / static_cast<double>(n);
}

PairCensus extended_fringe_census(const TreeTrace& trace, int cap) {
    if (cap < 1) throw std::invalid_argument("fringe cap must be at least 1");
    const auto codes = capped_codes(trace, cap);
    std::map<std::pair<std::string, std::string>, std::int64_t> by_code;
    PairCensus census;
    census.n = trace.size();
    census.cap = cap;
    census.truncated = 1;  // the root has no parent
    for (Time v = 2; v <= census.n; ++v) {
        const auto p = trace.parent(static_cast<Vertex>(v));
        const auto& cp = codes.code[p];
        if (cp.empty())
            ++census.truncated;
        else
            ++by_code[{codes.code[static_cast<std::size_t>(v)], cp}];
    }
    for (const auto& [key, k] : by_code)
        census.counts.emplace(
            std::vector<CanonicalTree>{CanonicalTree::from_code(key.first), CanonicalTree::from_code(key.second)},
            k);
    return census;
}

// ---------------------------------------------------------------------------

LeafClt leaf_clt_statistic(std::span<const DegreeHist> replicates, double alpha) {
    if (replicates.size() < 2) throw std::invalid_argument("the CLT statistic needs at least two replicates");
    LeafClt out;
    out.n = replicates.front().n;
    out.p1 = clt_constants(alpha).p1;
    const double nd = static_cast<double>(out.n);
    for (const auto& h : replicates) {
        if (h.n != out.n) throw std::invalid_argument("replicates have different sizes");
        out.standardized.push_back(std::sqrt(nd) * (static_cast<double>(h.at(1)) / nd - out.p1));
    }
    const double r = static_cast<double>(out.standardized.size());
    out.mean = std::accumulate(out.standardized.begin(), out.standardized.end(), 0.0) / r;
    double ss = 0.0;
    for (double s : out.standardized) ss += (s - out.mean) * (s - out.mean);
    out.variance = ss / (r - 1.0);
    return out;
}

namespace {

/// P(floor(n - n^beta xi) = j) for j = 1..n, by j; entry 0 unused. Only the
/// window of j that the support of xi can reach is filled; the returned
/// first index marks its start.
Time floor_law(const DelayLaw& delay, Time n, std::vector<double>& law) {
    const double nd = static_cast<double>(n);
    const double s = std::pow(nd, delay.beta());
    law.assign(static_cast<std::size_t>(n) + 1, 0.0);
    Time first = 1;
    if (delay.bounded()) {
        const double reach = s * delay.support_max();
        first = std::max<Time>(1, static_cast<Time>(std::floor(nd - reach)) - 1);
    }
    for (Time j = first; j <= n; ++j) {
        const double hi = static_cast<double>(n - j) / s;
        const double lo = static_cast<double>(n - j - 1) / s;
        const double p = delay.cdf(hi) - (lo < 0.0 ? 0.0 : delay.cdf(lo));
        law[static_cast<std::size_t>(j)] = std::max(p, 0.0);
    }
    return first;
}

}  // namespace

RandomCentering random_centering(const DelayLaw& delay, double alpha, Time n) {
    if (n < 2) throw std::invalid_argument("random centering starts at n = 2");
    const double gamma = (1.0 + alpha) / (2.0 + alpha);
    RandomCentering out;
    out.n = n;
    double x = 2.0;
    std::vector<double> law;
    for (Time m = 2; m < n; ++m) {
        const Time first = floor_law(delay, m, law);
        double inv = 0.0;
        for (Time j = first; j <= m; ++j) inv += law[static_cast<std::size_t>(j)] / static_cast<double>(j);
        x = (1.0 - gamma * inv) * x + 1.0;
    }
    const double nd = static_cast<double>(n);
    out.x_n = x;
    out.gap = std::sqrt(nd) * (x / nd - clt_constants(alpha).p1);
    const Time m = n - 1;
    const double s = std::pow(static_cast<double>(m), delay.beta());
    out.a_error_bound = gamma * delay_expectation(delay, m) + (1.0 - delay.cdf(static_cast<double>(m - 1) / s));
    return out;
}

// ---------------------------------------------------------------------------

std::vector<Time> geometric_grid(Time n_final) {
    if (n_final < 1) throw std::invalid_argument("grid needs n_final >= 1");
    std::vector<Time> grid;
    for (int j = 0;; ++j) {
        const double x = std::ldexp(j % 2 == 0 ? 1.0 : std::sqrt(2.0), j / 2);
        const auto t = static_cast<Time>(std::ceil(x - 1e-9));
        if (t >= n_final) break;
        if (grid.empty() || grid.back() < t) grid.push_back(t);
    }
    grid.push_back(n_final);
    return grid;
}

RootTrajectory root_trajectory(const TreeTrace& trace, double theta, std::span<const Time> grid,
                               const std::function<double(double)>& ex_x_truncated) {
    RootTrajectory out;
    out.theta = theta;
    Time prev = 0;
    for (Time t : grid) {
        if (t <= prev || t > trace.size())
            throw std::invalid_argument("root trajectory grid must increase within [1, n]");
        prev = t;
        const Degree m = trace.deg_at(1, t);
        const double td = static_cast<double>(t);
        out.times.push_back(t);
        out.degree.push_back(m);
        out.over_ntheta.push_back(static_cast<double>(m) / std::pow(td, theta));
        if (ex_x_truncated) {
            const double ex = ex_x_truncated(td);
            out.over_ex.push_back(ex > 0.0 ? static_cast<double>(m) / ex
                                           : std::numeric_limits<double>::quiet_NaN());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string to_string(DelayVerdict v) {
    switch (v) {
        case DelayVerdict::Satisfied: return "satisfied";
        case DelayVerdict::Violated: return "violated";
        case DelayVerdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

double delay_expectation(const DelayLaw& delay, Time n) {
    if (n < 1) throw std::invalid_argument("delay expectation needs n >= 1");
    const double nd = static_cast<double>(n);
    const double s = std::pow(nd, delay.beta());
    Time first = 1;
    if (delay.bounded()) {
        const double reach = s * delay.support_max();
        first = std::max<Time>(1, static_cast<Time>(std::floor(nd - reach)) - 1);
    }
    // floor(n - y) = j  <=>  y in (n - j - 1, n - j]; y = n^beta xi.
    double e = 0.0;
    for (Time j = first; j < n; ++j) {
        const double hi = static_cast<double>(n - j) / s;
        const double lo = static_cast<double>(n - j - 1) / s;
        const double mass = s * (delay.partial_mean(hi) - delay.partial_mean(lo));
        e += std::max(mass, 0.0) / static_cast<double>(j);
    }
    return e;
}

namespace {

double tail_term_value(const DelayLaw& delay, Time n) {
    // P(ceil(X) = n) = P(n - 1 < X <= n).
    const double nd = static_cast<double>(n);
    const double p = delay.x_tail(nd - 1.0) - delay.x_tail(nd);
    return nd * std::log(nd) * std::max(p, 0.0);
}

}  // namespace

DelayScan delay_condition_scan(const DelayLaw& delay, std::span<const Time> n_grid, ScanMethod method,
                               std::uint64_t seed, std::int64_t mc_samples) {
    Time prev = 1;
    for (Time n : n_grid) {
        if (n <= prev) throw std::invalid_argument("delay scan grid must be increasing with n >= 2");
        prev = n;
    }

    DelayScan scan;
    std::vector<double> draws;
    if (method == ScanMethod::MonteCarlo) {
        if (mc_samples < 2) throw std::invalid_argument("Monte Carlo scan needs at least two samples");
        Rng rng(seed);
        draws.resize(static_cast<std::size_t>(mc_samples));
        for (auto& d : draws) d = delay.sample(rng);
    }

    for (Time n : n_grid) {
        DelayScanRow row;
        row.n = n;
        row.tail_term = tail_term_value(delay, n);
        if (method == ScanMethod::Quadrature) {
            row.e_n = delay_expectation(delay, n);
        } else {
            const double nd = static_cast<double>(n);
            const double s = std::pow(nd, delay.beta());
            double sum = 0.0;
            double sum2 = 0.0;
            for (double xi : draws) {
                const double y = s * xi;
                const double rest = std::floor(nd - y);
                const double v = rest >= 1.0 ? y / rest : 0.0;
                sum += v;
                sum2 += v * v;
            }
            const double k = static_cast<double>(draws.size());
            row.e_n = sum / k;
            const double var = std::max(0.0, (sum2 - k * row.e_n * row.e_n) / (k - 1.0));
            row.stderr_ = std::sqrt(var / k);
        }
        scan.rows.push_back(row);
    }

    // Trend of e_n on a log-log scale over the positive entries.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int used = 0;
    for (const auto& r : scan.rows) {
        if (!(r.e_n > 0.0)) continue;
        const double x = std::log(static_cast<double>(r.n));
        const double y = std::log(r.e_n);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++used;
    }
    if (used >= 2) {
        const double denom = used * sxx - sx * sx;
        if (denom > 0.0) scan.decay_slope = (used * sxy - sx * sy) / denom;
    }
    for (std::size_t i = 1; i < scan.rows.size(); ++i) {
        const double tol = 3.0 * (scan.rows[i].stderr_ + scan.rows[i - 1].stderr_);
        if (scan.rows[i].e_n > scan.rows[i - 1].e_n + tol) scan.e_monotone = false;
    }

    const bool e_vanishes = used == 0;
    bool tail_term_decays = true;
    if (scan.rows.size() >= 2) {
        // Non-increasing over the second half of the grid and below its start.
        const std::size_t half = scan.rows.size() / 2;
        for (std::size_t i = half + 1; i < scan.rows.size(); ++i)
            if (scan.rows[i].tail_term > scan.rows[i - 1].tail_term * (1.0 + 1e-9)) tail_term_decays = false;
        if (scan.rows.back().tail_term > scan.rows.front().tail_term) tail_term_decays = false;
    }
    const bool e_decays = e_vanishes || (scan.decay_slope && *scan.decay_slope < 0.0 && scan.e_monotone);

    if (e_decays && tail_term_decays)
        scan.verdict = DelayVerdict::Satisfied;
    else if (!e_vanishes && scan.decay_slope && *scan.decay_slope >= 0.0 && !tail_term_decays)
        scan.verdict = DelayVerdict::Violated;
    else
        scan.verdict = DelayVerdict::Inconclusive;
    return scan;
}

}  // namespace mesotree
