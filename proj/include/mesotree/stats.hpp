#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mesotree/estimators.hpp"
#include "mesotree/theory.hpp"

namespace mesotree {

/// (1/2) sum |p_hat - p| over a common support, plus the difference of the
/// masses each side leaves outside it.
double tv_distance(std::span<const double> empirical, std::span<const double> theory);

/// Degree proportions k = 1..theory.size() against p_1..p_K.
double tv_distance(const DegreeHist& empirical, std::span<const double> theory);

/// Fringe proportions over the shapes of the table.
double tv_distance(const FringeCensus& empirical, const FringeTable& theory);

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

/// Pearson test of observed counts against cell probabilities. Adjacent
/// cells are pooled until every pooled cell expects at least `min_expected`.
ChiSquareResult chi_square_test(std::span<const std::int64_t> observed, std::span<const double> probs,
                                double min_expected = 5.0);

struct AndersonDarlingResult {
    double a2 = 0.0;
    /// Small-sample corrected statistic for normality with estimated mean
    /// and variance.
    double a2_star = 0.0;
    double p_value = 1.0;
};

/// Normality test with both parameters estimated from the sample.
AndersonDarlingResult anderson_darling_normal(std::vector<double> sample);

/// sup_x |F_n(x) - F(x)|.
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);

}  // namespace mesotree
