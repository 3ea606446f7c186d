#pragma once

#include <cstdint>
#include <istream>
#include <span>
#include <vector>

#include "mdlab/lattice_dist.hpp"
#include "mdlab/report.hpp"
#include "mdlab/stein_core.hpp"

namespace mdlab::combinatorial {

/// Square array with zero row and column sums; W = sum_i a[i][pi(i)] / sigma
/// for a uniform random permutation pi.
struct CombArray {
    int n = 0;
    std::vector<double> a;  ///< row-major
    double c0 = 0.0;        ///< max |a_ij|
    double sigma = 0.0;     ///< sigma^2 = sum a_ij^2 / (n - 1)

    [[nodiscard]] double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

/// Validates the zero-sum constraints (to 1e-10 relative to max(1, c0)) and
/// computes c0 and sigma. DomainError naming the offending row or column, or
/// when sigma = 0.
CombArray validate_and_sigma(const std::vector<std::vector<double>>& a);

/// Exact law of W by enumerating all n! permutations (n <= 9).
ExactDistribution exact_law(const CombArray& arr);

/// Law of sum_i a[i][pi(i)] before standardization.
ExactDistribution raw_law(const CombArray& arr);

/// W values for `count` uniform permutations (Fisher-Yates).
std::vector<double> sample(const CombArray& arr, std::uint64_t seed, std::uint64_t count,
                           int workers);

/// Zero-bias budget with delta = 8 c0 / sigma.
SteinBudget budget(const CombArray& arr);

/// Ratio table from the exact law with the zero-bias band.
ModelBandReport band_report(const CombArray& arr, std::span<const double> grid);

/// Double-centered array of i.i.d. uniform(-1, 1) draws.
CombArray random_array(int n, std::uint64_t seed);

/// a_ij = (i - (n-1)/2)(j - (n-1)/2).
CombArray product_array(int n);

/// n rows of n comma-separated reals.
std::vector<std::vector<double>> read_array_csv(std::istream& in);

}  // namespace mdlab::combinatorial
