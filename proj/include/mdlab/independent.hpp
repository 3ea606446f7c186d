#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mdlab/lattice_dist.hpp"
#include "mdlab/report.hpp"
#include "mdlab/stein_core.hpp"

namespace mdlab::independent {

/// Laws of independent summands xi_i of W = sum xi_i.
struct ComponentList {
    std::vector<ExactDistribution> components;
    double sum_variance = 0.0;
};

/// DomainError unless every component has mean 0 (1e-12) and the variances
/// add to 1 (1e-10).
ComponentList make_components(std::vector<ExactDistribution> components);

/// n copies of +-1/sqrt(n).
ComponentList rademacher(int n);

/// sum_i E|xi_i|^3 e^{x |xi_i|}.
double gamma(const ComponentList& c, double x);

/// Law of the sum. Identical components go through repeated squaring, others
/// through a pairwise tree of convolutions. ResourceError past the cap.
ExactDistribution sum_law(const ComponentList& c, std::size_t cap = kDefaultConvolutionCap);

enum class BandKind { Gamma, Rate };

const char* to_string(BandKind b);
BandKind parse_band(const std::string& s);

/// Gamma: unit band (1 + x^3) gamma(x) e^{4 x^3 gamma(x)} at every grid x,
/// low-information where 4 x^3 gamma(x) >= 10. Rate: (1 + x^3)/sqrt(n) on
/// 0 <= x <= n^{1/6}, n the number of components.
ModelBandReport band_report(const ComponentList& c, std::span<const double> grid,
                            BandKind kind = BandKind::Gamma,
                            std::size_t cap = kDefaultConvolutionCap);

struct TruncatedAtom {
    std::size_t component = 0;
    double x = 0.0;
    double mass = 0.0;
};

struct TruncationReport {
    ComponentList result;
    double threshold = 0.0;        ///< n^{2/3}
    std::vector<TruncatedAtom> truncated;
    double truncated_mass = 0.0;   ///< sum of masses moved to 0
    double mean_shift = 0.0;       ///< sum_i |E Xbar_i|
    std::vector<double> means;     ///< E Xbar_i
    double bn_ratio_error = 0.0;   ///< |Bbar_n / B_n - 1|
};

/// Xbar_i = X_i 1(|X_i| <= n^{2/3}) (mass of cut atoms moves to 0),
/// xi_i = (Xbar_i - E Xbar_i) / Bbar_n, n = raw.size(). DomainError if a raw
/// mean is nonzero or B_n^2 < c1^2 n.
TruncationReport truncate_and_standardize(const std::vector<ExactDistribution>& raw, double c1);

}  // namespace mdlab::independent
