#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mdlab/lattice_dist.hpp"
#include "mdlab/report.hpp"
#include "mdlab/stein_core.hpp"

namespace mdlab::curie_weiss {

enum class CaseId { Case1, Case2, Case3 };
enum class Sign { None, Plus, Minus };

const char* to_string(CaseId c);
const char* to_string(Sign s);
/// "none", "+", "-", "plus", "minus".
Sign parse_sign(const std::string& s);

/// Solutions of m = tanh(beta (m + h)) relevant to the case.
struct Magnetization {
    double beta = 0.0;
    double h = 0.0;
    CaseId case_id = CaseId::Case1;
    /// Case 1: the single root with m h >= 0. Case 2: {m1, m2}, m1 = -m2 < 0.
    /// Case 3: {0}.
    std::vector<double> roots;
    /// Every sign change found on [-1, 1], before case selection.
    std::vector<double> all_roots;
};

/// 128 equal subdivisions of [-1, 1], then bisection to 1e-14.
Magnetization solve_magnetization(double beta, double h);

struct CWParams {
    int n = 0;
    Magnetization mag;

    /// Root matching the conditioning: case 1 needs None, case 2 Plus or Minus.
    /// DomainError otherwise (always for case 3).
    [[nodiscard]] double root(Sign sign) const;
    /// n (1 - m^2) / (1 - (1 - m^2) beta).
    [[nodiscard]] double sigma2(double m) const;
    /// (1 - (1 - m^2) beta) / n.
    [[nodiscard]] double lambda(double m) const;
};

CWParams make_params(int n, double beta, double h);

/// Law of S = sum of spins under the Gibbs measure, on {-n, -n+2, ..., n}.
/// ResourceError above n = 10^6.
ExactDistribution exact_spin_sum_law(const CWParams& p);

/// S-collapsed heat-bath moves: index j = (S + n) / 2.
struct CollapsedKernel {
    std::vector<double> down;  ///< P(S -> S - 2)
    std::vector<double> up;    ///< P(S -> S + 2)
};

CollapsedKernel collapsed_kernel(const CWParams& p);

/// max_S |(pi P)(S) - pi(S)| for the exact law.
double stationarity_residual(const CWParams& p);

struct GlauberKernel {
    double a = 0.0;  ///< P(new spin = -1 | removed spin = +1)
    double b = 0.0;  ///< P(new spin = +1 | removed spin = -1)
    double lambda = 0.0;
};

/// A(w), B(w) at S = n m + sigma w for the root chosen by `sign`.
GlauberKernel glauber_kernel(const CWParams& p, Sign sign, double w);

struct ConditionalLaw {
    ExactDistribution law = ExactDistribution::point_mass(0.0);  ///< W after conditioning and truncation
    double m = 0.0;
    double sigma = 0.0;
    double zero_atom_mass = 0.0;  ///< P(S = 0), case 2 only
    double c1 = 0.0;              ///< window |W| <= c1 sqrt(n)
    double truncated_mass = 0.0;  ///< conditional mass outside the window
    double decay_rate = 0.0;      ///< -log(truncated_mass) / n, inf when nothing is cut
    SteinBudget budget;           ///< quadratic variant over the window, alpha = 1/2
    double ab_constant = 0.0;     ///< max over the window of n |A + B - 1|
};

/// Conditions on S < 0 or S > 0 in case 2, standardizes by (n m, sigma(m)),
/// and truncates to the largest window c1 = c_max 2^{-j/4} with
/// delta2 c1 sqrt(n) <= 1/2.
ConditionalLaw conditional_standardized_law(const CWParams& p, Sign sign);

/// Ratio table with unit band (1 + x^3)/sqrt(n) on 0 <= x <= n^{1/6}.
ModelBandReport band_report(const CWParams& p, Sign sign, std::span<const double> grid);

/// Heat-bath samples of S, one sweep (n single-site updates) apart after
/// `burnin` sweeps. Case 2 chains start in a mode picked by each worker's stream.
std::vector<int> sample(const CWParams& p, std::uint64_t seed, std::uint64_t count,
                        std::uint64_t burnin, int workers);

}  // namespace mdlab::curie_weiss
