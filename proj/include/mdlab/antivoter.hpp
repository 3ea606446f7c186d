#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mdlab/lattice_dist.hpp"
#include "mdlab/report.hpp"
#include "mdlab/stein_core.hpp"

namespace mdlab::antivoter {

/// Anti-voter dynamics on the complete graph K_n collapsed to T, the number
/// of +1 spins. One step picks a vertex I and a neighbour J uniformly and
/// sets X_I = -X_J.
struct Chain {
    int n = 0;
    std::vector<double> birth;  ///< P(T -> T + 1), T = 0..n
    std::vector<double> death;  ///< P(T -> T - 1), T = 0..n
    double sigma2 = 0.0;        ///< Var U = (n^2 - 2n) / (2n - 3)
    double lambda = 0.0;        ///< 2 / n

    [[nodiscard]] double sigma() const;
    /// W = (2T - n) / sigma.
    [[nodiscard]] double w_of(int t) const;
};

Chain transition_rates(int n);

/// Stationary probabilities indexed by T = 0..n. T = 0 and T = n are
/// transient (the chain leaves and never returns) and carry zero mass.
std::vector<double> stationary_probabilities(const Chain& c);

/// Law of W = (2T - n) / sigma under the stationary distribution.
ExactDistribution stationary_law(const Chain& c);

/// Exact joint law of (W, W') for one step from stationarity, lazy moves
/// included as w' = w.
std::vector<PairAtom> pair_kernel(const Chain& c);

struct StateRow {
    int t = 0;
    double w = 0.0;
    double prob = 0.0;
    double regression = 0.0;  ///< E(W - W' | T) from the kernel
    double mean_d = 0.0;      ///< E(D | T), D = (W - W')^2 / (2 lambda)
};

struct IdentityReport {
    std::vector<StateRow> states;  ///< stationary support only
    double regression_residual = 0.0;  ///< max_T |E(W - W'|T) - (2/n) W_T|
    double d_residual = 0.0;           ///< max_T |E(D|T) - 1 - (W_T^2 - 1)/(2(n-1))|
    double mean_d_residual = 0.0;      ///< |E_pi (E(D|W) - 1)|
    double variance_residual = 0.0;    ///< |Var_pi W - 1|
    SteinBudget budget;
};

/// Checks both pair identities state by state. IntegrityError if any
/// residual exceeds 1e-9.
IdentityReport exact_pair_identities(const Chain& c);

/// Ratio table with unit band (1 + x^3) / sqrt(n) on 0 <= x <= n^{1/6}.
ModelBandReport band_report(int n, std::span<const double> grid);

/// n^{1/6}.
double range_cap(int n);

/// Stationary samples of T from the collapsed chain, one sweep (n steps)
/// between samples after `burnin` sweeps.
std::vector<int> sample(const Chain& c, std::uint64_t seed, std::uint64_t count,
                        std::uint64_t burnin, int workers);

}  // namespace mdlab::antivoter
