#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mdlab/lattice_dist.hpp"

namespace mdlab {

/// Which alternative bounds the remainder R: |E(R|W)| <= delta2 (1 + |W|)
/// (linear) or <= delta2 (1 + W^2) with delta2 |W| <= alpha < 1 (quadratic).
enum class RemainderVariant { Linear, Quadratic };

const char* to_string(RemainderVariant v);

struct SteinBudget {
    double delta = 0.0;   ///< support radius of the random measure
    double delta1 = 0.0;  ///< |E(D|W) - 1| <= delta1 (1 + |W|)
    double delta2 = 0.0;  ///< |E(R|W)| bound
    double theta = 1.0;   ///< E(D|W) <= theta
    std::optional<double> alpha;
    RemainderVariant variant = RemainderVariant::Linear;
    std::string provenance;

    /// DomainError unless theta >= 1, deltas >= 0, and a quadratic variant
    /// carries alpha in [0, 1).
    void validate() const;
    [[nodiscard]] double delta_sum() const { return delta + delta1 + delta2; }
};

/// Budget of a zero-bias coupling with |W* - W| <= delta.
SteinBudget zero_bias_budget(double delta, std::string provenance = "zero-bias");

struct Band {
    double lower = 1.0;
    double upper = 1.0;
    bool in_range = true;
};

/// theta^-1 min(delta^-1/3, delta1^-1/3, delta2^-1/3) over the positive
/// entries; +inf when all three vanish.
double range_cap(const SteinBudget& b);

/// Unit band 1 -+ theta^3 (1 + x^3) (delta + delta1 + delta2).
Band band(const SteinBudget& b, double x);

/// Unit band 1 -+ (1 + x^3) delta on 0 <= x <= delta^-1/3.
Band zero_bias_band(double delta, double x);

/// A half-width function with a range cap, the shape every model band shares.
struct BandSpec {
    std::string description;
    std::function<double(double)> halfwidth;
    std::function<bool(double)> in_range;
    /// Optional: rows where the band has blown up past usefulness.
    std::function<bool(double)> low_information;
    double x_cap = 0.0;  ///< largest in-range x (may be +inf)
};

BandSpec theorem_band_spec(const SteinBudget& b);
/// (1 + x^3) rate on 0 <= x <= rate^-1/3.
BandSpec rate_band_spec(double rate, std::string description);

struct RatioRow {
    double x = 0.0;
    double log_tail = 0.0;         ///< log P(W >= x), or log P(W > x) when x is an atom
    double log_normal_tail = 0.0;  ///< log(1 - Phi(x))
    double ratio = 1.0;
    double band_halfwidth_unit = 0.0;
    bool in_range = true;
    bool at_atom = false;
    double log_tail_inclusive = 0.0;  ///< log P(W >= x) regardless of atoms
    bool low_information = false;
};

struct RatioTable {
    std::string band;
    std::vector<RatioRow> rows;
};

struct RatioTableOptions {
    /// Allowed deviation of (mean, variance) from (0, 1).
    double standardization_tolerance = 1e-6;
};

/// Tail ratios P(W >= x) / (1 - Phi(x)) over a nonnegative increasing grid.
/// A grid point sitting on an atom uses the tail at the midpoint to the next
/// atom, i.e. P(W > x); the inclusive value is kept in log_tail_inclusive.
RatioTable ratio_table(const ExactDistribution& d, const BandSpec& spec,
                       std::span<const double> grid, const RatioTableOptions& opts = {});
RatioTable ratio_table(const ExactDistribution& d, const SteinBudget& budget,
                       std::span<const double> grid, const RatioTableOptions& opts = {});

/// max over in-range rows with x > 0 of |ratio - 1| / band_halfwidth_unit.
double fit_constant(const RatioTable& table);

/// sup over rows with 0 <= x <= x_max of |ratio - 1|.
double max_ratio_deviation(const RatioTable& table, double x_max);

/// `points` evenly spaced values on [0, x_max].
std::vector<double> uniform_grid(double x_max, int points);

struct PairSample {
    double w = 0.0;
    double w_prime = 0.0;
    double d = 0.0;
    double r = 0.0;
};

/// Exact conditional data of one state: E(D|W = w), E(R|W = w).
struct StateConditional {
    double w = 0.0;
    double weight = 0.0;
    double mean_d = 0.0;
    double mean_r = 0.0;
};

struct RegressionEstimate {
    double delta1_hat = 0.0;
    double delta2_hat = 0.0;
    double theta_hat = 0.0;
};

/// Equal-count binning by w. DomainError unless bins >= 5 and there are at
/// least 10 samples per bin.
RegressionEstimate conditional_regression(std::span<const PairSample> samples, int bins,
                                          RemainderVariant variant = RemainderVariant::Linear);

/// Every state is its own bin; zero-weight states are ignored.
RegressionEstimate conditional_regression(std::span<const StateConditional> states,
                                          RemainderVariant variant = RemainderVariant::Linear);

/// C_alpha: 12 in the linear case, 2 (3 + alpha) / (1 - alpha) otherwise.
double c_alpha(const SteinBudget& b);

struct SkippedT {
    double t = 0.0;
    std::string reason;
};

struct MgfCheck {
    double fitted_c1 = 0.0;  ///< max(0, raw_max): smallest admissible nonnegative constant
    double raw_max = 0.0;    ///< max over used t of the raw quotient (may be negative)
    bool ok = false;
    std::vector<double> used;
    std::vector<SkippedT> skipped;
};

/// Quotient (log E e^{tW} - t^2/2) / (theta (delta2 t + delta1 t^2 + sum t^3))
/// over the admissible t of the grid.
MgfCheck check_mgf_bound(const ExactDistribution& d, const SteinBudget& b,
                         std::span<const double> t_grid);

struct TailIntegral {
    double value = 0.0;
    double ratio_to_tk = 0.0;
};

/// int_0^u s^k e^{s^2/2} ds by its positive series.
double weighted_gaussian_moment(int k, double u);

/// int_0^t u^k e^{u^2/2} P(W >= u) du, exact on each inter-atom interval.
/// DomainError if k < 1, t < 0, or t exceeds the range cap of `b`.
TailIntegral check_tail_integral(const ExactDistribution& d, int k, double t,
                                 const SteinBudget& b);

struct PairAtom {
    double w = 0.0;
    double w_prime = 0.0;
    double prob = 0.0;
};

enum class AntisymmetricFunction { Difference, CubedDifference, SineDifference };

const char* to_string(AntisymmetricFunction f);

/// |E F(W, W')| for an exact joint law. DomainError naming the first pair
/// whose mirror image carries a different mass (beyond 1e-12).
double pair_antisymmetry_check(std::span<const PairAtom> kernel, AntisymmetricFunction f);

/// Largest residual over the three-function basket.
double pair_antisymmetry_check(std::span<const PairAtom> kernel);

}  // namespace mdlab
