#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mdlab {

/// Relative tolerance used to identify atoms that coincide up to rounding.
inline constexpr double kAtomMergeTolerance = 1e-12;

/// Default cap on the number of atom pairs formed by one convolution.
inline constexpr std::size_t kDefaultConvolutionCap = 10'000'000;

/// A law with finitely many atoms: strictly increasing support and
/// log-probabilities that sum (in probability space) to one.
///
/// Immutable after construction. Suffix log-sums are precomputed so that
/// upper tails cost one binary search.
class ExactDistribution {
public:
    /// Validates: equal nonzero lengths, finite entries, strictly increasing
    /// support, logsumexp(logp) = 0 within 1e-12.
    ExactDistribution(std::vector<double> support, std::vector<double> logp, std::string meta = {});

    /// Builds from unnormalized log-weights at arbitrary (unsorted, possibly
    /// repeated) points. Coinciding points are merged, -inf weights dropped,
    /// and the result normalized.
    static ExactDistribution from_log_weights(std::span<const double> points,
                                              std::span<const double> log_weights,
                                              std::string meta = {});
    static ExactDistribution from_weights(std::span<const double> points,
                                          std::span<const double> weights,
                                          std::string meta = {});

    static ExactDistribution point_mass(double x);
    /// Binomial(k, p) on {0, ..., k}.
    static ExactDistribution binomial(int k, double p = 0.5);
    /// Equal mass on each of the given distinct points.
    static ExactDistribution uniform(std::span<const double> points);

    [[nodiscard]] std::size_t size() const { return support_.size(); }
    [[nodiscard]] std::span<const double> support() const { return support_; }
    [[nodiscard]] std::span<const double> logp() const { return logp_; }
    [[nodiscard]] const std::string& meta() const { return meta_; }
    [[nodiscard]] double probability(std::size_t i) const;
    [[nodiscard]] std::vector<double> probabilities() const;

    /// log P(W >= x); -inf above the largest atom.
    [[nodiscard]] double log_upper_tail(double x) const;
    /// log P(W > x).
    [[nodiscard]] double log_strict_upper_tail(double x) const;

    /// Index of the atom equal to x (within the merge tolerance), or -1.
    [[nodiscard]] std::ptrdiff_t atom_index(double x) const;

    /// Scale used for atom coincidence: max |support|, at least tiny.
    [[nodiscard]] double coincidence_tolerance() const;

    [[nodiscard]] ExactDistribution with_meta(std::string meta) const;

private:
    std::vector<double> support_;
    std::vector<double> logp_;
    std::vector<double> log_suffix_;  // log P(W >= support_[i])
    std::string meta_;
};

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
    [[nodiscard]] bool degenerate() const { return !(variance > 0.0); }
};

Moments moments(const ExactDistribution& d);

/// E|W|.
double mean_abs(const ExactDistribution& d);

/// Support mapped x -> (x - mean) / sigma; probabilities unchanged.
ExactDistribution standardize(const ExactDistribution& d, double mean, double sigma);
/// Standardizes by the law's own moments; DomainError when degenerate.
ExactDistribution standardize(const ExactDistribution& d);

/// Affine image a + b x (b != 0); b < 0 reverses the support.
ExactDistribution affine(const ExactDistribution& d, double a, double b);

/// log P(W >= x), inclusive convention.
double upper_tail(const ExactDistribution& d, double x);

/// log E exp(t W).
double mgf(const ExactDistribution& d, double t);

/// Law of the independent sum. ResourceError when a.size() * b.size() > cap.
ExactDistribution convolve(const ExactDistribution& a, const ExactDistribution& b,
                           std::size_t cap = kDefaultConvolutionCap);

/// Law of the sum of `count` independent copies, by repeated squaring.
ExactDistribution convolution_power(const ExactDistribution& d, std::uint64_t count,
                                    std::size_t cap = kDefaultConvolutionCap);

/// Restriction to atoms in [lo, hi] (inclusive), renormalized. The removed
/// mass is written to *removed_mass when non-null. DomainError if nothing
/// remains.
ExactDistribution restrict_to(const ExactDistribution& d, double lo, double hi,
                              double* removed_mass = nullptr);

/// Empirical law of a sample (equal weight per value, coinciding values merged).
ExactDistribution empirical_law(std::span<const double> samples, std::string meta = "empirical");

/// Total variation distance; atoms missing from one side count as zero mass.
double total_variation(const ExactDistribution& a, const ExactDistribution& b);

/// Zero-biased law of a mean-zero, variance-one lattice W. It has density
/// p*(w) = E[W 1(W > w)], constant between consecutive atoms of W and zero
/// outside [min W, max W].
struct ZeroBiasDensity {
    std::vector<double> knots;
    std::vector<double> segment_density;  // size knots.size() - 1

    [[nodiscard]] double integral() const;
    [[nodiscard]] double density(double w) const;
    /// E f'(W*) given the antiderivative f, integrated exactly per segment.
    [[nodiscard]] double expect_derivative(const std::function<double(double)>& f) const;
};

ZeroBiasDensity zero_bias(const ExactDistribution& d);

}  // namespace mdlab
