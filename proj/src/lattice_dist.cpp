#include "mdlab/lattice_dist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include "mdlab/errors.hpp"
#include "mdlab/numeric.hpp"

namespace mdlab {
namespace {

double scale_of(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s = std::max(s, std::abs(x));
    return s;
}

// Sorts (point, log-weight) pairs, merges points within `tol` of the first
// point of their group, drops zero weights.
void merge_atoms(std::vector<std::pair<double, double>>& atoms, double tol,
                 std::vector<double>& points, std::vector<double>& logw) {
    std::sort(atoms.begin(), atoms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    points.clear();
    logw.clear();
    std::size_t i = 0;
    std::vector<double> group;
    while (i < atoms.size()) {
        const double start = atoms[i].first;
        group.clear();
        std::size_t j = i;
        while (j < atoms.size() && atoms[j].first - start <= tol) {
            group.push_back(atoms[j].second);
            ++j;
        }
        const double lw = log_sum_exp(group);
        if (lw != kNegInf) {
            points.push_back(start);
            logw.push_back(lw);
        }
        i = j;
    }
}

}  // namespace

ExactDistribution::ExactDistribution(std::vector<double> support, std::vector<double> logp,
                                     std::string meta)
    : support_(std::move(support)), logp_(std::move(logp)), meta_(std::move(meta)) {
    if (support_.empty()) {
        throw DomainError("ExactDistribution: support must be nonempty");
    }
    if (support_.size() != logp_.size()) {
        throw DomainError("ExactDistribution: support and logp lengths differ");
    }
    for (std::size_t i = 0; i < support_.size(); ++i) {
        if (!std::isfinite(support_[i]) || !std::isfinite(logp_[i])) {
            std::ostringstream os;
            os << "ExactDistribution: non-finite entry at index " << i;
            throw DomainError(os.str());
        }
        if (i > 0 && !(support_[i] > support_[i - 1])) {
            std::ostringstream os;
            os << "ExactDistribution: support not strictly increasing at index " << i;
            throw DomainError(os.str());
        }
    }
    const double total = log_sum_exp(logp_);
    if (std::abs(total) > 1e-12) {
        std::ostringstream os;
        os << "ExactDistribution: logsumexp(logp) = " << total << ", expected 0";
        throw DomainError(os.str());
    }
    log_suffix_.resize(support_.size());
    double acc = kNegInf;
    for (std::size_t i = support_.size(); i-- > 0;) {
        acc = log_add_exp(acc, logp_[i]);
        log_suffix_[i] = std::min(acc, 0.0);
    }
}

ExactDistribution ExactDistribution::from_log_weights(std::span<const double> points,
                                                      std::span<const double> log_weights,
                                                      std::string meta) {
    if (points.size() != log_weights.size()) {
        throw DomainError("from_log_weights: points and weights lengths differ");
    }
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!std::isfinite(points[i]) || std::isnan(log_weights[i]) ||
            log_weights[i] == std::numeric_limits<double>::infinity()) {
            throw DomainError("from_log_weights: non-finite point or weight");
        }
        atoms.emplace_back(points[i], log_weights[i]);
    }
    std::vector<double> xs;
    std::vector<double> lw;
    merge_atoms(atoms, kAtomMergeTolerance * scale_of(points), xs, lw);
    if (xs.empty()) {
        throw DomainError("from_log_weights: all weights are zero");
    }
    // Shift by the largest weight first so that large offsets do not leak
    // rounding into the normalized values, then normalize.
    const double top = *std::max_element(lw.begin(), lw.end());
    for (double& v : lw) v -= top;
    const double total = log_sum_exp(lw);
    for (double& v : lw) v -= total;
    return ExactDistribution(std::move(xs), std::move(lw), std::move(meta));
}

ExactDistribution ExactDistribution::from_weights(std::span<const double> points,
                                                  std::span<const double> weights,
                                                  std::string meta) {
    std::vector<double> lw(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
            throw DomainError("from_weights: weights must be finite and nonnegative");
        }
        lw[i] = weights[i] > 0.0 ? std::log(weights[i]) : kNegInf;
    }
    return from_log_weights(points, lw, std::move(meta));
}

ExactDistribution ExactDistribution::point_mass(double x) {
    return ExactDistribution({x}, {0.0}, "point mass");
}

ExactDistribution ExactDistribution::binomial(int k, double p) {
    if (k < 0 || !(p > 0.0 && p < 1.0)) {
        throw DomainError("binomial: need k >= 0 and 0 < p < 1");
    }
    std::vector<double> xs(k + 1);
    std::vector<double> lw(k + 1);
    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    for (int s = 0; s <= k; ++s) {
        xs[s] = s;
        lw[s] = std::lgamma(k + 1.0) - std::lgamma(s + 1.0) - std::lgamma(k - s + 1.0) + s * lp +
                (k - s) * lq;
    }
    return from_log_weights(xs, lw, "binomial(" + std::to_string(k) + ")");
}

ExactDistribution ExactDistribution::uniform(std::span<const double> points) {
    std::vector<double> lw(points.size(), 0.0);
    return from_log_weights(points, lw, "uniform");
}

double ExactDistribution::probability(std::size_t i) const { return std::exp(logp_.at(i)); }

std::vector<double> ExactDistribution::probabilities() const {
    std::vector<double> p(logp_.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(logp_[i]);
    return p;
}

double ExactDistribution::coincidence_tolerance() const {
    return kAtomMergeTolerance * std::max(std::abs(support_.front()), std::abs(support_.back()));
}

double ExactDistribution::log_upper_tail(double x) const {
    if (std::isnan(x)) throw DomainError("upper_tail: x is NaN");
    const double tol = coincidence_tolerance();
    const auto it = std::lower_bound(support_.begin(), support_.end(), x - tol);
    if (it == support_.end()) return kNegInf;
    return log_suffix_[static_cast<std::size_t>(it - support_.begin())];
}

double ExactDistribution::log_strict_upper_tail(double x) const {
    if (std::isnan(x)) throw DomainError("upper_tail: x is NaN");
    const double tol = coincidence_tolerance();
    const auto it = std::upper_bound(support_.begin(), support_.end(), x + tol);
    if (it == support_.end()) return kNegInf;
    return log_suffix_[static_cast<std::size_t>(it - support_.begin())];
}

std::ptrdiff_t ExactDistribution::atom_index(double x) const {
    const double tol = coincidence_tolerance();
    const auto it = std::lower_bound(support_.begin(), support_.end(), x - tol);
    if (it != support_.end() && std::abs(*it - x) <= tol) return it - support_.begin();
    return -1;
}

ExactDistribution ExactDistribution::with_meta(std::string meta) const {
    ExactDistribution d = *this;
    d.meta_ = std::move(meta);
    return d;
}

Moments moments(const ExactDistribution& d) {
    const auto lp = d.logp();
    const auto xs = d.support();
    const double hi = *std::max_element(lp.begin(), lp.end());
    std::vector<double> w(lp.size());
    CompensatedSum total;
    for (std::size_t i = 0; i < lp.size(); ++i) {
        w[i] = std::exp(lp[i] - hi);
        total += w[i];
    }
    const double z = total.value();
    CompensatedSum m1;
    for (std::size_t i = 0; i < w.size(); ++i) m1 += w[i] * xs[i];
    const double mean = m1.value() / z;
    CompensatedSum m2;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double c = xs[i] - mean;
        m2 += w[i] * c * c;
    }
    return {mean, m2.value() / z};
}

double mean_abs(const ExactDistribution& d) {
    CompensatedSum s;
    for (std::size_t i = 0; i < d.size(); ++i) s += d.probability(i) * std::abs(d.support()[i]);
    return s.value();
}

ExactDistribution standardize(const ExactDistribution& d, double mean, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(mean)) {
        throw DomainError("standardize: sigma must be positive and finite");
    }
    std::vector<double> xs(d.support().begin(), d.support().end());
    for (double& x : xs) x = (x - mean) / sigma;
    return ExactDistribution(std::move(xs), std::vector<double>(d.logp().begin(), d.logp().end()),
                             d.meta());
}

ExactDistribution standardize(const ExactDistribution& d) {
    const Moments m = moments(d);
    if (m.degenerate()) {
        throw DomainError("standardize: law is degenerate (variance 0)");
    }
    return standardize(d, m.mean, std::sqrt(m.variance));
}

ExactDistribution affine(const ExactDistribution& d, double a, double b) {
    if (b == 0.0 || !std::isfinite(a) || !std::isfinite(b)) {
        throw DomainError("affine: need finite a and nonzero finite b");
    }
    const std::size_t n = d.size();
    std::vector<double> xs(n);
    std::vector<double> lp(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = b > 0 ? i : n - 1 - i;
        xs[i] = a + b * d.support()[j];
        lp[i] = d.logp()[j];
    }
    return ExactDistribution(std::move(xs), std::move(lp), d.meta());
}

double upper_tail(const ExactDistribution& d, double x) { return d.log_upper_tail(x); }

double mgf(const ExactDistribution& d, double t) {
    if (!std::isfinite(t)) throw DomainError("mgf: t must be finite");
    std::vector<double> v(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) v[i] = d.logp()[i] + t * d.support()[i];
    return log_sum_exp(v);
}

ExactDistribution convolve(const ExactDistribution& a, const ExactDistribution& b,
                           std::size_t cap) {
    const std::size_t na = a.size();
    const std::size_t nb = b.size();
    if (nb != 0 && na > cap / nb) {
        std::ostringstream os;
        os << "convolve: " << na << " x " << nb << " atom pairs exceed the cap of " << cap;
        throw ResourceError(os.str());
    }
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(na * nb);
    double scale = 0.0;
    for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t j = 0; j < nb; ++j) {
            const double x = a.support()[i] + b.support()[j];
            scale = std::max(scale, std::abs(x));
            atoms.emplace_back(x, a.logp()[i] + b.logp()[j]);
        }
    }
    std::vector<double> xs;
    std::vector<double> lw;
    merge_atoms(atoms, kAtomMergeTolerance * scale, xs, lw);
    const double total = log_sum_exp(lw);
    for (double& v : lw) v -= total;
    return ExactDistribution(std::move(xs), std::move(lw), "convolution");
}

ExactDistribution convolution_power(const ExactDistribution& d, std::uint64_t count,
                                    std::size_t cap) {
    if (count == 0) return ExactDistribution::point_mass(0.0);
    ExactDistribution base = d;
    std::optional<ExactDistribution> acc;
    while (true) {
        if (count & 1u) acc = acc ? convolve(*acc, base, cap) : base;
        count >>= 1u;
        if (count == 0) break;
        base = convolve(base, base, cap);
    }
    return *acc;
}

ExactDistribution restrict_to(const ExactDistribution& d, double lo, double hi,
                              double* removed_mass) {
    const double tol = d.coincidence_tolerance();
    std::vector<double> xs;
    std::vector<double> lw;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double x = d.support()[i];
        if (x >= lo - tol && x <= hi + tol) {
            xs.push_back(x);
            lw.push_back(d.logp()[i]);
        }
    }
    if (xs.empty()) {
        throw DomainError("restrict_to: no atoms remain in the window");
    }
    const double kept = log_sum_exp(lw);
    if (removed_mass != nullptr) *removed_mass = std::max(0.0, -std::expm1(kept));
    for (double& v : lw) v -= kept;
    return ExactDistribution(std::move(xs), std::move(lw), d.meta());
}

ExactDistribution empirical_law(std::span<const double> samples, std::string meta) {
    if (samples.empty()) throw DomainError("empirical_law: no samples");
    const std::vector<double> w(samples.size(), 0.0);
    return ExactDistribution::from_log_weights(samples, w, std::move(meta));
}

double total_variation(const ExactDistribution& a, const ExactDistribution& b) {
    const double tol = std::max(a.coincidence_tolerance(), b.coincidence_tolerance());
    std::size_t i = 0;
    std::size_t j = 0;
    CompensatedSum s;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a.support()[i] < b.support()[j] - tol)) {
            s += a.probability(i++);
        } else if (i == a.size() || b.support()[j] < a.support()[i] - tol) {
            s += b.probability(j++);
        } else {
            s += std::abs(a.probability(i++) - b.probability(j++));
        }
    }
    return std::clamp(0.5 * s.value(), 0.0, 1.0);
}

double ZeroBiasDensity::integral() const {
    CompensatedSum s;
    for (std::size_t j = 0; j < segment_density.size(); ++j) {
        s += segment_density[j] * (knots[j + 1] - knots[j]);
    }
    return s.value();
}

double ZeroBiasDensity::density(double w) const {
    if (knots.size() < 2 || w < knots.front() || w > knots.back()) return 0.0;
    auto it = std::upper_bound(knots.begin(), knots.end(), w);
    std::size_t j = static_cast<std::size_t>(it - knots.begin());
    j = std::min(j == 0 ? 0 : j - 1, segment_density.size() - 1);
    return segment_density[j];
}

double ZeroBiasDensity::expect_derivative(const std::function<double(double)>& f) const {
    CompensatedSum s;
    double prev = f(knots.front());
    for (std::size_t j = 0; j < segment_density.size(); ++j) {
        const double next = f(knots[j + 1]);
        s += segment_density[j] * (next - prev);
        prev = next;
    }
    return s.value();
}

ZeroBiasDensity zero_bias(const ExactDistribution& d) {
    const Moments m = moments(d);
    if (std::abs(m.mean) > 1e-9 || std::abs(m.variance - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "zero_bias: law must have mean 0 and variance 1 (got " << m.mean << ", "
           << m.variance << ")";
        throw DomainError(os.str());
    }
    const std::size_t n = d.size();
    const auto xs = d.support();
    const std::vector<double> p = d.probabilities();
    // Density on (x_j, x_{j+1}) is sum_{i>j} x_i p_i = -sum_{i<=j} x_i p_i.
    // The suffix form has only positive terms when x_{j+1} > 0, the prefix
    // form only nonpositive terms otherwise, so neither cancels.
    std::vector<double> prefix(n);
    std::vector<double> suffix(n);
    {
        CompensatedSum s;
        for (std::size_t i = 0; i < n; ++i) {
            s += xs[i] * p[i];
            prefix[i] = -s.value();
        }
    }
    {
        CompensatedSum s;
        for (std::size_t i = n; i-- > 0;) {
            suffix[i] = s.value();  // sum over indices > i
            s += xs[i] * p[i];
        }
    }
    ZeroBiasDensity z;
    z.knots.assign(xs.begin(), xs.end());
    z.segment_density.resize(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double v = xs[j + 1] > 0.0 ? suffix[j] : prefix[j];
        z.segment_density[j] = std::max(0.0, v);
    }
    return z;
}

}  // namespace mdlab
