#include "mdlab/stein_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mdlab/errors.hpp"
#include "mdlab/normal_kernel.hpp"
#include "mdlab/numeric.hpp"

namespace mdlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Slack on range-cap comparisons so that x = delta^-1/3 computed in floating
// point still counts as in range.
constexpr double kRangeSlack = 1e-12;

bool cube_within(double x, double scale, double delta) {
    if (delta <= 0.0) return true;
    const double s = scale * x;
    return s * s * s * delta <= 1.0 + kRangeSlack;
}

void require_x(double x) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
        throw DomainError("band: x must be finite and nonnegative");
    }
}

}  // namespace

const char* to_string(RemainderVariant v) {
    return v == RemainderVariant::Linear ? "R-linear" : "R-quadratic";
}

const char* to_string(AntisymmetricFunction f) {
    switch (f) {
        case AntisymmetricFunction::Difference:
            return "w-w'";
        case AntisymmetricFunction::CubedDifference:
            return "(w-w')^3";
        case AntisymmetricFunction::SineDifference:
            return "sin(w-w')";
    }
    return "?";
}

void SteinBudget::validate() const {
    if (!(delta >= 0.0) || !(delta1 >= 0.0) || !(delta2 >= 0.0)) {
        throw DomainError("SteinBudget: delta, delta1, delta2 must be nonnegative");
    }
    if (!(theta >= 1.0) || !std::isfinite(theta)) {
        throw DomainError("SteinBudget: theta must be >= 1");
    }
    if (alpha && !(*alpha >= 0.0 && *alpha < 1.0)) {
        throw DomainError("SteinBudget: alpha must lie in [0, 1)");
    }
    if (variant == RemainderVariant::Quadratic && !alpha) {
        throw DomainError("SteinBudget: quadratic remainder variant requires alpha");
    }
}

SteinBudget zero_bias_budget(double delta, std::string provenance) {
    SteinBudget b;
    b.delta = delta;
    b.provenance = std::move(provenance);
    b.validate();
    return b;
}

double range_cap(const SteinBudget& b) {
    b.validate();
    double cap = kInf;
    for (double d : {b.delta, b.delta1, b.delta2}) {
        if (d > 0.0) cap = std::min(cap, std::cbrt(1.0 / d));
    }
    return cap / b.theta;
}

Band band(const SteinBudget& b, double x) {
    b.validate();
    require_x(x);
    const double t3 = b.theta * b.theta * b.theta;
    const double h = t3 * (1.0 + x * x * x) * b.delta_sum();
    const bool ok = cube_within(x, b.theta, b.delta) && cube_within(x, b.theta, b.delta1) &&
                    cube_within(x, b.theta, b.delta2);
    return {1.0 - h, 1.0 + h, ok};
}

Band zero_bias_band(double delta, double x) {
    if (!(delta >= 0.0)) throw DomainError("zero_bias_band: delta must be nonnegative");
    require_x(x);
    const double h = (1.0 + x * x * x) * delta;
    return {1.0 - h, 1.0 + h, cube_within(x, 1.0, delta)};
}

BandSpec theorem_band_spec(const SteinBudget& b) {
    b.validate();
    BandSpec s;
    std::ostringstream os;
    os << "theta^3 (1+x^3) (delta+delta1+delta2), " << to_string(b.variant);
    s.description = os.str();
    s.halfwidth = [b](double x) { return band(b, x).upper - 1.0; };
    s.in_range = [b](double x) { return band(b, x).in_range; };
    s.x_cap = range_cap(b);
    return s;
}

BandSpec rate_band_spec(double rate, std::string description) {
    if (!(rate >= 0.0) || !std::isfinite(rate)) {
        throw DomainError("rate_band_spec: rate must be finite and nonnegative");
    }
    BandSpec s;
    s.description = std::move(description);
    s.halfwidth = [rate](double x) { return (1.0 + x * x * x) * rate; };
    s.in_range = [rate](double x) { return cube_within(x, 1.0, rate); };
    s.x_cap = rate > 0.0 ? std::cbrt(1.0 / rate) : kInf;
    return s;
}

RatioTable ratio_table(const ExactDistribution& d, const BandSpec& spec,
                       std::span<const double> grid, const RatioTableOptions& opts) {
    if (grid.empty()) throw DomainError("ratio_table: grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) {
            throw DomainError("ratio_table: grid points must be finite and nonnegative");
        }
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            throw DomainError("ratio_table: grid must be strictly increasing");
        }
    }
    const Moments m = moments(d);
    if (std::abs(m.mean) > opts.standardization_tolerance ||
        std::abs(m.variance - 1.0) > opts.standardization_tolerance) {
        std::ostringstream os;
        os << "ratio_table: law is not standardized (mean " << m.mean << ", variance "
           << m.variance << ")";
        throw DomainError(os.str());
    }
    RatioTable t;
    t.band = spec.description;
    t.rows.reserve(grid.size());
    for (double x : grid) {
        RatioRow r;
        r.x = x;
        r.log_tail_inclusive = d.log_upper_tail(x);
        r.at_atom = d.atom_index(x) >= 0;
        r.log_tail = r.at_atom ? d.log_strict_upper_tail(x) : r.log_tail_inclusive;
        r.log_normal_tail = normal::log_normal_tail(x);
        r.ratio = r.log_tail == kNegInf ? 0.0 : std::exp(r.log_tail - r.log_normal_tail);
        r.band_halfwidth_unit = spec.halfwidth(x);
        r.in_range = spec.in_range(x);
        r.low_information = spec.low_information ? spec.low_information(x) : false;
        t.rows.push_back(r);
    }
    return t;
}

RatioTable ratio_table(const ExactDistribution& d, const SteinBudget& budget,
                       std::span<const double> grid, const RatioTableOptions& opts) {
    return ratio_table(d, theorem_band_spec(budget), grid, opts);
}

double fit_constant(const RatioTable& table) {
    if (table.rows.empty()) throw DomainError("fit_constant: table is empty");
    double best = 0.0;
    bool any = false;
    for (const auto& r : table.rows) {
        if (!(r.x > 0.0) || !r.in_range) continue;
        if (!(r.band_halfwidth_unit > 0.0)) {
            std::ostringstream os;
            os << "fit_constant: nonpositive band half-width at x = " << r.x;
            throw DomainError(os.str());
        }
        any = true;
        best = std::max(best, std::abs(r.ratio - 1.0) / r.band_halfwidth_unit);
    }
    if (!any) throw DomainError("fit_constant: no in-range rows with x > 0");
    return best;
}

double max_ratio_deviation(const RatioTable& table, double x_max) {
    double best = 0.0;
    for (const auto& r : table.rows) {
        if (r.x <= x_max) best = std::max(best, std::abs(r.ratio - 1.0));
    }
    return best;
}

std::vector<double> uniform_grid(double x_max, int points) {
    if (points < 2 || !(x_max > 0.0) || !std::isfinite(x_max)) {
        throw DomainError("uniform_grid: need points >= 2 and a finite positive x_max");
    }
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i) g[i] = x_max * i / (points - 1);
    g.back() = x_max;
    return g;
}

namespace {

struct BinStats {
    double w = 0.0;
    double d = 0.0;
    double r = 0.0;
};

RegressionEstimate from_bins(std::span<const BinStats> bins, RemainderVariant variant) {
    RegressionEstimate e;
    e.theta_hat = -kInf;
    for (const auto& b : bins) {
        const double lin = 1.0 + std::abs(b.w);
        const double r_scale = variant == RemainderVariant::Linear ? lin : 1.0 + b.w * b.w;
        e.delta1_hat = std::max(e.delta1_hat, std::abs(b.d - 1.0) / lin);
        e.delta2_hat = std::max(e.delta2_hat, std::abs(b.r) / r_scale);
        e.theta_hat = std::max(e.theta_hat, b.d);
    }
    return e;
}

}  // namespace

RegressionEstimate conditional_regression(std::span<const PairSample> samples, int bins,
                                          RemainderVariant variant) {
    if (bins < 5) throw DomainError("conditional_regression: need at least 5 bins");
    if (samples.size() < static_cast<std::size_t>(bins) * 10) {
        std::ostringstream os;
        os << "conditional_regression: " << samples.size() << " samples, need at least "
           << bins * 10;
        throw DomainError(os.str());
    }
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return samples[a].w < samples[b].w; });
    const std::size_t n = samples.size();
    std::vector<BinStats> stats;
    for (int b = 0; b < bins; ++b) {
        const std::size_t lo = n * b / bins;
        const std::size_t hi = n * (b + 1) / bins;
        CompensatedSum sw, sd, sr;
        for (std::size_t i = lo; i < hi; ++i) {
            const auto& s = samples[order[i]];
            sw += s.w;
            sd += s.d;
            sr += s.r;
        }
        const double c = static_cast<double>(hi - lo);
        stats.push_back({sw.value() / c, sd.value() / c, sr.value() / c});
    }
    return from_bins(stats, variant);
}

RegressionEstimate conditional_regression(std::span<const StateConditional> states,
                                          RemainderVariant variant) {
    std::vector<BinStats> stats;
    for (const auto& s : states) {
        if (s.weight > 0.0) stats.push_back({s.w, s.mean_d, s.mean_r});
    }
    if (stats.empty()) throw DomainError("conditional_regression: no states with positive weight");
    return from_bins(stats, variant);
}

double c_alpha(const SteinBudget& b) {
    b.validate();
    if (b.variant == RemainderVariant::Linear) return 12.0;
    const double a = *b.alpha;
    return 2.0 * (3.0 + a) / (1.0 - a);
}

MgfCheck check_mgf_bound(const ExactDistribution& d, const SteinBudget& b,
                         std::span<const double> t_grid) {
    const double ca = c_alpha(b);
    MgfCheck out;
    out.raw_max = -kInf;
    bool any_denominator = false;
    for (double t : t_grid) {
        if (!(t >= 1e-3) || !std::isfinite(t)) {
            out.skipped.push_back({t, "t below 1e-3"});
            continue;
        }
        if (b.delta > 0.0 && t > 1.0 / (2.0 * b.delta)) {
            out.skipped.push_back({t, "t > 1/(2 delta)"});
            continue;
        }
        if (t * b.delta1 + ca * t * b.theta * b.delta2 > 0.5) {
            out.skipped.push_back({t, "t delta1 + C_alpha t theta delta2 > 1/2"});
            continue;
        }
        const double denom =
            b.theta * (b.delta2 * t + b.delta1 * t * t + b.delta_sum() * t * t * t);
        if (!(denom > 0.0)) {
            out.skipped.push_back({t, "zero denominator"});
            continue;
        }
        any_denominator = true;
        const double q = (mgf(d, t) - 0.5 * t * t) / denom;
        out.raw_max = std::max(out.raw_max, q);
        out.used.push_back(t);
    }
    if (out.used.empty()) {
        throw DomainError(any_denominator || b.delta_sum() > 0.0
                              ? "check_mgf_bound: every t was skipped"
                              : "check_mgf_bound: budget is identically zero");
    }
    out.fitted_c1 = std::max(0.0, out.raw_max);
    out.ok = std::isfinite(out.fitted_c1);
    return out;
}

double weighted_gaussian_moment(int k, double u) {
    if (k < 0) throw DomainError("weighted_gaussian_moment: k must be nonnegative");
    if (!(u >= 0.0) || u > 30.0) {
        throw DomainError("weighted_gaussian_moment: u must lie in [0, 30]");
    }
    if (u == 0.0) return 0.0;
    // u^{k+1} e^{lam} sum_j Poisson(lam; j) / (k + 2j + 1),  lam = u^2 / 2.
    const double lam = 0.5 * u * u;
    double pj = std::exp(-lam);
    CompensatedSum s;
    for (int j = 0;; ++j) {
        const double term = pj / (k + 2.0 * j + 1.0);
        s += term;
        if (j > lam && term < 1e-18 * s.value()) break;
        pj *= lam / (j + 1.0);
    }
    return std::pow(u, k + 1) * std::exp(lam) * s.value();
}

TailIntegral check_tail_integral(const ExactDistribution& d, int k, double t,
                                 const SteinBudget& b) {
    if (k < 1) throw DomainError("check_tail_integral: k must be >= 1");
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw DomainError("check_tail_integral: t must be finite and nonnegative");
    }
    const double cap = range_cap(b);
    if (t > cap * (1.0 + kRangeSlack)) {
        std::ostringstream os;
        os << "check_tail_integral: t = " << t << " exceeds the range cap " << cap;
        throw DomainError(os.str());
    }
    if (t == 0.0) return {0.0, 0.0};
    std::vector<double> breaks{0.0};
    for (double x : d.support()) {
        if (x > 0.0 && x < t) breaks.push_back(x);
    }
    breaks.push_back(t);
    CompensatedSum s;
    double f_prev = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double a = breaks[i];
        const double c = breaks[i + 1];
        const double f_next = weighted_gaussian_moment(k, c);
        // P(W >= u) is constant for u in (a, c].
        const double lt = d.log_upper_tail(0.5 * (a + c));
        if (lt != kNegInf) s += std::exp(lt) * (f_next - f_prev);
        f_prev = f_next;
    }
    const double v = s.value();
    return {v, v / std::pow(t, k)};
}

namespace {

double apply(AntisymmetricFunction f, double w, double wp) {
    const double z = w - wp;
    switch (f) {
        case AntisymmetricFunction::Difference:
            return z;
        case AntisymmetricFunction::CubedDifference:
            return z * z * z;
        case AntisymmetricFunction::SineDifference:
            return std::sin(z);
    }
    return 0.0;
}

std::vector<PairAtom> merged_pairs(std::span<const PairAtom> kernel, double tol) {
    std::vector<PairAtom> v(kernel.begin(), kernel.end());
    std::sort(v.begin(), v.end(), [](const PairAtom& a, const PairAtom& b) {
        return a.w < b.w || (a.w == b.w && a.w_prime < b.w_prime);
    });
    std::vector<PairAtom> out;
    for (const auto& p : v) {
        if (!out.empty() && std::abs(out.back().w - p.w) <= tol &&
            std::abs(out.back().w_prime - p.w_prime) <= tol) {
            out.back().prob += p.prob;
        } else {
            out.push_back(p);
        }
    }
    return out;
}

void require_exchangeable(std::span<const PairAtom> kernel) {
    double scale = 0.0;
    for (const auto& p : kernel) {
        if (!std::isfinite(p.w) || !std::isfinite(p.w_prime) || !std::isfinite(p.prob)) {
            throw DomainError("pair_antisymmetry_check: non-finite pair entry");
        }
        scale = std::max({scale, std::abs(p.w), std::abs(p.w_prime)});
    }
    const double tol = kAtomMergeTolerance * scale;
    const auto v = merged_pairs(kernel, tol);
    for (const auto& p : v) {
        auto it = std::lower_bound(v.begin(), v.end(), p.w_prime - tol,
                                   [](const PairAtom& a, double w) { return a.w < w; });
        double mirror = 0.0;
        for (; it != v.end() && it->w <= p.w_prime + tol; ++it) {
            if (std::abs(it->w_prime - p.w) <= tol) mirror += it->prob;
        }
        if (std::abs(mirror - p.prob) > 1e-12) {
            std::ostringstream os;
            os.precision(17);
            os << "pair_antisymmetry_check: law is not exchangeable at (w, w') = (" << p.w
               << ", " << p.w_prime << "): mass " << p.prob << " vs mirror " << mirror;
            throw DomainError(os.str());
        }
    }
}

}  // namespace

double pair_antisymmetry_check(std::span<const PairAtom> kernel, AntisymmetricFunction f) {
    require_exchangeable(kernel);
    CompensatedSum s;
    for (const auto& p : kernel) s += p.prob * apply(f, p.w, p.w_prime);
    return std::abs(s.value());
}

double pair_antisymmetry_check(std::span<const PairAtom> kernel) {
    require_exchangeable(kernel);
    double worst = 0.0;
    for (auto f : {AntisymmetricFunction::Difference, AntisymmetricFunction::CubedDifference,
                   AntisymmetricFunction::SineDifference}) {
        CompensatedSum s;
        for (const auto& p : kernel) s += p.prob * apply(f, p.w, p.w_prime);
        worst = std::max(worst, std::abs(s.value()));
    }
    return worst;
}

}  // namespace mdlab
