#include "mdlab/curie_weiss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mdlab/errors.hpp"
#include "mdlab/numeric.hpp"
#include "mdlab/rng.hpp"

namespace mdlab::curie_weiss {

namespace {

constexpr int kMaxN = 1'000'000;
constexpr int kSubdivisions = 128;
constexpr double kRootTolerance = 1e-14;

double fixed_point_gap(double m, double beta, double h) { return m - std::tanh(beta * (m + h)); }

double bisect(double lo, double hi, double beta, double h) {
    double flo = fixed_point_gap(lo, beta, h);
    while (hi - lo > kRootTolerance) {
        const double mid = 0.5 * (lo + hi);
        const double fm = fixed_point_gap(mid, beta, h);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// P(new spin = +1) when the other spins sum to t.
double p_plus(const CWParams& p, double t) {
    const double f = p.mag.beta * (t / p.n + p.mag.h);
    return 1.0 / (1.0 + std::exp(-2.0 * f));
}

}  // namespace

const char* to_string(CaseId c) {
    switch (c) {
        case CaseId::Case1: return "case1";
        case CaseId::Case2: return "case2";
        case CaseId::Case3: return "case3";
    }
    return "?";
}

const char* to_string(Sign s) {
    switch (s) {
        case Sign::None: return "none";
        case Sign::Plus: return "+";
        case Sign::Minus: return "-";
    }
    return "?";
}

Sign parse_sign(const std::string& s) {
    if (s == "none" || s.empty()) return Sign::None;
    if (s == "+" || s == "plus") return Sign::Plus;
    if (s == "-" || s == "minus") return Sign::Minus;
    throw DomainError("curieweiss: unknown sign '" + s + "'");
}

Magnetization solve_magnetization(double beta, double h) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("curieweiss: beta must be > 0");
    if (!std::isfinite(h)) throw DomainError("curieweiss: h must be finite");
    Magnetization out;
    out.beta = beta;
    out.h = h;
    std::vector<double> grid(kSubdivisions + 1);
    std::vector<double> f(kSubdivisions + 1);
    for (int i = 0; i <= kSubdivisions; ++i) {
        grid[i] = -1.0 + 2.0 * i / kSubdivisions;
        f[i] = fixed_point_gap(grid[i], beta, h);
    }
    for (int i = 0; i <= kSubdivisions; ++i) {
        if (f[i] == 0.0) out.all_roots.push_back(grid[i]);
        if (i < kSubdivisions && f[i] != 0.0 && f[i + 1] != 0.0 && (f[i] < 0.0) != (f[i + 1] < 0.0)) {
            out.all_roots.push_back(bisect(grid[i], grid[i + 1], beta, h));
        }
    }
    std::sort(out.all_roots.begin(), out.all_roots.end());
    if (h == 0.0 && beta == 1.0) {
        out.case_id = CaseId::Case3;
        out.roots = {0.0};
    } else if (h == 0.0 && beta > 1.0) {
        out.case_id = CaseId::Case2;
        double m2 = 0.0;
        for (double r : out.all_roots) m2 = std::max(m2, r);
        if (!(m2 > 0.0)) throw IntegrityError("curieweiss: no positive root for beta > 1");
        out.roots = {-m2, m2};
    } else {
        out.case_id = CaseId::Case1;
        // The root with m h >= 0; for h = 0 (beta < 1) it is the only one.
        double best = std::numeric_limits<double>::quiet_NaN();
        for (double r : out.all_roots) {
            if (r * h >= 0.0 && (std::isnan(best) || std::abs(r) > std::abs(best))) best = r;
        }
        if (std::isnan(best)) throw IntegrityError("curieweiss: no root with m h >= 0");
        out.roots = {best};
    }
    for (double r : out.roots) {
        if (std::abs(fixed_point_gap(r, beta, h)) > 1e-13) {
            throw IntegrityError("curieweiss: fixed-point residual above 1e-13");
        }
    }
    return out;
}

double CWParams::root(Sign sign) const {
    switch (mag.case_id) {
        case CaseId::Case1:
            if (sign != Sign::None) throw DomainError("curieweiss: case 1 takes no sign");
            return mag.roots[0];
        case CaseId::Case2:
            if (sign == Sign::None) throw DomainError("curieweiss: case 2 needs sign + or -");
            return sign == Sign::Plus ? mag.roots[1] : mag.roots[0];
        case CaseId::Case3:
            break;
    }
    throw DomainError("curieweiss: beta = 1, h = 0 has a non-Gaussian limit; no Gaussian band");
}

double CWParams::sigma2(double m) const {
    const double denom = 1.0 - (1.0 - m * m) * mag.beta;
    if (!(denom > 0.0)) throw DomainError("curieweiss: 1 - (1 - m^2) beta must be positive");
    return n * (1.0 - m * m) / denom;
}

double CWParams::lambda(double m) const { return (1.0 - (1.0 - m * m) * mag.beta) / n; }

CWParams make_params(int n, double beta, double h) {
    if (n < 2) throw DomainError("curieweiss: n must be >= 2");
    if (n > kMaxN) throw ResourceError("curieweiss: n must be <= 10^6");
    return {n, solve_magnetization(beta, h)};
}

ExactDistribution exact_spin_sum_law(const CWParams& p) {
    if (p.n > kMaxN) throw ResourceError("curieweiss: n must be <= 10^6");
    const int n = p.n;
    std::vector<double> xs(n + 1);
    std::vector<double> lw(n + 1);
    const double lfn = std::lgamma(n + 1.0);
    for (int j = 0; j <= n; ++j) {
        // S = n - 2j spins sum; sum_{i<j} s_i s_j = (S^2 - n) / 2.
        const double s = n - 2.0 * j;
        xs[j] = s;
        lw[j] = lfn - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) +
                p.mag.beta * (s * s - n) / (2.0 * n) + p.mag.beta * p.mag.h * s;
    }
    std::ostringstream meta;
    meta << "curieweiss n=" << n << " beta=" << p.mag.beta << " h=" << p.mag.h;
    return ExactDistribution::from_log_weights(xs, lw, meta.str());
}

CollapsedKernel collapsed_kernel(const CWParams& p) {
    const int n = p.n;
    CollapsedKernel k;
    k.down.resize(n + 1);
    k.up.resize(n + 1);
    for (int j = 0; j <= n; ++j) {
        const double s = 2.0 * j - n;
        k.down[j] = (n + s) / (2.0 * n) * (1.0 - p_plus(p, s - 1.0));
        k.up[j] = (n - s) / (2.0 * n) * p_plus(p, s + 1.0);
    }
    return k;
}

double stationarity_residual(const CWParams& p) {
    const auto law = exact_spin_sum_law(p);
    const auto k = collapsed_kernel(p);
    const int n = p.n;
    // Support is every S = -n..n step 2, index j = (S + n) / 2.
    const auto pi = law.probabilities();
    double worst = 0.0;
    for (int j = 0; j <= n; ++j) {
        double in = pi[j] * (1.0 - k.down[j] - k.up[j]);
        if (j > 0) in += pi[j - 1] * k.up[j - 1];
        if (j < n) in += pi[j + 1] * k.down[j + 1];
        worst = std::max(worst, std::abs(in - pi[j]));
    }
    return worst;
}

GlauberKernel glauber_kernel(const CWParams& p, Sign sign, double w) {
    const double m = p.root(sign);
    const double sigma = std::sqrt(p.sigma2(m));
    const double beta = p.mag.beta;
    const double base = beta * (m + p.mag.h) + beta * sigma * w / p.n;
    const double f_plus = base - beta / p.n;
    const double f_minus = base + beta / p.n;
    GlauberKernel g;
    g.a = 1.0 / (1.0 + std::exp(2.0 * f_plus));
    g.b = 1.0 / (1.0 + std::exp(-2.0 * f_minus));
    g.lambda = p.lambda(m);
    return g;
}

ConditionalLaw conditional_standardized_law(const CWParams& p, Sign sign) {
    const double m = p.root(sign);
    const int n = p.n;
    ConditionalLaw out;
    out.m = m;
    out.sigma = std::sqrt(p.sigma2(m));
    const double lambda = p.lambda(m);
    ExactDistribution s_law = exact_spin_sum_law(p);
    if (p.mag.case_id == CaseId::Case2) {
        const auto zi = s_law.atom_index(0.0);
        out.zero_atom_mass = zi >= 0 ? s_law.probability(static_cast<std::size_t>(zi)) : 0.0;
        s_law = sign == Sign::Plus ? restrict_to(s_law, 1.0, n) : restrict_to(s_law, -n, -1.0);
    }
    const ExactDistribution w_law = standardize(s_law, n * m, out.sigma);
    const auto kernel = collapsed_kernel(p);

    struct AtomData {
        double w, mean_d, r, ab;
    };
    std::vector<AtomData> atoms;
    atoms.reserve(w_law.size());
    double c_max = 0.0;
    const double rn = std::sqrt(static_cast<double>(n));
    for (double w : w_law.support()) {
        const double s = std::round(n * m + out.sigma * w);
        const auto j = static_cast<std::size_t>((s + n) / 2);
        const double down = kernel.down[j];
        const double up = kernel.up[j];
        const double reg = 2.0 / out.sigma * (down - up);
        const double mean_d = 2.0 * (down + up) / (out.sigma * out.sigma * lambda);
        const auto g = glauber_kernel(p, sign, w);
        atoms.push_back({w, mean_d, w - reg / lambda, n * std::abs(g.a + g.b - 1.0)});
        c_max = std::max(c_max, std::abs(w) / rn);
    }

    // Largest window c_max 2^{-j/4} on which delta2 |W| <= 1/2.
    for (int step = 0; step <= 400; ++step) {
        const double c = c_max * std::exp2(-step / 4.0);
        const double half = c * rn * (1.0 + 1e-12);
        double d2 = 0.0;
        int inside = 0;
        for (const auto& a : atoms) {
            if (std::abs(a.w) > half) continue;
            ++inside;
            d2 = std::max(d2, std::abs(a.r) / (1.0 + a.w * a.w));
        }
        if (inside < 2) break;
        if (d2 * c * rn > 0.5) continue;
        out.c1 = c;
        std::vector<StateConditional> sc;
        for (const auto& a : atoms) {
            if (std::abs(a.w) > half) continue;
            sc.push_back({a.w, 1.0, a.mean_d, a.r});
            out.ab_constant = std::max(out.ab_constant, a.ab);
        }
        const auto est = conditional_regression(sc, RemainderVariant::Quadratic);
        out.budget.delta = 2.0 / out.sigma;
        out.budget.delta1 = est.delta1_hat;
        out.budget.delta2 = est.delta2_hat;
        out.budget.theta = std::max(1.0, est.theta_hat);
        out.budget.variant = RemainderVariant::Quadratic;
        out.budget.alpha = 0.5;
        out.budget.provenance = "exact: per-state heat-bath moves over |W| <= c1 sqrt(n)";
        out.budget.validate();
        out.law = restrict_to(w_law, -half, half, &out.truncated_mass);
        out.decay_rate = out.truncated_mass > 0.0 ? -std::log(out.truncated_mass) / n
                                                  : std::numeric_limits<double>::infinity();
        std::ostringstream meta;
        meta << "curieweiss W n=" << n << " sign=" << to_string(sign);
        out.law = out.law.with_meta(meta.str());
        return out;
    }
    throw DomainError("curieweiss: no truncation window satisfies delta2 c1 sqrt(n) <= 1/2");
}

ModelBandReport band_report(const CWParams& p, Sign sign, std::span<const double> grid) {
    const auto cond = conditional_standardized_law(p, sign);
    RatioTableOptions opts;
    // W is centred at n m, not at its own mean.
    opts.standardization_tolerance = std::numeric_limits<double>::infinity();
    const double rn = std::sqrt(static_cast<double>(p.n));
    ModelBandReport rep;
    rep.table = ratio_table(cond.law, rate_band_spec(1.0 / rn, "(1+x^3)/sqrt(n)"), grid, opts);
    rep.x_cap = std::pow(static_cast<double>(p.n), 1.0 / 6.0);
    auto& d = rep.diagnostics;
    d.model = "curieweiss";
    d.n = p.n;
    d.budget = cond.budget;
    d.fitted_constant = fit_constant(rep.table);
    const double fp = std::abs(fixed_point_gap(cond.m, p.mag.beta, p.mag.h));
    d.identity_residuals = {{"stationarity", stationarity_residual(p)}, {"fixed_point", fp}};
    d.pass = d.identity_residuals["stationarity"] <= 1e-10 && fp <= 1e-13 &&
             std::isfinite(d.fitted_constant);
    const auto mo = moments(cond.law);
    d.extras["beta"] = p.mag.beta;
    d.extras["h"] = p.mag.h;
    d.extras["case"] = to_string(p.mag.case_id);
    d.extras["sign"] = to_string(sign);
    d.extras["m"] = cond.m;
    d.extras["sigma2"] = cond.sigma * cond.sigma;
    d.extras["lambda"] = p.lambda(cond.m);
    d.extras["c1"] = cond.c1;
    d.extras["truncated_mass"] = cond.truncated_mass;
    d.extras["decay_rate"] = std::isfinite(cond.decay_rate) ? nlohmann::json(cond.decay_rate)
                                                            : nlohmann::json("inf");
    d.extras["zero_atom_mass"] = cond.zero_atom_mass;
    d.extras["ab_constant"] = cond.ab_constant;
    d.extras["mean"] = mo.mean;
    d.extras["variance"] = mo.variance;
    return rep;
}

std::vector<int> sample(const CWParams& p, std::uint64_t seed, std::uint64_t count,
                        std::uint64_t burnin, int workers) {
    if (p.mag.case_id == CaseId::Case3) {
        throw DomainError("curieweiss: sampler runs in cases 1 and 2 only");
    }
    const auto k = collapsed_kernel(p);
    const int n = p.n;
    return rng::run_parallel<int>(seed, workers, count, [&](rng::Stream& s, std::uint64_t m) {
        std::vector<int> out;
        out.reserve(m);
        double start = p.mag.roots[0];
        if (p.mag.case_id == CaseId::Case2 && s.uniform01() < 0.5) start = p.mag.roots[1];
        int j = std::clamp(static_cast<int>(std::lround((n * start + n) / 2.0)), 0, n);
        auto sweep = [&] {
            for (int i = 0; i < n; ++i) {
                const double u = s.uniform01();
                if (u < k.down[j]) {
                    --j;
                } else if (u < k.down[j] + k.up[j]) {
                    ++j;
                }
            }
        };
        for (std::uint64_t i = 0; i < burnin; ++i) sweep();
        for (std::uint64_t i = 0; i < m; ++i) {
            sweep();
            out.push_back(2 * j - n);
        }
        return out;
    });
}

}  // namespace mdlab::curie_weiss
