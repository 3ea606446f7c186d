#include "mdlab/antivoter.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mdlab/errors.hpp"
#include "mdlab/numeric.hpp"
#include "mdlab/rng.hpp"

namespace mdlab::antivoter {

double Chain::sigma() const { return std::sqrt(sigma2); }

double Chain::w_of(int t) const { return (2.0 * t - n) / sigma(); }

Chain transition_rates(int n) {
    if (n < 4) throw DomainError("antivoter: n must be >= 4");
    Chain c;
    c.n = n;
    c.birth.resize(n + 1);
    c.death.resize(n + 1);
    const double pairs = static_cast<double>(n) * (n - 1);
    for (int t = 0; t <= n; ++t) {
        c.birth[t] = static_cast<double>(n - t) * (n - t - 1) / pairs;
        c.death[t] = static_cast<double>(t) * (t - 1) / pairs;
    }
    c.sigma2 = (static_cast<double>(n) * n - 2.0 * n) / (2.0 * n - 3.0);
    c.lambda = 2.0 / n;
    return c;
}

namespace {

// log pi_T for T = 1..n-1 (unnormalized) via pi_{T+1} / pi_T = b_T / d_{T+1}.
std::vector<double> log_weights(const Chain& c) {
    const int n = c.n;
    std::vector<double> lw(n + 1, kNegInf);
    lw[1] = 0.0;
    for (int t = 1; t + 1 <= n - 1; ++t) {
        // b_T / d_{T+1} = (n-T)(n-T-1) / ((T+1) T)
        lw[t + 1] = lw[t] + std::log(static_cast<double>(n - t) * (n - t - 1)) -
                    std::log(static_cast<double>(t + 1) * t);
    }
    return lw;
}

}  // namespace

std::vector<double> stationary_probabilities(const Chain& c) {
    auto lw = log_weights(c);
    const double z = log_sum_exp(lw);
    std::vector<double> p(lw.size());
    for (std::size_t i = 0; i < lw.size(); ++i) p[i] = lw[i] == kNegInf ? 0.0 : std::exp(lw[i] - z);
    return p;
}

ExactDistribution stationary_law(const Chain& c) {
    const auto lw = log_weights(c);
    std::vector<double> xs;
    std::vector<double> ls;
    for (int t = 1; t <= c.n - 1; ++t) {
        xs.push_back(c.w_of(t));
        ls.push_back(lw[t]);
    }
    std::ostringstream meta;
    meta << "antivoter n=" << c.n;
    return ExactDistribution::from_log_weights(xs, ls, meta.str());
}

std::vector<PairAtom> pair_kernel(const Chain& c) {
    const auto p = stationary_probabilities(c);
    std::vector<PairAtom> k;
    for (int t = 1; t <= c.n - 1; ++t) {
        const double w = c.w_of(t);
        const double b = c.birth[t];
        const double d = c.death[t];
        if (b > 0.0) k.push_back({w, c.w_of(t + 1), p[t] * b});
        if (d > 0.0) k.push_back({w, c.w_of(t - 1), p[t] * d});
        k.push_back({w, w, p[t] * (1.0 - b - d)});
    }
    return k;
}

IdentityReport exact_pair_identities(const Chain& c) {
    const auto p = stationary_probabilities(c);
    const double sigma = c.sigma();
    const double step = 2.0 / sigma;
    IdentityReport rep;
    CompensatedSum mean_d;
    CompensatedSum second;
    for (int t = 1; t <= c.n - 1; ++t) {
        StateRow s;
        s.t = t;
        s.w = c.w_of(t);
        s.prob = p[t];
        // W - W' is +step on a death move and -step on a birth move.
        s.regression = step * (c.death[t] - c.birth[t]);
        s.mean_d = step * step * (c.death[t] + c.birth[t]) / (2.0 * c.lambda);
        const double want_reg = c.lambda * s.w;
        const double want_d = 1.0 + (s.w * s.w - 1.0) / (2.0 * (c.n - 1));
        rep.regression_residual = std::max(rep.regression_residual, std::abs(s.regression - want_reg));
        rep.d_residual = std::max(rep.d_residual, std::abs(s.mean_d - want_d));
        mean_d += s.prob * (s.mean_d - 1.0);
        second += s.prob * s.w * s.w;
        rep.states.push_back(s);
    }
    rep.mean_d_residual = std::abs(mean_d.value());
    rep.variance_residual = std::abs(second.value() - 1.0);
    const double worst = std::max({rep.regression_residual, rep.d_residual, rep.mean_d_residual});
    if (worst > 1e-9) {
        std::ostringstream os;
        os << "antivoter: pair identity residual " << worst << " exceeds 1e-9 for n = " << c.n;
        throw IntegrityError(os.str());
    }
    std::vector<StateConditional> sc;
    // Every state of the stationary support counts, including the extreme T
    // whose mass underflows in double.
    for (const auto& s : rep.states) sc.push_back({s.w, 1.0, s.mean_d, 0.0});
    const auto est = conditional_regression(sc);
    rep.budget.delta = step;
    rep.budget.delta1 = est.delta1_hat;
    rep.budget.delta2 = 0.0;
    rep.budget.theta = std::max(1.0, est.theta_hat);
    rep.budget.provenance = "exact: delta = 2/sigma, delta1 and theta from per-state E(D|T), R = 0";
    rep.budget.validate();
    return rep;
}

double range_cap(int n) { return std::pow(static_cast<double>(n), 1.0 / 6.0); }

ModelBandReport band_report(int n, std::span<const double> grid) {
    if (n > 1'000'000) throw ResourceError("antivoter: n must be <= 10^6");
    const Chain c = transition_rates(n);
    const auto ids = exact_pair_identities(c);
    const auto law = stationary_law(c);
    const double rate = 1.0 / std::sqrt(static_cast<double>(n));
    ModelBandReport rep;
    rep.table = ratio_table(law, rate_band_spec(rate, "(1+x^3)/sqrt(n)"), grid);
    rep.x_cap = range_cap(n);
    auto& d = rep.diagnostics;
    d.model = "antivoter";
    d.n = n;
    d.budget = ids.budget;
    d.fitted_constant = fit_constant(rep.table);
    d.identity_residuals = {{"regression", ids.regression_residual},
                            {"conditional_d", ids.d_residual},
                            {"mean_d", ids.mean_d_residual},
                            {"variance", ids.variance_residual},
                            {"antisymmetry", pair_antisymmetry_check(pair_kernel(c))}};
    d.pass = std::all_of(d.identity_residuals.begin(), d.identity_residuals.end(),
                         [](const auto& kv) { return kv.second <= 1e-10; }) &&
             std::isfinite(d.fitted_constant);
    d.extras["sigma2"] = c.sigma2;
    d.extras["lambda"] = c.lambda;
    try {
        d.extras["theorem_band_constant"] = fit_constant(ratio_table(law, ids.budget, grid));
    } catch (const DomainError&) {
        d.extras["theorem_band_constant"] = nullptr;  // no grid point inside the range
    }
    return rep;
}

std::vector<int> sample(const Chain& c, std::uint64_t seed, std::uint64_t count,
                        std::uint64_t burnin, int workers) {
    return rng::run_parallel<int>(seed, workers, count, [&](rng::Stream& s, std::uint64_t m) {
        std::vector<int> out;
        out.reserve(m);
        int t = c.n / 2;
        auto sweep = [&] {
            for (int i = 0; i < c.n; ++i) {
                const double u = s.uniform01();
                if (u < c.birth[t]) {
                    ++t;
                } else if (u < c.birth[t] + c.death[t]) {
                    --t;
                }
            }
        };
        for (std::uint64_t i = 0; i < burnin; ++i) sweep();
        for (std::uint64_t i = 0; i < m; ++i) {
            sweep();
            out.push_back(t);
        }
        return out;
    });
}

}  // namespace mdlab::antivoter
