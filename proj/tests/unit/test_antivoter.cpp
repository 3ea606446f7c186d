#include <doctest.h>

#include <cmath>
#include <vector>

#include "mdlab/antivoter.hpp"
#include "mdlab/errors.hpp"

using namespace mdlab;
using namespace mdlab::antivoter;

namespace {

// Power iteration on the full (n+1)-state kernel from the uniform start.
std::vector<double> power_iteration(const Chain& c) {
    const int n = c.n;
    std::vector<double> p(n + 1, 1.0 / (n + 1));
    std::vector<double> q(n + 1);
    for (int it = 0; it < 2'000'000; ++it) {
        std::fill(q.begin(), q.end(), 0.0);
        for (int t = 0; t <= n; ++t) {
            const double b = c.birth[t];
            const double d = c.death[t];
            if (t < n) q[t + 1] += p[t] * b;
            if (t > 0) q[t - 1] += p[t] * d;
            q[t] += p[t] * (1.0 - b - d);
        }
        double diff = 0.0;
        for (int t = 0; t <= n; ++t) diff = std::max(diff, std::abs(q[t] - p[t]));
        p.swap(q);
        if (diff < 1e-17) break;
    }
    return p;
}

}  // namespace

TEST_CASE("transition rates") {
    CHECK_THROWS_AS(transition_rates(3), DomainError);
    const auto c = transition_rates(4);
    CHECK(c.birth[2] == doctest::Approx(1.0 / 6.0));
    CHECK(c.death[2] == doctest::Approx(1.0 / 6.0));
    for (int n : {4, 9, 100}) {
        const auto ch = transition_rates(n);
        CHECK(ch.death[n] == 1.0);
        CHECK(ch.birth[n] == 0.0);
        CHECK(ch.death[0] == 0.0);
        CHECK(ch.birth[0] == 1.0);
        CHECK(ch.sigma2 > 0.0);
        for (int t = 0; t <= n; ++t) {
            CHECK(ch.birth[t] + ch.death[t] <= 1.0 + 1e-15);
            CHECK(ch.birth[t] == ch.death[n - t]);
        }
    }
}

TEST_CASE("collapsed rates agree with the spin-level dynamics") {
    for (int n = 4; n <= 10; ++n) {
        const auto c = transition_rates(n);
        std::vector<double> up(n + 1, 0.0), down(n + 1, 0.0), cnt(n + 1, 0.0);
        for (unsigned x = 0; x < (1u << n); ++x) {
            const int t = __builtin_popcount(x);
            cnt[t] += 1.0;
            double u = 0, d = 0;
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    if (i == j) continue;
                    const int xi = (x >> i) & 1u ? 1 : -1;
                    const int xj = (x >> j) & 1u ? 1 : -1;
                    const int nxi = -xj;
                    if (nxi > xi) u += 1;
                    if (nxi < xi) d += 1;
                }
            }
            up[t] += u / (n * (n - 1.0));
            down[t] += d / (n * (n - 1.0));
        }
        for (int t = 0; t <= n; ++t) {
            CHECK(up[t] / cnt[t] == doctest::Approx(c.birth[t]).epsilon(1e-14));
            CHECK(down[t] / cnt[t] == doctest::Approx(c.death[t]).epsilon(1e-14));
        }
    }
}

TEST_CASE("stationary law") {
    for (int n : {4, 10, 51, 1000}) {
        const auto c = transition_rates(n);
        const auto p = stationary_probabilities(c);
        CHECK(p[0] == 0.0);
        CHECK(p[n] == 0.0);
        for (int t = 0; t <= n; ++t) CHECK(std::abs(p[t] - p[n - t]) <= 1e-14);
        // pi P = pi
        double worst = 0.0;
        for (int t = 0; t <= n; ++t) {
            double in = p[t] * (1.0 - c.birth[t] - c.death[t]);
            if (t > 0) in += p[t - 1] * c.birth[t - 1];
            if (t < n) in += p[t + 1] * c.death[t + 1];
            worst = std::max(worst, std::abs(in - p[t]));
        }
        CHECK(worst <= 1e-12);
        const auto m = moments(stationary_law(c));
        CHECK(std::abs(m.mean) <= 1e-12);
        CHECK(std::abs(m.variance - 1.0) <= 1e-10);
    }
    // Var U for n = 10.
    const auto c10 = transition_rates(10);
    CHECK(c10.sigma2 == doctest::Approx(80.0 / 17.0).epsilon(1e-15));
    const auto p = stationary_probabilities(c10);
    double v = 0.0;
    for (int t = 0; t <= 10; ++t) v += p[t] * (2.0 * t - 10) * (2.0 * t - 10);
    CHECK(std::abs(v - 80.0 / 17.0) <= 1e-10);
}

TEST_CASE("power iteration oracle") {
    for (int n : {10, 50}) {
        const auto c = transition_rates(n);
        const auto p = stationary_probabilities(c);
        const auto q = power_iteration(c);
        double tv = 0.0;
        for (int t = 0; t <= n; ++t) tv += 0.5 * std::abs(p[t] - q[t]);
        CAPTURE(n);
        CHECK(tv <= 1e-10);
    }
}

TEST_CASE("exact pair identities") {
    double prev_delta1 = 1.0;
    for (int n : {10, 100, 1000}) {
        const auto c = transition_rates(n);
        const auto rep = exact_pair_identities(c);
        CAPTURE(n);
        CHECK(rep.regression_residual <= 1e-12);
        CHECK(rep.d_residual <= 1e-12);
        CHECK(rep.mean_d_residual <= 1e-12);
        CHECK(rep.budget.delta == doctest::Approx(2.0 / std::sqrt(c.sigma2)));
        CHECK(rep.budget.delta2 == 0.0);
        CHECK(rep.budget.theta >= 1.0);
        // delta1 closed form over the stationary support.
        double closed = 0.0;
        for (int t = 1; t < n; ++t) {
            const double w = c.w_of(t);
            closed = std::max(closed, std::abs(w * w - 1.0) / (2.0 * (n - 1) * (1.0 + std::abs(w))));
        }
        CHECK(std::abs(rep.budget.delta1 - closed) <= 1e-12);
        CHECK(rep.budget.delta1 <= (1.0 + std::sqrt(2.0 * n)) / (2.0 * (n - 1)));
        CHECK(rep.budget.delta1 < prev_delta1);
        prev_delta1 = rep.budget.delta1;
        CHECK(pair_antisymmetry_check(pair_kernel(c)) <= 1e-10);
    }
    const auto c = transition_rates(10);
    const auto rep = exact_pair_identities(c);
    for (const auto& s : rep.states) {
        if (s.t == 5) CHECK(s.mean_d - 1.0 == doctest::Approx(-1.0 / 18.0).epsilon(1e-13));
        if (std::abs(std::abs(s.w) - 1.0) < 1e-15) CHECK(std::abs(s.mean_d - 1.0) <= 1e-15);
    }
}

TEST_CASE("band report") {
    const int n = 1000;
    const auto grid = uniform_grid(4.0, 41);
    const auto rep = band_report(n, grid);
    CHECK(rep.x_cap == doctest::Approx(std::pow(1000.0, 1.0 / 6.0)));
    CHECK(std::isfinite(rep.diagnostics.fitted_constant));
    CHECK(rep.diagnostics.fitted_constant > 0.0);
    for (const auto& r : rep.table.rows) CHECK(r.in_range == (r.x <= rep.x_cap + 1e-12));
    const auto& r0 = rep.table.rows.front();
    CHECK(r0.at_atom);
    const auto law = stationary_law(transition_rates(n));
    CHECK(r0.ratio == doctest::Approx(std::exp(law.log_strict_upper_tail(0.0)) / 0.5).epsilon(1e-13));
    CHECK(rep.diagnostics.pass);
}

TEST_CASE("sampler is reproducible and close to the exact law") {
    const auto c = transition_rates(50);
    const auto a = sample(c, 42, 20000, 10, 1);
    const auto b = sample(c, 42, 20000, 10, 1);
    CHECK(a == b);
    CHECK(sample(c, 42, 0, 10, 1).empty());
    const auto two = sample(c, 42, 20001, 10, 2);
    CHECK(two.size() == 20001);
    CHECK(two == sample(c, 42, 20001, 10, 2));
    std::vector<double> counts(51, 0.0);
    for (int t : a) counts[t] += 1.0;
    const auto p = stationary_probabilities(c);
    double tv = 0.0;
    for (int t = 0; t <= 50; ++t) tv += 0.5 * std::abs(counts[t] / a.size() - p[t]);
    CHECK(tv <= 0.05);
}
