#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <vector>

#include "mdlab/errors.hpp"
#include "mdlab/normal_kernel.hpp"
#include "mdlab/stein_core.hpp"

namespace {

struct NormalOracleRow {
    double w;
    double tail;
    double log_tail;
};
struct BinomialOracleRow {
    int k;
    double x;
    double log_incl;
    double log_strict;
};

#include "binomial_oracle.inc"
#include "normal_oracle.inc"

using mdlab::ExactDistribution;

ExactDistribution std_binomial(int k) {
    return mdlab::standardize(ExactDistribution::binomial(k), k / 2.0, std::sqrt(k / 4.0));
}

mdlab::SteinBudget make_budget(double d, double d1, double d2, double theta = 1.0) {
    mdlab::SteinBudget b;
    b.delta = d;
    b.delta1 = d1;
    b.delta2 = d2;
    b.theta = theta;
    return b;
}

}  // namespace

using namespace mdlab;

TEST_CASE("budget validation") {
    CHECK_THROWS_AS(make_budget(-0.1, 0, 0).validate(), DomainError);
    CHECK_THROWS_AS(make_budget(0, 0, 0, 0.5).validate(), DomainError);
    SteinBudget q = make_budget(0.1, 0, 0);
    q.variant = RemainderVariant::Quadratic;
    CHECK_THROWS_AS(q.validate(), DomainError);
    q.alpha = 1.0;
    CHECK_THROWS_AS(q.validate(), DomainError);
    q.alpha = 0.5;
    CHECK_NOTHROW(q.validate());
    CHECK(c_alpha(q) == doctest::Approx(2.0 * 3.5 / 0.5));
    CHECK(c_alpha(make_budget(0.1, 0, 0)) == 12.0);
}

TEST_CASE("band examples") {
    const auto b0 = band(make_budget(0, 0, 0), 2.0);
    CHECK(b0.lower == 1.0);
    CHECK(b0.upper == 1.0);
    CHECK(b0.in_range);
    const auto b1 = band(make_budget(0.1, 0, 0), 0.0);
    CHECK(b1.lower == doctest::Approx(0.9));
    CHECK(b1.upper == doctest::Approx(1.1));
    CHECK(b1.in_range);
    CHECK_FALSE(band(make_budget(0.1, 0, 0), 3.0).in_range);
    CHECK(band(make_budget(0.1, 0, 0), 2.15).in_range);
    CHECK_THROWS_AS(band(make_budget(0.1, 0, 0), -1.0), DomainError);
}

TEST_CASE("band widens monotonically in every parameter and in x") {
    const double base[4] = {0.01, 0.02, 0.005, 1.2};
    for (int which = 0; which < 5; ++which) {
        double prev = -1.0;
        for (int step = 0; step < 10; ++step) {
            double p[4] = {base[0], base[1], base[2], base[3]};
            double x = 1.0;
            if (which < 4) {
                p[which] *= 1.0 + 0.3 * step;
            } else {
                x = 0.3 * step;
            }
            const double h = band(make_budget(p[0], p[1], p[2], p[3]), x).upper - 1.0;
            CHECK(h > prev);
            prev = h;
        }
    }
}

TEST_CASE("zero_bias_band examples") {
    const auto z = zero_bias_band(0.0, 7.0);
    CHECK(z.lower == 1.0);
    CHECK(z.upper == 1.0);
    CHECK(z.in_range);
    CHECK(zero_bias_band(0.001, 10.0).in_range);
    CHECK_FALSE(zero_bias_band(0.008, 5.001).in_range);
    CHECK(zero_bias_band(0.008, 5.0).in_range);
}

TEST_CASE("range cap") {
    CHECK(std::isinf(range_cap(make_budget(0, 0, 0))));
    CHECK(range_cap(make_budget(0.001, 0.008, 0)) == doctest::Approx(5.0));
    CHECK(range_cap(make_budget(0.001, 0, 0, 2.0)) == doctest::Approx(5.0));
}

TEST_CASE("ratio table at an atom uses the midpoint to the next atom") {
    const auto w = std_binomial(10);
    const std::vector<double> grid{0.0};
    const auto t = ratio_table(w, make_budget(0.1, 0, 0), grid);
    REQUIRE(t.rows.size() == 1);
    const auto& r = t.rows[0];
    CHECK(r.at_atom);
    CHECK(r.log_normal_tail == doctest::Approx(std::log(0.5)).epsilon(1e-15));
    // P(W > 0) = P(S >= 6) = 386/1024; P(W >= 0) = 638/1024.
    CHECK(r.ratio == doctest::Approx((386.0 / 1024.0) / 0.5).epsilon(1e-14));
    CHECK(std::exp(r.log_tail_inclusive) == doctest::Approx(638.0 / 1024.0).epsilon(1e-14));
    CHECK(std::isfinite(r.ratio));
}

TEST_CASE("ratio table for Binomial(400) matches the rational oracle") {
    const auto w = std_binomial(400);
    std::vector<double> grid;
    for (const auto& o : kBinomialTailOracle) {
        if (o.k == 400) grid.push_back(o.x);
    }
    const auto t = ratio_table(w, rate_band_spec(1.0 / 20.0, "1/sqrt(n)"), grid);
    std::size_t i = 0;
    for (const auto& o : kBinomialTailOracle) {
        if (o.k != 400) continue;
        const auto& r = t.rows[i++];
        double lnt = 0.0;
        bool found = false;
        for (const auto& n : kNormalTailOracle) {
            if (std::abs(n.w - o.x) < 1e-15) {
                lnt = n.log_tail;
                found = true;
            }
        }
        if (!found) lnt = normal::log_normal_tail(o.x);
        const double want = std::exp(o.log_strict - lnt);
        CAPTURE(o.x);
        CHECK(r.at_atom);
        CHECK(std::abs(r.ratio - want) <= 1e-10 * want);
        if (o.x == 1.0) CHECK(std::abs(r.ratio - std::exp(o.log_strict) / kTailAt1) <= 1e-10);
    }
}

TEST_CASE("ratio table preconditions") {
    const auto w = std_binomial(10);
    CHECK_THROWS_AS(ratio_table(w, make_budget(0, 0, 0), std::vector<double>{}), DomainError);
    CHECK_THROWS_AS(ratio_table(w, make_budget(0, 0, 0), std::vector<double>{1.0, 0.5}),
                    DomainError);
    CHECK_THROWS_AS(ratio_table(w, make_budget(0, 0, 0), std::vector<double>{-1.0}), DomainError);
    CHECK_THROWS_AS(ratio_table(ExactDistribution::binomial(10), make_budget(0, 0, 0),
                                std::vector<double>{0.0}),
                    DomainError);
    const auto t = ratio_table(w, make_budget(0.01, 0, 0), uniform_grid(6.0, 13));
    for (const auto& r : t.rows) {
        CHECK(r.ratio >= 0.0);
        CHECK(r.in_range == (r.x <= std::cbrt(100.0) + 1e-12));
    }
}

TEST_CASE("fit_constant examples") {
    RatioTable ones;
    for (int i = 0; i < 5; ++i) {
        RatioRow r;
        r.x = 0.5 * i;
        r.ratio = 1.0;
        r.band_halfwidth_unit = 0.1 * (1 + i);
        ones.rows.push_back(r);
    }
    CHECK(fit_constant(ones) == 0.0);
    RatioTable single;
    RatioRow r;
    r.x = 1.0;
    r.ratio = 1.2;
    r.band_halfwidth_unit = 0.1;
    single.rows.push_back(r);
    CHECK(fit_constant(single) == doctest::Approx(2.0));
    single.rows[0].in_range = false;
    CHECK_THROWS_AS(fit_constant(single), DomainError);
}

TEST_CASE("fit_constant halves when every delta doubles") {
    const auto w = std_binomial(100);
    const auto grid = uniform_grid(1.5, 16);
    const auto t1 = ratio_table(w, make_budget(0.01, 0.02, 0.03), grid);
    const auto t2 = ratio_table(w, make_budget(0.02, 0.04, 0.06), grid);
    CHECK(fit_constant(t2) == doctest::Approx(0.5 * fit_constant(t1)).epsilon(1e-13));
}

TEST_CASE("conditional_regression on samples") {
    std::vector<PairSample> s;
    for (int i = 0; i < 100; ++i) s.push_back({0.01 * i - 0.5, 0.0, 1.0, 0.0});
    const auto e = conditional_regression(s, 5);
    CHECK(e.delta1_hat == 0.0);
    CHECK(e.delta2_hat == 0.0);
    CHECK(e.theta_hat == 1.0);
    for (auto& p : s) p.d = 2.0;
    CHECK(conditional_regression(s, 5).theta_hat == 2.0);
    CHECK_THROWS_AS(conditional_regression(std::span(s).first(49), 5), DomainError);
    CHECK_THROWS_AS(conditional_regression(s, 4), DomainError);
}

TEST_CASE("conditional_regression bins by equal counts") {
    // Bins of 20 over sorted w; each bin's mean d is known.
    std::vector<PairSample> s;
    for (int i = 99; i >= 0; --i) s.push_back({double(i), 0.0, 1.0 + (i / 20) * 0.1, 0.5});
    const auto e = conditional_regression(s, 5, RemainderVariant::Quadratic);
    CHECK(e.theta_hat == doctest::Approx(1.4));
    // bin 0: w-bar 9.5, d-bar 1.0; bin 4: w-bar 89.5, d-bar 1.4.
    CHECK(e.delta1_hat == doctest::Approx(std::max({0.1 / 30.5, 0.2 / 50.5, 0.3 / 70.5, 0.4 / 90.5})));
    CHECK(e.delta2_hat == doctest::Approx(0.5 / (1.0 + 9.5 * 9.5)));
}

TEST_CASE("check_mgf_bound") {
    std::vector<double> ts;
    for (int i = 0; i <= 40; ++i) ts.push_back(0.05 * i);
    double prev = -1.0;
    for (int k : {64, 256, 1024}) {
        const auto w = std_binomial(k);
        const auto b = zero_bias_budget(2.0 / std::sqrt(double(k)));
        const auto res = check_mgf_bound(w, b, ts);
        CHECK(res.ok);
        CHECK(std::isfinite(res.fitted_c1));
        CHECK(std::isfinite(res.raw_max));
        REQUIRE(!res.skipped.empty());
        CHECK(res.skipped.front().t == 0.0);
        if (prev >= 0.0) CHECK(res.fitted_c1 <= 2.0 * prev + 1e-300);
        prev = res.fitted_c1;
    }
    CHECK_THROWS_AS(check_mgf_bound(std_binomial(16), make_budget(0, 0, 0), ts), DomainError);
    // Admissibility: with delta = 1, t > 1/2 is skipped.
    const auto r = check_mgf_bound(std_binomial(16), make_budget(1.0, 0, 0), ts);
    for (double t : r.used) CHECK(t <= 0.5);
}

TEST_CASE("weighted Gaussian moments match closed forms") {
    for (double u : {0.0, 0.1, 0.7, 1.5, 3.0, 6.0, 10.0}) {
        const double e = std::exp(0.5 * u * u);
        const double f1 = e - 1.0;
        const double f3 = u * u * e - 2.0 * f1;
        CAPTURE(u);
        CHECK(weighted_gaussian_moment(1, u) == doctest::Approx(f1).epsilon(1e-13));
        CHECK(weighted_gaussian_moment(3, u) == doctest::Approx(f3).epsilon(1e-12));
        const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [](double s) { return s * s * std::exp(0.5 * s * s); }, 0.0, u, 15, 1e-14);
        CHECK(weighted_gaussian_moment(2, u) == doctest::Approx(q).epsilon(1e-12));
    }
}

TEST_CASE("check_tail_integral") {
    const auto b = zero_bias_budget(2.0 / 16.0);
    CHECK(check_tail_integral(std_binomial(256), 1, 0.0, b).value == 0.0);
    CHECK(check_tail_integral(std_binomial(256), 1, 0.0, b).ratio_to_tk == 0.0);
    CHECK(check_tail_integral(ExactDistribution::point_mass(0.0), 1, 1.0, b).value == 0.0);
    CHECK_THROWS_AS(check_tail_integral(std_binomial(256), 0, 1.0, b), DomainError);
    CHECK_THROWS_AS(check_tail_integral(std_binomial(256), 1, 2.5, b), DomainError);

    const auto w = std_binomial(256);
    for (int k : {1, 2, 3}) {
        const auto res = check_tail_integral(w, k, 2.0, b);
        // Oracle: Gauss-Kronrod on a subdivision 10x finer than the atoms.
        std::vector<double> breaks{0.0};
        for (double x : w.support()) {
            if (x > 0.0 && x < 2.0) breaks.push_back(x);
        }
        breaks.push_back(2.0);
        double q = 0.0;
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
            const double a = breaks[i];
            const double c = breaks[i + 1];
            const double tail = std::exp(w.log_upper_tail(0.5 * (a + c)));
            for (int j = 0; j < 10; ++j) {
                const double lo = a + (c - a) * j / 10.0;
                const double hi = a + (c - a) * (j + 1) / 10.0;
                q += tail * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                                [k](double u) { return std::pow(u, k) * std::exp(0.5 * u * u); },
                                lo, hi, 5, 1e-15);
            }
        }
        CAPTURE(k);
        CHECK(std::abs(res.value - q) <= 1e-8 * q);
        CHECK(std::isfinite(res.ratio_to_tk));
        CHECK(res.ratio_to_tk == doctest::Approx(res.value / std::pow(2.0, k)));
    }
}

TEST_CASE("pair antisymmetry") {
    const std::vector<PairAtom> sym{{-1.0, 1.0, 0.25}, {1.0, -1.0, 0.25}, {1.0, 1.0, 0.5}};
    CHECK(pair_antisymmetry_check(sym) == 0.0);
    for (auto f : {AntisymmetricFunction::Difference, AntisymmetricFunction::CubedDifference,
                   AntisymmetricFunction::SineDifference}) {
        CHECK(pair_antisymmetry_check(sym, f) == 0.0);
    }
    auto bad = sym;
    bad[0].prob = 0.3;
    bad[2].prob = 0.45;
    CHECK_THROWS_AS(pair_antisymmetry_check(bad), DomainError);
    try {
        pair_antisymmetry_check(bad);
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("(w, w')") != std::string::npos);
    }
}
