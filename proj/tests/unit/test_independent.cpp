#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "mdlab/errors.hpp"
#include "mdlab/independent.hpp"
#include "mdlab/normal_kernel.hpp"

using namespace mdlab;
using namespace mdlab::independent;

namespace {

struct BinomialOracleRow {
    int k;
    double x;
    double log_incl;
    double log_strict;
};

#include "binomial_oracle.inc"

}  // namespace

TEST_CASE("component validation") {
    const std::vector<double> pm{-1.0, 1.0};
    CHECK_NOTHROW(make_components({ExactDistribution::uniform(pm)}));
    const std::vector<double> off{0.0, 2.0};
    CHECK_THROWS_AS(make_components({ExactDistribution::uniform(off)}), DomainError);
    CHECK_THROWS_AS(make_components({ExactDistribution::uniform(pm), ExactDistribution::uniform(pm)}),
                    DomainError);
    CHECK_THROWS_AS(make_components({}), DomainError);
    CHECK(rademacher(50).sum_variance == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("gamma") {
    for (int n : {1, 16, 400}) {
        const auto c = rademacher(n);
        const double rn = std::sqrt(static_cast<double>(n));
        CHECK(gamma(c, 0.0) == doctest::Approx(1.0 / rn).epsilon(1e-13));
        for (double x : {0.5, 1.0, 3.0}) {
            CHECK(gamma(c, x) == doctest::Approx(std::exp(x / rn) / rn).epsilon(1e-13));
        }
        double prev = 0.0;
        for (int i = 0; i <= 40; ++i) {
            const double g = gamma(c, 0.1 * i);
            CHECK(g >= prev);
            prev = g;
        }
    }
    CHECK(gamma(rademacher(1), 2.0) == doctest::Approx(std::exp(2.0)));
    CHECK_THROWS_AS(gamma(rademacher(1), -1.0), DomainError);
}

TEST_CASE("repeated squaring matches naive convolution") {
    const std::vector<double> pts{-2.0, 0.0, 1.0};
    const std::vector<double> w{0.2, 0.4, 0.4};
    // Mean -0.4 + 0.4 = 0, variance 0.8 + 0.4 = 1.2; scaled per n below.
    for (int n : {1, 2, 3, 7, 16, 33, 64}) {
        const double s = std::sqrt(1.2 * n);
        std::vector<double> sp;
        for (double p : pts) sp.push_back(p / s);
        const auto one = ExactDistribution::from_weights(sp, w);
        const auto c = make_components(std::vector<ExactDistribution>(n, one));
        const auto fast = sum_law(c);
        auto naive = one;
        for (int i = 1; i < n; ++i) naive = convolve(naive, one);
        REQUIRE(fast.size() == naive.size());
        CHECK(total_variation(fast, naive) <= 1e-12);
    }
}

TEST_CASE("non-identical components use the convolution tree") {
    std::vector<ExactDistribution> comps;
    const double s = std::sqrt(3.0);
    comps.push_back(ExactDistribution::uniform(std::vector<double>{-1.0 / s, 1.0 / s}));
    comps.push_back(ExactDistribution::uniform(std::vector<double>{-1.0 / s, 1.0 / s}));
    comps.push_back(ExactDistribution::uniform(std::vector<double>{-std::sqrt(0.5) / s, std::sqrt(0.5) / s}));
    comps.push_back(ExactDistribution::uniform(std::vector<double>{-std::sqrt(0.5) / s, std::sqrt(0.5) / s}));
    const auto c = make_components(comps);
    const auto law = sum_law(c);
    const auto m = moments(law);
    CHECK(std::abs(m.mean) <= 1e-14);
    CHECK(m.variance == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(law.size() == 9);
    CHECK_THROWS_AS(sum_law(c, 3), ResourceError);
}

TEST_CASE("Rademacher band against the exact binomial tail") {
    // The frozen oracle holds P(S >= s) for Binomial(400, 1/2) in exact rationals.
    const int n = 400;
    const auto grid = uniform_grid(3.0, 31);
    const auto rep = band_report(rademacher(n), grid, BandKind::Rate);
    int checked = 0;
    for (const auto& r : rep.table.rows) {
        for (const auto& o : kBinomialTailOracle) {
            if (o.k != n || std::abs(o.x - r.x) > 1e-12) continue;
            CHECK(std::abs(r.log_tail_inclusive - o.log_incl) <= 1e-10);
            const double want = r.at_atom ? o.log_strict : o.log_incl;
            CHECK(std::abs(r.log_tail - want) <= 1e-10);
            ++checked;
        }
    }
    CHECK(checked >= 3);
    CHECK(rep.x_cap == doctest::Approx(std::pow(400.0, 1.0 / 6.0)));
    CHECK(rep.diagnostics.pass);
}

TEST_CASE("fitted constants are stable along n") {
    const auto grid = uniform_grid(3.0, 61);
    std::vector<double> c;
    for (int n : {100, 400, 1600}) {
        const auto rep = band_report(rademacher(n), grid, BandKind::Rate);
        c.push_back(rep.diagnostics.fitted_constant);
        CHECK(max_ratio_deviation(rep.table, 1.0) <= 5.0 / std::sqrt(static_cast<double>(n)));
    }
    CHECK(c[1] <= 2.0 * c[0]);
    CHECK(c[2] <= 2.0 * c[1]);
}

TEST_CASE("gamma band and low-information rows") {
    const auto grid = uniform_grid(4.0, 41);
    const auto c = rademacher(100);
    const auto rep = band_report(c, grid, BandKind::Gamma);
    double prev = 0.0;
    for (const auto& r : rep.table.rows) {
        CHECK(r.in_range);
        CHECK(r.band_halfwidth_unit >= prev);
        prev = r.band_halfwidth_unit;
        const double g = gamma(c, r.x);
        CHECK(r.low_information == (4.0 * r.x * r.x * r.x * g >= 10.0));
        if (r.low_information) CHECK(r.band_halfwidth_unit >= 10.0 * (1.0 + r.x * r.x * r.x) * g);
    }
    CHECK(rep.table.rows.back().low_information);
    CHECK_FALSE(rep.table.rows.front().low_information);
}

TEST_CASE("single symmetric component") {
    const auto c = make_components({ExactDistribution::uniform(std::vector<double>{-1.0, 1.0})});
    const std::vector<double> grid{0.0, 1.0};
    const auto rep = band_report(c, grid, BandKind::Gamma);
    const auto& r = rep.table.rows[1];
    CHECK(r.at_atom);
    const double inclusive = std::exp(r.log_tail_inclusive) / normal::normal_tail(1.0);
    CHECK(inclusive == doctest::Approx(0.5 / 0.15865525393145705).epsilon(1e-13));
    CHECK(r.log_tail == -std::numeric_limits<double>::infinity());
}

TEST_CASE("truncation") {
    const std::vector<double> pm{-1.0, 1.0};
    std::vector<ExactDistribution> raw(8, ExactDistribution::uniform(pm));
    auto id = truncate_and_standardize(raw, 0.5);
    CHECK(id.threshold == doctest::Approx(4.0));
    CHECK(id.truncated.empty());
    CHECK(id.mean_shift == 0.0);
    CHECK(id.bn_ratio_error <= 1e-15);
    CHECK(id.result.sum_variance == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(id.result.components[0].support()[1] == doctest::Approx(1.0 / std::sqrt(8.0)));

    // Heavy atom at 2 n^{2/3} = 8 with mass 1e-6, balanced to mean zero.
    const double p = 1e-6;
    const std::vector<double> xs{-1.0, 1.0, 8.0};
    const double a = (1.0 - 9.0 * p) / 2.0;
    const std::vector<double> w{1.0 - a - p, a, p};
    auto heavy = ExactDistribution::from_weights(xs, w);
    const double hm = moments(heavy).mean;
    heavy = affine(heavy, -hm, 1.0);
    raw[3] = heavy;
    const auto rep = truncate_and_standardize(raw, 0.5);
    REQUIRE(rep.truncated.size() == 1);
    CHECK(rep.truncated[0].component == 3);
    CHECK(rep.truncated[0].mass == doctest::Approx(p).epsilon(1e-9));
    CHECK(rep.means[3] == doctest::Approx(-rep.truncated[0].x * p).epsilon(1e-6));
    CHECK(rep.result.sum_variance == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(rep.bn_ratio_error > 0.0);
    CHECK_THROWS_AS(truncate_and_standardize(raw, 2.0), DomainError);
    const std::vector<double> shifted{0.0, 2.0};
    CHECK_THROWS_AS(truncate_and_standardize({ExactDistribution::uniform(shifted)}, 0.1), DomainError);
}
