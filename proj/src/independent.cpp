#include "mdlab/independent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mdlab/errors.hpp"
#include "mdlab/numeric.hpp"

namespace mdlab::independent {

namespace {

bool same_law(const ExactDistribution& a, const ExactDistribution& b) {
    return std::ranges::equal(a.support(), b.support()) && std::ranges::equal(a.logp(), b.logp());
}

}  // namespace

ComponentList make_components(std::vector<ExactDistribution> components) {
    if (components.empty()) throw DomainError("independent: need at least one component");
    CompensatedSum var;
    for (std::size_t i = 0; i < components.size(); ++i) {
        const auto m = moments(components[i]);
        if (std::abs(m.mean) > 1e-12) {
            std::ostringstream os;
            os << "independent: component " << i << " has mean " << m.mean << ", expected 0";
            throw DomainError(os.str());
        }
        var += m.variance;
    }
    if (std::abs(var.value() - 1.0) > 1e-10) {
        std::ostringstream os;
        os << "independent: variances sum to " << var.value() << ", expected 1";
        throw DomainError(os.str());
    }
    return {std::move(components), var.value()};
}

ComponentList rademacher(int n) {
    if (n < 1) throw DomainError("independent: n must be >= 1");
    const double a = 1.0 / std::sqrt(static_cast<double>(n));
    const std::vector<double> pts{-a, a};
    std::vector<ExactDistribution> comps(static_cast<std::size_t>(n), ExactDistribution::uniform(pts));
    return make_components(std::move(comps));
}

double gamma(const ComponentList& c, double x) {
    if (!(x >= 0.0)) throw DomainError("independent: gamma needs x >= 0");
    CompensatedSum g;
    for (const auto& d : c.components) {
        for (std::size_t i = 0; i < d.size(); ++i) {
            const double a = std::abs(d.support()[i]);
            g += a * a * a * std::exp(x * a + d.logp()[i]);
        }
    }
    return g.value();
}

ExactDistribution sum_law(const ComponentList& c, std::size_t cap) {
    const auto& comps = c.components;
    if (comps.empty()) throw DomainError("independent: no components");
    const bool iid = std::all_of(comps.begin(), comps.end(),
                                 [&](const ExactDistribution& d) { return same_law(d, comps[0]); });
    if (iid) return convolution_power(comps[0], comps.size(), cap);
    std::vector<ExactDistribution> level = comps;
    while (level.size() > 1) {
        std::vector<ExactDistribution> next;
        next.reserve((level.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < level.size(); i += 2) next.push_back(convolve(level[i], level[i + 1], cap));
        if (level.size() % 2 == 1) next.push_back(level.back());
        level = std::move(next);
    }
    return level[0];
}

const char* to_string(BandKind b) { return b == BandKind::Gamma ? "gamma" : "rate"; }

BandKind parse_band(const std::string& s) {
    if (s == "gamma") return BandKind::Gamma;
    if (s == "rate") return BandKind::Rate;
    throw DomainError("independent: unknown band '" + s + "'");
}

ModelBandReport band_report(const ComponentList& c, std::span<const double> grid, BandKind kind,
                            std::size_t cap) {
    const auto law = sum_law(c, cap).with_meta("independent sum");
    const double n = static_cast<double>(c.components.size());
    BandSpec spec;
    if (kind == BandKind::Gamma) {
        spec.description = "(1+x^3) gamma e^{4 x^3 gamma}";
        spec.halfwidth = [&c](double x) {
            const double g = gamma(c, x);
            return (1.0 + x * x * x) * g * std::exp(4.0 * x * x * x * g);
        };
        spec.in_range = [](double) { return true; };
        spec.low_information = [&c](double x) { return 4.0 * x * x * x * gamma(c, x) >= 10.0; };
        spec.x_cap = std::numeric_limits<double>::infinity();
    } else {
        spec = rate_band_spec(1.0 / std::sqrt(n), "(1+x^3)/sqrt(n)");
    }
    ModelBandReport rep;
    rep.table = ratio_table(law, spec, grid);
    rep.x_cap = spec.x_cap;
    auto& d = rep.diagnostics;
    d.model = "independent";
    d.n = n;
    d.fitted_constant = fit_constant(rep.table);
    const double g0 = gamma(c, 0.0);
    // Zero-bias coupling of an independent sum moves one summand: |W* - W| <= 2 max|xi|.
    double amax = 0.0;
    for (const auto& comp : c.components) {
        amax = std::max({amax, std::abs(comp.support().front()), std::abs(comp.support().back())});
    }
    d.budget = zero_bias_budget(2.0 * amax, "independent: delta = 2 max |xi_i|");
    const auto m = moments(law);
    d.identity_residuals = {{"mean", std::abs(m.mean)}, {"variance", std::abs(m.variance - 1.0)}};
    d.pass = std::abs(m.mean) <= 1e-10 && std::abs(m.variance - 1.0) <= 1e-10 &&
             std::isfinite(d.fitted_constant);
    d.extras["band"] = to_string(kind);
    d.extras["gamma0"] = g0;
    d.extras["atoms"] = law.size();
    int low = 0;
    for (const auto& r : rep.table.rows) low += r.low_information ? 1 : 0;
    d.extras["low_information_rows"] = low;
    return rep;
}

TruncationReport truncate_and_standardize(const std::vector<ExactDistribution>& raw, double c1) {
    if (raw.empty()) throw DomainError("independent: need at least one component");
    const double n = static_cast<double>(raw.size());
    TruncationReport rep;
    rep.threshold = std::pow(n, 2.0 / 3.0);
    CompensatedSum bn2;
    CompensatedSum bbar2;
    std::vector<ExactDistribution> cut;
    cut.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto m = moments(raw[i]);
        if (std::abs(m.mean) > 1e-12 * std::max(1.0, std::sqrt(m.variance))) {
            std::ostringstream os;
            os << "independent: raw component " << i << " has mean " << m.mean << ", expected 0";
            throw DomainError(os.str());
        }
        bn2 += m.variance;
        std::vector<double> xs(raw[i].support().begin(), raw[i].support().end());
        std::vector<double> lw(raw[i].logp().begin(), raw[i].logp().end());
        for (std::size_t j = 0; j < xs.size(); ++j) {
            if (std::abs(xs[j]) > rep.threshold) {
                const double mass = std::exp(lw[j]);
                rep.truncated.push_back({i, xs[j], mass});
                rep.truncated_mass += mass;
                xs[j] = 0.0;
            }
        }
        auto bar = ExactDistribution::from_log_weights(xs, lw, raw[i].meta());
        const auto mb = moments(bar);
        rep.means.push_back(mb.mean);
        rep.mean_shift += std::abs(mb.mean);
        bbar2 += mb.variance;
        cut.push_back(std::move(bar));
    }
    if (bn2.value() < c1 * c1 * n) {
        std::ostringstream os;
        os << "independent: B_n^2 = " << bn2.value() << " is below c1^2 n = " << c1 * c1 * n;
        throw DomainError(os.str());
    }
    const double bbar = std::sqrt(bbar2.value());
    if (!(bbar > 0.0)) throw DomainError("independent: truncated components are degenerate");
    rep.bn_ratio_error = std::abs(bbar / std::sqrt(bn2.value()) - 1.0);
    std::vector<ExactDistribution> xi;
    xi.reserve(cut.size());
    for (std::size_t i = 0; i < cut.size(); ++i) {
        auto s = standardize(cut[i], rep.means[i], bbar);
        // Recentre exactly: the affine image can leave a rounding-level mean.
        const double residual = moments(s).mean;
        xi.push_back(residual == 0.0 ? std::move(s) : affine(s, -residual, 1.0));
    }
    rep.result = make_components(std::move(xi));
    return rep;
}

}  // namespace mdlab::independent
