#include "mdlab/combinatorial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "mdlab/errors.hpp"
#include "mdlab/numeric.hpp"
#include "mdlab/rng.hpp"

namespace mdlab::combinatorial {

CombArray validate_and_sigma(const std::vector<std::vector<double>>& a) {
    const int n = static_cast<int>(a.size());
    if (n < 2) throw DomainError("combinatorial: array must be n x n with n >= 2");
    CombArray arr;
    arr.n = n;
    arr.a.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(a[i].size()) != n) {
            std::ostringstream os;
            os << "combinatorial: row " << i << " has " << a[i].size() << " entries, expected " << n;
            throw DomainError(os.str());
        }
        for (double v : a[i]) {
            if (!std::isfinite(v)) throw DomainError("combinatorial: entries must be finite");
            arr.a.push_back(v);
            arr.c0 = std::max(arr.c0, std::abs(v));
        }
    }
    const double tol = 1e-10 * std::max(1.0, arr.c0);
    for (int i = 0; i < n; ++i) {
        CompensatedSum row, col;
        for (int j = 0; j < n; ++j) {
            row += arr.at(i, j);
            col += arr.at(j, i);
        }
        if (std::abs(row.value()) > tol) {
            std::ostringstream os;
            os << "combinatorial: row " << i << " sums to " << row.value() << ", expected 0";
            throw DomainError(os.str());
        }
        if (std::abs(col.value()) > tol) {
            std::ostringstream os;
            os << "combinatorial: column " << i << " sums to " << col.value() << ", expected 0";
            throw DomainError(os.str());
        }
    }
    CompensatedSum sq;
    for (double v : arr.a) sq += v * v;
    const double s2 = sq.value() / (n - 1);
    if (!(s2 > 0.0)) throw DomainError("combinatorial: degenerate array (sigma = 0)");
    arr.sigma = std::sqrt(s2);
    return arr;
}

ExactDistribution raw_law(const CombArray& arr) {
    if (arr.n > 9) {
        throw ResourceError("combinatorial: exact enumeration needs n <= 9; use the sampler");
    }
    std::vector<int> perm(arr.n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<double> values;
    do {
        double s = 0.0;
        for (int i = 0; i < arr.n; ++i) s += arr.at(i, perm[i]);
        values.push_back(s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const std::vector<double> w(values.size(), 0.0);
    return ExactDistribution::from_log_weights(values, w, "combinatorial raw");
}

ExactDistribution exact_law(const CombArray& arr) {
    std::ostringstream meta;
    meta << "combinatorial n=" << arr.n;
    return standardize(raw_law(arr), 0.0, arr.sigma).with_meta(meta.str());
}

std::vector<double> sample(const CombArray& arr, std::uint64_t seed, std::uint64_t count,
                           int workers) {
    return rng::run_parallel<double>(seed, workers, count, [&](rng::Stream& s, std::uint64_t m) {
        std::vector<double> out;
        out.reserve(m);
        std::vector<int> perm(arr.n);
        for (std::uint64_t k = 0; k < m; ++k) {
            std::iota(perm.begin(), perm.end(), 0);
            for (int i = arr.n - 1; i > 0; --i) {
                const auto j = static_cast<int>(s.below(static_cast<std::uint64_t>(i) + 1));
                std::swap(perm[i], perm[j]);
            }
            double v = 0.0;
            for (int i = 0; i < arr.n; ++i) v += arr.at(i, perm[i]);
            out.push_back(v / arr.sigma);
        }
        return out;
    });
}

SteinBudget budget(const CombArray& arr) {
    return zero_bias_budget(8.0 * arr.c0 / arr.sigma, "zero-bias coupling bound |W* - W| <= 8 c0 / sigma");
}

ModelBandReport band_report(const CombArray& arr, std::span<const double> grid) {
    const auto law = exact_law(arr);
    const auto b = budget(arr);
    ModelBandReport rep;
    rep.table = ratio_table(law, b, grid);
    rep.x_cap = range_cap(b);
    auto& d = rep.diagnostics;
    d.model = "combinatorial";
    d.n = arr.n;
    d.budget = b;
    d.fitted_constant = fit_constant(rep.table);
    const auto m = moments(law);
    d.identity_residuals = {{"mean", std::abs(m.mean)}, {"variance", std::abs(m.variance - 1.0)}};
    d.pass = d.identity_residuals["mean"] <= 1e-12 && d.identity_residuals["variance"] <= 1e-10 &&
             std::isfinite(d.fitted_constant);
    d.extras["c0"] = arr.c0;
    d.extras["sigma"] = arr.sigma;
    return rep;
}

CombArray random_array(int n, std::uint64_t seed) {
    rng::Stream s(rng::stream_seed(seed, 0));
    std::vector<std::vector<double>> a(n, std::vector<double>(n));
    for (auto& row : a) {
        for (double& v : row) v = 2.0 * s.uniform01() - 1.0;
    }
    for (auto& row : a) {
        const double m = std::accumulate(row.begin(), row.end(), 0.0) / n;
        for (double& v : row) v -= m;
    }
    for (int j = 0; j < n; ++j) {
        double m = 0.0;
        for (int i = 0; i < n; ++i) m += a[i][j];
        m /= n;
        for (int i = 0; i < n; ++i) a[i][j] -= m;
    }
    return validate_and_sigma(a);
}

CombArray product_array(int n) {
    std::vector<std::vector<double>> a(n, std::vector<double>(n));
    const double c = (n - 1) / 2.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) a[i][j] = (i - c) * (j - c);
    }
    return validate_and_sigma(a);
}

std::vector<std::vector<double>> read_array_csv(std::istream& in) {
    std::vector<std::vector<double>> a;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                std::ostringstream os;
                os << "combinatorial CSV: bad number '" << cell << "' on line " << lineno;
                throw DomainError(os.str());
            }
        }
        a.push_back(std::move(row));
    }
    return a;
}

}  // namespace mdlab::combinatorial
