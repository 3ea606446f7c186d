#include "mdlab/binary_code.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "mdlab/errors.hpp"

namespace mdlab::binary_code {

namespace {

__extension__ typedef unsigned __int128 u128;

constexpr int kMaxK = 62;
constexpr std::uint64_t kEnumerationLimit = std::uint64_t{1} << 18;
constexpr std::uint64_t kEnumerationCap = std::uint64_t{1} << 22;
constexpr int kMaxTreeDepth = 22;

using BinomRow = std::array<std::uint64_t, kMaxK + 1>;

const std::array<BinomRow, kMaxK + 1>& binomials() {
    static const auto table = [] {
        std::array<BinomRow, kMaxK + 1> c{};
        for (int i = 0; i <= kMaxK; ++i) {
            c[i][0] = 1;
            for (int j = 1; j <= i; ++j) c[i][j] = c[i - 1][j - 1] + (j <= i - 1 ? c[i - 1][j] : 0);
        }
        return c;
    }();
    return table;
}

std::uint64_t choose(int n, int r) {
    if (r < 0 || r > n) return 0;
    return binomials()[n][r];
}

void check_n(std::uint64_t n) {
    if (n < 1) throw DomainError("binarycode: n must be >= 1");
    if (bit_length(n) > kMaxK) throw DomainError("binarycode: n must be below 2^62");
}

// #{y in [0, m] : popcount(y) = r}, m < 2^len.
std::uint64_t count_le(std::uint64_t m, int len, int r) {
    std::uint64_t total = 0;
    int ones = 0;
    for (int b = len - 1; b >= 0; --b) {
        if ((m >> b) & 1u) {
            total += choose(b, r - ones);
            ++ones;
        }
    }
    if (ones == r) ++total;
    return total;
}

ExactDistribution law_from_counts(const std::vector<std::uint64_t>& counts, std::uint64_t n,
                                  const std::string& meta) {
    std::vector<double> xs;
    std::vector<double> lw;
    const double lz = std::log(static_cast<double>(n) + 1.0);
    for (std::size_t s = 0; s < counts.size(); ++s) {
        if (counts[s] == 0) continue;
        xs.push_back(static_cast<double>(s));
        lw.push_back(std::log(static_cast<double>(counts[s])) - lz);
    }
    return ExactDistribution::from_log_weights(xs, lw, meta);
}

double w_of(int s, int k) { return (s - 0.5 * k) / std::sqrt(0.25 * k); }

struct Grouped {
    std::vector<std::uint64_t> count;
    std::vector<long double> qsum;
    std::vector<long double> up;    // unblocked 0 -> 1 moves
    std::vector<long double> down;  // 1 -> 0 moves
    std::vector<long double> lazy;  // blocked moves
};

Grouped group_by_dp(std::uint64_t n, int k) {
    Grouped g;
    g.count.assign(k + 1, 0);
    std::vector<u128> qsum(k + 1, 0);
    int ones = 0;
    for (int p = 1; p <= k; ++p) {
        const int bit = k - p;
        if (!((n >> bit) & 1u)) continue;
        // x agrees with n before p and has 0 where n has 1 at p.
        const int zeros = (p - 1) - ones;
        const int len = bit;
        const std::uint64_t tail = len == 0 ? 0 : (n & ((std::uint64_t{1} << len) - 1));
        for (int r = 0; r <= len; ++r) {
            const std::uint64_t c = choose(len, r);
            const int s = ones + r;
            g.count[s] += c;
            // Prefix zeros of n are always blocked; position p is blocked
            // when the free suffix exceeds the suffix of n.
            qsum[s] += static_cast<u128>(zeros) * c + (c - count_le(tail, len, r));
        }
        ++ones;
    }
    g.count[ones] += 1;
    qsum[ones] += static_cast<u128>(k - ones);
    g.qsum.resize(k + 1);
    g.up.resize(k + 1);
    g.down.resize(k + 1);
    g.lazy.resize(k + 1);
    for (int s = 0; s <= k; ++s) {
        const u128 total_up = static_cast<u128>(g.count[s]) * static_cast<u128>(k - s) - qsum[s];
        g.qsum[s] = static_cast<long double>(qsum[s]);
        g.lazy[s] = g.qsum[s];
        g.up[s] = static_cast<long double>(total_up);
        g.down[s] = static_cast<long double>(g.count[s]) * s;
    }
    return g;
}

std::uint64_t step_with_bound(std::uint64_t x, int i, int k, std::uint64_t bound) {
    const std::uint64_t b = std::uint64_t{1} << (k - i);
    if (x & b) return x - b;
    return x + b <= bound ? x + b : x;
}

Grouped group_by_enumeration(std::uint64_t n, int k, std::int64_t shift) {
    Grouped g;
    g.count.assign(k + 1, 0);
    g.qsum.assign(k + 1, 0.0L);
    g.up.assign(k + 1, 0.0L);
    g.down.assign(k + 1, 0.0L);
    g.lazy.assign(k + 1, 0.0L);
    const auto bound = static_cast<std::uint64_t>(static_cast<std::int64_t>(n) + shift);
    for (std::uint64_t x = 0; x <= n; ++x) {
        const int s = std::popcount(x);
        g.count[s] += 1;
        g.qsum[s] += q_statistic(n, x);
        for (int i = 1; i <= k; ++i) {
            const int s2 = std::popcount(step_with_bound(x, i, k, bound));
            if (s2 > s) {
                g.up[s] += 1;
            } else if (s2 < s) {
                g.down[s] += 1;
            } else {
                g.lazy[s] += 1;
            }
        }
    }
    return g;
}

std::vector<PairAtom> kernel_from_groups(const Grouped& g, std::uint64_t n, int k) {
    const long double tot = (static_cast<long double>(n) + 1.0L) * k;
    std::vector<PairAtom> atoms;
    for (int s = 0; s <= k; ++s) {
        if (g.count[s] == 0) continue;
        const double w = w_of(s, k);
        if (g.down[s] > 0) atoms.push_back({w, w_of(s - 1, k), static_cast<double>(g.down[s] / tot)});
        if (g.up[s] > 0) atoms.push_back({w, w_of(s + 1, k), static_cast<double>(g.up[s] / tot)});
        if (g.lazy[s] > 0) atoms.push_back({w, w, static_cast<double>(g.lazy[s] / tot)});
    }
    return atoms;
}

}  // namespace

const char* to_string(System s) {
    switch (s) {
        case System::BinaryExpansion: return "binary-expansion";
        case System::ReflectedExtreme: return "reflected-extreme";
        case System::CustomTree: return "custom-tree";
    }
    return "?";
}

System parse_system(const std::string& s) {
    if (s == "binary-expansion") return System::BinaryExpansion;
    if (s == "reflected-extreme") return System::ReflectedExtreme;
    if (s == "custom-tree") return System::CustomTree;
    throw DomainError("binarycode: unknown system '" + s + "'");
}

int bit_length(std::uint64_t n) { return n == 0 ? 0 : 64 - std::countl_zero(n); }

CodeInstance make_instance(std::uint64_t n, System system) {
    check_n(n);
    return {n, bit_length(n), system};
}

void TreeLabeling::validate() const {
    if (static_cast<int>(labels.size()) != depth + 1) {
        throw DomainError("binarycode tree: expected depth + 1 levels");
    }
    for (int j = 0; j <= depth; ++j) {
        if (labels[j].size() != (std::size_t{1} << j)) {
            std::ostringstream os;
            os << "binarycode tree: level " << j << " must have " << (std::size_t{1} << j) << " labels";
            throw DomainError(os.str());
        }
        for (auto v : labels[j]) {
            if (v > 1) throw DomainError("binarycode tree: labels must be 0 or 1");
        }
    }
    if (labels[0][0] != 0) throw DomainError("binarycode tree: root must be labeled 0");
    for (int j = 1; j <= depth; ++j) {
        for (std::size_t v = 0; v < labels[j].size(); v += 2) {
            if (labels[j][v] == labels[j][v + 1]) {
                std::ostringstream os;
                os << "binarycode tree: siblings V(" << j << "," << v << ") and V(" << j << ","
                   << v + 1 << ") share a label";
                throw DomainError(os.str());
            }
        }
    }
    for (int j = 2; j <= depth; ++j) {
        for (std::size_t v = 0; v < labels[j - 1].size(); ++v) {
            if (labels[j][v] != labels[j - 1][v]) {
                std::ostringstream os;
                os << "binarycode tree: subtree under V(1,0) differs from the tree at V(" << j
                   << "," << v << ")";
                throw DomainError(os.str());
            }
        }
    }
}

int TreeLabeling::path_sum(std::uint64_t x, int k) const {
    if (k > depth) throw DomainError("binarycode tree: path deeper than the stored tree");
    int s = labels[0][0];
    for (int j = 1; j <= k; ++j) s += labels[j][x >> (k - j)];
    return s;
}

namespace {

TreeLabeling make_tree(int depth, int (*label)(std::uint64_t)) {
    if (depth < 1 || depth > kMaxTreeDepth) {
        throw ResourceError("binarycode tree: depth must be in [1, 22]");
    }
    TreeLabeling t;
    t.depth = depth;
    t.labels.resize(depth + 1);
    t.labels[0] = {0};
    for (int j = 1; j <= depth; ++j) {
        t.labels[j].resize(std::size_t{1} << j);
        for (std::uint64_t v = 0; v < t.labels[j].size(); ++v) {
            t.labels[j][v] = static_cast<std::uint8_t>(label(v));
        }
    }
    return t;
}

int expansion_label(std::uint64_t v) { return static_cast<int>(v & 1u); }

}  // namespace

int reflected_label(std::uint64_t v) {
    if (v <= 1) return static_cast<int>(v);
    return v % 2 == 0 ? 1 : 0;
}

TreeLabeling binary_expansion_tree(int depth) { return make_tree(depth, expansion_label); }

TreeLabeling reflected_tree(int depth) { return make_tree(depth, reflected_label); }

std::vector<std::uint64_t> digit_sum_counts(std::uint64_t n) {
    check_n(n);
    const int k = bit_length(n);
    std::vector<std::uint64_t> counts(k + 1, 0);
    int ones = 0;
    for (int b = k - 1; b >= 0; --b) {
        if (!((n >> b) & 1u)) continue;
        for (int r = 0; r <= b; ++r) counts[ones + r] += choose(b, r);
        ++ones;
    }
    counts[ones] += 1;
    return counts;
}

std::vector<std::uint64_t> reflected_counts(std::uint64_t n) {
    const auto all = digit_sum_counts(n);
    const int k = bit_length(n);
    std::vector<std::uint64_t> out(k + 1, 0);
    for (int s = 0; s <= k - 1; ++s) out[s] += choose(k - 1, s);
    for (int s = 1; s <= k; ++s) {
        const std::uint64_t top = all[s] - choose(k - 1, s);
        if (top > 0) out[k + 1 - s] += top;
    }
    return out;
}

std::vector<std::uint64_t> tree_walk_counts(const TreeLabeling& tree, std::uint64_t n) {
    check_n(n);
    const int k = bit_length(n);
    std::vector<std::uint64_t> counts(k + 1, 0);
    for (std::uint64_t x = 0; x <= n; ++x) {
        const int s = tree.path_sum(x, k);
        if (s > k) throw DomainError("binarycode tree: path sum exceeds depth");
        counts[s] += 1;
    }
    return counts;
}

ExactDistribution digit_sum_law(std::uint64_t n) {
    std::ostringstream meta;
    meta << "binarycode S n=" << n;
    return law_from_counts(digit_sum_counts(n), n, meta.str());
}

ExactDistribution reflected_law(std::uint64_t n) {
    std::ostringstream meta;
    meta << "binarycode reflected n=" << n;
    return law_from_counts(reflected_counts(n), n, meta.str());
}

ExactDistribution tree_law(const TreeLabeling& tree, std::uint64_t n) {
    tree.validate();
    std::ostringstream meta;
    meta << "binarycode tree n=" << n;
    return law_from_counts(tree_walk_counts(tree, n), n, meta.str());
}

ExactDistribution standardized(const ExactDistribution& s_law, int k) {
    return standardize(s_law, 0.5 * k, std::sqrt(0.25 * k));
}

std::uint64_t exchangeable_step(std::uint64_t n, std::uint64_t x, int i) {
    check_n(n);
    const int k = bit_length(n);
    if (x > n) throw DomainError("binarycode: x must lie in [0, n]");
    if (i < 1 || i > k) throw DomainError("binarycode: position i must lie in [1, k]");
    return step_with_bound(x, i, k, n);
}

int q_statistic(std::uint64_t n, std::uint64_t x) {
    check_n(n);
    if (x > n) throw DomainError("binarycode: x must lie in [0, n]");
    const int k = bit_length(n);
    int q = 0;
    for (int b = 0; b < k; ++b) {
        const std::uint64_t v = std::uint64_t{1} << b;
        if (!(x & v) && x + v > n) ++q;
    }
    return q;
}

PairIdentityReport pair_identities_report(std::uint64_t n, const IdentityOptions& opts) {
    const CodeInstance inst = make_instance(n);
    const int k = inst.k;
    const bool enumerate = opts.kernel_bound_shift != 0 || opts.method == Method::Enumerate ||
                           (opts.method == Method::Auto && n < kEnumerationLimit);
    if (enumerate && n >= kEnumerationCap) {
        throw ResourceError("binarycode: enumeration needs n < 2^22");
    }
    const Grouped g = enumerate ? group_by_enumeration(n, k, opts.kernel_bound_shift)
                                : group_by_dp(n, k);
    PairIdentityReport rep;
    rep.instance = inst;
    rep.enumerated = enumerate;
    const double lambda = inst.lambda();
    const double rk = std::sqrt(static_cast<double>(k));
    const double step = 2.0 / rk;
    std::vector<StateConditional> sc;
    for (int s = 0; s <= k; ++s) {
        if (g.count[s] == 0) continue;
        SRow r;
        r.s = s;
        r.count = g.count[s];
        r.w = w_of(s, k);
        const long double moves = static_cast<long double>(g.count[s]) * k;
        r.mean_q = static_cast<double>(g.qsum[s] / g.count[s]);
        r.regression = step * static_cast<double>((g.down[s] - g.up[s]) / moves);
        r.mean_d = static_cast<double>((g.down[s] + g.up[s]) / moves);
        const double want_reg = lambda * (r.w + r.mean_q / rk);
        const double want_d = 1.0 - r.mean_q / k;
        rep.regression_residual = std::max(rep.regression_residual, std::abs(r.regression - want_reg));
        rep.d_residual = std::max(rep.d_residual, std::abs(r.mean_d - want_d));
        rep.lemma_constant = std::max(rep.lemma_constant, r.mean_q / (1.0 + std::abs(r.w)));
        sc.push_back({r.w, 1.0, r.mean_d, -r.mean_q / rk});
        rep.rows.push_back(r);
    }
    const double worst = std::max(rep.regression_residual, rep.d_residual);
    if (!(worst <= 1e-8)) {
        std::ostringstream os;
        os << "binarycode: pair identity residual " << worst << " exceeds 1e-8 for n = " << n;
        throw IntegrityError(os.str());
    }
    try {
        rep.antisymmetry_residual = pair_antisymmetry_check(kernel_from_groups(g, n, k));
    } catch (const DomainError& e) {
        throw IntegrityError(std::string("binarycode: kernel is not exchangeable: ") + e.what());
    }
    const auto est = conditional_regression(sc);
    rep.budget.delta = step;
    rep.budget.delta1 = est.delta1_hat;
    rep.budget.delta2 = est.delta2_hat;
    rep.budget.theta = std::max(1.0, est.theta_hat);
    rep.budget.provenance = enumerate ? "exact: per-S sums over every (x, i)"
                                      : "exact: per-S sums by digit DP";
    rep.budget.validate();
    return rep;
}

std::vector<PairAtom> pair_kernel(std::uint64_t n) {
    const CodeInstance inst = make_instance(n);
    return kernel_from_groups(group_by_dp(n, inst.k), n, inst.k);
}

namespace {

ModelBandReport system_report(const ExactDistribution& s_law, const PairIdentityReport& ids,
                              System system, std::span<const double> grid) {
    const int k = ids.instance.k;
    const auto law = standardized(s_law, k);
    RatioTableOptions opts;
    // The standardization uses k/2 and k/4, not the law's own moments.
    opts.standardization_tolerance = std::numeric_limits<double>::infinity();
    ModelBandReport rep;
    rep.table = ratio_table(law, rate_band_spec(1.0 / std::sqrt(static_cast<double>(k)),
                                                "(1+x^3)/sqrt(k)"),
                            grid, opts);
    rep.x_cap = std::pow(static_cast<double>(k), 1.0 / 6.0);
    auto& d = rep.diagnostics;
    d.model = "binarycode";
    d.n = static_cast<double>(ids.instance.n);
    d.budget = ids.budget;
    d.fitted_constant = fit_constant(rep.table);
    d.identity_residuals = {{"regression", ids.regression_residual},
                            {"conditional_d", ids.d_residual},
                            {"antisymmetry", ids.antisymmetry_residual}};
    d.pass = ids.regression_residual <= 1e-10 && ids.d_residual <= 1e-10 &&
             ids.antisymmetry_residual <= 1e-10 && std::isfinite(d.fitted_constant);
    const auto m = moments(law);
    d.extras["k"] = k;
    d.extras["system"] = to_string(system);
    d.extras["lambda"] = ids.instance.lambda();
    d.extras["lemma_constant"] = ids.lemma_constant;
    d.extras["mean"] = m.mean;
    d.extras["variance"] = m.variance;
    if (system != System::BinaryExpansion) d.extras["budget_source"] = "binary-expansion pair";
    return rep;
}

}  // namespace

BinaryBandReport band_report(std::uint64_t n, std::span<const double> grid) {
    if (n < 2) throw DomainError("binarycode: band report needs n >= 2");
    const auto ids = pair_identities_report(n);
    BinaryBandReport rep;
    rep.expansion = system_report(digit_sum_law(n), ids, System::BinaryExpansion, grid);
    rep.reflected = system_report(reflected_law(n), ids, System::ReflectedExtreme, grid);
    return rep;
}

ModelBandReport band_report(const TreeLabeling& tree, std::uint64_t n,
                            std::span<const double> grid) {
    if (n < 2) throw DomainError("binarycode: band report needs n >= 2");
    const auto ids = pair_identities_report(n);
    return system_report(tree_law(tree, n), ids, System::CustomTree, grid);
}

}  // namespace mdlab::binary_code
