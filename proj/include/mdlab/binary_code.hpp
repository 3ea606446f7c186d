#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mdlab/lattice_dist.hpp"
#include "mdlab/report.hpp"
#include "mdlab/stein_core.hpp"

namespace mdlab::binary_code {

enum class System { BinaryExpansion, ReflectedExtreme, CustomTree };

const char* to_string(System s);
/// "binary-expansion", "reflected-extreme" or "custom-tree"; DomainError otherwise.
System parse_system(const std::string& s);

/// Number of binary digits of n (n >= 1).
int bit_length(std::uint64_t n);

/// X uniform on {0, ..., n}, k = bit length of n, lambda = 2 / k.
struct CodeInstance {
    std::uint64_t n = 0;
    int k = 0;
    System system = System::BinaryExpansion;
    [[nodiscard]] double lambda() const { return 2.0 / k; }
};

CodeInstance make_instance(std::uint64_t n, System system = System::BinaryExpansion);

/// Labels of a binary tree down to `depth`; labels[j][v] is the label of
/// V_{j,v}, the v-th node (left to right) at depth j. labels[0] = {root}.
struct TreeLabeling {
    int depth = 0;
    std::vector<std::vector<std::uint8_t>> labels;

    /// Checks root = 0, siblings differ, and that the subtree under V_{1,0}
    /// repeats the tree. DomainError naming the first violation.
    void validate() const;
    /// Sum of labels on the path from the root to leaf x at depth k.
    [[nodiscard]] int path_sum(std::uint64_t x, int k) const;
};

/// Left child 0, right child 1 everywhere: path sums are popcounts.
TreeLabeling binary_expansion_tree(int depth);
/// V_{j,0} = 0 and V_{j,1} = 1 on the leftmost pair, left 1 / right 0 elsewhere.
TreeLabeling reflected_tree(int depth);

/// Label of V_{j,v} in the reflected tree, for any depth.
int reflected_label(std::uint64_t v);

/// Count of x in [0, n] with each popcount, index 0..k. Exact.
std::vector<std::uint64_t> digit_sum_counts(std::uint64_t n);
/// Count of x in [0, n] with each reflected path sum, index 0..k. Built per
/// half: the lower half is a full (k-1)-cube and the upper half maps s to k + 1 - s.
std::vector<std::uint64_t> reflected_counts(std::uint64_t n);
/// Counts of path sums by walking `tree` for every x in [0, n] (n < 2^depth).
std::vector<std::uint64_t> tree_walk_counts(const TreeLabeling& tree, std::uint64_t n);

/// Law of S = popcount(X) on {0, ..., k}.
ExactDistribution digit_sum_law(std::uint64_t n);
/// Law of the reflected path sum.
ExactDistribution reflected_law(std::uint64_t n);
/// Law of the path sum of any labeled tree.
ExactDistribution tree_law(const TreeLabeling& tree, std::uint64_t n);

/// (S - k/2) / sqrt(k/4).
ExactDistribution standardized(const ExactDistribution& s_law, int k);

/// Position i (1 = most significant of k digits) flips 1 -> 0, or 0 -> 1 when
/// x + 2^{k-i} <= n; otherwise x is returned. DomainError on bad x or i.
std::uint64_t exchangeable_step(std::uint64_t n, std::uint64_t x, int i);

/// Number of 0-digits of x whose flip would exceed n.
int q_statistic(std::uint64_t n, std::uint64_t x);

struct SRow {
    int s = 0;
    std::uint64_t count = 0;
    double w = 0.0;           ///< (s - k/2) / sqrt(k/4)
    double mean_q = 0.0;      ///< E(Q | S = s)
    double regression = 0.0;  ///< E(W - W' | S = s) from the kernel
    double mean_d = 0.0;      ///< E(D | S = s), D = (W - W')^2 / (2 lambda)
};

enum class Method { Auto, Enumerate, DigitDP };

struct IdentityOptions {
    /// Auto enumerates every (x, i) below 2^18 and groups by S with digit DP above.
    Method method = Method::Auto;
    /// Test hook: the kernel blocks 0 -> 1 flips against n + shift instead of n.
    std::int64_t kernel_bound_shift = 0;
};

struct PairIdentityReport {
    CodeInstance instance;
    bool enumerated = false;
    std::vector<SRow> rows;             ///< S values with positive count
    double regression_residual = 0.0;   ///< max_S |E(W-W'|S) - lambda (W + E(Q|S)/sqrt k)|
    double d_residual = 0.0;            ///< max_S |E(D|S) - 1 + E(Q|S)/k|
    double antisymmetry_residual = 0.0;
    double lemma_constant = 0.0;        ///< max_S E(Q|S) / (1 + |W_S|)
    SteinBudget budget;
};

/// IntegrityError if either identity residual exceeds 1e-8 or the kernel is
/// not exchangeable. ResourceError if enumeration is requested above 2^22.
/// The kernel hook forces enumeration.
PairIdentityReport pair_identities_report(std::uint64_t n, const IdentityOptions& opts = {});

/// Exact joint law of (S, S') grouped by S, lazy moves as s' = s, mapped to W.
std::vector<PairAtom> pair_kernel(std::uint64_t n);

struct BinaryBandReport {
    ModelBandReport expansion;
    ModelBandReport reflected;
};

/// Ratio tables of (S - k/2)/sqrt(k/4) for both extreme systems with unit
/// band (1 + x^3)/sqrt(k) on 0 <= x <= k^{1/6}.
BinaryBandReport band_report(std::uint64_t n, std::span<const double> grid);

/// Ratio table for a custom labeled tree (n < 2^depth).
ModelBandReport band_report(const TreeLabeling& tree, std::uint64_t n,
                            std::span<const double> grid);

}  // namespace mdlab::binary_code
