#include "mdlab/normal_kernel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mdlab/errors.hpp"

namespace mdlab::normal {
namespace {

constexpr double kSqrt2Pi = 2.506628274631000502415765284811;
constexpr double kHalfLog2Pi = 0.918938533204672741780329736406;

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw DomainError(std::string("normal kernel: argument ") + name + " must be finite");
    }
}

// Tails of the Laplace continued fraction
//
//     R(w) = 1 / (w + T1),  T_k = k / (w + T_{k+1}),
//
// where R(w) = sqrt(2 pi) * mills(w). Evaluated bottom-up from a fixed depth,
// which is ample for w >= 4.
struct LaplaceTails {
    double t1 = 0.0;
    double t2 = 0.0;
};

LaplaceTails laplace_tails(double w) {
    const int depth = 30 + static_cast<int>(std::ceil(2000.0 / (w * w)));
    double t = 0.0;
    double t2 = 0.0;
    for (int k = depth; k >= 1; --k) {
        t = k / (w + t);
        if (k == 2) {
            t2 = t;
        }
    }
    return {t, t2};
}

// log mills(w) for w >= threshold.
double log_mills_cf(double w) {
    return -kHalfLog2Pi - std::log(w + laplace_tails(w).t1);
}

double log_tail_unchecked(double w) {
    if (w >= kContinuedFractionThreshold) {
        return -0.5 * w * w + log_mills_cf(w);
    }
    if (w <= -kContinuedFractionThreshold) {
        return std::log1p(-std::exp(log_tail_unchecked(-w)));
    }
    return std::log(0.5 * std::erfc(w / std::numbers::sqrt2));
}

double tail_unchecked(double w) {
    if (w >= kContinuedFractionThreshold) {
        return std::exp(log_tail_unchecked(w));
    }
    if (w <= -kContinuedFractionThreshold) {
        return -std::expm1(log_tail_unchecked(-w));
    }
    return 0.5 * std::erfc(w / std::numbers::sqrt2);
}

double log_mills_unchecked(double w) {
    if (w >= kContinuedFractionThreshold) {
        return log_mills_cf(w);
    }
    return 0.5 * w * w + log_tail_unchecked(w);
}

// log of the bracket sqrt(2 pi)(1 + v^2) mills(v) - v.
double log_bracket_unchecked(double v) {
    if (v >= kContinuedFractionThreshold) {
        // (1 + v^2) R - v = T2 / ((v + T2)(v + T1)).
        const auto [t1, t2] = laplace_tails(v);
        return std::log(t2) - std::log(v + t2) - std::log(v + t1);
    }
    const double lm = log_mills_unchecked(v);
    const double scale = kSqrt2Pi * (1.0 + v * v);
    if (v < 0.0) {
        // Both terms positive; factor out the dominant mills part.
        return lm + std::log(scale + (-v) * std::exp(-lm));
    }
    return std::log(scale * std::exp(lm) - v);
}

}  // namespace

double log_normal_tail(double w) {
    require_finite(w, "w");
    return log_tail_unchecked(w);
}

double normal_tail(double w) {
    require_finite(w, "w");
    return tail_unchecked(w);
}

double normal_cdf(double w) {
    require_finite(w, "w");
    return tail_unchecked(-w);
}

double log_normal_cdf(double w) {
    require_finite(w, "w");
    return log_tail_unchecked(-w);
}

double log_mills_ratio(double w) {
    require_finite(w, "w");
    return log_mills_unchecked(w);
}

double mills_ratio(double w) {
    return std::exp(log_mills_ratio(w));
}

NormalEval evaluate(double w) {
    require_finite(w, "w");
    NormalEval e;
    e.w = w;
    e.tail = tail_unchecked(w);
    e.phi = tail_unchecked(-w);
    e.mills = std::exp(log_mills_unchecked(w));
    return e;
}

double mills_bracket(double w) {
    require_finite(w, "w");
    return std::exp(log_bracket_unchecked(w));
}

double stein_solution(double x, double w) {
    require_finite(x, "x");
    require_finite(w, "w");
    // w >= x: sqrt(2 pi) mills(w) Phi(x);  w < x: sqrt(2 pi) mills(-w) (1 - Phi(x)).
    if (w >= x) {
        return kSqrt2Pi * std::exp(log_mills_unchecked(w) + log_tail_unchecked(-x));
    }
    return kSqrt2Pi * std::exp(log_mills_unchecked(-w) + log_tail_unchecked(x));
}

double stein_solution_derivative_g(double x, double w) {
    require_finite(x, "x");
    require_finite(w, "w");
    // The lower branch is the upper bracket reflected: bracket(-w) (1 - Phi(x)).
    if (w >= x) {
        return std::exp(log_bracket_unchecked(w) + log_tail_unchecked(-x));
    }
    return std::exp(log_bracket_unchecked(-w) + log_tail_unchecked(x));
}

}  // namespace mdlab::normal
