#pragma once

// Standard normal tail and the solution of the Stein equation
//
//     w f(w) - f'(w) = 1(w >= x) - (1 - Phi(x)).
//
// Everything here is a pure function; tails are available in log space so
// that ratios P(W >= x) / (1 - Phi(x)) can be formed without underflow.

namespace mdlab::normal {

/// Evaluation of Phi at one point.
struct NormalEval {
    double w = 0.0;
    double phi = 0.5;    ///< Phi(w)
    double tail = 0.5;   ///< 1 - Phi(w)
    double mills = 0.5;  ///< (1 - Phi(w)) exp(w^2 / 2)
};

/// |w| at which the tail switches from the erfc regime to the Laplace
/// continued fraction for the Mills ratio.
inline constexpr double kContinuedFractionThreshold = 4.0;

NormalEval evaluate(double w);

/// 1 - Phi(w). Relative error below 1e-12 while the result is a normal
/// double (w up to about 37.5); use log_normal_tail beyond that.
double normal_tail(double w);

/// log(1 - Phi(w)); finite for every finite w.
double log_normal_tail(double w);

double normal_cdf(double w);
double log_normal_cdf(double w);

/// (1 - Phi(w)) exp(w^2 / 2).
double mills_ratio(double w);
double log_mills_ratio(double w);

/// sqrt(2 pi) (1 + w^2) exp(w^2 / 2) (1 - Phi(w)) - w, evaluated without
/// cancellation for large w. Lies in [0, 2 / (1 + w^3)] for w >= 0.
double mills_bracket(double w);

/// f_x(w), the bounded solution of the Stein equation for the indicator
/// 1(w >= x).
double stein_solution(double x, double w);

/// g(w) = (w f_x(w))'.
double stein_solution_derivative_g(double x, double w);

}  // namespace mdlab::normal
