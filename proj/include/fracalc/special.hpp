#pragma once

#include "fracalc/frac_order.hpp"

namespace fracalc {

/// Gamma function for x > 0 (Lanczos approximation).
/// Relative error <= 1e-13 on [0.05, 50]. Throws std::domain_error for x <= 0.
double gamma_fn(double x);

/// log(Gamma(x)) for x > 0.
double log_gamma(double x);

/// Mittag-Leffler function E_alpha(z) = sum_k z^k / Gamma(alpha*k + 1)
/// for 0 < alpha <= 1, evaluated by the power series with a certified
/// remainder bound <= 1e-12 * |result|. Intended for |z| <= 10; throws
/// std::overflow_error if partial sums leave the representable range.
double mittag_leffler(const FracOrder& alpha, double z);

/// Coefficient of t^(mu+alpha) in J^alpha t^mu, i.e. Gamma(mu+1)/Gamma(mu+alpha+1).
/// Requires mu > -1 (the defining integral diverges otherwise).
double power_rule(double mu, const FracOrder& alpha);

/// Regularized incomplete beta function I_x(a,b) for a,b > 0, x in [0,1],
/// by the standard continued fraction. Used for cell-exact integration of
/// double-power kernels (t-s)^(alpha-1) * s^(theta-1).
double incomplete_beta(double a, double b, double x);

/// Unregularized incomplete beta: integral of t^(a-1)(1-t)^(b-1) over (0,x).
double incomplete_beta_unreg(double a, double b, double x);

} // namespace fracalc
