#pragma once

namespace latocc {

/// Standard normal CDF. Throws DomainError on non-finite input.
double std_normal_cdf(double x);

/// Inverse of std_normal_cdf on (0, 1).
double std_normal_quantile(double p);

/// P(X <= a, Y <= b) for a standard bivariate normal pair with correlation rho.
///
/// Uses the Drezner-Wesolowsky / Genz reduction with a 20-point
/// Gauss-Legendre rule; the |rho| >= 0.925 branch integrates the
/// Taylor-corrected form around the rho = +-1 singularity. rho = +-1 is
/// evaluated in closed form. Arguments are put in canonical order so the
/// result is exactly symmetric in (a, b).
double bivariate_normal_cdf(double a, double b, double rho);

}  // namespace latocc
