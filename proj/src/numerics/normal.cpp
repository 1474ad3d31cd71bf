#include "latocc/numerics/normal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "latocc/errors.hpp"

namespace latocc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Negative half of the 20-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 10> kGlNodes = {
    -0.9931285991850949, -0.9639719272779138, -0.9122344282513258,
    -0.8391169718222188, -0.7463319064601508, -0.636053680726515,
    -0.5108670019508271, -0.37370608871541955, -0.2277858511416451,
    -0.07652652113349734};
constexpr std::array<double, 10> kGlWeights = {
    0.017614007139153273, 0.04060142980038622, 0.06267204833410944,
    0.08327674157670467,  0.10193011981724026, 0.11819453196151825,
    0.13168863844917653,  0.14209610931838187, 0.14917298647260366,
    0.15275338713072578};

inline double phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Upper orthant P(X > h, Y > k) for correlation r, |r| < 1.
double upper_orthant(double h, double k, double r) {
    double hk = h * k;
    double bvn = 0.0;

    if (std::abs(r) < 0.925) {
        const double hs = (h * h + k * k) / 2.0;
        const double asr = std::asin(r);
        for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
            double sn = std::sin(asr * (kGlNodes[i] + 1.0) / 2.0);
            bvn += kGlWeights[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
            sn = std::sin(asr * (1.0 - kGlNodes[i]) / 2.0);
            bvn += kGlWeights[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
        }
        return bvn * asr / (2.0 * kTwoPi) + phi(-h) * phi(-k);
    }

    if (r < 0.0) {
        k = -k;
        hk = -hk;
    }
    if (std::abs(r) < 1.0) {
        const double as = (1.0 - r) * (1.0 + r);
        double a = std::sqrt(as);
        const double bs = (h - k) * (h - k);
        const double c = (4.0 - hk) / 8.0;
        const double d = (12.0 - hk) / 16.0;
        bvn = a * std::exp(-(bs / as + hk) / 2.0) *
              (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
        if (hk > -160.0) {
            const double b = std::sqrt(bs);
            bvn -= std::exp(-hk / 2.0) * std::sqrt(kTwoPi) * phi(-b / a) * b *
                   (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
            for (double sign : {-1.0, 1.0}) {
                const double xs = std::pow(a * (sign * kGlNodes[i] + 1.0), 2);
                const double rs = std::sqrt(1.0 - xs);
                const double asr = -(bs / xs + hk) / 2.0;
                if (asr > -100.0) {
                    bvn += a * kGlWeights[i] * std::exp(asr) *
                           (std::exp(-hk * xs / (2.0 * std::pow(1.0 + rs, 2))) / rs -
                            (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
        }
        bvn = -bvn / kTwoPi;
    }

    if (r > 0.0) {
        return bvn + phi(-std::max(h, k));
    }
    bvn = -bvn;
    if (k > h) {
        if (h < 0.0) {
            bvn += phi(k) - phi(h);
        } else {
            bvn += phi(-h) - phi(-k);
        }
    }
    return bvn;
}

// Acklam's rational approximation; refined by Halley steps below.
double quantile_initial(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double std_normal_cdf(double x) {
    if (!std::isfinite(x)) {
        throw DomainError("std_normal_cdf: non-finite argument " + std::to_string(x));
    }
    return phi(x);
}

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("std_normal_quantile: p must lie in (0, 1), got " +
                          std::to_string(p));
    }
    double x = quantile_initial(p);
    // Halley refinement; the upper tail is refined through the complement
    // so that residuals are not swamped by 1 - p cancellation.
    for (int iter = 0; iter < 2; ++iter) {
        const double e = (x <= 0.0) ? phi(x) - p : (1.0 - p) - phi(-x);
        const double u = e * std::sqrt(kTwoPi) * std::exp(x * x / 2.0);
        x -= u / (1.0 + x * u / 2.0);
    }
    return x;
}

double bivariate_normal_cdf(double a, double b, double rho) {
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw DomainError("bivariate_normal_cdf: non-finite limits");
    }
    if (!(std::abs(rho) <= 1.0)) {
        throw DomainError("bivariate_normal_cdf: |rho| must be <= 1, got " +
                          std::to_string(rho));
    }
    if (a > b) {
        std::swap(a, b);
    }
    if (rho == 1.0) {
        return phi(a);
    }
    if (rho == -1.0) {
        return std::max(0.0, phi(a) - phi(-b));
    }
    const double p = upper_orthant(-a, -b, rho);
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace latocc
