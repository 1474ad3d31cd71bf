#pragma once

#include <functional>

namespace latocc {

struct RootOptions {
    double x_tol = 1e-14;  // stop when the bracket is narrower than this
    double f_tol = 0.0;    // or when |f(x)| <= f_tol
    int max_iter = 300;
};

/// Brent's bracketed root finder (inverse quadratic / secant steps with a
/// bisection fallback). Requires f(lo) and f(hi) of opposite sign, or one of
/// them zero; throws BracketError otherwise.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 const RootOptions& opts);

inline double find_root(const std::function<double(double)>& f, double lo, double hi,
                        double tol) {
    return find_root(f, lo, hi, RootOptions{tol, 0.0, 300});
}

}  // namespace latocc
