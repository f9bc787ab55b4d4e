#pragma once

#include <cmath>
#include <functional>

namespace bandit {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double normal_pdf(double z) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

// Inverse standard-normal cdf: Acklam's rational approximation polished with two
// Newton steps on erfc, giving ~1e-14 relative accuracy away from the extremes.
double normal_quantile(double p);

// Adaptive Simpson quadrature with absolute tolerance `tol`.
double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                 int max_depth = 40);

// Bisection for a monotone nondecreasing function: smallest x in [lo, hi] with
// f(x) >= target, to absolute tolerance `tol`.
double bisect_nondecreasing(const std::function<double(double)>& f, double lo, double hi,
                            double target, double tol);

}  // namespace bandit
