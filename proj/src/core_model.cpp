#include "bandit/core_model.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>

#include "bandit/errors.hpp"
#include "bandit/math_util.hpp"

namespace bandit {

// ---------------------------------------------------------------- math_util

double normal_quantile(double p) {
    if (p <= 0.0 || p >= 1.0) {
        if (p == 0.0) return -HUGE_VAL;
        if (p == 1.0) return HUGE_VAL;
        throw std::invalid_argument("normal_quantile: p outside [0,1]");
    }
    // Acklam's approximation
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    for (int it = 0; it < 2; ++it) {
        double e = normal_cdf(x) - p;
        double u = e / normal_pdf(x);
        x -= u / (1.0 + x * u / 2.0);  // Halley step
    }
    return x;
}

namespace {

double simpson(double a, double fa, double fm, double b, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double fa, double b,
             double fb, double m, double fm, double whole, double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(a, fa, flm, m, fm);
    double right = simpson(m, fm, frm, b, fb);
    double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol) {
        return left + right + diff / 15.0;
    }
    return adapt(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1) +
           adapt(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                 int max_depth) {
    if (a == b) return 0.0;
    // seed with a few panels so narrow features are not missed
    const int panels = 16;
    double h = (b - a) / panels;
    double total = 0.0;
    for (int i = 0; i < panels; ++i) {
        double x0 = a + i * h, x1 = x0 + h, xm = 0.5 * (x0 + x1);
        double f0 = f(x0), f1 = f(x1), fm = f(xm);
        double whole = simpson(x0, f0, fm, x1, f1);
        total += adapt(f, x0, f0, x1, f1, xm, fm, whole, tol / panels, max_depth);
    }
    return total;
}

double bisect_nondecreasing(const std::function<double(double)>& f, double lo, double hi,
                            double target, double tol) {
    double flo = f(lo);
    if (flo >= target) return lo;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) >= target) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

// ---------------------------------------------------------------- bump_spec

double bump_spec::half_width() const { return std::sqrt(eps1); }

double bump_spec::h0(double y) const {
    double s = 1.0;
    if (y < 0.0) {
        y = -y;
        s = -1.0;
    }
    if (y > 1.0) return 0.0;
    // Horner over a_1..a_{k+2}: h0(y) = y*(a_1 + y*(a_2 + ...))
    double acc = 0.0;
    for (size_t i = coeffs.size(); i-- > 0;) acc = acc * y + coeffs[i];
    return s * acc * y;
}

double bump_spec::h0_deriv(double y) const {
    double ay = std::abs(y);
    if (ay > 1.0) return 0.0;
    double acc = 0.0;
    for (size_t i = coeffs.size(); i-- > 0;)
        acc = acc * ay + coeffs[i] * static_cast<double>(i + 1);
    return acc;  // even function of y
}

double bump_spec::h0_int(double y) const {
    y = std::clamp(y, 0.0, 1.0);
    double acc = 0.0;
    for (size_t i = coeffs.size(); i-- > 0;)
        acc = acc * y + coeffs[i] / static_cast<double>(i + 2);
    return acc * y * y;
}

double bump_spec::h0_first_moment(double y) const {
    y = std::clamp(y, 0.0, 1.0);
    double acc = 0.0;
    for (size_t i = coeffs.size(); i-- > 0;)
        acc = acc * y + coeffs[i] / static_cast<double>(i + 3);
    return acc * y * y * y;
}

double bump_spec::h(double x) const {
    double w = half_width();
    if (w <= 0.0) return 0.0;
    return w * h0(x / w);
}

double bump_spec::h_int(double x) const {
    double w = half_width();
    if (w <= 0.0) return 0.0;
    double z = x / w;
    if (z <= -1.0) return 0.0;
    if (z >= 1.0) return 0.0;
    // int_{-1}^{z} h0 = h0_int(|z|) - 1 for any |z| <= 1 (odd symmetry)
    return eps1 * (h0_int(std::abs(z)) - 1.0);
}

double bump_spec::h_first_moment(double a, double c) const {
    double w = half_width();
    if (w <= 0.0) return 0.0;
    auto K = [&](double x) {
        double z = std::clamp(x / w, -1.0, 1.0);
        double v = h0_first_moment(std::abs(z));
        return z < 0.0 ? -v : v;  // integrand t*h(t) is even, so K is odd
    };
    double scale = eps1 * w;
    return scale * (K(c) - K(a));
}

// ---------------------------------------------------------------- dist_spec

dist_spec dist_spec::uniform(double lo, double hi) {
    assert(hi > lo);
    dist_spec d;
    d.family = dist_family::uniform;
    d.a = lo;
    d.b = hi;
    d.support_lo = lo;
    d.support_hi = hi;
    return d;
}

dist_spec dist_spec::dirac(double at) {
    dist_spec d;
    d.family = dist_family::dirac;
    d.a = at;
    d.support_lo = at;
    d.support_hi = at;
    return d;
}

dist_spec dist_spec::gaussian(double mu, double sd) {
    assert(sd > 0.0);
    dist_spec d;
    d.family = dist_family::gaussian;
    d.a = mu;
    d.b = sd;
    d.support_lo = -HUGE_VAL;
    d.support_hi = HUGE_VAL;
    return d;
}

dist_spec dist_spec::beta_tail(double beta) {
    assert(beta > 0.0);
    dist_spec d;
    d.family = dist_family::beta_tail;
    d.a = beta;
    d.support_lo = 0.0;
    d.support_hi = 1.0;
    return d;
}

dist_spec dist_spec::perturbed_uniform(double lo, double hi, const bump_spec& bump,
                                       double shift, double scale) {
    assert(hi > lo);
    dist_spec d;
    d.family = dist_family::perturbed_uniform;
    d.a = lo;
    d.b = hi;
    d.bump = bump;
    d.shift = shift;
    d.scale = scale;
    d.support_lo = lo;
    d.support_hi = hi;
    return d;
}

double dist_spec::cdf(double x) const {
    switch (family) {
        case dist_family::uniform:
            if (x <= a) return 0.0;
            if (x >= b) return 1.0;
            return (x - a) / (b - a);
        case dist_family::dirac:
            return x >= a ? 1.0 : 0.0;
        case dist_family::gaussian:
            return normal_cdf((x - a) / b);
        case dist_family::beta_tail:
            if (x <= 0.0) return 0.0;
            if (x >= 1.0) return 1.0;
            return 1.0 - std::pow(1.0 - x, a);
        case dist_family::perturbed_uniform: {
            if (x <= a) return 0.0;
            if (x >= b) return 1.0;
            return (x - a) / (b - a) + scale * bump.h_int(x - shift);
        }
    }
    return 0.0;
}

double dist_spec::quantile(double p) const {
    assert(p >= 0.0 && p <= 1.0);
    switch (family) {
        case dist_family::uniform:
            return a + p * (b - a);
        case dist_family::dirac:
            return a;
        case dist_family::gaussian:
            return a + b * normal_quantile(p);
        case dist_family::beta_tail:
            return 1.0 - std::pow(1.0 - p, 1.0 / a);
        case dist_family::perturbed_uniform: {
            if (p <= 0.0) return a;
            if (p >= 1.0) return b;
            auto F = [this](double x) { return cdf(x); };
            return bisect_nondecreasing(F, a, b, p, 1e-12);
        }
    }
    return 0.0;
}

double dist_spec::density(double x) const {
    switch (family) {
        case dist_family::uniform:
            return (x >= a && x <= b) ? 1.0 / (b - a) : 0.0;
        case dist_family::dirac:
            return 0.0;
        case dist_family::gaussian:
            return normal_pdf((x - a) / b) / b;
        case dist_family::beta_tail:
            if (x < 0.0 || x > 1.0) return 0.0;
            return a * std::pow(1.0 - x, a - 1.0);
        case dist_family::perturbed_uniform:
            if (x < a || x > b) return 0.0;
            return 1.0 / (b - a) + scale * bump.h(x - shift);
    }
    return 0.0;
}

double dist_spec::min_density() const {
    if (family != dist_family::perturbed_uniform) {
        throw std::logic_error("min_density: only meaningful for perturbed_uniform");
    }
    double base = 1.0 / (b - a);
    // extreme of the perturbation: scale * w * (+-h0_max) over the bump support
    double w = bump.half_width();
    double lo_edge = std::max(a, shift - w), hi_edge = std::min(b, shift + w);
    if (lo_edge >= hi_edge) return base;
    const int steps = 20000;
    double mn = base;
    for (int i = 0; i <= steps; ++i) {
        double x = lo_edge + (hi_edge - lo_edge) * i / steps;
        mn = std::min(mn, density(x));
    }
    return mn;
}

std::string dist_spec::describe() const {
    std::ostringstream os;
    os.precision(12);
    switch (family) {
        case dist_family::uniform: os << "uniform(" << a << "," << b << ")"; break;
        case dist_family::dirac: os << "dirac(" << a << ")"; break;
        case dist_family::gaussian: os << "gaussian(" << a << "," << b << ")"; break;
        case dist_family::beta_tail: os << "beta_tail(" << a << ")"; break;
        case dist_family::perturbed_uniform:
            os << "perturbed_uniform(k=" << bump.k << ",eps1=" << bump.eps1
               << ",shift=" << shift << ",scale=" << scale << ")";
            break;
    }
    return os.str();
}

// ---------------------------------------------------------- functional_spec

functional_spec functional_spec::mean() {
    functional_spec f;
    f.kind = functional_kind::mean;
    f.alpha1 = 0.0;
    f.alpha2 = 1.0;
    return f;
}

functional_spec functional_spec::quantile(double a) {
    assert(a > 0.0 && a < 1.0);
    functional_spec f;
    f.kind = functional_kind::quantile;
    f.alpha = a;
    f.alpha1 = a;
    f.alpha2 = a;
    return f;
}

functional_spec functional_spec::maximum() {
    functional_spec f;
    f.kind = functional_kind::maximum;
    f.alpha1 = 1.0;
    f.alpha2 = 1.0;
    return f;
}

functional_spec functional_spec::trimmed(double a) {
    assert(a > 0.0 && a < 0.5);
    functional_spec f;
    f.kind = functional_kind::trimmed;
    f.alpha = a;
    f.alpha1 = a;
    f.alpha2 = 1.0 - a;
    return f;
}

std::string functional_spec::describe() const {
    std::ostringstream os;
    os.precision(12);
    switch (kind) {
        case functional_kind::mean: return "mean";
        case functional_kind::quantile: os << "quantile(" << alpha << ")"; break;
        case functional_kind::maximum: return "maximum";
        case functional_kind::trimmed: os << "trimmed(" << alpha << ")"; break;
    }
    return os.str();
}

// ------------------------------------------------------------- functionals

double cdf(const dist_spec& d, double x) { return d.cdf(x); }
double quantile(const dist_spec& d, double p) { return d.quantile(p); }

namespace {

// int_{q1}^{q2} x dF for each family, closed form.
double partial_first_moment(const dist_spec& d, double q1, double q2) {
    switch (d.family) {
        case dist_family::uniform:
            return (q2 * q2 - q1 * q1) / (2.0 * (d.b - d.a));
        case dist_family::dirac:
            return (d.a >= q1 && d.a <= q2) ? d.a : 0.0;
        case dist_family::gaussian: {
            double z1 = (q1 - d.a) / d.b, z2 = (q2 - d.a) / d.b;
            double mass = normal_cdf(z2) - normal_cdf(z1);
            return d.a * mass + d.b * (normal_pdf(z1) - normal_pdf(z2));
        }
        case dist_family::beta_tail: {
            // antiderivative of x * beta (1-x)^{beta-1}:
            //   A(x) = -x(1-x)^beta - (1-x)^{beta+1}/(beta+1)
            auto A = [&](double x) {
                double om = 1.0 - std::clamp(x, 0.0, 1.0);
                return -std::clamp(x, 0.0, 1.0) * std::pow(om, d.a) -
                       std::pow(om, d.a + 1.0) / (d.a + 1.0);
            };
            return A(q2) - A(q1);
        }
        case dist_family::perturbed_uniform: {
            double base = (q2 * q2 - q1 * q1) / (2.0 * (d.b - d.a));
            // int x*h(x-shift) dx = shift*(h_int diff) + int u*h(u) du
            double hdiff = d.bump.h_int(q2 - d.shift) - d.bump.h_int(q1 - d.shift);
            double um = d.bump.h_first_moment(q1 - d.shift, q2 - d.shift);
            return base + d.scale * (d.shift * hdiff + um);
        }
    }
    return 0.0;
}

double mass_between(const dist_spec& d, double q1, double q2) {
    if (d.family == dist_family::dirac) {
        return (d.a >= q1 && d.a <= q2) ? 1.0 : 0.0;
    }
    return d.cdf(q2) - d.cdf(q1);
}

}  // namespace

double variance(const dist_spec& d) {
    switch (d.family) {
        case dist_family::uniform:
            return (d.b - d.a) * (d.b - d.a) / 12.0;
        case dist_family::dirac:
            return 0.0;
        case dist_family::gaussian:
            return d.b * d.b;
        case dist_family::beta_tail: {
            double beta = d.a;
            return beta / ((beta + 2.0) * (beta + 1.0) * (beta + 1.0));
        }
        case dist_family::perturbed_uniform:
            // the perturbation's 0th/1st/2nd moments about the shift all vanish
            // (oddness plus the moment-cancellation design), so the base variance
            // carries over exactly
            return (d.b - d.a) * (d.b - d.a) / 12.0;
    }
    return 0.0;
}

double true_functional(const dist_spec& d, const functional_spec& fn) {
    switch (fn.kind) {
        case functional_kind::mean: {
            switch (d.family) {
                case dist_family::uniform: return 0.5 * (d.a + d.b);
                case dist_family::dirac: return d.a;
                case dist_family::gaussian: return d.a;
                case dist_family::beta_tail: return 1.0 / (d.a + 1.0);
                case dist_family::perturbed_uniform:
                    // bump's full first moment vanishes for k >= 1
                    return 0.5 * (d.a + d.b);
            }
            return 0.0;
        }
        case functional_kind::quantile:
            return d.quantile(fn.alpha);
        case functional_kind::maximum:
            if (d.support_hi == HUGE_VAL) {
                throw unbounded_functional("maximum of a distribution with unbounded upper support");
            }
            return d.support_hi;
        case functional_kind::trimmed: {
            double q1 = d.quantile(fn.alpha1);
            double q2 = d.quantile(fn.alpha2);
            double mass = mass_between(d, q1, q2);
            assert(mass > 0.0);
            return partial_first_moment(d, q1, q2) / mass;
        }
    }
    return 0.0;
}

// -------------------------------------------------------- check_assumptions

namespace {

struct scan_result {
    double min_density;
    double max_density;
    double max_density_slope;  // sup |p'| via finite differences
};

scan_result scan_neighborhood(const dist_spec& d, double center, double radius,
                              double resolution) {
    double lo = std::max(center - radius, d.support_lo);
    double hi = std::min(center + radius, d.support_hi);
    // stay inside the open support for density evaluation
    if (d.family == dist_family::beta_tail) hi = std::min(hi, 1.0 - 1e-12);
    int steps = std::max(8, static_cast<int>(std::ceil((hi - lo) / resolution)));
    steps = std::min(steps, 200000);
    scan_result r{HUGE_VAL, 0.0, 0.0};
    double prev = 0.0;
    for (int i = 0; i <= steps; ++i) {
        double x = lo + (hi - lo) * i / steps;
        double p = d.density(x);
        r.min_density = std::min(r.min_density, p);
        r.max_density = std::max(r.max_density, p);
        if (i > 0) {
            double slope = std::abs(p - prev) / ((hi - lo) / steps);
            r.max_density_slope = std::max(r.max_density_slope, slope);
        }
        prev = p;
    }
    return r;
}

// Analytic density-Lipschitz bounds where available; otherwise scanned.
double density_lipschitz(const dist_spec& d, double center, double radius,
                         double resolution) {
    switch (d.family) {
        case dist_family::uniform: return 0.0;
        case dist_family::gaussian: {
            // |phi'((x-mu)/sd)|/sd^2, maximized over the window
            double lo = (center - radius - d.a) / d.b, hi = (center + radius - d.a) / d.b;
            auto g = [&](double z) { return std::abs(z) * normal_pdf(z) / (d.b * d.b); };
            double best = std::max(g(lo), g(hi));
            if (lo < 1.0 && hi > 1.0) best = std::max(best, g(1.0));
            if (lo < -1.0 && hi > -1.0) best = std::max(best, g(-1.0));
            return best;
        }
        case dist_family::beta_tail: {
            double beta = d.a;
            if (beta == 1.0) return 0.0;
            auto g = [&](double x) {
                x = std::clamp(x, 0.0, 1.0 - 1e-12);
                return std::abs(beta * (beta - 1.0)) * std::pow(1.0 - x, beta - 2.0);
            };
            return std::max(g(center - radius), g(center + radius));
        }
        case dist_family::perturbed_uniform:
            return scan_neighborhood(d, center, radius, resolution).max_density_slope;
        case dist_family::dirac: return HUGE_VAL;
    }
    return HUGE_VAL;
}

}  // namespace

assumption_params check_assumptions(const dist_spec& d, const functional_spec& fn,
                                    double eps) {
    assert(eps > 0.0);
    assumption_params out;
    double r1 = 10.0 * eps;            // density-floor neighborhoods
    double r2 = 10.0 * std::sqrt(eps); // Lipschitz neighborhoods
    out.validity_radius = r1;
    double resolution = eps / 100.0;

    auto quantile_clauses = [&](double level, const char* tag,
                                std::optional<double>& c1_out,
                                std::optional<double>& c2_out,
                                std::optional<double>* c3_out) {
        if (!d.has_density()) {
            out.violations.push_back(std::string("F' >= c1 fails at ") + tag +
                                     ": no density");
            return;
        }
        double q = d.quantile(level);
        auto sc = scan_neighborhood(d, q, r1, resolution);
        if (sc.min_density <= 0.0) {
            out.violations.push_back(std::string("F' >= c1 fails at ") + tag +
                                     ": density reaches 0");
        } else {
            double c1 = sc.min_density;
            c1_out = c1_out ? std::min(*c1_out, c1) : c1;
        }
        double lip = density_lipschitz(d, q, r2, resolution);
        c2_out = c2_out ? std::max(*c2_out, lip) : lip;
        if (c3_out) {
            auto sc3 = scan_neighborhood(d, q, r1, resolution);
            *c3_out = *c3_out ? std::max(**c3_out, sc3.max_density) : sc3.max_density;
        }
    };

    switch (fn.kind) {
        case functional_kind::mean:
            out.mean_var_bound = variance(d);
            break;
        case functional_kind::quantile:
            quantile_clauses(fn.alpha, "quantile", out.quantile_c1, out.quantile_c2,
                             nullptr);
            break;
        case functional_kind::maximum: {
            if (d.support_hi == HUGE_VAL) {
                out.violations.push_back("bounded upper support required for maximum");
                break;
            }
            if (d.family == dist_family::dirac) {
                out.violations.push_back("tail regularity fails: point mass at the top");
                break;
            }
            // fit c1 t^beta <= 1 - F(hi - t) <= c2 t^beta on t in (0, min(r1, span)]
            double span = d.support_hi - d.support_lo;
            double t_hi = std::min(r1, span);
            double beta;
            if (d.family == dist_family::beta_tail) {
                beta = d.a;  // exact by construction
            } else {
                // slope of ln(1-F(hi-t)) vs ln t at two scales
                double t1 = t_hi, t0 = t_hi / 16.0;
                double y1 = 1.0 - d.cdf(d.support_hi - t1);
                double y0 = 1.0 - d.cdf(d.support_hi - t0);
                beta = std::log(y1 / y0) / std::log(t1 / t0);
            }
            double c1 = HUGE_VAL, c2 = 0.0;
            const int steps = 2000;
            for (int i = 1; i <= steps; ++i) {
                double t = t_hi * i / steps;
                double ratio = (1.0 - d.cdf(d.support_hi - t)) / std::pow(t, beta);
                c1 = std::min(c1, ratio);
                c2 = std::max(c2, ratio);
            }
            if (!(c1 > 0.0) || !std::isfinite(c2)) {
                out.violations.push_back("tail regularity fails: no beta-power envelope");
            } else {
                out.max_c1 = c1;
                out.max_c2 = c2;
                out.max_beta = beta;
            }
            break;
        }
        case functional_kind::trimmed: {
            if (d.family == dist_family::dirac) {
                out.violations.push_back("F' >= c1 fails at trim quantiles: no density");
                break;
            }
            double second_moment = variance(d) +
                                   [&] {
                                       functional_spec mfn = functional_spec::mean();
                                       double mu = true_functional(d, mfn);
                                       return mu * mu;
                                   }();
            out.trimmed_c0 = second_moment;
            std::optional<double> c1, c2, c3;
            c3 = 0.0;
            quantile_clauses(fn.alpha1, "lower trim quantile", c1, c2, &c3);
            quantile_clauses(fn.alpha2, "upper trim quantile", c1, c2, &c3);
            out.trimmed_c1 = c1;
            out.trimmed_c2 = c2;
            out.trimmed_c3 = c3;
            double q1 = d.quantile(fn.alpha1), q2 = d.quantile(fn.alpha2);
            out.trimmed_c4 = std::max(std::abs(q1), std::abs(q2));
            double c5 = std::min(std::abs(q1), std::abs(q2));
            out.trimmed_c5 = c5;
            if (c5 == 0.0) {
                out.violations.push_back("trim quantile magnitude not bounded away from 0");
            }
            break;
        }
    }
    return out;
}

}  // namespace bandit
