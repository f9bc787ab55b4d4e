#include "bandit/lowerbound.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "bandit/errors.hpp"
#include "bandit/math_util.hpp"

namespace bandit {

using boost::multiprecision::cpp_rational;

double density_grid::mass() const {
    double total = 0.0;
    for (double v : values) total += v;
    return total * step;
}

std::vector<double> bump_coefficients(int k) {
    assert(k >= 1);
    int dim = k + 2;
    // rows: sum a_i = 0; sum a_i/(i+1) = 1; sum a_i/(2j+i) = 0 for j = 1..k
    std::vector<std::vector<cpp_rational>> aug(
        static_cast<size_t>(dim), std::vector<cpp_rational>(static_cast<size_t>(dim + 1), 0));
    for (int i = 1; i <= dim; ++i) {
        aug[0][static_cast<size_t>(i - 1)] = 1;
        aug[1][static_cast<size_t>(i - 1)] = cpp_rational(1, i + 1);
        for (int j = 1; j <= k; ++j) {
            aug[static_cast<size_t>(j + 1)][static_cast<size_t>(i - 1)] =
                cpp_rational(1, 2 * j + i);
        }
    }
    aug[1][static_cast<size_t>(dim)] = 1;

    for (int col = 0; col < dim; ++col) {
        int pivot = -1;
        for (int row = col; row < dim; ++row) {
            if (aug[static_cast<size_t>(row)][static_cast<size_t>(col)] != 0) {
                pivot = row;
                break;
            }
        }
        if (pivot < 0) throw singular_system("bump coefficient system is singular");
        std::swap(aug[static_cast<size_t>(col)], aug[static_cast<size_t>(pivot)]);
        cpp_rational lead = aug[static_cast<size_t>(col)][static_cast<size_t>(col)];
        for (int c = col; c <= dim; ++c) aug[static_cast<size_t>(col)][static_cast<size_t>(c)] /= lead;
        for (int row = 0; row < dim; ++row) {
            if (row == col) continue;
            cpp_rational f = aug[static_cast<size_t>(row)][static_cast<size_t>(col)];
            if (f == 0) continue;
            for (int c = col; c <= dim; ++c) {
                aug[static_cast<size_t>(row)][static_cast<size_t>(c)] -=
                    f * aug[static_cast<size_t>(col)][static_cast<size_t>(c)];
            }
        }
    }
    std::vector<double> out(static_cast<size_t>(dim));
    for (int i = 0; i < dim; ++i) {
        out[static_cast<size_t>(i)] =
            static_cast<double>(aug[static_cast<size_t>(i)][static_cast<size_t>(dim)]);
    }
    return out;
}

namespace {

// max of |f| on [0,1]: dense scan plus golden-section polish around the argmax
double sup_abs_on_unit(const std::function<double(double)>& f) {
    const int steps = 200000;
    double best = 0.0, at = 0.0;
    for (int i = 0; i <= steps; ++i) {
        double y = static_cast<double>(i) / steps;
        double v = std::abs(f(y));
        if (v > best) {
            best = v;
            at = y;
        }
    }
    double lo = std::max(0.0, at - 2.0 / steps), hi = std::min(1.0, at + 2.0 / steps);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = std::abs(f(x1)), f2 = std::abs(f(x2));
    for (int it = 0; it < 80; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = std::abs(f(x2));
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = std::abs(f(x1));
        }
    }
    return std::max({best, f1, f2});
}

}  // namespace

bump_spec make_bump(int k, double eps1) {
    assert(k >= 1 && eps1 > 0.0);
    bump_spec b;
    b.k = k;
    b.eps1 = eps1;
    b.coeffs = bump_coefficients(k);
    double lip = 0.0;
    for (size_t i = 0; i < b.coeffs.size(); ++i) {
        lip += static_cast<double>(i + 1) * std::abs(b.coeffs[i]);
    }
    b.b = lip;
    b.h0_max = sup_abs_on_unit([&](double y) { return b.h0(y); });
    b.h0_deriv_max = sup_abs_on_unit([&](double y) { return b.h0_deriv(y); });
    return b;
}

std::string pair_kind_name(pair_kind kind) {
    switch (kind) {
        case pair_kind::mean_dirac: return "mean_dirac";
        case pair_kind::max_w2: return "max_w2";
        case pair_kind::max_winf: return "max_winf";
        case pair_kind::max_kl: return "max_kl";
        case pair_kind::median_pair: return "median_pair";
        case pair_kind::trimmed_pair: return "trimmed_pair";
    }
    return "unknown";
}

namespace {

construction_pair make_mean_dirac(double eps) {
    construction_pair p;
    p.kind = pair_kind::mean_dirac;
    p.eps = eps;
    double lo = 0.5 - eps, hi = 0.5 + eps;
    p.f1 = dist_spec::dirac(lo);
    p.f2 = dist_spec::dirac(hi);
    p.has_dist_specs = true;
    p.quantile1 = [lo](double) { return lo; };
    p.quantile2 = [hi](double) { return hi; };
    p.cdf1 = [d = p.f1](double x) { return d.cdf(x); };
    p.cdf2 = [d = p.f2](double x) { return d.cdf(x); };
    p.support_lo = lo;
    p.support_hi = hi;
    p.gap = 2.0 * eps;
    p.note = "two point masses 2*eps apart; indistinguishable once noise drowns the offset";
    return p;
}

// rescaled cubic taper used by the W2-cheap top modification:
// u -> u + eps*(1-t)^2(1+2t) with t = u/(2*eps) on [0, 2*eps], identity beyond;
// derivative 1 - 3t(1-t) stays in [1/4, 1]
double taper_g1(double u, double eps) {
    if (u >= 2.0 * eps) return u;
    double t = u / (2.0 * eps);
    return u + eps * (1.0 - t) * (1.0 - t) * (1.0 + 2.0 * t);
}

double taper_g1_inv(double v, double eps) {
    if (v >= 2.0 * eps) return v;
    double lo = 0.0, hi = 2.0 * eps;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (taper_g1(mid, eps) >= v) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

construction_pair make_max_pair(pair_kind kind, double eps, double beta) {
    assert(beta > 0.0);
    construction_pair p;
    p.kind = kind;
    p.eps = eps;
    p.beta = beta;
    p.f1 = dist_spec::beta_tail(beta);
    p.quantile1 = [d = p.f1](double s) { return d.quantile(s); };
    p.cdf1 = [d = p.f1](double x) { return d.cdf(x); };
    p.support_lo = 0.0;
    p.support_hi = 1.0;
    p.gap = eps;
    switch (kind) {
        case pair_kind::max_winf: {
            p.quantile2 = [d = p.f1, eps](double s) { return d.quantile(s) + eps; };
            p.cdf2 = [d = p.f1, eps](double x) { return d.cdf(x - eps); };
            p.support_hi = 1.0 + eps;
            p.note = "whole distribution shifted up by eps: the smallest W-inf move that "
                     "raises the maximum by eps";
            break;
        }
        case pair_kind::max_w2: {
            p.quantile2 = [d = p.f1, eps](double s) {
                double u = 1.0 - d.quantile(s);  // (1-s)^(1/beta)
                return 1.0 - taper_g1(u, eps);
            };
            p.cdf2 = [beta, eps](double x) {
                if (x >= 1.0 - eps) return 1.0;
                if (x <= 0.0) return 0.0;
                double u = taper_g1_inv(1.0 - x, eps);
                return 1.0 - std::pow(u, beta);
            };
            p.note = "top tapered down by a cubic ramp of width 2*eps in quantile space: "
                     "maximum drops by eps while W2 only moves the thin upper tail";
            break;
        }
        case pair_kind::max_kl: {
            double z = 1.0 - std::pow(eps, beta);
            p.quantile2 = [beta, z](double s) {
                return 1.0 - std::pow(1.0 - s * z, 1.0 / beta);
            };
            p.cdf2 = [beta, z](double x) {
                if (x <= 0.0) return 0.0;
                if (x >= 1.0) return 1.0;
                return std::min(1.0, (1.0 - std::pow(1.0 - x, beta)) / z);
            };
            p.note = "upper eps of the support truncated and renormalized: the density "
                     "ratio is constant, so KL is exactly -ln(1-eps^beta)";
            break;
        }
        default: assert(false);
    }
    return p;
}

construction_pair make_median_pair(double eps, int k) {
    construction_pair p;
    p.kind = pair_kind::median_pair;
    p.eps = eps;
    p.k = k;
    bump_spec probe = make_bump(k, 1.0);
    double H = probe.h0_max;
    // width policy: the bump's half-width w and height are tied so the cdf dent
    // at the center is exactly eps while the density never leaves its floor.
    double w = std::min(1.0, std::sqrt(eps) * H);
    double s = eps / (w * w);
    double dip = eps * H / w;
    double floor = 0.5 - dip;
    double required = (w < 1.0) ? 0.25 : 0.1;
    if (floor < required) {
        throw eps_too_large("median pair: perturbation would push the density below its floor");
    }
    p.bump = make_bump(k, w * w);
    p.has_bump = true;
    p.f1 = dist_spec::uniform(-1.0, 1.0);
    p.f2 = dist_spec::perturbed_uniform(-1.0, 1.0, p.bump, 0.0, s);
    p.has_dist_specs = true;
    p.quantile1 = [d = p.f1](double u) { return d.quantile(u); };
    p.quantile2 = [d = p.f2](double u) { return d.quantile(u); };
    p.cdf1 = [d = p.f1](double x) { return d.cdf(x); };
    p.cdf2 = [d = p.f2](double x) { return d.cdf(x); };
    p.support_lo = -1.0;
    p.support_hi = 1.0;
    p.density_floor = p.f2.min_density();
    p.gap = p.f2.quantile(0.5);  // median of member 1 is 0
    std::ostringstream os;
    os.precision(6);
    os << "uniform on [-1,1] vs the same plus a " << (k + 2)
       << "-term polynomial dent (half-width " << w << ", scale " << s
       << "): medians separated by " << p.gap << " with density floor "
       << p.density_floor;
    p.note = os.str();
    return p;
}

construction_pair make_trimmed_pair(double eps, int k, double alpha) {
    assert(alpha > 0.0 && alpha < 0.5);
    construction_pair p;
    p.kind = pair_kind::trimmed_pair;
    p.eps = eps;
    p.k = k;
    p.alpha = alpha;
    bump_spec probe = make_bump(k, 1.0);
    double H = probe.h0_max;
    double bprime = std::max(H * H, 4.0);
    double eps1 = 4.0 * bprime * eps;
    double half_width = std::sqrt(eps1);
    if (half_width > std::min(alpha, 1.0 - 2.0 * alpha)) {
        throw eps_too_large("trimmed pair: bump support would cross a trim quantile");
    }
    p.bump = make_bump(k, eps1);
    p.has_bump = true;
    p.f1 = dist_spec::uniform(1.0, 2.0);
    p.f2 = dist_spec::perturbed_uniform(1.0, 2.0, p.bump, 1.0 + alpha, 1.0 / bprime);
    p.has_dist_specs = true;
    p.quantile1 = [d = p.f1](double u) { return d.quantile(u); };
    p.quantile2 = [d = p.f2](double u) { return d.quantile(u); };
    p.cdf1 = [d = p.f1](double x) { return d.cdf(x); };
    p.cdf2 = [d = p.f2](double x) { return d.cdf(x); };
    p.support_lo = 1.0;
    p.support_hi = 2.0;
    p.density_floor = p.f2.min_density();
    functional_spec fn = functional_spec::trimmed(alpha);
    p.gap = std::abs(true_functional(p.f2, fn) - true_functional(p.f1, fn));
    std::ostringstream os;
    os.precision(6);
    os << "uniform on [1,2] dented at the lower trim quantile: the quantile itself "
          "moves by about "
       << 4.0 * eps << " but the trimmed mean only by " << p.gap
       << " (second-order in eps), since the dent's mass balance cancels the "
          "first-order term";
    p.note = os.str();
    return p;
}

}  // namespace

construction_pair make_pair(pair_kind kind, double eps, int k, double beta, double alpha) {
    if (!(eps > 0.0 && eps < 0.5)) {
        throw config_error("make_pair: eps must lie in (0, 0.5)");
    }
    construction_pair p;
    switch (kind) {
        case pair_kind::mean_dirac: p = make_mean_dirac(eps); break;
        case pair_kind::max_w2:
        case pair_kind::max_winf:
        case pair_kind::max_kl: p = make_max_pair(kind, eps, beta); break;
        case pair_kind::median_pair: p = make_median_pair(eps, k); break;
        case pair_kind::trimmed_pair: p = make_trimmed_pair(eps, k, alpha); break;
    }
    // every construction except the trimmed one separates its functional by at
    // least eps; the trimmed dent only moves the trimmed mean at second order,
    // so its recorded gap is the honest (much smaller) value
    if (kind != pair_kind::trimmed_pair) {
        assert(p.gap >= eps * (1.0 - 1e-12));
    }
    return p;
}

density_grid grid_from_cdf(const std::function<double(double)>& cdf, double support_lo,
                           double support_hi, double step) {
    assert(support_hi > support_lo && step > 0.0);
    auto inner = static_cast<size_t>(
        std::max<int64_t>(1, static_cast<int64_t>(std::ceil((support_hi - support_lo) / step - 1e-9))));
    double adj = (support_hi - support_lo) / static_cast<double>(inner);
    density_grid g;
    g.step = adj;
    g.lo = support_lo - adj;
    g.values.resize(inner + 2);
    double prev = cdf(g.lo);
    for (size_t i = 0; i < g.values.size(); ++i) {
        double edge = g.lo + adj * static_cast<double>(i + 1);
        double next = cdf(edge);
        g.values[i] = std::max(0.0, next - prev) / adj;
        prev = next;
    }
    return g;
}

density_grid convolve_gaussian(const density_grid& p, double sigma) {
    assert(sigma > 0.0);
    if (p.step > sigma / 8.0 * (1.0 + 1e-12)) {
        throw grid_too_coarse("convolve_gaussian: step must be at most sigma/8");
    }
    auto K = static_cast<int64_t>(std::ceil(6.0 * sigma / p.step));
    std::vector<double> kernel(static_cast<size_t>(2 * K + 1));
    double ksum = 0.0;
    for (int64_t j = -K; j <= K; ++j) {
        double w = normal_pdf(static_cast<double>(j) * p.step / sigma);
        kernel[static_cast<size_t>(j + K)] = w;
        ksum += w;
    }
    for (double& w : kernel) w /= ksum;

    density_grid out;
    out.step = p.step;
    out.lo = p.lo - static_cast<double>(K) * p.step;
    out.values.assign(p.values.size() + static_cast<size_t>(2 * K), 0.0);
    auto n = static_cast<int64_t>(p.values.size());
    for (int64_t i = 0; i < n; ++i) {
        double v = p.values[static_cast<size_t>(i)];
        if (v == 0.0) continue;
        for (int64_t j = -K; j <= K; ++j) {
            out.values[static_cast<size_t>(i + j + K)] += v * kernel[static_cast<size_t>(j + K)];
        }
    }
    double total = out.mass();
    assert(total > 0.0);
    for (double& v : out.values) v /= total;
    return out;
}

double kl_divergence(const density_grid& p, const density_grid& q) {
    if (p.values.size() != q.values.size() ||
        std::abs(p.lo - q.lo) > 1e-9 * std::max(1.0, std::abs(p.lo)) ||
        std::abs(p.step - q.step) > 1e-12 * p.step) {
        throw misaligned_grids("kl_divergence: grids must share lo, step and size");
    }
    const double floor = 1e-300, skip = 1e-12;
    double kl = 0.0;
    for (size_t i = 0; i < p.values.size(); ++i) {
        double a = p.values[i], b = q.values[i];
        if (a < skip && b < skip) continue;
        kl += a * std::log(std::max(a, floor) / std::max(b, floor));
    }
    return kl * p.step;
}

double wasserstein2(const std::function<double(double)>& q1,
                    const std::function<double(double)>& q2) {
    auto sq = [&](double u) {
        double d = q1(u) - q2(u);
        return d * d;
    };
    double v = integrate(sq, 0.0, 1.0, 1e-14, 48);
    return std::sqrt(std::max(0.0, v));
}

double wasserstein_inf(const std::function<double(double)>& q1,
                       const std::function<double(double)>& q2) {
    auto gap = [&](double u) { return std::abs(q1(u) - q2(u)); };
    const int steps = 200000;
    double best = 0.0, at = 0.0;
    for (int i = 0; i <= steps; ++i) {
        double u = static_cast<double>(i) / steps;
        double v = gap(u);
        if (v > best) {
            best = v;
            at = u;
        }
    }
    double lo = std::max(0.0, at - 2.0 / steps), hi = std::min(1.0, at + 2.0 / steps);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = gap(x1), f2 = gap(x2);
    for (int it = 0; it < 80; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = gap(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = gap(x1);
        }
    }
    return std::max({best, f1, f2});
}

double wasserstein2(const construction_pair& pair) {
    return wasserstein2(pair.quantile1, pair.quantile2);
}

double wasserstein_inf(const construction_pair& pair) {
    return wasserstein_inf(pair.quantile1, pair.quantile2);
}

namespace {

std::pair<density_grid, density_grid> convolved_members(const construction_pair& pair,
                                                        double sigma) {
    double step = std::min(sigma / 8.0, std::sqrt(pair.eps) / 64.0);
    density_grid g1 = grid_from_cdf(pair.cdf1, pair.support_lo, pair.support_hi, step);
    density_grid g2 = grid_from_cdf(pair.cdf2, pair.support_lo, pair.support_hi, step);
    return {convolve_gaussian(g1, sigma), convolve_gaussian(g2, sigma)};
}

}  // namespace

std::vector<sweep_point> sigma_sweep(const construction_pair& pair,
                                     const std::vector<double>& sigmas) {
    std::vector<sweep_point> out;
    out.reserve(sigmas.size());
    for (double sigma : sigmas) {
        auto [c1, c2] = convolved_members(pair, sigma);
        out.push_back(sweep_point{sigma, kl_divergence(c1, c2)});
    }
    return out;
}

double logratio_sup(const construction_pair& pair, double sigma) {
    if (!pair.has_bump) {
        throw config_error("logratio_sup: needs a bump-perturbed pair");
    }
    auto [c1, c2] = convolved_members(pair, sigma);
    const double skip = 1e-12;
    double sup = 0.0;
    for (size_t i = 0; i < c1.values.size(); ++i) {
        double x = c1.center(i);
        if (x < pair.support_lo || x > pair.support_hi) continue;
        double a = c1.values[i], b = c2.values[i];
        if (a < skip || b < skip) continue;
        sup = std::max(sup, std::abs(std::log(a / b)));
    }
    return sup;
}

}  // namespace bandit
