#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bandit/core_model.hpp"

namespace bandit {

// Uniform-grid tabulated density; values are cell-average densities (cell mass
// divided by step), cells are [lo + i*step, lo + (i+1)*step).
struct density_grid {
    double lo = 0.0;
    double step = 0.0;
    std::vector<double> values;

    double hi() const { return lo + step * static_cast<double>(values.size()); }
    double mass() const;
    double center(size_t i) const { return lo + (static_cast<double>(i) + 0.5) * step; }
};

// Exact-rational solve of the bump coefficient system
//   sum a_i = 0, sum a_i/(i+1) = 1, sum a_i/(2j+i) = 0 (j = 1..k).
std::vector<double> bump_coefficients(int k);

// Fully populated bump (coefficients, Lipschitz bound b, sup norms) at scale eps1.
bump_spec make_bump(int k, double eps1);

enum class pair_kind { mean_dirac, max_w2, max_winf, max_kl, median_pair, trimmed_pair };

// Two distributions separated in a target functional but hard to tell apart.
// Quantile functions are always available; cdfs drive the density grids.
struct construction_pair {
    pair_kind kind = pair_kind::mean_dirac;
    double eps = 0.0;
    int k = 0;          // bump order, when applicable
    double beta = 0.0;  // tail exponent, when applicable
    double alpha = 0.0; // trim fraction (trimmed_pair)
    std::function<double(double)> quantile1, quantile2;
    std::function<double(double)> cdf1, cdf2;
    double support_lo = 0.0, support_hi = 0.0;
    double gap = 0.0;           // verified separation in the pair's target functional
    double density_floor = 0.0; // bump pairs: min density of the perturbed member
    bump_spec bump;             // median/trimmed pairs
    bool has_bump = false;
    dist_spec f1, f2;           // set when the member is expressible as a dist_spec
    bool has_dist_specs = false;
    std::string note;           // construction details echoed by pair-check
};

construction_pair make_pair(pair_kind kind, double eps, int k = 1, double beta = 2.0,
                            double alpha = 0.25);

std::string pair_kind_name(pair_kind kind);

// Tabulate a cdf on [support_lo - step, support_hi + step] with cell masses
// taken from cdf differences (mass-exact; atoms land inside a cell).
density_grid grid_from_cdf(const std::function<double(double)>& cdf, double support_lo,
                           double support_hi, double step);

// Discrete convolution with a sampled, normalized Gaussian kernel; output grid
// extends the input by ceil(6 sigma / step) cells on both sides and is
// re-normalized to unit mass. Requires step <= sigma/8.
density_grid convolve_gaussian(const density_grid& p, double sigma);

// sum p ln(p/q) step over aligned grids; density floor 1e-300; cells where both
// densities are below 1e-12 are skipped.
double kl_divergence(const density_grid& p, const density_grid& q);

// (int_0^1 (Q1 - Q2)^2 du)^{1/2} by adaptive quadrature.
double wasserstein2(const std::function<double(double)>& q1,
                    const std::function<double(double)>& q2);

// sup_u |Q1(u) - Q2(u)| via dense grid plus local refinement.
double wasserstein_inf(const std::function<double(double)>& q1,
                       const std::function<double(double)>& q2);

double wasserstein2(const construction_pair& pair);
double wasserstein_inf(const construction_pair& pair);

struct sweep_point {
    double sigma = 0.0;
    double kl = 0.0;
};

// KL(F1*N(0,s^2) || F2*N(0,s^2)) for each sigma, each on a grid with
// step = min(sigma/8, sqrt(eps)/64) aligned to the pair support.
std::vector<sweep_point> sigma_sweep(const construction_pair& pair,
                                     const std::vector<double>& sigmas);

// sup |ln(p1*phi / p2*phi)| over convolution-grid cells that lie inside the
// pair's original support (the tails outside it are dominated by the tilt of
// the two Gaussian tails, not by the bump) and carry resolvable mass.
double logratio_sup(const construction_pair& pair, double sigma);

}  // namespace bandit
