#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bandit {

// Antisymmetric moment-matched perturbation. On [0,1] the base shape is the
// polynomial h0(y) = sum_i a_i y^i (i = 1..k+2) whose low-order moments vanish
// and whose half-line integral is 1; it is extended oddly to [-1,1]. The scaled
// bump is h(x) = sqrt(eps1) * h0(x / sqrt(eps1)) supported on
// [-sqrt(eps1), sqrt(eps1)], so that the half-line integral of h equals eps1.
struct bump_spec {
    int k = 0;
    std::vector<double> coeffs;  // a_1..a_{k+2}
    double b = 0.0;              // sum_i i*|a_i|; Lipschitz bound for h0 and h
    double eps1 = 0.0;           // squared support half-width
    double h0_max = 0.0;         // max |h0| on [0,1]
    double h0_deriv_max = 0.0;   // max |h0'| on [0,1]

    double half_width() const;          // sqrt(eps1)
    double h0(double y) const;          // odd extension, 0 outside [-1,1]
    double h0_deriv(double y) const;
    double h0_int(double y) const;      // int_0^y h0 for y in [0,1]
    double h0_first_moment(double y) const;  // int_0^y t*h0(t) dt for y in [0,1]
    double h(double x) const;
    double h_int(double x) const;       // int_{-inf}^x h
    double h_first_moment(double a, double c) const;  // int_a^c t*h(t) dt
};

enum class dist_family { uniform, dirac, gaussian, beta_tail, perturbed_uniform };

// Synthetic arm-mean distribution with closed-form cdf and exact ground truth.
// beta_tail has cdf 1-(1-x)^beta on [0,1]. perturbed_uniform is a uniform base
// on [support_lo, support_hi] plus scale * h(x - shift) from the bump.
struct dist_spec {
    dist_family family = dist_family::uniform;
    double a = 0.0, b = 0.0;  // uniform: lo/hi; dirac: a; gaussian: mu/sd; beta_tail: a=beta
    bump_spec bump;           // perturbed_uniform only
    double shift = 0.0;
    double scale = 0.0;
    double support_lo = 0.0;
    double support_hi = 0.0;

    static dist_spec uniform(double lo, double hi);
    static dist_spec dirac(double at);
    static dist_spec gaussian(double mu, double sd);
    static dist_spec beta_tail(double beta);
    static dist_spec perturbed_uniform(double lo, double hi, const bump_spec& bump,
                                       double shift, double scale);

    double cdf(double x) const;
    double quantile(double p) const;       // generalized inverse, inf-convention
    double density(double x) const;        // 0 for dirac away from the atom
    double min_density() const;            // over the support (perturbed_uniform scan)
    bool has_density() const { return family != dist_family::dirac; }
    std::string describe() const;
};

enum class functional_kind { mean, quantile, maximum, trimmed };

// Target g(F) = E[X | X in [F^{-1}(alpha1), F^{-1}(alpha2)]].
struct functional_spec {
    functional_kind kind = functional_kind::mean;
    double alpha = 0.0;  // quantile level, or trim fraction
    double alpha1 = 0.0;
    double alpha2 = 1.0;

    static functional_spec mean();                 // (0, 1)
    static functional_spec quantile(double a);     // (a, a)
    static functional_spec maximum();              // (1, 1)
    static functional_spec trimmed(double a);      // (a, 1-a)
    bool point_target() const { return alpha1 == alpha2; }
    std::string describe() const;
};

// Verified constants for the per-functional regularity conditions, plus any
// violated clauses. Fields are present only when the relevant condition was
// checked for the requested functional.
struct assumption_params {
    std::optional<double> mean_var_bound;                   // variance cap c
    std::optional<double> quantile_c1, quantile_c2;         // density floor, density Lipschitz
    std::optional<double> max_c1, max_c2, max_beta;         // tail regularity c1 t^b <= 1-F <= c2 t^b
    std::optional<double> trimmed_c0, trimmed_c1, trimmed_c2, trimmed_c3, trimmed_c4,
        trimmed_c5;
    double validity_radius = 0.0;
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

double cdf(const dist_spec& d, double x);
double quantile(const dist_spec& d, double p);

// Exact g(F) by closed form (quadrature only as a cross-check in tests).
double true_functional(const dist_spec& d, const functional_spec& fn);

// Tightest constants verified on the stated neighborhoods: radius 10*eps for
// density-floor clauses and 10*sqrt(eps) for Lipschitz clauses, intersected
// with the open support; violations reported as data.
assumption_params check_assumptions(const dist_spec& d, const functional_spec& fn,
                                    double eps);

double variance(const dist_spec& d);

}  // namespace bandit
