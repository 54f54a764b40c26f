#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fisherbound/fisher.hpp"
#include "fisherbound/models.hpp"
#include "fisherbound/pauli.hpp"
#include "fisherbound/special_functions.hpp"

namespace fisherbound {

enum class Norm { Linf, L2 };
const char *norm_name(Norm n);
Norm parse_norm(const std::string &tag);

struct BoundCoefficients {
    int d = 1;
    double mu_R = 0.0;
    double V_H = 0.0;
    double V_R = 0.0;
    double C = kBerryEsseenC;
    // Third absolute moment of the projected score. Used where no per-coordinate value is given.
    double rho = 0.0;
    // sqrt of the relevant inverse-FIM scalar (for the upper bounds, the supremum of max_a [F^-1]_aa).
    double sigma = 1.0;
    double opnorm_inv = 1.0;

    // Optional per-coordinate values: rho_a[a] and sigma_a[a] = sqrt([F^-1]_aa).
    std::vector<double> rho_a;
    std::vector<double> sigma_a;
    // Along the top eigenvector of F^-1, for the l2 lower bound. NaN means use rho.
    double rho_top = std::numeric_limits<double>::quiet_NaN();
    double sigma_max = std::numeric_limits<double>::quiet_NaN();

    // mu_R and V_R come from a numerically maximized envelope rather than a closed form.
    bool envelope_estimated = false;
    std::string provenance = "supplied";

    // D = eta = 0 and mu_R = 0: the Gaussian-score limit.
    static BoundCoefficients idealized(int d, double sigma);
};

struct BoundResult {
    std::string id;
    double value = 0.0;
    bool applicable = false;
    std::string limiting_term;
    std::string reason;
    double epsilon = 0.0;
    double delta = 0.0;
    int d = 0;
    bool estimated_coefficients = false;
};

BoundResult theorem1_upper_linf(double eps, double delta, int d, const BoundCoefficients &c);
// Coordinate a is zero-based; sigma_a = sqrt([F^-1]_aa).
BoundResult theorem2_lower_linf(double eps, double delta, const BoundCoefficients &c, int a, double sigma_a);
// Maximum over coordinates using c.sigma_a.
BoundResult theorem2_lower_linf_max(double eps, double delta, const BoundCoefficients &c);
BoundResult theorem3_upper_l2(double eps, double delta, int d, const BoundCoefficients &c);
BoundResult theorem4_lower_l2(double eps, double delta, const BoundCoefficients &c, double sigma_max);

// eps -> 0 forms.
double corollary1_upper(double eps, double delta, int d, double sigma_sq);
double corollary2_lower(double eps, double delta, double inv_diag_a);
double corollary3_upper(double eps, double delta, int d, double sigma_sq);
double corollary4_lower(double eps, double delta, double lambda_max_inv);

double entangled_pauli_corollary_upper(int n, double eps, double delta);
double separable_pauli_corollary_lower(int n, double eps, double delta);
double entangled_l2_lower(int n, const RateVector &p, double eps, double delta);
// Smallest n in [1, n_max] from which separable_lower/entangled_upper stays above 1; 0 if none.
int separation_crossover(double eps, double delta, int n_max);

struct CoefficientOptions {
    Norm norm = Norm::Linf;
    double be_constant = kBerryEsseenC;
    // Use a model's closed-form envelope when it has one.
    bool exact_envelope = true;
    int starts = 6;
    int iterations = 60;
    uint64_t seed = 1;
};

// Envelope radius: sqrt(d) eps for linf, eps for l2.
double envelope_radius(Norm norm, int d, double eps);

// Numerical sup over the ball of (1/2)||l'''(x)||_op. A lower estimate of the supremum.
struct EnvelopeEstimate {
    double value;
    std::vector<double> argmax;
};
EnvelopeEstimate envelope_ascent(const StatModel &model, std::span<const double> theta, size_t x, double radius,
                                 const CoefficientOptions &opt = {});

BoundCoefficients estimate_coefficients(const StatModel &model, std::span<const double> theta, double eps,
                                        const CoefficientOptions &opt = {});

// Theorem 1 (or 3 for l2) maximized over a finite set of parameter points, with
// sigma taken as the largest sqrt(max_a [F^-1]_aa) over the set.
struct GridBound {
    BoundResult result;
    size_t points_used = 0;
    double sigma_sq = 0.0;
};
GridBound upper_bound_over_grid(const StatModel &model, const std::vector<std::vector<double>> &points, double eps,
                                double delta, const CoefficientOptions &opt = {});

}  // namespace fisherbound
