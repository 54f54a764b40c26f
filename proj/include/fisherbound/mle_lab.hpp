#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fisherbound/bounds.hpp"
#include "fisherbound/models.hpp"
#include "fisherbound/pauli.hpp"

namespace fisherbound {

// Worker count: explicit request if positive, else FISHERBOUND_THREADS if positive, else hardware concurrency.
int resolve_threads(int requested = 0);

// Counts may be fractional (e.g. exact probabilities).
EigenvalueVector mle_pauli_eigenvalues(std::span<const double> counts, int n);
Estimate mle_classical(Scheme kind, const Observation &obs, int truncation = 20);

struct TrialOutcome {
    std::vector<double> estimate;
    double error_linf = 0.0;
    double error_l2 = 0.0;
    bool success = false;
    bool boundary = false;
};

// eps = +inf is the vacuous criterion and always succeeds.
TrialOutcome run_trial(const StatModel &model, std::span<const double> theta, uint64_t m, double eps, Norm norm,
                       Rng &stream);

struct WilsonInterval {
    double lo;
    double hi;
};
WilsonInterval wilson_interval(uint64_t successes, uint64_t trials, double level = 0.95);

struct SuccessEstimate {
    uint64_t m = 0;
    uint64_t successes = 0;
    uint64_t trials = 0;
    double rate = 0.0;
    WilsonInterval ci{0.0, 1.0};
    double level = 0.95;
};

// Trial t at sample size m uses make_stream(seed, m, t).
SuccessEstimate success_probability(const StatModel &model, std::span<const double> theta, uint64_t m, double eps,
                                    Norm norm, uint64_t trials, uint64_t seed, double level = 0.95, int threads = 0);

struct SearchOptions {
    uint64_t trials = 2000;
    uint64_t seed = 2026;
    uint64_t resolution = 1;
    uint64_t m_max = uint64_t{1} << 22;
    double level = 0.95;
    int threads = 0;
};

struct MinSamplesResult {
    uint64_t m_star = 0;
    SuccessEstimate at_m_star;
    uint64_t bracket_lo = 0;  // last failing M, 0 if M = 1 already passes
    uint64_t bracket_hi = 0;  // first passing M, equals m_star
    uint64_t trials_per_probe = 0;
    uint64_t seed = 0;
    uint64_t resolution = 1;
    std::vector<SuccessEstimate> probes;
    // Stability probe at 2 m_star.
    SuccessEstimate at_double;
    std::vector<std::string> monotonicity_warnings;
    // The 2 m_star probe fails outright (its upper Wilson bound is below 1 - delta).
    bool hard_violation = false;
};

class BudgetExceeded : public std::runtime_error {
  public:
    BudgetExceeded(const std::string &what, MinSamplesResult partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const MinSamplesResult &partial() const { return partial_; }

  private:
    MinSamplesResult partial_;
};

// Doubling from M = 1 until the lower Wilson bound reaches 1 - delta, then bisection.
MinSamplesResult find_min_samples(const StatModel &model, std::span<const double> theta, double eps, double delta,
                                  Norm norm, const SearchOptions &opt = {});

struct MseRow {
    double mse;
    double crb;    // [F^-1]_aa / m
    double ratio;  // mse / crb
    double bias;   // mean estimate minus truth
};
std::vector<MseRow> mse_vs_crb(const StatModel &model, std::span<const double> theta, uint64_t m, uint64_t trials,
                               uint64_t seed, int threads = 0);

}  // namespace fisherbound
