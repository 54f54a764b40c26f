#include "fisherbound/mle_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include <fmt/format.h>

#include "fisherbound/fisher.hpp"
#include "fisherbound/special_functions.hpp"

namespace fisherbound {

namespace {

// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
// handled exactly once; results go to caller-owned slots, so the outcome does
// not depend on scheduling.
template <typename F>
void parallel_for(uint64_t count, int threads, F body) {
    int workers = static_cast<int>(std::min<uint64_t>(static_cast<uint64_t>(std::max(threads, 1)), count));
    if (workers <= 1) {
        for (uint64_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (uint64_t i = static_cast<uint64_t>(w); i < count; i += static_cast<uint64_t>(workers)) {
                    body(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    for (auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

}  // namespace

int resolve_threads(int requested) {
    if (requested > 0) {
        return requested;
    }
    if (const char *env = std::getenv("FISHERBOUND_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) {
            return v;
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

EigenvalueVector mle_pauli_eigenvalues(std::span<const double> counts, int n) {
    if (counts.empty()) {
        throw std::invalid_argument("mle_pauli_eigenvalues: empty counts");
    }
    if (qubits_from_length(counts.size()) != n) {
        throw std::invalid_argument("mle_pauli_eigenvalues: count vector does not match n");
    }
    double m = 0.0;
    for (double c : counts) {
        if (c < 0.0) {
            throw std::invalid_argument("mle_pauli_eigenvalues: negative count");
        }
        m += c;
    }
    if (!(m > 0.0)) {
        throw std::invalid_argument("mle_pauli_eigenvalues: total count must be positive");
    }
    std::vector<double> f(counts.begin(), counts.end());
    for (double &v : f) {
        v /= m;
    }
    std::vector<double> lam = fwht(f);
    lam[0] = 1.0;
    return EigenvalueVector::unchecked(std::move(lam));
}

Estimate mle_classical(Scheme kind, const Observation &obs, int truncation) {
    switch (kind) {
        case Scheme::Bernoulli: return BernoulliModel().mle(obs);
        case Scheme::Multinomial: {
            if (obs.counts.size() < 2) {
                throw std::invalid_argument("mle_classical: multinomial needs at least two outcomes");
            }
            return MultinomialModel(static_cast<int>(obs.counts.size()) - 1).mle(obs);
        }
        case Scheme::Poisson: return PoissonModel(truncation).mle(obs);
        case Scheme::GaussianKnownVar: {
            if (obs.mean.empty()) {
                throw std::invalid_argument("mle_classical: gaussian observation lacks a mean");
            }
            return {obs.mean, false};
        }
        default: throw std::invalid_argument(std::string("mle_classical: not a classical model: ") + scheme_name(kind));
    }
}

TrialOutcome run_trial(const StatModel &model, std::span<const double> theta, uint64_t m, double eps, Norm norm,
                       Rng &stream) {
    if (m < 1) {
        throw std::invalid_argument("run_trial: m must be at least 1");
    }
    Observation obs = model.sample(theta, m, stream);
    Estimate est = model.mle(obs);
    TrialOutcome out;
    out.boundary = est.boundary;
    double linf = 0.0, l2 = 0.0;
    for (size_t i = 0; i < theta.size(); ++i) {
        double e = std::abs(est.theta[i] - theta[i]);
        if (std::isnan(e)) {
            linf = l2 = std::numeric_limits<double>::quiet_NaN();
            break;
        }
        linf = std::max(linf, e);
        l2 += e * e;
    }
    out.error_linf = linf;
    out.error_l2 = std::sqrt(l2);
    out.estimate = std::move(est.theta);
    double err = norm == Norm::Linf ? out.error_linf : out.error_l2;
    out.success = std::isinf(eps) || err <= eps;
    return out;
}

WilsonInterval wilson_interval(uint64_t successes, uint64_t trials, double level) {
    if (trials == 0) {
        throw std::invalid_argument("wilson_interval: trials must be positive");
    }
    if (successes > trials) {
        throw std::invalid_argument("wilson_interval: more successes than trials");
    }
    if (!(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("wilson_interval: level must lie in (0, 1)");
    }
    double z = gaussian_tail_inverse((1.0 - level) / 2.0);
    double n = static_cast<double>(trials);
    double ph = static_cast<double>(successes) / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (ph + z2 / (2.0 * n)) / denom;
    double half = z / denom * std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n));
    double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
    double hi = successes == trials ? 1.0 : std::min(1.0, center + half);
    return {lo, hi};
}

SuccessEstimate success_probability(const StatModel &model, std::span<const double> theta, uint64_t m, double eps,
                                    Norm norm, uint64_t trials, uint64_t seed, double level, int threads) {
    if (trials < 1) {
        throw std::invalid_argument("success_probability: trials must be at least 1");
    }
    model.check_domain(theta);
    std::vector<char> ok(trials, 0);
    parallel_for(trials, resolve_threads(threads), [&](uint64_t t) {
        Rng stream = make_stream(seed, m, t);
        ok[t] = run_trial(model, theta, m, eps, norm, stream).success ? 1 : 0;
    });
    SuccessEstimate s;
    s.m = m;
    s.trials = trials;
    s.successes = static_cast<uint64_t>(std::count(ok.begin(), ok.end(), 1));
    s.rate = static_cast<double>(s.successes) / static_cast<double>(trials);
    s.ci = wilson_interval(s.successes, trials, level);
    s.level = level;
    return s;
}

MinSamplesResult find_min_samples(const StatModel &model, std::span<const double> theta, double eps, double delta,
                                  Norm norm, const SearchOptions &opt) {
    if (!(eps > 0.0)) {
        throw std::invalid_argument("find_min_samples: epsilon must be positive");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("find_min_samples: delta must lie in (0, 1)");
    }
    if (opt.resolution < 1) {
        throw std::invalid_argument("find_min_samples: resolution must be at least 1");
    }
    MinSamplesResult res;
    res.trials_per_probe = opt.trials;
    res.seed = opt.seed;
    res.resolution = opt.resolution;
    const double target = 1.0 - delta;
    auto probe = [&](uint64_t m) {
        SuccessEstimate s = success_probability(model, theta, m, eps, norm, opt.trials, opt.seed, opt.level, opt.threads);
        res.probes.push_back(s);
        return s;
    };

    uint64_t lo = 0;
    uint64_t hi = 1;
    SuccessEstimate at_hi = probe(hi);
    while (at_hi.ci.lo < target) {
        lo = hi;
        if (hi > opt.m_max / 2) {
            res.bracket_lo = lo;
            throw BudgetExceeded(fmt::format("criterion unreachable at budget: M_max = {}", opt.m_max), res);
        }
        hi *= 2;
        at_hi = probe(hi);
    }
    while (hi - lo > opt.resolution) {
        uint64_t mid = lo + (hi - lo) / 2;
        SuccessEstimate s = probe(mid);
        if (s.ci.lo >= target) {
            hi = mid;
            at_hi = s;
        } else {
            lo = mid;
        }
    }
    res.m_star = hi;
    res.bracket_lo = lo;
    res.bracket_hi = hi;
    res.at_m_star = at_hi;

    for (const SuccessEstimate &s : res.probes) {
        if (s.m > hi && s.ci.lo < target) {
            res.monotonicity_warnings.push_back(
                fmt::format("M={} above m_star fails the criterion (rate {:.4f})", s.m, s.rate));
        }
    }
    res.at_double = probe(2 * hi);
    res.probes.pop_back();
    if (res.at_double.ci.lo < target) {
        res.monotonicity_warnings.push_back(
            fmt::format("stability probe M={} fails the criterion (rate {:.4f})", 2 * hi, res.at_double.rate));
    }
    res.hard_violation = res.at_double.ci.hi < target;
    return res;
}

std::vector<MseRow> mse_vs_crb(const StatModel &model, std::span<const double> theta, uint64_t m, uint64_t trials,
                               uint64_t seed, int threads) {
    if (m < 1 || trials < 1) {
        throw std::invalid_argument("mse_vs_crb: m and trials must be at least 1");
    }
    FisherMatrix f = fim(model, theta);
    int d = model.dim();
    std::vector<std::vector<double>> est(trials);
    parallel_for(trials, resolve_threads(threads), [&](uint64_t t) {
        Rng stream = make_stream(seed, m, t);
        est[t] = model.mle(model.sample(theta, m, stream)).theta;
    });
    std::vector<MseRow> rows(d);
    Eigen::VectorXd inv_diag = f.inverse_diagonal();
    for (int a = 0; a < d; ++a) {
        double se = 0.0, bias = 0.0;
        for (uint64_t t = 0; t < trials; ++t) {
            double e = est[t][a] - theta[a];
            se += e * e;
            bias += e;
        }
        double tn = static_cast<double>(trials);
        rows[a].mse = se / tn;
        rows[a].bias = bias / tn;
        rows[a].crb = inv_diag[a] / static_cast<double>(m);
        rows[a].ratio = rows[a].mse / rows[a].crb;
    }
    return rows;
}

}  // namespace fisherbound
