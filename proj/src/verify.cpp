#include "fisherbound/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "fisherbound/bounds.hpp"
#include "fisherbound/fisher.hpp"
#include "fisherbound/mle_lab.hpp"
#include "fisherbound/models.hpp"
#include "fisherbound/pauli.hpp"
#include "fisherbound/special_functions.hpp"

namespace fisherbound {

namespace {

using Transform = std::function<std::vector<double>(std::span<const double>)>;

struct Failure {
    std::string what;
};

void require(bool cond, const std::string &what) {
    if (!cond) {
        throw Failure{what};
    }
}

std::vector<double> naive_wht(std::span<const double> v, int n) {
    std::vector<double> w(v.size(), 0.0);
    for (uint64_t b = 0; b < v.size(); ++b) {
        for (uint64_t a = 0; a < v.size(); ++a) {
            w[b] += symplectic_product(a, b, n) ? -v[a] : v[a];
        }
    }
    return w;
}

std::vector<double> random_vector(size_t len, Rng &rng) {
    std::normal_distribution<double> normal;
    std::vector<double> v(len);
    for (double &x : v) {
        x = normal(rng);
    }
    return v;
}

std::vector<std::unique_ptr<StatModel>> model_zoo() {
    std::vector<std::unique_ptr<StatModel>> zoo;
    zoo.push_back(entangled_pauli_model(1));
    zoo.push_back(entangled_pauli_model(2));
    zoo.push_back(two_copy_bell_model(1));
    zoo.push_back(separable_pauli_model(1, product_probe({{0.5, 0.5, 0.5}})));
    zoo.push_back(classical_model(Scheme::Bernoulli));
    ClassicalParams multi, poisson;
    multi.d = 3;
    poisson.truncation = 30;
    zoo.push_back(classical_model(Scheme::Multinomial, multi));
    zoo.push_back(classical_model(Scheme::Poisson, poisson));
    return zoo;
}

void check_lambert_residual() {
    double lo = -1.0 / std::numbers::e + 1e-9;
    for (int i = 0; i <= 400; ++i) {
        double t = i / 400.0;
        // Dense near the branch point, log-spaced above zero.
        double x = t < 0.25 ? lo + (0.0 - lo) * std::pow(t / 0.25, 3) : std::pow(10.0, -12.0 + 24.0 * (t - 0.25) / 0.75);
        double w = lambert_w0(x);
        double res = std::abs(w * std::exp(w) - x);
        require(res <= 1e-12 * std::max(1.0, std::abs(x)), fmt::format("residual {:.3g} at x={:.17g}", res, x));
        require(w >= -1.0, "principal branch below -1");
    }
    require(std::abs(lambert_w0(std::numbers::e) - 1.0) <= 1e-12, "W0(e) != 1");
}

void check_lambert_log_bound() {
    for (double x = std::numbers::e; x < 1e12; x *= 1.7) {
        require(lambert_w0(x) <= std::log(x), fmt::format("W0({}) > log", x));
    }
}

void check_lambert_concavity(Rng &rng) {
    std::uniform_real_distribution<double> u(-3.0, 8.0), t01(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        double x = std::pow(10.0, u(rng)), y = std::pow(10.0, u(rng)), t = t01(rng);
        double lhs = lambert_w0(t * x + (1.0 - t) * y);
        double rhs = t * lambert_w0(x) + (1.0 - t) * lambert_w0(y);
        require(lhs >= rhs - 1e-10, fmt::format("concavity fails at x={}, y={}, t={}", x, y, t));
    }
}

void check_mills() {
    for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
        TailBoundPair b = mills_bounds(x);
        double q = gaussian_tail(x);
        require(b.lower < q && q < b.upper, fmt::format("Mills bracket fails at {}", x));
    }
}

void check_tail_monotone() {
    // Below x = -5 neighbouring values of 1 - Phi round to the same double.
    double prev = 1.0;
    for (int i = 0; i <= 3000; ++i) {
        double x = -10.0 + 0.01 * i;
        double q = gaussian_tail(x);
        bool ok = x < -5.0 ? q <= prev : q < prev;
        require(ok && q > 0.0, fmt::format("tail not decreasing at {}", x));
        prev = q;
    }
}

void check_fwht_involution(const Transform &t, Rng &rng) {
    for (int n = 1; n <= 3; ++n) {
        for (int s = 0; s < 10; ++s) {
            std::vector<double> v = random_vector(size_t{1} << (2 * n), rng);
            std::vector<double> w = t(t(v));
            double k = static_cast<double>(v.size());
            for (size_t i = 0; i < v.size(); ++i) {
                require(std::abs(w[i] - k * v[i]) <= 1e-12 * k * (1.0 + std::abs(v[i])),
                        fmt::format("fwht(fwht(v)) != 4^n v at n={}", n));
            }
        }
    }
}

void check_fwht_naive(const Transform &t, Rng &rng) {
    for (int n = 1; n <= 3; ++n) {
        for (int s = 0; s < 10; ++s) {
            std::vector<double> v = random_vector(size_t{1} << (2 * n), rng);
            std::vector<double> a = t(v), b = naive_wht(v, n);
            for (size_t i = 0; i < v.size(); ++i) {
                require(std::abs(a[i] - b[i]) <= 1e-12 * static_cast<double>(v.size()),
                        fmt::format("fwht differs from the naive sum at n={}", n));
            }
        }
    }
}

void check_pauli_matrices() {
    for (int n = 1; n <= 2; ++n) {
        uint64_t k = uint64_t{1} << (2 * n);
        double dim = std::ldexp(1.0, n);
        std::vector<Eigen::MatrixXcd> ps;
        for (uint64_t a = 0; a < k; ++a) {
            ps.push_back(pauli_matrix(PauliIndex(a, n)));
        }
        for (uint64_t a = 0; a < k; ++a) {
            for (uint64_t b = 0; b < k; ++b) {
                std::complex<double> tr = (ps[a] * ps[b]).trace();
                require(std::abs(tr - std::complex<double>(a == b ? dim : 0.0)) < 1e-12, "Tr[P_a P_b] != 2^n delta");
                double sign = symplectic_product(a, b, n) ? -1.0 : 1.0;
                require((ps[a] * ps[b] - sign * ps[b] * ps[a]).cwiseAbs().maxCoeff() < 1e-12,
                        "symplectic product disagrees with matrix commutation");
            }
        }
    }
}

void check_rates_roundtrip(Rng &rng) {
    for (int n = 1; n <= 3; ++n) {
        for (int s = 0; s < 10; ++s) {
            std::vector<double> lam = random_channel_eigenvalues(n, rng);
            lam.insert(lam.begin(), 1.0);
            RateVector p = eigenvalues_to_rates(EigenvalueVector(lam));
            EigenvalueVector back = rates_to_eigenvalues(p);
            for (size_t i = 0; i < lam.size(); ++i) {
                require(std::abs(back[i] - lam[i]) <= 1e-12, "rate/eigenvalue roundtrip drift");
            }
        }
    }
}

void check_normalization(Rng &rng) {
    for (const auto &m : model_zoo()) {
        for (int i = 0; i < 100; ++i) {
            std::vector<double> th = random_interior_point(*m, rng);
            std::vector<double> p = m->probabilities(th);
            double s = 0.0;
            for (double v : p) {
                require(v >= 0.0, m->name() + ": negative probability");
                s += v;
            }
            require(std::abs(s - 1.0) <= 1e-10, m->name() + ": probabilities do not sum to 1");
        }
    }
}

void check_score_and_information(Rng &rng) {
    for (const auto &m : model_zoo()) {
        for (int i = 0; i < 20; ++i) {
            std::vector<double> th = random_interior_point(*m, rng, 1e-2);
            std::vector<double> p = m->probabilities(th);
            int d = m->dim();
            Eigen::VectorXd es = Eigen::VectorXd::Zero(d);
            Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(d, d), hess = Eigen::MatrixXd::Zero(d, d);
            for (size_t x = 0; x < p.size(); ++x) {
                Eigen::VectorXd s = m->score(th, x);
                es += p[x] * s;
                outer += p[x] * s * s.transpose();
                hess += p[x] * m->hessian(th, x);
            }
            require(es.cwiseAbs().maxCoeff() <= 1e-8, m->name() + ": E[score] != 0");
            require((outer + hess).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, outer.cwiseAbs().maxCoeff()),
                    m->name() + ": E[s s^T] != -E[hessian]");
        }
    }
}

void check_finite_differences(Rng &rng) {
    for (const auto &m : model_zoo()) {
        if (m->dim() > 8) {
            continue;
        }
        for (int i = 0; i < 5; ++i) {
            std::vector<double> th = random_interior_point(*m, rng, 5e-2);
            int d = m->dim();
            for (size_t x = 0; x < m->num_outcomes(); ++x) {
                Eigen::MatrixXd h = m->hessian(th, x);
                Tensor3 t = m->third(th, x);
                Eigen::VectorXd s = m->score(th, x);
                for (int j = 0; j < d; ++j) {
                    double step = 1e-5;
                    std::vector<double> tp = th, tm = th;
                    tp[j] += step;
                    tm[j] -= step;
                    double lp = std::log(m->probabilities(tp)[x]), lm = std::log(m->probabilities(tm)[x]);
                    double fd = (lp - lm) / (2 * step);
                    require(std::abs(fd - s[j]) <= 1e-6 * std::max(1.0, std::abs(s[j])), m->name() + ": score vs FD");
                    Eigen::VectorXd hs = (m->score(tp, x) - m->score(tm, x)) / (2 * step);
                    for (int k = 0; k < d; ++k) {
                        require(std::abs(hs[k] - h(j, k)) <= 1e-6 * std::max(1.0, std::abs(h(j, k))),
                                m->name() + ": hessian vs FD");
                    }
                    Eigen::MatrixXd ht = (m->hessian(tp, x) - m->hessian(tm, x)) / (2 * step);
                    for (int k = 0; k < d; ++k) {
                        for (int l = 0; l < d; ++l) {
                            require(std::abs(ht(k, l) - t(j, k, l)) <= 1e-6 * std::max(1.0, std::abs(t(j, k, l))),
                                    m->name() + ": third derivative vs FD");
                        }
                    }
                }
            }
        }
    }
}

void check_shared_formula(Rng &rng) {
    for (int n = 1; n <= 2; ++n) {
        EntangledPauliModel e(n);
        TwoCopyBellModel b(n);
        for (int i = 0; i < 20; ++i) {
            std::vector<double> s = random_real_state_moments_sq(n, rng);
            std::vector<double> pe = e.probabilities(s), pb = b.probabilities(s);
            require(pe == pb, "two-copy and entangled distributions differ at lambda = s");
        }
    }
}

void check_entangled_inverse_diag(Rng &rng) {
    for (int n = 1; n <= 2; ++n) {
        EntangledPauliModel m(n);
        for (int i = 0; i < 50; ++i) {
            std::vector<double> lam = random_channel_eigenvalues(n, rng);
            FisherMatrix f = fim(m, lam);
            Eigen::VectorXd inv = f.inverse_diagonal();
            for (int a = 0; a < m.dim(); ++a) {
                require(std::abs(inv[a] - (1.0 - lam[a] * lam[a])) <= 1e-8, "[F^-1]_aa != 1 - lambda_a^2");
            }
        }
    }
}

void check_penrose(Rng &rng) {
    std::uniform_int_distribution<int> dim(1, 8);
    std::normal_distribution<double> normal;
    for (int i = 0; i < 100; ++i) {
        int d = dim(rng);
        std::uniform_int_distribution<int> rk(0, d);
        int r = rk(rng);
        Eigen::MatrixXd g(d, std::max(r, 1));
        for (Eigen::Index a = 0; a < g.size(); ++a) {
            g.data()[a] = r == 0 ? 0.0 : normal(rng);
        }
        FisherMatrix f(g * g.transpose());
        const Eigen::MatrixXd &a = f.matrix();
        const Eigen::MatrixXd &p = f.inverse();
        double s = std::max(1.0, a.cwiseAbs().maxCoeff()) * std::max(1.0, p.cwiseAbs().maxCoeff());
        require((a * p * a - a).cwiseAbs().maxCoeff() <= 1e-8 * s, "A A+ A != A");
        require((p * a * p - p).cwiseAbs().maxCoeff() <= 1e-8 * s * std::max(1.0, p.cwiseAbs().maxCoeff()),
                "A+ A A+ != A+");
        require(((a * p) - (a * p).transpose()).cwiseAbs().maxCoeff() <= 1e-8 * s, "A A+ not symmetric");
        require(((p * a) - (p * a).transpose()).cwiseAbs().maxCoeff() <= 1e-8 * s, "A+ A not symmetric");
    }
}

void check_bell_structural(Rng &rng) {
    for (int n = 1; n <= 2; ++n) {
        EntangledPauliModel m(n);
        for (int i = 0; i < 20; ++i) {
            std::vector<double> lam = random_channel_eigenvalues(n, rng, 1e-4);
            std::vector<double> full = m.embed(lam);
            RateVector p = eigenvalues_to_rates(EigenvalueVector(full));
            FisherMatrix fs = bell_fim_structural(p);
            FisherMatrix fe = fim(m, lam);
            double scale = std::max(1.0, fe.matrix().cwiseAbs().maxCoeff());
            require((fs.matrix() - fe.matrix()).cwiseAbs().maxCoeff() <= 1e-8 * scale,
                    "structural FIM differs from enumeration");
            FisherMatrix f0 = bell_fim_full(p);
            double tol = 1e-9 * std::max(1.0, f0.eigenvalues().maxCoeff());
            require(f0.eigenvalues()[0] <= fs.eigenvalues()[0] + tol, "interlacing lower side fails");
            require(fs.eigenvalues()[0] <= f0.eigenvalues()[1] + tol, "interlacing upper side fails");
        }
    }
}

Eigen::MatrixXcd random_unitary(int dim, Rng &rng) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXcd z(dim, dim);
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        z.data()[i] = {normal(rng), normal(rng)};
    }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
    return qr.householderQ();
}

void check_single_copy(Rng &rng) {
    for (int n = 1; n <= 2; ++n) {
        int dim = 1 << n;
        for (int i = 0; i < 20; ++i) {
            Eigen::MatrixXcd u = random_unitary(dim, rng);
            std::vector<Eigen::MatrixXcd> povm;
            for (int c = 0; c < dim; ++c) {
                povm.push_back(u.col(c) * u.col(c).adjoint());
            }
            TraceBoundResult r = single_copy_trace_bound(povm, n);
            require(r.trace_sum <= r.bound + 1e-8, "single-copy trace bound exceeded");
            require(r.witness_value <= r.witness_threshold + 1e-12, "single-copy witness above (2^n-1)/(4^n-1)");
        }
    }
}

std::vector<BoundCoefficients> coefficient_grid(Rng &rng) {
    std::vector<BoundCoefficients> out;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 40; ++i) {
        BoundCoefficients c;
        c.d = 1 + static_cast<int>(u(rng) * 6);
        c.sigma = 0.5 + u(rng);
        c.sigma_a.assign(c.d, 0.0);
        for (double &s : c.sigma_a) {
            s = c.sigma * (0.3 + 0.7 * u(rng));
        }
        c.sigma_a[0] = c.sigma;
        // sigma^2 <= lambda_max(F^-1) <= d sigma^2 for any real FIM.
        c.opnorm_inv = c.sigma * c.sigma * (1.0 + (c.d - 1) * u(rng));
        c.mu_R = 5.0 * u(rng);
        c.V_H = 3.0 * u(rng);
        c.V_R = 3.0 * u(rng);
        c.rho = 2.0 * u(rng);
        out.push_back(c);
    }
    return out;
}

void check_bound_ordering(Rng &rng) {
    for (const BoundCoefficients &c : coefficient_grid(rng)) {
        for (double eps : {1e-1, 1e-2, 1e-3}) {
            for (double delta : {0.2, 0.05}) {
                BoundResult up = theorem1_upper_linf(eps, delta, c.d, c);
                BoundResult lo = theorem2_lower_linf_max(eps, delta, c);
                if (up.applicable && lo.applicable) {
                    require(lo.value <= up.value, fmt::format("theorem2 {} > theorem1 {}", lo.value, up.value));
                }
                BoundResult up2 = theorem3_upper_l2(eps, delta, c.d, c);
                BoundResult lo2 = theorem4_lower_l2(eps, delta, c, std::sqrt(c.opnorm_inv));
                if (up2.applicable && lo2.applicable) {
                    require(lo2.value <= up2.value, fmt::format("theorem4 {} > theorem3 {}", lo2.value, up2.value));
                }
                for (const BoundResult *r : {&up, &lo, &up2, &lo2}) {
                    require(!r->applicable || r->value >= 1.0, "applicable bound below 1");
                }
                // Coordinate monotonicity.
                for (int a = 0; a < c.d; ++a) {
                    BoundResult one = theorem2_lower_linf(eps, delta, c, a, c.sigma_a[a]);
                    if (one.applicable && lo.applicable) {
                        require(one.value <= lo.value, "single-coordinate lower bound exceeds the maximum");
                    }
                }
            }
        }
    }
}

void check_norm_dominance(Rng &rng) {
    for (BoundCoefficients c : coefficient_grid(rng)) {
        for (double eps : {1e-3, 1e-4}) {
            BoundResult a = theorem1_upper_linf(eps, 0.1, c.d, c);
            BoundResult b = theorem3_upper_l2(eps, 0.1, c.d, c);
            if (a.applicable && b.applicable) {
                require(b.value >= a.value * (1.0 - 1e-12), "l2 upper bound below the linf upper bound");
            }
        }
    }
}

void check_corollary_limits() {
    for (int d : {1, 3, 15}) {
        for (double delta : {0.1, 0.01}) {
            BoundCoefficients c = BoundCoefficients::idealized(d, 1.0);
            double prev = 0.0;
            for (double eps : {1e-2, 1e-3, 1e-4}) {
                double lim1 = corollary1_upper(eps, delta, d, 1.0);
                double r1 = theorem1_upper_linf(eps, delta, d, c).value / lim1;
                double r3 = theorem3_upper_l2(eps, delta, d, c).value / corollary3_upper(eps, delta, d, 1.0);
                double r2 = theorem2_lower_linf(eps, delta, c, 0, 1.0).value / corollary2_lower(eps, delta, 1.0);
                double r4 = theorem4_lower_l2(eps, delta, c, 1.0).value / corollary4_lower(eps, delta, 1.0);
                for (double r : {r1, r2, r3, r4}) {
                    require(std::abs(r - 1.0) <= 0.05, fmt::format("corollary ratio {} at d={}, eps={}", r, d, eps));
                }
                (void)prev;
            }
        }
    }
}

void check_wht_mle(Rng &rng) {
    for (int n = 1; n <= 3; ++n) {
        EntangledPauliModel m(n);
        for (int i = 0; i < 10; ++i) {
            std::vector<double> lam = random_channel_eigenvalues(n, rng);
            std::vector<double> p = m.probabilities(lam);
            EigenvalueVector est = mle_pauli_eigenvalues(p, n);
            for (size_t a = 1; a < est.size(); ++a) {
                require(std::abs(est[a] - lam[a - 1]) <= 1e-12, "WHT MLE of exact frequencies is not the truth");
            }
        }
    }
}

void check_determinism(uint64_t seed) {
    BernoulliModel m;
    std::vector<double> th{0.5};
    SearchOptions opt;
    opt.trials = 300;
    opt.seed = seed;
    MinSamplesResult a = find_min_samples(m, th, 0.1, 0.2, Norm::Linf, opt);
    opt.threads = 3;
    MinSamplesResult b = find_min_samples(m, th, 0.1, 0.2, Norm::Linf, opt);
    require(a.m_star == b.m_star && a.at_m_star.successes == b.at_m_star.successes &&
                a.bracket_lo == b.bracket_lo && a.probes.size() == b.probes.size(),
            "find_min_samples not reproducible across thread counts");
}

void check_unbiasedness(uint64_t seed) {
    EntangledPauliModel m(1);
    std::vector<double> th{0.3, -0.2, 0.1};
    for (uint64_t mm : {100u, 1000u, 10000u}) {
        auto rows = mse_vs_crb(m, th, mm, 400, seed);
        for (const MseRow &r : rows) {
            double se = std::sqrt(r.crb / 400.0);
            require(std::abs(r.bias) <= 4.5 * se, fmt::format("bias {} exceeds 4.5 standard errors at M={}", r.bias, mm));
        }
    }
}

void check_success_monotone(uint64_t seed) {
    BernoulliModel m;
    std::vector<double> th{0.3};
    SuccessEstimate prev{};
    bool first = true;
    for (uint64_t mm : {4u, 16u, 64u, 256u, 1024u}) {
        SuccessEstimate s = success_probability(m, th, mm, 0.08, Norm::Linf, 600, seed);
        if (!first) {
            require(s.ci.hi >= prev.ci.lo, fmt::format("success rate drops hard between M={} and M={}", prev.m, mm));
        }
        prev = s;
        first = false;
    }
}

void check_gaussian_crb(uint64_t seed) {
    GaussianKnownVarModel m(Eigen::MatrixXd::Identity(2, 2) * 2.0);
    std::vector<double> th{0.5, -1.0};
    const uint64_t trials = 4000;
    for (uint64_t mm : {1u, 50u}) {
        for (const MseRow &r : mse_vs_crb(m, th, mm, trials, seed)) {
            require(std::abs(r.ratio - 1.0) <= 5.0 * std::sqrt(2.0 / trials),
                    fmt::format("gaussian MSE/CRB ratio {} at M={}", r.ratio, mm));
        }
    }
}

}  // namespace

std::vector<CheckResult> run_invariant_suite(const VerifyOptions &opt) {
    Transform transform = [](std::span<const double> v) { return fwht(v); };
    if (opt.corrupt_fwht) {
        transform = [](std::span<const double> v) {
            std::vector<double> w = fwht(v);
            w[w.size() - 1] *= 1.0 + 1e-6;
            return w;
        };
    }
    Rng rng(opt.seed);
    std::vector<std::pair<std::string, std::function<void()>>> checks = {
        {"lambert_residual", check_lambert_residual},
        {"lambert_log_bound", check_lambert_log_bound},
        {"lambert_concavity", [&] { check_lambert_concavity(rng); }},
        {"mills_bracket", check_mills},
        {"gaussian_tail_monotone", check_tail_monotone},
        {"fwht_involution", [&] { check_fwht_involution(transform, rng); }},
        {"fwht_naive_sum", [&] { check_fwht_naive(transform, rng); }},
        {"pauli_trace_and_commutation", check_pauli_matrices},
        {"rates_roundtrip", [&] { check_rates_roundtrip(rng); }},
        {"model_normalization", [&] { check_normalization(rng); }},
        {"score_and_information_identities", [&] { check_score_and_information(rng); }},
        {"derivatives_vs_finite_differences", [&] { check_finite_differences(rng); }},
        {"bell_entangled_shared_formula", [&] { check_shared_formula(rng); }},
        {"entangled_inverse_fim_diagonal", [&] { check_entangled_inverse_diag(rng); }},
        {"penrose_identities", [&] { check_penrose(rng); }},
        {"bell_structural_fim_and_interlacing", [&] { check_bell_structural(rng); }},
        {"single_copy_trace_bound", [&] { check_single_copy(rng); }},
        {"bound_ordering", [&] { check_bound_ordering(rng); }},
        {"norm_dominance_small_eps", [&] { check_norm_dominance(rng); }},
        {"corollary_limits", check_corollary_limits},
        {"wht_mle_consistency", [&] { check_wht_mle(rng); }},
        {"search_determinism", [&] { check_determinism(opt.seed); }},
        {"mle_unbiasedness", [&] { check_unbiasedness(opt.seed); }},
        {"success_rate_monotone", [&] { check_success_monotone(opt.seed); }},
        {"gaussian_crb_exact", [&] { check_gaussian_crb(opt.seed); }},
    };
    std::vector<CheckResult> out;
    for (auto &[name, fn] : checks) {
        CheckResult r;
        r.name = name;
        auto t0 = std::chrono::steady_clock::now();
        try {
            fn();
            r.passed = true;
        } catch (const Failure &f) {
            r.detail = f.what;
        } catch (const std::exception &e) {
            r.detail = std::string("exception: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace fisherbound
