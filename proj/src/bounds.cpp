#include "fisherbound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace fisherbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_eps_delta(double eps, double delta) {
    if (!(eps > 0.0)) {
        throw std::invalid_argument("epsilon must be positive");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("delta must lie in (0, 1)");
    }
}

void check_coefficients(const BoundCoefficients &c) {
    for (double v : {c.mu_R, c.V_H, c.V_R, c.C, c.rho, c.opnorm_inv}) {
        if (!(v >= 0.0)) {
            throw std::invalid_argument("bound coefficients must be nonnegative");
        }
    }
    if (!(c.sigma > 0.0)) {
        throw std::invalid_argument("sigma must be positive");
    }
}

double w_upper(double delta, int d) {
    double dd = static_cast<double>(d);
    return lambert_w0(8.0 / std::numbers::pi / (delta * delta) * dd * dd);
}

double w_lower(double delta) {
    return lambert_w0(1.0 / (delta * delta) / (2.0 * std::numbers::pi));
}

BoundResult inapplicable(BoundResult r, std::string reason) {
    r.applicable = false;
    r.value = kInf;
    r.reason = std::move(reason);
    return r;
}

BoundResult finish(BoundResult r, std::initializer_list<std::pair<const char *, double>> terms) {
    r.applicable = true;
    r.value = 0.0;
    for (const auto &[name, v] : terms) {
        if (v > r.value || r.limiting_term.empty()) {
            r.value = v;
            r.limiting_term = name;
        }
    }
    if (!(r.value >= 1.0)) {
        r.value = 1.0;
        r.limiting_term = "floor";
    }
    return r;
}

// Shared shape of Theorems 1 and 3 once tau, D, eta and W are known.
BoundResult upper_core(BoundResult r, double tau, double D, double eta, double sigma, double W, int d,
                       double delta) {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        return inapplicable(std::move(r), "tau0 <= 0");
    }
    if (!std::isfinite(D) || !std::isfinite(eta)) {
        return inapplicable(std::move(r), "non-finite coefficients");
    }
    double dd = static_cast<double>(d);
    double A = dd * eta / delta + D / (2.0 * tau) + sigma * std::sqrt(W) / (2.0 * tau);
    double disc = A * A - 2.0 * dd * eta / delta * D / tau;
    if (disc < 0.0) {
        return inapplicable(std::move(r), "negative discriminant");
    }
    double ystar = std::pow(A + std::sqrt(disc), 2);
    double t1 = std::pow(D / tau, 2);
    double t2 = std::pow(2.0 * dd * eta / delta, 2);
    return finish(std::move(r), {{"y*", ystar}, {"(D/tau)^2", t1}, {"(2d eta/delta)^2", t2}});
}

// Shared shape of Theorems 2 and 4.
BoundResult lower_core(BoundResult r, double tau, double D, double eta, double sigma, double W, double delta) {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        return inapplicable(std::move(r), "tau0 <= 0");
    }
    if (!std::isfinite(D) || !std::isfinite(eta)) {
        return inapplicable(std::move(r), "non-finite coefficients");
    }
    double B = -D / tau - eta / (2.0 * delta) + std::sqrt(W) * sigma / (2.0 * tau);
    double disc = B * B - 2.0 * eta * D / (delta * tau);
    if (disc < 0.0) {
        return inapplicable(std::move(r), "negative discriminant");
    }
    // A negative root means the sqrt(M) constraint from z* is vacuous.
    double root = B + std::sqrt(disc);
    double zstar = root > 0.0 ? root * root : 0.0;
    double t2 = std::pow(2.0 * sigma / (std::sqrt(D * D + 4.0 * tau * sigma) + D), 4);
    return finish(std::move(r), {{"z*", zstar}, {"(2sigma/(sqrt(D^2+4 tau sigma)+D))^4", t2}});
}

double upper_eta(const BoundCoefficients &c, int d) {
    if (c.sigma_a.size() == static_cast<size_t>(d)) {
        double s = 0.0;
        for (int a = 0; a < d; ++a) {
            double rho = c.rho_a.size() == static_cast<size_t>(d) ? c.rho_a[a] : c.rho;
            double sa = c.sigma_a[a];
            s += sa > 0.0 ? c.C * rho / (sa * sa * sa) : (rho > 0.0 ? kInf : 0.0);
        }
        return s / static_cast<double>(d);
    }
    return c.C * c.rho / std::pow(c.sigma, 3);
}

BoundResult make(const char *id, double eps, double delta, int d, const BoundCoefficients &c) {
    BoundResult r;
    r.id = id;
    r.epsilon = eps;
    r.delta = delta;
    r.d = d;
    r.estimated_coefficients = c.envelope_estimated;
    return r;
}

}  // namespace

const char *norm_name(Norm n) {
    return n == Norm::Linf ? "linf" : "l2";
}

Norm parse_norm(const std::string &tag) {
    if (tag == "linf") {
        return Norm::Linf;
    }
    if (tag == "l2") {
        return Norm::L2;
    }
    throw std::invalid_argument("unknown norm '" + tag + "' (expected linf or l2)");
}

BoundCoefficients BoundCoefficients::idealized(int d, double sigma) {
    BoundCoefficients c;
    c.d = d;
    c.sigma = sigma;
    c.sigma_max = sigma;
    c.opnorm_inv = sigma * sigma;
    c.provenance = "idealized";
    return c;
}

BoundResult theorem1_upper_linf(double eps, double delta, int d, const BoundCoefficients &c) {
    check_eps_delta(eps, delta);
    check_coefficients(c);
    if (d < 1) {
        throw std::invalid_argument("d must be at least 1");
    }
    BoundResult r = make("theorem1", eps, delta, d, c);
    double dd = static_cast<double>(d);
    double tau = (1.0 - eps * dd * c.mu_R / 2.0 * c.opnorm_inv) * eps;
    double D = (std::sqrt(4.0 * c.V_H / delta) * std::sqrt(dd) + 0.5 * std::sqrt(4.0 * c.V_R / delta) * dd * eps) *
               c.opnorm_inv * eps;
    return upper_core(std::move(r), tau, D, upper_eta(c, d), c.sigma, w_upper(delta, d), d, delta);
}

BoundResult theorem3_upper_l2(double eps, double delta, int d, const BoundCoefficients &c) {
    check_eps_delta(eps, delta);
    check_coefficients(c);
    if (d < 1) {
        throw std::invalid_argument("d must be at least 1");
    }
    BoundResult r = make("theorem3", eps, delta, d, c);
    double sd = std::sqrt(static_cast<double>(d));
    double tau = (1.0 - eps * sd * c.mu_R / 2.0 * c.opnorm_inv) * eps / sd;
    double D = (std::sqrt(4.0 * c.V_H / delta) + 0.5 * std::sqrt(4.0 * c.V_R / delta) * eps) * c.opnorm_inv * eps;
    return upper_core(std::move(r), tau, D, upper_eta(c, d), c.sigma, w_upper(delta, d), d, delta);
}

BoundResult theorem2_lower_linf(double eps, double delta, const BoundCoefficients &c, int a, double sigma_a) {
    check_eps_delta(eps, delta);
    check_coefficients(c);
    if (!(sigma_a > 0.0)) {
        throw std::invalid_argument("sigma_a must be positive");
    }
    int d = c.d;
    BoundResult r = make("theorem2", eps, delta, d, c);
    r.limiting_term = "";
    double dd = static_cast<double>(d);
    double tau = (1.0 + eps * dd * c.mu_R / 2.0 * c.opnorm_inv) * eps;
    double D = (std::sqrt(2.0 * c.V_H / delta) * std::sqrt(dd) + 0.5 * std::sqrt(2.0 * c.V_R / delta) * dd * eps) *
               c.opnorm_inv * eps;
    double rho = (a >= 0 && static_cast<size_t>(a) < c.rho_a.size()) ? c.rho_a[a] : c.rho;
    double eta = 2.0 * c.C * rho / std::pow(sigma_a, 3);
    BoundResult out = lower_core(std::move(r), tau, D, eta, sigma_a, w_lower(delta), delta);
    out.reason = out.reason.empty() ? fmt::format("a={}", a) : out.reason;
    return out;
}

BoundResult theorem2_lower_linf_max(double eps, double delta, const BoundCoefficients &c) {
    if (c.sigma_a.empty()) {
        return theorem2_lower_linf(eps, delta, c, -1, c.sigma);
    }
    BoundResult best;
    bool have = false;
    for (size_t a = 0; a < c.sigma_a.size(); ++a) {
        if (!(c.sigma_a[a] > 0.0)) {
            continue;
        }
        BoundResult r = theorem2_lower_linf(eps, delta, c, static_cast<int>(a), c.sigma_a[a]);
        if (!r.applicable) {
            continue;
        }
        if (!have || r.value > best.value) {
            best = r;
            have = true;
        }
    }
    if (!have) {
        BoundResult r = make("theorem2", eps, delta, c.d, c);
        return inapplicable(std::move(r), "no applicable coordinate");
    }
    return best;
}

BoundResult theorem4_lower_l2(double eps, double delta, const BoundCoefficients &c, double sigma_max) {
    check_eps_delta(eps, delta);
    check_coefficients(c);
    if (!(sigma_max > 0.0)) {
        throw std::invalid_argument("sigma_max must be positive");
    }
    BoundResult r = make("theorem4", eps, delta, c.d, c);
    double tau = (1.0 + eps * c.mu_R / 2.0 * c.opnorm_inv) * eps;
    double D = (std::sqrt(2.0 * c.V_H / delta) + 0.5 * std::sqrt(2.0 * c.V_R / delta) * eps) * c.opnorm_inv * eps;
    double rho = std::isnan(c.rho_top) ? c.rho : c.rho_top;
    double eta = 2.0 * c.C * rho / std::pow(sigma_max, 3);
    return lower_core(std::move(r), tau, D, eta, sigma_max, w_lower(delta), delta);
}

double corollary1_upper(double eps, double delta, int d, double sigma_sq) {
    check_eps_delta(eps, delta);
    return w_upper(delta, d) * sigma_sq / (eps * eps);
}

double corollary2_lower(double eps, double delta, double inv_diag_a) {
    check_eps_delta(eps, delta);
    return w_lower(delta) * inv_diag_a / (eps * eps);
}

double corollary3_upper(double eps, double delta, int d, double sigma_sq) {
    return static_cast<double>(d) * corollary1_upper(eps, delta, d, sigma_sq);
}

double corollary4_lower(double eps, double delta, double lambda_max_inv) {
    check_eps_delta(eps, delta);
    return w_lower(delta) * lambda_max_inv / (eps * eps);
}

double entangled_pauli_corollary_upper(int n, double eps, double delta) {
    check_eps_delta(eps, delta);
    if (n < 1) {
        throw std::invalid_argument("n must be at least 1");
    }
    double arg = 8.0 / std::numbers::pi / (delta * delta) * std::pow(16.0, n);
    return lambert_w0(arg) / (eps * eps);
}

double separable_pauli_corollary_lower(int n, double eps, double delta) {
    check_eps_delta(eps, delta);
    if (n < 1) {
        throw std::invalid_argument("n must be at least 1");
    }
    return w_lower(delta) * std::ldexp(1.0, n) / (eps * eps);
}

double entangled_l2_lower(int n, const RateVector &p, double eps, double delta) {
    check_eps_delta(eps, delta);
    if (p.n() != n) {
        throw std::invalid_argument("entangled_l2_lower: rate vector does not match n");
    }
    std::vector<double> sorted = p.values();
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    return w_lower(delta) * static_cast<double>(p.size()) * sorted[1] / (eps * eps);
}

int separation_crossover(double eps, double delta, int n_max) {
    int crossover = 0;
    for (int n = n_max; n >= 1; --n) {
        double ratio = separable_pauli_corollary_lower(n, eps, delta) / entangled_pauli_corollary_upper(n, eps, delta);
        if (ratio > 1.0) {
            crossover = n;
        } else {
            break;
        }
    }
    return crossover;
}

double envelope_radius(Norm norm, int d, double eps) {
    return norm == Norm::Linf ? std::sqrt(static_cast<double>(d)) * eps : eps;
}

EnvelopeEstimate envelope_ascent(const StatModel &model, std::span<const double> theta, size_t x, double radius,
                                 const CoefficientOptions &opt) {
    int d = model.dim();
    Eigen::VectorXd center = Eigen::Map<const Eigen::VectorXd>(theta.data(), d);
    auto eval = [&](const Eigen::VectorXd &delta) {
        Eigen::VectorXd pt = center + delta;
        std::vector<double> v(pt.data(), pt.data() + d);
        try {
            model.check_domain(v);
        } catch (const DomainError &) {
            return kInf;
        }
        double px = model.probabilities(v)[x];
        if (!(px > 0.0)) {
            return kInf;
        }
        return 0.5 * tensor_op_norm(model.third(v, x), 4, opt.seed);
    };
    auto project = [&](Eigen::VectorXd v) {
        double nv = v.norm();
        if (nv > radius) {
            v *= radius / nv;
        }
        return v;
    };

    Rng rng(opt.seed ^ (0x9e37 * (x + 1)));
    std::normal_distribution<double> normal;
    std::vector<Eigen::VectorXd> starts{Eigen::VectorXd::Zero(d)};
    for (int i = 0; i < d && static_cast<int>(starts.size()) < 2 * opt.starts; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
        e[i] = radius;
        starts.push_back(e);
        starts.push_back(-e);
    }
    for (int s = 0; s < opt.starts; ++s) {
        Eigen::VectorXd v(d);
        for (int i = 0; i < d; ++i) {
            v[i] = normal(rng);
        }
        starts.push_back(v.normalized() * radius);
    }

    EnvelopeEstimate best{-1.0, std::vector<double>(theta.begin(), theta.end())};
    double h = std::max(1e-7, 1e-4 * radius);
    for (const Eigen::VectorXd &s0 : starts) {
        Eigen::VectorXd cur = s0;
        double fcur = eval(cur);
        double step = radius / 4.0;
        for (int it = 0; it < opt.iterations && std::isfinite(fcur) && step > 1e-12 * radius; ++it) {
            Eigen::VectorXd grad(d);
            for (int i = 0; i < d; ++i) {
                Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
                e[i] = h;
                double fp = eval(cur + e);
                double fm = eval(cur - e);
                grad[i] = (fp - fm) / (2.0 * h);
                if (!std::isfinite(grad[i])) {
                    grad[i] = std::isinf(fp) ? 1.0 : -1.0;
                }
            }
            double gn = grad.norm();
            if (gn == 0.0) {
                break;
            }
            Eigen::VectorXd next = project(cur + step * grad / gn);
            double fnext = eval(next);
            if (fnext > fcur) {
                cur = next;
                fcur = fnext;
                step *= 1.5;
            } else {
                step *= 0.5;
            }
        }
        if (fcur > best.value) {
            best.value = fcur;
            Eigen::VectorXd pt = center + cur;
            best.argmax.assign(pt.data(), pt.data() + d);
        }
        if (std::isinf(best.value)) {
            break;
        }
    }
    return best;
}

BoundCoefficients estimate_coefficients(const StatModel &model, std::span<const double> theta, double eps,
                                        const CoefficientOptions &opt) {
    if (!(eps > 0.0)) {
        throw std::invalid_argument("estimate_coefficients: epsilon must be positive");
    }
    FisherMatrix f = fim(model, theta);
    const Eigen::MatrixXd &finv = f.inverse();
    int d = model.dim();

    BoundCoefficients c;
    c.d = d;
    c.C = opt.be_constant;
    c.opnorm_inv = f.inverse_opnorm();
    c.sigma_a.resize(d);
    for (int a = 0; a < d; ++a) {
        c.sigma_a[a] = std::sqrt(std::max(0.0, finv(a, a)));
    }
    c.sigma = *std::max_element(c.sigma_a.begin(), c.sigma_a.end());
    c.sigma_max = std::sqrt(c.opnorm_inv);
    Eigen::VectorXd top = f.eigenvectors().col(0);
    for (int i = 0; i < d; ++i) {
        if (f.eigenvalues()[i] > f.rank_tol()) {
            top = f.eigenvectors().col(i);
            break;
        }
    }

    if (!model.enumerable()) {
        // Gaussian with known covariance: the log-likelihood is quadratic, so B = 0,
        // l''' = 0, and e_a^T F^-1 score is N(0, [F^-1]_aa).
        const double abs3 = 2.0 * std::sqrt(2.0 / std::numbers::pi);
        c.rho_a.resize(d);
        for (int a = 0; a < d; ++a) {
            c.rho_a[a] = abs3 * std::pow(c.sigma_a[a], 3);
        }
        c.rho = *std::max_element(c.rho_a.begin(), c.rho_a.end());
        c.rho_top = abs3 * std::pow(c.sigma_max, 3);
        c.provenance = "analytic";
        return c;
    }

    std::vector<double> p = model.probabilities(theta);
    double radius = envelope_radius(opt.norm, d, eps);
    c.rho_a.assign(d, 0.0);
    double rho_top = 0.0;
    double env1 = 0.0, env2 = 0.0;
    bool estimated = false;
    for (size_t x = 0; x < p.size(); ++x) {
        if (!(p[x] > kProbFloor)) {
            continue;
        }
        Eigen::VectorXd s = model.score(theta, x);
        Eigen::MatrixXd b = model.hessian(theta, x) + f.matrix();
        c.V_H += p[x] * b.squaredNorm();
        Eigen::VectorXd proj = finv * s;
        for (int a = 0; a < d; ++a) {
            c.rho_a[a] += p[x] * std::pow(std::abs(proj[a]), 3);
        }
        rho_top += p[x] * std::pow(std::abs(top.dot(proj)), 3);

        std::optional<double> r;
        if (opt.exact_envelope) {
            r = model.envelope_exact(theta, x, radius);
        }
        if (!r) {
            r = envelope_ascent(model, theta, x, radius, opt).value;
            estimated = true;
        }
        env1 += p[x] * *r;
        env2 += p[x] * *r * *r;
    }
    c.rho = *std::max_element(c.rho_a.begin(), c.rho_a.end());
    c.rho_top = rho_top;
    c.mu_R = env1;
    c.V_R = std::isfinite(env2) ? std::max(0.0, env2 - env1 * env1) : kInf;
    c.envelope_estimated = estimated;
    c.provenance = estimated ? "exact V_H, rho; envelope by ascent (lower estimate of a supremum)"
                             : "exact V_H, rho; closed-form envelope";
    return c;
}

GridBound upper_bound_over_grid(const StatModel &model, const std::vector<std::vector<double>> &points, double eps,
                                double delta, const CoefficientOptions &opt) {
    std::vector<BoundCoefficients> coeffs;
    double sigma_sq = 0.0;
    for (const auto &pt : points) {
        try {
            coeffs.push_back(estimate_coefficients(model, pt, eps, opt));
        } catch (const FimUndefined &) {
            continue;
        }
        sigma_sq = std::max(sigma_sq, coeffs.back().sigma * coeffs.back().sigma);
    }
    GridBound out;
    out.points_used = coeffs.size();
    out.sigma_sq = sigma_sq;
    if (coeffs.empty()) {
        out.result.id = opt.norm == Norm::Linf ? "theorem1" : "theorem3";
        out.result = inapplicable(out.result, "no grid point with a defined FIM");
        return out;
    }
    bool first = true;
    for (BoundCoefficients &c : coeffs) {
        c.sigma = std::sqrt(sigma_sq);
        BoundResult r = opt.norm == Norm::Linf ? theorem1_upper_linf(eps, delta, c.d, c)
                                               : theorem3_upper_l2(eps, delta, c.d, c);
        // The supremum is only meaningful if the theorem applies at every point.
        if (first || !r.applicable || (out.result.applicable && r.value > out.result.value)) {
            if (first || out.result.applicable) {
                out.result = r;
            }
        }
        first = false;
    }
    return out;
}

}  // namespace fisherbound
