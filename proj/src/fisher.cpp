#include "fisherbound/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

namespace fisherbound {

namespace {

// Ordinary (dyadic) Walsh-Hadamard transform in place.
void dyadic_wht(std::vector<double> &h) {
    size_t len = h.size();
    for (size_t half = 1; half < len; half <<= 1) {
        for (size_t i = 0; i < len; i += 2 * half) {
            for (size_t j = i; j < i + half; ++j) {
                double u = h[j];
                double w = h[j + half];
                h[j] = u + w;
                h[j + half] = u - w;
            }
        }
    }
}

}  // namespace

FisherMatrix::FisherMatrix(Eigen::MatrixXd f, double excluded_mass) : f_(std::move(f)), excluded_mass_(excluded_mass) {
    if (f_.rows() != f_.cols()) {
        throw std::invalid_argument("FisherMatrix: matrix must be square");
    }
    int d = dim();
    if (d == 0) {
        return;
    }
    if (!f_.allFinite()) {
        throw std::invalid_argument("FisherMatrix: non-finite entries");
    }
    double scale = std::max(1.0, f_.cwiseAbs().maxCoeff());
    if ((f_ - f_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw std::invalid_argument("FisherMatrix: matrix is not symmetric");
    }
    f_ = 0.5 * (f_ + f_.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f_);
    evals_ = es.eigenvalues();
    evecs_ = es.eigenvectors();
    if (evals_[0] < -1e-10 * scale) {
        throw std::invalid_argument(fmt::format("FisherMatrix: negative eigenvalue {}", evals_[0]));
    }
    double lmax = evals_[d - 1];
    rank_tol_ = kRankTol * lmax;
    Eigen::VectorXd inv_vals = Eigen::VectorXd::Zero(d);
    rank_ = 0;
    double min_pos = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i) {
        if (lmax > 0.0 && evals_[i] > rank_tol_) {
            inv_vals[i] = 1.0 / evals_[i];
            ++rank_;
            min_pos = std::min(min_pos, evals_[i]);
        }
    }
    inv_ = evecs_ * inv_vals.asDiagonal() * evecs_.transpose();
    inv_ = 0.5 * (inv_ + inv_.transpose());
    inv_opnorm_ = rank_ > 0 ? 1.0 / min_pos : 0.0;
}

FisherMatrix fim(const StatModel &model, std::span<const double> theta) {
    model.check_domain(theta);
    if (auto analytic = model.analytic_fisher(theta)) {
        return FisherMatrix(std::move(*analytic));
    }
    std::vector<double> p = model.probabilities(theta);
    Eigen::MatrixXd jac = model.prob_jacobian(theta);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.size()));
    double excluded = 0.0;
    double lost = 0.0;
    for (size_t x = 0; x < p.size(); ++x) {
        auto xi = static_cast<Eigen::Index>(x);
        if (p[x] > kProbFloor) {
            w[xi] = 1.0 / p[x];
        } else {
            excluded += std::max(0.0, p[x]);
            double g2 = jac.row(xi).cwiseAbs2().maxCoeff();
            if (g2 > 0.0) {
                lost += g2 / std::max(p[x], std::numeric_limits<double>::min());
            }
        }
    }
    if (lost > kExcludedInfoLimit) {
        throw FimUndefined(fmt::format("FIM undefined at theta: outcomes below p_floor carry information {:.3g}", lost));
    }
    Eigen::MatrixXd f = jac.transpose() * w.asDiagonal() * jac;
    return FisherMatrix(std::move(f), excluded);
}

std::vector<double> qfim_inverse_diag_pauli(std::span<const double> theta) {
    std::vector<double> out;
    out.reserve(theta.size());
    for (double t : theta) {
        if (!(std::abs(t) <= 1.0)) {
            throw std::domain_error("qfim_inverse_diag_pauli: expectation outside [-1, 1]");
        }
        out.push_back(1.0 - t * t);
    }
    return out;
}

SeparableQfimDiag separable_qfim_inverse_diag(std::span<const double> r, std::span<const double> lambda) {
    if (r.size() != lambda.size()) {
        throw std::invalid_argument("separable_qfim_inverse_diag: length mismatch");
    }
    SeparableQfimDiag out;
    const double inf = std::numeric_limits<double>::infinity();
    for (size_t a = 0; a < r.size(); ++a) {
        double r2 = r[a] * r[a];
        if (r2 == 0.0) {
            out.value.push_back(inf);
            out.witness.push_back(inf);
            continue;
        }
        out.value.push_back((1.0 - r2 * lambda[a] * lambda[a]) / r2);
        out.witness.push_back(1.0 / r2 - 1.0);
    }
    return out;
}

FisherMatrix pseudo_inverse(const FisherMatrix &f) {
    return FisherMatrix(f.inverse());
}

bool estimable(const FisherMatrix &f, int a) {
    if (a < 0 || a >= f.dim()) {
        throw std::out_of_range("estimable: coordinate out of range");
    }
    Eigen::VectorXd col = f.matrix() * f.inverse().col(a);
    col[a] -= 1.0;
    return col.norm() <= kEstimableTol;
}

SpectralStats spectral_stats(const FisherMatrix &f) {
    Eigen::VectorXd diag = f.inverse_diagonal();
    double max_diag = diag.size() ? diag.maxCoeff() : 0.0;
    return {f.inverse_opnorm(), max_diag, f.inverse_opnorm(), !f.full_rank()};
}

FisherMatrix bell_fim_full(const RateVector &p) {
    size_t k = p.size();
    std::vector<double> inv(k);
    for (size_t a = 0; a < k; ++a) {
        if (!(p[a] > 0.0)) {
            throw std::domain_error("bell_fim_structural: all Pauli rates must be positive");
        }
        inv[a] = 1.0 / p[a];
    }
    // [U^T D U]_ij depends on i xor j only: 16^-n sum_x (-1)^<x, i xor j> / p_x.
    std::vector<double> h = fwht(inv);
    double scale = 1.0 / (static_cast<double>(k) * static_cast<double>(k));
    Eigen::MatrixXd f(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (size_t i = 0; i < k; ++i) {
        for (size_t j = 0; j < k; ++j) {
            f(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = h[i ^ j] * scale;
        }
    }
    return FisherMatrix(std::move(f));
}

FisherMatrix bell_fim_structural(const RateVector &p) {
    FisherMatrix full = bell_fim_full(p);
    auto d = full.dim() - 1;
    return FisherMatrix(full.matrix().bottomRightCorner(d, d));
}

PowerIterationResult bell_inverse_lambda_max(const RateVector &p, int max_iter, double tol) {
    for (double v : p.values()) {
        if (!(v > 0.0)) {
            throw std::domain_error("bell_inverse_lambda_max: all Pauli rates must be positive");
        }
    }
    size_t k = p.size();
    std::vector<double> lam = fwht(p.values());
    std::vector<double> lam_hat = lam;
    dyadic_wht(lam_hat);
    // Deterministic start with every component nonzero.
    std::vector<double> v(k, 0.0);
    for (size_t i = 1; i < k; ++i) {
        v[i] = 1.0 + 0.5 * std::sin(static_cast<double>(i));
    }
    auto normalize = [](std::vector<double> &x) {
        double s = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
        for (double &e : x) {
            e /= s;
        }
    };
    normalize(v);
    double value = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        // w = (lambda_{i xor j}) v restricted to i >= 1, minus lambda (lambda . v).
        std::vector<double> w = v;
        dyadic_wht(w);
        for (size_t i = 0; i < k; ++i) {
            w[i] *= lam_hat[i];
        }
        dyadic_wht(w);
        double dot = 0.0;
        for (size_t i = 1; i < k; ++i) {
            dot += lam[i] * v[i];
        }
        double rq = 0.0;
        w[0] = 0.0;
        for (size_t i = 1; i < k; ++i) {
            w[i] = w[i] / static_cast<double>(k) - lam[i] * dot;
            rq += w[i] * v[i];
        }
        normalize(w);
        v = std::move(w);
        if (it > 1 && std::abs(rq - value) <= tol * std::max(1.0, std::abs(rq))) {
            return {rq, it, true};
        }
        value = rq;
    }
    return {value, max_iter, false};
}

TraceBoundResult single_copy_trace_bound(const std::vector<Eigen::MatrixXcd> &povm, int n) {
    if (n < 1 || n > 3) {
        throw std::invalid_argument("single_copy_trace_bound: dense evaluation limited to 1 <= n <= 3");
    }
    if (povm.empty()) {
        throw std::invalid_argument("single_copy_trace_bound: empty POVM");
    }
    Eigen::Index dim = Eigen::Index{1} << n;
    Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto &e : povm) {
        if (e.rows() != dim || e.cols() != dim) {
            throw std::invalid_argument("single_copy_trace_bound: POVM element has the wrong dimension");
        }
        if ((e - e.adjoint()).cwiseAbs().maxCoeff() > 1e-8) {
            throw std::invalid_argument("single_copy_trace_bound: POVM element is not Hermitian");
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(e);
        if (es.eigenvalues().minCoeff() < -1e-8) {
            throw std::invalid_argument("single_copy_trace_bound: POVM element is not positive semidefinite");
        }
        total += e;
    }
    if ((total - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff() > 1e-8) {
        throw std::invalid_argument("single_copy_trace_bound: POVM elements do not sum to the identity");
    }
    uint64_t k = uint64_t{1} << (2 * n);
    double two_n = static_cast<double>(dim);
    TraceBoundResult out;
    out.bound = two_n - 1.0;
    out.witness_threshold = (two_n - 1.0) / (static_cast<double>(k) - 1.0);
    out.diag.assign(k - 1, 0.0);
    std::vector<double> traces;
    for (const auto &e : povm) {
        traces.push_back(e.trace().real());
    }
    for (uint64_t a = 1; a < k; ++a) {
        Eigen::MatrixXcd pa = pauli_matrix(PauliIndex(a, n));
        double s = 0.0;
        for (size_t x = 0; x < povm.size(); ++x) {
            if (traces[x] <= 1e-14) {
                continue;
            }
            double t = (povm[x] * pa).trace().real();
            s += t * t / (two_n * traces[x]);
        }
        out.diag[a - 1] = s;
    }
    out.trace_sum = std::accumulate(out.diag.begin(), out.diag.end(), 0.0);
    auto it = std::min_element(out.diag.begin(), out.diag.end());
    out.witness_a = static_cast<uint64_t>(it - out.diag.begin()) + 1;
    out.witness_value = *it;
    if (out.trace_sum > out.bound + 1e-8) {
        throw std::runtime_error(fmt::format("single-copy trace bound violated: {} > {}", out.trace_sum, out.bound));
    }
    return out;
}

double depolarizing_qfi_sum(std::span<const double> c, const std::vector<std::vector<double>> &d, int n) {
    if (n < 1 || n > 31) {
        throw std::invalid_argument("depolarizing_qfi_sum: bad qubit count");
    }
    if (c.size() != d.size() || c.empty()) {
        throw std::invalid_argument("depolarizing_qfi_sum: need one weight per branch");
    }
    double total_w = 0.0;
    for (double w : c) {
        if (!(w >= 0.0)) {
            throw std::invalid_argument("depolarizing_qfi_sum: negative branch weight");
        }
        total_w += w;
    }
    if (std::abs(total_w - 1.0) > 1e-12) {
        throw std::invalid_argument("depolarizing_qfi_sum: weights must sum to 1");
    }
    double cap = std::ldexp(1.0, n) - 1.0;
    size_t len = (size_t{1} << (2 * n)) - 1;
    double s = 0.0;
    for (size_t j = 0; j < d.size(); ++j) {
        if (d[j].size() != len) {
            throw std::invalid_argument("depolarizing_qfi_sum: non-unital vector has the wrong length");
        }
        double norm2 = 0.0;
        for (double v : d[j]) {
            norm2 += v * v;
        }
        if (norm2 > cap + 1e-12) {
            throw std::invalid_argument(fmt::format("depolarizing_qfi_sum: branch {} violates the purity constraint", j));
        }
        s += c[j] * norm2;
    }
    if (s > cap + 1e-12) {
        throw std::runtime_error("depolarizing_qfi_sum: sum exceeds 2^n - 1");
    }
    return s;
}

}  // namespace fisherbound
