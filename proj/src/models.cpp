#include "fisherbound/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "fisherbound/pauli.hpp"

namespace fisherbound {

namespace {

constexpr double kDomainTol = 1e-12;

void check_length(std::span<const double> theta, int d, const std::string &who) {
    if (theta.size() != static_cast<size_t>(d)) {
        throw DomainError(fmt::format("{}: expected {} parameters, got {}", who, d, theta.size()));
    }
    for (double t : theta) {
        if (!std::isfinite(t)) {
            throw DomainError(who + ": non-finite parameter");
        }
    }
}

Eigen::VectorXd as_vector(std::span<const double> theta) {
    return Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
}

uint64_t total_count(const Observation &obs) {
    return std::accumulate(obs.counts.begin(), obs.counts.end(), uint64_t{0});
}

}  // namespace

const char *scheme_name(Scheme s) {
    switch (s) {
        case Scheme::EntangledPauli: return "entangled-pauli";
        case Scheme::SeparablePauli: return "separable-pauli";
        case Scheme::TwoCopyBell: return "two-copy-bell";
        case Scheme::Bernoulli: return "bernoulli";
        case Scheme::Multinomial: return "multinomial";
        case Scheme::Poisson: return "poisson";
        case Scheme::GaussianKnownVar: return "gaussian-known-var";
    }
    return "unknown";
}

Scheme parse_scheme(const std::string &tag) {
    for (Scheme s : {Scheme::EntangledPauli, Scheme::SeparablePauli, Scheme::TwoCopyBell, Scheme::Bernoulli,
                     Scheme::Multinomial, Scheme::Poisson, Scheme::GaussianKnownVar}) {
        if (tag == scheme_name(s)) {
            return s;
        }
    }
    throw std::invalid_argument("unknown scheme '" + tag + "'");
}

double Tensor3::contract3(const Eigen::VectorXd &u) const {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            double uij = u[i] * u[j];
            for (int k = 0; k < d; ++k) {
                s += (*this)(i, j, k) * uij * u[k];
            }
        }
    }
    return s;
}

Eigen::VectorXd Tensor3::contract2(const Eigen::VectorXd &u) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            for (int k = 0; k < d; ++k) {
                out[i] += (*this)(i, j, k) * u[j] * u[k];
            }
        }
    }
    return out;
}

double tensor_op_norm(const Tensor3 &t, int starts, uint64_t seed) {
    int d = t.d;
    if (d == 0) {
        return 0.0;
    }
    double fro = std::sqrt(std::inner_product(t.v.begin(), t.v.end(), t.v.begin(), 0.0));
    if (fro == 0.0) {
        return 0.0;
    }
    double shift = 2.0 * fro;
    Rng rng(seed);
    std::normal_distribution<double> normal;
    double best = 0.0;
    int total = std::max(starts, 1) + d;
    for (int s = 0; s < total; ++s) {
        Eigen::VectorXd u = Eigen::VectorXd::Zero(d);
        if (s < d) {
            u[s] = 1.0;
        } else {
            for (int i = 0; i < d; ++i) {
                u[i] = normal(rng);
            }
            u.normalize();
        }
        // T(u,u,u) is odd in u, so maximizing it also maximizes the absolute value.
        if (t.contract3(u) < 0) {
            u = -u;
        }
        double f = t.contract3(u);
        for (int it = 0; it < 5000; ++it) {
            Eigen::VectorXd next = t.contract2(u) + shift * u;
            next.normalize();
            double fn = t.contract3(next);
            u = next;
            if (std::abs(fn - f) <= 1e-15 * std::max(1.0, std::abs(fn))) {
                f = fn;
                break;
            }
            f = fn;
        }
        best = std::max(best, std::abs(f));
    }
    return best;
}

// ---- StatModel ----

bool StatModel::in_interior(std::span<const double> theta, double margin) const {
    try {
        check_domain(theta);
    } catch (const DomainError &) {
        return false;
    }
    for (double p : probabilities(theta)) {
        if (p < margin) {
            return false;
        }
    }
    return true;
}

Observation StatModel::sample(std::span<const double> theta, uint64_t m, Rng &rng) const {
    Observation obs;
    obs.m = m;
    obs.counts = sample_multinomial(probabilities(theta), m, rng);
    return obs;
}

// ---- AffineModel ----

double AffineModel::prob_at(std::span<const double> theta, size_t x) const {
    return probabilities(theta)[x];
}

Eigen::MatrixXd AffineModel::prob_jacobian(std::span<const double>) const {
    Eigen::MatrixXd j(static_cast<Eigen::Index>(k_), d_);
    for (size_t x = 0; x < k_; ++x) {
        j.row(static_cast<Eigen::Index>(x)) = gradient_row(x).transpose();
    }
    return j;
}

Eigen::VectorXd AffineModel::score(std::span<const double> theta, size_t x) const {
    return gradient_row(x) / prob_at(theta, x);
}

Eigen::MatrixXd AffineModel::hessian(std::span<const double> theta, size_t x) const {
    Eigen::VectorXd g = gradient_row(x);
    double p = prob_at(theta, x);
    return -(g * g.transpose()) / (p * p);
}

Tensor3 AffineModel::third(std::span<const double> theta, size_t x) const {
    Eigen::VectorXd g = gradient_row(x);
    double p = prob_at(theta, x);
    double c = 2.0 / (p * p * p);
    Tensor3 t(d_);
    for (int i = 0; i < d_; ++i) {
        for (int j = 0; j < d_; ++j) {
            for (int k = 0; k < d_; ++k) {
                t(i, j, k) = c * g[i] * g[j] * g[k];
            }
        }
    }
    return t;
}

std::optional<double> AffineModel::envelope_exact(std::span<const double> theta, size_t x, double radius) const {
    // (1/2)||2 g g g / p^3||_op = |g|^3 / p^3, largest where p is smallest on the ball.
    Eigen::VectorXd g = gradient_row(x);
    double gn = g.norm();
    if (gn == 0.0) {
        return 0.0;
    }
    double pmin = prob_at(theta, x) - radius * gn;
    if (pmin <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return std::pow(gn / pmin, 3);
}

// ---- Entangled Pauli ----

EntangledPauliModel::EntangledPauliModel(int n)
    : AffineModel(n >= 1 && n <= 15 ? static_cast<int>((uint64_t{1} << (2 * n)) - 1) : 0, uint64_t{1} << (2 * n)),
      n_(n) {
    if (n < 1 || n > 15) {
        throw std::invalid_argument("entangled model: n must be in [1, 15]");
    }
}

std::string EntangledPauliModel::name() const {
    return fmt::format("entangled-pauli(n={})", n_);
}

std::vector<double> EntangledPauliModel::embed(std::span<const double> theta) const {
    std::vector<double> full(k_);
    full[0] = 1.0;
    std::copy(theta.begin(), theta.end(), full.begin() + 1);
    return full;
}

void EntangledPauliModel::check_domain(std::span<const double> theta) const {
    check_length(theta, d_, name());
    for (double t : theta) {
        if (std::abs(t) > 1.0 + kDomainTol) {
            throw DomainError(name() + ": eigenvalue outside [-1, 1]");
        }
    }
    for (double p : probabilities(theta)) {
        if (p < -kDomainTol) {
            throw DomainError(name() + ": eigenvalues outside the channel-validity domain");
        }
    }
}

std::vector<double> EntangledPauliModel::probabilities(std::span<const double> theta) const {
    std::vector<double> p = fwht(embed(theta));
    double scale = 1.0 / static_cast<double>(k_);
    for (double &v : p) {
        v *= scale;
    }
    return p;
}

Eigen::VectorXd EntangledPauliModel::gradient_row(size_t x) const {
    Eigen::VectorXd g(d_);
    double scale = 1.0 / static_cast<double>(k_);
    for (int a = 1; a <= d_; ++a) {
        g[a - 1] = symplectic_product(x, static_cast<uint64_t>(a), n_) ? -scale : scale;
    }
    return g;
}

Estimate EntangledPauliModel::mle(const Observation &obs) const {
    if (obs.counts.size() != k_) {
        throw std::invalid_argument(name() + ": count vector has the wrong length");
    }
    uint64_t m = total_count(obs);
    if (m == 0) {
        throw std::invalid_argument(name() + ": empty counts");
    }
    std::vector<double> f(k_);
    bool boundary = false;
    for (size_t x = 0; x < k_; ++x) {
        f[x] = static_cast<double>(obs.counts[x]) / static_cast<double>(m);
        boundary |= obs.counts[x] == 0;
    }
    std::vector<double> lam = fwht(f);
    return {std::vector<double>(lam.begin() + 1, lam.end()), boundary};
}

// ---- Two-copy Bell ----

TwoCopyBellModel::TwoCopyBellModel(int n) : EntangledPauliModel(n) {}

std::string TwoCopyBellModel::name() const {
    return fmt::format("two-copy-bell(n={})", n_);
}

void TwoCopyBellModel::check_domain(std::span<const double> theta) const {
    EntangledPauliModel::check_domain(theta);
    for (double s : theta) {
        if (s < -kDomainTol) {
            throw DomainError(name() + ": squared moments must lie in [0, 1]");
        }
    }
}

std::vector<std::pair<std::string, std::string>> TwoCopyBellModel::metadata() const {
    return {{"parameters", "s_a = c_a^2"}, {"epsilon_translation", "eps_s = eps_c^2"}};
}

double bell_moment_epsilon(double eps_c) {
    return eps_c * eps_c;
}

// ---- Separable Pauli ----

std::vector<double> product_probe(const std::vector<std::array<double, 3>> &bloch) {
    int n = static_cast<int>(bloch.size());
    if (n < 1 || n > 15) {
        throw std::invalid_argument("product_probe: need between 1 and 15 qubits");
    }
    uint64_t k = uint64_t{1} << (2 * n);
    std::vector<double> r(k - 1);
    for (uint64_t a = 1; a < k; ++a) {
        PauliIndex pa(a, n);
        double v = 1.0;
        for (int q = 0; q < n; ++q) {
            int shift = n - 1 - q;
            bool x = (pa.x_bits() >> shift) & 1;
            bool z = (pa.z_bits() >> shift) & 1;
            const auto &b = bloch[q];
            if (x && z) {
                v *= b[1];
            } else if (x) {
                v *= b[0];
            } else if (z) {
                v *= b[2];
            }
        }
        r[a - 1] = v;
    }
    return r;
}

SeparablePauliModel::SeparablePauliModel(int n, std::vector<double> r, std::vector<uint64_t> axes)
    : AffineModel(0, 0), n_(n), r_(std::move(r)), axes_(std::move(axes)) {
    if (n < 1 || n > 15) {
        throw std::invalid_argument("separable model: n must be in [1, 15]");
    }
    uint64_t k = uint64_t{1} << (2 * n);
    if (r_.size() != k - 1) {
        throw DomainError(fmt::format("separable model: probe needs {} components, got {}", k - 1, r_.size()));
    }
    double purity = 0.0;
    for (double v : r_) {
        if (!std::isfinite(v)) {
            throw DomainError("separable model: non-finite probe component");
        }
        purity += v * v;
    }
    double cap = std::ldexp(1.0, n) - 1.0;
    if (purity > cap + 1e-12) {
        throw DomainError(fmt::format("separable model: purity constraint violated ({} > {})", purity, cap));
    }
    if (axes_.empty()) {
        axes_.resize(k - 1);
        std::iota(axes_.begin(), axes_.end(), uint64_t{1});
    }
    std::vector<uint64_t> sorted = axes_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() || sorted.front() < 1 ||
        sorted.back() >= k) {
        throw std::invalid_argument("separable model: axes must be distinct non-identity Pauli indices");
    }
    d_ = static_cast<int>(k - 1);
    k_ = 2 * axes_.size();
}

std::string SeparablePauliModel::name() const {
    return fmt::format("separable-pauli(n={})", n_);
}

void SeparablePauliModel::check_domain(std::span<const double> theta) const {
    check_length(theta, d_, name());
    std::vector<double> full(theta.size() + 1, 1.0);
    std::copy(theta.begin(), theta.end(), full.begin() + 1);
    for (double t : theta) {
        if (std::abs(t) > 1.0 + kDomainTol) {
            throw DomainError(name() + ": eigenvalue outside [-1, 1]");
        }
    }
    for (double p : fwht(full)) {
        if (p < -kDomainTol * static_cast<double>(full.size())) {
            throw DomainError(name() + ": eigenvalues outside the channel-validity domain");
        }
    }
}

std::vector<double> SeparablePauliModel::probabilities(std::span<const double> theta) const {
    std::vector<double> p(k_);
    double w = 1.0 / static_cast<double>(axes_.size());
    for (size_t j = 0; j < axes_.size(); ++j) {
        uint64_t a = axes_[j];
        double e = r_[a - 1] * theta[a - 1];
        p[2 * j] = w * 0.5 * (1.0 + e);
        p[2 * j + 1] = w * 0.5 * (1.0 - e);
    }
    return p;
}

Eigen::VectorXd SeparablePauliModel::gradient_row(size_t x) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(d_);
    size_t j = x / 2;
    uint64_t a = axes_[j];
    double w = 1.0 / static_cast<double>(axes_.size());
    g[static_cast<Eigen::Index>(a - 1)] = (x % 2 == 0 ? 0.5 : -0.5) * w * r_[a - 1];
    return g;
}

Estimate SeparablePauliModel::mle(const Observation &obs) const {
    if (obs.counts.size() != k_) {
        throw std::invalid_argument(name() + ": count vector has the wrong length");
    }
    Estimate est;
    est.theta.assign(d_, std::numeric_limits<double>::quiet_NaN());
    for (size_t j = 0; j < axes_.size(); ++j) {
        uint64_t a = axes_[j];
        double plus = static_cast<double>(obs.counts[2 * j]);
        double minus = static_cast<double>(obs.counts[2 * j + 1]);
        double r = r_[a - 1];
        if (plus + minus == 0.0 || r == 0.0) {
            est.boundary = true;
            continue;
        }
        est.theta[a - 1] = (plus - minus) / ((plus + minus) * r);
        est.boundary |= plus == 0.0 || minus == 0.0;
    }
    for (double t : est.theta) {
        est.boundary |= std::isnan(t);
    }
    return est;
}

double SeparablePauliModel::single_axis_information(uint64_t a, double lambda_a) const {
    double r = r_.at(a - 1);
    return r * r / (1.0 - r * r * lambda_a * lambda_a);
}

std::vector<int> SeparablePauliModel::unidentifiable() const {
    std::vector<bool> measured(d_, false);
    for (uint64_t a : axes_) {
        measured[a - 1] = r_[a - 1] != 0.0;
    }
    std::vector<int> out;
    for (int i = 0; i < d_; ++i) {
        if (!measured[i]) {
            out.push_back(i);
        }
    }
    return out;
}

// ---- Bernoulli ----

BernoulliModel::BernoulliModel() : AffineModel(1, 2) {}

void BernoulliModel::check_domain(std::span<const double> theta) const {
    check_length(theta, 1, name());
    if (theta[0] < 0.0 || theta[0] > 1.0) {
        throw DomainError("bernoulli: theta must lie in [0, 1]");
    }
}

std::vector<double> BernoulliModel::probabilities(std::span<const double> theta) const {
    return {1.0 - theta[0], theta[0]};
}

Eigen::VectorXd BernoulliModel::gradient_row(size_t x) const {
    return Eigen::VectorXd::Constant(1, x == 0 ? -1.0 : 1.0);
}

Estimate BernoulliModel::mle(const Observation &obs) const {
    if (obs.counts.size() != 2) {
        throw std::invalid_argument("bernoulli: count vector has the wrong length");
    }
    uint64_t m = total_count(obs);
    if (m == 0) {
        throw std::invalid_argument("bernoulli: empty counts");
    }
    double s = static_cast<double>(obs.counts[1]);
    return {{s / static_cast<double>(m)}, obs.counts[1] == 0 || obs.counts[0] == 0};
}

// ---- Multinomial ----

MultinomialModel::MultinomialModel(int d) : AffineModel(d, static_cast<size_t>(d) + 1) {
    if (d < 1) {
        throw std::invalid_argument("multinomial: d must be at least 1");
    }
}

std::string MultinomialModel::name() const {
    return fmt::format("multinomial(d={})", d_);
}

void MultinomialModel::check_domain(std::span<const double> theta) const {
    check_length(theta, d_, name());
    double s = 0.0;
    for (double t : theta) {
        if (t < 0.0) {
            throw DomainError(name() + ": negative probability");
        }
        s += t;
    }
    if (s > 1.0 + kDomainTol) {
        throw DomainError(name() + ": probabilities exceed 1");
    }
}

std::vector<double> MultinomialModel::probabilities(std::span<const double> theta) const {
    std::vector<double> p(theta.begin(), theta.end());
    p.push_back(1.0 - std::accumulate(theta.begin(), theta.end(), 0.0));
    return p;
}

Eigen::VectorXd MultinomialModel::gradient_row(size_t x) const {
    if (x == static_cast<size_t>(d_)) {
        return Eigen::VectorXd::Constant(d_, -1.0);
    }
    Eigen::VectorXd g = Eigen::VectorXd::Zero(d_);
    g[static_cast<Eigen::Index>(x)] = 1.0;
    return g;
}

Estimate MultinomialModel::mle(const Observation &obs) const {
    if (obs.counts.size() != k_) {
        throw std::invalid_argument(name() + ": count vector has the wrong length");
    }
    uint64_t m = total_count(obs);
    if (m == 0) {
        throw std::invalid_argument(name() + ": empty counts");
    }
    Estimate est;
    for (int k = 0; k < d_; ++k) {
        est.theta.push_back(static_cast<double>(obs.counts[k]) / static_cast<double>(m));
    }
    for (uint64_t c : obs.counts) {
        est.boundary |= c == 0;
    }
    return est;
}

// ---- Poisson ----

PoissonModel::PoissonModel(int truncation) : StatModel(1, static_cast<size_t>(truncation) + 1), trunc_(truncation) {
    if (truncation < 1) {
        throw std::invalid_argument("poisson: truncation must be at least 1");
    }
}

std::string PoissonModel::name() const {
    return fmt::format("poisson(K={})", trunc_);
}

void PoissonModel::check_domain(std::span<const double> theta) const {
    check_length(theta, 1, name());
    if (!(theta[0] > 0.0)) {
        throw DomainError("poisson: theta must be positive");
    }
}

std::vector<double> PoissonModel::probabilities(std::span<const double> theta) const {
    double lt = std::log(theta[0]);
    std::vector<double> logw(k_);
    for (size_t k = 0; k < k_; ++k) {
        logw[k] = static_cast<double>(k) * lt - std::lgamma(static_cast<double>(k) + 1.0);
    }
    double mx = *std::max_element(logw.begin(), logw.end());
    std::vector<double> p(k_);
    double z = 0.0;
    for (size_t k = 0; k < k_; ++k) {
        p[k] = std::exp(logw[k] - mx);
        z += p[k];
    }
    for (double &v : p) {
        v /= z;
    }
    return p;
}

PoissonModel::Cumulants PoissonModel::cumulants(double theta) const {
    std::array<double, 1> t{theta};
    std::vector<double> p = probabilities(t);
    double m1 = 0.0;
    for (size_t k = 0; k < k_; ++k) {
        m1 += p[k] * static_cast<double>(k);
    }
    double c2 = 0.0, c3 = 0.0;
    for (size_t k = 0; k < k_; ++k) {
        double dk = static_cast<double>(k) - m1;
        c2 += p[k] * dk * dk;
        c3 += p[k] * dk * dk * dk;
    }
    return {m1, c2, c3};
}

Eigen::MatrixXd PoissonModel::prob_jacobian(std::span<const double> theta) const {
    std::vector<double> p = probabilities(theta);
    Cumulants c = cumulants(theta[0]);
    Eigen::MatrixXd j(static_cast<Eigen::Index>(k_), 1);
    for (size_t k = 0; k < k_; ++k) {
        j(static_cast<Eigen::Index>(k), 0) = p[k] * (static_cast<double>(k) - c.k1) / theta[0];
    }
    return j;
}

Eigen::VectorXd PoissonModel::score(std::span<const double> theta, size_t x) const {
    Cumulants c = cumulants(theta[0]);
    return Eigen::VectorXd::Constant(1, (static_cast<double>(x) - c.k1) / theta[0]);
}

Eigen::MatrixXd PoissonModel::hessian(std::span<const double> theta, size_t x) const {
    Cumulants c = cumulants(theta[0]);
    double t = theta[0];
    return Eigen::MatrixXd::Constant(1, 1, -(static_cast<double>(x) + c.k2 - c.k1) / (t * t));
}

Tensor3 PoissonModel::third(std::span<const double> theta, size_t x) const {
    Cumulants c = cumulants(theta[0]);
    double t = theta[0];
    Tensor3 out(1);
    out(0, 0, 0) = (2.0 * static_cast<double>(x) - (c.k3 - 3.0 * c.k2 + 2.0 * c.k1)) / (t * t * t);
    return out;
}

Estimate PoissonModel::mle(const Observation &obs) const {
    if (obs.counts.size() != k_) {
        throw std::invalid_argument(name() + ": count vector has the wrong length");
    }
    uint64_t m = total_count(obs);
    if (m == 0) {
        throw std::invalid_argument(name() + ": empty counts");
    }
    double s = 0.0;
    for (size_t k = 0; k < k_; ++k) {
        s += static_cast<double>(k) * static_cast<double>(obs.counts[k]);
    }
    return {{s / static_cast<double>(m)}, s == 0.0};
}

double PoissonModel::truncation_mass(double theta) const {
    if (!(theta > 0.0)) {
        throw DomainError("poisson: theta must be positive");
    }
    double tail = 0.0;
    for (int k = trunc_ + 1; k < trunc_ + 400; ++k) {
        double term = std::exp(k * std::log(theta) - theta - std::lgamma(k + 1.0));
        tail += term;
        if (term < 1e-300 || (k > theta && term < 1e-18 * tail)) {
            break;
        }
    }
    return tail;
}

// ---- Gaussian, known covariance ----

GaussianKnownVarModel::GaussianKnownVarModel(Eigen::MatrixXd sigma)
    : StatModel(static_cast<int>(sigma.rows()), 0), sigma_(std::move(sigma)) {
    if (sigma_.rows() < 1 || sigma_.rows() != sigma_.cols()) {
        throw std::invalid_argument("gaussian: covariance must be a nonempty square matrix");
    }
    if ((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, sigma_.cwiseAbs().maxCoeff())) {
        throw std::invalid_argument("gaussian: covariance must be symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(sigma_);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("gaussian: covariance must be positive definite");
    }
    chol_ = llt.matrixL();
}

std::string GaussianKnownVarModel::name() const {
    return fmt::format("gaussian-known-var(d={})", d_);
}

void GaussianKnownVarModel::check_domain(std::span<const double> theta) const {
    check_length(theta, d_, name());
}

bool GaussianKnownVarModel::in_interior(std::span<const double> theta, double) const {
    try {
        check_domain(theta);
    } catch (const DomainError &) {
        return false;
    }
    return true;
}

namespace {
[[noreturn]] void not_enumerable(const std::string &who) {
    throw std::logic_error(who + " has a continuous outcome space and is handled analytically");
}
}  // namespace

std::vector<double> GaussianKnownVarModel::probabilities(std::span<const double>) const {
    not_enumerable(name());
}
Eigen::MatrixXd GaussianKnownVarModel::prob_jacobian(std::span<const double>) const {
    not_enumerable(name());
}
Eigen::VectorXd GaussianKnownVarModel::score(std::span<const double>, size_t) const {
    not_enumerable(name());
}
Eigen::MatrixXd GaussianKnownVarModel::hessian(std::span<const double>, size_t) const {
    return -sigma_.inverse();
}
Tensor3 GaussianKnownVarModel::third(std::span<const double>, size_t) const {
    return Tensor3(d_);
}

std::optional<Eigen::MatrixXd> GaussianKnownVarModel::analytic_fisher(std::span<const double>) const {
    return sigma_.inverse();
}

Observation GaussianKnownVarModel::sample(std::span<const double> theta, uint64_t m, Rng &rng) const {
    check_domain(theta);
    if (m < 1) {
        throw std::invalid_argument("gaussian: m must be at least 1");
    }
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(d_);
    for (int i = 0; i < d_; ++i) {
        z[i] = normal(rng);
    }
    Eigen::VectorXd mean = as_vector(theta) + chol_ * z / std::sqrt(static_cast<double>(m));
    Observation obs;
    obs.m = m;
    obs.mean.assign(mean.data(), mean.data() + d_);
    return obs;
}

Estimate GaussianKnownVarModel::mle(const Observation &obs) const {
    if (obs.mean.size() != static_cast<size_t>(d_)) {
        throw std::invalid_argument(name() + ": observation lacks a sample mean");
    }
    return {obs.mean, false};
}

// ---- factories and sampling ----

std::unique_ptr<StatModel> entangled_pauli_model(int n) {
    return std::make_unique<EntangledPauliModel>(n);
}

std::unique_ptr<StatModel> separable_pauli_model(int n, std::vector<double> r, std::vector<uint64_t> axes) {
    return std::make_unique<SeparablePauliModel>(n, std::move(r), std::move(axes));
}

std::unique_ptr<StatModel> two_copy_bell_model(int n) {
    return std::make_unique<TwoCopyBellModel>(n);
}

std::unique_ptr<StatModel> classical_model(Scheme kind, const ClassicalParams &params) {
    switch (kind) {
        case Scheme::Bernoulli: return std::make_unique<BernoulliModel>();
        case Scheme::Multinomial: return std::make_unique<MultinomialModel>(params.d);
        case Scheme::Poisson: return std::make_unique<PoissonModel>(params.truncation);
        case Scheme::GaussianKnownVar:
            if (params.covariance.size() == 0) {
                return std::make_unique<GaussianKnownVarModel>(Eigen::MatrixXd::Identity(params.d, params.d));
            }
            return std::make_unique<GaussianKnownVarModel>(params.covariance);
        default: throw std::invalid_argument(std::string("not a classical model: ") + scheme_name(kind));
    }
}

std::vector<uint64_t> sample_multinomial(std::span<const double> p, uint64_t m, Rng &rng) {
    std::vector<uint64_t> counts(p.size(), 0);
    if (p.empty()) {
        throw std::invalid_argument("sample_multinomial: empty distribution");
    }
    uint64_t remaining = m;
    double rest = 1.0;
    for (size_t k = 0; k + 1 < p.size() && remaining > 0; ++k) {
        double pk = std::max(0.0, p[k]);
        double q = rest > 0.0 ? std::clamp(pk / rest, 0.0, 1.0) : 1.0;
        uint64_t c;
        if (q >= 1.0) {
            c = remaining;
        } else if (q <= 0.0) {
            c = 0;
        } else {
            std::binomial_distribution<long long> bin(static_cast<long long>(remaining), q);
            c = static_cast<uint64_t>(bin(rng));
        }
        counts[k] = c;
        remaining -= c;
        rest -= pk;
    }
    counts.back() += remaining;
    return counts;
}

std::vector<uint64_t> sample_counts(const StatModel &model, std::span<const double> theta, uint64_t m, Rng &rng) {
    if (!model.enumerable()) {
        throw std::logic_error(model.name() + ": no finite outcome space to count");
    }
    model.check_domain(theta);
    if (m < 1) {
        throw std::invalid_argument("sample_counts: m must be at least 1");
    }
    return sample_multinomial(model.probabilities(theta), m, rng);
}

}  // namespace fisherbound

namespace fisherbound {

std::vector<double> random_channel_eigenvalues(int n, Rng &rng, double margin) {
    if (n < 1 || n > 12) {
        throw std::invalid_argument("random_channel_eigenvalues: n must be in [1, 12]");
    }
    size_t k = size_t{1} << (2 * n);
    if (margin < 0.0 || margin * static_cast<double>(k) >= 1.0) {
        throw std::invalid_argument("random_channel_eigenvalues: margin too large");
    }
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> p(k);
    double total = 0.0;
    for (double &v : p) {
        v = expo(rng);
        total += v;
    }
    double keep = 1.0 - margin * static_cast<double>(k);
    for (double &v : p) {
        v = keep * v / total + margin;
    }
    std::vector<double> lam = fwht(p);
    return std::vector<double>(lam.begin() + 1, lam.end());
}

std::vector<double> random_real_state_moments_sq(int n, Rng &rng, double mixing) {
    if (n < 1 || n > 6) {
        throw std::invalid_argument("random_real_state_moments_sq: dense evaluation limited to n <= 6");
    }
    Eigen::Index dim = Eigen::Index{1} << n;
    std::normal_distribution<double> normal;
    Eigen::VectorXd psi(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        psi[i] = normal(rng);
    }
    psi.normalize();
    Eigen::MatrixXcd rho = (psi * psi.transpose()).cast<std::complex<double>>();
    uint64_t k = uint64_t{1} << (2 * n);
    std::vector<double> s(k - 1);
    double shrink = (1.0 - mixing) * (1.0 - mixing);
    for (uint64_t a = 1; a < k; ++a) {
        double c = (rho * pauli_matrix(PauliIndex(a, n))).trace().real();
        s[a - 1] = shrink * c * c;
    }
    return s;
}

std::vector<double> random_interior_point(const StatModel &model, Rng &rng, double margin) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    switch (model.scheme()) {
        case Scheme::EntangledPauli:
            return random_channel_eigenvalues(static_cast<const EntangledPauliModel &>(model).qubits(), rng, margin);
        case Scheme::SeparablePauli:
            return random_channel_eigenvalues(static_cast<const SeparablePauliModel &>(model).qubits(), rng, margin);
        case Scheme::TwoCopyBell: {
            int n = static_cast<const TwoCopyBellModel &>(model).qubits();
            // Real states sit on the boundary for large margins, so mix harder on retries.
            for (int attempt = 0; attempt < 1000; ++attempt) {
                std::vector<double> s = random_real_state_moments_sq(n, rng, std::min(0.9, 0.1 + 0.01 * attempt));
                if (model.in_interior(s, margin)) {
                    return s;
                }
            }
            throw std::runtime_error("random_interior_point: no interior two-copy point found");
        }
        case Scheme::Bernoulli: return {margin + (1.0 - 2.0 * margin) * unif(rng)};
        case Scheme::Multinomial: {
            int d = model.dim();
            std::exponential_distribution<double> expo(1.0);
            std::vector<double> w(d + 1);
            double total = 0.0;
            for (double &v : w) {
                v = expo(rng);
                total += v;
            }
            double keep = 1.0 - margin * (d + 1);
            std::vector<double> theta(d);
            for (int i = 0; i < d; ++i) {
                theta[i] = keep * w[i] / total + margin;
            }
            return theta;
        }
        case Scheme::Poisson: return {0.5 + 4.5 * unif(rng)};
        case Scheme::GaussianKnownVar: {
            std::normal_distribution<double> normal;
            std::vector<double> theta(model.dim());
            for (double &t : theta) {
                t = normal(rng);
            }
            return theta;
        }
    }
    throw std::logic_error("random_interior_point: unhandled scheme");
}

}  // namespace fisherbound
