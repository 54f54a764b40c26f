#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fisherbound/rng.hpp"

namespace fisherbound {

enum class Scheme {
    EntangledPauli,
    SeparablePauli,
    TwoCopyBell,
    Bernoulli,
    Multinomial,
    Poisson,
    GaussianKnownVar,
};

const char *scheme_name(Scheme s);
// Parses the tags used in configs ("entangled-pauli", "bernoulli", ...).
Scheme parse_scheme(const std::string &tag);

class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// Symmetric d x d x d array.
struct Tensor3 {
    int d = 0;
    std::vector<double> v;

    explicit Tensor3(int d_ = 0) : d(d_), v(static_cast<size_t>(d_) * d_ * d_, 0.0) {}
    double &operator()(int i, int j, int k) { return v[(static_cast<size_t>(i) * d + j) * d + k]; }
    double operator()(int i, int j, int k) const { return v[(static_cast<size_t>(i) * d + j) * d + k]; }
    // T(u, u, u)
    double contract3(const Eigen::VectorXd &u) const;
    // T(., u, u)
    Eigen::VectorXd contract2(const Eigen::VectorXd &u) const;
};

// max over unit u of |T(u,u,u)|, by shifted symmetric power iteration from several starts.
double tensor_op_norm(const Tensor3 &t, int starts = 8, uint64_t seed = 1);

// Sufficient statistics of an experiment with m repetitions. Finite-outcome
// models fill counts, the Gaussian model fills mean.
struct Observation {
    uint64_t m = 0;
    std::vector<uint64_t> counts;
    std::vector<double> mean;
};

struct Estimate {
    std::vector<double> theta;
    // The estimate sits on the boundary of the parameter domain (e.g. a zero count).
    bool boundary = false;
};

class StatModel {
  public:
    virtual ~StatModel() = default;

    virtual Scheme scheme() const = 0;
    virtual std::string name() const = 0;
    int dim() const { return d_; }
    // Zero for models that are not enumerated over outcomes.
    size_t num_outcomes() const { return k_; }
    virtual bool enumerable() const { return true; }

    // Throws DomainError when theta is outside the model's parameter domain.
    virtual void check_domain(std::span<const double> theta) const = 0;
    // Interior test: in the domain and every probability at least margin.
    virtual bool in_interior(std::span<const double> theta, double margin) const;

    virtual std::vector<double> probabilities(std::span<const double> theta) const = 0;
    // K x d matrix of dp_x/dtheta_i.
    virtual Eigen::MatrixXd prob_jacobian(std::span<const double> theta) const = 0;

    // Derivatives of log p_theta(x).
    virtual Eigen::VectorXd score(std::span<const double> theta, size_t x) const = 0;
    virtual Eigen::MatrixXd hessian(std::span<const double> theta, size_t x) const = 0;
    virtual Tensor3 third(std::span<const double> theta, size_t x) const = 0;

    // Closed-form Fisher information when the model is not enumerated.
    virtual std::optional<Eigen::MatrixXd> analytic_fisher(std::span<const double>) const { return std::nullopt; }

    // sup over the Euclidean ball of the given radius of (1/2)||l'''(theta+D, x)||_op,
    // when it has a closed form. +inf when the ball reaches p_x = 0.
    virtual std::optional<double> envelope_exact(std::span<const double>, size_t, double) const {
        return std::nullopt;
    }

    virtual Observation sample(std::span<const double> theta, uint64_t m, Rng &rng) const;
    virtual Estimate mle(const Observation &obs) const = 0;

    // Free-form descriptive entries carried into reports.
    virtual std::vector<std::pair<std::string, std::string>> metadata() const { return {}; }

  protected:
    StatModel(int d, size_t k) : d_(d), k_(k) {}
    int d_;
    size_t k_;
};

// Models whose outcome probabilities are affine in theta: p_x = g_x . theta + b_x.
// Derivatives of log p have the closed forms g/p, -g g^T/p^2, 2 g(x)g(x)g/p^3.
class AffineModel : public StatModel {
  public:
    virtual Eigen::VectorXd gradient_row(size_t x) const = 0;

    Eigen::MatrixXd prob_jacobian(std::span<const double> theta) const override;
    Eigen::VectorXd score(std::span<const double> theta, size_t x) const override;
    Eigen::MatrixXd hessian(std::span<const double> theta, size_t x) const override;
    Tensor3 third(std::span<const double> theta, size_t x) const override;
    std::optional<double> envelope_exact(std::span<const double> theta, size_t x, double radius) const override;

  protected:
    using StatModel::StatModel;
    double prob_at(std::span<const double> theta, size_t x) const;
};

// Bell-basis measurement of the Choi state of an n-qubit Pauli channel.
// Parameters are lambda_1 .. lambda_{4^n - 1}.
class EntangledPauliModel : public AffineModel {
  public:
    explicit EntangledPauliModel(int n);
    Scheme scheme() const override { return Scheme::EntangledPauli; }
    std::string name() const override;
    int qubits() const { return n_; }

    void check_domain(std::span<const double> theta) const override;
    std::vector<double> probabilities(std::span<const double> theta) const override;
    Eigen::VectorXd gradient_row(size_t x) const override;
    Estimate mle(const Observation &obs) const override;

    // Full eigenvalue vector with lambda_0 = 1 prepended.
    std::vector<double> embed(std::span<const double> theta) const;

  protected:
    int n_;
};

// Two-copy Bell measurement on rho (x) rho. Parameters are s_a = c_a^2.
class TwoCopyBellModel : public EntangledPauliModel {
  public:
    explicit TwoCopyBellModel(int n);
    Scheme scheme() const override { return Scheme::TwoCopyBell; }
    std::string name() const override;
    void check_domain(std::span<const double> theta) const override;
    std::vector<std::pair<std::string, std::string>> metadata() const override;
};

// Accuracy on s_a = c_a^2 implied by accuracy eps_c on |c_a|.
double bell_moment_epsilon(double eps_c);

// Product probe state with Bloch components r_a, sent through the channel and
// measured in the eigenbasis of one Pauli axis per shot. Axis j of the measured
// list is chosen with probability 1/|axes|; outcome (axis j, +/-) is index 2j, 2j+1.
class SeparablePauliModel : public AffineModel {
  public:
    // r has length 4^n - 1 and is indexed by a - 1. Empty axes means every a >= 1.
    SeparablePauliModel(int n, std::vector<double> r, std::vector<uint64_t> axes = {});
    Scheme scheme() const override { return Scheme::SeparablePauli; }
    std::string name() const override;
    int qubits() const { return n_; }
    const std::vector<double> &probe() const { return r_; }
    const std::vector<uint64_t> &axes() const { return axes_; }

    void check_domain(std::span<const double> theta) const override;
    std::vector<double> probabilities(std::span<const double> theta) const override;
    Eigen::VectorXd gradient_row(size_t x) const override;
    Estimate mle(const Observation &obs) const override;

    // Fisher information of a single shot on axis a: r_a^2/(1 - r_a^2 lambda_a^2).
    double single_axis_information(uint64_t a, double lambda_a) const;
    // Coordinates (a - 1) whose probe component vanishes or that are never measured.
    std::vector<int> unidentifiable() const;

  private:
    int n_;
    std::vector<double> r_;
    std::vector<uint64_t> axes_;
};

// Bloch components r_a of a product of single-qubit states, each given as (rx, ry, rz).
std::vector<double> product_probe(const std::vector<std::array<double, 3>> &bloch);

// Outcomes (0, 1) with probabilities (1 - theta, theta).
class BernoulliModel : public AffineModel {
  public:
    BernoulliModel();
    Scheme scheme() const override { return Scheme::Bernoulli; }
    std::string name() const override { return "bernoulli"; }
    void check_domain(std::span<const double> theta) const override;
    std::vector<double> probabilities(std::span<const double> theta) const override;
    Eigen::VectorXd gradient_row(size_t x) const override;
    Estimate mle(const Observation &obs) const override;
};

// d free probabilities theta_1..theta_d; the last of d + 1 outcomes takes the remainder.
class MultinomialModel : public AffineModel {
  public:
    explicit MultinomialModel(int d);
    Scheme scheme() const override { return Scheme::Multinomial; }
    std::string name() const override;
    void check_domain(std::span<const double> theta) const override;
    std::vector<double> probabilities(std::span<const double> theta) const override;
    Eigen::VectorXd gradient_row(size_t x) const override;
    Estimate mle(const Observation &obs) const override;
};

// Poisson(theta) restricted to {0..K} and renormalized.
class PoissonModel : public StatModel {
  public:
    explicit PoissonModel(int truncation = 20);
    Scheme scheme() const override { return Scheme::Poisson; }
    std::string name() const override;
    int truncation() const { return trunc_; }

    void check_domain(std::span<const double> theta) const override;
    std::vector<double> probabilities(std::span<const double> theta) const override;
    Eigen::MatrixXd prob_jacobian(std::span<const double> theta) const override;
    Eigen::VectorXd score(std::span<const double> theta, size_t x) const override;
    Eigen::MatrixXd hessian(std::span<const double> theta, size_t x) const override;
    Tensor3 third(std::span<const double> theta, size_t x) const override;
    // Sample mean, the untruncated closed form.
    Estimate mle(const Observation &obs) const override;

    // Mass of the untruncated Poisson above K.
    double truncation_mass(double theta) const;

  private:
    struct Cumulants {
        double k1, k2, k3;
    };
    Cumulants cumulants(double theta) const;
    int trunc_;
};

// y ~ N(theta, Sigma) with known Sigma, handled analytically.
class GaussianKnownVarModel : public StatModel {
  public:
    explicit GaussianKnownVarModel(Eigen::MatrixXd sigma);
    Scheme scheme() const override { return Scheme::GaussianKnownVar; }
    std::string name() const override;
    bool enumerable() const override { return false; }
    const Eigen::MatrixXd &covariance() const { return sigma_; }

    void check_domain(std::span<const double> theta) const override;
    bool in_interior(std::span<const double> theta, double margin) const override;
    std::vector<double> probabilities(std::span<const double> theta) const override;
    Eigen::MatrixXd prob_jacobian(std::span<const double> theta) const override;
    Eigen::VectorXd score(std::span<const double> theta, size_t x) const override;
    Eigen::MatrixXd hessian(std::span<const double> theta, size_t x) const override;
    Tensor3 third(std::span<const double> theta, size_t x) const override;
    std::optional<Eigen::MatrixXd> analytic_fisher(std::span<const double> theta) const override;

    // Draws the sample mean directly; it is sufficient and exactly N(theta, Sigma/m).
    Observation sample(std::span<const double> theta, uint64_t m, Rng &rng) const override;
    Estimate mle(const Observation &obs) const override;

  private:
    Eigen::MatrixXd sigma_;
    Eigen::MatrixXd chol_;
};

std::unique_ptr<StatModel> entangled_pauli_model(int n);
std::unique_ptr<StatModel> separable_pauli_model(int n, std::vector<double> r, std::vector<uint64_t> axes = {});
std::unique_ptr<StatModel> two_copy_bell_model(int n);

struct ClassicalParams {
    int d = 1;                   // multinomial free parameters, Gaussian dimension
    int truncation = 20;         // Poisson K
    Eigen::MatrixXd covariance;  // Gaussian; identity of size d when empty
};
std::unique_ptr<StatModel> classical_model(Scheme kind, const ClassicalParams &params = {});

// Multinomial draw of m outcomes under p, by sequential conditional binomials.
std::vector<uint64_t> sample_multinomial(std::span<const double> p, uint64_t m, Rng &rng);

std::vector<uint64_t> sample_counts(const StatModel &model, std::span<const double> theta, uint64_t m, Rng &rng);

// Eigenvalues lambda_1.. of a Pauli channel with rates drawn from Dirichlet(1, ..., 1),
// which is the uniform distribution over valid channels. A positive margin mixes
// the rates with the uniform vector so that every rate is at least margin.
std::vector<double> random_channel_eigenvalues(int n, Rng &rng, double margin = 0.0);

// Squared Pauli moments c_a^2 of a random real pure state mixed with weight
// `mixing` of the maximally mixed state. Dense, n <= 6.
std::vector<double> random_real_state_moments_sq(int n, Rng &rng, double mixing = 0.1);

// A random point of the model's domain with every outcome probability at least margin.
std::vector<double> random_interior_point(const StatModel &model, Rng &rng, double margin = 1e-3);

}  // namespace fisherbound
