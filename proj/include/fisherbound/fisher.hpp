#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "fisherbound/models.hpp"
#include "fisherbound/pauli.hpp"

namespace fisherbound {

inline constexpr double kProbFloor = 1e-12;
inline constexpr double kExcludedInfoLimit = 1e-6;
inline constexpr double kRankTol = 1e-10;
inline constexpr double kEstimableTol = 1e-8;

class FimUndefined : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// Symmetric positive-semidefinite matrix with its spectral data computed once.
class FisherMatrix {
  public:
    // Throws std::invalid_argument if F is not symmetric to 1e-10 or has an
    // eigenvalue below -1e-10 (both relative to max(1, max|F_ij|)).
    explicit FisherMatrix(Eigen::MatrixXd f, double excluded_mass = 0.0);

    const Eigen::MatrixXd &matrix() const { return f_; }
    int dim() const { return static_cast<int>(f_.rows()); }
    double operator()(int i, int j) const { return f_(i, j); }

    // Ascending.
    const Eigen::VectorXd &eigenvalues() const { return evals_; }
    const Eigen::MatrixXd &eigenvectors() const { return evecs_; }
    double rank_tol() const { return rank_tol_; }
    int rank() const { return rank_; }
    bool full_rank() const { return rank_ == dim(); }

    // Inverse when full rank, Moore-Penrose pseudoinverse otherwise.
    const Eigen::MatrixXd &inverse() const { return inv_; }
    Eigen::VectorXd inverse_diagonal() const { return inv_.diagonal(); }
    double inverse_opnorm() const { return inv_opnorm_; }

    // Probability mass of outcomes dropped below the floor when this matrix came from fim().
    double excluded_mass() const { return excluded_mass_; }

  private:
    Eigen::MatrixXd f_;
    Eigen::VectorXd evals_;
    Eigen::MatrixXd evecs_;
    Eigen::MatrixXd inv_;
    double rank_tol_ = 0.0;
    double inv_opnorm_ = 0.0;
    double excluded_mass_ = 0.0;
    int rank_ = 0;
};

// F_ij = sum_x dp_i dp_j / p over outcomes with p > kProbFloor. Throws
// FimUndefined when the dropped outcomes would carry more than
// kExcludedInfoLimit of information (sum over them of max_i (dp_i)^2 / p).
FisherMatrix fim(const StatModel &model, std::span<const double> theta);

// 1 - theta_i^2.
std::vector<double> qfim_inverse_diag_pauli(std::span<const double> theta);

struct SeparableQfimDiag {
    std::vector<double> value;    // (1 - r^2 lambda^2)/r^2, +inf where r = 0
    std::vector<double> witness;  // 1/r^2 - 1, +inf where r = 0
};
SeparableQfimDiag separable_qfim_inverse_diag(std::span<const double> r, std::span<const double> lambda);

FisherMatrix pseudo_inverse(const FisherMatrix &f);

// ||F F^+ e_a - e_a|| <= kEstimableTol, with a zero-based.
bool estimable(const FisherMatrix &f, int a);

struct SpectralStats {
    double opnorm_inv;
    double max_inv_diag;
    double max_eig_inv;
    bool used_pseudo_inverse;
};
SpectralStats spectral_stats(const FisherMatrix &f);

// U^T D U with U_ab = 2^-n (-1)^<a,b> and D = diag(1/(4^n p_a)), all 4^n rows.
FisherMatrix bell_fim_full(const RateVector &p);
// bell_fim_full with row and column 0 deleted; the FIM of the entangled scheme.
FisherMatrix bell_fim_structural(const RateVector &p);

// lambda_max of the inverse entangled-scheme FIM without forming any matrix:
// power iteration on F^-1 = [lambda_{i xor j} - lambda_i lambda_j], applied via
// Walsh-Hadamard convolution.
struct PowerIterationResult {
    double value;
    int iterations;
    bool converged;
};
PowerIterationResult bell_inverse_lambda_max(const RateVector &p, int max_iter = 10000, double tol = 1e-12);

struct TraceBoundResult {
    double trace_sum;
    double bound;               // 2^n - 1
    uint64_t witness_a;         // Pauli index with the smallest diagonal entry
    double witness_value;
    double witness_threshold;   // (2^n - 1)/(4^n - 1)
    std::vector<double> diag;   // [F]_aa for a = 1 .. 4^n - 1
};
// Single-copy measurement at the maximally mixed state. Throws std::invalid_argument
// for an invalid POVM and std::runtime_error if the trace bound is exceeded.
TraceBoundResult single_copy_trace_bound(const std::vector<Eigen::MatrixXcd> &povm, int n);

// sum_j c_j sum_a d_{j,a}^2 for branch weights c and non-unital vectors d_j of length 4^n - 1.
double depolarizing_qfi_sum(std::span<const double> c, const std::vector<std::vector<double>> &d, int n);

}  // namespace fisherbound
