#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace fisherbound {

// Pauli operator on n qubits. The x-bits sit in the high n positions and the
// z-bits in the low n positions of a; qubit 0 is the most significant bit of
// each half and the leftmost tensor factor.
struct PauliIndex {
    uint64_t a = 0;
    int n = 1;

    PauliIndex() = default;
    PauliIndex(uint64_t a_, int n_);

    uint64_t x_bits() const { return a >> n; }
    uint64_t z_bits() const { return a & ((uint64_t{1} << n) - 1); }
    static PauliIndex from_bits(uint64_t x, uint64_t z, int n);
};

class NotAChannel : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

inline constexpr double kSimplexTol = 1e-12;

// Pauli error rates p_a, a probability vector of length 4^n.
class RateVector {
  public:
    // Validates simplex membership within kSimplexTol.
    explicit RateVector(std::vector<double> p);

    const std::vector<double> &values() const { return p_; }
    double operator[](size_t a) const { return p_[a]; }
    size_t size() const { return p_.size(); }
    int n() const { return n_; }

  private:
    std::vector<double> p_;
    int n_;
};

// Pauli eigenvalues lambda_a with lambda_0 = 1.
class EigenvalueVector {
  public:
    // Validates lambda_0 = 1, |lambda_a| <= 1 and complete positivity.
    explicit EigenvalueVector(std::vector<double> lambda);

    // Skips the complete-positivity check; used for MLE outputs built from frequencies.
    static EigenvalueVector unchecked(std::vector<double> lambda);

    const std::vector<double> &values() const { return l_; }
    double operator[](size_t a) const { return l_[a]; }
    size_t size() const { return l_.size(); }
    int n() const { return n_; }

  private:
    EigenvalueVector() = default;
    std::vector<double> l_;
    int n_ = 0;
};

// Returns n when len == 4^n with n >= 1, otherwise throws std::invalid_argument.
int qubits_from_length(size_t len);

int symplectic_product(PauliIndex a, PauliIndex b);
int symplectic_product(uint64_t a, uint64_t b, int n);

// w_b = sum_a (-1)^<a,b> v_a with the symplectic pairing.
std::vector<double> fwht(std::span<const double> v);

EigenvalueVector rates_to_eigenvalues(const RateVector &p);
RateVector eigenvalues_to_rates(const EigenvalueVector &lambda);

// Dense 2^n x 2^n matrix, n <= 6.
Eigen::MatrixXcd pauli_matrix(PauliIndex a);

}  // namespace fisherbound
