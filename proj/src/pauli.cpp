#include "fisherbound/pauli.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace fisherbound {

PauliIndex::PauliIndex(uint64_t a_, int n_) : a(a_), n(n_) {
    if (n < 1 || n > 31) {
        throw std::invalid_argument("PauliIndex: qubit count must be in [1, 31]");
    }
    if (a >> (2 * n)) {
        throw std::invalid_argument("PauliIndex: index out of range for " + std::to_string(n) + " qubits");
    }
}

PauliIndex PauliIndex::from_bits(uint64_t x, uint64_t z, int n) {
    return PauliIndex((x << n) | z, n);
}

int qubits_from_length(size_t len) {
    if (len < 4) {
        throw std::invalid_argument("length must be a power of 4 (at least 4), got " + std::to_string(len));
    }
    int bits = std::countr_zero(len);
    if (!std::has_single_bit(len) || bits % 2 != 0) {
        throw std::invalid_argument("length must be a power of 4, got " + std::to_string(len));
    }
    return bits / 2;
}

int symplectic_product(uint64_t a, uint64_t b, int n) {
    uint64_t mask = (uint64_t{1} << n) - 1;
    uint64_t ax = a >> n, az = a & mask;
    uint64_t bx = b >> n, bz = b & mask;
    return std::popcount((ax & bz) ^ (az & bx)) & 1;
}

int symplectic_product(PauliIndex a, PauliIndex b) {
    if (a.n != b.n) {
        throw std::invalid_argument("symplectic_product: mismatched qubit counts");
    }
    return symplectic_product(a.a, b.a, a.n);
}

std::vector<double> fwht(std::span<const double> v) {
    int n = qubits_from_length(v.size());
    std::vector<double> h(v.begin(), v.end());
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
    // h is the dyadic transform; the symplectic one reads it at the index with x/z swapped.
    uint64_t mask = (uint64_t{1} << n) - 1;
    std::vector<double> out(len);
    for (uint64_t b = 0; b < len; ++b) {
        uint64_t swapped = ((b & mask) << n) | (b >> n);
        out[b] = h[swapped];
    }
    return out;
}

RateVector::RateVector(std::vector<double> p) : p_(std::move(p)) {
    n_ = qubits_from_length(p_.size());
    double total = 0.0;
    for (double x : p_) {
        if (!(x >= -kSimplexTol)) {
            throw NotAChannel("rate vector has a negative entry");
        }
        total += x;
    }
    if (std::abs(total - 1.0) > kSimplexTol * static_cast<double>(p_.size())) {
        throw NotAChannel("rate vector does not sum to 1");
    }
}

EigenvalueVector EigenvalueVector::unchecked(std::vector<double> lambda) {
    EigenvalueVector out;
    out.n_ = qubits_from_length(lambda.size());
    out.l_ = std::move(lambda);
    return out;
}

EigenvalueVector::EigenvalueVector(std::vector<double> lambda) : l_(std::move(lambda)) {
    n_ = qubits_from_length(l_.size());
    if (std::abs(l_[0] - 1.0) > kSimplexTol) {
        throw NotAChannel("eigenvalue vector must have lambda_0 = 1");
    }
    for (double x : l_) {
        if (!(std::abs(x) <= 1.0 + kSimplexTol)) {
            throw NotAChannel("eigenvalue outside [-1, 1]");
        }
    }
    std::vector<double> p = fwht(l_);
    double scale = 1.0 / static_cast<double>(l_.size());
    for (double x : p) {
        if (x * scale < -kSimplexTol) {
            throw NotAChannel("eigenvalues do not describe a completely positive channel");
        }
    }
}

EigenvalueVector rates_to_eigenvalues(const RateVector &p) {
    std::vector<double> lambda = fwht(p.values());
    lambda[0] = 1.0;
    return EigenvalueVector::unchecked(std::move(lambda));
}

RateVector eigenvalues_to_rates(const EigenvalueVector &lambda) {
    std::vector<double> p = fwht(lambda.values());
    double scale = 1.0 / static_cast<double>(p.size());
    for (double &x : p) {
        x *= scale;
    }
    return RateVector(std::move(p));
}

Eigen::MatrixXcd pauli_matrix(PauliIndex a) {
    if (a.n > 6) {
        throw std::invalid_argument("pauli_matrix: dense representation limited to n <= 6");
    }
    using C = std::complex<double>;
    const C i(0.0, 1.0);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
    uint64_t x = a.x_bits(), z = a.z_bits();
    for (int k = 0; k < a.n; ++k) {
        int shift = a.n - 1 - k;
        bool xk = (x >> shift) & 1;
        bool zk = (z >> shift) & 1;
        Eigen::Matrix2cd f;
        if (!xk && !zk) {
            f << 1, 0, 0, 1;
        } else if (xk && !zk) {
            f << 0, 1, 1, 0;
        } else if (!xk && zk) {
            f << 1, 0, 0, -1;
        } else {
            f << 0, -i, i, 0;
        }
        Eigen::MatrixXcd next(out.rows() * 2, out.cols() * 2);
        for (Eigen::Index r = 0; r < out.rows(); ++r) {
            for (Eigen::Index c = 0; c < out.cols(); ++c) {
                next.block<2, 2>(2 * r, 2 * c) = out(r, c) * f;
            }
        }
        out = std::move(next);
    }
    return out;
}

}  // namespace fisherbound
