#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fisherbound/pauli.hpp"
#include "oracles.hpp"

using namespace fisherbound;

namespace {

std::vector<double> random_vec(size_t len, std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    std::vector<double> v(len);
    for (double &x : v) {
        x = g(rng);
    }
    return v;
}

}  // namespace

TEST(Symplectic, SingleQubit) {
    PauliIndex I(0, 1), X = PauliIndex::from_bits(1, 0, 1), Z = PauliIndex::from_bits(0, 1, 1);
    EXPECT_EQ(symplectic_product(I, X), 0);
    EXPECT_EQ(symplectic_product(I, Z), 0);
    EXPECT_EQ(symplectic_product(X, Z), 1);
    EXPECT_EQ(symplectic_product(X, X), 0);
    EXPECT_THROW(symplectic_product(PauliIndex(1, 1), PauliIndex(1, 2)), std::invalid_argument);
    EXPECT_THROW(PauliIndex(4, 1), std::invalid_argument);
}

TEST(Symplectic, MatchesMatrixCommutation) {
    for (int n = 1; n <= 2; ++n) {
        uint64_t k = uint64_t{1} << (2 * n);
        for (uint64_t a = 0; a < k; ++a) {
            for (uint64_t b = 0; b < k; ++b) {
                auto pa = oracle::pauli_word(oracle::letters_of(a, n));
                auto pb = oracle::pauli_word(oracle::letters_of(b, n));
                auto ab = oracle::cmul(pa, pb), ba = oracle::cmul(pb, pa);
                double diff = 0;
                for (size_t i = 0; i < ab.size(); ++i) {
                    for (size_t j = 0; j < ab.size(); ++j) {
                        diff = std::max(diff, std::abs(ab[i][j] - ba[i][j]));
                    }
                }
                EXPECT_EQ(symplectic_product(a, b, n), diff > 1e-12 ? 1 : 0) << a << "," << b;
            }
        }
    }
}

TEST(Fwht, Examples) {
    std::vector<double> delta{1, 0, 0, 0}, unif{0.25, 0.25, 0.25, 0.25}, v{0.7, 0.1, 0.1, 0.1};
    EXPECT_EQ(fwht(delta), (std::vector<double>{1, 1, 1, 1}));
    EXPECT_EQ(fwht(unif), (std::vector<double>{1, 0, 0, 0}));
    auto w = fwht(v), ref = oracle::naive_wht(v, 1);
    for (size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(w[i], ref[i], 1e-15);
    }
    std::vector<double> bad(8, 0.0);
    EXPECT_THROW(fwht(bad), std::invalid_argument);
}

TEST(Fwht, InvolutionAndNaiveSum) {
    std::mt19937_64 rng(7);
    for (int n = 1; n <= 3; ++n) {
        for (int s = 0; s < 10; ++s) {
            auto v = random_vec(size_t{1} << (2 * n), rng);
            auto w = fwht(v), ref = oracle::naive_wht(v, n), ww = fwht(w);
            double k = static_cast<double>(v.size());
            for (size_t i = 0; i < v.size(); ++i) {
                EXPECT_NEAR(w[i], ref[i], 1e-12 * k);
                EXPECT_NEAR(ww[i], k * v[i], 1e-12 * k);
            }
        }
    }
}

TEST(Rates, Conversions) {
    RateVector id({1, 0, 0, 0});
    EXPECT_EQ(rates_to_eigenvalues(id).values(), (std::vector<double>{1, 1, 1, 1}));
    RateVector unif(std::vector<double>(16, 1.0 / 16));
    auto lu = rates_to_eigenvalues(unif);
    EXPECT_EQ(lu[0], 1.0);
    for (size_t a = 1; a < 16; ++a) {
        EXPECT_NEAR(lu[a], 0.0, 1e-15);
    }
    auto l = rates_to_eigenvalues(RateVector({0.85, 0.05, 0.05, 0.05}));
    auto ref = oracle::naive_wht({0.85, 0.05, 0.05, 0.05}, 1);
    for (size_t a = 0; a < 4; ++a) {
        EXPECT_NEAR(l[a], ref[a], 1e-15);
        EXPECT_NEAR(l[a], a == 0 ? 1.0 : 0.8, 1e-15);
    }
    auto p = eigenvalues_to_rates(EigenvalueVector({1, 0.8, 0.8, 0.8}));
    EXPECT_NEAR(p[0], 0.85, 1e-15);
    EXPECT_NEAR(p[3], 0.05, 1e-15);
    auto pid = eigenvalues_to_rates(EigenvalueVector({1, 1, 1, 1}));
    EXPECT_EQ(pid.values(), (std::vector<double>{1, 0, 0, 0}));
    auto pu = eigenvalues_to_rates(EigenvalueVector({1, 0, 0, 0}));
    EXPECT_EQ(pu.values(), (std::vector<double>{0.25, 0.25, 0.25, 0.25}));
}

TEST(Rates, Validation) {
    EXPECT_THROW(RateVector({0.5, 0.5, 0.1, -0.1}), std::domain_error);
    EXPECT_THROW(RateVector({0.5, 0.5, 0.1, 0.0}), std::domain_error);
    EXPECT_THROW(EigenvalueVector({0.9, 0, 0, 0}), std::domain_error);
    // |lambda| <= 1 but the rates leave the simplex.
    EXPECT_THROW(EigenvalueVector({1, 1, 1, -1}), NotAChannel);
    EXPECT_NO_THROW(EigenvalueVector::unchecked({1, 1, 1, -1}));
}

TEST(Rates, RoundTrip) {
    std::mt19937_64 rng(3);
    std::gamma_distribution<double> g(1.0);
    for (int n = 1; n <= 3; ++n) {
        for (int s = 0; s < 10; ++s) {
            std::vector<double> p(size_t{1} << (2 * n));
            double sum = 0;
            for (double &x : p) {
                sum += (x = g(rng));
            }
            for (double &x : p) {
                x /= sum;
            }
            RateVector back = eigenvalues_to_rates(rates_to_eigenvalues(RateVector(p)));
            for (size_t a = 0; a < p.size(); ++a) {
                EXPECT_NEAR(back[a], p[a], 1e-12);
            }
        }
    }
}

TEST(PauliMatrix, AgainstKroneckerOracle) {
    using C = std::complex<double>;
    Eigen::MatrixXcd y = pauli_matrix(PauliIndex::from_bits(1, 1, 1));
    EXPECT_EQ(y(0, 1), C(0, -1));
    EXPECT_EQ(y(1, 0), C(0, 1));
    Eigen::MatrixXcd x = pauli_matrix(PauliIndex::from_bits(1, 0, 1));
    EXPECT_EQ(x(0, 1), C(1, 0));
    EXPECT_EQ(x(0, 0), C(0, 0));
    EXPECT_TRUE(pauli_matrix(PauliIndex(0, 2)).isIdentity());
    for (int n = 1; n <= 2; ++n) {
        for (uint64_t a = 0; a < (uint64_t{1} << (2 * n)); ++a) {
            auto ref = oracle::pauli_word(oracle::letters_of(a, n));
            auto m = pauli_matrix(PauliIndex(a, n));
            for (size_t i = 0; i < ref.size(); ++i) {
                for (size_t j = 0; j < ref.size(); ++j) {
                    EXPECT_EQ(m(i, j), ref[i][j]);
                }
            }
            for (uint64_t b = 0; b < (uint64_t{1} << (2 * n)); ++b) {
                C tr = (m * pauli_matrix(PauliIndex(b, n))).trace();
                EXPECT_NEAR(std::abs(tr - C(a == b ? std::ldexp(1.0, n) : 0.0)), 0.0, 1e-12);
            }
        }
    }
    EXPECT_THROW(pauli_matrix(PauliIndex(0, 7)), std::invalid_argument);
}
