// Independent reference implementations used only by the tests. Nothing here
// calls into the library; each routine is the slow, obvious version.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;
using CMat = std::vector<std::vector<std::complex<double>>>;

// w e^w = x on the principal branch, by bisection in long double.
inline double lambert_w0_bisect(double x) {
    long double lo = -1.0L, hi = std::max(1.0L, std::log1p(static_cast<long double>(std::max(x, 0.0))) + 1.0L);
    for (int i = 0; i < 400; ++i) {
        long double mid = 0.5L * (lo + hi);
        if (mid * std::exp(mid) < x) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return static_cast<double>(0.5L * (lo + hi));
}

inline double adaptive_simpson(const std::function<double(double)> &f, double a, double b, double tol, int depth = 50) {
    auto simpson = [&](double l, double r, double fl, double fm, double fr) {
        return (r - l) / 6.0 * (fl + 4.0 * fm + fr);
    };
    std::function<double(double, double, double, double, double, double, double, int)> rec =
        [&](double l, double r, double fl, double fm, double fr, double whole, double eps, int dep) -> double {
        double m = 0.5 * (l + r);
        double lm = 0.5 * (l + m), rm = 0.5 * (m + r);
        double flm = f(lm), frm = f(rm);
        double left = simpson(l, m, fl, flm, fm), right = simpson(m, r, fm, frm, fr);
        if (dep <= 0 || std::abs(left + right - whole) <= 15.0 * eps) {
            return left + right + (left + right - whole) / 15.0;
        }
        return rec(l, m, fl, flm, fm, left, eps / 2, dep - 1) + rec(m, r, fm, frm, fr, right, eps / 2, dep - 1);
    };
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return rec(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, depth);
}

inline double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// 1 - Phi(x) for x >= 0 by quadrature of the density, in panels scaled to the decay
// rate 1/(1 + x) with a tolerance relative to phi(x).
inline double gaussian_tail_quad(double x) {
    double h = 0.25 / (1.0 + x), span = 60.0 / (1.0 + x) + 10.0 / (1.0 + x * x);
    double total = 0.0;
    for (double a = x; a < x + span; a += h) {
        total += adaptive_simpson(phi, a, a + h, 1e-16 * phi(x) * h);
    }
    return total;
}

inline int popcount(uint64_t v) {
    int c = 0;
    for (; v; v >>= 1) {
        c += static_cast<int>(v & 1);
    }
    return c;
}

// <a, b> with x bits in the high n positions and z bits in the low n positions.
inline int symplectic(uint64_t a, uint64_t b, int n) {
    uint64_t mask = (uint64_t{1} << n) - 1;
    uint64_t ax = a >> n, az = a & mask, bx = b >> n, bz = b & mask;
    return (popcount(ax & bz) + popcount(az & bx)) & 1;
}

inline std::vector<double> naive_wht(const std::vector<double> &v, int n) {
    std::vector<double> w(v.size(), 0.0);
    for (uint64_t b = 0; b < v.size(); ++b) {
        for (uint64_t a = 0; a < v.size(); ++a) {
            w[b] += symplectic(a, b, n) ? -v[a] : v[a];
        }
    }
    return w;
}

inline CMat cmat(size_t r, size_t c) { return CMat(r, std::vector<std::complex<double>>(c)); }

inline CMat cmul(const CMat &a, const CMat &b) {
    CMat out = cmat(a.size(), b[0].size());
    for (size_t i = 0; i < a.size(); ++i) {
        for (size_t k = 0; k < b.size(); ++k) {
            for (size_t j = 0; j < b[0].size(); ++j) {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    return out;
}

inline CMat kron(const CMat &a, const CMat &b) {
    CMat out = cmat(a.size() * b.size(), a[0].size() * b[0].size());
    for (size_t i = 0; i < a.size(); ++i) {
        for (size_t j = 0; j < a[0].size(); ++j) {
            for (size_t k = 0; k < b.size(); ++k) {
                for (size_t l = 0; l < b[0].size(); ++l) {
                    out[i * b.size() + k][j * b[0].size() + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    return out;
}

// Pauli operator with per-qubit letters 0=I, 1=X, 2=Y, 3=Z, qubit 0 leftmost.
inline CMat pauli_word(const std::vector<int> &letters) {
    using C = std::complex<double>;
    const CMat I{{1, 0}, {0, 1}}, X{{0, 1}, {1, 0}}, Y{{0, C(0, -1)}, {C(0, 1), 0}}, Z{{1, 0}, {0, -1}};
    CMat out{{1}};
    for (int l : letters) {
        out = kron(out, l == 0 ? I : l == 1 ? X : l == 2 ? Y : Z);
    }
    return out;
}

// Letters of Pauli index a under the (x high, z low) layout, qubit 0 = most significant bit.
inline std::vector<int> letters_of(uint64_t a, int n) {
    std::vector<int> out(n);
    for (int q = 0; q < n; ++q) {
        int x = static_cast<int>((a >> (2 * n - 1 - q)) & 1);
        int z = static_cast<int>((a >> (n - 1 - q)) & 1);
        out[q] = x && z ? 2 : x ? 1 : z ? 3 : 0;
    }
    return out;
}

inline std::complex<double> trace(const CMat &a) {
    std::complex<double> t = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        t += a[i][i];
    }
    return t;
}

// Entangled-scheme distribution from the definition p_x = 4^-n sum_a lambda_a (-1)^<x,a>.
inline std::vector<double> entangled_probs(const std::vector<double> &lambda_full, int n) {
    std::vector<double> w = naive_wht(lambda_full, n);
    for (double &v : w) {
        v /= static_cast<double>(lambda_full.size());
    }
    return w;
}

// F_ij = sum_x dp_i dp_j / p by central differences of a probability map.
inline Mat fd_fisher(const std::function<std::vector<double>(const std::vector<double> &)> &probs,
                     const std::vector<double> &theta, double h = 1e-6) {
    size_t d = theta.size();
    std::vector<double> p = probs(theta);
    std::vector<std::vector<double>> dp(d);
    for (size_t i = 0; i < d; ++i) {
        std::vector<double> tp = theta, tm = theta;
        tp[i] += h;
        tm[i] -= h;
        std::vector<double> pp = probs(tp), pm = probs(tm);
        dp[i].resize(p.size());
        for (size_t x = 0; x < p.size(); ++x) {
            dp[i][x] = (pp[x] - pm[x]) / (2 * h);
        }
    }
    Mat f(d, std::vector<double>(d, 0.0));
    for (size_t i = 0; i < d; ++i) {
        for (size_t j = 0; j < d; ++j) {
            for (size_t x = 0; x < p.size(); ++x) {
                if (p[x] > 1e-12) {
                    f[i][j] += dp[i][x] * dp[j][x] / p[x];
                }
            }
        }
    }
    return f;
}

// Cyclic Jacobi eigenvalue iteration; eigenvalues ascending, eigenvectors as columns.
struct Eig {
    std::vector<double> values;
    Mat vectors;
};

inline Eig jacobi_eigen(Mat a) {
    size_t n = a.size();
    Mat v(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) {
        v[i][i] = 1.0;
    }
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = i + 1; j < n; ++j) {
                off += a[i][j] * a[i][j];
            }
        }
        if (off < 1e-30) {
            break;
        }
        for (size_t p = 0; p < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) {
                    continue;
                }
                double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (size_t k = 0; k < n; ++k) {
                    double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (size_t k = 0; k < n; ++k) {
                    double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (size_t k = 0; k < n; ++k) {
                    double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](size_t x, size_t y) { return a[x][x] < a[y][y]; });
    Eig e;
    e.vectors.assign(n, std::vector<double>(n));
    for (size_t k = 0; k < n; ++k) {
        e.values.push_back(a[order[k]][order[k]]);
        for (size_t i = 0; i < n; ++i) {
            e.vectors[i][k] = v[i][order[k]];
        }
    }
    return e;
}

// Orthogonal projector onto span of the given columns, by modified Gram-Schmidt.
inline Mat range_projector(const std::vector<std::vector<double>> &cols, size_t dim) {
    std::vector<std::vector<double>> basis;
    for (auto c : cols) {
        for (const auto &b : basis) {
            double dot = 0.0;
            for (size_t i = 0; i < dim; ++i) {
                dot += b[i] * c[i];
            }
            for (size_t i = 0; i < dim; ++i) {
                c[i] -= dot * b[i];
            }
        }
        double nrm = 0.0;
        for (double x : c) {
            nrm += x * x;
        }
        nrm = std::sqrt(nrm);
        if (nrm > 1e-10) {
            for (double &x : c) {
                x /= nrm;
            }
            basis.push_back(c);
        }
    }
    Mat p(dim, std::vector<double>(dim, 0.0));
    for (const auto &b : basis) {
        for (size_t i = 0; i < dim; ++i) {
            for (size_t j = 0; j < dim; ++j) {
                p[i][j] += b[i] * b[j];
            }
        }
    }
    return p;
}

// Pr[|S/m - theta| <= eps] for S ~ Binomial(m, theta), summed exactly in log space.
inline double binomial_success(uint64_t m, double theta, double eps) {
    double total = 0.0;
    for (uint64_t k = 0; k <= m; ++k) {
        double est = static_cast<double>(k) / static_cast<double>(m);
        if (std::abs(est - theta) <= eps) {
            double lp = std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0) +
                        k * std::log(theta) + (m - k) * std::log1p(-theta);
            total += std::exp(lp);
        }
    }
    return total;
}

}  // namespace oracle
