#include "fisherbound/special_functions.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fisherbound {

namespace {

constexpr double kInvE = 0.36787944117144233;

// Series about the branch point in p = sqrt(2(e x + 1)).
double branch_point_series(double x) {
    double p = std::sqrt(std::max(0.0, 2.0 * (std::numbers::e * x + 1.0)));
    return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0))));
}

}  // namespace

double lambert_w0(double x) {
    if (std::isnan(x)) {
        throw std::domain_error("lambert_w0: NaN argument");
    }
    if (x < -kInvE) {
        // Allow the branch point itself through despite rounding of 1/e.
        if (x < -kInvE - 1e-16) {
            throw std::domain_error("lambert_w0: argument below -1/e");
        }
        return -1.0;
    }
    if (x == 0.0) {
        return 0.0;
    }
    if (std::isinf(x)) {
        return x;
    }

    double w;
    if (x < -0.32) {
        w = branch_point_series(x);
        // Close to -1/e the series is already at rounding level and Halley loses accuracy.
        if (x < -kInvE + 1e-6) {
            return w;
        }
    } else if (std::abs(x) < 0.25) {
        w = x * (1.0 - x * (1.0 - 1.5 * x));
    } else if (x < std::numbers::e) {
        w = std::log1p(x) * 0.75;
    } else {
        double l1 = std::log(x);
        double l2 = std::log(l1);
        w = l1 - l2 + l2 / l1;
    }

    for (int it = 0; it < 64; ++it) {
        double ew = std::exp(w);
        double f = w * ew - x;
        double wp1 = w + 1.0;
        double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        double step = f / denom;
        w -= step;
        if (std::abs(step) <= 1e-15 * (1.0 + std::abs(w))) {
            break;
        }
    }
    return w;
}

double gaussian_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double gaussian_tail(double x) {
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

double gaussian_tail_inverse(double q) {
    if (!(q > 0.0 && q < 1.0)) {
        throw std::domain_error("gaussian_tail_inverse: q must lie in (0, 1)");
    }
    double lo = -40.0;
    double hi = 40.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
        double mid = 0.5 * (lo + hi);
        if (gaussian_tail(mid) > q) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

TailBoundPair mills_bounds(double x) {
    if (!(x > 0.0)) {
        throw std::domain_error("mills_bounds: x must be positive");
    }
    double phi = gaussian_pdf(x);
    return {x * phi / (1.0 + x * x), phi / x};
}

double berry_esseen_radius(double sigma, double rho, uint64_t m, double c) {
    if (!(sigma > 0.0)) {
        throw std::domain_error("berry_esseen_radius: sigma must be positive");
    }
    if (rho < 0.0) {
        throw std::domain_error("berry_esseen_radius: rho must be nonnegative");
    }
    if (m < 1) {
        throw std::domain_error("berry_esseen_radius: m must be at least 1");
    }
    return c * rho / (sigma * sigma * sigma * std::sqrt(static_cast<double>(m)));
}

}  // namespace fisherbound
