#pragma once

#include <cstdint>

namespace fisherbound {

// Default Berry-Esseen constant. Every bound accepts an override.
inline constexpr double kBerryEsseenC = 0.4748;

struct TailBoundPair {
    double lower;
    double upper;
};

// Principal branch of the Lambert W function. Throws std::domain_error for x < -1/e.
double lambert_w0(double x);

double gaussian_pdf(double x);

// Upper tail 1 - Phi(x) of the standard normal.
double gaussian_tail(double x);

// Inverse of gaussian_tail on (0, 1).
double gaussian_tail_inverse(double q);

// x phi(x)/(1+x^2) < 1 - Phi(x) < phi(x)/x for x > 0.
TailBoundPair mills_bounds(double x);

// C rho / (sigma^3 sqrt(m)).
double berry_esseen_radius(double sigma, double rho, uint64_t m, double c = kBerryEsseenC);

}  // namespace fisherbound
