#include "freqcorr/bessel.hpp"

#include <algorithm>
#include <cmath>

#include "freqcorr/errors.hpp"

namespace freqcorr::special
{

namespace
{

constexpr double kNu = 0.25;

// Small-argument expansion K_ν = π/(2 sin νπ)·(I_{-ν} - I_ν), two leading
// terms of each series. Used only where x < 1e-12, so the dropped terms are
// O(x²) relative.
double small_argument(double x)
{
    const double pre = 3.14159265358979323846 / (2.0 * std::sin(kNu * 3.14159265358979323846));
    const double h = 0.5 * x;
    const double i_minus = std::pow(h, -kNu) / std::tgamma(1.0 - kNu) *
                           (1.0 + h * h / (1.0 - kNu));
    const double i_plus = std::pow(h, kNu) / std::tgamma(1.0 + kNu) * (1.0 + h * h / (1.0 + kNu));
    return pre * (i_minus - i_plus);
}

} // namespace

// e^x K_ν(x) = ∫₀^∞ exp(-x(cosh t - 1)) cosh(νt) dt.
//
// The integrand is entire and decays double-exponentially, so the plain
// trapezoid rule converges geometrically in 1/h. The step shrinks like
// 1/sqrt(x) once the peak at t = 0 narrows.
double bessel_k_quarter_scaled(double x)
{
    if (!(x > 0.0))
        throw DomainError("bessel_k_quarter: argument must be positive");
    if (x < 1e-12)
        return small_argument(x) * std::exp(x);

    const double h = std::min(0.1, 0.5 / std::sqrt(x));
    double sum = 0.5; // t = 0 term, weighted by 1/2
    for (int k = 1;; ++k)
    {
        const double t = h * k;
        const double damp = x * (std::cosh(t) - 1.0);
        const double term = std::exp(-damp) * std::cosh(kNu * t);
        sum += term;
        // Past the maximum of the integrand and negligible.
        if (damp > kNu * t + 2.0 && term < 1e-18 * sum)
            break;
    }
    return h * sum;
}

double bessel_k_quarter(double x)
{
    return bessel_k_quarter_scaled(x) * std::exp(-x);
}

} // namespace freqcorr::special
