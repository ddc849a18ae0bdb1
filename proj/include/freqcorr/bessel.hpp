#pragma once

namespace freqcorr::special
{

/// Modified Bessel function of the second kind of order 1/4, K_{1/4}(x).
/// Relative error below 1e-10 for x in [1e-6, 700]. Throws DomainError for
/// x <= 0.
double bessel_k_quarter(double x);

/// Exponentially scaled e^x·K_{1/4}(x); finite for every x > 0.
double bessel_k_quarter_scaled(double x);

} // namespace freqcorr::special
