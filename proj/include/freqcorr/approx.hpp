#pragma once

// Sum-frequency density of two super-Gaussian filters, its Bessel-function
// closed form, Gaussian approximations of it, and the moments of the fringe
// phase distribution.
//
// Dimensionless abscissa: x = (ω_p - 2Ω₀)/δω, where ω_p = ω₁+ω₂ and Ω₀, δω are
// the filter center and FWHM. The filter-pair density is
//   F(x) = ½ ∫ dy 2^(-|x+y|^n - |x-y|^n),   y = (ω₁-ω₂)/δω.

#include <cstddef>
#include <optional>
#include <vector>

#include "freqcorr/spectral.hpp"

namespace freqcorr::appx
{

struct DensityCurve
{
    std::vector<double> abscissa; // x, ascending
    std::vector<double> density;
    bool normalized = false;

    void validate() const;
    double integral() const; // trapezoid
};

/// Uniform abscissa on [-half_range, half_range].
std::vector<double> uniform_grid(double half_range = 4.0, std::size_t points = 4001);

DensityCurve normalize(DensityCurve curve);

/// Numeric filter-pair density on the given abscissa. The inner integral
/// uses a trapezoid rule whose step is halved once as an accuracy check;
/// throws AccuracyError if any value moves by more than 1e-8 relative.
DensityCurve sum_frequency_density_numeric(const spectral::FilterProfile& filter,
                                           const std::vector<double>& abscissa,
                                           bool normalize_output = false);

/// Order-4 closed form
///   F(x) = (√6/4)·|x|·2^(7x⁴)·K_{1/4}(9 ln2·x⁴),
/// carrying the same constant as the numeric density, so the two agree
/// pointwise. Substituting ν = (ln 2)^{1/4}·x gives the equivalent
/// |ν|·e^(7ν⁴)·K_{1/4}(9ν⁴) up to a constant factor.
double sum_frequency_density_exact(double x);

DensityCurve sum_frequency_density_exact_curve(const std::vector<double>& abscissa,
                                               bool normalize_output = false);

struct GaussianApproximation
{
    double amplitude = 0.0;
    double center = 0.0;
    double fwhm = 0.0;          // least-squares fit
    double rms_residual = 0.0;  // fit vs curve
    double direct_fwhm = 0.0;   // read off the curve by interpolation
    double moment_sigma = 0.0;  // standard deviation of the curve
    double moment_mean = 0.0;
};

/// Least-squares Gaussian fit of a normalized, unimodal curve. Throws
/// FitFailure for non-unimodal input.
GaussianApproximation gaussian_approximation(const DensityCurve& curve);

/// Normalized Gaussian density on the given abscissa.
DensityCurve gaussian_density(const std::vector<double>& abscissa, double center, double sigma);

/// Gaussian with the curve's mean and variance: the Gaussian minimizing
/// D(curve ‖ gaussian).
DensityCurve moment_matched_gaussian(const DensityCurve& curve);

/// D(p‖q) = ∫ p ln(p/q). Throws DomainError if q vanishes where p does not.
double kl_divergence_one_way(const DensityCurve& p, const DensityCurve& q);

struct KlDivergence
{
    double forward = 0.0;          // D(p‖q)
    std::optional<double> reverse; // D(q‖p); empty when p vanishes inside supp q
};

KlDivergence kl_divergence(const DensityCurve& p, const DensityCurve& q);

struct MomentGrid
{
    double half_range = 4.0;
    std::size_t points = 4001;
};

/// Density of the sum frequency at the detectors, |Φ(ω_p)|²·F(ω_p), with the
/// pump (and phase-matching) envelope included.
DensityCurve sum_frequency_distribution(const spectral::JointSpectrum& jsa,
                                        const spectral::FilterProfile& filter,
                                        const std::vector<double>& abscissa);

struct PhaseMoments
{
    double mean = 0.0;     // rad, relative to 2φ(Ω₀)
    double variance = 0.0; // rad²
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

/// Central moments of the total fringe phase φ(ω₁)+φ(ω₂)-2φ(Ω₀) under the
/// detected two-photon density |Φ|²|f(ω₁)|²|f(ω₂)|².
PhaseMoments phase_distribution_moments(const spectral::JointSpectrum& jsa,
                                        const spectral::FilterProfile& filter,
                                        const spectral::DispersiveMedium& medium,
                                        const MomentGrid& grid = {});

} // namespace freqcorr::appx
