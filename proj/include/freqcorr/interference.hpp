#pragma once

// Coincidence probability of the two-photon N00N interferometer as a
// function of the analysis half-wave-plate angle θ.
//
// Probabilities are expressed with frequencies measured in units of the
// filter FWHM, i.e. P = ∬ (...) dω₁dω₂ / δω². Only ratios and visibilities
// are physically meaningful.

#include <cstddef>
#include <span>
#include <vector>

#include "freqcorr/spectral.hpp"

namespace freqcorr::engine
{

// Relative accuracy (with respect to the θ-independent normalization)
// required of every two-dimensional quadrature.
inline constexpr double kQuadratureTolerance = 1e-8;

// Default number of θ samples per fringe period for visibility extraction.
inline constexpr std::size_t kDenseScanPoints = 721;

enum class Normalization
{
    raw,
    mean_one,
};

struct ProbabilityCurve
{
    std::vector<double> thetas; // rad
    std::vector<double> values;
    Normalization normalization = Normalization::raw;
};

struct VisibilityLaw
{
    double kappa = 0.0;
    double phi_prime = 0.0;    // s
    double delta_omega = 0.0;  // rad/s
    double sigma_phi_sq = 0.0; // rad²
    double visibility = 1.0;
};

// Evaluates P(θ) from the full two-photon amplitude on a Cartesian
// (ω₁, ω₂) grid:
//   |Φff|²(cos²θ₁cos²θ₂ + sin²θ₁sin²θ₂) - 2Re[Φ(ω₁,ω₂)Φ*(ω₂,ω₁)]|ff|²cosθ₁cosθ₂sinθ₁sinθ₂
// with θᵢ = 2θ + φ(ωᵢ)/2. Accepts asymmetric and complex Φ.
class GeneralIntegrand
{
public:
    GeneralIntegrand(const spectral::JointSpectrum& jsa, const spectral::FilterProfile& filter,
                     const spectral::DispersiveMedium& medium, const spectral::FrequencyGrid& grid);

    double probability(double theta) const;
    double normalization() const { return norm_; }
    double error_estimate() const { return error_; }

private:
    GeneralIntegrand(const spectral::JointSpectrum& jsa, const spectral::FilterProfile& filter,
                     const spectral::DispersiveMedium& medium, const spectral::FrequencyGrid& grid,
                     std::size_t nodes);

    std::size_t n_ = 0;
    std::vector<double> half_phase_;  // φ(ωᵢ)/2
    std::vector<double> direct_;      // wᵢwⱼ|Φᵢⱼ|²|fᵢ|²|fⱼ|², row-major
    std::vector<double> exchange_;    // 2wᵢwⱼRe[ΦᵢⱼΦ*ⱼᵢ]|fᵢ|²|fⱼ|²
    double norm_ = 0.0;
    double error_ = 0.0;
};

// Evaluates ∬|Φ|²|f(ω₁)|²|f(ω₂)|² cos²(θ₁+θ₂) in the rotated coordinates
// ω_p = ω₁+ω₂, ω₋ = ω₁-ω₂. Requires a symmetric spectrum without spectral
// phase; the ω_p range is trimmed to the pump envelope.
class SymmetricIntegrand
{
public:
    SymmetricIntegrand(const spectral::JointSpectrum& jsa, const spectral::FilterProfile& filter,
                       const spectral::DispersiveMedium& medium,
                       const spectral::FrequencyGrid& grid);

    double probability(double theta) const;
    double normalization() const { return norm_; }
    double error_estimate() const { return error_; }

private:
    SymmetricIntegrand(const spectral::JointSpectrum& jsa, const spectral::FilterProfile& filter,
                       const spectral::DispersiveMedium& medium,
                       const spectral::FrequencyGrid& grid, std::size_t nodes);

    std::vector<double> weight_;    // quadrature weight × density
    std::vector<double> half_sum_;  // (φ(ω₁)+φ(ω₂))/2
    double norm_ = 0.0;
    double error_ = 0.0;
};

double coincidence_probability_general(const spectral::JointSpectrum& jsa,
                                       const spectral::FilterProfile& filter,
                                       const spectral::DispersiveMedium& medium, double theta,
                                       const spectral::FrequencyGrid& grid);

double coincidence_probability_symmetric(const spectral::JointSpectrum& jsa,
                                         const spectral::FilterProfile& filter,
                                         const spectral::DispersiveMedium& medium, double theta,
                                         const spectral::FrequencyGrid& grid);

/// True when the symmetric (rotated-coordinate) path applies.
bool symmetric_path_applies(const spectral::JointSpectrum& jsa);

/// P(θ) for every θ, through the symmetric path when it applies and the
/// general path otherwise.
ProbabilityCurve simulate_fringe_scan(const spectral::JointSpectrum& jsa,
                                      const spectral::FilterProfile& filter,
                                      const spectral::DispersiveMedium& medium,
                                      std::span<const double> thetas, Normalization normalization,
                                      const spectral::FrequencyGrid& grid);

/// (max - min)/(max + min) of a sampled curve.
double curve_visibility(const ProbabilityCurve& curve);

/// Visibility of the two-photon fringe from a dense scan over one period
/// (π/4 in θ). The extreme samples are refined by a parabola through their
/// neighbours.
double engine_visibility(const spectral::JointSpectrum& jsa, const spectral::FilterProfile& filter,
                         const spectral::DispersiveMedium& medium,
                         const spectral::FrequencyGrid& grid,
                         std::size_t points_per_period = kDenseScanPoints);

/// Variance of the total fringe phase under linear dispersion with the
/// filter density replaced by a Gaussian of FWHM δω:
///   σ_φ² = φ′²·δω²/(8 ln 2)·κ/(1+κ).
/// kappa may be +infinity.
double closed_form_sigma_phi(double kappa, double phi_prime, double delta_omega);

VisibilityLaw analytic_visibility(double kappa, double phi_prime, double delta_omega);

/// Single-photon fringe ∫|f|² cos²(2θ + φ(ω)/2) dω/δω.
double single_photon_probability(const spectral::FilterProfile& filter,
                                 const spectral::DispersiveMedium& medium, double theta,
                                 const spectral::FrequencyGrid& grid);

/// |∫|f|² e^{iφ}| / ∫|f|²: contrast of a single-photon fringe through the
/// medium.
double single_photon_visibility(const spectral::FilterProfile& filter,
                                const spectral::DispersiveMedium& medium,
                                const spectral::FrequencyGrid& grid);

} // namespace freqcorr::engine
