#pragma once

// Frequency-domain models of the photon-pair source and the optics it passes
// through: joint spectral amplitude, detection filters, dispersive medium.
// All frequencies are angular, in rad/s; phases in rad; delays in s.

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <variant>

namespace freqcorr::spectral
{

enum class QuadratureScheme
{
    trapezoid,
    gauss_legendre,
};

// Integration grid shared by the two-dimensional spectral integrals.
// Nodes cover center ± half_range·δω on each axis, clipped to the region
// where the detection filter transmits more than 1e-40.
struct FrequencyGrid
{
    double center = 0.0;             // rad/s
    double half_range = 4.0;         // multiples of the filter FWHM
    std::size_t nodes_per_axis = 256;
    QuadratureScheme scheme = QuadratureScheme::gauss_legendre;

    void validate() const;
};

// Super-Gaussian transmission |f(ω)|² = 2^(-(2(ω-Ω₀)/δω)^n).
struct FilterProfile
{
    double center = 0.0; // Ω₀, rad/s
    double fwhm = 0.0;   // δω, rad/s
    int order = 4;       // positive even integer

    void validate() const;

    /// Half width (in units of fwhm) beyond which transmission < 1e-40.
    double support_half_width() const;
};

double filter_transmission(const FilterProfile& filter, double omega);

/// Amplitude transmission f(ω) = sqrt(|f(ω)|²).
double filter_amplitude(const FilterProfile& filter, double omega);

// Optional spectral phase of the pair, ψ(ω₁, ω₂) in rad.
using SpectralPhase = std::function<double(double, double)>;

// Φ(ω₁,ω₂) = pump(ω₁+ω₂) · phasematch(ω₁-ω₂) · exp(iψ(ω₁,ω₂)).
//
// The pump envelope is 2^(-2(ω_p-Ω_p)²/σ²), so σ is the FWHM of |Φ|² along
// ω_p. The phase-matching envelope uses the same convention in ω_- and is
// flat when phasematch_fwhm is infinite.
struct JointSpectrum
{
    double pump_center = 0.0;  // Ω_p, rad/s
    double pump_fwhm = 0.0;    // σ, rad/s
    double phasematch_fwhm = std::numeric_limits<double>::infinity();
    // Center of the phase-matching envelope in ω₁-ω₂; nonzero values make
    // Φ exchange-asymmetric.
    double difference_offset = 0.0;
    bool symmetric = true;
    SpectralPhase spectral_phase; // empty: no spectral phase

    void validate() const;
    bool has_spectral_phase() const { return static_cast<bool>(spectral_phase); }
};

std::complex<double> jsa_amplitude(const JointSpectrum& jsa, double omega1, double omega2);

/// |Φ|² along the sum frequency, pump envelope only: 2^(-4(ω_p-Ω_p)²/σ²).
double pump_intensity(const JointSpectrum& jsa, double omega_sum);

/// Correlation parameter κ = (σ/δω)².
double kappa_of(const JointSpectrum& jsa, const FilterProfile& filter);

/// Symmetric spectrum centered at Ω_p with σ = sqrt(κ)·δω.
JointSpectrum spectrum_from_kappa(double pump_center, double kappa, double filter_fwhm);

// φ(ω) = φ₀ + φ′(ω-ref) + ½φ″(ω-ref)².
struct TaylorPhase
{
    double reference = 0.0; // rad/s
    double phi0 = 0.0;      // rad
    double phi1 = 0.0;      // s
    double phi2 = 0.0;      // s²
};

// n²(λ) = a + b/(λ² - c) - d·λ², λ in µm.
struct SellmeierCoefficients
{
    double a = 1.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
};

// φ(ω) = (n_e(ω) - n_o(ω))·ω·L/c.
struct SellmeierPhase
{
    SellmeierCoefficients ordinary;
    SellmeierCoefficients extraordinary;
    double length = 0.0; // m
};

// β-BaB₂O₄ dispersion, K. Kato, IEEE J. Quantum Electron. QE-22, 1013 (1986).
inline constexpr SellmeierCoefficients bbo_ordinary{2.7359, 0.01878, 0.01822, 0.01354};
inline constexpr SellmeierCoefficients bbo_extraordinary{2.3753, 0.01224, 0.01667, 0.01516};

// Window in which the embedded Sellmeier coefficients are trusted.
inline constexpr double sellmeier_min_nm = 700.0;
inline constexpr double sellmeier_max_nm = 900.0;

struct DispersiveMedium
{
    std::variant<TaylorPhase, SellmeierPhase> model;

    static DispersiveMedium none();
    static DispersiveMedium taylor(double reference, double phi0, double phi1, double phi2 = 0.0);
    static DispersiveMedium bbo(double length_m);

    void validate() const;
    bool is_linear() const;
};

/// Full birefringent phase φ(ω) between the circular components.
double medium_phase(const DispersiveMedium& medium, double omega);

/// Analytic dφ/dω.
double medium_phase_derivative(const DispersiveMedium& medium, double omega);

/// Refractive index from a Sellmeier set at angular frequency ω.
double sellmeier_index(const SellmeierCoefficients& coeffs, double omega);

/// Group index n - λ·dn/dλ from a Sellmeier set.
double sellmeier_group_index(const SellmeierCoefficients& coeffs, double omega);

struct LinearizedPhase
{
    double phi0_mod2pi = 0.0; // rad, [0, 2π)
    double phi_prime = 0.0;   // s
    double reference = 0.0;   // rad/s
};

LinearizedPhase linearize_phase(const DispersiveMedium& medium, double omega0);

} // namespace freqcorr::spectral
