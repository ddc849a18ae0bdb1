#include "freqcorr/spectral.hpp"

#include <cmath>
#include <string>

#include "freqcorr/errors.hpp"
#include "freqcorr/units.hpp"

namespace freqcorr::spectral
{

namespace
{

// log2(1e40): filter transmission below 2^-this is treated as zero.
constexpr double kSupportBits = 132.8771237954945;

template <class... Ts>
struct Overloaded : Ts...
{
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double wavelength_um(double omega)
{
    return units::two_pi * units::speed_of_light / omega * 1e6;
}

void check_sellmeier_window(double omega)
{
    if (!(omega > 0.0))
        throw DomainError("Sellmeier medium: non-positive frequency");
    const double nm = units::wavelength_nm_from_angular_frequency(omega);
    constexpr double slack = 1e-9;
    if (nm < sellmeier_min_nm - slack || nm > sellmeier_max_nm + slack)
        throw DomainError("Sellmeier medium: wavelength " + std::to_string(nm) +
                          " nm outside the 700-900 nm validity window");
}

double index_squared(const SellmeierCoefficients& k, double lambda_um)
{
    const double l2 = lambda_um * lambda_um;
    return k.a + k.b / (l2 - k.c) - k.d * l2;
}

} // namespace

void FrequencyGrid::validate() const
{
    if (nodes_per_axis < 16)
        throw DomainError("FrequencyGrid: nodes_per_axis must be >= 16");
    if (!(half_range >= 3.0))
        throw DomainError("FrequencyGrid: half_range must be >= 3 filter widths");
    if (!std::isfinite(center))
        throw DomainError("FrequencyGrid: center must be finite");
}

void FilterProfile::validate() const
{
    if (!(fwhm > 0.0) || !std::isfinite(fwhm))
        throw DomainError("FilterProfile: fwhm must be positive");
    if (!std::isfinite(center))
        throw DomainError("FilterProfile: center must be finite");
    if (order <= 0 || order % 2 != 0)
        throw DomainError("FilterProfile: order must be a positive even integer");
}

double FilterProfile::support_half_width() const
{
    return 0.5 * std::pow(kSupportBits, 1.0 / order);
}

double filter_transmission(const FilterProfile& filter, double omega)
{
    const double u = 2.0 * (omega - filter.center) / filter.fwhm;
    // Even order: u^n == |u|^n, keeps the result exactly even about Ω₀.
    return std::exp2(-std::pow(std::abs(u), filter.order));
}

double filter_amplitude(const FilterProfile& filter, double omega)
{
    const double u = 2.0 * (omega - filter.center) / filter.fwhm;
    return std::exp2(-0.5 * std::pow(std::abs(u), filter.order));
}

void JointSpectrum::validate() const
{
    if (!(pump_fwhm > 0.0) || !std::isfinite(pump_fwhm))
        throw DomainError("JointSpectrum: pump_fwhm must be positive and finite");
    if (!(phasematch_fwhm > 0.0))
        throw DomainError("JointSpectrum: phasematch_fwhm must be positive");
    if (!std::isfinite(pump_center) || !std::isfinite(difference_offset))
        throw DomainError("JointSpectrum: centers must be finite");
    if (symmetric && difference_offset != 0.0)
        throw DomainError("JointSpectrum: symmetric spectrum cannot have a difference offset");
}

double pump_intensity(const JointSpectrum& jsa, double omega_sum)
{
    const double d = (omega_sum - jsa.pump_center) / jsa.pump_fwhm;
    return std::exp2(-4.0 * d * d);
}

std::complex<double> jsa_amplitude(const JointSpectrum& jsa, double omega1, double omega2)
{
    const double dp = (omega1 + omega2 - jsa.pump_center) / jsa.pump_fwhm;
    double magnitude = std::exp2(-2.0 * dp * dp);
    if (std::isfinite(jsa.phasematch_fwhm))
    {
        const double dm = (omega1 - omega2 - jsa.difference_offset) / jsa.phasematch_fwhm;
        magnitude *= std::exp2(-2.0 * dm * dm);
    }
    if (!jsa.spectral_phase)
        return {magnitude, 0.0};
    return std::polar(magnitude, jsa.spectral_phase(omega1, omega2));
}

double kappa_of(const JointSpectrum& jsa, const FilterProfile& filter)
{
    const double r = jsa.pump_fwhm / filter.fwhm;
    return r * r;
}

JointSpectrum spectrum_from_kappa(double pump_center, double kappa, double filter_fwhm)
{
    if (!(kappa > 0.0))
        throw DomainError("spectrum_from_kappa: kappa must be positive");
    JointSpectrum jsa;
    jsa.pump_center = pump_center;
    jsa.pump_fwhm = std::sqrt(kappa) * filter_fwhm;
    return jsa;
}

DispersiveMedium DispersiveMedium::none()
{
    return {TaylorPhase{}};
}

DispersiveMedium DispersiveMedium::taylor(double reference, double phi0, double phi1, double phi2)
{
    return {TaylorPhase{reference, phi0, phi1, phi2}};
}

DispersiveMedium DispersiveMedium::bbo(double length_m)
{
    return {SellmeierPhase{bbo_ordinary, bbo_extraordinary, length_m}};
}

void DispersiveMedium::validate() const
{
    std::visit(Overloaded{
                   [](const TaylorPhase& t) {
                       if (!std::isfinite(t.phi0) || !std::isfinite(t.phi1) ||
                           !std::isfinite(t.phi2) || !std::isfinite(t.reference))
                           throw DomainError("Taylor medium: coefficients must be finite");
                   },
                   [](const SellmeierPhase& s) {
                       if (!(s.length >= 0.0) || !std::isfinite(s.length))
                           throw DomainError("Sellmeier medium: length must be >= 0");
                   },
               },
               model);
}

bool DispersiveMedium::is_linear() const
{
    if (const auto* t = std::get_if<TaylorPhase>(&model))
        return t->phi2 == 0.0;
    return std::get<SellmeierPhase>(model).length == 0.0;
}

double sellmeier_index(const SellmeierCoefficients& coeffs, double omega)
{
    return std::sqrt(index_squared(coeffs, wavelength_um(omega)));
}

double sellmeier_group_index(const SellmeierCoefficients& coeffs, double omega)
{
    const double l = wavelength_um(omega);
    const double l2 = l * l;
    const double n = std::sqrt(index_squared(coeffs, l));
    const double denom = l2 - coeffs.c;
    const double dn2_dl = -2.0 * coeffs.b * l / (denom * denom) - 2.0 * coeffs.d * l;
    const double dn_dl = dn2_dl / (2.0 * n);
    return n - l * dn_dl;
}

double medium_phase(const DispersiveMedium& medium, double omega)
{
    return std::visit(
        Overloaded{
            [omega](const TaylorPhase& t) {
                const double d = omega - t.reference;
                return t.phi0 + t.phi1 * d + 0.5 * t.phi2 * d * d;
            },
            [omega](const SellmeierPhase& s) {
                if (s.length == 0.0)
                    return 0.0;
                check_sellmeier_window(omega);
                const double dn =
                    sellmeier_index(s.extraordinary, omega) - sellmeier_index(s.ordinary, omega);
                return dn * omega * s.length / units::speed_of_light;
            },
        },
        medium.model);
}

double medium_phase_derivative(const DispersiveMedium& medium, double omega)
{
    return std::visit(
        Overloaded{
            [omega](const TaylorPhase& t) { return t.phi1 + t.phi2 * (omega - t.reference); },
            [omega](const SellmeierPhase& s) {
                if (s.length == 0.0)
                    return 0.0;
                check_sellmeier_window(omega);
                const double dng = sellmeier_group_index(s.extraordinary, omega) -
                                   sellmeier_group_index(s.ordinary, omega);
                return dng * s.length / units::speed_of_light;
            },
        },
        medium.model);
}

LinearizedPhase linearize_phase(const DispersiveMedium& medium, double omega0)
{
    LinearizedPhase lin;
    lin.reference = omega0;
    lin.phi0_mod2pi = units::wrap_two_pi(medium_phase(medium, omega0));
    lin.phi_prime = medium_phase_derivative(medium, omega0);
    return lin;
}

} // namespace freqcorr::spectral
