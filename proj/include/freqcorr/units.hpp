#pragma once

// Unit conventions: angular frequencies are rad/s everywhere inside the
// library. Wavelengths (nm) only appear at the configuration boundary and
// pass through the helpers below.

namespace freqcorr::units
{

inline constexpr double speed_of_light = 299792458.0; // m/s
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

/// Vacuum wavelength in nm -> angular frequency in rad/s.
double angular_frequency_from_nm(double wavelength_nm);

/// Angular frequency in rad/s -> vacuum wavelength in nm.
double wavelength_nm_from_angular_frequency(double omega);

/// Width in angular frequency of the wavelength interval
/// [center - fwhm/2, center + fwhm/2]. Exact interval mapping, not the
/// first-order dλ/λ² form.
double bandwidth_from_nm(double center_nm, double fwhm_nm);

inline constexpr double seconds_from_fs(double fs) { return fs * 1e-15; }
inline constexpr double fs_from_seconds(double s) { return s * 1e15; }
inline constexpr double rad_from_deg(double deg) { return deg * pi / 180.0; }
inline constexpr double deg_from_rad(double rad) { return rad * 180.0 / pi; }

/// Reduce an angle to [0, 2π).
double wrap_two_pi(double angle);

} // namespace freqcorr::units
