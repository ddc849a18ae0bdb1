#include "freqcorr/units.hpp"

#include <cmath>

#include "freqcorr/errors.hpp"

namespace freqcorr::units
{

double angular_frequency_from_nm(double wavelength_nm)
{
    if (!(wavelength_nm > 0.0))
        throw DomainError("wavelength must be positive");
    return two_pi * speed_of_light / (wavelength_nm * 1e-9);
}

double wavelength_nm_from_angular_frequency(double omega)
{
    if (!(omega > 0.0))
        throw DomainError("angular frequency must be positive");
    return two_pi * speed_of_light / omega * 1e9;
}

double bandwidth_from_nm(double center_nm, double fwhm_nm)
{
    if (!(fwhm_nm > 0.0) || !(2.0 * center_nm > fwhm_nm))
        throw DomainError("wavelength interval must satisfy 0 < fwhm < 2 center");
    return angular_frequency_from_nm(center_nm - 0.5 * fwhm_nm) -
           angular_frequency_from_nm(center_nm + 0.5 * fwhm_nm);
}

double wrap_two_pi(double angle)
{
    double r = std::fmod(angle, two_pi);
    if (r < 0.0)
        r += two_pi;
    // fmod can return exactly two_pi after the shift for tiny negatives.
    if (r >= two_pi)
        r = 0.0;
    return r;
}

} // namespace freqcorr::units
