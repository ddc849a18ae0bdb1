#include "freqcorr/cli/config.hpp"

#include <cmath>
#include <charconv>

#include "freqcorr/errors.hpp"
#include "freqcorr/fringe.hpp"
#include "freqcorr/units.hpp"

namespace freqcorr::cli
{

namespace
{

void require(bool ok, const char* field, const std::string& message)
{
    if (!ok)
        throw ConfigError(field, message);
}

bool positive(double v)
{
    return std::isfinite(v) && v > 0.0;
}

std::string number(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

} // namespace

const char* to_string(MediumVariant v)
{
    switch (v)
    {
    case MediumVariant::none:
        return "none";
    case MediumVariant::taylor:
        return "taylor";
    case MediumVariant::sellmeier:
        return "sellmeier";
    }
    return "?";
}

const char* to_string(CalibrationSource s)
{
    switch (s)
    {
    case CalibrationSource::self_consistent:
        return "self-consistent";
    case CalibrationSource::sellmeier:
        return "sellmeier";
    case CalibrationSource::user:
        return "user";
    }
    return "?";
}

MediumVariant parse_medium_variant(const std::string& text)
{
    if (text == "none")
        return MediumVariant::none;
    if (text == "taylor")
        return MediumVariant::taylor;
    if (text == "sellmeier" || text == "bbo")
        return MediumVariant::sellmeier;
    throw ConfigError("medium_variant", "expected none, taylor or sellmeier, got '" + text + "'");
}

CalibrationSource parse_calibration_source(const std::string& text)
{
    if (text == "self-consistent" || text == "self_consistent")
        return CalibrationSource::self_consistent;
    if (text == "sellmeier")
        return CalibrationSource::sellmeier;
    if (text == "user")
        return CalibrationSource::user;
    throw ConfigError("calibration_source",
                      "expected self-consistent, sellmeier or user, got '" + text + "'");
}

void ExperimentConfig::validate() const
{
    require(schema == kConfigSchema, "schema",
            "unsupported schema " + std::to_string(schema) + " (expected " +
                std::to_string(kConfigSchema) + ")");
    require(positive(pump_wavelength_nm), "pump_wavelength_nm", "must be positive");
    require(positive(filter_center_nm), "filter_center_nm", "must be positive");
    require(positive(filter_fwhm_nm), "filter_fwhm_nm", "must be positive");
    require(filter_fwhm_nm < 2.0 * filter_center_nm, "filter_fwhm_nm",
            "must be smaller than twice the center wavelength");
    require(filter_order >= 2 && filter_order % 2 == 0, "filter_order",
            "must be an even integer >= 2");

    require(std::isfinite(medium_length_mm) && medium_length_mm >= 0.0, "medium_length_mm",
            "must be >= 0");
    require(std::isfinite(medium_phi0_rad), "medium_phi0_rad", "must be finite");
    if (medium_phi_prime_fs)
        require(std::isfinite(*medium_phi_prime_fs), "medium_phi_prime_fs", "must be finite");
    require(std::isfinite(medium_phi2_fs2), "medium_phi2_fs2", "must be finite");
    require(std::isfinite(medium_phi_prime_fractional_uncertainty) &&
                medium_phi_prime_fractional_uncertainty >= 0.0,
            "medium_phi_prime_fractional_uncertainty", "must be >= 0");

    if (kappa)
        require(std::isfinite(*kappa) && *kappa > 0.0, "kappa", "must be positive");
    if (pump_fwhm_nm)
        require(positive(*pump_fwhm_nm), "pump_fwhm_nm", "must be positive");
    require(!(kappa && pump_fwhm_nm), "kappa", "give either kappa or pump_fwhm_nm, not both");

    require(std::isfinite(scan_theta_start_deg), "scan_theta_start_deg", "must be finite");
    require(std::isfinite(scan_theta_stop_deg) && scan_theta_stop_deg > scan_theta_start_deg,
            "scan_theta_stop_deg", "must exceed scan_theta_start_deg");
    require(scan_points >= 8, "scan_points", "must be >= 8");
    require(positive(scan_mean_counts), "scan_mean_counts", "must be positive");
    require(std::isfinite(scan_contrast) && scan_contrast >= 0.0 && scan_contrast <= 1.0,
            "scan_contrast", "must lie in [0, 1]");

    if (analysis_fix_harmonic)
        require(positive(*analysis_fix_harmonic), "analysis_fix_harmonic", "must be positive");
    if (analysis_calibration_visibility)
        require(positive(*analysis_calibration_visibility) && *analysis_calibration_visibility <= 1.0,
                "analysis_calibration_visibility", "must lie in (0, 1]");
    require(analysis_bootstrap_resamples >= 100, "analysis_bootstrap_resamples", "must be >= 100");

    require(positive(calibration_reference_visibility) && calibration_reference_visibility < 1.0,
            "calibration_reference_visibility", "must lie in (0, 1)");
    require(positive(calibration_reference_kappa), "calibration_reference_kappa",
            "must be positive");
    if (calibration_source == CalibrationSource::user)
        require(medium_phi_prime_fs.has_value() && *medium_phi_prime_fs != 0.0,
                "medium_phi_prime_fs", "required (nonzero) when calibration_source = user");
    if (calibration_source == CalibrationSource::sellmeier)
        require(medium_length_mm > 0.0, "medium_length_mm",
                "must be positive when calibration_source = sellmeier");

    require(grid_nodes >= 16, "grid_nodes", "must be >= 16");
    require(std::isfinite(grid_half_range) && grid_half_range >= 3.0, "grid_half_range",
            "must be >= 3");
    require(positive(validate_fwhm_tolerance), "validate_fwhm_tolerance", "must be positive");
}

void ExperimentConfig::require_spectrum() const
{
    validate();
    require(kappa.has_value() || pump_fwhm_nm.has_value(), "kappa",
            "one of kappa or pump_fwhm_nm is required");
}

std::vector<std::string> ExperimentConfig::to_lines() const
{
    std::vector<std::string> out;
    auto add = [&](const char* key, const std::string& value) {
        out.push_back(std::string(key) + " = " + value);
    };
    auto add_opt = [&](const char* key, const std::optional<double>& v) {
        if (v)
            add(key, number(*v));
    };
    auto quoted = [](const char* s) { return "\"" + std::string(s) + "\""; };

    add("schema", std::to_string(schema));
    add("pump_wavelength_nm", number(pump_wavelength_nm));
    add("filter_center_nm", number(filter_center_nm));
    add("filter_fwhm_nm", number(filter_fwhm_nm));
    add("filter_order", std::to_string(filter_order));
    add("medium_variant", quoted(to_string(medium_variant)));
    add("medium_length_mm", number(medium_length_mm));
    add("medium_phi0_rad", number(medium_phi0_rad));
    add_opt("medium_phi_prime_fs", medium_phi_prime_fs);
    add("medium_phi2_fs2", number(medium_phi2_fs2));
    add("medium_phi_prime_fractional_uncertainty",
        number(medium_phi_prime_fractional_uncertainty));
    add_opt("kappa", kappa);
    add_opt("pump_fwhm_nm", pump_fwhm_nm);
    add("scan_theta_start_deg", number(scan_theta_start_deg));
    add("scan_theta_stop_deg", number(scan_theta_stop_deg));
    add("scan_points", std::to_string(scan_points));
    add("scan_mean_counts", number(scan_mean_counts));
    add("scan_seed", std::to_string(scan_seed));
    add("scan_contrast", number(scan_contrast));
    add_opt("analysis_fix_harmonic", analysis_fix_harmonic);
    add("analysis_normalize_calibration", analysis_normalize_calibration ? "true" : "false");
    add_opt("analysis_calibration_visibility", analysis_calibration_visibility);
    add("analysis_bootstrap_resamples", std::to_string(analysis_bootstrap_resamples));
    add("calibration_source", quoted(to_string(calibration_source)));
    add("calibration_reference_visibility", number(calibration_reference_visibility));
    add("calibration_reference_kappa", number(calibration_reference_kappa));
    add("grid_nodes", std::to_string(grid_nodes));
    add("grid_half_range", number(grid_half_range));
    add("validate_fwhm_tolerance", number(validate_fwhm_tolerance));
    return out;
}

PhysicalSetup physical_setup(const ExperimentConfig& config)
{
    PhysicalSetup s;
    const double center = units::angular_frequency_from_nm(config.filter_center_nm);
    s.delta_omega = units::bandwidth_from_nm(config.filter_center_nm, config.filter_fwhm_nm);
    s.filter = {center, s.delta_omega, config.filter_order};
    s.grid = {center, config.grid_half_range, config.grid_nodes};
    s.pump_center = units::angular_frequency_from_nm(config.pump_wavelength_nm);
    return s;
}

spectral::JointSpectrum joint_spectrum(const ExperimentConfig& config)
{
    config.require_spectrum();
    const auto setup = physical_setup(config);
    if (config.kappa)
        return spectral::spectrum_from_kappa(setup.pump_center, *config.kappa, setup.delta_omega);
    spectral::JointSpectrum jsa;
    jsa.pump_center = setup.pump_center;
    jsa.pump_fwhm = units::bandwidth_from_nm(config.pump_wavelength_nm, *config.pump_fwhm_nm);
    return jsa;
}

double self_consistent_phi_prime(const ExperimentConfig& config)
{
    const auto setup = physical_setup(config);
    return fringe::self_consistent_spread(config.calibration_reference_visibility,
                                          config.calibration_reference_kappa) /
           setup.delta_omega;
}

spectral::DispersiveMedium dispersive_medium(const ExperimentConfig& config)
{
    const auto setup = physical_setup(config);
    switch (config.medium_variant)
    {
    case MediumVariant::none:
        return spectral::DispersiveMedium::none();
    case MediumVariant::taylor:
    {
        const double phi1 = config.medium_phi_prime_fs
                                ? units::seconds_from_fs(*config.medium_phi_prime_fs)
                                : self_consistent_phi_prime(config);
        const double phi2 = config.medium_phi2_fs2 * 1e-30;
        return spectral::DispersiveMedium::taylor(setup.filter.center, config.medium_phi0_rad, phi1,
                                                  phi2);
    }
    case MediumVariant::sellmeier:
        return spectral::DispersiveMedium::bbo(config.medium_length_mm * 1e-3);
    }
    throw ContractViolation("dispersive_medium: unknown variant");
}

} // namespace freqcorr::cli
