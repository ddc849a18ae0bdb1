#pragma once

// Experiment configuration shared by every subcommand, and the error types
// that map onto the CLI exit codes.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "freqcorr/spectral.hpp"

namespace freqcorr::cli
{

enum ExitCode : int
{
    kExitOk = 0,
    kExitValidationFailed = 1,
    kExitInputError = 2,
    kExitIoError = 3,
};

class InputError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public InputError
{
public:
    ConfigError(const std::string& field, const std::string& message)
        : InputError("config field '" + field + "': " + message), field_(field)
    {
    }
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class IoError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum class MediumVariant
{
    none,
    taylor,
    sellmeier,
};

enum class CalibrationSource
{
    self_consistent,
    sellmeier,
    user,
};

const char* to_string(MediumVariant v);
const char* to_string(CalibrationSource s);
MediumVariant parse_medium_variant(const std::string& text);
CalibrationSource parse_calibration_source(const std::string& text);

inline constexpr int kConfigSchema = 1;

struct ExperimentConfig
{
    int schema = kConfigSchema;

    double pump_wavelength_nm = 405.0;
    double filter_center_nm = 810.0;
    double filter_fwhm_nm = 7.3;
    int filter_order = 4;

    MediumVariant medium_variant = MediumVariant::sellmeier;
    double medium_length_mm = 3.0;
    double medium_phi0_rad = 0.0;
    std::optional<double> medium_phi_prime_fs;
    double medium_phi2_fs2 = 0.0;
    double medium_phi_prime_fractional_uncertainty = 0.05;

    // Exactly one of these for commands that need the pump spectrum.
    std::optional<double> kappa;
    std::optional<double> pump_fwhm_nm;

    double scan_theta_start_deg = 0.0;
    double scan_theta_stop_deg = 90.0;
    std::size_t scan_points = 100;
    double scan_mean_counts = 1000.0;
    std::uint64_t scan_seed = 1;
    double scan_contrast = 1.0;

    std::optional<double> analysis_fix_harmonic;
    bool analysis_normalize_calibration = false;
    std::optional<double> analysis_calibration_visibility;
    std::size_t analysis_bootstrap_resamples = 1000;

    CalibrationSource calibration_source = CalibrationSource::self_consistent;
    double calibration_reference_visibility = 0.568;
    double calibration_reference_kappa = 0.14;

    std::size_t grid_nodes = 256;
    double grid_half_range = 4.0;

    double validate_fwhm_tolerance = 0.03;

    /// Checks every field; throws ConfigError naming the first bad one.
    void validate() const;
    /// Additionally requires exactly one of kappa / pump_fwhm_nm.
    void require_spectrum() const;

    /// key = value lines, one per field, in declaration order.
    std::vector<std::string> to_lines() const;
};

/// Physical model objects derived from a configuration.
struct PhysicalSetup
{
    spectral::FilterProfile filter;
    spectral::FrequencyGrid grid;
    double delta_omega = 0.0; // rad/s
    double pump_center = 0.0; // rad/s
};

PhysicalSetup physical_setup(const ExperimentConfig& config);

/// Pump spectrum; requires kappa or pump_fwhm_nm.
spectral::JointSpectrum joint_spectrum(const ExperimentConfig& config);

/// φ′ (s) of the self-consistent calibration.
double self_consistent_phi_prime(const ExperimentConfig& config);

/// Medium from the config. A Taylor medium without an explicit φ′ uses the
/// self-consistent calibration.
spectral::DispersiveMedium dispersive_medium(const ExperimentConfig& config);

} // namespace freqcorr::cli
