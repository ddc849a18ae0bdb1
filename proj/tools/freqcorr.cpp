// freqcorr: simulate, fit and invert two-photon fringes through a dispersive
// medium.

#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "freqcorr/cli/commands.hpp"
#include "freqcorr/cli/config.hpp"

using namespace freqcorr::cli;

namespace
{

constexpr const char* kConfigEnv = "FREQCORR_CONFIG";

// Options on the top-level app double as config-file keys.
void bind_config(CLI::App& app, ExperimentConfig& c, std::string& medium, std::string& calibration)
{
    app.add_option("--schema", c.schema, "Config schema version")->capture_default_str();
    app.add_option("--pump_wavelength_nm", c.pump_wavelength_nm, "Pump center wavelength")
        ->capture_default_str();
    app.add_option("--filter_center_nm", c.filter_center_nm, "Filter center wavelength")
        ->capture_default_str();
    app.add_option("--filter_fwhm_nm", c.filter_fwhm_nm, "Filter FWHM")->capture_default_str();
    app.add_option("--filter_order", c.filter_order, "Super-Gaussian order (even)")
        ->capture_default_str();

    app.add_option("--medium_variant", medium, "none | taylor | sellmeier")->capture_default_str();
    app.add_option("--medium_length_mm", c.medium_length_mm, "BBO length")->capture_default_str();
    app.add_option("--medium_phi0_rad", c.medium_phi0_rad, "Taylor phase at the filter center")
        ->capture_default_str();
    app.add_option("--medium_phi_prime_fs", c.medium_phi_prime_fs,
                   "Taylor / user phase slope (fs); self-consistent if absent");
    app.add_option("--medium_phi2_fs2", c.medium_phi2_fs2, "Taylor curvature (fs^2)")
        ->capture_default_str();
    app.add_option("--medium_phi_prime_fractional_uncertainty",
                   c.medium_phi_prime_fractional_uncertainty,
                   "Relative placement uncertainty of phi'")
        ->capture_default_str();

    app.add_option("--kappa", c.kappa, "Pump-to-filter bandwidth ratio sigma^2/delta_omega^2");
    app.add_option("--pump_fwhm_nm", c.pump_fwhm_nm, "Pump FWHM (alternative to kappa)");

    app.add_option("--scan_theta_start_deg", c.scan_theta_start_deg)->capture_default_str();
    app.add_option("--scan_theta_stop_deg", c.scan_theta_stop_deg)->capture_default_str();
    app.add_option("--scan_points", c.scan_points)->capture_default_str();
    app.add_option("--scan_mean_counts", c.scan_mean_counts)->capture_default_str();
    app.add_option("--scan_seed", c.scan_seed)->capture_default_str();
    app.add_option("--scan_contrast", c.scan_contrast, "Extra contrast factor in [0, 1]")
        ->capture_default_str();

    app.add_option("--analysis_fix_harmonic", c.analysis_fix_harmonic,
                   "Fix the fringe harmonic m instead of fitting it");
    app.add_option("--analysis_normalize_calibration", c.analysis_normalize_calibration,
                   "Divide by the no-medium contrast (non-default)")
        ->capture_default_str();
    app.add_option("--analysis_calibration_visibility", c.analysis_calibration_visibility);
    app.add_option("--analysis_bootstrap_resamples", c.analysis_bootstrap_resamples)
        ->capture_default_str();

    app.add_option("--calibration_source", calibration, "self-consistent | sellmeier | user")
        ->capture_default_str();
    app.add_option("--calibration_reference_visibility", c.calibration_reference_visibility)
        ->capture_default_str();
    app.add_option("--calibration_reference_kappa", c.calibration_reference_kappa)
        ->capture_default_str();

    app.add_option("--grid_nodes", c.grid_nodes, "Quadrature nodes per axis")
        ->capture_default_str();
    app.add_option("--grid_half_range", c.grid_half_range, "Grid half range in filter FWHMs")
        ->capture_default_str();
    app.add_option("--validate_fwhm_tolerance", c.validate_fwhm_tolerance)->capture_default_str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"freqcorr: two-photon fringe simulation and frequency-correlation estimation"};
    app.require_subcommand(1);
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_config("--config", "", "Config file (key = value lines)")->envname(kConfigEnv);

    ExperimentConfig config;
    std::string medium = to_string(config.medium_variant);
    std::string calibration = to_string(config.calibration_source);
    bind_config(app, config, medium, calibration);

    std::string output;
    auto* simulate = app.add_subcommand("simulate", "Noiseless fringe, normalized to mean one");
    simulate->add_option("-o,--output", output, "Output CSV (stdout if omitted)");
    auto* synth = app.add_subcommand("synth", "Poisson-noisy fringe counts");
    synth->add_option("-o,--output", output, "Output CSV (stdout if omitted)");

    FitOptions fit;
    std::string fit_format = "json";
    auto* fitc = app.add_subcommand("fit", "Fit a fringe CSV");
    fitc->add_option("input", fit.input, "Fringe CSV")->required();
    fitc->add_option("-o,--report", fit.report, "JSON report path (stdout if omitted)");
    fitc->add_option("--curve", fit.curve, "Export data and fitted model as CSV");
    fitc->add_option("--format", fit_format, "json | table")
        ->check(CLI::IsMember({"json", "table"}));

    EstimateOptions est;
    std::string est_format = "json";
    auto* estc = app.add_subcommand("estimate", "Fit, invert and bound the frequency correlation");
    estc->add_option("input", est.input, "Fringe CSV");
    estc->add_option("--visibility", est.visibility, "Use this visibility instead of a CSV");
    estc->add_option("--visibility_error", est.visibility_error);
    estc->add_option("--calibration-data", est.calibration_input,
                     "No-medium fringe CSV for the optional contrast normalization");
    estc->add_option("-o,--report", est.report, "JSON report path (stdout if omitted)");
    estc->add_option("--format", est_format, "json | table")
        ->check(CLI::IsMember({"json", "table"}));

    ValidateOptions val;
    auto* valc = app.add_subcommand("validate", "Check the sum-frequency density approximations");
    valc->add_option("-o,--report", val.report, "Also write the table as JSON");

    for (auto* sub : {simulate, synth, fitc, estc, valc})
        sub->fallthrough();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::FileError& e)
    {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIoError;
    }
    catch (const CLI::ParseError& e)
    {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInputError;
    }

    return run_guarded(
        [&]() -> int {
            config.medium_variant = parse_medium_variant(medium);
            config.calibration_source = parse_calibration_source(calibration);
            config.validate();
            if (simulate->parsed())
                return cmd_simulate(config, output);
            if (synth->parsed())
                return cmd_synth(config, output);
            if (fitc->parsed())
            {
                fit.format = fit_format == "table" ? OutputFormat::table : OutputFormat::json;
                return cmd_fit(config, fit);
            }
            if (estc->parsed())
            {
                est.format = est_format == "table" ? OutputFormat::table : OutputFormat::json;
                return cmd_estimate(config, est);
            }
            return cmd_validate(config, val);
        },
        std::cerr);
}
