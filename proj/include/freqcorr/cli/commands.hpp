#pragma once

// Subcommand implementations. Each returns an exit code and throws
// InputError / IoError (mapped by run_guarded) for bad input or I/O.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "freqcorr/cli/config.hpp"
#include "freqcorr/cli/csv.hpp"
#include "freqcorr/spectral.hpp"

namespace freqcorr::cli
{

using Json = nlohmann::ordered_json;

enum class OutputFormat
{
    json,
    table,
};

struct Calibration
{
    CalibrationSource source = CalibrationSource::self_consistent;
    double phi_prime = 0.0;   // s
    double delta_omega = 0.0; // rad/s
};

Calibration resolve_calibration(const ExperimentConfig& config);

struct SimulatedScan
{
    FringeTable table;
    std::vector<std::string> comments;
    double engine_visibility = 0.0; // before scan_contrast
    spectral::LinearizedPhase linearization;
};

/// Counts drawn from Poisson(mean_counts·rate) with one mt19937_64 stream.
std::vector<double> poisson_counts(const std::vector<double>& rate, double mean_counts,
                                   std::uint64_t seed);

/// Noiseless (mean-one normalized) or Poisson scan from the config.
SimulatedScan simulate_scan(const ExperimentConfig& config, bool poisson, const std::string& command);

struct FitOptions
{
    std::string input;
    std::string report; // empty: stdout
    std::string curve;  // optional plot export
    OutputFormat format = OutputFormat::json;
};

struct EstimateOptions
{
    std::optional<std::string> input;
    std::optional<double> visibility;
    std::optional<double> visibility_error;
    std::optional<std::string> calibration_input; // scan without the medium
    std::string report;
    OutputFormat format = OutputFormat::json;
};

struct ValidateOptions
{
    std::string report; // optional JSON copy of the table
};

struct ValidationRow
{
    std::string name;
    std::string value;
    std::string expectation;
    std::optional<bool> passed; // empty: informational
};

struct ValidationOutcome
{
    std::vector<ValidationRow> rows;
    Json json;
    bool all_passed() const;
};

Json fit_report(const ExperimentConfig& config, const FringeTable& table, const std::string& source);
Json estimate_report(const ExperimentConfig& config, const EstimateOptions& options);
ValidationOutcome run_validation(const ExperimentConfig& config);
std::string format_validation_table(const ValidationOutcome& outcome);

int cmd_simulate(const ExperimentConfig& config, const std::string& output);
int cmd_synth(const ExperimentConfig& config, const std::string& output);
int cmd_fit(const ExperimentConfig& config, const FitOptions& options);
int cmd_estimate(const ExperimentConfig& config, const EstimateOptions& options);
int cmd_validate(const ExperimentConfig& config, const ValidateOptions& options);

/// Runs body and maps InputError/ConfigError to 2, IoError to 3 and
/// remaining failures to 1, printing the message to err.
int run_guarded(const std::function<int()>& body, std::ostream& err);

} // namespace freqcorr::cli
