#pragma once

// Fringe fitting and the inversion of fringe visibility into the frequency
// correlation bound κ̄.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "freqcorr/errors.hpp"

namespace freqcorr::fringe
{

enum class CountKind
{
    poisson_counts, // raw coincidence counts, variance = mean
    normalized,     // rates already rescaled (e.g. to mean one); unit weights
};

struct FringeScan
{
    std::vector<double> thetas; // rad, ascending
    std::vector<double> counts;
    std::vector<double> count_errors; // optional per-point σ; empty if absent
    std::optional<double> exposure;   // s per point
    std::uint64_t seed = 0;           // seed of synthetic scans
    CountKind kind = CountKind::poisson_counts;

    void validate() const;
};

// Parameter order of FitResult::covariance.
enum FitParameter : std::size_t
{
    kOffset = 0,
    kVisibility = 1,
    kPhase = 2,
    kHarmonic = 3,
};

// Model: offset·(1 + visibility·cos(harmonic·θ + phase0)).
struct FitResult
{
    double offset = 0.0;
    double visibility = 0.0;
    double phase0 = 0.0; // rad, [0, 2π)
    double harmonic = 0.0;
    std::array<std::array<double, 4>, 4> covariance{};
    double residual_rms = 0.0;
    double chi_square = 0.0;
    std::size_t degrees_of_freedom = 0;
    std::size_t iterations = 0;
    bool harmonic_fixed = false;
    bool degenerate = false; // visibility below 3 standard errors

    double error(FitParameter p) const;
    double model(double theta) const;
};

class FitError : public FitFailure
{
public:
    FitError(const std::string& what, FitResult best)
        : FitFailure(what), best_(std::move(best))
    {
    }
    const FitResult& best_iterate() const noexcept { return best_; }

private:
    FitResult best_;
};

/// Weighted Levenberg-Marquardt fit of the fringe model. Weights follow
/// scan.kind (Poisson variance from the model, or unit) unless explicit
/// count_errors are given.
FitResult fit_fringe(const FringeScan& scan, std::optional<double> fix_harmonic = std::nullopt);

/// σ_φ² = -2 ln v.
double sigma_phi_from_visibility(double visibility);

class InfeasibleInversion : public std::runtime_error
{
public:
    explicit InfeasibleInversion(double ratio)
        : std::runtime_error("observed visibility lower than the filter-limited minimum under "
                             "this calibration (ratio " +
                             std::to_string(ratio) + " >= 1)"),
          ratio_(ratio)
    {
    }
    // (-2 ln v)·8 ln 2/(φ′δω)²
    double ratio() const noexcept { return ratio_; }

private:
    double ratio_;
};

struct CorrelationEstimate
{
    double kappa_bar = 0.0;
    double sigma_phi_sq = 0.0; // rad²
    double visibility_used = 1.0;
    double phi_prime_used = 0.0;   // s
    double delta_omega_used = 0.0; // rad/s
    double kappa_uncertainty = 0.0;
    static constexpr const char* bound_kind = "lower bound";
};

/// Closed-form inversion of the Gaussian visibility law. Only |φ′| enters.
/// Throws InfeasibleInversion when no κ ≥ 0 reproduces v.
CorrelationEstimate kappa_from_visibility(double visibility, double phi_prime,
                                          double delta_omega);

/// Same inversion by bisection on the monotone map κ ↦ σ_φ²(κ).
double kappa_by_bisection(double visibility, double phi_prime, double delta_omega);

/// The product φ′·δω for which the visibility law maps kappa_ref to
/// visibility_ref.
double self_consistent_spread(double visibility_ref, double kappa_ref);

struct BootstrapResult
{
    double standard_error = 0.0;
    double mean = 0.0;
    std::size_t resamples = 0;
    std::size_t failures = 0;
    double failure_fraction = 0.0;
    bool unreliable = false; // failure_fraction > 10%
};

/// Parametric bootstrap of κ̄: counts redrawn around the fitted model
/// (Poisson for count data, Gaussian with the residual scatter otherwise)
/// and φ′ redrawn from N(φ′, phi_prime_sigma). Resample i uses a generator
/// seeded from (seed, i), so the result is independent of evaluation order.
BootstrapResult bootstrap_kappa_uncertainty(const FringeScan& scan, double phi_prime,
                                            double phi_prime_sigma, double delta_omega,
                                            std::size_t n_resamples, std::uint64_t seed,
                                            std::optional<double> fix_harmonic = std::nullopt);

} // namespace freqcorr::fringe
