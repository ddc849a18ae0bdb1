#include "freqcorr/interference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>

#include "freqcorr/errors.hpp"
#include "freqcorr/quadrature.hpp"
#include "freqcorr/units.hpp"

namespace freqcorr::engine
{

namespace
{

using spectral::DispersiveMedium;
using spectral::FilterProfile;
using spectral::FrequencyGrid;
using spectral::JointSpectrum;

// |Φ|² of the pump envelope drops below 2^-133 beyond this many σ.
constexpr double kPumpSupport = 5.77;

// θ values at which coarse and fine quadratures are compared. P(θ) only
// carries the 0th and 8θ harmonics, so three probes pin it down.
constexpr std::array<double, 3> kProbeThetas{0.0, units::pi / 32.0, units::pi / 16.0};

quad::Rule axis_rule(const FrequencyGrid& grid, std::size_t n, double lo, double hi)
{
    if (grid.scheme == spectral::QuadratureScheme::trapezoid)
        return quad::trapezoid(n, lo, hi);
    return quad::gauss_legendre(n, lo, hi);
}

// Per-photon frequency interval, in rad/s, where the filter transmits and the
// grid reaches.
std::pair<double, double> photon_interval(const FilterProfile& filter, const FrequencyGrid& grid)
{
    const double s = filter.support_half_width() * filter.fwhm;
    const double r = grid.half_range * filter.fwhm;
    const double lo = std::max(grid.center - r, filter.center - s);
    const double hi = std::min(grid.center + r, filter.center + s);
    if (!(hi > lo))
        throw DomainError("frequency grid does not overlap the filter passband");
    return {lo, hi};
}

void validate_inputs(const JointSpectrum& jsa, const FilterProfile& filter,
                     const DispersiveMedium& medium, const FrequencyGrid& grid)
{
    jsa.validate();
    filter.validate();
    medium.validate();
    grid.validate();
}

template <class Integrand>
double compare_probes(const Integrand& fine, const Integrand& coarse)
{
    if (!(fine.normalization() > 0.0))
        return 0.0;
    double worst = 0.0;
    for (double theta : kProbeThetas)
        worst = std::max(worst, std::abs(fine.probability(theta) - coarse.probability(theta)));
    return worst / fine.normalization();
}

std::size_t coarse_nodes(std::size_t n)
{
    return std::max<std::size_t>(8, n / 2);
}

} // namespace

// ---------------------------------------------------------------------------

GeneralIntegrand::GeneralIntegrand(const JointSpectrum& jsa, const FilterProfile& filter,
                                   const DispersiveMedium& medium, const FrequencyGrid& grid)
    : GeneralIntegrand((validate_inputs(jsa, filter, medium, grid), jsa), filter, medium, grid,
                       grid.nodes_per_axis)
{
    const GeneralIntegrand coarse(jsa, filter, medium, grid, coarse_nodes(grid.nodes_per_axis));
    error_ = compare_probes(*this, coarse);
    if (error_ > kQuadratureTolerance)
        throw AccuracyError("general coincidence integral: grid too coarse for " +
                                std::to_string(grid.nodes_per_axis) + " nodes per axis",
                            error_, kQuadratureTolerance);
}

GeneralIntegrand::GeneralIntegrand(const JointSpectrum& jsa, const FilterProfile& filter,
                                   const DispersiveMedium& medium, const FrequencyGrid& grid,
                                   std::size_t nodes)
    : n_(nodes)
{
    const auto [lo, hi] = photon_interval(filter, grid);
    const quad::Rule rule = axis_rule(grid, n_, lo, hi);

    std::vector<double> trans(n_);
    half_phase_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i)
    {
        trans[i] = rule.weights[i] / filter.fwhm *
                   spectral::filter_transmission(filter, rule.nodes[i]);
        half_phase_[i] = 0.5 * spectral::medium_phase(medium, rule.nodes[i]);
    }

    std::vector<std::complex<double>> phi(n_ * n_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j)
            phi[i * n_ + j] = spectral::jsa_amplitude(jsa, rule.nodes[i], rule.nodes[j]);

    direct_.resize(n_ * n_);
    exchange_.resize(n_ * n_);
    norm_ = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
    {
        for (std::size_t j = 0; j < n_; ++j)
        {
            const double ff = trans[i] * trans[j];
            const std::complex<double> a = phi[i * n_ + j];
            const std::complex<double> b = phi[j * n_ + i];
            direct_[i * n_ + j] = std::norm(a) * ff;
            exchange_[i * n_ + j] = 2.0 * std::real(a * std::conj(b)) * ff;
            norm_ += direct_[i * n_ + j];
        }
    }
}

double GeneralIntegrand::probability(double theta) const
{
    std::vector<double> c2(n_), s2(n_), cs(n_);
    for (std::size_t i = 0; i < n_; ++i)
    {
        const double t = 2.0 * theta + half_phase_[i];
        const double c = std::cos(t);
        const double s = std::sin(t);
        c2[i] = c * c;
        s2[i] = s * s;
        cs[i] = c * s;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
    {
        const double* d = &direct_[i * n_];
        const double* x = &exchange_[i * n_];
        double dc = 0.0;
        double ds = 0.0;
        double xc = 0.0;
        for (std::size_t j = 0; j < n_; ++j)
        {
            dc += d[j] * c2[j];
            ds += d[j] * s2[j];
            xc += x[j] * cs[j];
        }
        total += c2[i] * dc + s2[i] * ds - cs[i] * xc;
    }
    return std::max(total, 0.0);
}

// ---------------------------------------------------------------------------

SymmetricIntegrand::SymmetricIntegrand(const JointSpectrum& jsa, const FilterProfile& filter,
                                       const DispersiveMedium& medium, const FrequencyGrid& grid)
    : SymmetricIntegrand((validate_inputs(jsa, filter, medium, grid), jsa), filter, medium, grid,
                         grid.nodes_per_axis)
{
    const SymmetricIntegrand coarse(jsa, filter, medium, grid, coarse_nodes(grid.nodes_per_axis));
    error_ = compare_probes(*this, coarse);
    if (error_ > kQuadratureTolerance)
        throw AccuracyError("symmetric coincidence integral: grid too coarse for " +
                                std::to_string(grid.nodes_per_axis) + " nodes per axis",
                            error_, kQuadratureTolerance);
}

SymmetricIntegrand::SymmetricIntegrand(const JointSpectrum& jsa, const FilterProfile& filter,
                                       const DispersiveMedium& medium, const FrequencyGrid& grid,
                                       std::size_t nodes)
{
    if (!jsa.symmetric || jsa.has_spectral_phase())
        throw ContractViolation(
            "symmetric coincidence path requires a symmetric spectrum without spectral phase");

    const double dw = filter.fwhm;
    const auto [lo, hi] = photon_interval(filter, grid);

    // x = (ω₁+ω₂-2Ω₀)/δω, y = (ω₁-ω₂)/δω.
    double x_lo = 2.0 * (lo - filter.center) / dw;
    double x_hi = 2.0 * (hi - filter.center) / dw;
    const double x_pump = (jsa.pump_center - 2.0 * filter.center) / dw;
    const double pump_reach = kPumpSupport * jsa.pump_fwhm / dw;
    x_lo = std::max(x_lo, x_pump - pump_reach);
    x_hi = std::min(x_hi, x_pump + pump_reach);
    const double y_reach = (hi - lo) / dw;

    if (!(x_hi > x_lo))
    {
        // Pump envelope and filters do not overlap.
        norm_ = 0.0;
        return;
    }

    const quad::Rule xr = axis_rule(grid, nodes, x_lo, x_hi);
    const quad::Rule yr = axis_rule(grid, nodes, -y_reach, y_reach);

    weight_.resize(nodes * nodes);
    half_sum_.resize(nodes * nodes);
    norm_ = 0.0;
    for (std::size_t k = 0; k < nodes; ++k)
    {
        const double x = xr.nodes[k];
        const double omega_sum = 2.0 * filter.center + x * dw;
        const double pump = spectral::pump_intensity(jsa, omega_sum);
        for (std::size_t l = 0; l < nodes; ++l)
        {
            const double y = yr.nodes[l];
            const double w1 = filter.center + 0.5 * (x + y) * dw;
            const double w2 = filter.center + 0.5 * (x - y) * dw;
            double density = pump * spectral::filter_transmission(filter, w1) *
                             spectral::filter_transmission(filter, w2);
            if (std::isfinite(jsa.phasematch_fwhm))
            {
                const double d = (w1 - w2) / jsa.phasematch_fwhm;
                density *= std::exp2(-4.0 * d * d);
            }
            const std::size_t idx = k * nodes + l;
            // dω₁dω₂/δω² = ½ dx dy
            weight_[idx] = 0.5 * xr.weights[k] * yr.weights[l] * density;
            half_sum_[idx] =
                0.5 * (spectral::medium_phase(medium, w1) + spectral::medium_phase(medium, w2));
            norm_ += weight_[idx];
        }
    }
}

double SymmetricIntegrand::probability(double theta) const
{
    const double base = 4.0 * theta;
    double total = 0.0;
    for (std::size_t i = 0; i < weight_.size(); ++i)
    {
        const double c = std::cos(base + half_sum_[i]);
        total += weight_[i] * c * c;
    }
    return total;
}

// ---------------------------------------------------------------------------

bool symmetric_path_applies(const JointSpectrum& jsa)
{
    return jsa.symmetric && !jsa.has_spectral_phase();
}

double coincidence_probability_general(const JointSpectrum& jsa, const FilterProfile& filter,
                                       const DispersiveMedium& medium, double theta,
                                       const FrequencyGrid& grid)
{
    return GeneralIntegrand(jsa, filter, medium, grid).probability(theta);
}

double coincidence_probability_symmetric(const JointSpectrum& jsa, const FilterProfile& filter,
                                         const DispersiveMedium& medium, double theta,
                                         const FrequencyGrid& grid)
{
    return SymmetricIntegrand(jsa, filter, medium, grid).probability(theta);
}

ProbabilityCurve simulate_fringe_scan(const JointSpectrum& jsa, const FilterProfile& filter,
                                      const DispersiveMedium& medium,
                                      std::span<const double> thetas, Normalization normalization,
                                      const FrequencyGrid& grid)
{
    if (thetas.empty())
        throw DomainError("simulate_fringe_scan: empty theta list");

    ProbabilityCurve curve;
    curve.thetas.assign(thetas.begin(), thetas.end());
    curve.values.resize(thetas.size());
    curve.normalization = normalization;

    auto fill = [&](const auto& integrand) {
        for (std::size_t i = 0; i < thetas.size(); ++i)
            curve.values[i] = integrand.probability(thetas[i]);
    };
    if (symmetric_path_applies(jsa))
        fill(SymmetricIntegrand(jsa, filter, medium, grid));
    else
        fill(GeneralIntegrand(jsa, filter, medium, grid));

    if (normalization == Normalization::mean_one)
    {
        double mean = 0.0;
        for (double v : curve.values)
            mean += v;
        mean /= static_cast<double>(curve.values.size());
        if (!(mean > 0.0))
            throw DomainError("simulate_fringe_scan: zero mean probability, cannot normalize");
        for (double& v : curve.values)
            v /= mean;
    }
    return curve;
}

double curve_visibility(const ProbabilityCurve& curve)
{
    if (curve.values.empty())
        throw DomainError("curve_visibility: empty curve");
    const auto [lo, hi] = std::minmax_element(curve.values.begin(), curve.values.end());
    const double sum = *hi + *lo;
    if (!(sum > 0.0))
        throw DomainError("curve_visibility: curve is identically zero");
    return (*hi - *lo) / sum;
}

double engine_visibility(const JointSpectrum& jsa, const FilterProfile& filter,
                         const DispersiveMedium& medium, const FrequencyGrid& grid,
                         std::size_t points_per_period)
{
    if (points_per_period < 8)
        throw DomainError("engine_visibility: need at least 8 points per period");
    std::vector<double> thetas(points_per_period);
    const double period = units::pi / 4.0;
    for (std::size_t i = 0; i < points_per_period; ++i)
        thetas[i] = period * static_cast<double>(i) / static_cast<double>(points_per_period);
    const auto curve = simulate_fringe_scan(jsa, filter, medium, thetas, Normalization::raw, grid);
    const auto& v = curve.values;
    const std::size_t n = v.size();

    // Parabolic vertex through the extreme sample and its periodic neighbours.
    auto vertex = [&](std::size_t i) {
        const double a = v[(i + n - 1) % n];
        const double b = v[i];
        const double c = v[(i + 1) % n];
        const double curvature = a - 2.0 * b + c;
        if (curvature == 0.0)
            return b;
        return b - (c - a) * (c - a) / (8.0 * curvature);
    };
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double vmax = std::max(*hi, vertex(static_cast<std::size_t>(hi - v.begin())));
    const double vmin = std::clamp(vertex(static_cast<std::size_t>(lo - v.begin())), 0.0, *lo);
    if (!(vmax + vmin > 0.0))
        throw DomainError("engine_visibility: curve is identically zero");
    return (vmax - vmin) / (vmax + vmin);
}

double closed_form_sigma_phi(double kappa, double phi_prime, double delta_omega)
{
    if (!(kappa >= 0.0))
        throw DomainError("closed_form_sigma_phi: kappa must be >= 0");
    const double fraction = std::isinf(kappa) ? 1.0 : kappa / (1.0 + kappa);
    const double spread = phi_prime * delta_omega;
    return spread * spread / (8.0 * std::log(2.0)) * fraction;
}

VisibilityLaw analytic_visibility(double kappa, double phi_prime, double delta_omega)
{
    VisibilityLaw law;
    law.kappa = kappa;
    law.phi_prime = phi_prime;
    law.delta_omega = delta_omega;
    law.sigma_phi_sq = closed_form_sigma_phi(kappa, phi_prime, delta_omega);
    law.visibility = std::exp(-0.5 * law.sigma_phi_sq);
    return law;
}

// ---------------------------------------------------------------------------

namespace
{

struct SinglePhotonSums
{
    double norm = 0.0;
    std::complex<double> coherence;
};

SinglePhotonSums single_photon_sums(const FilterProfile& filter, const DispersiveMedium& medium,
                                    const FrequencyGrid& grid, std::size_t nodes)
{
    const auto [lo, hi] = photon_interval(filter, grid);
    const quad::Rule rule = axis_rule(grid, nodes, lo, hi);
    SinglePhotonSums sums;
    for (std::size_t i = 0; i < rule.size(); ++i)
    {
        const double w = rule.weights[i] / filter.fwhm *
                         spectral::filter_transmission(filter, rule.nodes[i]);
        sums.norm += w;
        sums.coherence += std::polar(w, spectral::medium_phase(medium, rule.nodes[i]));
    }
    return sums;
}

SinglePhotonSums checked_single_photon_sums(const FilterProfile& filter,
                                            const DispersiveMedium& medium,
                                            const FrequencyGrid& grid)
{
    filter.validate();
    medium.validate();
    grid.validate();
    const auto fine = single_photon_sums(filter, medium, grid, grid.nodes_per_axis);
    const auto coarse =
        single_photon_sums(filter, medium, grid, coarse_nodes(grid.nodes_per_axis));
    const double err = std::max(std::abs(fine.norm - coarse.norm),
                                std::abs(fine.coherence - coarse.coherence)) /
                       fine.norm;
    if (err > kQuadratureTolerance)
        throw AccuracyError("single-photon integral: grid too coarse", err, kQuadratureTolerance);
    return fine;
}

} // namespace

double single_photon_probability(const FilterProfile& filter, const DispersiveMedium& medium,
                                 double theta, const FrequencyGrid& grid)
{
    // cos²(2θ + φ/2) = ½(1 + Re e^{i(4θ+φ)})
    const auto sums = checked_single_photon_sums(filter, medium, grid);
    return 0.5 * (sums.norm + std::real(std::polar(1.0, 4.0 * theta) * sums.coherence));
}

double single_photon_visibility(const FilterProfile& filter, const DispersiveMedium& medium,
                                const FrequencyGrid& grid)
{
    const auto sums = checked_single_photon_sums(filter, medium, grid);
    return std::abs(sums.coherence) / sums.norm;
}

} // namespace freqcorr::engine
