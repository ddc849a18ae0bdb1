#include "freqcorr/fringe.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <random>

#include "freqcorr/errors.hpp"
#include "freqcorr/interference.hpp"
#include "freqcorr/units.hpp"

namespace freqcorr::fringe
{

namespace
{

constexpr std::size_t kMaxIterations = 500;
constexpr int kReweightPasses = 3;

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

double model_value(const Vec4& p, double theta)
{
    return p[kOffset] * (1.0 + p[kVisibility] * std::cos(p[kHarmonic] * theta + p[kPhase]));
}

Vec4 model_gradient(const Vec4& p, double theta)
{
    const double arg = p[kHarmonic] * theta + p[kPhase];
    const double c = std::cos(arg);
    const double s = std::sin(arg);
    Vec4 g;
    g[kOffset] = 1.0 + p[kVisibility] * c;
    g[kVisibility] = p[kOffset] * c;
    g[kPhase] = -p[kOffset] * p[kVisibility] * s;
    g[kHarmonic] = -p[kOffset] * p[kVisibility] * s * theta;
    return g;
}

double chi_square(const Vec4& p, const FringeScan& scan, const std::vector<double>& w)
{
    double chi2 = 0.0;
    for (std::size_t i = 0; i < scan.thetas.size(); ++i)
    {
        const double r = scan.counts[i] - model_value(p, scan.thetas[i]);
        chi2 += w[i] * r * r;
    }
    return chi2;
}

Mat4 normal_matrix(const Vec4& p, const FringeScan& scan, const std::vector<double>& w,
                   Vec4* gradient)
{
    Mat4 a = Mat4::Zero();
    Vec4 g = Vec4::Zero();
    for (std::size_t i = 0; i < scan.thetas.size(); ++i)
    {
        const Vec4 d = model_gradient(p, scan.thetas[i]);
        const double r = scan.counts[i] - model_value(p, scan.thetas[i]);
        a.noalias() += w[i] * d * d.transpose();
        g.noalias() += w[i] * r * d;
    }
    if (gradient)
        *gradient = g;
    return a;
}

// Fourier component Σ(y-ȳ)e^{-imθ}.
std::complex<double> fourier_component(const FringeScan& scan, double mean, double m)
{
    std::complex<double> s;
    for (std::size_t i = 0; i < scan.thetas.size(); ++i)
        s += (scan.counts[i] - mean) * std::polar(1.0, -m * scan.thetas[i]);
    return s;
}

Vec4 initial_guess(const FringeScan& scan, std::optional<double> fix_harmonic)
{
    const auto n = static_cast<double>(scan.counts.size());
    const double mean = std::accumulate(scan.counts.begin(), scan.counts.end(), 0.0) / n;
    const double span = scan.thetas.back() - scan.thetas.front();

    double m = 0.0;
    if (fix_harmonic)
    {
        m = *fix_harmonic;
    }
    else
    {
        const double m_lo = units::two_pi / span;
        const double m_hi = units::pi * (n - 1.0) / span;
        const double step = m_lo / 20.0;
        double best = -1.0;
        for (double trial = m_lo; trial <= m_hi; trial += step)
        {
            const double power = std::norm(fourier_component(scan, mean, trial));
            if (power > best)
            {
                best = power;
                m = trial;
            }
        }
    }

    const std::complex<double> s = fourier_component(scan, mean, m);
    Vec4 p;
    p[kOffset] = mean;
    p[kVisibility] = mean > 0.0 ? std::min(0.99, 2.0 * std::abs(s) / (n * mean)) : 0.5;
    p[kPhase] = std::arg(s);
    p[kHarmonic] = m;
    return p;
}

struct LmOutcome
{
    Vec4 params;
    double chi2 = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

LmOutcome levenberg_marquardt(const FringeScan& scan, const std::vector<double>& w, Vec4 p,
                              bool harmonic_free)
{
    double chi2 = chi_square(p, scan, w);
    double lambda = 1e-3;
    LmOutcome out{p, chi2, 0, false};

    double scale = 0.0;
    for (std::size_t i = 0; i < scan.counts.size(); ++i)
        scale += w[i] * scan.counts[i] * scan.counts[i];

    for (std::size_t iter = 1; iter <= kMaxIterations; ++iter)
    {
        out.iterations = iter;
        Vec4 g;
        Mat4 a = normal_matrix(p, scan, w, &g);
        if (!harmonic_free)
        {
            a.row(kHarmonic).setZero();
            a.col(kHarmonic).setZero();
            a(kHarmonic, kHarmonic) = 1.0;
            g[kHarmonic] = 0.0;
        }

        bool accepted = false;
        Vec4 step = Vec4::Zero();
        double trial_chi2 = chi2;
        for (int attempt = 0; attempt < 40; ++attempt)
        {
            Mat4 damped = a;
            for (int k = 0; k < 4; ++k)
                damped(k, k) *= (1.0 + lambda);
            step = damped.ldlt().solve(g);
            const Vec4 trial = p + step;
            trial_chi2 = chi_square(trial, scan, w);
            if (std::isfinite(trial_chi2) && trial_chi2 <= chi2)
            {
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted)
        {
            // No downhill step at any damping: at the minimum to rounding.
            out.converged = true;
            break;
        }

        const double decrease = chi2 - trial_chi2;
        p += step;
        chi2 = trial_chi2;
        lambda = std::max(lambda / 10.0, 1e-12);
        out.params = p;
        out.chi2 = chi2;

        const bool tiny_step =
            (step.array().abs() <= 1e-12 * (p.array().abs() + 1e-12)).all();
        const bool flat = decrease <= 1e-15 * chi2 || chi2 <= 1e-28 * scale;
        if (tiny_step || flat)
        {
            out.converged = true;
            break;
        }
    }
    out.params = p;
    out.chi2 = chi2;
    return out;
}

std::vector<double> weights_for(const FringeScan& scan, const Vec4* params)
{
    const std::size_t n = scan.counts.size();
    std::vector<double> w(n, 1.0);
    if (!scan.count_errors.empty())
    {
        for (std::size_t i = 0; i < n; ++i)
            w[i] = 1.0 / (scan.count_errors[i] * scan.count_errors[i]);
        return w;
    }
    if (scan.kind == CountKind::normalized)
        return w;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double variance =
            params ? model_value(*params, scan.thetas[i]) : scan.counts[i];
        w[i] = 1.0 / std::max(variance, 1.0);
    }
    return w;
}

FitResult to_result(const LmOutcome& lm, const FringeScan& scan, const std::vector<double>& w,
                     bool harmonic_fixed)
{
    Vec4 p = lm.params;
    FitResult r;
    r.harmonic_fixed = harmonic_fixed;
    r.iterations = lm.iterations;
    r.chi_square = lm.chi2;
    const std::size_t n = scan.counts.size();
    const std::size_t free_count = harmonic_fixed ? 3 : 4;
    r.degrees_of_freedom = n > free_count ? n - free_count : 0;

    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double d = scan.counts[i] - model_value(p, scan.thetas[i]);
        ss += d * d;
    }
    r.residual_rms = std::sqrt(ss / static_cast<double>(n));

    Mat4 a = normal_matrix(p, scan, w, nullptr);
    Mat4 cov = Mat4::Zero();
    if (harmonic_fixed)
    {
        const Eigen::Matrix3d inv = a.topLeftCorner<3, 3>().inverse();
        cov.topLeftCorner<3, 3>() = inv;
    }
    else
    {
        cov = a.inverse();
    }
    // Unit weights carry no absolute scale: use the residual variance.
    const bool absolute_weights =
        !scan.count_errors.empty() || scan.kind == CountKind::poisson_counts;
    if (!absolute_weights)
        cov *= r.degrees_of_freedom > 0 ? lm.chi2 / static_cast<double>(r.degrees_of_freedom)
                                        : 0.0;

    // Enforce v >= 0 and m > 0; absorb signs into the phase.
    if (p[kHarmonic] < 0.0)
    {
        p[kHarmonic] = -p[kHarmonic];
        p[kPhase] = -p[kPhase];
        cov.row(kHarmonic) *= -1.0;
        cov.col(kHarmonic) *= -1.0;
        cov.row(kPhase) *= -1.0;
        cov.col(kPhase) *= -1.0;
    }
    if (p[kVisibility] < 0.0)
    {
        p[kVisibility] = -p[kVisibility];
        p[kPhase] += units::pi;
        cov.row(kVisibility) *= -1.0;
        cov.col(kVisibility) *= -1.0;
    }

    r.offset = p[kOffset];
    r.visibility = p[kVisibility];
    r.phase0 = units::wrap_two_pi(p[kPhase]);
    r.harmonic = p[kHarmonic];
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            r.covariance[i][j] = 0.5 * (cov(i, j) + cov(j, i));

    const double v_err = r.error(kVisibility);
    r.degenerate = !(std::isfinite(v_err)) || r.visibility < 3.0 * v_err;
    return r;
}

} // namespace

void FringeScan::validate() const
{
    if (thetas.size() != counts.size())
        throw DomainError("FringeScan: thetas and counts differ in length");
    if (!count_errors.empty() && count_errors.size() != counts.size())
        throw DomainError("FringeScan: count_errors length mismatch");
    if (thetas.size() < 8)
        throw DomainError("FringeScan: need at least 8 points");
    for (std::size_t i = 0; i < thetas.size(); ++i)
    {
        if (!std::isfinite(thetas[i]) || !std::isfinite(counts[i]))
            throw DomainError("FringeScan: non-finite sample");
        if (counts[i] < 0.0)
            throw DomainError("FringeScan: negative count");
        if (i > 0 && !(thetas[i] > thetas[i - 1]))
            throw DomainError("FringeScan: thetas must be strictly increasing");
        if (!count_errors.empty() && !(count_errors[i] > 0.0))
            throw DomainError("FringeScan: count errors must be positive");
    }
    if (exposure && !(*exposure > 0.0))
        throw DomainError("FringeScan: exposure must be positive");
}

double FitResult::error(FitParameter p) const
{
    const double v = covariance[p][p];
    return v >= 0.0 ? std::sqrt(v) : std::numeric_limits<double>::quiet_NaN();
}

double FitResult::model(double theta) const
{
    return offset * (1.0 + visibility * std::cos(harmonic * theta + phase0));
}

FitResult fit_fringe(const FringeScan& scan, std::optional<double> fix_harmonic)
{
    scan.validate();
    if (fix_harmonic && !(*fix_harmonic > 0.0))
        throw DomainError("fit_fringe: fixed harmonic must be positive");

    const bool harmonic_free = !fix_harmonic;
    Vec4 p = initial_guess(scan, fix_harmonic);
    std::vector<double> w = weights_for(scan, nullptr);
    LmOutcome lm = levenberg_marquardt(scan, w, p, harmonic_free);

    // Poisson weights from the model rather than the noisy data.
    const bool reweight = scan.count_errors.empty() && scan.kind == CountKind::poisson_counts;
    for (int pass = 0; reweight && pass < kReweightPasses; ++pass)
    {
        w = weights_for(scan, &lm.params);
        lm = levenberg_marquardt(scan, w, lm.params, harmonic_free);
    }

    FitResult result = to_result(lm, scan, w, !harmonic_free);
    if (!lm.converged || !std::isfinite(lm.chi2))
        throw FitError("fit_fringe: no convergence after " + std::to_string(lm.iterations) +
                           " iterations",
                       result);
    const double span = scan.thetas.back() - scan.thetas.front();
    if (result.harmonic * span < units::two_pi * (1.0 - 1e-9))
        throw DomainError("fit_fringe: scan does not span a full fringe period");
    return result;
}

double sigma_phi_from_visibility(double visibility)
{
    if (!(visibility > 0.0) || visibility > 1.0)
        throw DomainError("sigma_phi_from_visibility: visibility must lie in (0, 1]");
    return -2.0 * std::log(visibility);
}

namespace
{

double inversion_ratio(double visibility, double phi_prime, double delta_omega)
{
    if (!(delta_omega > 0.0))
        throw DomainError("kappa_from_visibility: delta_omega must be positive");
    if (!(phi_prime != 0.0) || !std::isfinite(phi_prime))
        throw DomainError("kappa_from_visibility: phi_prime must be nonzero and finite");
    const double spread = phi_prime * delta_omega;
    return sigma_phi_from_visibility(visibility) * 8.0 * std::log(2.0) / (spread * spread);
}

} // namespace

CorrelationEstimate kappa_from_visibility(double visibility, double phi_prime,
                                          double delta_omega)
{
    const double x = inversion_ratio(visibility, phi_prime, delta_omega);
    if (x >= 1.0)
        throw InfeasibleInversion(x);
    CorrelationEstimate est;
    est.kappa_bar = x / (1.0 - x);
    est.sigma_phi_sq = sigma_phi_from_visibility(visibility);
    est.visibility_used = visibility;
    est.phi_prime_used = std::abs(phi_prime);
    est.delta_omega_used = delta_omega;
    return est;
}

double kappa_by_bisection(double visibility, double phi_prime, double delta_omega)
{
    const double x = inversion_ratio(visibility, phi_prime, delta_omega);
    if (x >= 1.0)
        throw InfeasibleInversion(x);
    const double target = sigma_phi_from_visibility(visibility);
    if (target == 0.0)
        return 0.0;
    double lo = 0.0;
    double hi = 1.0;
    while (engine::closed_form_sigma_phi(hi, phi_prime, delta_omega) < target)
        hi *= 2.0;
    for (int i = 0; i < 400 && hi - lo > 1e-16 * hi; ++i)
    {
        const double mid = 0.5 * (lo + hi);
        if (engine::closed_form_sigma_phi(mid, phi_prime, delta_omega) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double self_consistent_spread(double visibility_ref, double kappa_ref)
{
    if (!(kappa_ref > 0.0))
        throw DomainError("self_consistent_spread: reference kappa must be positive");
    const double s2 = sigma_phi_from_visibility(visibility_ref);
    return std::sqrt(s2 * 8.0 * std::log(2.0) * (1.0 + kappa_ref) / kappa_ref);
}

BootstrapResult bootstrap_kappa_uncertainty(const FringeScan& scan, double phi_prime,
                                            double phi_prime_sigma, double delta_omega,
                                            std::size_t n_resamples, std::uint64_t seed,
                                            std::optional<double> fix_harmonic)
{
    if (n_resamples < 100)
        throw DomainError("bootstrap_kappa_uncertainty: need at least 100 resamples");
    if (!(phi_prime_sigma >= 0.0))
        throw DomainError("bootstrap_kappa_uncertainty: phi_prime_sigma must be >= 0");

    const FitResult base = fit_fringe(scan, fix_harmonic);
    const double scatter =
        base.degrees_of_freedom > 0
            ? std::sqrt(base.chi_square / static_cast<double>(base.degrees_of_freedom))
            : 0.0;
    const bool poisson = scan.kind == CountKind::poisson_counts && scan.count_errors.empty();

    std::vector<double> kappas;
    kappas.reserve(n_resamples);
    BootstrapResult out;
    out.resamples = n_resamples;

    FringeScan resample = scan;
    for (std::size_t i = 0; i < n_resamples; ++i)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
        std::mt19937_64 rng(seq);

        for (std::size_t k = 0; k < scan.thetas.size(); ++k)
        {
            const double mu = std::max(base.model(scan.thetas[k]), 0.0);
            if (poisson)
            {
                resample.counts[k] =
                    mu > 0.0 ? static_cast<double>(std::poisson_distribution<long long>(mu)(rng))
                             : 0.0;
            }
            else
            {
                const double sigma = scan.count_errors.empty() ? scatter : scan.count_errors[k];
                const double draw =
                    sigma > 0.0 ? std::normal_distribution<double>(mu, sigma)(rng) : mu;
                resample.counts[k] = std::max(draw, 0.0);
            }
        }
        const double pp = phi_prime_sigma > 0.0
                              ? std::normal_distribution<double>(phi_prime, phi_prime_sigma)(rng)
                              : phi_prime;
        try
        {
            const FitResult fit = fit_fringe(resample, fix_harmonic);
            const double v = std::min(fit.visibility, 1.0);
            kappas.push_back(kappa_from_visibility(v, pp, delta_omega).kappa_bar);
        }
        catch (const std::exception&)
        {
            ++out.failures;
        }
    }

    out.failure_fraction = static_cast<double>(out.failures) / static_cast<double>(n_resamples);
    out.unreliable = out.failure_fraction > 0.10;
    if (kappas.size() >= 2)
    {
        const double mean =
            std::accumulate(kappas.begin(), kappas.end(), 0.0) / static_cast<double>(kappas.size());
        double ss = 0.0;
        for (double k : kappas)
            ss += (k - mean) * (k - mean);
        out.mean = mean;
        out.standard_error = std::sqrt(ss / static_cast<double>(kappas.size() - 1));
    }
    else
    {
        out.unreliable = true;
        out.standard_error = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

} // namespace freqcorr::fringe
