#include "freqcorr/approx.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "freqcorr/bessel.hpp"
#include "freqcorr/errors.hpp"
#include "freqcorr/quadrature.hpp"

namespace freqcorr::appx
{

namespace
{

constexpr double kLn2 = 0.69314718055994530942;
constexpr double kNumericTolerance = 1e-8;
// Relative size (in bits) below which the ω₋ integrand is dropped.
constexpr double kInnerBits = 133.0;
// Values smaller than this are too close to underflow for relative checks.
constexpr double kTiny = 1e-290;

// Trapezoid rule in y = (ω₁-ω₂)/δω, sized for filter order n and the largest
// |x| that will be evaluated.
struct InnerRule
{
    double step = 0.02;
    double reach = 3.0;
};

InnerRule inner_rule(int order, double max_abs_x)
{
    InnerRule rule;
    // |x+y|^n + |x-y|^n - 2|x|^n >= 2|y|^n for even n.
    rule.reach = std::pow(0.5 * kInnerBits, 1.0 / order);
    // Gaussian-equivalent width of the integrand around y = 0.
    const double curvature =
        order == 2 ? 4.0 : 2.0 * order * (order - 1) * std::pow(std::max(max_abs_x, 1.0), order - 2);
    const double width = 1.0 / std::sqrt(kLn2 * curvature);
    rule.step = std::min(0.02, width / 2.5);
    return rule;
}

double pair_integrand(int order, double x, double y)
{
    return std::exp2(-(std::pow(std::abs(x + y), order) + std::pow(std::abs(x - y), order)));
}

// ½∫dy 2^(-|x+y|^n-|x-y|^n)·extra(y), trapezoid on [-reach, reach].
template <class Extra>
double pair_density(int order, double x, const InnerRule& rule, Extra&& extra)
{
    const auto steps = static_cast<long>(std::ceil(rule.reach / rule.step));
    double sum = 0.0;
    for (long k = -steps; k <= steps; ++k)
    {
        const double y = rule.step * static_cast<double>(k);
        sum += pair_integrand(order, x, y) * extra(y);
    }
    return 0.5 * rule.step * sum;
}

double one(double) { return 1.0; }

double max_abs(const std::vector<double>& xs)
{
    double m = 0.0;
    for (double x : xs)
        m = std::max(m, std::abs(x));
    return m;
}

} // namespace

void DensityCurve::validate() const
{
    if (abscissa.size() != density.size() || abscissa.size() < 2)
        throw DomainError("DensityCurve: abscissa and density must match, >= 2 points");
    for (std::size_t i = 0; i < density.size(); ++i)
    {
        if (!(density[i] >= 0.0) || !std::isfinite(density[i]))
            throw DomainError("DensityCurve: density must be finite and nonnegative");
        if (i > 0 && !(abscissa[i] > abscissa[i - 1]))
            throw DomainError("DensityCurve: abscissa must be strictly increasing");
    }
}

double DensityCurve::integral() const
{
    return quad::trapezoid_integral(abscissa, density);
}

std::vector<double> uniform_grid(double half_range, std::size_t points)
{
    if (!(half_range > 0.0) || points < 3)
        throw DomainError("uniform_grid: need half_range > 0 and >= 3 points");
    return quad::trapezoid(points, -half_range, half_range).nodes;
}

DensityCurve normalize(DensityCurve curve)
{
    curve.validate();
    const double z = curve.integral();
    if (!(z > 0.0))
        throw DomainError("normalize: curve has zero mass");
    for (double& d : curve.density)
        d /= z;
    curve.normalized = true;
    return curve;
}

DensityCurve sum_frequency_density_numeric(const spectral::FilterProfile& filter,
                                           const std::vector<double>& abscissa,
                                           bool normalize_output)
{
    filter.validate();
    if (abscissa.empty() || abscissa.front() > -3.0 || abscissa.back() < 3.0)
        throw DomainError("sum_frequency_density_numeric: grid must reach |x| >= 3");

    const InnerRule rule = inner_rule(filter.order, max_abs(abscissa));
    const InnerRule fine{0.5 * rule.step, rule.reach};

    DensityCurve curve;
    curve.abscissa = abscissa;
    curve.density.resize(abscissa.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < abscissa.size(); ++i)
    {
        const double coarse = pair_density(filter.order, abscissa[i], rule, one);
        const double refined = pair_density(filter.order, abscissa[i], fine, one);
        if (refined > kTiny)
            worst = std::max(worst, std::abs(coarse - refined) / refined);
        curve.density[i] = refined;
    }
    if (worst > kNumericTolerance)
        throw AccuracyError("sum_frequency_density_numeric: inner quadrature not converged", worst,
                            kNumericTolerance);
    curve.validate();
    return normalize_output ? normalize(std::move(curve)) : curve;
}

double sum_frequency_density_exact(double x)
{
    static const double kPrefactor = std::sqrt(6.0) / 4.0;
    const double ax = std::abs(x);
    const double x4 = ax * ax * ax * ax;
    const double z = 9.0 * kLn2 * x4;

    if (z < 1e-12)
    {
        // |x|·K_{1/4}(z) with the x-dependence of the leading term cancelled.
        const double pi = 3.14159265358979323846;
        const double pre = pi / (2.0 * std::sin(0.25 * pi));
        const double c = std::pow(4.5 * kLn2, 0.25); // (z/2)^{1/4}/|x|
        return kPrefactor * pre *
               (1.0 / (c * std::tgamma(0.75)) - ax * ax * c / std::tgamma(1.25));
    }
    if (ax > 1.0)
        return kPrefactor * ax * std::exp(-2.0 * kLn2 * x4) * special::bessel_k_quarter_scaled(z);
    return kPrefactor * ax * std::exp2(7.0 * x4) * special::bessel_k_quarter(z);
}

DensityCurve sum_frequency_density_exact_curve(const std::vector<double>& abscissa,
                                               bool normalize_output)
{
    DensityCurve curve;
    curve.abscissa = abscissa;
    curve.density.resize(abscissa.size());
    std::transform(abscissa.begin(), abscissa.end(), curve.density.begin(),
                   sum_frequency_density_exact);
    curve.validate();
    return normalize_output ? normalize(std::move(curve)) : curve;
}

// ---------------------------------------------------------------------------

GaussianApproximation gaussian_approximation(const DensityCurve& curve)
{
    curve.validate();
    const auto& xs = curve.abscissa;
    const auto& ys = curve.density;
    const std::size_t n = xs.size();

    const auto peak_it = std::max_element(ys.begin(), ys.end());
    const auto peak = static_cast<std::size_t>(peak_it - ys.begin());
    const double ymax = *peak_it;
    if (!(ymax > 0.0))
        throw FitFailure("gaussian_approximation: empty curve");
    const double slack = 1e-12 * ymax;
    for (std::size_t i = peak; i + 1 < n; ++i)
        if (ys[i + 1] > ys[i] + slack)
            throw FitFailure("gaussian_approximation: curve is not unimodal");
    for (std::size_t i = peak; i > 0; --i)
        if (ys[i - 1] > ys[i] + slack)
            throw FitFailure("gaussian_approximation: curve is not unimodal");

    GaussianApproximation out;

    // Direct FWHM by linear interpolation on each flank.
    const double half = 0.5 * ymax;
    std::size_t r = peak;
    while (r + 1 < n && ys[r + 1] >= half)
        ++r;
    std::size_t l = peak;
    while (l > 0 && ys[l - 1] >= half)
        --l;
    if (r + 1 >= n || l == 0)
        throw FitFailure("gaussian_approximation: half maximum not bracketed by the grid");
    const double xr = xs[r] + (half - ys[r]) * (xs[r + 1] - xs[r]) / (ys[r + 1] - ys[r]);
    const double xl = xs[l] + (half - ys[l]) * (xs[l - 1] - xs[l]) / (ys[l - 1] - ys[l]);
    out.direct_fwhm = xr - xl;

    // Moments.
    const double mass = curve.integral();
    std::vector<double> tmp(n);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = xs[i] * ys[i];
    out.moment_mean = quad::trapezoid_integral(xs, tmp) / mass;
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = (xs[i] - out.moment_mean) * (xs[i] - out.moment_mean) * ys[i];
    out.moment_sigma = std::sqrt(quad::trapezoid_integral(xs, tmp) / mass);

    // Levenberg-Marquardt on A·exp(-(x-μ)²/(2s²)).
    Eigen::Vector3d p(ymax, xs[peak], out.direct_fwhm / std::sqrt(8.0 * kLn2));
    auto sse = [&](const Eigen::Vector3d& q) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            const double u = (xs[i] - q[1]) / q[2];
            const double d = ys[i] - q[0] * std::exp(-0.5 * u * u);
            s += d * d;
        }
        return s;
    };
    double cost = sse(p);
    double lambda = 1e-3;
    bool converged = false;
    for (int iter = 0; iter < 500 && !converged; ++iter)
    {
        Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
        Eigen::Vector3d g = Eigen::Vector3d::Zero();
        for (std::size_t i = 0; i < n; ++i)
        {
            const double u = (xs[i] - p[1]) / p[2];
            const double e = std::exp(-0.5 * u * u);
            const Eigen::Vector3d d(e, p[0] * e * u / p[2], p[0] * e * u * u / p[2]);
            const double res = ys[i] - p[0] * e;
            a.noalias() += d * d.transpose();
            g.noalias() += res * d;
        }
        bool accepted = false;
        for (int attempt = 0; attempt < 40; ++attempt)
        {
            Eigen::Matrix3d damped = a;
            damped.diagonal() *= 1.0 + lambda;
            const Eigen::Vector3d step = damped.ldlt().solve(g);
            const Eigen::Vector3d trial = p + step;
            const double trial_cost = trial[2] > 0.0 ? sse(trial) : INFINITY;
            if (trial_cost <= cost)
            {
                const double decrease = cost - trial_cost;
                p = trial;
                cost = trial_cost;
                lambda = std::max(lambda / 10.0, 1e-15);
                accepted = true;
                converged = decrease <= 1e-16 * cost ||
                            (step.array().abs() <= 1e-13 * (p.array().abs() + 1e-13)).all();
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted)
            converged = true;
    }
    if (!converged)
        throw FitFailure("gaussian_approximation: least-squares fit did not converge");

    out.amplitude = p[0];
    out.center = p[1];
    out.fwhm = std::sqrt(8.0 * kLn2) * std::abs(p[2]);
    out.rms_residual = std::sqrt(cost / static_cast<double>(n));
    return out;
}

DensityCurve gaussian_density(const std::vector<double>& abscissa, double center, double sigma)
{
    if (!(sigma > 0.0))
        throw DomainError("gaussian_density: sigma must be positive");
    DensityCurve curve;
    curve.abscissa = abscissa;
    curve.density.resize(abscissa.size());
    for (std::size_t i = 0; i < abscissa.size(); ++i)
    {
        const double u = (abscissa[i] - center) / sigma;
        curve.density[i] = std::exp(-0.5 * u * u);
    }
    return normalize(std::move(curve));
}

DensityCurve moment_matched_gaussian(const DensityCurve& curve)
{
    curve.validate();
    const double mass = curve.integral();
    const auto& xs = curve.abscissa;
    std::vector<double> tmp(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        tmp[i] = xs[i] * curve.density[i];
    const double mean = quad::trapezoid_integral(xs, tmp) / mass;
    for (std::size_t i = 0; i < xs.size(); ++i)
        tmp[i] = (xs[i] - mean) * (xs[i] - mean) * curve.density[i];
    const double var = quad::trapezoid_integral(xs, tmp) / mass;
    return gaussian_density(xs, mean, std::sqrt(var));
}

double kl_divergence_one_way(const DensityCurve& p, const DensityCurve& q)
{
    p.validate();
    q.validate();
    if (p.abscissa != q.abscissa)
        throw DomainError("kl_divergence: densities must share a grid");
    std::vector<double> integrand(p.abscissa.size(), 0.0);
    for (std::size_t i = 0; i < integrand.size(); ++i)
    {
        if (p.density[i] == 0.0)
            continue;
        if (q.density[i] == 0.0)
            throw DomainError("kl_divergence: q vanishes where p is positive");
        integrand[i] = p.density[i] * std::log(p.density[i] / q.density[i]);
    }
    const double d = quad::trapezoid_integral(p.abscissa, integrand);
    if (d < -1e-12)
        throw AccuracyError("kl_divergence: negative divergence", d, 1e-12);
    return std::max(d, 0.0);
}

KlDivergence kl_divergence(const DensityCurve& p, const DensityCurve& q)
{
    KlDivergence out;
    out.forward = kl_divergence_one_way(p, q);
    try
    {
        out.reverse = kl_divergence_one_way(q, p);
    }
    catch (const DomainError&)
    {
        out.reverse.reset();
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace
{

struct PairExtra
{
    const spectral::JointSpectrum& jsa;
    double delta_omega;

    double operator()(double y) const
    {
        if (!std::isfinite(jsa.phasematch_fwhm))
            return 1.0;
        const double d = (y * delta_omega - jsa.difference_offset) / jsa.phasematch_fwhm;
        return std::exp2(-4.0 * d * d);
    }
};

} // namespace

DensityCurve sum_frequency_distribution(const spectral::JointSpectrum& jsa,
                                        const spectral::FilterProfile& filter,
                                        const std::vector<double>& abscissa)
{
    jsa.validate();
    filter.validate();
    const InnerRule rule = inner_rule(filter.order, max_abs(abscissa));
    const PairExtra extra{jsa, filter.fwhm};
    DensityCurve curve;
    curve.abscissa = abscissa;
    curve.density.resize(abscissa.size());
    for (std::size_t i = 0; i < abscissa.size(); ++i)
    {
        const double omega_sum = 2.0 * filter.center + abscissa[i] * filter.fwhm;
        curve.density[i] = spectral::pump_intensity(jsa, omega_sum) *
                           pair_density(filter.order, abscissa[i], rule, extra);
    }
    curve.validate();
    return curve;
}

PhaseMoments phase_distribution_moments(const spectral::JointSpectrum& jsa,
                                        const spectral::FilterProfile& filter,
                                        const spectral::DispersiveMedium& medium,
                                        const MomentGrid& grid)
{
    jsa.validate();
    filter.validate();
    medium.validate();
    if (jsa.has_spectral_phase())
        throw ContractViolation("phase_distribution_moments: spectral phase not supported");

    const quad::Rule outer = quad::trapezoid(grid.points, -grid.half_range, grid.half_range);
    const InnerRule rule = inner_rule(filter.order, grid.half_range);
    const PairExtra extra{jsa, filter.fwhm};
    const auto steps = static_cast<long>(std::ceil(rule.reach / rule.step));
    const double dw = filter.fwhm;
    const double phase_center = 2.0 * spectral::medium_phase(medium, filter.center);

    std::vector<double> weight;
    std::vector<double> phase;
    weight.reserve(outer.size() * static_cast<std::size_t>(2 * steps + 1));
    phase.reserve(weight.capacity());
    double mass = 0.0;
    for (std::size_t i = 0; i < outer.size(); ++i)
    {
        const double x = outer.nodes[i];
        const double pump = spectral::pump_intensity(jsa, 2.0 * filter.center + x * dw);
        const double wx = 0.5 * outer.weights[i] * rule.step * pump;
        if (wx == 0.0)
            continue;
        for (long k = -steps; k <= steps; ++k)
        {
            const double y = rule.step * static_cast<double>(k);
            const double w = wx * pair_integrand(filter.order, x, y) * extra(y);
            if (w == 0.0)
                continue;
            const double p = spectral::medium_phase(medium, filter.center + 0.5 * (x + y) * dw) +
                             spectral::medium_phase(medium, filter.center + 0.5 * (x - y) * dw) -
                             phase_center;
            weight.push_back(w);
            phase.push_back(p);
            mass += w;
        }
    }
    if (!(mass > 0.0))
        throw DomainError("phase_distribution_moments: detected density vanishes");

    PhaseMoments m;
    for (std::size_t i = 0; i < weight.size(); ++i)
        m.mean += weight[i] * phase[i];
    m.mean /= mass;
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
    for (std::size_t i = 0; i < weight.size(); ++i)
    {
        const double d = phase[i] - m.mean;
        const double d2 = d * d;
        m2 += weight[i] * d2;
        m3 += weight[i] * d2 * d;
        m4 += weight[i] * d2 * d2;
    }
    m2 /= mass;
    m3 /= mass;
    m4 /= mass;
    m.variance = m2;
    if (m2 > 0.0)
    {
        m.skewness = m3 / std::pow(m2, 1.5);
        m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return m;
}

} // namespace freqcorr::appx
