#include "freqcorr/quadrature.hpp"

#include <cmath>

#include "freqcorr/errors.hpp"
#include "freqcorr/units.hpp"

namespace freqcorr::quad
{

Rule gauss_legendre(std::size_t n, double a, double b)
{
    if (n == 0)
        throw DomainError("gauss_legendre: need at least one node");

    Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    const auto nd = static_cast<double>(n);

    // Roots are symmetric; solve for the upper half only.
    for (std::size_t i = 0; i < (n + 1) / 2; ++i)
    {
        double x = std::cos(units::pi * (static_cast<double>(i) + 0.75) / (nd + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter)
        {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k)
            {
                const auto kd = static_cast<double>(k);
                const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1)
                p0 = 1.0;
            dp = nd * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        // Recompute the derivative at the converged root.
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= n; ++k)
        {
            const auto kd = static_cast<double>(k);
            const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
            p0 = p1;
            p1 = p2;
        }
        dp = (n == 1) ? 1.0 : nd * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);

        rule.nodes[i] = mid - half * x;
        rule.nodes[n - 1 - i] = mid + half * x;
        rule.weights[i] = half * w;
        rule.weights[n - 1 - i] = half * w;
    }
    return rule;
}

Rule trapezoid(std::size_t n, double a, double b)
{
    if (n < 2)
        throw DomainError("trapezoid: need at least two nodes");
    Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double h = (b - a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
    {
        rule.nodes[i] = (i + 1 == n) ? b : a + h * static_cast<double>(i);
        rule.weights[i] = (i == 0 || i + 1 == n) ? 0.5 * h : h;
    }
    return rule;
}

double trapezoid_integral(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size())
        throw DomainError("trapezoid_integral: size mismatch");
    double sum = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i)
        sum += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    return sum;
}

} // namespace freqcorr::quad
