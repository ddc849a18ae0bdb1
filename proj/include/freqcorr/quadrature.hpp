#pragma once

#include <cstddef>
#include <vector>

namespace freqcorr::quad
{

// Nodes and weights of a one-dimensional quadrature rule on [a, b].
struct Rule
{
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule mapped onto [a, b]. Nodes via Newton
/// iteration on P_n; accurate to a few ulps for n up to several thousand.
Rule gauss_legendre(std::size_t n, double a, double b);

/// n-point composite trapezoid rule on [a, b] (n >= 2, endpoints included).
Rule trapezoid(std::size_t n, double a, double b);

/// Trapezoid integral of samples y over abscissae x (non-uniform allowed).
double trapezoid_integral(const std::vector<double>& x, const std::vector<double>& y);

} // namespace freqcorr::quad
