#include "doctest.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <complex>
#include <vector>

#include "freqcorr/approx.hpp"
#include "freqcorr/errors.hpp"
#include "freqcorr/interference.hpp"
#include "freqcorr/units.hpp"

using namespace freqcorr;
using namespace freqcorr::engine;
using spectral::DispersiveMedium;
using spectral::FrequencyGrid;

namespace
{

const double kOmega0 = units::angular_frequency_from_nm(810.0);
const double kDeltaOmega = units::bandwidth_from_nm(810.0, 7.3);

spectral::FilterProfile filter4()
{
    return {kOmega0, kDeltaOmega, 4};
}

FrequencyGrid grid(std::size_t nodes = 256)
{
    return {kOmega0, 4.0, nodes};
}

spectral::JointSpectrum jsa(double kappa)
{
    return spectral::spectrum_from_kappa(2.0 * kOmega0, kappa, kDeltaOmega);
}

using gk = boost::math::quadrature::gauss_kronrod<double, 61>;

// |E[e^{i s x}]| for x distributed as pump × pair density.
double oracle_linear_visibility(double kappa, double spread)
{
    auto w = [kappa](double x) {
        return std::exp2(-4.0 * x * x / kappa) * appx::sum_frequency_density_exact(x);
    };
    const double reach = std::min(3.0, 6.0 * std::sqrt(kappa));
    const double z = gk::integrate(w, -reach, reach, 20, 1e-13);
    const double c = gk::integrate([&](double x) { return w(x) * std::cos(spread * x); }, -reach,
                                   reach, 20, 1e-13);
    return std::abs(c) / z;
}

// |∫|f|² e^{iφ}| / ∫|f|² for a linear phase, in units of δω.
double oracle_single_photon(double spread)
{
    auto t = [](double u) { return std::exp2(-std::pow(2.0 * u, 4)); };
    const double z = gk::integrate(t, -2.0, 2.0, 20, 1e-14);
    const double c = gk::integrate([&](double u) { return t(u) * std::cos(spread * u); }, -2.0, 2.0,
                                   20, 1e-14);
    return std::abs(c) / z;
}

} // namespace

TEST_CASE("no medium: unit visibility and a cos² fringe")
{
    const auto j = jsa(0.14);
    const auto none = DispersiveMedium::bbo(0.0);
    const SymmetricIntegrand s(j, filter4(), none, grid());
    const double n0 = s.normalization();
    for (double theta : {0.0, 0.05, 0.2, 0.5, 1.0})
        CHECK(s.probability(theta) == doctest::Approx(n0 * std::pow(std::cos(4.0 * theta), 2)).epsilon(1e-10).scale(n0));
    CHECK(engine_visibility(j, filter4(), none, grid()) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("symmetric and general paths agree")
{
    const auto medium = DispersiveMedium::taylor(kOmega0, 0.4, 3.0 / kDeltaOmega, 0.5 / (kDeltaOmega * kDeltaOmega));
    for (double kappa : {0.05, 0.14, 1.0})
    {
        const auto j = jsa(kappa);
        const SymmetricIntegrand s(j, filter4(), medium, grid());
        const GeneralIntegrand g(j, filter4(), medium, grid());
        CHECK(s.normalization() == doctest::Approx(g.normalization()).epsilon(1e-8));
        for (double theta : {0.0, 0.1, 0.3, 0.7})
            CHECK(s.probability(theta) ==
                  doctest::Approx(g.probability(theta)).epsilon(1e-8).scale(s.normalization()));
    }
}

TEST_CASE("fringe holds only the zeroth and eighth harmonics")
{
    const auto medium = DispersiveMedium::bbo(3e-3);
    auto j = jsa(0.14);
    const SymmetricIntegrand s(j, filter4(), medium, grid());
    j.symmetric = false;
    j.phasematch_fwhm = 2.0 * kDeltaOmega;
    j.difference_offset = 0.3 * kDeltaOmega;
    const GeneralIntegrand g(j, filter4(), medium, grid());
    const double g_pair = g.probability(0.0) + g.probability(units::pi / 8.0);
    for (double theta = 0.0; theta < 1.0; theta += 0.093)
    {
        // P(θ) + P(θ + π/8) is constant (N₀ for the symmetric path), P(θ + π/4) = P(θ)
        CHECK(s.probability(theta) + s.probability(theta + units::pi / 8.0) ==
              doctest::Approx(s.normalization()).epsilon(1e-10));
        CHECK(s.probability(theta + units::pi / 4.0) ==
              doctest::Approx(s.probability(theta)).epsilon(1e-9).scale(s.normalization()));
        CHECK(g.probability(theta) + g.probability(theta + units::pi / 8.0) ==
              doctest::Approx(g_pair).epsilon(1e-10));
        CHECK(g.probability(theta + units::pi / 4.0) ==
              doctest::Approx(g.probability(theta)).epsilon(1e-9).scale(g.normalization()));
    }
}

TEST_CASE("linear dispersion: visibility equals the characteristic function of the sum frequency")
{
    for (double kappa : {0.05, 0.14, 1.0, 5.0})
    {
        for (double spread : {2.0, 7.147})
        {
            CAPTURE(kappa);
            CAPTURE(spread);
            const auto medium = DispersiveMedium::taylor(kOmega0, 1.3, spread / kDeltaOmega);
            const double v = engine_visibility(jsa(kappa), filter4(), medium, grid());
            CHECK(v == doctest::Approx(oracle_linear_visibility(kappa, spread)).epsilon(1e-6));
        }
    }
}

TEST_CASE("visibility decreases with kappa and tends to one for narrow pumps")
{
    const auto medium = DispersiveMedium::taylor(kOmega0, 0.0, 7.147 / kDeltaOmega);
    double prev = 1.0;
    for (double kappa : {1e-4, 0.01, 0.1, 0.5, 2.0})
    {
        const double v = engine_visibility(jsa(kappa), filter4(), medium, grid());
        CHECK(v < prev);
        CHECK(v > 0.0);
        prev = v;
    }
    CHECK(engine_visibility(jsa(1e-4), filter4(), medium, grid()) > 0.999);
}

TEST_CASE("phase offset does not change the visibility")
{
    const auto a = DispersiveMedium::taylor(kOmega0, 0.0, 4.0 / kDeltaOmega);
    const auto b = DispersiveMedium::taylor(kOmega0, 2.1, 4.0 / kDeltaOmega);
    CHECK(engine_visibility(jsa(0.3), filter4(), a, grid()) ==
          doctest::Approx(engine_visibility(jsa(0.3), filter4(), b, grid())).epsilon(1e-9));
}

TEST_CASE("exchange asymmetry lowers the visibility without a medium")
{
    auto j = jsa(0.14);
    j.symmetric = false;
    j.phasematch_fwhm = 1.0 * kDeltaOmega;
    double prev = 1.0 + 1e-12;
    for (double offset : {0.0, 0.2, 0.5, 1.0})
    {
        j.difference_offset = offset * kDeltaOmega;
        const double v = engine_visibility(j, filter4(), DispersiveMedium::none(), grid());
        CHECK(v <= prev);
        prev = v;
    }
    CHECK(prev < 0.9);
}

TEST_CASE("normalizations")
{
    const auto medium = DispersiveMedium::bbo(3e-3);
    std::vector<double> thetas;
    for (int i = 0; i < 40; ++i)
        thetas.push_back(units::pi / 4.0 * i / 40.0);
    const auto raw = simulate_fringe_scan(jsa(0.14), filter4(), medium, thetas, Normalization::raw, grid());
    const auto unit = simulate_fringe_scan(jsa(0.14), filter4(), medium, thetas, Normalization::mean_one, grid());
    double mean = 0.0;
    for (double v : unit.values)
        mean += v;
    CHECK(mean / 40.0 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(curve_visibility(raw) == doctest::Approx(curve_visibility(unit)).epsilon(1e-12));
    for (double v : raw.values)
        CHECK(v >= 0.0);
}

TEST_CASE("a too-coarse grid is reported, not returned")
{
    const auto medium = DispersiveMedium::taylor(kOmega0, 0.0, 40.0 / kDeltaOmega);
    CHECK_THROWS_AS(SymmetricIntegrand(jsa(1.0), filter4(), medium, grid(16)), AccuracyError);
    CHECK_THROWS_AS(GeneralIntegrand(jsa(1.0), filter4(), medium, grid(16)), AccuracyError);
}

TEST_CASE("symmetric path contract")
{
    auto j = jsa(0.14);
    j.symmetric = false;
    j.phasematch_fwhm = kDeltaOmega;
    j.difference_offset = 0.2 * kDeltaOmega;
    CHECK_FALSE(symmetric_path_applies(j));
    CHECK_THROWS_AS(SymmetricIntegrand(j, filter4(), DispersiveMedium::none(), grid()), ContractViolation);
    CHECK(symmetric_path_applies(jsa(0.14)));
}

TEST_CASE("analytic visibility law")
{
    const double spread = 7.14708;
    const auto law = analytic_visibility(0.14, spread / kDeltaOmega, kDeltaOmega);
    CHECK(law.sigma_phi_sq == doctest::Approx(spread * spread / (8.0 * std::log(2.0)) * 0.14 / 1.14));
    CHECK(law.visibility == doctest::Approx(0.568).epsilon(1e-4));
    CHECK(analytic_visibility(0.0, spread / kDeltaOmega, kDeltaOmega).visibility == 1.0);
    const double floor = analytic_visibility(INFINITY, spread / kDeltaOmega, kDeltaOmega).visibility;
    CHECK(floor == doctest::Approx(0.00999).epsilon(1e-2));
    CHECK_THROWS_AS(closed_form_sigma_phi(-0.1, 1.0, 1.0), DomainError);
}

TEST_CASE("single-photon visibility")
{
    CHECK(single_photon_visibility(filter4(), DispersiveMedium::none(), grid()) == doctest::Approx(1.0));
    for (double spread : {1.0, 3.0, 6.0})
    {
        const auto m = DispersiveMedium::taylor(kOmega0, 0.2, spread / kDeltaOmega);
        CHECK(single_photon_visibility(filter4(), m, grid()) ==
              doctest::Approx(oracle_single_photon(spread)).epsilon(1e-8));
    }
    CHECK(single_photon_visibility(filter4(), DispersiveMedium::bbo(3e-3), grid()) < 0.05);
    // P(θ) + P(θ + π/4) = ∫|f|²/δω
    const auto bbo = DispersiveMedium::bbo(3e-3);
    const double a = single_photon_probability(filter4(), bbo, 0.1, grid());
    const double b = single_photon_probability(filter4(), bbo, 0.1 + units::pi / 4.0, grid());
    const double norm = single_photon_probability(filter4(), DispersiveMedium::none(), 0.0, grid());
    CHECK(a + b == doctest::Approx(norm).epsilon(1e-12));
}

TEST_CASE("visibility lattice: monotone in crystal length and in kappa")
{
    const double lengths[] = {0.5e-3, 1.0e-3, 1.5e-3, 2.0e-3, 3.0e-3};
    const double kappas[] = {0.02, 0.05, 0.14, 0.5, 2.0};
    double v[5][5];
    for (int i = 0; i < 5; ++i)
        for (int k = 0; k < 5; ++k)
            v[i][k] = engine_visibility(jsa(kappas[k]), filter4(), DispersiveMedium::bbo(lengths[i]),
                                        grid(), 181);
    for (int i = 0; i < 5; ++i)
        for (int k = 0; k < 5; ++k)
        {
            if (i + 1 < 5)
                CHECK(v[i + 1][k] <= v[i][k] + 1e-9);
            if (k + 1 < 5)
                CHECK(v[i][k + 1] <= v[i][k] + 1e-9);
        }
}
