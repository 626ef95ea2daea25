#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "gwi/numerics.hpp"

using namespace gwi;
using namespace gwi::detail;

TEST_CASE("adaptive quadrature on known integrals") {
    auto r1 = integrate_adaptive([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
    REQUIRE(r1.value == Catch::Approx(2.0).epsilon(1e-12));

    auto r2 = integrate_adaptive([](double x) { return std::exp(x); }, 0.0, 1.0);
    REQUIRE(r2.value == Catch::Approx(std::numbers::e - 1.0).epsilon(1e-12));

    // integrable endpoint singularity
    auto r3 = integrate_adaptive([](double x) { return 1.0 / std::sqrt(x); }, 1e-300, 1.0, 1e-10,
                                 1e-9, 20000);
    REQUIRE(r3.value == Catch::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("gauss-legendre nodes integrate high-degree polynomials exactly") {
    const auto& rule = gauss_legendre(20);
    // degree 39 monomial over [0,1]
    double got = gauss_panel([](double x) { return std::pow(x, 39); }, 0.0, 1.0, rule);
    REQUIRE(got == Catch::Approx(1.0 / 40.0).epsilon(1e-12));
    double w = 0.0;
    for (double wi : rule.weights) w += wi;
    REQUIRE(w == Catch::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("fft matches the direct transform and inverts") {
    std::vector<Complex> a = {{1, 0}, {2, 0}, {0, 1}, {-1, 0}, {3, 0}, {0, 0}, {0, -2}, {5, 0}};
    auto direct = [&](std::size_t k) {
        Complex acc = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            double ang = -2.0 * std::numbers::pi * static_cast<double>(j * k) / a.size();
            acc += a[j] * Complex(std::cos(ang), std::sin(ang));
        }
        return acc;
    };
    std::vector<Complex> want(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) want[k] = direct(k);
    auto b = a;
    fft_radix2(b, false);
    for (std::size_t k = 0; k < a.size(); ++k) REQUIRE(std::abs(b[k] - want[k]) < 1e-12);
    fft_radix2(b, true);
    for (std::size_t k = 0; k < a.size(); ++k) REQUIRE(std::abs(b[k] - a[k]) < 1e-12);
}

TEST_CASE("inverse normal cdf") {
    REQUIRE(inv_normal_cdf(0.975) == Catch::Approx(1.959963985).epsilon(1e-7));
    REQUIRE(inv_normal_cdf(0.5) == Catch::Approx(0.0).margin(1e-10));
    for (double p : {0.001, 0.1, 0.3, 0.7, 0.99, 0.999999})
        REQUIRE(normal_cdf(inv_normal_cdf(p)) == Catch::Approx(p).epsilon(1e-10));
    REQUIRE_THROWS_AS(inv_normal_cdf(0.0), InvalidArgument);
}

TEST_CASE("regularized incomplete gamma") {
    // a = 1: P(1,x) = 1 - e^-x (hits both the series and CF branches)
    for (double x : {0.1, 0.5, 1.0, 3.0, 10.0})
        REQUIRE(gamma_p(1.0, x) == Catch::Approx(-std::expm1(-x)).epsilon(1e-12));
    // a = 1/2: P(1/2, x) = erf(sqrt(x))
    for (double x : {0.2, 1.0, 4.0})
        REQUIRE(gamma_p(0.5, x) == Catch::Approx(std::erf(std::sqrt(x))).epsilon(1e-11));
    // chi-square: dof 2 is exponential
    REQUIRE(chi2_cdf(4.605170186, 2.0) == Catch::Approx(0.9).epsilon(1e-9));
    REQUIRE(chi2_cdf(76.1539, 50.0) == Catch::Approx(0.99).margin(2e-4));
}

TEST_CASE("line fit recovers slope and intercept") {
    std::vector<double> xs = {1, 2, 3, 4, 5}, ys;
    for (double x : xs) ys.push_back(-0.7 * x + 2.25);
    auto f = fit_line(xs, ys);
    REQUIRE(f.slope == Catch::Approx(-0.7).epsilon(1e-12));
    REQUIRE(f.intercept == Catch::Approx(2.25).epsilon(1e-12));
    std::vector<double> degenerate = {1.0, 1.0};
    REQUIRE_THROWS_AS(fit_line(degenerate, degenerate), InvalidArgument);
}
