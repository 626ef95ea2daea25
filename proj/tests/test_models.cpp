#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gwi/io.hpp"
#include "gwi/models.hpp"

using namespace gwi;

namespace {
const Model m1 = make_heavy(0.3, 0.7, 0.5, 1.0);
const Model m2 = make_very_heavy(1.0, 0.6, 0.2, 0.5);
}  // namespace

TEST_CASE("heavy model constructor rejects bad parameters") {
    REQUIRE_NOTHROW(make_heavy(0.3, 0.7, 0.5, 1.0));
    // P(xi=1) = 1 - 0.9 * 1.3 < 0
    REQUIRE_THROWS_AS(make_heavy(0.3, 0.7, 0.9, 1.0), ModelError);
    // standing assumption 0 < nu < delta < 1
    REQUIRE_THROWS_AS(make_heavy(0.5, 0.4, 0.3, 1.0), ModelError);
    REQUIRE_THROWS_AS(make_heavy(0.3, 0.7, 0.5, 1.5), ModelError);
    REQUIRE_THROWS_AS(make_heavy(0.3, 1.2, 0.5, 1.0), ModelError);
}

TEST_CASE("heavy xi pmf matches the binomial-series coefficients") {
    REQUIRE(xi_pmf(m1, 0) == Catch::Approx(0.5).epsilon(1e-14));
    REQUIRE(xi_pmf(m1, 1) == Catch::Approx(0.35).epsilon(1e-14));
    REQUIRE(xi_pmf(m1, 2) == Catch::Approx(0.0975).epsilon(1e-12));
    // oracle: the pmf must resum to f(s) = s + c1 (1-s)^{1+nu}
    for (double s : {0.0, 0.2, 0.5, 0.8, 0.95}) {
        double acc = 0.0, pw = 1.0;
        for (std::uint64_t k = 0; k <= 200000; ++k) {
            acc += xi_pmf(m1, k) * pw;
            pw *= s;
            if (pw < 1e-30) break;
        }
        double want = s + 0.5 * std::pow(1.0 - s, 1.3);
        REQUIRE(acc == Catch::Approx(want).margin(1e-9));
    }
}

TEST_CASE("heavy xi tail closed form, recurrence, and pmf consistency") {
    REQUIRE(xi_tail(m1, 0) == Catch::Approx(0.5).epsilon(1e-14));
    REQUIRE(xi_tail(m1, 1) == Catch::Approx(0.15).epsilon(1e-13));
    REQUIRE(xi_tail(m1, 2) == Catch::Approx(0.0525).epsilon(1e-13));
    // tail(n+1) = tail(n) (n - nu) / (n + 1), and tail(n) - tail(n+1) = pmf(n+1)
    for (std::uint64_t n : {0ull, 1ull, 7ull, 100ull, 9999ull}) {
        double t0 = xi_tail(m1, n), t1 = xi_tail(m1, n + 1);
        if (n >= 1) REQUIRE(t1 == Catch::Approx(t0 * (n - 0.3) / (n + 1.0)).epsilon(1e-10));
        REQUIRE(t0 - t1 == Catch::Approx(xi_pmf(m1, n + 1)).margin(1e-15));
    }
    // partial sums of the pmf reproduce the tail
    double acc = 1.0;
    for (std::uint64_t k = 0; k <= 1000; ++k) acc -= xi_pmf(m1, k);
    REQUIRE(acc == Catch::Approx(xi_tail(m1, 1000)).margin(1e-12));
}

TEST_CASE("heavy eta law: Sibuya product form") {
    REQUIRE(eta_tail(m1, 0) == Catch::Approx(1.0).epsilon(1e-14));  // c2
    REQUIRE(eta_tail(m1, 1) == Catch::Approx(0.3).epsilon(1e-13));
    REQUIRE(eta_tail(m1, 2) == Catch::Approx(0.3 * 0.65).epsilon(1e-13));
    // product formula oracle
    double prod = 1.0;
    for (int k = 1; k <= 50; ++k) {
        prod *= 1.0 - 0.7 / k;
        REQUIRE(eta_tail(m1, static_cast<std::uint64_t>(k)) == Catch::Approx(prod).epsilon(1e-11));
    }
    REQUIRE(eta_pmf(m1, 0) == Catch::Approx(0.0).margin(1e-14));
    REQUIRE(eta_pmf(m1, 1) == Catch::Approx(0.7).epsilon(1e-13));
}

TEST_CASE("mass and mean close with analytic remainders") {
    // sum of pmf + tail remainder = 1 (two independent formula routes)
    const std::uint64_t K = 10000;
    detail::KahanSum mass;
    for (std::uint64_t k = 0; k <= K; ++k) mass.add(xi_pmf(m1, k));
    REQUIRE(mass.value() + xi_tail(m1, K) == Catch::Approx(1.0).margin(1e-8));
    // E xi = sum_n tail(n); remainder sum_{n>K} tail(n) has the closed form
    // c1 Gamma(K+1-nu) / (Gamma(1-nu) Gamma(K+2)) ... telescoping identity
    detail::KahanSum mean;
    for (std::uint64_t n = 0; n <= K; ++n) mean.add(xi_tail(m1, n));
    double rem = 0.5 * std::exp(detail::log_gamma(K + 1.0 - 0.3) - detail::log_gamma(0.7) -
                                detail::log_gamma(K + 1.0));
    REQUIRE(mean.value() + rem == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("eta tail Tauberian constant") {
    // eta_tail(n) n^delta -> c2 / Gamma(1-delta), within 2% at n = 1e6
    double lim = 1.0 / std::tgamma(0.3);
    double got = eta_tail(m1, 1000000) * std::pow(1e6, 0.7);
    REQUIRE(std::abs(got / lim - 1.0) < 0.02);
}

TEST_CASE("very heavy model: q0 solver") {
    const auto& v = std::get<VeryHeavyModel>(m2);
    // direct-summation oracle with integral bracket for the remainder
    detail::KahanSum s;
    auto t = [&](double n) { return 0.2 / ((n + 1.0) * std::pow(std::log(n + 1.0 + detail::kEuler), 2.0)); };
    const long K = 1 << 22;
    for (long n = 1; n < K; ++n) s.add(t(static_cast<double>(n)));
    // integral bounds: t decreasing => int_K^inf <= sum_{n>=K} <= t(K) + int_K^inf
    auto kq = detail::integrate_adaptive(
        [&](double w) { return 0.2 * std::exp(w) / ((std::exp(w) - std::exp(1.0)) * w * w); },
        std::log(K + 1.0 + detail::kEuler), 60.0, 1e-14, 1e-12, 8000);
    double int_tail = kq.value + 0.2 / 60.0;  // exact remainder of the w-integral at w=60 up to e-59
    double lo = 1.0 - (s.value() + t(K) + int_tail), hi = 1.0 - (s.value() + int_tail);
    REQUIRE(v.q0 >= lo - 1e-9);
    REQUIRE(v.q0 <= hi + 1e-9);
    REQUIRE(v.q0 == Catch::Approx(solve_q0(1.0, 0.2)).epsilon(1e-14));
    // p = cc Gamma(1-delta) a / kappa
    REQUIRE(v.p == Catch::Approx(0.5 * std::tgamma(0.4) / 0.2).epsilon(1e-12));

    REQUIRE_THROWS_AS(make_very_heavy(1.0, 0.6, 10.0, 0.5), ModelError);  // sum > 1
    REQUIRE_THROWS_AS(make_very_heavy(1.0, 0.6, 0.0, 0.5), ModelError);   // degenerate
}

TEST_CASE("very heavy tails and pmf") {
    const auto& v = std::get<VeryHeavyModel>(m2);
    REQUIRE(xi_tail(m2, 0) == Catch::Approx(v.q0).epsilon(1e-14));
    REQUIRE(xi_tail(m2, 1) ==
            Catch::Approx(0.2 / (2.0 * std::pow(std::log(2.0 + detail::kEuler), 2.0))).epsilon(1e-13));
    REQUIRE(eta_tail(m2, 3) ==
            Catch::Approx(0.5 * std::pow(4.0, -0.6) * std::pow(std::log(4.0 + detail::kEuler), -1.0))
                .epsilon(1e-13));
    double mass = 0.0;
    for (std::uint64_t k = 0; k <= 4000; ++k) mass += xi_pmf(m2, k);
    REQUIRE(mass + xi_tail(m2, 4000) == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("very heavy survival series against brute force") {
    const auto& v = std::get<VeryHeavyModel>(m2);
    for (double R : {0.5, 0.1, 1e-3}) {
        double z = 1.0 - R;
        detail::KahanSum sx, se;
        for (long n = 0; n < 3000000; ++n) {
            double zn = std::exp(n * std::log1p(-R));
            if (zn < 1e-19 && n > 16) break;
            sx.add(xi_tail(m2, static_cast<std::uint64_t>(n)) * zn);
            se.add(eta_tail(m2, static_cast<std::uint64_t>(n)) * zn);
        }
        (void)z;
        REQUIRE(1.0 - v.lambda(R) == Catch::Approx(sx.value()).epsilon(2e-9));
        REQUIRE(v.eta_survival(R) == Catch::Approx(se.value()).epsilon(2e-9));
    }
}

TEST_CASE("very heavy induced L1 matches kappa/a (ln y)^-a with monotone approach") {
    // (f(x)-x)/(1-x) / L1((1-x)^{-1}) -> 1 as x -> 1
    const auto& v = std::get<VeryHeavyModel>(m2);
    double prev = 1e9;
    for (double R : {1e-3, 1e-5, 1e-7}) {
        double lambda = v.lambda(R);  // = (f(x)-x)/(1-x) at x = 1-R
        double l1 = v.kappa / v.a * std::pow(std::log(1.0 / R), -v.a);
        double err = std::abs(lambda / l1 - 1.0);
        REQUIRE(err < prev);
        prev = err;
    }
    REQUIRE(prev < 0.5);
}

TEST_CASE("sampler convention: smallest n with tail(n) < u") {
    struct FixedU {
        double u;
        double next_unit() { return u; }
    };
    auto tail = [&](std::uint64_t n) { return xi_tail(m1, n); };
    FixedU rng{0.6};  // tail(0) = 0.5 < 0.6 -> 0
    REQUIRE(detail::sample_by_tail(rng, tail, kDefaultValueCap).value() == 0);
    rng.u = 0.4;  // tail(0)=0.5 >= u > tail(1)=0.15 -> 1
    REQUIRE(detail::sample_by_tail(rng, tail, kDefaultValueCap).value() == 1);
    rng.u = 0.10;  // tail(1)=0.15 >= u > tail(2)=0.0525 -> 2
    REQUIRE(detail::sample_by_tail(rng, tail, kDefaultValueCap).value() == 2);
    // a draw beyond the cap signals instead of truncating
    rng.u = xi_tail(m1, 40) * 0.5;  // value would be >= 41
    REQUIRE_FALSE(detail::sample_by_tail(rng, tail, 8).has_value());
}

TEST_CASE("sampler distributions match the closed-form laws") {
    CounterRng rng(7, 0);
    const int reps = 200000;
    std::vector<std::uint64_t> draws;
    draws.reserve(reps);
    for (int i = 0; i < reps; ++i) draws.push_back(*sample_xi(rng, m1));
    for (std::uint64_t x : {1ull, 10ull, 100ull}) {
        double want = xi_tail(m1, x);
        std::uint64_t hits = 0;
        for (auto d : draws) hits += d > x;
        double se = std::sqrt(want * (1.0 - want) / reps);
        REQUIRE(std::abs(static_cast<double>(hits) / reps - want) < 4.0 * se + 1e-9);
    }
    // eta for the very heavy model
    CounterRng rng2(7, 1);
    std::vector<std::uint64_t> ed;
    ed.reserve(reps);
    for (int i = 0; i < reps; ++i) ed.push_back(*sample_eta(rng2, m2));
    for (std::uint64_t x : {1ull, 10ull, 100ull}) {
        double want = eta_tail(m2, x);
        std::uint64_t hits = 0;
        for (auto d : ed) hits += d > x;
        double se = std::sqrt(want * (1.0 - want) / reps);
        REQUIRE(std::abs(static_cast<double>(hits) / reps - want) < 4.0 * se + 1e-9);
    }
}

TEST_CASE("sampler chi-square goodness of fit") {
    // {0..50} plus an overflow bucket, significance 0.01
    CounterRng rng(11, 3);
    const int reps = 300000;
    std::vector<std::uint64_t> counts(52, 0);
    for (int i = 0; i < reps; ++i) {
        auto d = *sample_eta(rng, m1);
        counts[d <= 50 ? d : 51]++;
    }
    double chi2 = 0.0;
    int dof = 0;
    for (int k = 0; k <= 51; ++k) {
        double pk = k <= 50 ? eta_pmf(m1, static_cast<std::uint64_t>(k)) : eta_tail(m1, 50);
        double e = pk * reps;
        if (e < 5.0) continue;  // merge-tiny convention; Sibuya pmf keeps all cells > 5 here anyway
        chi2 += (counts[static_cast<std::size_t>(k)] - e) * (counts[static_cast<std::size_t>(k)] - e) / e;
        ++dof;
    }
    dof -= 1;
    REQUIRE(detail::chi2_cdf(chi2, dof) < 0.99);
}

TEST_CASE("tabulated model") {
    auto toy = make_tabulated({0.5, 0.25, 0.25}, {0.4, 0.6});
    REQUIRE(xi_tail(toy, 0) == Catch::Approx(0.5));
    REQUIRE(xi_tail(toy, 1) == Catch::Approx(0.25));
    REQUIRE(xi_tail(toy, 2) == Catch::Approx(0.0));
    REQUIRE(toy.xi_mean == Catch::Approx(0.75));
    REQUIRE_THROWS_AS(make_tabulated({0.5, 0.4}, {1.0}), ModelError);        // xi not normalized
    REQUIRE_THROWS_AS(make_tabulated({0.5, 0.5}, {1.0}), ModelError);        // eta degenerate at 0
    REQUIRE_THROWS_AS(make_tabulated({-0.1, 1.1}, {0.5, 0.5}), ModelError);  // negative mass
}

TEST_CASE("validation report") {
    auto rep = validate_spec(m1);
    REQUIRE(rep.ok);
    REQUIRE(rep.criticality_residual < 1e-8);
    bool found_integral = false;
    for (const auto& c : rep.checks)
        if (c.name == "stationarity integral finite") {
            found_integral = true;
            REQUIRE(c.passed);
            // closed form (c2/c1)/(delta-nu) = 2/0.4 = 5
            REQUIRE(c.value == Catch::Approx(5.0).epsilon(1e-6));
        }
    REQUIRE(found_integral);

    auto rep2 = validate_spec(m2);
    REQUIRE(rep2.ok);
    REQUIRE(rep2.criticality_residual < 1e-9);
}

TEST_CASE("model json round trip") {
    for (const Model* m : {&m1, &m2}) {
        auto j = model_to_json(*m);
        auto back = model_from_json(j);
        REQUIRE(model_to_json(back) == j);
    }
    auto toy = make_tabulated({0.5, 0.5}, {0.25, 0.75});
    REQUIRE(model_to_json(model_from_json(model_to_json(toy))) == model_to_json(toy));
    Json bad = {{"family", "weird"}};
    REQUIRE_THROWS_AS(model_from_json(bad), ModelError);
}
