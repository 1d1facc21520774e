#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "radsing/series.hpp"

using namespace radsing;

TEST_CASE("series arithmetic against brute-force convolution") {
    auto rep = series_self_test();
    CHECK(rep.ok);
    CHECK(rep.max_reciprocal_err < 1e-13);
    CHECK(rep.max_power_err < 1e-13);
    CHECK(rep.max_compose_err < 1e-13);
}

TEST_CASE("series identities") {
    SECTION("(1+s) * reciprocal(1+s) = 1") {
        TruncatedSeries s(6, 1.0);
        s.at(1) = 1.0;
        auto prod = s * s.reciprocal();
        CHECK(prod[0] == Catch::Approx(1.0).margin(1e-15));
        for (std::size_t k = 1; k <= 6; ++k) CHECK(prod[k] == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("real power of 1+s has binomial coefficients") {
        TruncatedSeries s(6, 1.0);
        s.at(1) = 1.0;
        const double alpha = 2.7;
        auto p = s.pow(alpha);
        double binom = 1.0;
        for (std::size_t k = 0; k <= 6; ++k) {
            CHECK(p[k] == Catch::Approx(binom).epsilon(1e-13));
            binom *= (alpha - static_cast<double>(k)) / static_cast<double>(k + 1);
        }
    }
    SECTION("composition with the zero series keeps the constant term") {
        TruncatedSeries f(5, 3.25);
        f.at(1) = -2.0;
        f.at(3) = 0.7;
        TruncatedSeries zero(5, 0.0);
        auto c = TruncatedSeries::compose(f, zero);
        CHECK(c[0] == 3.25);
        for (std::size_t k = 1; k <= 5; ++k) CHECK(c[k] == 0.0);
    }
    SECTION("log inverts exp-like data") {
        TruncatedSeries s(6, 2.0);
        s.at(1) = 0.3;
        s.at(2) = -0.1;
        auto back = s.log();
        CHECK(back[0] == Catch::Approx(std::log(2.0)).epsilon(1e-15));
        // d/ds log S = S'/S at s=0: c1/c0
        CHECK(back[1] == Catch::Approx(0.15).epsilon(1e-14));
    }
}

TEST_CASE("quadratic coefficient of ((1+V)^q - 1)/(1+V)") {
    // leading structure q V (1 + g1 V + ...) with g1 = (q-3)/2, checked by
    // brute-force evaluation at a small V
    const double q = 2.6;
    const double V = 1e-5;
    const double lhs = (std::pow(1.0 + V, q) - 1.0) / (1.0 + V);
    const double g1 = (q - 3.0) / 2.0;
    CHECK(lhs == Catch::Approx(q * V * (1.0 + g1 * V)).margin(1e-13));
    // and the series route reproduces it
    TruncatedSeries W(4, 1.0);
    W.at(1) = 1.0;  // V = s
    auto D = (W.pow(q) - TruncatedSeries(4, 1.0)) * W.reciprocal();
    CHECK(D[1] == Catch::Approx(q).epsilon(1e-14));
    CHECK(D[2] == Catch::Approx(q * g1).epsilon(1e-13));
}

TEST_CASE("expansion anchors") {
    SECTION("A1 = (2-N)/q^2 for several parameter sets") {
        for (int N : {2, 3, 5, 9}) {
            for (double q : {2.3, 3.0, 4.5}) {
                auto e = expand(Params::checked(N, 1.0, q), 3);
                CHECK(e.A[0] == Catch::Approx((2.0 - N) / (q * q)).margin(1e-14));
            }
        }
    }
    SECTION("N=2 coefficients vanish through order 5") {
        auto e = expand(Params::checked(2, 1.0, 3.0), 5);
        for (int k = 0; k < 5; ++k) {
            CHECK(std::abs(e.A[k]) < 1e-12);
            CHECK(std::abs(e.a[k]) < 1e-12);
        }
    }
    SECTION("order-1 radial coefficient matches the hand-derived closed form") {
        // a1 = (N-2) / (M (q-1) q^{q-1}); for N=3, M=1, q=3 this is 1/18
        auto e = expand(Params::checked(3, 1.0, 3.0), 1);
        CHECK(e.a[0] == Catch::Approx(1.0 / 18.0).epsilon(1e-12));
        auto e2 = expand(Params::checked(5, 2.0, 2.5), 1);
        CHECK(e2.a[0] ==
              Catch::Approx(3.0 / (2.0 * 1.5 * std::pow(2.5, 1.5))).epsilon(1e-12));
    }
    SECTION("order stability: lower coefficients unchanged when n grows") {
        auto e5 = expand(Params::checked(3, 1.0, 3.0), 5);
        auto e8 = expand(Params::checked(3, 1.0, 3.0), 8);
        for (int k = 0; k < 5; ++k) {
            CHECK(e8.a[k] == Catch::Approx(e5.a[k]).margin(1e-12 * (1.0 + std::abs(e5.a[k]))));
            CHECK(e8.A[k] == Catch::Approx(e5.A[k]).margin(1e-12 * (1.0 + std::abs(e5.A[k]))));
        }
    }
    SECTION("window and order guards") {
        CHECK_THROWS_AS(expand(Params::checked(3, 1.0, 1.5), 3), WindowViolation);
        CHECK_THROWS_AS(expand(Params::checked(3, 1.0, 3.0), 13), OrderOverflow);
        CHECK_THROWS_AS(expand(Params::checked(3, 1.0, 3.0), 0), InvalidParams);
    }
}

TEST_CASE("rescaling invariance in M") {
    // u_M(x) = u_1(lambda x) + c with lambda = M^{-1/(q-2)}, c = -2 ln M/(q-2):
    // evaluated expansions must agree on a range of radii
    const int N = 4;
    const double q = 2.8, M = 3.7;
    auto eM = expand(Params::checked(N, M, q), 6);
    auto e1 = expand(Params::checked(N, 1.0, q), 6);
    const double lambda = std::pow(M, -1.0 / (q - 2.0));
    const double c = -2.0 / (q - 2.0) * std::log(M);
    for (int i = 0; i < 20; ++i) {
        const double r = 1e-3 * std::pow(1.35, i);
        if (std::abs(eM.a[0]) * std::pow(r, q - 2.0) >= 0.1) break;
        const auto vM = evaluate_expansion(eM, r);
        const auto v1 = evaluate_expansion(e1, lambda * r);
        CHECK(vM.u == Catch::Approx(v1.u + c).margin(1e-10 * (1.0 + std::abs(vM.u))));
        CHECK(vM.up == Catch::Approx(lambda * v1.up).margin(1e-10 * (1.0 + std::abs(vM.up))));
    }
}

TEST_CASE("expansion evaluation") {
    const Params prm = Params::checked(3, 1.0, 3.0);
    auto e = expand(prm, 3);
    SECTION("order zero is exactly the eikonal profile") {
        for (double r : {1e-4, 1e-3, 1e-2}) {
            const auto v = evaluate_expansion(e, r, 0);
            CHECK(v.u == Catch::Approx(std::log(27.0) - 3.0 * std::log(r)).epsilon(1e-14));
            CHECK(v.up == Catch::Approx(-3.0 / r).epsilon(1e-14));
        }
    }
    SECTION("next-term dominance at r = 1e-3") {
        const double r = 1e-3;
        const auto v1 = evaluate_expansion(e, r, 1);
        const auto v2 = evaluate_expansion(e, r, 2);
        CHECK(std::abs(v2.u - v1.u) <= std::abs(e.a[1]) * 1e-6 * 1.01);
    }
    SECTION("higher order shrinks the equation residual by 10x or more") {
        const double r = 1e-3;
        auto resid = [&](int order) {
            const auto v = evaluate_expansion(e, r, order);
            // u'' from the equation vs termwise series second derivative
            const double from_eq =
                -(prm.N - 1) * v.up / r + prm.M * abs_pow(v.up, prm.q) - std::exp(v.u);
            return std::abs(v.upp - from_eq);
        };
        CHECK(resid(3) * 10.0 <= resid(1));
    }
    SECTION("radius guard") {
        CHECK_THROWS_AS(evaluate_expansion(e, 10.0), RadiusTooLarge);
    }
}
