#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "radsing/params.hpp"
#include "radsing/state.hpp"

using namespace radsing;

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(Params::checked(3, 1.0, 2.0), InvalidParams);
    CHECK_THROWS_AS(Params::checked(3, 1.0, 0.5), InvalidParams);
    CHECK_THROWS_AS(Params::checked(3, -1.0, 3.0), InvalidParams);
    CHECK_THROWS_AS(Params::checked(0, 1.0, 3.0), InvalidParams);
    CHECK_NOTHROW(Params::checked(1, 0.5, 1.1));
}

TEST_CASE("derived constants on their validity windows") {
    SECTION("xi_M closed form, N=3 M=1 q=1.75") {
        auto c = derive_constants(Params::checked(3, 1.0, 1.75));
        REQUIRE(c.xi_M.has_value());
        CHECK(*c.xi_M == Catch::Approx(3.0 * std::pow(2.0 / 3.0, 4.0 / 3.0)).epsilon(1e-15));
        CHECK(*c.xi_M == Catch::Approx(1.7472).margin(2e-4));
        CHECK(c.beta == Catch::Approx((2.0 - 1.75) / 0.75));
    }
    SECTION("xi_M absent exactly at q = q_c") {
        auto c = derive_constants(Params::checked(3, 1.0, 1.5));
        CHECK_FALSE(c.xi_M.has_value());
        CHECK(c.kappa == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("Lambda and emden_x, N=2 M=1 q=3") {
        auto c = derive_constants(Params::checked(2, 1.0, 3.0));
        CHECK(c.Lambda == Catch::Approx(std::log(27.0)).epsilon(1e-15));
        CHECK(c.emden_x == 0.0);
        REQUIRE(c.theta.has_value());
        CHECK(*c.theta == Catch::Approx(1.0 / 3.0));
    }
    SECTION("kappa positive iff q above q_c") {
        CHECK(derive_constants(Params::checked(3, 1.0, 1.6)).kappa > 0.0);
        CHECK(derive_constants(Params::checked(3, 1.0, 1.4)).kappa < 0.0);
        CHECK_FALSE(derive_constants(Params::checked(1, 1.0, 3.0)).q_c.has_value());
    }
    SECTION("xi_M blows up as q approaches 2") {
        auto xi = [](double q) {
            return *derive_constants(Params::checked(3, 1.0, q)).xi_M;
        };
        CHECK(xi(1.9) > xi(1.8));
        CHECK(xi(1.8) > xi(1.7));
    }
}

TEST_CASE("to_phase matches the algebraic definitions") {
    const Params prm = Params::checked(4, 1.0, 3.0);
    SECTION("unit state in the Emden plane") {
        auto p = to_phase(Params::checked(3, 1.0, 1.5), {1.0, 0.0, -2.0}, SystemTag::EmdenPlane);
        auto& e = std::get<EmdenPoint>(p);
        CHECK(e.x == Catch::Approx(1.0));
        CHECK(e.Phi == Catch::Approx(2.0));
    }
    SECTION("the Emden equilibrium from radial data, N=4") {
        auto p = to_phase(prm, {1.0, std::log(4.0), -2.0}, SystemTag::EmdenPlane);
        auto& e = std::get<EmdenPoint>(p);
        CHECK(e.x == Catch::Approx(4.0));  // 2(N-2)
        CHECK(e.Phi == Catch::Approx(2.0));
    }
    SECTION("critical point rejected where u' = 0 divides") {
        CHECK_THROWS_AS(to_phase(prm, {1.0, 0.0, 0.0}, SystemTag::LotkaVolterra), CriticalPoint);
        CHECK_NOTHROW(to_phase(prm, {1.0, 0.0, 0.0}, SystemTag::EmdenPlane));
    }
}

TEST_CASE("from_phase inversions") {
    SECTION("Emden plane inverse of the unit example") {
        const Params prm = Params::checked(3, 1.0, 1.5);
        RadialState s = from_phase(prm, EmdenPoint{1.0, 2.0}, 0.0);
        CHECK(s.r == Catch::Approx(1.0));
        CHECK(s.u == Catch::Approx(0.0).margin(1e-15));
        CHECK(s.p == Catch::Approx(-2.0));
    }
    SECTION("eikonal data at r = 1 from the X chart") {
        const Params prm = Params::checked(2, 1.0, 3.0);
        RadialState s = from_phase(prm, EikonalPoint{27.0, 3.0}, 0.0);
        CHECK(s.r == Catch::Approx(1.0));
        CHECK(s.u == Catch::Approx(std::log(27.0)));
        CHECK(s.p == Catch::Approx(-3.0));
    }
}

TEST_CASE("transform round trips on random valid states") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> lr(-3.0, 3.0), uu(-3.0, 3.0), pp(0.1, 4.0);
    const Params prm = Params::checked(3, 0.7, 1.6);
    const SystemTag tags[] = {SystemTag::EmdenPlane,    SystemTag::NonAutX,
                              SystemTag::NonAutXq,      SystemTag::TripleV,
                              SystemTag::TripleXV,      SystemTag::TripleTheta,
                              SystemTag::LotkaVolterra, SystemTag::HJ,
                              SystemTag::OneD,          SystemTag::ZofU,
                              SystemTag::AppendixVarpi};
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        RadialState s{std::exp(lr(rng)), uu(rng), -pp(rng)};  // decreasing states
        const double t = std::log(s.r);
        for (SystemTag tag : tags) {
            const double evol =
                (tag == SystemTag::ZofU || tag == SystemTag::AppendixVarpi) ? s.u : t;
            RadialState back = from_phase(prm, to_phase(prm, s, tag), evol);
            worst = std::max({worst, std::abs(back.r - s.r) / s.r,
                              std::abs(back.u - s.u) / (1.0 + std::abs(s.u)),
                              std::abs(back.p - s.p) / (1.0 + std::abs(s.p))});
        }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("cross-system consistency relations") {
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> lr(-2.0, 2.0), uu(-2.0, 2.0), pp(0.05, 3.0);
    const Params prm = Params::checked(3, 1.3, 1.7);
    const double q = prm.q;
    for (int i = 0; i < 100; ++i) {
        const double sgn = (i % 2 == 0) ? -1.0 : 1.0;  // both monotonicity branches
        RadialState s{std::exp(lr(rng)), uu(rng), sgn * pp(rng)};
        const double t = std::log(s.r);

        auto tv = std::get<TripleVPoint>(to_phase(prm, s, SystemTag::TripleV));
        // V = e^{(2-q)t} |Phi|^{q-1}
        CHECK(tv.V ==
              Catch::Approx(std::exp((2.0 - q) * t) * abs_pow(tv.Phi, q - 1.0)).epsilon(1e-12));

        auto lv = std::get<LotkaVolterraPoint>(to_phase(prm, s, SystemTag::LotkaVolterra));
        // Z Phi = x and X = Z |Phi|^{q-1} Phi / V
        CHECK(lv.Z * lv.Phi == Catch::Approx(tv.x).epsilon(1e-12));
        auto xq = std::get<EikonalPoint>(to_phase(prm, s, SystemTag::NonAutXq));
        CHECK(lv.Z * abs_pow(lv.Phi, q - 1.0) * lv.Phi / lv.V ==
              Catch::Approx(xq.X).epsilon(1e-12));
    }
}

TEST_CASE("eikonal profile solves the first-order equation exactly") {
    SECTION("values at r = 1, N=2 M=1 q=3") {
        const Params prm = Params::checked(2, 1.0, 3.0);
        RadialState s = eikonal_profile(prm, 1.0);
        CHECK(s.u == Catch::Approx(std::log(27.0)));
        CHECK(s.p == Catch::Approx(-3.0));
    }
    SECTION("M |u'|^q = e^u along the profile") {
        const Params prm = Params::checked(3, 2.5, 2.7);
        for (double r : {1e-3, 0.1, 1.0, 42.0}) {
            RadialState s = eikonal_profile(prm, r);
            CHECK(prm.M * abs_pow(s.p, prm.q) ==
                  Catch::Approx(std::exp(s.u)).epsilon(1e-13));
        }
    }
    SECTION("full-equation residual: zero for N=2, (N-2)q/r^2 for N=4") {
        auto resid = [](const Params& prm, double r) {
            RadialState s = eikonal_profile(prm, r);
            // -u'' - (N-1)/r u' + M|u'|^q - e^u with u'' = q / r^2
            return -prm.q / (r * r) - (prm.N - 1) * s.p / r + prm.M * abs_pow(s.p, prm.q) -
                   std::exp(s.u);
        };
        const Params n2 = Params::checked(2, 1.0, 3.0);
        CHECK(resid(n2, 0.37) == Catch::Approx(0.0).margin(1e-12));
        const Params n4 = Params::checked(4, 1.0, 3.0);
        CHECK(resid(n4, 1.0) == Catch::Approx(6.0).epsilon(1e-12));
        CHECK(resid(n4, 2.0) == Catch::Approx(6.0 / 4.0).epsilon(1e-12));
    }
}
