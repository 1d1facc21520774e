#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>

#include "radsing/systems.hpp"

using namespace radsing;

namespace {

// numerical Jacobian by central differences
Eigen::Matrix3d numerical_jacobian(const Params& prm, SystemTag tag,
                                   const std::array<double, 3>& y, int lv_sign,
                                   double h = 1e-6) {
    Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
    const int n = dimension(tag);
    for (int j = 0; j < n; ++j) {
        std::array<double, 3> yp = y, ym = y, dp{}, dm{};
        yp[j] += h;
        ym[j] -= h;
        eval_system_rhs(prm, tag, yp, 0.0, dp, lv_sign);
        eval_system_rhs(prm, tag, ym, 0.0, dm, lv_sign);
        for (int i = 0; i < n; ++i) J(i, j) = (dp[i] - dm[i]) / (2.0 * h);
    }
    return J;
}

}  // namespace

TEST_CASE("tagged right-hand sides vanish at the printed fixed points") {
    SECTION("Theta-extended system at the Emden point, N=4") {
        const Params prm = Params::checked(4, 1.0, 1.5);
        auto tangent = rhs(prm, SystemTag::TripleTheta, TripleThetaPoint{4.0, 2.0, 0.0});
        auto d = to_array(tangent);
        CHECK(d[0] == 0.0);
        CHECK(d[1] == 0.0);
        CHECK(d[2] == 0.0);
    }
    SECTION("quadratic system at N0 = (N, 0, 0)") {
        const Params prm = Params::checked(3, 2.0, 3.0);
        auto d = to_array(rhs(prm, SystemTag::LotkaVolterra, LotkaVolterraPoint{3.0, 0.0, 0.0}));
        CHECK(d[0] == 0.0);
        CHECK(d[1] == 0.0);
        CHECK(d[2] == 0.0);
    }
    SECTION("wrong point variant rejected") {
        const Params prm = Params::checked(3, 1.0, 3.0);
        CHECK_THROWS_AS(rhs(prm, SystemTag::TripleTheta, EmdenPoint{1.0, 1.0}), WrongTag);
    }
}

TEST_CASE("chain rule: phase tangents match the radial flow") {
    // d/dt of to_phase along the radial equation equals the tagged rhs
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> lr(-0.7, 0.7), uu(-1.0, 1.0), pp(0.2, 2.0);
    const Params prm = Params::checked(3, 1.1, 1.7);
    const SystemTag tags[] = {SystemTag::NonAutX,  SystemTag::NonAutXq,
                              SystemTag::TripleV,  SystemTag::TripleXV,
                              SystemTag::TripleTheta, SystemTag::LotkaVolterra};
    for (int trial = 0; trial < 20; ++trial) {
        const double sgn = trial % 2 ? 1.0 : -1.0;
        RadialState s{std::exp(lr(rng)), uu(rng), sgn * pp(rng)};
        const double t = std::log(s.r);
        const double dt = 1e-6;

        // micro-steps of the radial flow in t, both directions
        auto flow = [&](double tt, const std::array<double, 2>& y,
                        std::array<double, 2>& dy) {
            dy[0] = y[1];
            dy[1] = -(prm.N - 2) * y[1] - std::exp(2.0 * tt + y[0]) +
                    prm.M * std::exp((2.0 - prm.q) * tt) * abs_pow(y[1], prm.q);
        };
        std::array<double, 2> y{s.u, s.r * s.p};
        RadialState fwd, bwd;
        dp5_integrate<2>(flow, t, y, t + dt, 1e-13, 1e-16, 1000, 0.0,
                         [&](const DenseStep<2>&, const std::array<double, 2>& yy,
                             const std::array<double, 2>&) {
                             fwd = RadialState{std::exp(t + dt), yy[0],
                                               yy[1] * std::exp(-(t + dt))};
                             return true;
                         });
        dp5_integrate<2>(flow, t, y, t - dt, 1e-13, 1e-16, 1000, 0.0,
                         [&](const DenseStep<2>&, const std::array<double, 2>& yy,
                             const std::array<double, 2>&) {
                             bwd = RadialState{std::exp(t - dt), yy[0],
                                               yy[1] * std::exp(-(t - dt))};
                             return true;
                         });

        for (SystemTag tag : tags) {
            auto a = to_array(to_phase(prm, fwd, tag));
            auto b = to_array(to_phase(prm, bwd, tag));
            auto d = to_array(rhs(prm, tag, to_phase(prm, s, tag), t));
            for (int i = 0; i < dimension(tag); ++i) {
                const double fd = (a[i] - b[i]) / (2.0 * dt);
                CHECK(fd == Catch::Approx(d[i]).margin(1e-6 * (1.0 + std::abs(d[i]))));
            }
        }
    }
}

TEST_CASE("equilibria of the Theta-extended system") {
    SECTION("eigenvalues {-1, -4, -4} at N=10, q=3") {
        const Params prm = Params::checked(10, 1.0, 3.0);
        auto reps = equilibria(prm, SystemTag::TripleTheta);
        REQUIRE(reps.size() == 2);
        const auto& rep = reps[1];  // (2(N-2), 2, 0)
        CHECK(rep.location[0] == Catch::Approx(16.0));
        CHECK(rep.rhs_residual < 1e-12);
        CHECK(rep.eigenvalues[0].real() == Catch::Approx(-1.0).margin(1e-10));
        CHECK(rep.eigenvalues[1].real() == Catch::Approx(-4.0).margin(1e-6));
        CHECK(rep.eigenvalues[2].real() == Catch::Approx(-4.0).margin(1e-6));
        CHECK(rep.classification == Stability::Sink);
    }
    SECTION("N=4, q=1.5: one positive real eigenvalue, complex pair with Re = -1") {
        const Params prm = Params::checked(4, 1.0, 1.5);
        auto reps = equilibria(prm, SystemTag::TripleTheta);
        const auto& rep = reps[1];
        CHECK(rep.eigenvalues[0].real() == Catch::Approx(0.5).margin(1e-12));
        CHECK(rep.eigenvalues[0].imag() == Catch::Approx(0.0).margin(1e-12));
        CHECK(rep.eigenvalues[1].real() == Catch::Approx(-1.0).margin(1e-10));
        CHECK(std::abs(rep.eigenvalues[1].imag()) > 0.5);
        CHECK(rep.classification == Stability::Saddle);
    }
    SECTION("origin eigenstructure: {2, 2-q, 2-N} with printed eigenvectors") {
        const Params prm = Params::checked(3, 1.0, 1.5);
        auto reps = equilibria(prm, SystemTag::TripleTheta);
        const auto& rep = reps[0];
        CHECK(rep.eigenvalues[0].real() == Catch::Approx(2.0));
        CHECK(rep.eigenvalues[1].real() == Catch::Approx(0.5));   // 2-q
        CHECK(rep.eigenvalues[2].real() == Catch::Approx(-1.0));  // 2-N
        // eigenvector for 2 is parallel to (N, 1, 0)
        const auto v = rep.eigenvectors[0];
        CHECK(std::abs(v(0).real() / v(1).real() - prm.N) < 1e-10);
        CHECK(std::abs(v(2)) < 1e-12);
        // eigenvector for 2-q is the pure Theta direction
        const auto w = rep.eigenvectors[1];
        CHECK(std::abs(w(0)) < 1e-12);
        CHECK(std::abs(w(1)) < 1e-12);
        CHECK(std::abs(std::abs(w(2).real()) - 1.0) < 1e-12);
    }
}

TEST_CASE("equilibria of the quadratic system") {
    const Params prm = Params::checked(3, 1.0, 3.0);
    SECTION("increasing branch carries P0 with V = kappa / M") {
        auto reps = equilibria(prm, SystemTag::LotkaVolterra, -1);
        REQUIRE(reps.size() == 4);
        const auto& p0 = reps[3];
        CHECK(p0.location[0] == 0.0);
        CHECK(p0.location[1] == Catch::Approx(1.5));  // ((N-1)q - N)/(M(q-1))
        CHECK(p0.location[2] == 0.0);
        CHECK(p0.rhs_residual < 1e-12);
        // eigenvalues (q/(q-1), (N-1)q-N, (q-2)/(q-1)), all positive
        CHECK(p0.eigenvalues[0].real() == Catch::Approx(3.0));
        CHECK(p0.eigenvalues[1].real() == Catch::Approx(1.5));
        CHECK(p0.eigenvalues[2].real() == Catch::Approx(0.5));
        CHECK(p0.classification == Stability::Source);
    }
    SECTION("decreasing branch has no admissible P0 for q > 2") {
        auto reps = equilibria(prm, SystemTag::LotkaVolterra, +1);
        CHECK(reps.size() == 3);  // O, N0, Q0 only
    }
    SECTION("every reported point is a genuine fixed point") {
        for (int s : {+1, -1})
            for (const auto& rep : equilibria(prm, SystemTag::LotkaVolterra, s))
                CHECK(rep.rhs_residual < 1e-12);
    }
    SECTION("Q0 = (N-2, 0, 2) has exactly zero residual") {
        auto reps = equilibria(prm, SystemTag::LotkaVolterra, +1);
        const auto& q0 = reps[2];
        CHECK(q0.location[0] == Catch::Approx(1.0));
        CHECK(q0.location[2] == Catch::Approx(2.0));
        CHECK(q0.rhs_residual == 0.0);
        // its characteristic polynomial is (2-q-l)(l^2 + (N-2)l + 2(N-2))
        for (int i = 0; i < 3; ++i) {
            const auto l = q0.eigenvalues[i];
            const auto val = (2.0 - prm.q - l) * (l * l + (prm.N - 2.0) * l + 2.0 * (prm.N - 2));
            CHECK(std::abs(val) < 1e-10);
        }
    }
    SECTION("N0 eigenvalues {-N, q, 2}") {
        auto reps = equilibria(prm, SystemTag::LotkaVolterra, +1);
        const auto& n0 = reps[1];
        CHECK(n0.eigenvalues[0].real() == Catch::Approx(3.0));  // q
        CHECK(n0.eigenvalues[1].real() == Catch::Approx(2.0));
        CHECK(n0.eigenvalues[2].real() == Catch::Approx(-3.0));  // -N
    }
}

TEST_CASE("linearize") {
    SECTION("printed Jacobian rows at the Emden point of the Theta system") {
        const Params prm = Params::checked(3, 1.0, 1.5);
        auto rep = linearize(prm, SystemTag::TripleTheta, TripleThetaPoint{2.0, 2.0, 0.0});
        const double M2q = prm.M * std::pow(2.0, prm.q);
        CHECK(rep.jacobian(0, 0) == Catch::Approx(0.0).margin(1e-14));
        CHECK(rep.jacobian(0, 1) == Catch::Approx(-2.0));  // -2(N-2)
        CHECK(rep.jacobian(0, 2) == 0.0);
        CHECK(rep.jacobian(1, 0) == 1.0);
        CHECK(rep.jacobian(1, 1) == Catch::Approx(-1.0));  // 2-N
        CHECK(rep.jacobian(1, 2) == Catch::Approx(-M2q));
        CHECK(rep.jacobian(2, 0) == 0.0);
        CHECK(rep.jacobian(2, 1) == 0.0);
        CHECK(rep.jacobian(2, 2) == Catch::Approx(0.5));  // 2-q
    }
    SECTION("non-fixed point rejected") {
        const Params prm = Params::checked(3, 1.0, 1.5);
        CHECK_THROWS_AS(linearize(prm, SystemTag::TripleTheta, TripleThetaPoint{1.0, 1.0, 0.0}),
                        NotAFixedPoint);
    }
    SECTION("analytic Jacobians agree with central differences") {
        std::mt19937 rng(99);
        std::uniform_real_distribution<double> ur(0.3, 2.5);
        const Params prm = Params::checked(3, 1.2, 2.6);
        const SystemTag tags[] = {SystemTag::EmdenPlane, SystemTag::TripleV,
                                  SystemTag::TripleXV,   SystemTag::TripleTheta,
                                  SystemTag::LotkaVolterra, SystemTag::OneD};
        for (SystemTag tag : tags) {
            for (int trial = 0; trial < 5; ++trial) {
                std::array<double, 3> y = {ur(rng), ur(rng), ur(rng)};
                Eigen::Matrix3d Ja = system_jacobian(prm, tag, y, +1);
                Eigen::Matrix3d Jn = numerical_jacobian(prm, tag, y, +1);
                const int n = dimension(tag);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        CHECK(Ja(i, j) ==
                              Catch::Approx(Jn(i, j)).margin(1e-6 * (1.0 + std::abs(Ja(i, j)))));
            }
        }
    }
}

TEST_CASE("manifold seeding") {
    const Params prm = Params::checked(3, 1.0, 1.5);
    auto reps = equilibria(prm, SystemTag::TripleTheta);
    const auto& rep = reps[1];  // (2, 2, 0) for N=3

    SECTION("unstable direction has positive f(q) and positive Theta component") {
        // f(q) = q^2 - (N+2)q + 4(N-1) = 2.75 at N=3, q=1.5
        const double f = prm.q * prm.q - (prm.N + 2) * prm.q + 4.0 * (prm.N - 1);
        CHECK(f == Catch::Approx(2.75));
        int idx = -1;
        for (int i = 0; i < 3; ++i)
            if (std::abs(rep.eigenvalues[i].real() - 0.5) < 1e-10) idx = i;
        REQUIRE(idx >= 0);
        auto seed = to_array(manifold_seed(rep, idx, 1e-5));
        CHECK(seed[2] > 0.0);
        // eigenvector parallel to (2(N-2), q-2, f(q)/(2^q M))
        Eigen::Vector3d v = rep.eigenvectors[idx].real();
        const double scale = v(0) / (2.0 * (prm.N - 2));
        CHECK(v(1) == Catch::Approx(scale * (prm.q - 2.0)).margin(1e-10));
        CHECK(v(2) ==
              Catch::Approx(scale * f / (std::pow(2.0, prm.q) * prm.M)).margin(1e-10));
    }
    SECTION("zero amplitude returns the fixed point") {
        auto seed = to_array(manifold_seed(rep, 0, 0.0));
        CHECK(seed[0] == rep.location[0]);
        CHECK(seed[1] == rep.location[1]);
        CHECK(seed[2] == rep.location[2]);
    }
    SECTION("pure Theta perturbation at the origin") {
        const auto& origin = reps[0];
        int idx = -1;
        for (int i = 0; i < 3; ++i)
            if (std::abs(origin.eigenvalues[i].real() - 0.5) < 1e-10) idx = i;
        REQUIRE(idx >= 0);
        auto seed = to_array(manifold_seed(origin, idx, 1e-5));
        CHECK(seed[0] == Catch::Approx(0.0).margin(1e-17));
        CHECK(seed[1] == Catch::Approx(0.0).margin(1e-17));
        CHECK(seed[2] == Catch::Approx(1e-5));
    }
    SECTION("complex eigenvalue selection rejected") {
        const Params p4 = Params::checked(4, 1.0, 1.5);
        auto r4 = equilibria(p4, SystemTag::TripleTheta)[1];
        // index 1 and 2 are the complex pair
        CHECK_THROWS_AS(manifold_seed(r4, 1, 1e-5), ComplexEigenvalueSelected);
    }
    SECTION("amplitude precondition enforced") {
        CHECK_THROWS_AS(manifold_seed(rep, 0, 1.0), InvalidParams);
    }
}

TEST_CASE("flow equivalence of the Theta-extended and forced planar systems") {
    const Params prm = Params::checked(3, 1.0, 1.5);
    const double t0 = -2.0, t1 = 1.5;
    std::array<double, 3> y0 = {0.8, 0.6, std::exp((2.0 - prm.q) * t0)};
    auto none = [](double, const std::array<double, 3>&) { return false; };
    PhaseOrbit a = integrate_system(prm, SystemTag::TripleTheta, y0, t0, t1, 1e-11, 1e-13, none);
    PhaseOrbit b = integrate_system(prm, SystemTag::NonAutX, {y0[0], y0[1], 0.0}, t0, t1, 1e-11,
                                    1e-13, none);
    // compare (x, Phi) at the shared endpoint
    REQUIRE(a.s.back() == Catch::Approx(t1));
    REQUIRE(b.s.back() == Catch::Approx(t1));
    CHECK(a.y.back()[0] == Catch::Approx(b.y.back()[0]).margin(1e-8));
    CHECK(a.y.back()[1] == Catch::Approx(b.y.back()[1]).margin(1e-8));
    CHECK(a.y.back()[2] == Catch::Approx(std::exp((2.0 - prm.q) * t1)).margin(1e-10));
}

TEST_CASE("quadratic structure of the sign-flagged system") {
    // every rhs component is a polynomial of total degree <= 2: an exact
    // degree-2 fit on random points has zero residual
    const Params prm = Params::checked(3, 1.3, 2.4);
    std::mt19937 rng(5150);
    std::uniform_real_distribution<double> ur(0.1, 2.0);
    const int npts = 50;
    Eigen::MatrixXd A(npts, 10);
    Eigen::MatrixXd B(npts, 3);
    for (int k = 0; k < npts; ++k) {
        const double Z = ur(rng), V = ur(rng), Phi = ur(rng);  // Phi > 0: s fixed
        std::array<double, 3> dy{};
        eval_system_rhs(prm, SystemTag::LotkaVolterra, {Z, V, Phi}, 0.0, dy, +1);
        A.row(k) << 1.0, Z, V, Phi, Z * Z, V * V, Phi * Phi, Z * V, Z * Phi, V * Phi;
        B.row(k) << dy[0], dy[1], dy[2];
    }
    Eigen::MatrixXd coef = A.colPivHouseholderQr().solve(B);
    const double resid = (A * coef - B).cwiseAbs().maxCoeff();
    CHECK(resid < 1e-12);
}

TEST_CASE("characteristic polynomial identity at the Emden point") {
    std::mt19937 rng(31337);
    std::uniform_real_distribution<double> qs(1.1, 3.5);
    std::uniform_int_distribution<int> Ns(3, 12);
    for (int trial = 0; trial < 10; ++trial) {
        double q = qs(rng);
        if (std::abs(q - 2.0) < 0.05) q = 2.1;
        const Params prm = Params::checked(Ns(rng), 1.0, q);
        const double x0 = 2.0 * (prm.N - 2);
        Eigen::Matrix3d A = system_jacobian(prm, SystemTag::TripleTheta, {x0, 2.0, 0.0});
        // det(A - l I) = (2-q-l)(l^2 + (N-2) l + 2(N-2)): compare coefficients
        const double N2 = prm.N - 2.0;
        const double c2 = (2.0 - q) - N2;
        const double c1 = (2.0 - q) * N2 - 2.0 * N2;
        const double c0 = (2.0 - q) * 2.0 * N2;
        auto det_at = [&](double l) {
            return (A - l * Eigen::Matrix3d::Identity()).determinant();
        };
        const double d0 = det_at(0.0), d1 = det_at(1.0), dm1 = det_at(-1.0), d2 = det_at(2.0);
        const double a0 = d0;
        const double a2 = (d1 + dm1 - 2.0 * d0) / 2.0;
        const double a3 = (d2 - 4.0 * a2 - d0 - d1 + dm1) / 6.0;
        const double a1 = (d1 - dm1) / 2.0 - a3;
        const double scale = 1.0 + std::abs(c0) + std::abs(c1) + std::abs(c2);
        CHECK(a3 == Catch::Approx(-1.0).margin(1e-12 * scale));
        CHECK(a2 == Catch::Approx(c2).margin(1e-12 * scale));
        CHECK(a1 == Catch::Approx(c1).margin(1e-12 * scale));
        CHECK(a0 == Catch::Approx(c0).margin(1e-12 * scale));
    }
}

TEST_CASE("u-parameterized charts") {
    SECTION("appendix chart derivative at the unit-coefficient eikonal state") {
        // at varpi = 1, r = q e^{-u/q}: dvarpi/du = (N-2)/q; vanishes for N=2
        for (int N : {2, 3, 5}) {
            const Params prm = Params::checked(N, 1.0, 3.0);
            const double u = 4.0;
            const double r = prm.q * std::exp(-u / prm.q);
            std::array<double, 3> dy{};
            eval_system_rhs(prm, SystemTag::AppendixVarpi, {1.0, r, 0.0}, u, dy);
            CHECK(dy[0] == Catch::Approx((N - 2.0) / prm.q).margin(1e-13));
        }
    }
    SECTION("z-chart values for a decreasing state") {
        const Params prm = Params::checked(1, 1.0, 3.0);
        // z_u = 2 M z^{q/2} - 2 e^u with z = u'^2
        std::array<double, 3> dy{};
        eval_system_rhs(prm, SystemTag::ZofU, {4.0, 1.0, 0.0}, 0.0, dy);
        CHECK(dy[0] == Catch::Approx(2.0 * 8.0 - 2.0));
        CHECK(dy[1] == Catch::Approx(-0.5));
    }
}
