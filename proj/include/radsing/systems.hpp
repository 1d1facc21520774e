#ifndef RADSING_SYSTEMS_HPP
#define RADSING_SYSTEMS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <complex>
#include <vector>

#include "radsing/ode.hpp"
#include "radsing/params.hpp"
#include "radsing/state.hpp"

namespace radsing {

// ---------------------------------------------------------------------------
// Right-hand sides
// ---------------------------------------------------------------------------

// Evaluates the tagged system at y (padded to 3 entries), with s the
// evolution variable (t = ln r, or u for the two u-parameterized charts).
// `lv_sign_hint` resolves sign(Phi) for LotkaVolterra exactly on Phi = 0.
inline void eval_system_rhs(const Params& prm, SystemTag tag, const std::array<double, 3>& y,
                            double s, std::array<double, 3>& dy, int lv_sign_hint = +1) {
    const double q = prm.q, M = prm.M;
    const int N = prm.N;
    dy = {0.0, 0.0, 0.0};
    switch (tag) {
        case SystemTag::EmdenPlane: {
            const double x = y[0], Phi = y[1];
            dy[0] = x * (2.0 - Phi);
            dy[1] = x + (2.0 - N) * Phi;
            return;
        }
        case SystemTag::NonAutX: {
            const double x = y[0], Phi = y[1];
            dy[0] = x * (2.0 - Phi);
            dy[1] = x + (2.0 - N) * Phi - M * std::exp((2.0 - q) * s) * abs_pow(Phi, q);
            return;
        }
        case SystemTag::NonAutXq: {
            const double X = y[0], Phi = y[1];
            dy[0] = X * (q - Phi);
            dy[1] = (2.0 - N) * Phi + std::exp((2.0 - q) * s) * (X - M * abs_pow(Phi, q));
            return;
        }
        case SystemTag::TripleV: {
            const double x = y[0], Phi = y[1], V = y[2];
            const double sPhi = Phi != 0.0 ? sign(Phi) : lv_sign_hint;
            dy[0] = x * (2.0 - Phi);
            dy[1] = (2.0 - N) * Phi - M * std::abs(Phi) * V + x;
            dy[2] = V * (N - (N - 1) * q - (q - 1.0) * (M * V * sPhi - x / Phi));
            return;
        }
        case SystemTag::TripleXV: {
            const double X = y[0], Phi = y[1], V = y[2];
            const double sPhi = Phi != 0.0 ? sign(Phi) : lv_sign_hint;
            const double gap = M - X / abs_pow(Phi, q);
            dy[0] = X * (q - Phi);
            dy[1] = (2.0 - N) * Phi - V * std::abs(Phi) * gap;
            dy[2] = V * (N - (N - 1) * q - (q - 1.0) * gap * sPhi * V);
            return;
        }
        case SystemTag::TripleTheta: {
            const double x = y[0], Phi = y[1], Theta = y[2];
            dy[0] = x * (2.0 - Phi);
            dy[1] = x + (2.0 - N) * Phi - M * abs_pow(Phi, q) * Theta;
            dy[2] = (2.0 - q) * Theta;
            return;
        }
        case SystemTag::LotkaVolterra: {
            const double Z = y[0], V = y[1], Phi = y[2];
            const double sgn = Phi != 0.0 ? sign(Phi) : lv_sign_hint;
            dy[0] = Z * (N - Phi + sgn * M * V - Z);
            dy[1] = V * (N - (N - 1) * q + (q - 1.0) * (Z - sgn * M * V));
            dy[2] = Phi * (2.0 - N + Z - sgn * M * V);
            return;
        }
        case SystemTag::HJ: {
            const double xi = y[0], eta = y[1];
            const double beta = (2.0 - q) / (q - 1.0);
            const double kappa = ((N - 1) * q - N) / (q - 1.0);
            const double arg = q * s / (q - 1.0) - std::exp(-beta * s) * xi;
            const double forcing = arg < -745.0 ? 0.0 : std::exp(arg);
            dy[0] = beta * xi - eta;
            dy[1] = -kappa * eta + M * abs_pow(eta, q) - forcing;
            return;
        }
        case SystemTag::OneD: {
            const double u = y[0], v = y[1];
            dy[0] = -v;
            dy[1] = std::exp(u) - M * abs_pow(v, q);
            return;
        }
        case SystemTag::ZofU: {
            const double z = y[0];
            dy[0] = 2.0 * M * std::pow(z, q / 2.0) - 2.0 * std::exp(s);
            dy[1] = -1.0 / std::sqrt(z);
            return;
        }
        case SystemTag::AppendixVarpi: {
            // M = 1 normalization of the appendix chart
            const double w = y[0], r = y[1];
            const double theta = (q - 2.0) / q;
            dy[0] = -w / q + (N - 1) / (r * std::exp(s / q)) +
                    (std::pow(w, q) - 1.0) / w * std::exp(theta * s);
            dy[1] = -std::exp(-s / q) / w;
            return;
        }
    }
    throw UnsupportedTag("unknown system tag");
}

// Typed wrapper: tangent vector in the same coordinates as `point`.
inline PhasePoint rhs(const Params& prm, SystemTag tag, const PhasePoint& point, double s = 0.0,
                      int lv_sign_hint = +1) {
    if (!tag_matches(tag, point))
        throw WrongTag("phase point variant does not match system tag " + to_string(tag));
    std::array<double, 3> dy{};
    eval_system_rhs(prm, tag, to_array(point), s, dy, lv_sign_hint);
    return from_array(tag, dy);
}

// ---------------------------------------------------------------------------
// Equilibria, linearization, eigen-structure
// ---------------------------------------------------------------------------

enum class Stability { Sink, Source, Saddle, NonHyperbolic };

inline std::string to_string(Stability s) {
    switch (s) {
        case Stability::Sink: return "Sink";
        case Stability::Source: return "Source";
        case Stability::Saddle: return "Saddle";
        case Stability::NonHyperbolic: return "NonHyperbolic";
    }
    return "?";
}

struct EquilibriumReport {
    SystemTag tag = SystemTag::EmdenPlane;
    bool frozen_limit = false;  // non-autonomous tag analyzed with forcing frozen at 0
    int lv_sign = +1;           // sign flag used for LotkaVolterra / TripleV / TripleXV
    int dim = 2;
    std::array<double, 3> location{};
    double rhs_residual = 0.0;  // |f| at the reported location, audited not assumed
    Eigen::Matrix3d jacobian = Eigen::Matrix3d::Zero();
    std::array<std::complex<double>, 3> eigenvalues{};
    std::array<Eigen::Vector3cd, 3> eigenvectors{};
    Stability classification = Stability::NonHyperbolic;
};

// Analytic Jacobian of the (frozen, for non-autonomous tags) system.
inline Eigen::Matrix3d system_jacobian(const Params& prm, SystemTag tag,
                                       const std::array<double, 3>& y, int lv_sign_hint = +1) {
    const double q = prm.q, M = prm.M;
    const int N = prm.N;
    Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
    switch (tag) {
        case SystemTag::EmdenPlane:
        case SystemTag::NonAutX: {  // frozen limit of NonAutX is the Emden plane
            const double x = y[0], Phi = y[1];
            J(0, 0) = 2.0 - Phi;
            J(0, 1) = -x;
            J(1, 0) = 1.0;
            J(1, 1) = 2.0 - N;
            return J;
        }
        case SystemTag::NonAutXq: {  // frozen limit
            const double X = y[0], Phi = y[1];
            J(0, 0) = q - Phi;
            J(0, 1) = -X;
            J(1, 1) = 2.0 - N;
            return J;
        }
        case SystemTag::TripleTheta: {
            const double x = y[0], Phi = y[1], Theta = y[2];
            const double sPhi = Phi != 0.0 ? sign(Phi) : 1.0;
            J(0, 0) = 2.0 - Phi;
            J(0, 1) = -x;
            J(1, 0) = 1.0;
            J(1, 1) = (2.0 - N) - M * q * abs_pow(Phi, q - 1.0) * sPhi * Theta;
            J(1, 2) = -M * abs_pow(Phi, q);
            J(2, 2) = 2.0 - q;
            return J;
        }
        case SystemTag::TripleV: {
            const double x = y[0], Phi = y[1], V = y[2];
            const double sPhi = Phi != 0.0 ? sign(Phi) : lv_sign_hint;
            J(0, 0) = 2.0 - Phi;
            J(0, 1) = -x;
            J(1, 0) = 1.0;
            J(1, 1) = (2.0 - N) - M * V * sPhi;
            J(1, 2) = -M * std::abs(Phi);
            J(2, 0) = V * (q - 1.0) / Phi;
            J(2, 1) = -V * (q - 1.0) * x / (Phi * Phi);
            J(2, 2) = N - (N - 1) * q - (q - 1.0) * (2.0 * M * V * sPhi - x / Phi);
            return J;
        }
        case SystemTag::TripleXV: {
            const double X = y[0], Phi = y[1], V = y[2];
            const double sPhi = Phi != 0.0 ? sign(Phi) : lv_sign_hint;
            const double apq = abs_pow(Phi, q);
            J(0, 0) = q - Phi;
            J(0, 1) = -X;
            J(1, 0) = V * abs_pow(Phi, 1.0 - q);
            J(1, 1) = (2.0 - N) - M * V * sPhi + V * X * (1.0 - q) * sPhi / apq;
            J(1, 2) = -M * std::abs(Phi) + X * abs_pow(Phi, 1.0 - q);
            J(2, 0) = (q - 1.0) * sPhi * V * V / apq;
            J(2, 1) = -q * (q - 1.0) * V * V * X / (apq * std::abs(Phi));
            J(2, 2) = N - (N - 1) * q - 2.0 * (q - 1.0) * (M - X / apq) * sPhi * V;
            return J;
        }
        case SystemTag::LotkaVolterra: {
            const double Z = y[0], V = y[1], Phi = y[2];
            const double sgn = Phi != 0.0 ? sign(Phi) : lv_sign_hint;
            J(0, 0) = N - Phi + sgn * M * V - 2.0 * Z;
            J(0, 1) = sgn * M * Z;
            J(0, 2) = -Z;
            J(1, 0) = (q - 1.0) * V;
            J(1, 1) = N - (N - 1) * q + (q - 1.0) * (Z - 2.0 * sgn * M * V);
            J(2, 0) = Phi;
            J(2, 1) = -sgn * M * Phi;
            J(2, 2) = 2.0 - N + Z - sgn * M * V;
            return J;
        }
        case SystemTag::HJ: {  // frozen limit: forcing term removed
            const double eta = y[1];
            const double beta = (2.0 - q) / (q - 1.0);
            const double kappa = ((N - 1) * q - N) / (q - 1.0);
            J(0, 0) = beta;
            J(0, 1) = -1.0;
            J(1, 1) = -kappa + M * q * abs_pow(eta, q - 1.0) * sign(eta);
            return J;
        }
        case SystemTag::OneD: {
            const double u = y[0], v = y[1];
            J(0, 1) = -1.0;
            J(1, 0) = std::exp(u);
            J(1, 1) = -M * q * abs_pow(v, q - 1.0) * sign(v);
            return J;
        }
        default:
            throw UnsupportedTag("no analytic Jacobian for tag " + to_string(tag));
    }
}

namespace detail {

inline double frozen_rhs_norm(const Params& prm, SystemTag tag, const std::array<double, 3>& y,
                              int lv_sign) {
    std::array<double, 3> dy{};
    switch (tag) {
        case SystemTag::NonAutX:
            eval_system_rhs(prm, SystemTag::EmdenPlane, y, 0.0, dy);
            break;
        case SystemTag::NonAutXq: {
            dy[0] = y[0] * (prm.q - y[1]);
            dy[1] = (2.0 - prm.N) * y[1];
            break;
        }
        case SystemTag::HJ: {
            const double beta = (2.0 - prm.q) / (prm.q - 1.0);
            const double kappa = ((prm.N - 1) * prm.q - prm.N) / (prm.q - 1.0);
            dy[0] = beta * y[0] - y[1];
            dy[1] = -kappa * y[1] + prm.M * abs_pow(y[1], prm.q);
            break;
        }
        default:
            eval_system_rhs(prm, tag, y, 0.0, dy, lv_sign);
    }
    return std::sqrt(dy[0] * dy[0] + dy[1] * dy[1] + dy[2] * dy[2]);
}

inline EquilibriumReport make_report(const Params& prm, SystemTag tag,
                                     const std::array<double, 3>& loc, int lv_sign) {
    EquilibriumReport rep;
    rep.tag = tag;
    rep.frozen_limit = !autonomous(tag);
    rep.lv_sign = lv_sign;
    rep.dim = dimension(tag);
    rep.location = loc;
    rep.rhs_residual = frozen_rhs_norm(prm, tag, loc, lv_sign);
    rep.jacobian = system_jacobian(prm, tag, loc, lv_sign);

    const int n = rep.dim;
    Eigen::MatrixXd A = rep.jacobian.topLeftCorner(n, n);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(A);

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    auto lam = [&](int i) { return solver.eigenvalues()(i); };
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (lam(a).real() != lam(b).real()) return lam(a).real() > lam(b).real();
        return lam(a).imag() > lam(b).imag();
    });

    double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    bool any_zero = false, all_neg = true, all_pos = true;
    for (int i = 0; i < n; ++i) {
        const auto l = lam(order[i]);
        rep.eigenvalues[i] = l;
        Eigen::Vector3cd v = Eigen::Vector3cd::Zero();
        v.head(n) = solver.eigenvectors().col(order[i]);
        v /= v.norm();
        // fix the complex phase: largest component real, nonnegative
        int imax = 0;
        for (int k = 1; k < n; ++k)
            if (std::abs(v(k)) > std::abs(v(imax))) imax = k;
        if (std::abs(v(imax)) > 0) v *= std::conj(v(imax)) / std::abs(v(imax));
        rep.eigenvectors[i] = v;
        if (std::abs(l.real()) <= 1e-9 * scale) any_zero = true;
        all_neg = all_neg && l.real() < 0;
        all_pos = all_pos && l.real() > 0;
    }
    rep.classification = any_zero ? Stability::NonHyperbolic
                         : all_neg ? Stability::Sink
                         : all_pos ? Stability::Source
                                   : Stability::Saddle;
    return rep;
}

}  // namespace detail

// Fixed points of the autonomous systems, or of the frozen limit (forcing
// term at its t -> -/+inf value 0) for the non-autonomous ones.  The reported
// residual is evaluated, not assumed.  `lv_sign` selects the half-space
// extension for the sign-flagged systems.
inline std::vector<EquilibriumReport> equilibria(const Params& prm, SystemTag tag,
                                                 int lv_sign = +1) {
    const int N = prm.N;
    const double q = prm.q, M = prm.M;
    std::vector<EquilibriumReport> out;
    auto add = [&](std::array<double, 3> loc) {
        out.push_back(detail::make_report(prm, tag, loc, lv_sign));
    };
    switch (tag) {
        case SystemTag::EmdenPlane:
        case SystemTag::NonAutX:
            add({0.0, 0.0, 0.0});
            if (N > 2) add({2.0 * (N - 2), 2.0, 0.0});
            break;
        case SystemTag::NonAutXq:
            add({0.0, 0.0, 0.0});
            break;
        case SystemTag::TripleTheta:
            add({0.0, 0.0, 0.0});
            if (N >= 2) add({2.0 * (N - 2), 2.0, 0.0});
            break;
        case SystemTag::TripleV:
            if (N > 2) add({2.0 * (N - 2), 2.0, 0.0});
            break;
        case SystemTag::LotkaVolterra: {
            add({0.0, 0.0, 0.0});
            add({static_cast<double>(N), 0.0, 0.0});
            if (N >= 2) add({static_cast<double>(N - 2), 0.0, 2.0});
            const double kappa = ((N - 1) * q - N) / (q - 1.0);
            const double V0 = -lv_sign * kappa / M;
            if (V0 > 0.0) add({0.0, V0, 0.0});
            break;
        }
        case SystemTag::HJ: {
            const DerivedConstants c = derive_constants(prm);
            if (c.xi_M) add({*c.xi_M, c.beta * *c.xi_M, 0.0});
            break;
        }
        case SystemTag::TripleXV:
        case SystemTag::OneD:
            break;  // no isolated fixed points
        default:
            throw UnsupportedTag("equilibria not defined for tag " + to_string(tag));
    }
    return out;
}

// Linearization at a point that must already be a fixed point of the
// (frozen) system to 1e-10.
inline EquilibriumReport linearize(const Params& prm, SystemTag tag, const PhasePoint& at,
                                   int lv_sign = +1) {
    if (!tag_matches(tag, at))
        throw WrongTag("phase point variant does not match system tag " + to_string(tag));
    const auto y = to_array(at);
    const double res = detail::frozen_rhs_norm(prm, tag, y, lv_sign);
    double scale = 0.0;
    for (double v : y) scale = std::max(scale, std::abs(v));
    if (res > 1e-10 * std::max(1.0, scale))
        throw NotAFixedPoint("rhs norm " + std::to_string(res) + " exceeds 1e-10 at the point");
    return detail::make_report(prm, tag, y, lv_sign);
}

// Eigenvector-seeded initial condition near a fixed point: location +
// amplitude * sgn * (unit real eigenvector).  For TripleTheta the
// eigenvector is oriented so that its Theta component is nonnegative, which
// keeps the seed on the admissible side Theta > 0.
inline PhasePoint manifold_seed(const EquilibriumReport& report, int eigen_index,
                                double amplitude, int sgn = +1) {
    if (eigen_index < 0 || eigen_index >= report.dim)
        throw InvalidParams("eigen index out of range");
    if (!(amplitude >= 0.0)) throw InvalidParams("amplitude must be nonnegative");
    double loc_norm = 0.0;
    for (double v : report.location) loc_norm += v * v;
    loc_norm = std::sqrt(loc_norm);
    if (amplitude > 1e-4 * (1.0 + loc_norm))
        throw InvalidParams("amplitude exceeds 1e-4 * (1 + |location|)");

    const auto lambda = report.eigenvalues[eigen_index];
    if (std::abs(lambda.imag()) > 1e-10 * (1.0 + std::abs(lambda)))
        throw ComplexEigenvalueSelected("eigenvalue " + std::to_string(lambda.real()) + " + " +
                                        std::to_string(lambda.imag()) + "i is not real");

    Eigen::Vector3cd vc = report.eigenvectors[eigen_index];
    Eigen::Vector3d v = vc.real();
    v /= v.norm();
    if (report.tag == SystemTag::TripleTheta && std::abs(v(2)) > 0 && v(2) < 0) v = -v;

    std::array<double, 3> y = report.location;
    for (int i = 0; i < report.dim; ++i) y[i] += amplitude * sgn * v(i);
    return from_array(report.tag, y);
}

// Generic driver for integrating one tagged system (used by the
// constructors and the flow-equivalence tests).
struct PhaseOrbit {
    std::vector<double> s;                    // evolution variable
    std::vector<std::array<double, 3>> y;     // padded states
};

template <class StopFn>
PhaseOrbit integrate_system(const Params& prm, SystemTag tag, const std::array<double, 3>& y0,
                            double s0, double s1, double rel_tol, double abs_tol,
                            StopFn&& stop, int lv_sign_hint = +1, double max_step = 0.0) {
    PhaseOrbit orbit;
    orbit.s.push_back(s0);
    orbit.y.push_back(y0);
    if (dimension(tag) == 3) {
        std::array<double, 3> z0 = y0;
        auto f = [&](double s, const std::array<double, 3>& y, std::array<double, 3>& dy) {
            eval_system_rhs(prm, tag, y, s, dy, lv_sign_hint);
        };
        dp5_integrate<3>(f, s0, z0, s1, rel_tol, abs_tol, 2000000, max_step,
                         [&](const DenseStep<3>& d, const std::array<double, 3>& y,
                             const std::array<double, 3>&) {
                             orbit.s.push_back(d.s1);
                             orbit.y.push_back(y);
                             return !stop(d.s1, y);
                         });
    } else {
        std::array<double, 2> z0 = {y0[0], y0[1]};
        auto f = [&](double s, const std::array<double, 2>& y, std::array<double, 2>& dy) {
            std::array<double, 3> yy = {y[0], y[1], 0.0}, dd{};
            eval_system_rhs(prm, tag, yy, s, dd, lv_sign_hint);
            dy = {dd[0], dd[1]};
        };
        dp5_integrate<2>(f, s0, z0, s1, rel_tol, abs_tol, 2000000, max_step,
                         [&](const DenseStep<2>& d, const std::array<double, 2>& y,
                             const std::array<double, 2>&) {
                             orbit.s.push_back(d.s1);
                             orbit.y.push_back({y[0], y[1], 0.0});
                             return !stop(d.s1, {y[0], y[1], 0.0});
                         });
    }
    return orbit;
}

}  // namespace radsing

#endif
