#ifndef RADSING_STATE_HPP
#define RADSING_STATE_HPP

#include <array>
#include <cmath>
#include <string>
#include <type_traits>
#include <variant>

#include "radsing/params.hpp"

namespace radsing {

// One sample of a radial trajectory: u(r) and p = u'(r).
struct RadialState {
    double r = 1.0;
    double u = 0.0;
    double p = 0.0;
};

// The exact eikonal solution U_eik(r) = ln(M q^q / r^q).  For N = 2 it solves
// the full radial equation; for N > 2 it is a supersolution.
inline RadialState eikonal_profile(const Params& prm, double r) {
    if (!(r > 0.0)) throw InvalidParams("eikonal_profile requires r > 0");
    const DerivedConstants c = derive_constants(prm);
    return RadialState{r, c.Lambda - prm.q * std::log(r), -prm.q / r};
}

// Coordinate systems attached to the radial flow.  Tags fix the state
// dimension and whether the right-hand side depends on the evolution
// variable (t = ln r for all tags except ZofU and AppendixVarpi, which
// evolve in u).
enum class SystemTag {
    EmdenPlane,     // (x, Phi), autonomous limit system of the pure source term
    NonAutX,        // (x, Phi), full equation, exponential forcing in t
    NonAutXq,       // (X, Phi), full equation, exponential forcing in t
    TripleV,        // (x, Phi, V), autonomous
    TripleXV,       // (X, Phi, V), autonomous
    TripleTheta,    // (x, Phi, Theta), autonomous
    LotkaVolterra,  // (Z, V, Phi), autonomous quadratic, sign flag s = sign(Phi)
    HJ,             // (xi, eta), gradient-dominated scaling, forcing in t
    OneD,           // (u, v), N = 1 phase plane, evolves in r
    ZofU,           // (z, r) as functions of u
    AppendixVarpi,  // (varpi, r) as functions of u, M = 1 normalization
};

inline std::string to_string(SystemTag tag) {
    switch (tag) {
        case SystemTag::EmdenPlane: return "emden-plane";
        case SystemTag::NonAutX: return "non-aut-x";
        case SystemTag::NonAutXq: return "non-aut-xq";
        case SystemTag::TripleV: return "triple-v";
        case SystemTag::TripleXV: return "triple-xv";
        case SystemTag::TripleTheta: return "triple-theta";
        case SystemTag::LotkaVolterra: return "lotka-volterra";
        case SystemTag::HJ: return "hj";
        case SystemTag::OneD: return "one-d";
        case SystemTag::ZofU: return "z-of-u";
        case SystemTag::AppendixVarpi: return "appendix-varpi";
    }
    return "?";
}

inline int dimension(SystemTag tag) {
    switch (tag) {
        case SystemTag::TripleV:
        case SystemTag::TripleXV:
        case SystemTag::TripleTheta:
        case SystemTag::LotkaVolterra: return 3;
        default: return 2;
    }
}

inline bool autonomous(SystemTag tag) {
    switch (tag) {
        case SystemTag::NonAutX:
        case SystemTag::NonAutXq:
        case SystemTag::HJ:
        case SystemTag::ZofU:
        case SystemTag::AppendixVarpi: return false;
        default: return true;
    }
}

// Phase coordinates.  With t = ln r:
//   x = r^2 e^u,  X = r^q e^u,  Phi = -r u',  V = r|u'|^{q-1},
//   Z = -r e^u / u',  Theta = r^{2-q}.
struct EmdenPoint { double x, Phi; };
struct EikonalPoint { double X, Phi; };
struct TripleVPoint { double x, Phi, V; };
struct TripleXVPoint { double X, Phi, V; };
struct TripleThetaPoint { double x, Phi, Theta; };
struct LotkaVolterraPoint { double Z, V, Phi; };
struct HJPoint { double xi, eta; };   // u = -xi r^{-beta}, u' = eta r^{-beta-1}
struct OneDPoint { double u, v; };    // v = -u'
struct ZOfUPoint { double z, r; };    // z = u'^2, parameterized by u
struct VarpiPoint { double varpi, r; };  // varpi = |u'| e^{-u/q}, by u

using PhasePoint = std::variant<EmdenPoint, EikonalPoint, TripleVPoint, TripleXVPoint,
                                TripleThetaPoint, LotkaVolterraPoint, HJPoint, OneDPoint,
                                ZOfUPoint, VarpiPoint>;

inline SystemTag tag_of(const PhasePoint& point) {
    switch (point.index()) {
        case 0: return SystemTag::EmdenPlane;
        case 1: return SystemTag::NonAutXq;
        case 2: return SystemTag::TripleV;
        case 3: return SystemTag::TripleXV;
        case 4: return SystemTag::TripleTheta;
        case 5: return SystemTag::LotkaVolterra;
        case 6: return SystemTag::HJ;
        case 7: return SystemTag::OneD;
        case 8: return SystemTag::ZofU;
        default: return SystemTag::AppendixVarpi;
    }
}

// EmdenPoint coordinates serve both the autonomous Emden plane and the
// non-autonomous x-system; EikonalPoint serves the X-system.
inline bool tag_matches(SystemTag tag, const PhasePoint& point) {
    switch (tag) {
        case SystemTag::EmdenPlane:
        case SystemTag::NonAutX: return std::holds_alternative<EmdenPoint>(point);
        case SystemTag::NonAutXq: return std::holds_alternative<EikonalPoint>(point);
        case SystemTag::TripleV: return std::holds_alternative<TripleVPoint>(point);
        case SystemTag::TripleXV: return std::holds_alternative<TripleXVPoint>(point);
        case SystemTag::TripleTheta: return std::holds_alternative<TripleThetaPoint>(point);
        case SystemTag::LotkaVolterra: return std::holds_alternative<LotkaVolterraPoint>(point);
        case SystemTag::HJ: return std::holds_alternative<HJPoint>(point);
        case SystemTag::OneD: return std::holds_alternative<OneDPoint>(point);
        case SystemTag::ZofU: return std::holds_alternative<ZOfUPoint>(point);
        case SystemTag::AppendixVarpi: return std::holds_alternative<VarpiPoint>(point);
    }
    return false;
}

inline std::array<double, 3> to_array(const PhasePoint& point) {
    return std::visit(
        [](const auto& p) -> std::array<double, 3> {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, EmdenPoint>) return {p.x, p.Phi, 0.0};
            else if constexpr (std::is_same_v<T, EikonalPoint>) return {p.X, p.Phi, 0.0};
            else if constexpr (std::is_same_v<T, TripleVPoint>) return {p.x, p.Phi, p.V};
            else if constexpr (std::is_same_v<T, TripleXVPoint>) return {p.X, p.Phi, p.V};
            else if constexpr (std::is_same_v<T, TripleThetaPoint>) return {p.x, p.Phi, p.Theta};
            else if constexpr (std::is_same_v<T, LotkaVolterraPoint>) return {p.Z, p.V, p.Phi};
            else if constexpr (std::is_same_v<T, HJPoint>) return {p.xi, p.eta, 0.0};
            else if constexpr (std::is_same_v<T, OneDPoint>) return {p.u, p.v, 0.0};
            else if constexpr (std::is_same_v<T, ZOfUPoint>) return {p.z, p.r, 0.0};
            else return {p.varpi, p.r, 0.0};
        },
        point);
}

inline PhasePoint from_array(SystemTag tag, const std::array<double, 3>& y) {
    switch (tag) {
        case SystemTag::EmdenPlane:
        case SystemTag::NonAutX: return EmdenPoint{y[0], y[1]};
        case SystemTag::NonAutXq: return EikonalPoint{y[0], y[1]};
        case SystemTag::TripleV: return TripleVPoint{y[0], y[1], y[2]};
        case SystemTag::TripleXV: return TripleXVPoint{y[0], y[1], y[2]};
        case SystemTag::TripleTheta: return TripleThetaPoint{y[0], y[1], y[2]};
        case SystemTag::LotkaVolterra: return LotkaVolterraPoint{y[0], y[1], y[2]};
        case SystemTag::HJ: return HJPoint{y[0], y[1]};
        case SystemTag::OneD: return OneDPoint{y[0], y[1]};
        case SystemTag::ZofU: return ZOfUPoint{y[0], y[1]};
        case SystemTag::AppendixVarpi: return VarpiPoint{y[0], y[1]};
    }
    throw UnsupportedTag("unknown system tag");
}

namespace detail {
inline void require_radial(const RadialState& s) {
    if (!(s.r > 0.0) || !std::isfinite(s.r) || !std::isfinite(s.u) || !std::isfinite(s.p))
        throw InvalidParams("radial state must be finite with r > 0");
}
}  // namespace detail

// Exact algebraic image of a radial state in the chosen coordinates.
// Transforms that divide by u' reject critical points.
inline PhasePoint to_phase(const Params& prm, const RadialState& s, SystemTag tag) {
    detail::require_radial(s);
    const double r = s.r, q = prm.q;
    const double x = r * r * std::exp(s.u);
    const double X = std::pow(r, q) * std::exp(s.u);
    const double Phi = -r * s.p;
    const double V = r * abs_pow(s.p, q - 1.0);
    switch (tag) {
        case SystemTag::EmdenPlane:
        case SystemTag::NonAutX: return EmdenPoint{x, Phi};
        case SystemTag::NonAutXq: return EikonalPoint{X, Phi};
        case SystemTag::TripleV: return TripleVPoint{x, Phi, V};
        case SystemTag::TripleXV: return TripleXVPoint{X, Phi, V};
        case SystemTag::TripleTheta: return TripleThetaPoint{x, Phi, std::pow(r, 2.0 - q)};
        case SystemTag::LotkaVolterra:
            if (s.p == 0.0) throw CriticalPoint("Z = -r e^u / u' is undefined at u' = 0");
            return LotkaVolterraPoint{-r * std::exp(s.u) / s.p, V, Phi};
        case SystemTag::HJ: {
            const double beta = (2.0 - q) / (q - 1.0);
            return HJPoint{-s.u * std::pow(r, beta), s.p * std::pow(r, beta + 1.0)};
        }
        case SystemTag::OneD: return OneDPoint{s.u, -s.p};
        case SystemTag::ZofU:
            if (s.p == 0.0) throw CriticalPoint("the (z, r) chart degenerates at u' = 0");
            return ZOfUPoint{s.p * s.p, r};
        case SystemTag::AppendixVarpi:
            if (s.p == 0.0) throw CriticalPoint("varpi is undefined at u' = 0");
            return VarpiPoint{std::abs(s.p) * std::exp(-s.u / q), r};
    }
    throw UnsupportedTag("unknown system tag");
}

// Inverse of to_phase.  The second argument is the evolution variable of the
// tag: t = ln r for the radius-parameterized charts (so r = e^t), and u for
// ZofU / AppendixVarpi whose points carry r themselves.  Decreasing u' is
// assumed where only |u'| is stored.
inline RadialState from_phase(const Params& prm, const PhasePoint& point, double t) {
    const double q = prm.q;
    return std::visit(
        [&](const auto& p) -> RadialState {
            using T = std::decay_t<decltype(p)>;
            const double r = std::exp(t);
            if constexpr (std::is_same_v<T, EmdenPoint>)
                return RadialState{r, std::log(p.x) - 2.0 * t, -p.Phi / r};
            else if constexpr (std::is_same_v<T, EikonalPoint>)
                return RadialState{r, std::log(p.X) - q * t, -p.Phi / r};
            else if constexpr (std::is_same_v<T, TripleVPoint>)
                return RadialState{r, std::log(p.x) - 2.0 * t, -p.Phi / r};
            else if constexpr (std::is_same_v<T, TripleXVPoint>)
                return RadialState{r, std::log(p.X) - q * t, -p.Phi / r};
            else if constexpr (std::is_same_v<T, TripleThetaPoint>)
                return RadialState{r, std::log(p.x) - 2.0 * t, -p.Phi / r};
            else if constexpr (std::is_same_v<T, LotkaVolterraPoint>)
                return RadialState{r, std::log(p.Z * p.Phi) - 2.0 * t, -p.Phi / r};
            else if constexpr (std::is_same_v<T, HJPoint>) {
                const double beta = (2.0 - q) / (q - 1.0);
                return RadialState{r, -p.xi * std::pow(r, -beta), p.eta * std::pow(r, -beta - 1.0)};
            } else if constexpr (std::is_same_v<T, OneDPoint>)
                return RadialState{r, p.u, -p.v};
            else if constexpr (std::is_same_v<T, ZOfUPoint>)
                return RadialState{p.r, t, -std::sqrt(p.z)};
            else
                return RadialState{p.r, t, -p.varpi * std::exp(t / q)};
        },
        point);
}

}  // namespace radsing

#endif
