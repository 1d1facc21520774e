#ifndef RADSING_PARAMS_HPP
#define RADSING_PARAMS_HPP

#include <cmath>
#include <optional>

#include "radsing/errors.hpp"

namespace radsing {

// Parameter triple of the radial equation
//
//     -u'' - (N-1)/r u' + M|u'|^q = e^u,   r > 0.
//
// The borderline exponent q = 2 is rejected outright: the equation then
// rescales onto itself and none of the constructions below apply.
struct Params {
    int N = 3;
    double M = 1.0;
    double q = 3.0;

    static Params checked(int N, double M, double q) {
        if (N < 1) throw InvalidParams("N must be a positive integer");
        if (!(M > 0.0) || !std::isfinite(M)) throw InvalidParams("M must be positive and finite");
        if (!(q > 1.0) || !std::isfinite(q)) throw InvalidParams("q must be finite and > 1");
        if (q == 2.0) throw InvalidParams("q = 2 is not supported: the equation becomes scale-invariant and falls outside this library");
        return Params{N, M, q};
    }
};

// Closed-form constants derived from (N, M, q).  Constants whose defining
// window excludes the given parameters are absent, never NaN.
struct DerivedConstants {
    std::optional<double> q_c;    // N/(N-1), critical gradient exponent (N >= 2)
    double beta = 0.0;            // (2-q)/(q-1), > 0 iff q < 2
    std::optional<double> theta;  // (q-2)/q, expansion decay exponent (q > 2)
    double kappa = 0.0;           // ((N-1)q - N)/(q-1), > 0 iff q > q_c
    std::optional<double> xi_M;   // power-type singularity amplitude (q_c < q < 2)
    double Lambda = 0.0;          // ln(M q^q)
    double emden_x = 0.0;         // 2(N-2)
    double emden_phi = 2.0;
};

inline DerivedConstants derive_constants(const Params& prm) {
    if (prm.q == 2.0) throw InvalidParams("q = 2 is not supported");
    const double q = prm.q;
    const int N = prm.N;

    DerivedConstants c;
    c.beta = (2.0 - q) / (q - 1.0);
    c.kappa = ((N - 1) * q - N) / (q - 1.0);
    c.Lambda = std::log(prm.M) + q * std::log(q);
    c.emden_x = 2.0 * (N - 2);
    c.emden_phi = 2.0;
    if (N >= 2) c.q_c = static_cast<double>(N) / (N - 1);
    if (q > 2.0) c.theta = (q - 2.0) / q;
    if (N >= 2 && q < 2.0 && q > *c.q_c) {
        const double base = ((N - 1) * q - N) / (prm.M * (q - 1.0));
        c.xi_M = (q - 1.0) / (2.0 - q) * std::pow(base, 1.0 / (q - 1.0));
    }
    return c;
}

// |p|^q with the removable singularity at p = 0 handled explicitly.
inline double abs_pow(double p, double q) {
    return p == 0.0 ? 0.0 : std::pow(std::abs(p), q);
}

inline double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace radsing

#endif
