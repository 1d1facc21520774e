#ifndef RADSING_ASYMPTOTICS_HPP
#define RADSING_ASYMPTOTICS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "radsing/ode.hpp"
#include "radsing/params.hpp"

namespace radsing {

enum class Regime {
    Regular,
    EmdenSingular,
    EikonalSingular,
    HJStrong,
    HJLog,
    HJPower,
    GradientOnly,
    OneDLinear,
    ExteriorEikonal,
    ExteriorEmden,
    Undetermined,
};

inline std::string to_string(Regime r) {
    switch (r) {
        case Regime::Regular: return "Regular";
        case Regime::EmdenSingular: return "EmdenSingular";
        case Regime::EikonalSingular: return "EikonalSingular";
        case Regime::HJStrong: return "HJStrong";
        case Regime::HJLog: return "HJLog";
        case Regime::HJPower: return "HJPower";
        case Regime::GradientOnly: return "GradientOnly";
        case Regime::OneDLinear: return "OneDLinear";
        case Regime::ExteriorEikonal: return "ExteriorEikonal";
        case Regime::ExteriorEmden: return "ExteriorEmden";
        case Regime::Undetermined: return "Undetermined";
    }
    return "?";
}

struct Classification {
    Regime regime = Regime::Undetermined;
    double constant = std::numeric_limits<double>::quiet_NaN();   // fitted limit value
    double constant2 = std::numeric_limits<double>::quiet_NaN();  // second datum where defined
    double residual = std::numeric_limits<double>::infinity();    // |log-log slope| of the fit
    double window_lo = 0.0, window_hi = 0.0;
};

namespace detail {

struct IndicatorFit {
    double slope = std::numeric_limits<double>::infinity();
    double mean = std::numeric_limits<double>::quiet_NaN();
    bool valid = false;
};

// Least-squares slope of ln|I| against ln r plus the plain mean of I.
template <class F>
IndicatorFit fit_indicator(const std::vector<double>& r, std::size_t lo, std::size_t hi,
                           F&& indicator) {
    IndicatorFit out;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, sm = 0;
    std::size_t n = 0;
    for (std::size_t i = lo; i <= hi; ++i) {
        const double I = indicator(i);
        if (!std::isfinite(I) || std::abs(I) < 1e-300) return out;
        const double x = std::log(r[i]), y = std::log(std::abs(I));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        sm += I;
        ++n;
    }
    if (n < 4) return out;
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return out;
    out.slope = (n * sxy - sx * sy) / den;
    out.mean = sm / n;
    out.valid = true;
    return out;
}

}  // namespace detail

// Classifies the behavior of a profile at the origin by testing, over the
// inner two decades, which scaling indicator is flat in log-log.  A regime
// is claimed only when its parameter window admits it and the indicator's
// log-slope is below the flatness threshold; otherwise Undetermined.
inline Classification classify_origin(const Profile& prof, const Params& prm,
                                      double flatness = 0.02) {
    if (prof.size() < 8 || !(prof.r_min() <= 1e-3))
        throw WindowTooShort("profile must reach r <= 1e-3 with enough samples");

    const double r_lo = prof.r_min();
    const double r_hi = std::min(100.0 * r_lo, prof.r_max());
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 0; i < prof.size(); ++i) {
        if (prof.r[i] <= r_hi) hi = i;
    }
    if (hi - lo + 1 < 8) throw WindowTooShort("fewer than 8 samples in the inner window");

    const DerivedConstants dc = derive_constants(prm);
    const double q = prm.q;
    const int N = prm.N;

    Classification best;
    best.window_lo = r_lo;
    best.window_hi = prof.r[hi];
    auto consider = [&](Regime reg, const detail::IndicatorFit& fit, bool window_ok,
                        bool sign_ok) {
        if (!window_ok || !fit.valid || !sign_ok) return;
        if (std::abs(fit.slope) < flatness && std::abs(fit.slope) < best.residual) {
            best.regime = reg;
            best.constant = fit.mean;
            best.residual = std::abs(fit.slope);
        }
    };

    auto ind_x = detail::fit_indicator(prof.r, lo, hi, [&](std::size_t i) {
        return prof.r[i] * prof.r[i] * std::exp(prof.u[i]);
    });
    consider(Regime::EmdenSingular, ind_x, N >= 3 && q > 1.0 && q < 2.0, ind_x.mean > 0);

    auto ind_X = detail::fit_indicator(prof.r, lo, hi, [&](std::size_t i) {
        return std::pow(prof.r[i], q) * std::exp(prof.u[i]);
    });
    consider(Regime::EikonalSingular, ind_X, q > 2.0, ind_X.mean > 0);

    const bool at_qc = dc.q_c && std::abs(q - *dc.q_c) < 1e-12;
    auto ind_hjs = detail::fit_indicator(prof.r, lo, hi, [&](std::size_t i) {
        return std::pow(prof.r[i], N - 2.0) * prof.u[i];
    });
    consider(Regime::HJStrong, ind_hjs, N >= 3 && dc.q_c && q < *dc.q_c && !at_qc,
             ind_hjs.mean < 0);

    auto ind_hjlog = detail::fit_indicator(prof.r, lo, hi, [&](std::size_t i) {
        return std::pow(prof.r[i], N - 2.0) *
               std::pow(std::abs(std::log(prof.r[i])), N - 1.0) * prof.u[i];
    });
    consider(Regime::HJLog, ind_hjlog, N >= 3 && at_qc, ind_hjlog.mean < 0);

    auto ind_hjp = detail::fit_indicator(prof.r, lo, hi, [&](std::size_t i) {
        return std::pow(prof.r[i], dc.beta) * prof.u[i];
    });
    consider(Regime::HJPower, ind_hjp, static_cast<bool>(dc.xi_M), ind_hjp.mean < 0);

    // flat u splits into Regular / GradientOnly / OneDLinear on u' behavior
    auto ind_u = detail::fit_indicator(prof.r, lo, hi,
                                       [&](std::size_t i) { return prof.u[i]; });
    if (ind_u.valid && std::abs(ind_u.slope) < flatness &&
        std::abs(ind_u.slope) < best.residual) {
        auto ind_p = detail::fit_indicator(prof.r, lo, hi,
                                           [&](std::size_t i) { return prof.p[i]; });
        const double p_lo = std::abs(prof.p[lo]);
        if (!ind_p.valid || p_lo < 1e-10) {
            best.regime = Regime::Regular;
            best.constant = ind_u.mean;
            best.residual = std::abs(ind_u.slope);
        } else if (q > 2.0 && std::abs(ind_p.slope + 1.0 / (q - 1.0)) < 0.1) {
            best.regime = Regime::GradientOnly;
            best.constant = ind_u.mean;
            best.residual = std::abs(ind_u.slope);
            auto pref = detail::fit_indicator(prof.r, lo, hi, [&](std::size_t i) {
                return (prof.u[i] - ind_u.mean) / std::pow(prof.r[i], (q - 2.0) / (q - 1.0));
            });
            best.constant2 = pref.mean;
        } else if (N == 1 && std::abs(ind_p.slope) < 0.1 && p_lo > 1e-10) {
            best.regime = Regime::OneDLinear;
            best.constant = ind_u.mean;
            best.constant2 = ind_p.mean;
            best.residual = std::abs(ind_u.slope);
        } else if (std::abs(ind_p.slope - 1.0) < 0.2 || p_lo < 1e-6) {
            best.regime = Regime::Regular;
            best.constant = ind_u.mean;
            best.residual = std::abs(ind_u.slope);
        }
    }
    return best;
}

// Large-r behavior: Emden scaling for q > 2, eikonal scaling for 1 < q < 2.
// constant2 carries the fitted gradient limit r u'.
inline Classification classify_infinity(const Profile& prof, const Params& prm,
                                        double flatness = 0.02) {
    if (prof.size() < 8 || !(prof.r_max() >= 1e2))
        throw WindowTooShort("profile must reach r >= 1e2 with enough samples");

    const double r_hi = prof.r_max();
    const double r_lo = r_hi / 100.0;
    std::size_t lo = prof.size() - 1, hi = prof.size() - 1;
    for (std::size_t i = prof.size(); i-- > 0;) {
        if (prof.r[i] >= r_lo) lo = i;
    }
    if (hi - lo + 1 < 8) throw WindowTooShort("fewer than 8 samples in the outer window");

    const double q = prm.q;
    Classification out;
    out.window_lo = prof.r[lo];
    out.window_hi = r_hi;

    auto grad = detail::fit_indicator(prof.r, lo, hi,
                                      [&](std::size_t i) { return prof.r[i] * prof.p[i]; });
    if (q > 2.0 && prm.N >= 3) {
        auto ind = detail::fit_indicator(prof.r, lo, hi, [&](std::size_t i) {
            return prof.r[i] * prof.r[i] * std::exp(prof.u[i]);
        });
        if (ind.valid && std::abs(ind.slope) < flatness && ind.mean > 0) {
            out.regime = Regime::ExteriorEmden;
            out.constant = ind.mean;
            out.constant2 = grad.valid ? grad.mean : out.constant2;
            out.residual = std::abs(ind.slope);
        }
    } else if (q > 1.0 && q < 2.0) {
        auto ind = detail::fit_indicator(prof.r, lo, hi, [&](std::size_t i) {
            return std::pow(prof.r[i], q) * std::exp(prof.u[i]);
        });
        if (ind.valid && std::abs(ind.slope) < flatness && ind.mean > 0) {
            out.regime = Regime::ExteriorEikonal;
            out.constant = ind.mean;
            out.constant2 = grad.valid ? grad.mean : out.constant2;
            out.residual = std::abs(ind.slope);
        }
    }
    return out;
}

// Pointwise diagnostic energies along a profile.  G is evaluated with the
// algebraic X_t = X(q - Phi), never by differencing.
struct DiagnosticTrace {
    std::vector<double> H;   // e^u + u'^2 / 2
    std::vector<double> G;   // Leighton-type energy in t = ln r
    std::vector<double> F;   // e^u - C M |u'|^q
    double C = 0.5;
};

inline DiagnosticTrace diagnostics(const Profile& prof, const Params& prm, double C = 0.5) {
    if (!(C > 0.0 && C < 1.0)) throw InvalidParams("F_C requires C in (0, 1)");
    const double q = prm.q, M = prm.M;
    const int N = prm.N;
    DiagnosticTrace tr;
    tr.C = C;
    tr.H.reserve(prof.size());
    tr.G.reserve(prof.size());
    tr.F.reserve(prof.size());
    for (std::size_t i = 0; i < prof.size(); ++i) {
        const double r = prof.r[i], u = prof.u[i], p = prof.p[i];
        const double t = std::log(r);
        const double X = std::pow(r, q) * std::exp(u);
        const double Phi = -r * p;
        const double Xt = X * (q - Phi);
        tr.H.push_back(std::exp(u) + 0.5 * p * p);
        tr.G.push_back(M * std::pow(q, q) * X * X / 2.0 - X * X * X / 3.0 +
                       std::exp((q - 2.0) * t) *
                           ((N - 2) * q * X / 2.0 - Xt * Xt / 2.0));
        tr.F.push_back(std::exp(u) - C * M * abs_pow(p, q));
    }
    return tr;
}

// Scaled suprema from the a priori estimates; constants are solution
// dependent, so only finiteness and the scaling trend are reported.
struct BoundsReport {
    double sup_interior = 0.0;       // sup r^{max(2,q)} e^u on r <= 1
    double sup_exterior = 0.0;       // sup r^{min(2,q)} e^u on r >= 1
    double sup_grad_scaled = 0.0;    // sup r^{1/(q-1)} |u'|
    double sup_grad_linear = 0.0;    // sup r |u'|
    bool all_finite = true;
};

inline BoundsReport audit_bounds(const Profile& prof, const Params& prm) {
    const double q = prm.q;
    BoundsReport rep;
    for (std::size_t i = 0; i < prof.size(); ++i) {
        const double r = prof.r[i], eu = std::exp(prof.u[i]), ap = std::abs(prof.p[i]);
        if (r <= 1.0)
            rep.sup_interior = std::max(rep.sup_interior, std::pow(r, std::max(2.0, q)) * eu);
        if (r >= 1.0)
            rep.sup_exterior = std::max(rep.sup_exterior, std::pow(r, std::min(2.0, q)) * eu);
        rep.sup_grad_scaled = std::max(rep.sup_grad_scaled, std::pow(r, 1.0 / (q - 1.0)) * ap);
        rep.sup_grad_linear = std::max(rep.sup_grad_linear, r * ap);
        rep.all_finite = rep.all_finite && std::isfinite(eu) && std::isfinite(ap);
    }
    return rep;
}

}  // namespace radsing

#endif
