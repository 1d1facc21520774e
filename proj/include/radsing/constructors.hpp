#ifndef RADSING_CONSTRUCTORS_HPP
#define RADSING_CONSTRUCTORS_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "radsing/ode.hpp"
#include "radsing/params.hpp"
#include "radsing/state.hpp"
#include "radsing/systems.hpp"

namespace radsing {

// ---------------------------------------------------------------------------
// Emden-type singular solution, 1 < q < 2, N >= 3:
// unique trajectory leaving (2(N-2), 2, 0) along the 2-q eigendirection
// with Theta > 0.  Along it r^2 e^u -> 2(N-2) and r u' -> -2 at the origin.
// ---------------------------------------------------------------------------

struct EmdenConstruction {
    Profile profile;
    std::array<double, 3> seed{};
    double amplitude = 0.0;
    double inner_x_dev = 0.0;    // max |x/(2(N-2)) - 1| over the inner decade
    double inner_phi_dev = 0.0;  // max |Phi - 2| over the inner decade
};

struct EmdenOptions {
    double amplitude = 0.0;  // 0 = auto
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
};

inline EmdenConstruction construct_emden_singular(const Params& prm,
                                                  double r_lo = 1e-6, double r_hi = 1e-2,
                                                  const EmdenOptions& opts = {}) {
    if (!(prm.q > 1.0 && prm.q < 2.0) || prm.N < 3)
        throw WindowViolation("Emden-type construction requires N >= 3 and 1 < q < 2");
    if (!(r_lo > 0.0 && r_hi > r_lo)) throw InvalidParams("invalid radial window");

    const double x_eq = 2.0 * (prm.N - 2);
    auto reports = equilibria(prm, SystemTag::TripleTheta);
    const EquilibriumReport* eq = nullptr;
    for (const auto& rep : reports)
        if (std::abs(rep.location[0] - x_eq) < 1e-12 && rep.location[1] == 2.0) eq = &rep;
    if (!eq) throw WindowViolation("Emden equilibrium not available for these parameters");

    int idx = -1;
    for (int i = 0; i < eq->dim; ++i)
        if (std::abs(eq->eigenvalues[i].imag()) < 1e-12 &&
            std::abs(eq->eigenvalues[i].real() - (2.0 - prm.q)) < 1e-9)
            idx = i;
    if (idx < 0) throw SeedEscaped("no real 2-q eigendirection at the Emden equilibrium");

    double loc_norm = std::hypot(eq->location[0], eq->location[1]);
    const double amp =
        opts.amplitude > 0.0 ? opts.amplitude : 1e-5 * (1.0 + loc_norm);
    PhasePoint seed_pt = manifold_seed(*eq, idx, amp, +1);
    const auto seed = to_array(seed_pt);
    if (!(seed[2] > 0.0))
        throw SeedEscaped("seed has nonpositive Theta; trajectory not admissible");

    // Theta solves its own row exactly, so starting at t = ln(Theta)/(2-q)
    // keeps Theta(t) = e^{(2-q)t} and t = ln r along the whole orbit.
    const double t0 = std::log(seed[2]) / (2.0 - prm.q);
    const double t1 = std::log(r_hi);
    if (t1 <= t0) throw InvalidParams("window top too small for the chosen amplitude");

    const double guard = 0.75 * loc_norm + 0.5;
    bool escaped = false;
    auto stop = [&](double, const std::array<double, 3>& y) {
        const double dev = std::hypot(y[0] - x_eq, y[1] - 2.0);
        if (dev > guard) {
            escaped = true;
            return true;
        }
        return false;
    };
    PhaseOrbit orbit = integrate_system(prm, SystemTag::TripleTheta, seed, t0, t1,
                                        opts.rel_tol, opts.abs_tol, stop);
    if (escaped) throw SeedEscaped("trajectory left the guard ball before reaching the window");

    EmdenConstruction out;
    out.seed = seed;
    out.amplitude = amp;
    out.profile.params = prm;
    out.profile.direction = Direction::Outward;
    out.profile.termination = {TerminationKind::ReachedBound, 0.0, ""};
    for (std::size_t i = 0; i < orbit.s.size(); ++i) {
        const double t = orbit.s[i];
        const double r = std::exp(t);
        const double u = std::log(orbit.y[i][0]) - 2.0 * t;
        out.profile.r.push_back(r);
        out.profile.u.push_back(u);
        out.profile.p.push_back(-orbit.y[i][1] / r);
    }
    detail::fill_residuals(out.profile);

    for (std::size_t i = 0; i < orbit.s.size(); ++i) {
        const double r = out.profile.r[i];
        if (r < r_lo || r > 10.0 * r_lo) continue;
        out.inner_x_dev = std::max(out.inner_x_dev, std::abs(orbit.y[i][0] / x_eq - 1.0));
        out.inner_phi_dev = std::max(out.inner_phi_dev, std::abs(orbit.y[i][1] - 2.0));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hamilton-Jacobi-type solutions, N/(N-1) < q < 2: backward integration of
// the scaled system from small data around (xi_M, beta xi_M); every
// admissible datum gives a distinct solution with r^beta u -> -xi_M.
// ---------------------------------------------------------------------------

struct HJConstruction {
    Profile profile;
    double xi_bar0 = 0.0, eta_bar0 = 0.0, t0 = 0.0;
    double xi_bar_end = 0.0;  // scaled deviation at the deep end
};

struct HJOptions {
    double t_depth = 15.0;  // forcing < 1e-28 below t0 - 15 for admissible q
    double c_bound = 0.0;   // bound on |eta_bar0|; 0 = beta xi_M / 4
    double rel_tol = 1e-11;
    double abs_tol = 1e-13;
};

inline HJConstruction construct_hj_subcritical(const Params& prm, double xi_bar0,
                                               double eta_bar0, double t0 = -3.0,
                                               const HJOptions& opts = {}) {
    const DerivedConstants dc = derive_constants(prm);
    if (!dc.xi_M)
        throw WindowViolation("HJ-type construction requires N/(N-1) < q < 2 (and N >= 3)");
    const double xiM = *dc.xi_M, beta = dc.beta;
    const double c_bound = opts.c_bound > 0.0 ? opts.c_bound : beta * xiM / 4.0;
    if (std::abs(xi_bar0) > xiM / 4.0)
        throw InvalidParams("|xi_bar0| must be <= xi_M / 4");
    if (std::abs(eta_bar0) > std::min(beta * xiM / 4.0, c_bound))
        throw InvalidParams("|eta_bar0| outside the admissible box");

    const double theta_lyap = 4.0 * (2.0 - prm.q) + 1.0;
    auto lyap = [&](const std::array<double, 3>& y) {
        const double xb = y[0] - xiM, eb = y[1] - beta * xiM;
        return theta_lyap * xb * xb + eb * eb;
    };

    // net decrease per unit t-interval is only claimed below t0 - 2, where
    // the forcing is already subdominant; both marks must lie below it
    double last_mark = t0;
    double last_val = -1.0;
    bool drift = false;
    auto stop = [&](double t, const std::array<double, 3>& y) {
        if (t <= last_mark - 1.0) {
            const double v = lyap(y);
            if (t < t0 - 2.0) {
                if (last_val >= 0.0 && v > 2.0 * last_val + 1e-25) {
                    drift = true;
                    return true;
                }
                last_val = v;
            }
            last_mark = t;
        }
        return false;
    };

    std::array<double, 3> y0 = {xiM + xi_bar0, beta * xiM + eta_bar0, 0.0};
    PhaseOrbit orbit = integrate_system(prm, SystemTag::HJ, y0, t0, t0 - opts.t_depth,
                                        opts.rel_tol, opts.abs_tol, stop);
    if (drift)
        throw DriftDetected("scaled deviation grows backward: data outside the basin");

    HJConstruction out;
    out.xi_bar0 = xi_bar0;
    out.eta_bar0 = eta_bar0;
    out.t0 = t0;
    out.xi_bar_end = orbit.y.back()[0] - xiM;
    out.profile.params = prm;
    out.profile.direction = Direction::Inward;
    out.profile.termination = {TerminationKind::ReachedBound, 0.0, ""};

    // backward samples arrive with decreasing t; store ascending in r
    for (std::size_t i = orbit.s.size(); i-- > 0;) {
        const double t = orbit.s[i];
        const double r = std::exp(t);
        const double xi = orbit.y[i][0], eta = orbit.y[i][1];
        out.profile.r.push_back(r);
        out.profile.u.push_back(-xi * std::pow(r, -beta));
        out.profile.p.push_back(eta * std::pow(r, -beta - 1.0));
    }
    detail::fill_residuals(out.profile);
    return out;
}

// ---------------------------------------------------------------------------
// Dirac-type solutions, N >= 3, 1 < q < N/(N-1): Picard iteration of the
// integral operator on weighted-norm space, with u(rho) = 0 and
// r^{N-2} u -> gamma at the origin.
// ---------------------------------------------------------------------------

struct PicardState {
    std::size_t iterations = 0;
    double sigma = 0.75;
    std::vector<double> diff_norms;
    std::vector<double> ratios;
    double measured_ratio = 0.0;  // max ratio after the first two iterates
    double n1_U = 0.0, n2_V = 0.0;
};

struct DiracConstruction {
    Profile profile;  // u = -U on the grid, ascending r
    PicardState picard;
    double gamma = 0.0, rho = 0.0;
    double harmonic_dev = 0.0;  // |r^{N-2} u / gamma - 1| at the smallest node
};

struct DiracOptions {
    std::size_t grid_n = 2501;     // log grid nodes on [rho * r_min_factor, rho]
    double r_min_factor = 1e-5;
    double tol = 1e-12;
    std::size_t max_iter = 500;
};

// Grid realization of the integral operator.  The kernel integrals are
// cumulative 4th-order Adams-Moulton sums on the uniform log grid plus
// closed-form power-law tails below the smallest node.
class DiracOperator {
public:
    DiracOperator(const Params& prm, double gamma, double rho, const DiracOptions& opts)
        : prm_(prm), gamma_(gamma), rho_(rho) {
        const std::size_t n = opts.grid_n;
        const double tau0 = std::log(rho * opts.r_min_factor), tau1 = std::log(rho);
        h_ = (tau1 - tau0) / static_cast<double>(n - 1);
        r_.resize(n);
        for (std::size_t j = 0; j < n; ++j) r_[j] = std::exp(tau0 + h_ * j);
        r_.back() = rho;
    }

    const std::vector<double>& grid() const { return r_; }

    // K1: U(r) = -int_r^rho V ds
    std::vector<double> k1(const std::vector<double>& V) const {
        const std::size_t n = r_.size();
        std::vector<double> f(n);
        for (std::size_t j = 0; j < n; ++j) f[j] = V[j] * r_[j];  // d s = e^tau d tau
        std::vector<double> I = cumulative(f);
        std::vector<double> U(n);
        for (std::size_t j = 0; j < n; ++j) U[j] = -(I[n - 1] - I[j]);
        return U;
    }

    // K2: V(r) = (N-2) gamma r^{1-N} - r^{1-N} int_0^r (M|V|^q - e^{-|U|}) s^{N-1} ds
    std::vector<double> k2(const std::vector<double>& U, const std::vector<double>& V) const {
        const std::size_t n = r_.size();
        const int N = prm_.N;
        const double q = prm_.q;
        std::vector<double> f(n);
        for (std::size_t j = 0; j < n; ++j)
            f[j] = (prm_.M * abs_pow(V[j], q) - std::exp(-std::abs(U[j]))) *
                   std::pow(r_[j], static_cast<double>(N));
        std::vector<double> I = cumulative(f);

        // power-law tails on (0, r_min]: V ~ V_m (s/r_m)^{1-N}, U frozen
        const double rm = r_[0];
        const double denom = N - q * (N - 1);
        const double tail = prm_.M * abs_pow(V[0], q) * std::pow(rm, static_cast<double>(N)) /
                                denom -
                            std::exp(-std::abs(U[0])) * std::pow(rm, static_cast<double>(N)) / N;

        std::vector<double> W(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double r1mN = std::pow(r_[j], 1.0 - N);
            W[j] = (N - 2) * gamma_ * r1mN - r1mN * (tail + I[j]);
        }
        return W;
    }

    double n1(const std::vector<double>& U) const {
        double m = 0.0;
        for (std::size_t j = 0; j < r_.size(); ++j)
            m = std::max(m, std::pow(r_[j], prm_.N - 2.0) * std::abs(U[j]));
        return m;
    }
    double n2(const std::vector<double>& V) const {
        double m = 0.0;
        for (std::size_t j = 0; j < r_.size(); ++j)
            m = std::max(m, std::pow(r_[j], prm_.N - 1.0) * std::abs(V[j]));
        return m;
    }
    double norm(const std::vector<double>& U, const std::vector<double>& V,
                double sigma) const {
        return std::max(sigma * n1(U), n2(V));
    }

private:
    // cumulative integral of f dtau from the first node, AM4 with a
    // trapezoid/AM3 bootstrap; the integrand is tail-dominated at the start
    std::vector<double> cumulative(const std::vector<double>& f) const {
        const std::size_t n = f.size();
        std::vector<double> I(n, 0.0);
        if (n > 1) I[1] = I[0] + h_ / 2.0 * (f[0] + f[1]);
        if (n > 2) I[2] = I[1] + h_ / 12.0 * (5.0 * f[2] + 8.0 * f[1] - f[0]);
        for (std::size_t j = 3; j < n; ++j)
            I[j] = I[j - 1] +
                   h_ / 24.0 * (9.0 * f[j] + 19.0 * f[j - 1] - 5.0 * f[j - 2] + f[j - 3]);
        return I;
    }

    Params prm_;
    double gamma_, rho_, h_;
    std::vector<double> r_;
};

inline DiracConstruction construct_dirac(const Params& prm, double gamma, double rho,
                                         const DiracOptions& opts = {}) {
    const DerivedConstants dc = derive_constants(prm);
    if (prm.N < 3 || !dc.q_c || !(prm.q < *dc.q_c))
        throw WindowViolation("Dirac-type construction requires N >= 3 and 1 < q < N/(N-1)");
    if (!(gamma < 0.0)) throw InvalidParams("gamma must be negative");
    if (!(rho > 0.0 && rho < 1.0)) throw InvalidParams("rho must lie in (0, 1)");

    DiracOperator K(prm, gamma, rho, opts);
    const std::size_t n = K.grid().size();
    std::vector<double> U(n, 0.0), V(n, 0.0);

    DiracConstruction out;
    out.gamma = gamma;
    out.rho = rho;
    out.picard.sigma = 0.75;

    std::size_t slow = 0;
    for (std::size_t it = 0; it < opts.max_iter; ++it) {
        std::vector<double> Un = K.k1(V);
        std::vector<double> Vn = K.k2(U, V);
        std::vector<double> dU(n), dV(n);
        for (std::size_t j = 0; j < n; ++j) {
            dU[j] = Un[j] - U[j];
            dV[j] = Vn[j] - V[j];
        }
        const double diff = K.norm(dU, dV, out.picard.sigma);
        out.picard.diff_norms.push_back(diff);
        const std::size_t m = out.picard.diff_norms.size();
        if (m >= 2 && out.picard.diff_norms[m - 2] > 0.0) {
            const double ratio = diff / out.picard.diff_norms[m - 2];
            out.picard.ratios.push_back(ratio);
            if (m > 3 && diff > 1e-11)
                out.picard.measured_ratio = std::max(out.picard.measured_ratio, ratio);
            if (ratio > 0.98) {
                if (++slow >= 10)
                    throw ContractionFailure(
                        "difference-norm ratio exceeded 0.98 for 10 consecutive iterations");
            } else {
                slow = 0;
            }
        }
        U = std::move(Un);
        V = std::move(Vn);
        out.picard.iterations = it + 1;
        if (diff < opts.tol * std::max(1.0, K.norm(U, V, out.picard.sigma))) break;
        if (it + 1 == opts.max_iter)
            throw ContractionFailure("Picard iteration did not reach tolerance");
    }
    out.picard.n1_U = K.n1(U);
    out.picard.n2_V = K.n2(V);

    out.profile.params = prm;
    out.profile.direction = Direction::Inward;
    out.profile.termination = {TerminationKind::ReachedBound, 0.0, ""};
    out.profile.r = K.grid();
    out.profile.u.resize(n);
    out.profile.p.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.profile.u[j] = -U[j];
        out.profile.p[j] = -V[j];
    }
    detail::fill_residuals(out.profile);

    out.harmonic_dev =
        std::abs(std::pow(K.grid()[0], prm.N - 2.0) * out.profile.u[0] / gamma - 1.0);
    return out;
}

// Adaptive search for a (rho_0, k_0) pair inside the contraction regime:
// halve both until the measured ratio drops below 0.9.
inline std::pair<double, double> dirac_window(const Params& prm) {
    double rho = 0.5, k = 0.5;
    DiracOptions cheap;
    cheap.grid_n = 301;
    cheap.tol = 1e-8;
    cheap.max_iter = 120;
    for (int it = 0; it < 40; ++it) {
        try {
            auto c = construct_dirac(prm, -k, rho, cheap);
            if (c.picard.measured_ratio < 0.9) return {rho, k};
        } catch (const Error&) {
        }
        rho *= 0.5;
        k *= 0.5;
    }
    throw ContractionFailure("no contracting (rho, gamma) window found");
}

// ---------------------------------------------------------------------------
// Eikonal-type singular solution.  The regular/singular dichotomy is decided
// by backward shooting in the (u, v) phase plane (N = 1); the returned
// profile is the monotone limit of regular solutions, which the same
// theorem identifies with the shot solution and which stays on the eikonal
// branch down to machine scale (backward integration through the strongly
// attracting singularity is exponentially ill-conditioned instead).
// ---------------------------------------------------------------------------

struct ShootingRecord {
    struct Trial {
        double c = 0.0;
        bool regular = false;
    };
    std::vector<Trial> trials;
    double c_lo = 0.0, c_hi = 0.0;  // final bracket: regular at c_lo, singular at c_hi
};

struct EikonalShot1D {
    Profile profile;
    ShootingRecord record;
    double c_star = 0.0;
    double crossing_slope = 0.0;  // |u'| of the profile where u = 0
    double u0_used = 0.0;         // plateau height of the limiting regular run
};

namespace detail {

enum class OneDClass { Regular, Singular };

// Backward classification of the trajectory through (u, v) = (axis_u, c):
// v = 0 means a regular start; u or v escaping means a singular one.
inline OneDClass classify_oned(const Params& prm, double axis_u, double c, double u_threshold,
                               std::vector<std::array<double, 2>>* trace = nullptr) {
    bool regular = false, singular = false;
    auto stop = [&](double, const std::array<double, 3>& y) {
        if (trace) trace->push_back({y[0], y[1]});
        if (y[1] <= 0.0) {
            regular = true;
            return true;
        }
        if (y[0] >= u_threshold || std::abs(y[0]) + std::abs(y[1]) >= 1e10) {
            singular = true;
            return true;
        }
        return false;
    };
    integrate_system(prm, SystemTag::OneD, {axis_u, c, 0.0}, 0.0, -1e4, 1e-11, 1e-13, stop);
    if (regular) return OneDClass::Regular;
    if (singular) return OneDClass::Singular;
    // step underflow in the blow-up tail counts as singular
    return OneDClass::Singular;
}

// Forward run of the regular solution u(0) = u0 in log-radius, sliced to
// [r_min, r_end].
inline Profile regular_profile(const Params& prm, double u0, double r_end,
                               double rel_tol = 1e-10) {
    const double eps = 1e-3 * std::exp(-u0 / 2.0);
    RadialState seed = seed_regular(prm, u0, eps);
    IntegratorConfig cfg;
    cfg.rel_tol = rel_tol;
    cfg.abs_tol = 1e-14;
    cfg.blowup_threshold = 1e15;
    return integrate(prm, seed, r_end, cfg);
}

}  // namespace detail

inline EikonalShot1D shoot_eikonal_1d(const Params& prm, double c_tolerance = 1e-12,
                                      double r_min_target = 1e-5, double u_threshold = 50.0) {
    if (prm.N != 1 || !(prm.q > 2.0))
        throw WindowViolation("1-D eikonal shooting requires N = 1 and q > 2");

    const double q = prm.q, M = prm.M;
    const double K = std::max(std::pow(2.0 / M, 1.0 / q), std::pow(q * M / 2.0, 1.0 / (q - 2.0)));

    EikonalShot1D out;
    auto classify = [&](double c) {
        const bool reg = detail::classify_oned(prm, 0.0, c, u_threshold) ==
                         detail::OneDClass::Regular;
        out.record.trials.push_back({c, reg});
        return reg;
    };

    double c_lo = 0.1 * K;
    int guard = 0;
    while (!classify(c_lo)) {
        c_lo *= 0.5;
        if (++guard > 60) throw BracketNotFound("no regular crossing slope found");
    }
    double c_hi = K;
    guard = 0;
    while (classify(c_hi)) {
        c_hi *= 2.0;
        if (c_hi > 10.0 * K || ++guard > 60)
            throw BracketNotFound("no singular crossing slope found below 10 K");
    }
    for (int it = 0; it < 200 && c_hi - c_lo > c_tolerance; ++it) {
        const double c = 0.5 * (c_lo + c_hi);
        (classify(c) ? c_lo : c_hi) = c;
    }
    out.record.c_lo = c_lo;
    out.record.c_hi = c_hi;
    out.c_star = 0.5 * (c_lo + c_hi);

    // limit-of-regulars profile, deep enough that the eikonal branch covers
    // [r_min_target, ...] before the regular plateau is felt
    const DerivedConstants dc = derive_constants(prm);
    out.u0_used = std::max(u_threshold, dc.Lambda - q * std::log(r_min_target)) + 15.0;
    const double rho1_scale = std::exp(dc.Lambda / q);  // radius where r^q e^u ~ M q^q hits u=0
    Profile full = detail::regular_profile(prm, out.u0_used, std::max(10.0, 4.0 * rho1_scale));

    Event cross{"u=0", [](double, double u, double) { return u; }, 0, 1e-13, true};
    auto hit = find_event(full, cross);
    out.crossing_slope = -hit.state.p;

    out.profile = std::move(full);
    return out;
}

struct EikonalLimitND {
    Profile profile;
    std::vector<double> u0_sequence;
    std::vector<double> gaps;  // sup-norm gaps between successive runs
};

inline EikonalLimitND shoot_eikonal_nd(const Params& prm, double r_min = 1e-4,
                                       double cauchy_tol = 1e-8) {
    if (prm.N < 2 || !(prm.q > 2.0))
        throw WindowViolation("limit-of-regulars construction requires N >= 2 and q > 2");

    const std::size_t grid_n = 257;
    std::vector<double> grid(grid_n);
    for (std::size_t j = 0; j < grid_n; ++j)
        grid[j] = std::exp(std::log(r_min) + (std::log(1.0) - std::log(r_min)) * j /
                                                  double(grid_n - 1));
    grid.back() = 1.0;

    EikonalLimitND out;
    std::vector<double> prev;
    double u0 = 5.0;
    std::size_t rises = 0;
    Profile last;
    for (int k = 0; k < 60; ++k, u0 += 5.0) {
        Profile prof = detail::regular_profile(prm, u0, 1.0);
        std::vector<double> vals(grid_n);
        for (std::size_t j = 0; j < grid_n; ++j) vals[j] = prof.state_at(grid[j]).u;
        out.u0_sequence.push_back(u0);
        if (!prev.empty()) {
            double gap = 0.0;
            for (std::size_t j = 0; j < grid_n; ++j)
                gap = std::max(gap, std::abs(vals[j] - prev[j]));
            if (!out.gaps.empty() && gap > out.gaps.back()) {
                if (++rises >= 5)
                    throw NoConvergence("sup-norm gaps failed to decrease over 5 successive runs");
            } else {
                rises = 0;
            }
            out.gaps.push_back(gap);
            if (gap < cauchy_tol) {
                last = std::move(prof);
                break;
            }
        }
        prev = std::move(vals);
        last = std::move(prof);
        if (k == 59) throw NoConvergence("Cauchy tolerance not reached");
    }

    // slice to the stated window [r_min, 1], keeping one bracketing sample
    // on each side so interpolation covers the window endpoints
    Profile& full = last;
    std::size_t lo = 0, hi = full.size() - 1;
    while (lo + 1 < full.size() && full.r[lo + 1] < r_min) ++lo;
    while (hi > 0 && full.r[hi - 1] > 1.0) --hi;
    Profile sliced;
    sliced.params = prm;
    sliced.direction = Direction::Outward;
    sliced.termination = full.termination;
    for (std::size_t i = lo; i <= hi; ++i) {
        sliced.r.push_back(full.r[i]);
        sliced.u.push_back(full.u[i]);
        sliced.p.push_back(full.p[i]);
    }
    detail::fill_residuals(sliced);
    out.profile = std::move(sliced);
    return out;
}

// ---------------------------------------------------------------------------
// Gradient-singular solutions, q > 2: u bounded at the origin with
// u' ~ r^{-1/(q-1)}.  N = 1 shoots above the critical trajectory and
// bisects the vertical asymptote onto u0_target; N >= 2 integrates the
// sign-flipped quadratic system backward from the attraction ball of P0.
// ---------------------------------------------------------------------------

struct GradientSingularConstruction {
    Profile profile;
    double u0_realized = 0.0;
    double prefactor_fit = 0.0;   // fitted (u - u0) / r^{(q-2)/(q-1)}
    double prefactor_expected = 0.0;
    double k0 = 0.0;              // N = 1 shooting slope at the w-axis
};

namespace detail {

struct AsymptoteRun {
    std::vector<double> r, u, v;
    double r_stop = 0.0, u_stop = 0.0, v_stop = 0.0;
};

// Backward run from (axis_u, k) until v blows past v_big; the vertical
// asymptote data follow from the |v| -> inf tail of the autonomous plane.
inline AsymptoteRun run_to_asymptote(const Params& prm, double axis_u, double k, double v_big) {
    AsymptoteRun run;
    auto stop = [&](double s, const std::array<double, 3>& y) {
        run.r.push_back(s);
        run.u.push_back(y[0]);
        run.v.push_back(y[1]);
        return y[1] >= v_big;
    };
    integrate_system(prm, SystemTag::OneD, {axis_u, k, 0.0}, 0.0, -1e4, 1e-11, 1e-13, stop);
    run.r_stop = run.r.back();
    run.u_stop = run.u.back();
    run.v_stop = run.v.back();
    return run;
}

inline double asymptote_u0(const Params& prm, const AsymptoteRun& run) {
    // du = dv / (M v^{q-1}) beyond the stop point, to leading order
    return run.u_stop + std::pow(run.v_stop, 2.0 - prm.q) / (prm.M * (prm.q - 2.0));
}

}  // namespace detail

inline GradientSingularConstruction construct_gradient_singular(const Params& prm,
                                                                double u0_target = 0.0,
                                                                double target_tol = 1e-5) {
    if (!(prm.q > 2.0)) throw WindowViolation("gradient-singular construction requires q > 2");
    const double q = prm.q, M = prm.M;
    const double expo = (q - 2.0) / (q - 1.0);

    GradientSingularConstruction out;

    if (prm.N == 1) {
        out.prefactor_expected =
            -(q - 1.0) / (q - 2.0) * std::pow(1.0 / (M * (q - 1.0)), 1.0 / (q - 1.0));

        const double w = u0_target - 5.0;
        // critical slope on the axis u = w
        const double Kw = std::max(std::pow(2.0 * std::exp(w) / M, 1.0 / q),
                                   std::pow(q * M / 2.0, 1.0 / (q - 2.0)));
        double c_lo = 0.1 * Kw;
        int guard = 0;
        while (detail::classify_oned(prm, w, c_lo, 50.0 + std::max(0.0, w)) !=
               detail::OneDClass::Regular) {
            c_lo *= 0.5;
            if (++guard > 60) throw BracketNotFound("no regular slope on the shifted axis");
        }
        double c_hi = std::max(Kw, 2.0 * c_lo);
        guard = 0;
        while (detail::classify_oned(prm, w, c_hi, 50.0 + std::max(0.0, w)) ==
               detail::OneDClass::Regular) {
            c_hi *= 2.0;
            if (++guard > 60) throw BracketNotFound("no singular slope on the shifted axis");
        }
        for (int it = 0; it < 120 && c_hi - c_lo > 1e-13 * (1.0 + c_hi); ++it) {
            const double c = 0.5 * (c_lo + c_hi);
            (detail::classify_oned(prm, w, c, 50.0 + std::max(0.0, w)) ==
                     detail::OneDClass::Regular
                 ? c_lo
                 : c_hi) = c;
        }
        const double c_star_w = c_hi;

        // the asymptote height decreases in k0; bracket u0_target from above
        const double v_big = 1e8;
        double k_lo = c_star_w * (1.0 + 1e-6) + 1e-9;  // u0 large
        double k_hi = std::max(2.0 * k_lo, k_lo + 1.0);
        guard = 0;
        while (detail::asymptote_u0(prm, detail::run_to_asymptote(prm, w, k_hi, v_big)) >
               u0_target) {
            k_hi *= 2.0;
            if (++guard > 60) throw AsymptoteMiss("asymptote stays above the target");
        }
        if (detail::asymptote_u0(prm, detail::run_to_asymptote(prm, w, k_lo, v_big)) < u0_target)
            throw AsymptoteMiss("asymptote below target even at the critical slope");

        double u0 = 0.0;
        detail::AsymptoteRun best;
        for (int it = 0; it < 60; ++it) {
            const double k = 0.5 * (k_lo + k_hi);
            best = detail::run_to_asymptote(prm, w, k, v_big);
            u0 = detail::asymptote_u0(prm, best);
            out.k0 = k;
            if (std::abs(u0 - u0_target) <= target_tol) break;
            (u0 > u0_target ? k_lo : k_hi) = k;
            if (it == 59) throw AsymptoteMiss("asymptote bisection did not converge");
        }
        out.u0_realized = u0;

        // shift the maximal interval to start at r = 0+
        const double r_star =
            best.r_stop - std::pow(best.v_stop, 1.0 - q) / (M * (q - 1.0));
        out.profile.params = prm;
        out.profile.direction = Direction::Inward;
        out.profile.termination = {TerminationKind::ReachedBound, 0.0, ""};
        for (std::size_t i = best.r.size(); i-- > 0;) {
            const double rs = best.r[i] - r_star;
            if (!(rs > 0.0)) continue;
            out.profile.r.push_back(rs);
            out.profile.u.push_back(best.u[i]);
            out.profile.p.push_back(-best.v[i]);
        }
        detail::fill_residuals(out.profile);

        const double r_fit = std::max(1e-4, 2.0 * out.profile.r_min());
        const RadialState fit = out.profile.state_at(r_fit);
        out.prefactor_fit = (fit.u - u0) / std::pow(r_fit, expo);
        return out;
    }

    // N >= 2: backward trajectory into P0 = (0, V0, 0) of the increasing-
    // solutions system, with the time shift that restores V = r |u'|^{q-1}.
    const double kappa = ((prm.N - 1) * q - prm.N) / (q - 1.0);
    const double V0 = kappa / M;
    out.prefactor_expected = (q - 1.0) / (q - 2.0) * std::pow(V0, 1.0 / (q - 1.0));

    const double size = 0.05 * std::min(1.0, V0);
    std::array<double, 3> seed = {-size, V0, -size};  // (Z, V, Phi), increasing branch
    const double b = V0 / abs_pow(seed[2], q - 1.0);
    const double shift = std::log(b) / (2.0 - q);

    // stop while Z is still resolved in absolute terms: below that the
    // mapped u = ln(Z Phi) - 2t is integration noise
    const double abs_tol = 1e-13;
    auto stop = [&](double, const std::array<double, 3>& y) {
        return std::abs(y[0]) < 1e4 * abs_tol;
    };
    PhaseOrbit orbit = integrate_system(prm, SystemTag::LotkaVolterra, seed, 0.0, -60.0, 1e-11,
                                        abs_tol, stop, -1);

    out.profile.params = prm;
    out.profile.direction = Direction::Inward;
    out.profile.termination = {TerminationKind::ReachedBound, 0.0, ""};
    for (std::size_t i = orbit.s.size(); i-- > 0;) {
        const double t = orbit.s[i] + shift;
        const double r = std::exp(t);
        const double Z = orbit.y[i][0], Phi = orbit.y[i][2];
        const double x = Z * Phi;
        if (!(x > 0.0)) continue;
        out.profile.r.push_back(r);
        out.profile.u.push_back(std::log(x) - 2.0 * t);
        out.profile.p.push_back(-Phi / r);
    }
    detail::fill_residuals(out.profile);

    // prefactor straight from the gradient: (u - u0)/r^expo -> A means
    // u' = A expo r^{expo-1}, i.e. A = -Phi / (expo r^expo)
    const std::size_t i_anchor = 2;  // deepest samples, already converged
    {
        const double r1 = out.profile.r[i_anchor];
        out.prefactor_fit = out.profile.p[i_anchor] * std::pow(r1, 1.0 - expo) / expo;
    }
    // u0 from a two-scale tail model u = u0 + A r^expo + B r on two samples
    {
        const double A = out.prefactor_fit;
        const std::size_t j = i_anchor, k = std::min(out.profile.size() - 1, i_anchor + 40);
        const double rj = out.profile.r[j], rk = out.profile.r[k];
        const double fj = out.profile.u[j] - A * std::pow(rj, expo);
        const double fk = out.profile.u[k] - A * std::pow(rk, expo);
        const double B = (fk - fj) / (rk - rj);
        out.u0_realized = fj - B * rj;
    }
    return out;
}

}  // namespace radsing

#endif
