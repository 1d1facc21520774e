#ifndef RADSING_ODE_HPP
#define RADSING_ODE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "radsing/params.hpp"
#include "radsing/state.hpp"

namespace radsing {

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4) with the classical 4th-order continuous extension.
// Small fixed dimensions only; state is std::array.
// ---------------------------------------------------------------------------

template <std::size_t Dim>
struct DenseStep {
    double s0 = 0.0, s1 = 0.0;
    std::array<double, Dim> c1{}, c2{}, c3{}, c4{}, c5{};

    double h() const { return s1 - s0; }

    std::array<double, Dim> eval(double s) const {
        const double th = (s - s0) / (s1 - s0);
        const double th1 = 1.0 - th;
        std::array<double, Dim> y{};
        for (std::size_t i = 0; i < Dim; ++i)
            y[i] = c1[i] + th * (c2[i] + th1 * (c3[i] + th * (c4[i] + th1 * c5[i])));
        return y;
    }
};

enum class StepOutcome { Continue, Stop, Underflow };

// Default error weight: sk_i = abs + rel * max(|y0_i|, |y1_i|).
struct MixedErrorWeight {
    double rel_tol, abs_tol;
    double operator()(double, std::size_t, double a, double b) const {
        return abs_tol + rel_tol * std::max(std::abs(a), std::abs(b));
    }
};

// Integrates dy/ds = f(s, y) from s0 toward s1 (either direction).  The
// observer sees every accepted step with its dense interpolant and may stop
// the run.  `weight(s, i, y0_i, y1_i)` supplies the per-component error
// scale.  Returns the outcome of the last step.
template <std::size_t Dim, class Rhs, class Observer, class ErrWeight>
StepOutcome dp5_integrate_weighted(Rhs&& f, double s0, std::array<double, Dim> y, double s1,
                                   ErrWeight&& weight, std::size_t max_steps, double max_step,
                                   Observer&& observe) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double d1 = -12715105075.0 / 11282082432.0,
                            d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0,
                            d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
    static constexpr double c2 = 1.0 / 5, c3c = 3.0 / 10, c4c = 4.0 / 5, c5c = 8.0 / 9;

    using State = std::array<double, Dim>;
    const double dir = sign(s1 - s0);
    if (dir == 0.0) return StepOutcome::Stop;

    State k1{}, k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, yt{}, y1{};
    f(s0, y, k1);

    // initial step by a weighted trial step (Hairer's hinit scheme)
    double h;
    {
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < Dim; ++i) {
            const double sk = weight(s0, i, y[i], y[i]);
            d0 += (y[i] / sk) * (y[i] / sk);
            d1 += (k1[i] / sk) * (k1[i] / sk);
        }
        d0 = std::sqrt(d0 / Dim);
        d1 = std::sqrt(d1 / Dim);
        double h0 = (d0 > 1e-10 && d1 > 1e-10) ? 0.01 * d0 / d1 : 1e-6;
        h0 = std::min(h0, std::abs(s1 - s0));
        State ytrial{}, ftrial{};
        for (std::size_t i = 0; i < Dim; ++i) ytrial[i] = y[i] + dir * h0 * k1[i];
        f(s0 + dir * h0, ytrial, ftrial);
        double d2 = 0.0;
        for (std::size_t i = 0; i < Dim; ++i) {
            const double sk = weight(s0, i, y[i], ytrial[i]);
            d2 += ((ftrial[i] - k1[i]) / sk) * ((ftrial[i] - k1[i]) / sk);
        }
        d2 = std::sqrt(d2 / Dim) / h0;
        const double dm = std::max(d1, d2);
        const double h1 = dm > 1e-15 ? std::pow(0.01 / dm, 0.2) : 100.0 * h0;
        h = std::min({100.0 * h0, h1, std::abs(s1 - s0)});
        if (max_step > 0) h = std::min(h, max_step);
        h = std::max(h, 1e-14 * std::max(1.0, std::abs(s0)));
        h *= dir;
    }

    double s = s0;
    for (std::size_t step = 0; step < max_steps; ++step) {
        if ((s - s1) * dir >= 0.0) return StepOutcome::Stop;
        if ((s + h - s1) * dir > 0.0) h = s1 - s;
        if (std::abs(h) < 16.0 * std::numeric_limits<double>::epsilon() *
                              std::max(1.0, std::abs(s)))
            return StepOutcome::Underflow;

        for (std::size_t i = 0; i < Dim; ++i) yt[i] = y[i] + h * a21 * k1[i];
        f(s + c2 * h, yt, k2);
        for (std::size_t i = 0; i < Dim; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        f(s + c3c * h, yt, k3);
        for (std::size_t i = 0; i < Dim; ++i)
            yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(s + c4c * h, yt, k4);
        for (std::size_t i = 0; i < Dim; ++i)
            yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(s + c5c * h, yt, k5);
        for (std::size_t i = 0; i < Dim; ++i)
            yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                a65 * k5[i]);
        f(s + h, yt, k6);
        for (std::size_t i = 0; i < Dim; ++i)
            y1[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        f(s + h, y1, k7);

        double err = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < Dim; ++i) {
            const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                   e6 * k6[i] + e7 * k7[i]);
            const double sk = weight(s + h, i, y[i], y1[i]);
            err += (ei / sk) * (ei / sk);
            finite = finite && std::isfinite(y1[i]);
        }
        err = std::sqrt(err / Dim);
        if (!finite) err = 1e6;

        if (err <= 1.0) {
            DenseStep<Dim> dense;
            dense.s0 = s;
            dense.s1 = s + h;
            for (std::size_t i = 0; i < Dim; ++i) {
                const double dy = y1[i] - y[i];
                dense.c1[i] = y[i];
                dense.c2[i] = dy;
                dense.c3[i] = h * k1[i] - dy;
                dense.c4[i] = dy - h * k7[i] - dense.c3[i];
                dense.c5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                   d6 * k6[i] + d7 * k7[i]);
            }
            s += h;
            y = y1;
            k1 = k7;  // FSAL
            if (!observe(dense, y, k1)) return StepOutcome::Stop;
            double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
            h *= std::min(5.0, std::max(0.2, fac));
            if (max_step > 0 && std::abs(h) > max_step) h = dir * max_step;
        } else {
            h *= std::min(1.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
        }
    }
    return StepOutcome::Stop;
}

template <std::size_t Dim, class Rhs, class Observer>
StepOutcome dp5_integrate(Rhs&& f, double s0, std::array<double, Dim> y, double s1,
                          double rel_tol, double abs_tol, std::size_t max_steps,
                          double max_step, Observer&& observe) {
    return dp5_integrate_weighted<Dim>(std::forward<Rhs>(f), s0, y, s1,
                                       MixedErrorWeight{rel_tol, abs_tol}, max_steps, max_step,
                                       std::forward<Observer>(observe));
}

// ---------------------------------------------------------------------------
// Radial integration layer
// ---------------------------------------------------------------------------

// du/dr = p,  dp/dr = -(N-1)p/r + M|p|^q - e^u.
inline std::array<double, 2> rhs_radial(const Params& prm, const RadialState& s) {
    const double dp = -(prm.N - 1) * s.p / s.r + prm.M * abs_pow(s.p, prm.q) - std::exp(s.u);
    return {s.p, dp};
}

struct Event {
    std::string label;
    std::function<double(double r, double u, double p)> fn;
    int direction = 0;        // +1 rising, -1 falling, 0 any crossing
    double root_tol = 1e-12;  // absolute tolerance on the located radius
    bool terminal = true;
};

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    std::size_t max_steps = 2000000;
    double blowup_threshold = 1e12;  // on |u| + |p|
    double max_step = 0.0;           // cap on the step in the active variable; 0 = none
    std::vector<Event> events;
};

enum class TerminationKind { ReachedBound, BlowUpDetected, EventHit, StepUnderflow };

struct Termination {
    TerminationKind kind = TerminationKind::ReachedBound;
    double r_star = 0.0;  // blow-up or event radius where applicable
    std::string label;    // event label
};

inline std::string to_string(TerminationKind k) {
    switch (k) {
        case TerminationKind::ReachedBound: return "ReachedBound";
        case TerminationKind::BlowUpDetected: return "BlowUpDetected";
        case TerminationKind::EventHit: return "EventHit";
        case TerminationKind::StepUnderflow: return "StepUnderflow";
    }
    return "?";
}

enum class Direction { Inward, Outward };

// A sampled trajectory with strictly increasing radii.  `residual` is the
// audit column: the equation residual with u'' reconstructed by finite
// differences of p across neighboring samples.
struct Profile {
    Params params;
    Direction direction = Direction::Outward;
    Termination termination;
    std::vector<double> r, u, p, residual;
    std::size_t steps_accepted = 0, steps_rejected = 0;

    std::size_t size() const { return r.size(); }
    RadialState front() const { return {r.front(), u.front(), p.front()}; }
    RadialState back() const { return {r.back(), u.back(), p.back()}; }

    double r_min() const { return r.front(); }
    double r_max() const { return r.back(); }

    // Cubic Hermite interpolation between the bracketing samples, using the
    // equation itself for the p-slopes.
    RadialState state_at(double rq) const {
        if (!(rq >= r.front() && rq <= r.back()))
            throw InvalidParams("state_at: radius outside the sampled range");
        auto it = std::lower_bound(r.begin(), r.end(), rq);
        std::size_t j = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - r.begin(), 1),
                                              r.size() - 1);
        const std::size_t i = j - 1;
        const double h = r[j] - r[i];
        const double th = (rq - r[i]) / h;
        auto hermite = [&](double y0, double y1, double m0, double m1) {
            const double t2 = th * th, t3 = t2 * th;
            return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + th) * h * m0 +
                   (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * m1;
        };
        auto d0 = rhs_radial(params, {r[i], u[i], p[i]});
        auto d1 = rhs_radial(params, {r[j], u[j], p[j]});
        return {rq, hermite(u[i], u[j], d0[0], d1[0]), hermite(p[i], p[j], d0[1], d1[1])};
    }
};

struct EventHitRecord {
    std::string label;
    double r = 0.0;
    RadialState state;
};

namespace detail {

// First-derivative weights at xc from the Lagrange polynomial through xs.
template <std::size_t K>
std::array<double, K> lagrange_derivative_weights(const std::array<double, K>& xs, double xc) {
    std::array<double, K> w{};
    for (std::size_t j = 0; j < K; ++j) {
        double denom = 1.0;
        for (std::size_t m = 0; m < K; ++m)
            if (m != j) denom *= xs[j] - xs[m];
        double num = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            if (k == j) continue;
            double term = 1.0;
            for (std::size_t m = 0; m < K; ++m)
                if (m != j && m != k) term *= xc - xs[m];
            num += term;
        }
        w[j] = num / denom;
    }
    return w;
}

inline void fill_residuals(Profile& prof) {
    const std::size_t n = prof.size();
    prof.residual.assign(n, 0.0);
    if (n < 5) return;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        // 5-point window of samples around i, clamped at the ends
        std::size_t lo = i >= 2 ? i - 2 : 0;
        if (lo + 4 >= n) lo = n - 5;
        std::array<double, 5> xs{}, ps{};
        for (std::size_t k = 0; k < 5; ++k) {
            xs[k] = prof.r[lo + k];
            ps[k] = prof.p[lo + k];
        }
        const auto w = lagrange_derivative_weights(xs, prof.r[i]);
        double upp = 0.0;
        for (std::size_t k = 0; k < 5; ++k) upp += w[k] * ps[k];
        prof.residual[i] =
            std::abs(-upp - (prof.params.N - 1) * prof.p[i] / prof.r[i] +
                     prof.params.M * abs_pow(prof.p[i], prof.params.q) - std::exp(prof.u[i]));
    }
    prof.residual[0] = prof.residual[1];
    prof.residual[n - 1] = prof.residual[n - 2];
}

}  // namespace detail

// Adaptive integration of the radial equation from start.r to r_end.  Runs
// spanning more than three decades are integrated in t = ln r, where the
// singular behaviors are polynomially mild; the samples are mapped back to r.
inline Profile integrate(const Params& prm, const RadialState& start, double r_end,
                         const IntegratorConfig& cfg = {}) {
    detail::require_radial(start);
    if (!(r_end > 0.0) || r_end == start.r)
        throw InvalidParams("integrate requires r_end > 0 distinct from start.r");

    const double ratio = std::max(r_end / start.r, start.r / r_end);
    const bool use_log = ratio > 1e3;
    const bool outward = r_end > start.r;

    Profile prof;
    prof.params = prm;
    prof.direction = outward ? Direction::Outward : Direction::Inward;

    std::vector<double> rs, us, ps;
    auto push_sample = [&](double r, double u, double p) {
        rs.push_back(r);
        us.push_back(u);
        ps.push_back(p);
    };

    // state mapping between the integration variable and (r, u, p)
    auto to_radial = [&](double s, const std::array<double, 2>& y) -> RadialState {
        if (use_log) return {std::exp(s), y[0], y[1] * std::exp(-s)};
        return {s, y[0], y[1]};
    };

    auto rhs = [&](double s, const std::array<double, 2>& y, std::array<double, 2>& dy) {
        if (use_log) {
            // U_t = W,  W_t = -(N-2)W - e^{2t+U} + M e^{(2-q)t}|W|^q
            dy[0] = y[1];
            dy[1] = -(prm.N - 2) * y[1] - std::exp(2.0 * s + y[0]) +
                    prm.M * std::exp((2.0 - prm.q) * s) * abs_pow(y[1], prm.q);
        } else {
            auto d = rhs_radial(prm, {s, y[0], y[1]});
            dy[0] = d[0];
            dy[1] = d[1];
        }
    };

    double s0, s1;
    std::array<double, 2> y0{};
    if (use_log) {
        s0 = std::log(start.r);
        s1 = std::log(r_end);
        y0 = {start.u, start.r * start.p};
    } else {
        s0 = start.r;
        s1 = r_end;
        y0 = {start.u, start.p};
    }

    {
        auto st = to_radial(s0, y0);
        push_sample(st.r, st.u, st.p);
    }

    auto blow_g = [&](const std::array<double, 2>& y, double s) {
        auto st = to_radial(s, y);
        return std::abs(st.u) + std::abs(st.p) - cfg.blowup_threshold;
    };

    std::vector<double> event_prev(cfg.events.size(), std::numeric_limits<double>::quiet_NaN());
    {
        auto st = to_radial(s0, y0);
        for (std::size_t i = 0; i < cfg.events.size(); ++i)
            event_prev[i] = cfg.events[i].fn(st.r, st.u, st.p);
    }

    prof.termination.kind = TerminationKind::ReachedBound;
    std::size_t accepted = 0;

    auto observer = [&](const DenseStep<2>& dense, const std::array<double, 2>& y,
                        const std::array<double, 2>&) -> bool {
        ++accepted;
        auto st = to_radial(dense.s1, y);

        // blow-up: bracket the threshold crossing on the dense output
        if (blow_g(y, dense.s1) >= 0.0) {
            auto gmap = [&](double s) { return blow_g(dense.eval(s), s); };
            double a = dense.s0, b = dense.s1;
            double ga = gmap(a);
            const double rtol = 1e-8;
            for (int it = 0; it < 200; ++it) {
                const double ra = use_log ? std::exp(a) : a;
                const double rb = use_log ? std::exp(b) : b;
                if (std::abs(rb - ra) <= rtol * std::max(std::abs(ra), std::abs(rb))) break;
                const double m = 0.5 * (a + b);
                const double gm = gmap(m);
                if ((ga <= 0) == (gm <= 0)) {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
            }
            const double sc = 0.5 * (a + b);
            auto cross = to_radial(sc, dense.eval(sc));
            push_sample(cross.r, cross.u, cross.p);
            prof.termination = {TerminationKind::BlowUpDetected, cross.r, ""};
            return false;
        }

        // events on the dense output
        for (std::size_t i = 0; i < cfg.events.size(); ++i) {
            const Event& ev = cfg.events[i];
            const double v1 = ev.fn(st.r, st.u, st.p);
            const double v0 = event_prev[i];
            const bool crossed = std::isfinite(v0) && v0 * v1 < 0.0 &&
                                 (ev.direction == 0 || (ev.direction > 0 ? v1 > v0 : v1 < v0));
            event_prev[i] = v1;
            if (!crossed) continue;
            auto gmap = [&](double s) {
                auto xx = to_radial(s, dense.eval(s));
                return ev.fn(xx.r, xx.u, xx.p);
            };
            double a = dense.s0, b = dense.s1;
            double ga = gmap(a);
            for (int it = 0; it < 200; ++it) {
                const double ra = use_log ? std::exp(a) : a;
                const double rb = use_log ? std::exp(b) : b;
                if (std::abs(rb - ra) <= ev.root_tol) break;
                const double m = 0.5 * (a + b);
                const double gm = gmap(m);
                if ((ga <= 0) == (gm <= 0)) {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
            }
            const double sc = 0.5 * (a + b);
            auto hit = to_radial(sc, dense.eval(sc));
            if (ev.terminal) {
                push_sample(hit.r, hit.u, hit.p);
                prof.termination = {TerminationKind::EventHit, hit.r, ev.label};
                return false;
            }
        }

        push_sample(st.r, st.u, st.p);
        return true;
    };

    // in the log variable the state is (u, r u'); the absolute tolerance is
    // meant for (u, u'), so the second component's scale carries a factor r
    auto weight = [&](double s, std::size_t i, double a, double b) {
        const double abs_scale = (use_log && i == 1) ? cfg.abs_tol * std::exp(s) : cfg.abs_tol;
        return abs_scale + cfg.rel_tol * std::max(std::abs(a), std::abs(b));
    };
    auto outcome = dp5_integrate_weighted<2>(rhs, s0, y0, s1, weight, cfg.max_steps,
                                             cfg.max_step, observer);
    if (outcome == StepOutcome::Underflow)
        prof.termination = {TerminationKind::StepUnderflow, rs.back(), ""};

    prof.steps_accepted = accepted;
    if (!outward) {
        std::reverse(rs.begin(), rs.end());
        std::reverse(us.begin(), us.end());
        std::reverse(ps.begin(), ps.end());
    }
    prof.r = std::move(rs);
    prof.u = std::move(us);
    prof.p = std::move(ps);
    detail::fill_residuals(prof);
    return prof;
}

// Taylor seed of the regular solution u(0) = u0, u'(0) = 0 at radius eps.
inline RadialState seed_regular(const Params& prm, double u0, double eps) {
    if (!(eps > 0.0)) throw InvalidParams("seed_regular requires eps > 0");
    const double x0 = std::exp(u0) * eps * eps;
    if (!(x0 < 0.01))
        throw SeedRadiusTooLarge("seed radius too large: e^{u0} eps^2 = " + std::to_string(x0) +
                                 " >= 0.01");
    return RadialState{eps, u0 - x0 / (2.0 * prm.N), -std::exp(u0) * eps / prm.N};
}

// Root of an event function along a live run from `start` toward r_end.
inline EventHitRecord find_event(const Params& prm, const RadialState& start, double r_end,
                                 const IntegratorConfig& cfg, Event event) {
    IntegratorConfig c = cfg;
    event.terminal = true;
    c.events.push_back(event);
    Profile prof = integrate(prm, start, r_end, c);
    if (prof.termination.kind != TerminationKind::EventHit ||
        prof.termination.label != event.label)
        throw EventNotBracketed("event '" + event.label + "' does not change sign on the run");
    const double rhit = prof.termination.r_star;
    const RadialState st = rhit <= prof.r_min() ? prof.front()
                           : rhit >= prof.r_max() ? prof.back()
                                                  : prof.state_at(rhit);
    return EventHitRecord{event.label, rhit, st};
}

// Root of an event function on a stored profile, by bisecting the profile's
// Hermite dense output between the bracketing samples.
inline EventHitRecord find_event(const Profile& prof, const Event& event) {
    const std::size_t n = prof.size();
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < n; ++i) {
        const double v = event.fn(prof.r[i], prof.u[i], prof.p[i]);
        const bool crossed = i > 0 && std::isfinite(prev) && prev * v < 0.0 &&
                             (event.direction == 0 ||
                              (event.direction > 0 ? v > prev : v < prev));
        if (crossed) {
            double a = prof.r[i - 1], b = prof.r[i];
            auto g = [&](double rr) {
                auto st = prof.state_at(rr);
                return event.fn(st.r, st.u, st.p);
            };
            double ga = g(a);
            for (int it = 0; it < 200 && std::abs(b - a) > event.root_tol; ++it) {
                const double m = 0.5 * (a + b);
                const double gm = g(m);
                if ((ga <= 0) == (gm <= 0)) {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
            }
            const double root = 0.5 * (a + b);
            return EventHitRecord{event.label, root, prof.state_at(root)};
        }
        prev = v;
    }
    throw EventNotBracketed("event '" + event.label + "' does not change sign on the profile");
}

}  // namespace radsing

#endif
