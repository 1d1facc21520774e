#ifndef RADSING_SERIES_HPP
#define RADSING_SERIES_HPP

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "radsing/params.hpp"

namespace radsing {

// Dense truncated power series in one small quantity; index = power.
// All arithmetic is exact to the truncation order.
class TruncatedSeries {
public:
    TruncatedSeries() : c_(1, 0.0) {}
    explicit TruncatedSeries(std::size_t order, double c0 = 0.0) : c_(order + 1, 0.0) {
        c_[0] = c0;
    }
    static TruncatedSeries from_coeffs(std::vector<double> c) {
        TruncatedSeries s;
        s.c_ = std::move(c);
        return s;
    }

    std::size_t order() const { return c_.size() - 1; }
    double operator[](std::size_t k) const { return k < c_.size() ? c_[k] : 0.0; }
    double& at(std::size_t k) { return c_[k]; }
    const std::vector<double>& coeffs() const { return c_; }

    TruncatedSeries operator+(const TruncatedSeries& o) const {
        TruncatedSeries r(std::min(order(), o.order()));
        for (std::size_t k = 0; k < r.c_.size(); ++k) r.c_[k] = (*this)[k] + o[k];
        return r;
    }
    TruncatedSeries operator-(const TruncatedSeries& o) const {
        TruncatedSeries r(std::min(order(), o.order()));
        for (std::size_t k = 0; k < r.c_.size(); ++k) r.c_[k] = (*this)[k] - o[k];
        return r;
    }
    TruncatedSeries operator*(double a) const {
        TruncatedSeries r = *this;
        for (double& v : r.c_) v *= a;
        return r;
    }
    TruncatedSeries operator*(const TruncatedSeries& o) const {
        TruncatedSeries r(std::min(order(), o.order()));
        for (std::size_t k = 0; k < r.c_.size(); ++k) {
            double acc = 0.0;
            for (std::size_t j = 0; j <= k; ++j) acc += (*this)[j] * o[k - j];
            r.c_[k] = acc;
        }
        return r;
    }

    // Multiplication by the expansion variable: index shift up.
    TruncatedSeries shift_up() const {
        TruncatedSeries r(order());
        for (std::size_t k = order(); k >= 1; --k) r.c_[k] = c_[k - 1];
        r.c_[0] = 0.0;
        return r;
    }
    // Exact division by the variable; requires zero constant term.
    TruncatedSeries shift_down() const {
        TruncatedSeries r(order());
        for (std::size_t k = 0; k < order(); ++k) r.c_[k] = c_[k + 1];
        r.c_[order()] = 0.0;
        return r;
    }

    // 1 / S, requires S[0] != 0.
    TruncatedSeries reciprocal() const {
        TruncatedSeries r(order());
        const double inv0 = 1.0 / c_[0];
        r.c_[0] = inv0;
        for (std::size_t k = 1; k <= order(); ++k) {
            double acc = 0.0;
            for (std::size_t j = 1; j <= k; ++j) acc += c_[j] * r.c_[k - j];
            r.c_[k] = -inv0 * acc;
        }
        return r;
    }

    // F(G) with G[0] = 0, by Horner evaluation in series arithmetic.
    static TruncatedSeries compose(const TruncatedSeries& f, const TruncatedSeries& g) {
        const std::size_t n = std::min(f.order(), g.order());
        TruncatedSeries acc(n, 0.0);
        for (std::size_t k = f.order() + 1; k-- > 0;) {
            acc = acc * g;
            acc.c_[0] += f[k];
        }
        return acc;
    }

    // S^alpha for real alpha, requires S[0] > 0: S = c0 (1 + T) and a
    // binomial series in T.
    TruncatedSeries pow(double alpha) const {
        const std::size_t n = order();
        TruncatedSeries t = *this * (1.0 / c_[0]);
        t.c_[0] = 0.0;
        TruncatedSeries binom(n, 0.0);
        double coeff = 1.0;
        binom.c_[0] = 1.0;
        for (std::size_t k = 1; k <= n; ++k) {
            coeff *= (alpha - static_cast<double>(k - 1)) / static_cast<double>(k);
            binom.c_[k] = coeff;
        }
        return compose(binom, t) * std::pow(c_[0], alpha);
    }

    // ln S, requires S[0] > 0.
    TruncatedSeries log() const {
        const std::size_t n = order();
        TruncatedSeries t = *this * (1.0 / c_[0]);
        t.c_[0] = 0.0;
        TruncatedSeries ln1p(n, 0.0);
        for (std::size_t k = 1; k <= n; ++k)
            ln1p.c_[k] = (k % 2 == 1 ? 1.0 : -1.0) / static_cast<double>(k);
        TruncatedSeries r = compose(ln1p, t);
        r.c_[0] = std::log(c_[0]);
        return r;
    }

    double eval(double s) const {
        double acc = 0.0;
        for (std::size_t k = c_.size(); k-- > 0;) acc = acc * s + c_[k];
        return acc;
    }

private:
    std::vector<double> c_;
};

// Expansion of the eikonal-type solutions near the origin, q > 2:
//   u(r) = ln(M q^q / r^q) + a_1 r^{q-2} + ... + a_n r^{n(q-2)} (1 + o(1)).
// The chart coefficients A, B, C are stored in the internal M = 1
// normalization; a and b carry the rescaling to the requested M.
struct Expansion {
    Params params;
    int order = 0;
    std::vector<double> A, B, C;  // index 0 <-> order 1
    std::vector<double> a, b;
    double rescale_lambda = 1.0;  // M^{1/(q-2)}
    double rescale_shift = 0.0;   // (2/(q-2)) ln M
};

inline constexpr int kMaxExpansionOrder = 12;

// Order-by-order closure of the chart equation
//   dw/du = -w/q + (N-1)/(r e^{u/q}) + (w^q - 1)/w * e^{theta u},
// with w = 1 + sum A_k s^k in s = e^{-theta u}.  Each order k determines
// A_{k+1} from the residual with A_{k+1} zeroed, divided by q.
inline Expansion expand(const Params& prm, int n) {
    if (!(prm.q > 2.0)) throw WindowViolation("expansion requires q > 2");
    if (n < 1) throw InvalidParams("expansion order must be >= 1");
    if (n > kMaxExpansionOrder)
        throw OrderOverflow("expansion order capped at 12 in double precision");

    const double q = prm.q;
    const int N = prm.N;
    const double theta = (q - 2.0) / q;
    const std::size_t nw = static_cast<std::size_t>(n);

    std::vector<double> A(nw + 1, 0.0);  // A[0] unused; A[k] = coefficient of s^k

    auto build_residual = [&](std::size_t upto) -> TruncatedSeries {
        TruncatedSeries W(nw, 1.0);
        for (std::size_t j = 1; j <= upto; ++j) W.at(j) = A[j];

        TruncatedSeries B = W.reciprocal();
        TruncatedSeries Rhat(nw, 1.0);
        for (std::size_t j = 1; j <= nw; ++j) Rhat.at(j) = B[j] / (1.0 + j * (q - 2.0));
        TruncatedSeries C = Rhat.reciprocal();

        TruncatedSeries D = ((W.pow(q) - TruncatedSeries(nw, 1.0)) * B).shift_down();

        TruncatedSeries lhs(nw, 0.0);
        for (std::size_t j = 1; j <= nw; ++j) lhs.at(j) = -theta * j * W[j];

        TruncatedSeries rhs = W * (-1.0 / q) + C * ((N - 1) / q) + D;
        return lhs - rhs;
    };

    for (std::size_t k = 0; k < nw; ++k) {
        TruncatedSeries res = build_residual(k);
        A[k + 1] = res[k] / q;
    }

    // chart series with every order resolved
    TruncatedSeries W(nw, 1.0);
    for (std::size_t j = 1; j <= nw; ++j) W.at(j) = A[j];
    TruncatedSeries B = W.reciprocal();
    TruncatedSeries Rhat(nw, 1.0);
    for (std::size_t j = 1; j <= nw; ++j) Rhat.at(j) = B[j] / (1.0 + j * (q - 2.0));
    TruncatedSeries C = Rhat.reciprocal();

    // invert r(u) = q e^{-u/q} Rhat(s): with sigma = r^{q-2} and
    // w = (r/q) h(sigma), iterate h = 1 / Rhat(sigma q^{2-q} h^{q-2}).
    TruncatedSeries h(nw, 1.0);
    for (std::size_t it = 0; it <= nw; ++it) {
        TruncatedSeries G = (h.pow(q - 2.0) * std::pow(q, 2.0 - q)).shift_up();
        h = TruncatedSeries::compose(Rhat, G).reciprocal();
    }
    TruncatedSeries a_series = h.log() * (-q);
    TruncatedSeries b_series = h.reciprocal();

    Expansion e;
    e.params = prm;
    e.order = n;
    e.rescale_lambda = std::pow(prm.M, 1.0 / (q - 2.0));
    e.rescale_shift = 2.0 / (q - 2.0) * std::log(prm.M);
    double mk = 1.0;
    for (std::size_t k = 1; k <= nw; ++k) {
        e.A.push_back(A[k]);
        e.B.push_back(B[k]);
        e.C.push_back(C[k]);
        mk /= prm.M;
        e.a.push_back(a_series[k] * mk);
        e.b.push_back(b_series[k] * mk);
    }
    return e;
}

struct ExpansionValue {
    double u = 0.0;
    double up = 0.0;
    double upp = 0.0;
};

// Termwise evaluation of u, u', u'' at radius r using the first `use_order`
// terms (all by default).  Rejects radii where the leading correction is no
// longer small.
inline ExpansionValue evaluate_expansion(const Expansion& e, double r, int use_order = -1) {
    if (!(r > 0.0)) throw InvalidParams("evaluate_expansion requires r > 0");
    const double q = e.params.q;
    const int m = use_order < 0 ? e.order : std::min(use_order, e.order);
    if (!e.a.empty() && std::abs(e.a[0]) * std::pow(r, q - 2.0) >= 0.1)
        throw RadiusTooLarge("|a_1| r^{q-2} >= 0.1: expansion unreliable at this radius");

    const double Lambda = std::log(e.params.M) + q * std::log(q);
    ExpansionValue v;
    v.u = Lambda - q * std::log(r);
    v.up = -q / r;
    v.upp = q / (r * r);
    for (int k = 1; k <= m; ++k) {
        const double ek = k * (q - 2.0);
        const double rk = std::pow(r, ek);
        v.u += e.a[k - 1] * rk;
        v.up += e.a[k - 1] * ek * rk / r;
        v.upp += e.a[k - 1] * ek * (ek - 1.0) * rk / (r * r);
    }
    return v;
}

// Arithmetic self-check against brute-force convolution on random inputs.
struct SeriesSelfTest {
    bool ok = true;
    double max_reciprocal_err = 0.0;
    double max_power_err = 0.0;
    double max_compose_err = 0.0;
};

inline SeriesSelfTest series_self_test(unsigned seed = 20260810) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> coef(-0.5, 0.5);
    SeriesSelfTest rep;
    constexpr std::size_t n = 6;

    auto conv = [&](const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<double> c(n + 1, 0.0);
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t j = 0; i + j <= n; ++j) c[i + j] += a[i] * b[j];
        return c;
    };

    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> a(n + 1);
        a[0] = 1.0 + std::abs(coef(rng));
        for (std::size_t k = 1; k <= n; ++k) a[k] = coef(rng);
        TruncatedSeries S = TruncatedSeries::from_coeffs(a);

        // reciprocal: S * (1/S) = 1 by brute-force convolution
        auto prod = conv(a, S.reciprocal().coeffs());
        for (std::size_t k = 0; k <= n; ++k) {
            const double want = k == 0 ? 1.0 : 0.0;
            rep.max_reciprocal_err = std::max(rep.max_reciprocal_err, std::abs(prod[k] - want));
        }

        // power: S^3 by repeated convolution vs pow(3.0)
        auto s3 = conv(conv(a, a), a);
        auto p3 = S.pow(3.0).coeffs();
        for (std::size_t k = 0; k <= n; ++k)
            rep.max_power_err = std::max(rep.max_power_err, std::abs(s3[k] - p3[k]));

        // composition: brute-force Horner with convolution
        std::vector<double> g(n + 1, 0.0);
        for (std::size_t k = 1; k <= n; ++k) g[k] = coef(rng);
        std::vector<double> acc(n + 1, 0.0);
        for (std::size_t k = n + 1; k-- > 0;) {
            acc = conv(acc, g);
            acc[0] += a[k];
        }
        auto comp = TruncatedSeries::compose(S, TruncatedSeries::from_coeffs(g)).coeffs();
        for (std::size_t k = 0; k <= n; ++k)
            rep.max_compose_err = std::max(rep.max_compose_err, std::abs(acc[k] - comp[k]));
    }
    rep.ok = rep.max_reciprocal_err < 1e-13 && rep.max_power_err < 1e-13 &&
             rep.max_compose_err < 1e-13;
    return rep;
}

}  // namespace radsing

#endif
