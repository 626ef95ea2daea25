#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <list>
#include <mutex>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "gwi/errors.hpp"

namespace gwi {

using Complex = std::complex<double>;

namespace detail {

/// Thread-safe log-gamma for positive arguments.
inline double log_gamma(double x) {
#if defined(__GLIBC__) || defined(__linux__)
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

/// Compensated accumulator.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v) {
        double y = v - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes (computed, not typed in, so any order is available).
// ---------------------------------------------------------------------------

struct GaussRule {
    std::vector<double> nodes;    // on (-1, 1)
    std::vector<double> weights;
};

inline GaussRule make_gauss_legendre(int n) {
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton on P_n with the Tricomi-style initial guess.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.nodes[i] = x;
        r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

inline const GaussRule& gauss_legendre(int n) {
    static std::mutex mu;
    static std::list<std::pair<int, GaussRule>> cache;  // stable addresses
    std::scoped_lock lock(mu);
    for (auto& [order, rule] : cache)
        if (order == n) return rule;
    cache.emplace_back(n, make_gauss_legendre(n));
    return cache.back().second;
}

/// Integrate f over [a, b] with a fixed n-point Gauss-Legendre rule.
template <class F>
double gauss_panel(F&& f, double a, double b, const GaussRule& rule) {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return acc * half;
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod 7-15 (QUADPACK constants).
// ---------------------------------------------------------------------------

inline constexpr double kGK15Nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kGK15WeightsK[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kGK15WeightsG[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

template <class F>
QuadResult gk15(F&& f, double a, double b) {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double fk = 0.0, fg = 0.0;
    for (int i = 0; i < 8; ++i) {
        double v;
        if (i == 7) {
            v = f(mid);
            fk += kGK15WeightsK[7] * v;
            fg += kGK15WeightsG[3] * v;
        } else {
            double dx = half * kGK15Nodes[i];
            v = f(mid - dx) + f(mid + dx);
            fk += kGK15WeightsK[i] * v;
            if (i % 2 == 1) fg += kGK15WeightsG[i / 2] * v;
        }
    }
    QuadResult r;
    r.value = fk * half;
    r.error = std::abs(fk - fg) * std::abs(half);
    return r;
}

/// Adaptive bisection driver.  Relative tolerance is applied to the running
/// whole-interval estimate.
template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, double abs_tol = 1e-12,
                              double rel_tol = 1e-10, int max_intervals = 4000) {
    struct Piece {
        double a, b, value, error;
    };
    QuadResult first = gk15(f, a, b);
    std::vector<Piece> pieces{{a, b, first.value, first.error}};
    double total = first.value, total_err = first.error;
    int splits = 0;
    while (total_err > std::max(abs_tol, rel_tol * std::abs(total)) && splits < max_intervals) {
        std::size_t worst = 0;
        for (std::size_t i = 1; i < pieces.size(); ++i)
            if (pieces[i].error > pieces[worst].error) worst = i;
        Piece p = pieces[worst];
        double m = 0.5 * (p.a + p.b);
        if (m <= p.a || m >= p.b) break;  // interval exhausted at double precision
        QuadResult l = gk15(f, p.a, m), r = gk15(f, m, p.b);
        total += l.value + r.value - p.value;
        total_err += l.error + r.error - p.error;
        pieces[worst] = {p.a, m, l.value, l.error};
        pieces.push_back({m, p.b, r.value, r.error});
        ++splits;
    }
    return {total, total_err};
}

// ---------------------------------------------------------------------------
// Radix-2 complex FFT (in place).  Sizes used here are small enough that a
// textbook iterative transform is plenty.
// ---------------------------------------------------------------------------

inline void fft_radix2(std::vector<Complex>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw InvalidArgument("fft size must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        Complex wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            Complex w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                Complex u = a[i + k];
                Complex v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Distribution helpers.
// ---------------------------------------------------------------------------

/// Standard normal CDF.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Inverse standard normal CDF via bisection refined by Newton.  No magic
/// constants; precise to ~1e-13 which is far below any use here.
inline double inv_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("inv_normal_cdf: p outside (0,1)");
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 80; ++i) {
        double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < p ? lo : hi) = mid;
    }
    double z = 0.5 * (lo + hi);
    for (int i = 0; i < 4; ++i) {
        double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
        if (pdf < 1e-300) break;
        z -= (normal_cdf(z) - p) / pdf;
    }
    return z;
}

/// Regularized lower incomplete gamma P(a, x) (series / continued fraction).
inline double gamma_p(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw InvalidArgument("gamma_p: bad arguments");
    if (x == 0.0) return 0.0;
    double log_pre = a * std::log(x) - x - log_gamma(a);
    if (x < a + 1.0) {
        double term = 1.0 / a, sum = term;
        for (int n = 1; n < 10000; ++n) {
            term *= x / (a + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-16) break;
        }
        return std::exp(log_pre) * sum;
    }
    // Lentz continued fraction for Q(a, x).
    double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 10000; ++i) {
        double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return 1.0 - std::exp(log_pre) * h;
}

inline double chi2_cdf(double x, double dof) { return gamma_p(0.5 * dof, 0.5 * x); }

// ---------------------------------------------------------------------------
// Least squares line fit.
// ---------------------------------------------------------------------------

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

inline LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw InvalidArgument("fit_line: need at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    double den = n * sxx - sx * sx;
    if (std::abs(den) < 1e-14 * std::max(1.0, sxx * n))
        throw InvalidArgument("fit_line: degenerate abscissae");
    LineFit f;
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

}  // namespace detail
}  // namespace gwi
