#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "gwi/errors.hpp"
#include "gwi/models.hpp"
#include "gwi/numerics.hpp"

namespace gwi {

// ---------------------------------------------------------------------------
// PowerSeries: finite coefficient vector with explicit residual tail mass.
// ---------------------------------------------------------------------------

struct PowerSeries {
    std::vector<double> coeffs;
    double tail_mass = 0.0;
    std::size_t n_points = 0;   // extraction size N
    double radius = 0.0;        // extraction radius r
    double trunc_bound = 0.0;   // uncertainty inherited from the evaluator (product truncation etc.)
    double worst_negative = 0.0;  // most negative raw coefficient before clamping
    double max_imag = 0.0;        // extraction noise telemetry
};

struct TailBracket {
    double lo = 0.0;
    double hi = 0.0;
};

/// Rigorous bracket for P(X > x): [suffix mass, suffix mass + tail mass],
/// widened by the evaluator's truncation bound.
inline TailBracket exact_tail(const PowerSeries& s, long x) {
    if (x >= static_cast<long>(s.coeffs.size()))
        throw OutOfRange("exact_tail: x >= stored series length");
    double suffix = 0.0;
    detail::KahanSum ks;
    for (long k = static_cast<long>(s.coeffs.size()) - 1; k > x; --k) ks.add(s.coeffs[static_cast<std::size_t>(k)]);
    suffix = ks.value();
    TailBracket b;
    b.lo = std::max(0.0, suffix - s.trunc_bound);
    b.hi = std::min(1.0, suffix + s.tail_mass + s.trunc_bound);
    return b;
}

/// Point value of P(X > x) = 1 - sum_{k <= x} c_k (the common tail mass is
/// included automatically).
inline double tail_value(const PowerSeries& s, long x) {
    if (x < 0) return 1.0;
    if (x >= static_cast<long>(s.coeffs.size()))
        throw OutOfRange("tail_value: x >= stored series length");
    detail::KahanSum ks;
    for (long k = 0; k <= x; ++k) ks.add(s.coeffs[static_cast<std::size_t>(k)]);
    return std::max(0.0, 1.0 - ks.value());
}

// ---------------------------------------------------------------------------
// Offspring pgf iteration f_k, memoized along one evaluation point.
// ---------------------------------------------------------------------------

struct FIteration {
    double x = 0.0;
    std::vector<double> gaps;  // gaps[k] = 1 - f_k(x)

    FIteration() = default;
    explicit FIteration(double x0) : x(x0) { gaps.push_back(1.0 - x0); }

    void extend(const Model& m, std::size_t k) {
        while (gaps.size() <= k) gaps.push_back(one_minus_f_gap(m, gaps.back()));
    }
    double r(const Model& m, std::size_t k) {
        extend(m, k);
        return gaps[k];
    }
    double f(const Model& m, std::size_t k) { return 1.0 - r(m, k); }
};

/// k-fold composition f_k(x) for real x in [0, 1].
inline double iterate_f(const Model& m, std::size_t k, double x) {
    if (x < 0.0 || x > 1.0) throw InvalidArgument("iterate_f: x outside [0,1] (use the complex overload)");
    double R = 1.0 - x;
    for (std::size_t i = 0; i < k; ++i) R = one_minus_f_gap(m, R);
    return 1.0 - R;
}

/// k-fold composition for complex |z| <= 1.
inline Complex iterate_f(const Model& m, std::size_t k, Complex z) {
    Complex W = Complex(1.0) - z;
    for (std::size_t i = 0; i < k; ++i) W = one_minus_f_gap(m, W);
    return Complex(1.0) - W;
}

// ---------------------------------------------------------------------------
// Total progeny pgf: the minimal solution of h = x f(h).
// Iterated in gap form H = 1 - h:  H <- (1-x) + x * (1 - f(1-H)).
// ---------------------------------------------------------------------------

inline double total_progeny_pgf(const Model& m, double x, double tol = 1e-13,
                                long max_iter = 4'000'000) {
    if (x < 0.0 || x > 1.0) throw InvalidArgument("total_progeny_pgf: x outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0 && !is_tabulated(m)) return 1.0;  // critical families: T finite a.s.
    double H = 1.0;
    for (long i = 0; i < max_iter; ++i) {
        double Hn = (1.0 - x) + x * one_minus_f_gap(m, H);
        double dh = std::abs(H - Hn);
        H = Hn;
        if (dh <= tol * std::max(H, 1e-12)) return 1.0 - H;
    }
    throw NonConvergence("total_progeny_pgf: fixed point did not settle",
                         std::abs(H - ((1.0 - x) + x * one_minus_f_gap(m, H))));
}

/// Complex variant: secant iteration on psi(H) = (1-z) + z(1-f(1-H)) - H with
/// plain fixed-point fallback.  `warm` seeds the solve (useful on grids).
inline Complex total_progeny_pgf(const Model& m, Complex z, Complex warm_gap = Complex(1.0, 0.0),
                                 double tol = 1e-13, long max_iter = 400'000) {
    auto psi = [&](Complex H) { return (Complex(1.0) - z) + z * one_minus_f_gap(m, H) - H; };
    Complex h0 = warm_gap;
    Complex h1 = h0 - psi(h0);  // one fixed-point step
    Complex f0 = psi(h0), f1 = psi(h1);
    for (int i = 0; i < 80; ++i) {
        if (std::abs(f1) < tol) return Complex(1.0) - h1;
        Complex denom = f1 - f0;
        if (std::abs(denom) < 1e-300) break;
        Complex h2 = h1 - f1 * (h1 - h0) / denom;
        if (!(std::isfinite(h2.real()) && std::isfinite(h2.imag()))) break;
        if (std::abs(h2) > 4.0) break;
        h0 = h1;
        f0 = f1;
        h1 = h2;
        f1 = psi(h1);
    }
    // fallback: damped fixed point, guaranteed for |z| < 1
    Complex H = warm_gap;
    for (long i = 0; i < max_iter; ++i) {
        Complex Hn = (Complex(1.0) - z) + z * one_minus_f_gap(m, H);
        if (std::abs(Hn - H) <= tol * std::max(std::abs(Hn), 1e-12)) return Complex(1.0) - Hn;
        H = Hn;
    }
    throw NonConvergence("total_progeny_pgf(complex): no convergence", std::abs(psi(H)));
}

// ---------------------------------------------------------------------------
// Tail acceleration for the stationary infinite product (HeavyModel).
//
// With W_{k+1} = W_k - c1 W_k^(1+nu) and phi(W) = -log(1 - c2 W^delta), the
// suffix sum sigma(W) = sum_{k>=0} phi(W_k) satisfies the Abel-type equation
// sigma(W) - sigma(W - c1 W^(1+nu)) = phi(W).  Matching the exponent lattice
// { m delta + (k-1) nu } gives an asymptotic expansion whose leading term is
// the familiar c2/(c1 (delta-nu)) W^(delta-nu).  Direct factor-by-factor
// multiplication converges only polynomially, so this expansion is what makes
// coefficient extraction of P feasible.
// ---------------------------------------------------------------------------

namespace detail {

class ProductTailExpansion {
public:
    ProductTailExpansion(double nu, double delta, double c1, double c2, double e_max = 2.2) {
        // exponent lattice up to e_max plus one extra term for error estimation
        std::vector<double> lattice;
        for (int mm = 1; mm * delta <= e_max + nu + 1e-12; ++mm)
            for (int kk = 0;; ++kk) {
                double e = mm * delta + (kk - 1.0) * nu;
                if (e > e_max + nu) break;
                if (e > 1e-12) lattice.push_back(e);
            }
        std::sort(lattice.begin(), lattice.end());
        lattice.erase(std::unique(lattice.begin(), lattice.end(),
                                  [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                      lattice.end());

        auto rhs_at = [&](double tau) {
            double acc = 0.0;
            for (int mm = 1; mm * delta <= tau + 1e-9; ++mm)
                if (std::abs(mm * delta - tau) < 1e-9) acc += std::pow(c2, mm) / mm;
            return acc;
        };
        for (double e : lattice) {
            double tau = e + nu;
            double corr = 0.0;
            for (int t = 2;; ++t) {
                double ep = tau - t * nu;
                if (ep <= 1e-12) break;
                // find a solved coefficient at exponent ep
                double a_ep = 0.0;
                bool found = false;
                for (std::size_t j = 0; j < exps_.size(); ++j)
                    if (std::abs(exps_[j] - ep) < 1e-9) {
                        a_ep = coefs_[j];
                        found = true;
                        break;
                    }
                if (!found) continue;
                double fall = 1.0;  // ep (ep-1) ... (ep-t+1)
                for (int q = 0; q < t; ++q) fall *= (ep - q);
                double fact = 1.0;
                for (int q = 2; q <= t; ++q) fact *= q;
                corr += ((t % 2 == 1) ? 1.0 : -1.0) * std::pow(c1, t) / fact * fall * a_ep;
                if (t > 64) break;
            }
            double a = (rhs_at(tau) - corr) / (c1 * e);
            if (e <= e_max) {
                exps_.push_back(e);
                coefs_.push_back(a);
            } else {
                next_exp_ = e;
                next_coef_ = a;
                break;
            }
        }
        if (next_exp_ == 0.0) {  // lattice ended exactly at e_max
            next_exp_ = e_max + nu;
            next_coef_ = coefs_.empty() ? 1.0 : coefs_.back();
        }
    }

    template <class T>
    T eval(T W) const {
        T acc{};
        for (std::size_t j = 0; j < exps_.size(); ++j) acc += coefs_[j] * std::pow(W, exps_[j]);
        return acc;
    }

    double error_estimate(double absW) const {
        return 4.0 * std::abs(next_coef_) * std::pow(absW, next_exp_);
    }

    /// Largest gap magnitude at which the expansion meets `tol`.
    double switch_radius(double tol) const {
        double w = std::pow(tol / (4.0 * std::max(std::abs(next_coef_), 1e-300)), 1.0 / next_exp_);
        return std::min(w, 0.05);
    }

    std::size_t terms() const { return exps_.size(); }
    double exponent(std::size_t j) const { return exps_[j]; }
    double coefficient(std::size_t j) const { return coefs_[j]; }

private:
    std::vector<double> exps_, coefs_;
    double next_exp_ = 0.0, next_coef_ = 0.0;
};

inline const ProductTailExpansion& product_tail_expansion(const HeavyModel& m) {
    static std::mutex mu;
    struct Key {
        double nu, delta, c1, c2;
    };
    static std::list<std::pair<Key, ProductTailExpansion>> cache;  // stable addresses
    std::scoped_lock lock(mu);
    for (auto& [k, v] : cache)
        if (k.nu == m.nu && k.delta == m.delta && k.c1 == m.c1 && k.c2 == m.c2) return v;
    cache.emplace_back(Key{m.nu, m.delta, m.c1, m.c2},
                       ProductTailExpansion(m.nu, m.delta, m.c1, m.c2));
    return cache.back().second;
}

template <class T>
T log1p_cx(T x) {
    if constexpr (std::is_same_v<T, double>) return std::log1p(x);
    else return std::log(T(1.0) + x);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Stationary product  P = prod_{k>=0} g(f_k(.))  evaluated from a survival gap.
// ---------------------------------------------------------------------------

struct StationaryValue {
    double value = 0.0;
    double bound = 0.0;  // residual-factor truncation bound
    long factors = 0;    // K: explicitly multiplied factors
};

namespace detail {

/// sum_{k>=0} -log g(f_k) starting from gap W0 (real path).  Returns the log
/// defect, a bound on the neglected remainder, and the factor count.  A zero
/// factor (g == 0) short-circuits via the `hit_zero` flag.
struct LogGapSumResult {
    double sum = 0.0;
    double bound = 0.0;
    long factors = 0;
    bool hit_zero = false;
};

inline LogGapSumResult stationary_log_gap(const Model& model, double R0, double tol,
                                          long max_factors) {
    LogGapSumResult out;
    const HeavyModel* hm = std::get_if<HeavyModel>(&model);
    const VeryHeavyModel* vh = std::get_if<VeryHeavyModel>(&model);
    const ProductTailExpansion* expansion = hm ? &product_tail_expansion(*hm) : nullptr;
    const double switch_r = expansion ? expansion->switch_radius(tol) : 0.0;
    double R = R0;
    KahanSum acc;
    double prev_phi = -1.0;
    for (long k = 0; k < max_factors; ++k) {
        if (expansion && R < switch_r) {
            acc.add(expansion->eval(R));
            out.sum = acc.value();
            out.bound = expansion->error_estimate(R);
            out.factors = k;
            return out;
        }
        double omg = one_minus_g_gap(model, R);
        if (omg >= 1.0) {
            out.hit_zero = true;
            out.factors = k;
            return out;
        }
        double phi = -std::log1p(-omg);
        acc.add(phi);
        R = one_minus_f_gap(model, R);
        if (vh) {
            double rem = 2.0 * vh->p / vh->delta * std::pow(R, vh->delta);
            if (rem < tol) {
                out.sum = acc.value();
                out.bound = rem;
                out.factors = k + 1;
                return out;
            }
        } else if (!expansion) {
            // tabulated: geometric decay once subcritical regime kicks in
            if (prev_phi >= 0.0 && phi < prev_phi) {
                double rho = phi / prev_phi;
                double rem = phi * rho / std::max(1e-12, 1.0 - rho) * 2.0;
                if (rho < 0.95 && rem < tol) {
                    out.sum = acc.value();
                    out.bound = rem;
                    out.factors = k + 1;
                    return out;
                }
            }
            prev_phi = phi;
        }
    }
    throw TruncationBudgetExceeded("stationary product: factor budget exhausted (gap " +
                                   std::to_string(R) + ")");
}

/// Complex variant used by coefficient extraction.
struct LogGapSumResultC {
    Complex sum{0.0, 0.0};
    double bound = 0.0;
    long factors = 0;
    bool hit_zero = false;
};

inline LogGapSumResultC stationary_log_gap(const Model& model, Complex W0, double tol,
                                           long max_factors) {
    LogGapSumResultC out;
    const HeavyModel* hm = std::get_if<HeavyModel>(&model);
    const VeryHeavyModel* vh = std::get_if<VeryHeavyModel>(&model);
    const ProductTailExpansion* expansion = hm ? &product_tail_expansion(*hm) : nullptr;
    const double switch_r = expansion ? expansion->switch_radius(tol) : 0.0;
    Complex W = W0;
    Complex acc{0.0, 0.0};
    double prev_phi = -1.0;
    for (long k = 0; k < max_factors; ++k) {
        double aw = std::abs(W);
        if (expansion && aw < switch_r && std::abs(std::arg(W)) < 2.4) {
            acc += expansion->eval(W);
            out.sum = acc;
            out.bound = expansion->error_estimate(aw);
            out.factors = k;
            return out;
        }
        Complex omg = one_minus_g_gap(model, W);
        Complex g = Complex(1.0) - omg;
        if (std::abs(g) == 0.0) {
            out.hit_zero = true;
            out.factors = k;
            return out;
        }
        double phi_mag = std::abs(omg);
        W = one_minus_f_gap(model, W);
        if (vh) {
            double rem = 2.0 * vh->p / vh->delta * std::pow(std::abs(W), vh->delta);
            if (rem < tol) {
                out.sum = acc;
                out.bound = rem;
                out.factors = k + 1;
                return out;
            }
        } else if (!expansion) {
            if (prev_phi > 0.0 && phi_mag < prev_phi) {
                double rho = phi_mag / prev_phi;
                double rem = phi_mag * rho / std::max(1e-12, 1.0 - rho) * 2.0;
                if (rho < 0.95 && rem < tol) {
                    out.sum = acc;
                    out.bound = rem;
                    out.factors = k + 1;
                    return out;
                }
            }
            prev_phi = phi_mag;
        }
    }
    throw TruncationBudgetExceeded("stationary product (complex): factor budget exhausted");
}

}  // namespace detail

/// P(x) = E x^X for the stationary law, x in [0, 1].
inline StationaryValue stationary_pgf(const Model& m, double x, double tol = 1e-10,
                                      long max_factors = 1'000'000) {
    if (x < 0.0 || x > 1.0) throw InvalidArgument("stationary_pgf: x outside [0,1]");
    if (x == 1.0) return {1.0, 0.0, 0};
    auto lg = detail::stationary_log_gap(m, 1.0 - x, tol, max_factors);
    if (lg.hit_zero) return {0.0, 0.0, lg.factors};
    return {std::exp(-lg.sum), lg.bound, lg.factors};
}

/// P_n(x) = E x^{X_n} = prod_{k<n} g(f_k(x)).
inline double pn_pgf(const Model& m, std::size_t n, double x) {
    if (x < 0.0 || x > 1.0) throw InvalidArgument("pn_pgf: x outside [0,1]");
    double R = 1.0 - x, prod = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        prod *= 1.0 - one_minus_g_gap(m, R);
        if (prod == 0.0) return 0.0;
        R = one_minus_f_gap(m, R);
    }
    return prod;
}

/// Lemma-1 normalized convergence ratio, nu = 0 family only:
/// (P_n(x)/P(x) - 1) / (p delta^{-1} (1-f_n(x))^delta).
/// Computed as a suffix sum of -log g(f_k(x)) so no near-1 cancellation occurs.
/// The batch form shares one iteration path across all n.
inline std::vector<double> lemma1_curve(const Model& model, double x,
                                        const std::vector<std::size_t>& ns,
                                        double rel_tail = 1e-4, long max_factors = 1'000'000) {
    const VeryHeavyModel* vh = std::get_if<VeryHeavyModel>(&model);
    if (!vh) throw InvalidArgument("lemma1_ratio: defined for the very heavy-tailed (nu=0) family");
    if (!(x > 0.0 && x < 1.0)) throw InvalidArgument("lemma1_ratio: x must be in (0,1)");
    std::size_t n_max = 0;
    for (auto n : ns) n_max = std::max(n_max, n);

    std::vector<double> gaps;   // R_k for k <= n_max
    std::vector<double> phis;   // phi_k for all explicitly summed k
    double R = 1.0 - x;
    long k = 0;
    double stop_scale = 0.0;
    for (;; ++k) {
        if (k > max_factors) throw TruncationBudgetExceeded("lemma1_ratio: factor budget exhausted");
        if (static_cast<std::size_t>(k) <= n_max) gaps.push_back(R);
        double omg = one_minus_g_gap(model, R);
        phis.push_back(-std::log1p(-omg));
        R = one_minus_f_gap(model, R);
        if (static_cast<std::size_t>(k) == n_max)
            stop_scale = vh->p / vh->delta * std::pow(gaps.back(), vh->delta);
        if (static_cast<std::size_t>(k) > n_max &&
            vh->p / vh->delta * std::pow(R, vh->delta) < rel_tail * stop_scale)
            break;
    }
    double rem = vh->p / vh->delta * std::pow(R, vh->delta);  // Lemma-1 rate for the cut tail
    std::vector<double> suffix(phis.size() + 1, 0.0);
    for (std::size_t j = phis.size(); j-- > 0;) suffix[j] = suffix[j + 1] + phis[j];
    std::vector<double> out;
    out.reserve(ns.size());
    for (auto n : ns) {
        double num = std::expm1(suffix[n] + rem);
        double den = vh->p / vh->delta * std::pow(gaps[n], vh->delta);
        out.push_back(num / den);
    }
    return out;
}

inline double lemma1_ratio(const Model& model, std::size_t n, double x) {
    return lemma1_curve(model, x, {n})[0];
}

/// Upper bound for the stationary sampler's truncation bias:
/// sum_{n > M} (1 - g(f_n(0))) <= sum_{n > M} -log g(f_n(0)).
inline double stationary_truncation_bias(const Model& m, std::size_t M, double tol = 1e-12) {
    double R = 1.0;
    for (std::size_t k = 0; k <= M; ++k) R = one_minus_f_gap(m, R);
    auto lg = detail::stationary_log_gap(m, R, tol, 2'000'000);
    if (lg.hit_zero) return 1.0;
    return lg.sum + lg.bound;
}

// ---------------------------------------------------------------------------
// Coefficient extraction: evaluate on a scaled root-of-unity grid, inverse
// FFT, unscale by r^-k.
// ---------------------------------------------------------------------------

struct ExtractOptions {
    std::optional<double> radius;     // override the default radius rule
    std::optional<long> x_target;     // tail index the radius rule optimizes for
    double neg_floor_error = 1e-9;    // coefficients below -this throw
    double value_tol = 1e-12;         // tolerance handed to product evaluators
};

namespace detail {

inline double extraction_radius(std::size_t N, const ExtractOptions& opt) {
    if (opt.radius) return *opt.radius;
    long xt = opt.x_target.value_or(static_cast<long>(N) - 1);
    double r = std::pow(static_cast<double>(N), -1.0 / (static_cast<double>(xt) + 1.0));
    return std::clamp(r, 0.9, 1.0 - 1e-6);
}

template <class F>
PowerSeries extract_series(F&& eval, std::size_t N, const ExtractOptions& opt,
                           double trunc_bound_hint = 0.0) {
    if (N == 0 || (N & (N - 1)) != 0) throw InvalidArgument("extract_series: N must be a power of two");
    double r = extraction_radius(N, opt);
    if (static_cast<double>(N - 1) * (-std::log(r)) > 700.0)
        throw RadiusIllConditioned("extract_series: r^-(N-1) overflows");
    std::vector<Complex> vals(N);
    double bound = trunc_bound_hint;
    for (std::size_t j = 0; j <= N / 2; ++j) {
        double th = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(N);
        Complex z = r * Complex(std::cos(th), std::sin(th));
        vals[j] = eval(z, bound);
        if (j > 0 && j < N / 2) vals[N - j] = std::conj(vals[j]);
    }
    fft_radix2(vals, false);  // forward transform = sum_j v_j e^{-2pi i jk/N}
    PowerSeries out;
    out.coeffs.resize(N);
    out.n_points = N;
    out.radius = r;
    out.trunc_bound = bound;
    double rk = 1.0;
    for (std::size_t k = 0; k < N; ++k) {
        double c = vals[k].real() / static_cast<double>(N) / rk;
        out.max_imag = std::max(out.max_imag, std::abs(vals[k].imag()) / static_cast<double>(N) / rk);
        rk *= r;
        out.worst_negative = std::min(out.worst_negative, c);
        out.coeffs[k] = std::max(c, 0.0);
    }
    if (out.worst_negative < -opt.neg_floor_error)
        throw NegativeCoefficient("extract_series: coefficient " + std::to_string(out.worst_negative) +
                                  " below negative floor " + std::to_string(-opt.neg_floor_error));
    detail::KahanSum ks;
    for (double c : out.coeffs) ks.add(c);
    out.tail_mass = std::max(0.0, 1.0 - ks.value());
    return out;
}

}  // namespace detail

/// Coefficients of E x^{S_n} = prod_{m<n} g(A_m(x)), A_0 = x, A_{m+1} = x f(A_m).
inline PowerSeries sn_pgf_series(const Model& m, std::size_t n, std::size_t N,
                                 ExtractOptions opt = {}) {
    auto eval = [&](Complex z, double&) -> Complex {
        Complex A = z, F = 1.0;
        for (std::size_t mm = 0; mm < n; ++mm) {
            Complex W = Complex(1.0) - A;
            F *= Complex(1.0) - one_minus_g_gap(m, W);
            if (std::abs(F) == 0.0) return F;
            A = z * (Complex(1.0) - one_minus_f_gap(m, W));
        }
        return F;
    };
    return detail::extract_series(eval, N, opt);
}

/// Pointwise E x^{S_n} for real x (marginal-consistency checks and sweeps).
inline double sn_pgf_value(const Model& m, std::size_t n, double x) {
    double A = x, F = 1.0;
    for (std::size_t mm = 0; mm < n; ++mm) {
        double R = 1.0 - A;
        F *= 1.0 - one_minus_g_gap(m, R);
        if (F == 0.0) return 0.0;
        A = x * (1.0 - one_minus_f_gap(m, R));
    }
    return F;
}

/// Coefficients of the single-family total progeny law Y = g(h(.)).
inline PowerSeries y_inf_series(const Model& m, std::size_t N, ExtractOptions opt = {}) {
    Complex warm(1.0, 0.0);
    auto eval = [&, warm](Complex z, double&) mutable -> Complex {
        Complex h = total_progeny_pgf(m, z, warm);
        warm = Complex(1.0) - h;
        return Complex(1.0) - one_minus_g_gap(m, Complex(1.0) - h);
    };
    return detail::extract_series(eval, N, opt);
}

/// Coefficients of S_infty with pgf P(f(h(.))).
inline PowerSeries s_inf_series(const Model& m, std::size_t N, ExtractOptions opt = {}) {
    Complex warm(1.0, 0.0);
    auto eval = [&, warm](Complex z, double& bound) mutable -> Complex {
        Complex h = total_progeny_pgf(m, z, warm);
        warm = Complex(1.0) - h;
        Complex W0 = one_minus_f_gap(m, Complex(1.0) - h);  // 1 - f(h(z))
        auto lg = detail::stationary_log_gap(m, W0, opt.value_tol, 1'000'000);
        if (lg.hit_zero) return Complex(0.0);
        bound = std::max(bound, lg.bound);
        return std::exp(-lg.sum);
    };
    return detail::extract_series(eval, N, opt);
}

/// Coefficients of the stationary law X with pgf P(.).
inline PowerSeries stationary_series(const Model& m, std::size_t N, ExtractOptions opt = {}) {
    auto eval = [&](Complex z, double& bound) -> Complex {
        auto lg = detail::stationary_log_gap(m, Complex(1.0) - z, opt.value_tol, 1'000'000);
        if (lg.hit_zero) return Complex(0.0);
        bound = std::max(bound, lg.bound);
        return std::exp(-lg.sum);
    };
    return detail::extract_series(eval, N, opt);
}

// ---------------------------------------------------------------------------
// Near-one exponent fit: least squares of log(1-F) against log(1-s), with the
// Tauberian conversion constant / Gamma(1 - exponent).
// ---------------------------------------------------------------------------

struct ExponentFit {
    double exponent = 0.0;
    double pgf_constant = 0.0;   // c in 1-F(s) ~ c (1-s)^exponent
    double tail_constant = 0.0;  // c / Gamma(1-exponent)
};

inline ExponentFit near_one_exponent_fit(std::span<const double> s_grid,
                                         std::span<const double> one_minus_F) {
    if (s_grid.size() != one_minus_F.size() || s_grid.size() < 2)
        throw InvalidArgument("near_one_exponent_fit: need >= 2 grid points");
    std::vector<double> lx(s_grid.size()), ly(s_grid.size());
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
        double gap = 1.0 - s_grid[i];
        if (!(gap > 0.0) || !(one_minus_F[i] > 0.0))
            throw InvalidArgument("near_one_exponent_fit: grid must satisfy s<1, F<1");
        lx[i] = std::log(gap);
        ly[i] = std::log(one_minus_F[i]);
    }
    auto fit = detail::fit_line(lx, ly);
    ExponentFit out;
    out.exponent = fit.slope;
    out.pgf_constant = std::exp(fit.intercept);
    double one_minus_e = 1.0 - out.exponent;
    if (one_minus_e < 1e-14)
        out.tail_constant = 0.0;
    else
        out.tail_constant = std::exp(fit.intercept - detail::log_gamma(one_minus_e));
    return out;
}

// ---------------------------------------------------------------------------
// Exact S_n tail by contour deformation onto the branch cut.
//
// P(S_n > x) = (1/pi) * integral_0^inf Im F_n(1 + u/(x+1) + i0)
//                       * (1+u/(x+1))^-(x+1) / u du  + circle remainder,
// where F_n(z) = prod_{m<n} g(A_m(z)) continued to the upper edge of [1,inf).
// This reaches any x (the FFT route is limited to x < N), which the
// large-deviation windows need: y_n is ~1e9 already at n = 256.
// HeavyModel only: the tabulated family is entire (no cut) and the nu = 0
// family's series evaluator does not extend past |z| <= 1.
// ---------------------------------------------------------------------------

struct CutTail {
    double value = 0.0;
    double error = 0.0;
};

namespace detail {

inline Complex pow_lower_edge(Complex w, double p) {
    if (w.imag() == 0.0 && w.real() < 0.0)
        return std::pow(-w.real(), p) * std::polar(1.0, -std::numbers::pi * p);
    if (w.imag() > 1e-12 * std::abs(w) && w.real() < 0.0)
        throw Error("cut integral: iterate crossed to the upper branch edge");
    return std::pow(w, p);
}

/// Im F_n on the upper edge z = t + i0, t > 1, via the A_m iteration.
inline Complex edge_log_Fn(const HeavyModel& hm, std::size_t n, double t) {
    Complex z(t, 0.0);
    Complex A = z;
    Complex logF(0.0, 0.0);
    for (std::size_t mm = 0; mm < n; ++mm) {
        Complex W = Complex(1.0) - A;
        Complex g = Complex(1.0) - hm.c2 * pow_lower_edge(W, hm.delta);
        logF += std::log(g);
        Complex f = A + hm.c1 * pow_lower_edge(W, 1.0 + hm.nu);
        A = z * f;
        if (A.imag() < -1e-10 * std::abs(A))
            throw Error("cut integral: iterate left the upper half plane");
    }
    return logF;
}

}  // namespace detail

inline CutTail sn_tail_exact(const Model& model, std::size_t n, std::uint64_t x,
                             double rel_tol = 1e-9) {
    const HeavyModel* hm = std::get_if<HeavyModel>(&model);
    if (!hm) throw InvalidArgument("sn_tail_exact: available for HeavyModel only");
    if (n == 0) return {0.0, 0.0};
    const double jx = static_cast<double>(x) + 1.0;

    auto integrand = [&](double u) -> double {
        if (u <= 0.0) return 0.0;
        Complex logF = detail::edge_log_Fn(*hm, n, 1.0 + u / jx);
        double imF = std::exp(logF.real()) * std::sin(logF.imag());
        double damp = -jx * std::log1p(u / jx);
        if (damp < -740.0) return 0.0;
        return imF * std::exp(damp) / u;
    };

    // u = q^4 absorbs the integrable u^(delta-1) endpoint singularity
    auto head = detail::integrate_adaptive(
        [&](double q) { return integrand(q * q * q * q) * 4.0 * q * q * q; }, 0.0, 1.0, 1e-300,
        rel_tol, 2000);
    double total = head.value, err = head.error;
    double lo = 1.0;
    double last_piece = std::abs(head.value);
    while (lo < 1e9) {
        double hi = lo * 2.0;
        auto piece = detail::integrate_adaptive(integrand, lo, hi, 1e-300, rel_tol, 2000);
        total += piece.value;
        err += piece.error;
        last_piece = std::abs(piece.value);
        lo = hi;
        if (lo > 30.0 && last_piece < rel_tol * std::abs(total)) break;
    }
    // outer-circle remainder at R_c = 1 + lo/jx
    double Rc = 1.0 + lo / jx;
    Complex logF = detail::edge_log_Fn(*hm, n, Rc);
    double circle = (1.0 + std::exp(logF.real())) / (Rc - 1.0) * std::exp(-jx * std::log1p(lo / jx));
    err += circle + last_piece;
    return {total / std::numbers::pi, err / std::numbers::pi};
}

}  // namespace gwi
