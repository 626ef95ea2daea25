#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gwi/errors.hpp"
#include "gwi/numerics.hpp"
#include "gwi/rng.hpp"

namespace gwi {

// ---------------------------------------------------------------------------
// Model families.
//
// HeavyModel: offspring pgf  f(s) = s + c1 (1-s)^(1+nu)   (critical, nu in (0,1))
//             immigration    g(s) = 1 - c2 (1-s)^delta    (scaled Sibuya)
// Both laws have closed-form tails, so sampling and all series work are exact.
//
// VeryHeavyModel: the nu = 0 family, defined directly through its tails
//             P(xi > n)  = kappa / ((n+1) ln(n+1+e)^(1+a)),   n >= 1
//             P(xi > 0)  = q0  (solved so that E xi = 1)
//             P(eta > n) = min(1, cc (n+1)^-delta ln(n+1+e)^-a)
// which realizes L1(y) ~ (kappa/a) (ln y)^-a and L2 ~ p L1 with
// p = cc Gamma(1-delta) a / kappa.
//
// TabulatedModel: finite explicit pmfs; used for toy/truncated oracles.
// ---------------------------------------------------------------------------

struct HeavyModel {
    double nu = 0.3;
    double delta = 0.7;
    double c1 = 0.5;
    double c2 = 1.0;
};

namespace detail {

inline constexpr double kEuler = 2.718281828459045235360287;

/// Continuum tail t(s) = scale * (s+1)^-beta * ln(s+1+e)^-gamma with the
/// quadrature machinery for its partial sums and Laplace-type sums.
struct LogPowTail {
    double scale = 0.0;
    double beta = 0.0;
    double gamma = 0.0;

    double operator()(double s) const {
        return scale * std::pow(s + 1.0, -beta) * std::pow(std::log(s + 1.0 + kEuler), -gamma);
    }

    // t'(s) / t(s)
    double dlog(double s) const {
        return -beta / (s + 1.0) - gamma / ((s + 1.0 + kEuler) * std::log(s + 1.0 + kEuler));
    }

    // Integrand of  integral t(s) e^{-mu s} ds  after  w = ln(s+1+e).
    double w_integrand(double w, double mu) const {
        double lg = -gamma * std::log(w) + (1.0 - beta) * w - beta * std::log1p(-std::exp(1.0 - w));
        double arg = lg - mu * (std::exp(w) - 1.0 - kEuler);
        return arg < -740.0 ? 0.0 : scale * std::exp(arg);
    }

    /// sum_{n >= n0} t(n), requires beta == 1 and gamma > 1.
    double sum_from(long n0) const {
        if (!(beta == 1.0 && gamma > 1.0))
            throw InvalidArgument("LogPowTail::sum_from needs beta=1, gamma>1");
        const auto& rule = gauss_legendre(20);
        double w = std::log(static_cast<double>(n0) + 1.0 + kEuler);
        double integral = 0.0;
        const double w_stop = 45.0;
        while (w < w_stop) {
            double w2 = std::min(w + 1.0, w_stop);
            integral += gauss_panel([&](double ww) { return w_integrand(ww, 0.0); }, w, w2, rule);
            w = w2;
        }
        // analytic remainder: (1 - e^{1-w})^{-1} in [1, 1+2e^{1-w_stop}]
        integral += scale * std::pow(w_stop, 1.0 - gamma) / (gamma - 1.0);
        double t0 = (*this)(static_cast<double>(n0));
        return integral + 0.5 * t0 - t0 * dlog(static_cast<double>(n0)) / 12.0;
    }

    /// sum_{n >= n0} t(n) e^{-mu n}, mu > 0.
    double esum_from(long n0, double mu) const {
        if (!(mu > 0.0)) throw InvalidArgument("LogPowTail::esum_from needs mu > 0");
        const double s0 = static_cast<double>(n0);
        if (mu * s0 > 740.0) return 0.0;
        const auto& rule = gauss_legendre(20);
        double w = std::log(s0 + 1.0 + kEuler);
        double integral = 0.0;
        for (;;) {
            double q = mu * std::exp(w);
            if (q > 45.0) break;
            double hw = (q < 0.05) ? 1.0 : 0.2;
            integral += gauss_panel([&](double ww) { return w_integrand(ww, mu); }, w, w + hw, rule);
            w += hw;
        }
        double e0 = std::exp(-mu * s0);
        double h0 = (*this)(s0)*e0;
        return integral + 0.5 * h0 - h0 * (dlog(s0) - mu) / 12.0;
    }
};

}  // namespace detail

struct VeryHeavyModel {
    double a = 1.0;
    double delta = 0.6;
    double kappa = 0.2;
    double cc = 0.5;

    // derived at construction
    double q0 = 0.0;          // P(xi > 0)
    double p = 0.0;           // limit of L2/L1 = cc Gamma(1-delta) a / kappa
    detail::LogPowTail xi_cont;   // continuum offspring tail
    detail::LogPowTail eta_cont;  // continuum immigration tail

    static constexpr long kHead = 4096;
    std::vector<double> xi_head;   // P(xi > n), n in [0, kHead)
    std::vector<double> eta_head;  // P(eta > n)
    double xi_tail_sum = 0.0;      // sum_{n >= kHead} P(xi > n)
    double xi_mom[5] = {0, 0, 0, 0, 0};   // sum over 1 <= n < kHead of n^j t_xi(n)
    double eta_mom[5] = {0, 0, 0, 0, 0};  // sum over 0 <= n < kHead of n^j t_eta(n)

    // --- survival series -------------------------------------------------
    // S_xi(R)  = sum_n P(xi>n)  (1-R)^n = (1 - f(1-R)) / R
    // S_eta(R) = sum_n P(eta>n) (1-R)^n = (1 - g(1-R)) / R

    /// Lambda(R) = 1 - S_xi(R); equals L1((1-x)^{-1}) of the pgf form at x = 1-R.
    /// Evaluated without cancellation: sum_n P(xi>n) (1 - (1-R)^n).
    double lambda(double R) const {
        if (!(R > 0.0 && R <= 1.0)) throw InvalidArgument("VeryHeavyModel::lambda: R outside (0,1]");
        double mu = -std::log1p(-R);
        double head = 0.0;
        if (mu * static_cast<double>(kHead) < 5e-3) {
            head = mu * (xi_mom[1] - mu / 2.0 * (xi_mom[2] - mu / 3.0 * (xi_mom[3] - mu / 4.0 * xi_mom[4])));
        } else {
            detail::KahanSum ks;
            for (long n = 1; n < kHead; ++n) {
                double e = -std::expm1(-mu * static_cast<double>(n));
                ks.add(xi_head[static_cast<std::size_t>(n)] * e);
                if (mu * static_cast<double>(n) > 45.0) {
                    // remaining head terms all have factor 1
                    for (long m = n + 1; m < kHead; ++m) ks.add(xi_head[static_cast<std::size_t>(m)]);
                    break;
                }
            }
            head = ks.value();
        }
        double tail = xi_tail_sum - xi_cont.esum_from(kHead, mu);
        return head + tail;
    }

    /// S_eta(R), diverges like R^(delta-1) (ln 1/R)^-a as R -> 0.
    double eta_survival(double R) const {
        if (!(R > 0.0 && R <= 1.0))
            throw InvalidArgument("VeryHeavyModel::eta_survival: R outside (0,1]");
        double mu = -std::log1p(-R);
        double head = 0.0;
        if (mu * static_cast<double>(kHead) < 5e-3) {
            head = eta_mom[0] - mu * (eta_mom[1] - mu / 2.0 * (eta_mom[2] - mu / 3.0 * (eta_mom[3] - mu / 4.0 * eta_mom[4])));
        } else {
            detail::KahanSum ks;
            double w = std::exp(-mu), pw = 1.0;
            for (long n = 0; n < kHead; ++n) {
                ks.add(eta_head[static_cast<std::size_t>(n)] * pw);
                pw *= w;
                if (pw < 1e-300) break;
            }
            head = ks.value();
        }
        return head + eta_cont.esum_from(kHead, mu);
    }

    // Direct power sums for complex arguments (|z| bounded away from 1).
    static constexpr double kComplexRadiusMax = 0.997;

    Complex xi_survival_z(Complex z) const {
        if (std::abs(z) > kComplexRadiusMax)
            throw InvalidArgument("very-heavy complex evaluation limited to |z| <= 0.997");
        Complex acc = 0.0, pw = 1.0;
        double az = std::abs(z), apw = 1.0;
        for (long n = 0;; ++n) {
            double t = n < kHead ? xi_head[static_cast<std::size_t>(n)] : xi_cont(static_cast<double>(n));
            acc += t * pw;
            pw *= z;
            apw *= az;
            if (t * apw < 1e-18 * (std::abs(acc) + 1e-30) && n > 8) break;
        }
        return acc;
    }

    Complex eta_survival_z(Complex z) const {
        if (std::abs(z) > kComplexRadiusMax)
            throw InvalidArgument("very-heavy complex evaluation limited to |z| <= 0.997");
        Complex acc = 0.0, pw = 1.0;
        double az = std::abs(z), apw = 1.0;
        for (long n = 0;; ++n) {
            double t = n < kHead ? eta_head[static_cast<std::size_t>(n)] : eta_cont(static_cast<double>(n));
            acc += t * pw;
            pw *= z;
            apw *= az;
            if (t * apw < 1e-18 * (std::abs(acc) + 1e-30) && n > 8) break;
        }
        return acc;
    }
};

struct TabulatedModel {
    std::vector<double> xi_pmf;
    std::vector<double> eta_pmf;
    std::vector<double> xi_tail_tab;   // P(xi > n) for n < xi_pmf.size()
    std::vector<double> eta_tail_tab;
    double xi_mean = 0.0;
};

using Model = std::variant<HeavyModel, VeryHeavyModel, TabulatedModel>;

// ---------------------------------------------------------------------------
// Construction.
// ---------------------------------------------------------------------------

/// q0 = 1 - sum_{n>=1} P(xi>n) for the nu = 0 offspring family; enforces the
/// criticality E xi = 1.  Throws ModelError when no solution exists.
inline double solve_q0(double a, double kappa) {
    if (!(a > 0.0)) throw ModelError("very_heavy: a must be > 0");
    if (!(kappa > 0.0)) throw ModelError("very_heavy: kappa must be > 0 (kappa = 0 is degenerate)");
    detail::LogPowTail t{kappa, 1.0, 1.0 + a};
    detail::KahanSum head;
    for (long n = 1; n < VeryHeavyModel::kHead; ++n) head.add(t(static_cast<double>(n)));
    double sum1 = head.value() + t.sum_from(VeryHeavyModel::kHead);
    double q0 = 1.0 - sum1;
    if (!(q0 > 0.0))
        throw ModelError("very_heavy: no critical solution, sum of offspring tails = " +
                         std::to_string(sum1) + " >= 1 (kappa too large)");
    if (q0 < t(1.0))
        throw ModelError("very_heavy: q0 < P(xi>1), offspring tail not monotone");
    return q0;
}

inline HeavyModel make_heavy(double nu, double delta, double c1, double c2) {
    if (!(nu > 0.0 && nu < 1.0)) throw ModelError("heavy: nu must be in (0,1)");
    if (!(delta > 0.0 && delta < 1.0)) throw ModelError("heavy: delta must be in (0,1)");
    if (!(nu < delta)) throw ModelError("heavy: standing assumption nu < delta violated");
    if (!(c1 > 0.0 && c1 <= 1.0 / (1.0 + nu)))
        throw ModelError("heavy: need 0 < c1 <= 1/(1+nu), otherwise P(xi=1) = 1-c1(1+nu) < 0");
    if (!(c2 > 0.0 && c2 <= 1.0)) throw ModelError("heavy: need 0 < c2 <= 1");
    return HeavyModel{nu, delta, c1, c2};
}

inline VeryHeavyModel make_very_heavy(double a, double delta, double kappa, double cc) {
    if (!(delta > 0.0 && delta < 1.0)) throw ModelError("very_heavy: delta must be in (0,1)");
    if (!(cc > 0.0 && cc <= 1.0)) throw ModelError("very_heavy: need 0 < cc <= 1");
    VeryHeavyModel m;
    m.a = a;
    m.delta = delta;
    m.kappa = kappa;
    m.cc = cc;
    m.q0 = solve_q0(a, kappa);
    m.p = cc * std::exp(detail::log_gamma(1.0 - delta)) * a / kappa;
    m.xi_cont = detail::LogPowTail{kappa, 1.0, 1.0 + a};
    m.eta_cont = detail::LogPowTail{cc, delta, a};
    m.xi_head.resize(VeryHeavyModel::kHead);
    m.eta_head.resize(VeryHeavyModel::kHead);
    m.xi_head[0] = m.q0;
    m.eta_head[0] = std::min(1.0, m.eta_cont(0.0));
    for (long n = 1; n < VeryHeavyModel::kHead; ++n) {
        m.xi_head[static_cast<std::size_t>(n)] = m.xi_cont(static_cast<double>(n));
        m.eta_head[static_cast<std::size_t>(n)] = std::min(1.0, m.eta_cont(static_cast<double>(n)));
    }
    if (m.eta_head[0] >= 1.0) throw ModelError("very_heavy: P(eta>0) must be < 1");
    for (int j = 0; j <= 4; ++j) {
        detail::KahanSum kx, ke;
        for (long n = 1; n < VeryHeavyModel::kHead; ++n)
            kx.add(std::pow(static_cast<double>(n), j) * m.xi_head[static_cast<std::size_t>(n)]);
        for (long n = 0; n < VeryHeavyModel::kHead; ++n)
            ke.add(std::pow(static_cast<double>(n), j) * m.eta_head[static_cast<std::size_t>(n)]);
        m.xi_mom[j] = kx.value();
        m.eta_mom[j] = ke.value();
    }
    m.xi_tail_sum = m.xi_cont.sum_from(VeryHeavyModel::kHead);
    return m;
}

inline TabulatedModel make_tabulated(std::vector<double> xi_pmf, std::vector<double> eta_pmf) {
    auto check = [](std::vector<double>& pmf, const char* what) {
        if (pmf.empty()) throw ModelError(std::string("tabulated: empty ") + what + " pmf");
        double s = 0.0;
        for (double v : pmf) {
            if (v < 0.0) throw ModelError(std::string("tabulated: negative mass in ") + what);
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-9)
            throw ModelError(std::string("tabulated: ") + what + " pmf sums to " + std::to_string(s));
        for (double& v : pmf) v /= s;
    };
    check(xi_pmf, "xi");
    check(eta_pmf, "eta");
    if (eta_pmf[0] >= 1.0) throw ModelError("tabulated: P(eta=0) must be < 1");
    TabulatedModel m;
    m.xi_pmf = std::move(xi_pmf);
    m.eta_pmf = std::move(eta_pmf);
    auto tails = [](const std::vector<double>& pmf) {
        std::vector<double> t(pmf.size());
        double acc = 0.0;
        for (std::size_t k = pmf.size(); k-- > 0;) {
            t[k] = acc;  // P(> k)
            acc += pmf[k];
        }
        return t;
    };
    // suffix convention: tail[n] = P(X > n) = sum_{k > n} pmf[k]
    m.xi_tail_tab = tails(m.xi_pmf);
    m.eta_tail_tab = tails(m.eta_pmf);
    for (std::size_t k = 0; k < m.xi_pmf.size(); ++k) m.xi_mean += static_cast<double>(k) * m.xi_pmf[k];
    return m;
}

// ---------------------------------------------------------------------------
// pmf / tails.
// ---------------------------------------------------------------------------

inline double xi_tail(const HeavyModel& m, std::uint64_t n) {
    if (n == 0) return 1.0 - m.c1;
    double nd = static_cast<double>(n);
    return m.c1 * m.nu *
           std::exp(detail::log_gamma(nd - m.nu) - detail::log_gamma(1.0 - m.nu) -
                    detail::log_gamma(nd + 1.0));
}
inline double xi_tail(const VeryHeavyModel& m, std::uint64_t n) {
    return n == 0 ? m.q0 : m.xi_cont(static_cast<double>(n));
}
inline double xi_tail(const TabulatedModel& m, std::uint64_t n) {
    return n < m.xi_tail_tab.size() ? m.xi_tail_tab[n] : 0.0;
}
inline double xi_tail(const Model& model, std::uint64_t n) {
    return std::visit([&](const auto& m) { return xi_tail(m, n); }, model);
}

inline double eta_tail(const HeavyModel& m, std::uint64_t n) {
    double nd = static_cast<double>(n);
    return m.c2 * std::exp(detail::log_gamma(nd + 1.0 - m.delta) - detail::log_gamma(1.0 - m.delta) -
                           detail::log_gamma(nd + 1.0));
}
inline double eta_tail(const VeryHeavyModel& m, std::uint64_t n) {
    return std::min(1.0, m.eta_cont(static_cast<double>(n)));
}
inline double eta_tail(const TabulatedModel& m, std::uint64_t n) {
    return n < m.eta_tail_tab.size() ? m.eta_tail_tab[n] : 0.0;
}
inline double eta_tail(const Model& model, std::uint64_t n) {
    return std::visit([&](const auto& m) { return eta_tail(m, n); }, model);
}

inline double xi_pmf(const HeavyModel& m, std::uint64_t k) {
    if (k == 0) return m.c1;
    if (k == 1) return 1.0 - m.c1 * (1.0 + m.nu);
    // c1 |binom(1+nu, k)| = c1 (1+nu) nu Gamma(k-1-nu) / (Gamma(1-nu) k!)
    double kd = static_cast<double>(k);
    return m.c1 * (1.0 + m.nu) * m.nu *
           std::exp(detail::log_gamma(kd - 1.0 - m.nu) - detail::log_gamma(1.0 - m.nu) -
                    detail::log_gamma(kd + 1.0));
}
inline double xi_pmf(const VeryHeavyModel& m, std::uint64_t k) {
    if (k == 0) return 1.0 - m.q0;
    double d = xi_tail(m, k - 1) - xi_tail(m, k);
    return d > 0.0 ? d : 0.0;
}
inline double xi_pmf(const TabulatedModel& m, std::uint64_t k) {
    return k < m.xi_pmf.size() ? m.xi_pmf[k] : 0.0;
}
inline double xi_pmf(const Model& model, std::uint64_t k) {
    return std::visit([&](const auto& m) { return xi_pmf(m, k); }, model);
}

inline double eta_pmf(const HeavyModel& m, std::uint64_t k) {
    if (k == 0) return 1.0 - m.c2;
    double kd = static_cast<double>(k);
    return m.c2 * m.delta *
           std::exp(detail::log_gamma(kd - m.delta) - detail::log_gamma(1.0 - m.delta) -
                    detail::log_gamma(kd + 1.0));
}
inline double eta_pmf(const VeryHeavyModel& m, std::uint64_t k) {
    if (k == 0) return 1.0 - std::min(1.0, m.eta_cont(0.0));
    double d = eta_tail(m, k - 1) - eta_tail(m, k);
    return d > 0.0 ? d : 0.0;
}
inline double eta_pmf(const TabulatedModel& m, std::uint64_t k) {
    return k < m.eta_pmf.size() ? m.eta_pmf[k] : 0.0;
}
inline double eta_pmf(const Model& model, std::uint64_t k) {
    return std::visit([&](const auto& m) { return eta_pmf(m, k); }, model);
}

// ---------------------------------------------------------------------------
// Survival-gap pgf evaluation.  All series iteration works with R = 1 - x
// (or W = 1 - z) to stay accurate arbitrarily close to 1.
// ---------------------------------------------------------------------------

/// 1 - f(1 - R) for real R in (0, 1].
inline double one_minus_f_gap(const Model& model, double R) {
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, HeavyModel>) {
                return R - m.c1 * std::pow(R, 1.0 + m.nu);
            } else if constexpr (std::is_same_v<T, VeryHeavyModel>) {
                return R * (1.0 - m.lambda(R));
            } else {
                double acc = 0.0;
                for (std::size_t k = 1; k < m.xi_pmf.size(); ++k)
                    acc += m.xi_pmf[k] * (-std::expm1(static_cast<double>(k) * std::log1p(-R)));
                return acc;
            }
        },
        model);
}

/// 1 - g(1 - R) for real R in (0, 1].
inline double one_minus_g_gap(const Model& model, double R) {
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, HeavyModel>) {
                return m.c2 * std::pow(R, m.delta);
            } else if constexpr (std::is_same_v<T, VeryHeavyModel>) {
                return R * m.eta_survival(R);
            } else {
                double acc = 0.0;
                for (std::size_t k = 1; k < m.eta_pmf.size(); ++k)
                    acc += m.eta_pmf[k] * (-std::expm1(static_cast<double>(k) * std::log1p(-R)));
                return acc;
            }
        },
        model);
}

/// 1 - f(1 - W) for complex W (the survival gap of a complex argument).
inline Complex one_minus_f_gap(const Model& model, Complex W) {
    return std::visit(
        [&](const auto& m) -> Complex {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, HeavyModel>) {
                return W - m.c1 * std::pow(W, 1.0 + m.nu);
            } else if constexpr (std::is_same_v<T, VeryHeavyModel>) {
                return W * m.xi_survival_z(1.0 - W);
            } else {
                Complex z = 1.0 - W, pw = 1.0, acc = 0.0;
                for (std::size_t k = 1; k < m.xi_pmf.size(); ++k) {
                    pw *= z;
                    acc += m.xi_pmf[k] * (1.0 - pw);
                }
                return acc;
            }
        },
        model);
}

inline Complex one_minus_g_gap(const Model& model, Complex W) {
    return std::visit(
        [&](const auto& m) -> Complex {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, HeavyModel>) {
                return m.c2 * std::pow(W, m.delta);
            } else if constexpr (std::is_same_v<T, VeryHeavyModel>) {
                return W * m.eta_survival_z(1.0 - W);
            } else {
                Complex z = 1.0 - W, pw = 1.0, acc = 0.0;
                for (std::size_t k = 1; k < m.eta_pmf.size(); ++k) {
                    pw *= z;
                    acc += m.eta_pmf[k] * (1.0 - pw);
                }
                return acc;
            }
        },
        model);
}

inline double f_eval(const Model& model, double x) { return 1.0 - one_minus_f_gap(model, 1.0 - x); }
inline double g_eval(const Model& model, double x) { return 1.0 - one_minus_g_gap(model, 1.0 - x); }
inline Complex f_eval(const Model& model, Complex z) { return 1.0 - one_minus_f_gap(model, Complex(1.0) - z); }
inline Complex g_eval(const Model& model, Complex z) { return 1.0 - one_minus_g_gap(model, Complex(1.0) - z); }

inline bool is_heavy(const Model& m) { return std::holds_alternative<HeavyModel>(m); }
inline bool is_very_heavy(const Model& m) { return std::holds_alternative<VeryHeavyModel>(m); }
inline bool is_tabulated(const Model& m) { return std::holds_alternative<TabulatedModel>(m); }

/// Mean offspring (1 for the paper families by construction).
inline double xi_mean(const Model& model) {
    if (const auto* t = std::get_if<TabulatedModel>(&model)) return t->xi_mean;
    return 1.0;
}

// ---------------------------------------------------------------------------
// Exact samplers: inverse transform on the closed-form tail.  Returns the
// smallest n with P(X > n) < u; nullopt when the draw would exceed `cap`.
// ---------------------------------------------------------------------------

namespace detail {

template <class Rng, class TailFn>
std::optional<std::uint64_t> sample_by_tail(Rng& rng, TailFn&& tail, std::uint64_t cap) {
    double u = rng.next_unit();
    if (tail(0) < u) return 0;
    std::uint64_t lo = 0, hi = 1;
    while (tail(hi) >= u) {
        lo = hi;
        if (hi >= cap) return std::nullopt;
        hi = hi >= cap / 2 ? cap : hi * 2;
    }
    while (hi - lo > 1) {
        std::uint64_t mid = lo + (hi - lo) / 2;
        (tail(mid) >= u ? lo : hi) = mid;
    }
    return hi;
}

}  // namespace detail

inline constexpr std::uint64_t kDefaultValueCap = 1ull << 62;

inline std::optional<std::uint64_t> sample_xi(CounterRng& rng, const Model& m,
                                              std::uint64_t cap = kDefaultValueCap) {
    return detail::sample_by_tail(rng, [&](std::uint64_t n) { return xi_tail(m, n); }, cap);
}

inline std::optional<std::uint64_t> sample_eta(CounterRng& rng, const Model& m,
                                               std::uint64_t cap = kDefaultValueCap) {
    return detail::sample_by_tail(rng, [&](std::uint64_t n) { return eta_tail(m, n); }, cap);
}

// ---------------------------------------------------------------------------
// Validation.
// ---------------------------------------------------------------------------

struct ValidationCheck {
    std::string name;
    bool passed = false;
    double value = 0.0;
    std::string detail;
    bool hard = true;  // hard checks gate `ok`; soft ones are informational
};

struct ValidationReport {
    bool ok = true;
    double criticality_residual = 0.0;
    std::vector<ValidationCheck> checks;

    void add(std::string name, bool passed, double value, std::string detail = "", bool hard = true) {
        if (hard && !passed) ok = false;
        checks.push_back({std::move(name), passed, value, std::move(detail), hard});
    }
};

/// Runs every structural invariant of the model and the stationarity
/// criterion integral(0,1) (1-g)/(f-x) dx < infinity.
inline ValidationReport validate_spec(const Model& model) {
    ValidationReport rep;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, HeavyModel>) {
                rep.add("nu in (0,1)", m.nu > 0.0 && m.nu < 1.0, m.nu);
                rep.add("delta in (0,1)", m.delta > 0.0 && m.delta < 1.0, m.delta);
                rep.add("nu < delta", m.nu < m.delta, m.delta - m.nu);
                rep.add("c1 in (0, 1/(1+nu)]", m.c1 > 0.0 && m.c1 <= 1.0 / (1.0 + m.nu), m.c1);
                rep.add("c2 in (0, 1]", m.c2 > 0.0 && m.c2 <= 1.0, m.c2);
                double p1 = 1.0 - m.c1 * (1.0 + m.nu);
                rep.add("P(xi=1) >= 0", p1 >= 0.0, p1);
                if (!rep.ok) return;
                bool nonneg = true;
                for (std::uint64_t k = 0; k <= 64 && nonneg; ++k)
                    nonneg = xi_pmf(model, k) >= 0.0 && eta_pmf(model, k) >= 0.0;
                rep.add("pmf coefficients >= 0", nonneg, 0.0);
                // criticality: E xi = sum_n P(xi>n); closed-form remainder past K
                const std::uint64_t K = 20000;
                detail::KahanSum s;
                for (std::uint64_t n = 0; n <= K; ++n) s.add(xi_tail(model, n));
                // sum_{n >= A} tail(n) = c1 Gamma(A-nu) / (Gamma(1-nu) Gamma(A)), A = K+1
                double rem = m.c1 * std::exp(detail::log_gamma(K + 1.0 - m.nu) -
                                             detail::log_gamma(1.0 - m.nu) - detail::log_gamma(K + 1.0));
                rep.criticality_residual = std::abs(s.value() + rem - 1.0);
                rep.add("criticality |E xi - 1|", rep.criticality_residual < 1e-8, rep.criticality_residual);
                // stationarity criterion; for this family the integrand is
                // (c2/c1) (1-x)^(delta-nu-1), finite iff delta > nu
                double eps = 1e-8;
                auto quad = detail::integrate_adaptive(
                    [&](double x) {
                        double R = 1.0 - x;
                        double fm = one_minus_f_gap(model, R);
                        return one_minus_g_gap(model, R) / (R - fm);
                    },
                    0.0, 1.0 - eps, 1e-12, 1e-9);
                double tail_part = (m.c2 / m.c1) * std::pow(eps, m.delta - m.nu) / (m.delta - m.nu);
                double integral = quad.value + tail_part;
                rep.add("stationarity integral finite", std::isfinite(integral), integral,
                        "integral(0,1) (1-g)/(f-x) dx");
            } else if constexpr (std::is_same_v<T, VeryHeavyModel>) {
                rep.add("a > 0", m.a > 0.0, m.a);
                rep.add("delta in (0,1)", m.delta > 0.0 && m.delta < 1.0, m.delta);
                rep.add("kappa > 0", m.kappa > 0.0, m.kappa);
                rep.add("cc in (0, 1]", m.cc > 0.0 && m.cc <= 1.0, m.cc);
                rep.add("q0 solvable", m.q0 > 0.0 && m.q0 <= 1.0, m.q0);
                rep.add("q0 >= P(xi>1)", m.q0 >= m.xi_cont(1.0), m.q0 - m.xi_cont(1.0));
                bool mono = true;
                for (std::uint64_t n = 1; n < 4096 && mono; ++n) {
                    mono = xi_tail(model, n) <= xi_tail(model, n - 1) + 1e-18 &&
                           eta_tail(model, n) <= eta_tail(model, n - 1) + 1e-18;
                }
                rep.add("tails monotone nonincreasing", mono, 0.0);
                // independent criticality re-check: direct partial sum plus
                // integral bracket for the remainder
                detail::KahanSum s;
                const long K = 1 << 20;
                for (long n = 1; n < K; ++n) s.add(m.xi_cont(static_cast<double>(n)));
                double rem = m.xi_cont.sum_from(K);
                rep.criticality_residual = std::abs(m.q0 + s.value() + rem - 1.0);
                rep.add("criticality |E xi - 1|", rep.criticality_residual < 1e-9, rep.criticality_residual);
                auto quad = detail::integrate_adaptive(
                    [&](double x) {
                        double R = 1.0 - x;
                        return m.eta_survival(R) / m.lambda(R);
                    },
                    0.0, 1.0 - 1e-6, 1e-12, 1e-8, 600);
                double tail_part = m.p * std::pow(1e-6, m.delta) / m.delta;
                rep.add("stationarity integral finite", std::isfinite(quad.value + tail_part),
                        quad.value + tail_part, "integral(0,1) (1-g)/(f-x) dx");
            } else {
                double sx = 0.0, se = 0.0;
                bool nonneg = true;
                for (double v : m.xi_pmf) nonneg = nonneg && v >= 0.0, sx += v;
                for (double v : m.eta_pmf) nonneg = nonneg && v >= 0.0, se += v;
                rep.add("pmf nonnegative", nonneg, 0.0);
                rep.add("xi pmf normalized", std::abs(sx - 1.0) < 1e-9, sx);
                rep.add("eta pmf normalized", std::abs(se - 1.0) < 1e-9, se);
                rep.add("P(eta=0) < 1", m.eta_pmf[0] < 1.0, m.eta_pmf[0]);
                rep.criticality_residual = std::abs(m.xi_mean - 1.0);
                rep.add("criticality |E xi - 1|", rep.criticality_residual < 1e-9,
                        rep.criticality_residual, "tabulated models may be intentionally non-critical",
                        false);
            }
        },
        model);
    return rep;
}

}  // namespace gwi
