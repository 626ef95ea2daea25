#pragma once

#include <cmath>
#include <optional>

#include "gwi/models.hpp"
#include "gwi/series.hpp"

namespace gwi {

// ---------------------------------------------------------------------------
// Closed-form asymptotic constants for the implemented families.
//
// HeavyModel (constants, no slowly varying correction):
//   1-h(x)      ~ L3 (1-x)^(1/(1+nu)),          L3 = c1^(-1/(1+nu))
//   P(T > x)    ~ T_tail_const x^(-1/(1+nu)),    = L3 / Gamma(1 - 1/(1+nu))
//   P(Y > x)    ~ L4 x^(-delta/(1+nu)),          L4 = c2 c1^(-d/(1+nu)) / Gamma(1-d/(1+nu))
//   P(X > x)    ~ X_tail_const x^(-(delta-nu)),  = C / Gamma(1+nu-delta),
//                                                C = c2 / (c1 (delta-nu))
// VeryHeavyModel (nu = 0): P(X > x) ~ p delta^-1 / Gamma(1-delta) x^-delta;
// the L4 correction is evaluated numerically through g(h(.)).
// ---------------------------------------------------------------------------

struct AsymptoticConstants {
    std::optional<double> L3_limit;
    std::optional<double> L4_limit;
    std::optional<double> T_tail_const;
    std::optional<double> X_tail_const;
    std::optional<double> p;  // nu = 0 family only
};

inline AsymptoticConstants asymptotic_constants(const Model& model) {
    AsymptoticConstants out;
    if (const auto* m = std::get_if<HeavyModel>(&model)) {
        double e = m->delta / (1.0 + m->nu);
        out.L3_limit = std::pow(m->c1, -1.0 / (1.0 + m->nu));
        out.L4_limit = m->c2 * std::pow(m->c1, -e) * std::exp(-detail::log_gamma(1.0 - e));
        out.T_tail_const =
            *out.L3_limit * std::exp(-detail::log_gamma(1.0 - 1.0 / (1.0 + m->nu)));
        double C = m->c2 / (m->c1 * (m->delta - m->nu));
        out.X_tail_const = C * std::exp(-detail::log_gamma(1.0 + m->nu - m->delta));
    } else if (const auto* v = std::get_if<VeryHeavyModel>(&model)) {
        out.p = v->p;
        out.X_tail_const = v->p / v->delta * std::exp(-detail::log_gamma(1.0 - v->delta));
    } else {
        throw InvalidArgument("asymptotic_constants: tabulated models have no paper asymptotics");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Theorem right-hand sides.
// ---------------------------------------------------------------------------

/// P(Y^(inf) > x) prediction.  HeavyModel: pure power law.  VeryHeavyModel:
/// the slowly varying correction is evaluated numerically as
/// (1 - g(h(1-1/x))) / Gamma(1-delta)  (Tauberian conversion at s = 1-1/x).
inline double y_tail_prediction(const Model& model, double x) {
    if (!(x >= 1.0)) throw InvalidArgument("y_tail_prediction: x >= 1 required");
    if (const auto* m = std::get_if<HeavyModel>(&model)) {
        double e = m->delta / (1.0 + m->nu);
        double L4 = m->c2 * std::pow(m->c1, -e) * std::exp(-detail::log_gamma(1.0 - e));
        return L4 * std::pow(x, -e);
    }
    if (const auto* v = std::get_if<VeryHeavyModel>(&model)) {
        double h = total_progeny_pgf(model, 1.0 - 1.0 / x);
        double omg = one_minus_g_gap(model, 1.0 - h);
        return omg * std::exp(-detail::log_gamma(1.0 - v->delta));
    }
    throw InvalidArgument("y_tail_prediction: tabulated models unsupported");
}

/// Theorem 1/2 right-hand side n x^(-delta/(1+nu)) L(x); by Proposition 1's
/// structure this is exactly n * y_tail_prediction(x).  Values above 1 are
/// returned as-is: validity is claimed only inside the window.
inline double ld_prediction(const Model& model, std::size_t n, double x) {
    if (n < 1) throw InvalidArgument("ld_prediction: n >= 1 required");
    return static_cast<double>(n) * y_tail_prediction(model, x);
}

/// Theorem X1 / X2 stationary tail prediction (pure power in both families).
inline double x_tail_prediction(const Model& model, double x) {
    if (!(x >= 1.0)) throw InvalidArgument("x_tail_prediction: x >= 1 required");
    auto c = asymptotic_constants(model);
    if (const auto* m = std::get_if<HeavyModel>(&model))
        return *c.X_tail_const * std::pow(x, -(m->delta - m->nu));
    const auto& v = std::get<VeryHeavyModel>(model);
    return *c.X_tail_const * std::pow(x, -v.delta);
}

/// Eq. (2.4) total-progeny tail; defined for nu in (0,1) only (the Tauberian
/// constant degenerates at index 1).
inline double t_tail_prediction(const Model& model, double x) {
    if (!(x >= 1.0)) throw InvalidArgument("t_tail_prediction: x >= 1 required");
    const auto* m = std::get_if<HeavyModel>(&model);
    if (!m)
        throw InvalidArgument("t_tail_prediction: defined for the heavy (nu>0) family only");
    auto c = asymptotic_constants(model);
    return *c.T_tail_const * std::pow(x, -1.0 / (1.0 + m->nu));
}

// ---------------------------------------------------------------------------
// Theorem windows.
// ---------------------------------------------------------------------------

struct Window {
    std::size_t n = 0;
    double k1 = 0.0;
    double k2 = 0.0;
    double x_lo = 0.0;
    double x_hi = 0.0;
};

/// Theorem 1 window for nu > 0 (x_n = n^{(1+nu)/delta + k1}, y_n =
/// n^{(1+nu)/nu - k2}); Theorem 2 window for nu = 0 (x_n = n^{1/delta + k1},
/// y_n = n^{k2}).  All constraint violations throw InfeasibleWindow.
inline Window make_window(const Model& model, std::size_t n, double k1, double k2) {
    if (n < 2) throw InfeasibleWindow("window: n >= 2 required");
    Window w;
    w.n = n;
    w.k1 = k1;
    w.k2 = k2;
    double nd = static_cast<double>(n);
    if (const auto* m = std::get_if<HeavyModel>(&model)) {
        if (!(k1 > 0.0 && k2 > 0.0)) throw InfeasibleWindow("window: k1, k2 must be > 0");
        double slack = (1.0 + m->nu) * (1.0 / m->nu - 1.0 / m->delta);
        if (!(k1 + k2 < slack))
            throw InfeasibleWindow("window: need k1 + k2 < (1+nu)(1/nu - 1/delta) = " +
                                   std::to_string(slack));
        if (!(k2 < (1.0 + m->nu) / m->nu))
            throw InfeasibleWindow("window: need k2 < (1+nu)/nu");
        w.x_lo = std::pow(nd, (1.0 + m->nu) / m->delta + k1);
        w.x_hi = std::pow(nd, (1.0 + m->nu) / m->nu - k2);
    } else if (const auto* v = std::get_if<VeryHeavyModel>(&model)) {
        if (!(k1 > 0.0 && k2 > 0.0)) throw InfeasibleWindow("window: k1, k2 must be > 0");
        if (!(k2 - k1 > 1.0 / v->delta))
            throw InfeasibleWindow("window: need k2 - k1 > 1/delta = " +
                                   std::to_string(1.0 / v->delta));
        w.x_lo = std::pow(nd, 1.0 / v->delta + k1);
        w.x_hi = std::pow(nd, k2);
    } else {
        throw InvalidArgument("window: tabulated models have no theorem window");
    }
    if (!(w.x_lo < w.x_hi)) throw InfeasibleWindow("window: x_lo >= x_hi at this n");
    return w;
}

}  // namespace gwi
