#pragma once

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "gwi/models.hpp"
#include "gwi/predict.hpp"
#include "gwi/rng.hpp"
#include "gwi/series.hpp"
#include "gwi/simulate.hpp"

namespace gwi {

// ---------------------------------------------------------------------------
// Tail estimates with Wilson intervals.
// ---------------------------------------------------------------------------

struct WilsonInterval {
    double lo = 0.0;
    double hi = 0.0;
};

inline WilsonInterval wilson_interval(std::uint64_t hits, std::uint64_t n, double level = 0.95) {
    if (n == 0) throw InvalidArgument("wilson_interval: n = 0");
    double z = detail::inv_normal_cdf(0.5 + level / 2.0);
    double nn = static_cast<double>(n), p = static_cast<double>(hits) / nn;
    double z2n = z * z / nn;
    double denom = 1.0 + z2n;
    double center = (p + z2n / 2.0) / denom;
    double half = z * std::sqrt(p * (1.0 - p) / nn + z2n / (4.0 * nn)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct TailEstimate {
    double x = 0.0;
    std::uint64_t hits = 0;
    std::uint64_t reps = 0;
    std::uint64_t aborted = 0;
    double p_hat = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;  // includes the abort fraction as one-sided slack
};

struct McOptions {
    std::uint64_t reps = 100'000;
    std::uint64_t seed = 1;
    int workers = 0;  // 0: GWI_WORKERS env var, else hardware_concurrency
    double ci_level = 0.95;
};

inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("GWI_WORKERS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

/// One pass over `reps` replicas; every grid point is counted on each
/// replica.  Results are a pure function of (sampler, xs, reps, seed):
/// replica r uses CounterRng(seed, r), and worker partials merge by integer
/// addition, so worker count and scheduling never change the output.
template <class Sampler>
std::vector<TailEstimate> mc_tail(Sampler&& sampler, std::span<const double> xs,
                                  const McOptions& opt) {
    if (xs.empty()) throw InvalidArgument("mc_tail: empty grid");
    if (opt.reps == 0) throw InvalidArgument("mc_tail: reps >= 1 required");
    int workers = resolve_workers(opt.workers);
    std::uint64_t chunk = (opt.reps + workers - 1) / workers;

    std::vector<std::vector<std::uint64_t>> hits(static_cast<std::size_t>(workers),
                                                 std::vector<std::uint64_t>(xs.size(), 0));
    std::vector<std::uint64_t> aborted(static_cast<std::size_t>(workers), 0);

    auto run = [&](int w) {
        std::uint64_t lo = static_cast<std::uint64_t>(w) * chunk;
        std::uint64_t hi = std::min(opt.reps, lo + chunk);
        auto& h = hits[static_cast<std::size_t>(w)];
        for (std::uint64_t r = lo; r < hi; ++r) {
            CounterRng rng(opt.seed, r);
            auto res = sampler(rng);
            if (!res.ok()) {
                ++aborted[static_cast<std::size_t>(w)];
                continue;
            }
            double v = static_cast<double>(res.value);
            for (std::size_t i = 0; i < xs.size(); ++i)
                if (v > xs[i]) ++h[i];
        }
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
        for (auto& t : pool) t.join();
    }

    std::uint64_t total_aborted = 0;
    for (auto a : aborted) total_aborted += a;
    std::vector<TailEstimate> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::uint64_t h = 0;
        for (int w = 0; w < workers; ++w) h += hits[static_cast<std::size_t>(w)][i];
        TailEstimate& e = out[i];
        e.x = xs[i];
        e.hits = h;
        e.reps = opt.reps;
        e.aborted = total_aborted;
        e.p_hat = static_cast<double>(h) / static_cast<double>(opt.reps);
        auto ci = wilson_interval(h, opt.reps, opt.ci_level);
        e.ci_lo = ci.lo;
        double abort_slack = static_cast<double>(total_aborted) / static_cast<double>(opt.reps);
        e.ci_hi = std::min(1.0, ci.hi + abort_slack);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Theorem sweeps.
// ---------------------------------------------------------------------------

struct SweepPoint {
    double x = 0.0;
    double prediction = 0.0;
    std::optional<TailEstimate> mc;
    std::optional<double> ratio_mc;
    std::optional<double> exact;     // exact-channel tail value
    std::optional<double> exact_lo;  // bracket / quadrature error band
    std::optional<double> exact_hi;
    std::optional<double> ratio_exact;
};

struct SweepReport {
    std::string kind;          // "theorem1", "theorem2", "stationary", ...
    std::size_t n = 0;         // 0 for stationary sweeps
    double k1 = 0.0, k2 = 0.0;
    double x_lo = 0.0, x_hi = 0.0;
    std::uint64_t reps = 0;
    std::uint64_t seed = 0;
    std::vector<SweepPoint> points;
    // sup over the finite grid only: a lower bound for the theorem's sup
    std::optional<double> sup_err_exact;
    std::optional<double> sup_err_mc;
    double abort_fraction = 0.0;
    std::string notes;
};

inline std::vector<double> geometric_grid(double lo, double hi, std::size_t points) {
    if (points == 0) throw InvalidArgument("geometric_grid: empty grid");
    if (!(lo > 0.0) || !(hi >= lo)) throw InvalidArgument("geometric_grid: need 0 < lo <= hi");
    std::vector<double> g(points);
    if (points == 1) {
        g[0] = lo;
        return g;
    }
    double step = std::log(hi / lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) g[i] = lo * std::exp(step * static_cast<double>(i));
    return g;
}

struct SweepOptions {
    std::uint64_t reps = 0;  // 0: Monte Carlo channel off
    std::uint64_t seed = 1;
    int workers = 0;
    double ci_level = 0.95;
    std::size_t grid_size = 12;
    SimBudget budget;
    bool exact_channel = true;   // exact S_n tails (HeavyModel)
    double exact_rel_tol = 1e-7;
};

/// Theorem 1 / Theorem 2 ratio sweep over the window [x_n, y_n].
inline SweepReport sweep_theorem(const Model& model, std::size_t n, double k1, double k2,
                                 const SweepOptions& opt) {
    Window w = make_window(model, n, k1, k2);
    auto grid = geometric_grid(w.x_lo, w.x_hi, opt.grid_size);

    SweepReport rep;
    rep.kind = is_very_heavy(model) ? "theorem2" : "theorem1";
    rep.n = n;
    rep.k1 = k1;
    rep.k2 = k2;
    rep.x_lo = w.x_lo;
    rep.x_hi = w.x_hi;
    rep.reps = opt.reps;
    rep.seed = opt.seed;
    rep.points.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        rep.points[i].x = grid[i];
        rep.points[i].prediction = ld_prediction(model, n, grid[i]);
    }

    if (opt.exact_channel && is_heavy(model)) {
        double sup = 0.0;
        for (auto& pt : rep.points) {
            auto x_int = static_cast<std::uint64_t>(std::floor(pt.x));
            auto ct = sn_tail_exact(model, n, x_int, opt.exact_rel_tol);
            pt.exact = ct.value;
            pt.exact_lo = std::max(0.0, ct.value - ct.error);
            pt.exact_hi = std::min(1.0, ct.value + ct.error);
            pt.ratio_exact = ct.value / pt.prediction;
            sup = std::max(sup, std::abs(*pt.ratio_exact - 1.0));
        }
        rep.sup_err_exact = sup;
    }
    if (opt.reps > 0) {
        McOptions mo{opt.reps, opt.seed, opt.workers, opt.ci_level};
        auto est = mc_tail(
            [&](CounterRng& rng) { return simulate_sn(rng, model, n, opt.budget); }, grid, mo);
        double sup = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            rep.points[i].mc = est[i];
            rep.points[i].ratio_mc = est[i].p_hat / rep.points[i].prediction;
            sup = std::max(sup, std::abs(*rep.points[i].ratio_mc - 1.0));
        }
        rep.sup_err_mc = sup;
        rep.abort_fraction =
            static_cast<double>(est[0].aborted) / static_cast<double>(est[0].reps);
    }
    rep.notes = "sup over the finite grid (lower bound for the theorem sup)";
    return rep;
}

struct StationarySweepOptions {
    std::uint64_t reps = 0;   // 0: series channel only
    std::uint64_t seed = 1;
    int workers = 0;
    double ci_level = 0.95;
    std::size_t sampler_truncation = 64;  // M in the D_n series sampler
    SimBudget budget;
    bool series_channel = true;
    std::size_t series_points_cap = 1u << 20;
    double series_tol = 1e-10;
};

/// Theorem X1 / X2 ratio sweep: series-computed (and/or sampled) stationary
/// tails against the closed-form prediction.
inline SweepReport sweep_stationary(const Model& model, std::span<const double> x_grid,
                                    const StationarySweepOptions& opt) {
    if (x_grid.empty()) throw InvalidArgument("sweep_stationary: empty grid");
    SweepReport rep;
    rep.kind = "stationary";
    rep.reps = opt.reps;
    rep.seed = opt.seed;
    rep.x_lo = x_grid.front();
    rep.x_hi = x_grid.back();
    rep.points.resize(x_grid.size());
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        rep.points[i].x = x_grid[i];
        rep.points[i].prediction = x_tail_prediction(model, x_grid[i]);
    }

    if (opt.series_channel) {
        double x_max = x_grid.back();
        std::size_t N = 1;
        while (N < 2 * static_cast<std::size_t>(x_max) + 2) N <<= 1;
        if (N > opt.series_points_cap)
            throw InvalidArgument("sweep_stationary: grid reaches beyond the extraction cap; "
                                  "raise series_points_cap or drop the series channel");
        ExtractOptions eopt;
        eopt.value_tol = opt.series_tol;
        PowerSeries ps = stationary_series(model, N, eopt);
        double sup = 0.0;
        for (auto& pt : rep.points) {
            long xi = static_cast<long>(std::floor(pt.x));
            double tv = tail_value(ps, xi);
            auto br = exact_tail(ps, xi);
            pt.exact = tv;
            pt.exact_lo = br.lo;
            pt.exact_hi = br.hi;
            pt.ratio_exact = tv / pt.prediction;
            sup = std::max(sup, std::abs(*pt.ratio_exact - 1.0));
        }
        rep.sup_err_exact = sup;
    }
    if (opt.reps > 0) {
        McOptions mo{opt.reps, opt.seed, opt.workers, opt.ci_level};
        auto est = mc_tail(
            [&](CounterRng& rng) {
                return sample_stationary_x(rng, model, opt.sampler_truncation, opt.budget);
            },
            x_grid, mo);
        double sup = 0.0;
        for (std::size_t i = 0; i < x_grid.size(); ++i) {
            rep.points[i].mc = est[i];
            rep.points[i].ratio_mc = est[i].p_hat / rep.points[i].prediction;
            sup = std::max(sup, std::abs(*rep.points[i].ratio_mc - 1.0));
        }
        rep.sup_err_mc = sup;
        rep.abort_fraction =
            static_cast<double>(est[0].aborted) / static_cast<double>(est[0].reps);
        rep.notes = "sampler truncation M = " + std::to_string(opt.sampler_truncation) +
                    ", bias bound " +
                    std::to_string(stationary_truncation_bias(model, opt.sampler_truncation));
    }
    return rep;
}

}  // namespace gwi
