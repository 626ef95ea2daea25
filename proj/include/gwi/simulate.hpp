#pragma once

#include <cstdint>
#include <vector>

#include "gwi/models.hpp"
#include "gwi/rng.hpp"

namespace gwi {

/// Hard budgets for a single replica.  Exceeding any of them aborts the
/// replica with a distinguishable status; values are never silently clipped.
struct SimBudget {
    std::uint64_t pop_cap = 100'000'000;      // max population per generation
    std::uint64_t gen_cap = 100'000;          // max generations when closing a family
    std::uint64_t step_cap = 1'000'000'000;   // max walk steps for total progeny
    std::uint64_t value_cap = kDefaultValueCap;  // per-draw sampler cap
};

enum class SimStatus : std::uint8_t { ok = 0, pop_cap, gen_cap, step_cap, value_cap };

inline const char* to_string(SimStatus s) {
    switch (s) {
        case SimStatus::ok: return "ok";
        case SimStatus::pop_cap: return "pop_cap";
        case SimStatus::gen_cap: return "gen_cap";
        case SimStatus::step_cap: return "step_cap";
        case SimStatus::value_cap: return "value_cap";
    }
    return "?";
}

struct CountResult {
    SimStatus status = SimStatus::ok;
    std::uint64_t value = 0;
    bool ok() const { return status == SimStatus::ok; }
};

/// theta o k: sum of k independent offspring draws (no distributional
/// shortcut), abort once the running sum passes pop_cap.
inline CountResult branch_sum(CounterRng& rng, const Model& m, std::uint64_t k,
                              const SimBudget& budget) {
    std::uint64_t sum = 0;
    for (std::uint64_t i = 0; i < k; ++i) {
        auto d = sample_xi(rng, m, budget.value_cap);
        if (!d) return {SimStatus::value_cap, sum};
        sum += *d;
        if (sum > budget.pop_cap) return {SimStatus::pop_cap, sum};
    }
    return {SimStatus::ok, sum};
}

/// One GWI transition: X_n = sum_{i<=X_{n-1}} xi_i + eta_n.
inline CountResult gwi_step(CounterRng& rng, const Model& m, std::uint64_t x_prev,
                            const SimBudget& budget) {
    auto off = branch_sum(rng, m, x_prev, budget);
    if (!off.ok()) return off;
    auto im = sample_eta(rng, m, budget.value_cap);
    if (!im) return {SimStatus::value_cap, off.value};
    std::uint64_t x = off.value + *im;
    if (x > budget.pop_cap) return {SimStatus::pop_cap, x};
    return {SimStatus::ok, x};
}

/// S_n = X_1 + ... + X_n from X_0 = 0.
inline CountResult simulate_sn(CounterRng& rng, const Model& m, std::size_t n,
                               const SimBudget& budget) {
    std::uint64_t x = 0, s = 0;
    for (std::size_t t = 0; t < n; ++t) {
        auto r = gwi_step(rng, m, x, budget);
        if (!r.ok()) return {r.status, s};
        x = r.value;
        s += x;
        if (s > (1ull << 62)) return {SimStatus::pop_cap, s};
    }
    return {SimStatus::ok, s};
}

/// Total progeny of z0 ancestors via the first passage of the left-continuous
/// walk with steps xi - 1 (Otter-Dwass order).
inline CountResult total_progeny(CounterRng& rng, const Model& m, std::uint64_t z0,
                                 const SimBudget& budget) {
    std::uint64_t waiting = z0;
    std::uint64_t t = 0;
    while (waiting > 0) {
        if (t >= budget.step_cap) return {SimStatus::step_cap, t};
        auto d = sample_xi(rng, m, budget.value_cap);
        if (!d) return {SimStatus::value_cap, t};
        waiting += *d;
        waiting -= 1;
        ++t;
        if (waiting > budget.pop_cap) return {SimStatus::pop_cap, t};
    }
    return {SimStatus::ok, t};
}

// ---------------------------------------------------------------------------
// Coupled decomposition S_n = S_{n,1} - S_{n,2}: the process is run cohort by
// cohort (one cohort = all eta_i immigrants of one epoch), every cohort still
// alive at time n is closed by running it to extinction.  The identity then
// holds exactly, pathwise, by construction.
// ---------------------------------------------------------------------------

struct FamilyRecord {
    std::uint32_t arrival = 0;      // epoch i
    std::uint64_t immigrants = 0;   // eta_i
    std::uint64_t total = 0;        // family progeny: window part + closure part
};

struct PathSample {
    SimStatus status = SimStatus::ok;
    std::vector<std::uint64_t> traj;  // X_1 .. X_n
    std::uint64_t s_n = 0;
    std::uint64_t s_n1 = 0;
    std::uint64_t s_n2 = 0;
    std::vector<FamilyRecord> per_immigrant;
    bool ok() const { return status == SimStatus::ok; }
};

inline PathSample simulate_coupled(CounterRng& rng, const Model& m, std::size_t n,
                                   const SimBudget& budget) {
    PathSample out;
    std::vector<std::uint64_t> alive(n + 1, 0);   // current population of cohort i
    std::vector<std::uint64_t> window(n + 1, 0);  // within-window progeny per cohort
    std::vector<std::uint64_t> etas(n + 1, 0);
    out.traj.reserve(n);
    for (std::size_t t = 1; t <= n; ++t) {
        std::uint64_t x_t = 0;
        for (std::size_t i = 1; i < t; ++i) {
            if (alive[i] == 0) continue;
            auto r = branch_sum(rng, m, alive[i], budget);
            if (!r.ok()) {
                out.status = r.status;
                return out;
            }
            alive[i] = r.value;
            window[i] += r.value;
            x_t += r.value;
            if (x_t > budget.pop_cap) {
                out.status = SimStatus::pop_cap;
                return out;
            }
        }
        auto im = sample_eta(rng, m, budget.value_cap);
        if (!im) {
            out.status = SimStatus::value_cap;
            return out;
        }
        etas[t] = *im;
        alive[t] = *im;
        window[t] += *im;
        x_t += *im;
        if (x_t > budget.pop_cap) {
            out.status = SimStatus::pop_cap;
            return out;
        }
        out.traj.push_back(x_t);
        out.s_n += x_t;
    }
    // close every family still alive at time n
    for (std::size_t i = 1; i <= n; ++i) {
        std::uint64_t z = alive[i], closure = 0, gens = 0;
        while (z > 0) {
            if (++gens > budget.gen_cap) {
                out.status = SimStatus::gen_cap;
                return out;
            }
            auto r = branch_sum(rng, m, z, budget);
            if (!r.ok()) {
                out.status = r.status;
                return out;
            }
            z = r.value;
            closure += z;
            if (closure > (1ull << 62)) {
                out.status = SimStatus::pop_cap;
                return out;
            }
        }
        out.s_n2 += closure;
        out.per_immigrant.push_back({static_cast<std::uint32_t>(i), etas[i], window[i] + closure});
    }
    out.s_n1 = out.s_n + out.s_n2;
    return out;
}

// ---------------------------------------------------------------------------
// Stationary sampler via the series representation X = sum_n D_n, where D_n
// is a fresh immigration batch pushed through n branching generations.  The
// truncation at M is reported through series::stationary_truncation_bias.
// ---------------------------------------------------------------------------

inline CountResult sample_stationary_x(CounterRng& rng, const Model& m, std::size_t M,
                                       const SimBudget& budget) {
    std::uint64_t acc = 0;
    for (std::size_t stage = 0; stage <= M; ++stage) {
        auto im = sample_eta(rng, m, budget.value_cap);
        if (!im) return {SimStatus::value_cap, acc};
        std::uint64_t d = *im;
        for (std::size_t j = 0; j < stage && d > 0; ++j) {
            auto r = branch_sum(rng, m, d, budget);
            if (!r.ok()) return {r.status, acc};
            d = r.value;
        }
        acc += d;
        if (acc > (1ull << 62)) return {SimStatus::pop_cap, acc};
    }
    return {SimStatus::ok, acc};
}

}  // namespace gwi
