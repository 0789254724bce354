#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "ucadmm/model.hpp"
#include "ucadmm/piecewise_quadratic.hpp"

namespace ucadmm {

/// Stage cost of one step for a single unit under the relaxed balance:
/// on-cost(p) = a + b p + c p^2 - lambda p + (rho/2)(residual - p)^2 on
/// [p_min, p_max]; off-cost is the penalty constant (rho/2) residual^2.
struct StageCost {
    PiecewiseQuadratic on_cost;
    double off_cost = 0.0;
};

inline StageCost build_stage_cost(const GeneratorSpec& gen, double lambda_t, double residual_t,
                                  double rho) {
    const double q2 = gen.c + 0.5 * rho;
    const double q1 = gen.b - lambda_t - rho * residual_t;
    const double q0 = gen.a + 0.5 * rho * residual_t * residual_t;
    StageCost s;
    s.on_cost = PiecewiseQuadratic::single(gen.p_min, gen.p_max, q2, q1, q0);
    s.off_cost = 0.5 * rho * residual_t * residual_t;
    return s;
}

struct UnitCommitmentResult {
    bool feasible = false;
    std::vector<std::uint8_t> u, v, w;
    std::vector<double> p;
    double value = std::numeric_limits<double>::infinity();
};

/// Stage objective of a concrete single-unit schedule; equals the DP value of
/// the optimal schedule.
inline double evaluate_unit_objective(const GeneratorSpec& gen, std::span<const double> lambda,
                                      std::span<const double> residual, double rho,
                                      const UnitCommitmentResult& r) {
    double total = 0.0;
    for (std::size_t t = 0; t < lambda.size(); ++t) {
        const double pt = r.p[t];
        if (r.u[t])
            total += gen.a + gen.b * pt + gen.c * pt * pt - lambda[t] * pt;
        if (r.v[t]) total += gen.start_cost;
        const double gap = residual[t] - pt;
        total += 0.5 * rho * gap * gap;
    }
    return total;
}

namespace dp_detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Value function for an on-state, one per surviving on-run origin.
struct OnFn {
    PiecewiseQuadratic f;
    int pred_k = 0;    // on-duration state at t-1 (0 = started at this step)
    int pred_idx = 0;  // function index within that state's list
};

struct OffVal {
    double value = kInf;
    bool from_shutdown = false;
    int pred_k = 0;    // off-duration state at t-1 (stay transitions)
    int pred_idx = 0;  // shutdown: index of the ON(cap) function that was closed
};

struct DpLevel {
    std::vector<std::vector<OnFn>> on;  // index k-1 for on-duration k = 1..UT
    std::vector<OffVal> off;            // index k-1 for off-duration k = 1..DT
};

/// Remove value functions that are strictly worse than a sibling everywhere.
inline void prune_dominated(std::vector<OnFn>& fns) {
    if (fns.size() < 2) return;
    std::vector<bool> dead(fns.size(), false);
    for (std::size_t i = 0; i < fns.size(); ++i) {
        if (dead[i]) continue;
        for (std::size_t j = 0; j < fns.size(); ++j) {
            if (i == j || dead[j] || dead[i]) continue;
            const auto diff = fns[j].f.max_difference_over(fns[i].f);
            if (diff && *diff < 0.0) dead[i] = true;  // j strictly below i on dom(i)
        }
    }
    std::vector<OnFn> kept;
    kept.reserve(fns.size());
    for (std::size_t i = 0; i < fns.size(); ++i)
        if (!dead[i]) kept.push_back(std::move(fns[i]));
    fns = std::move(kept);
}

}  // namespace dp_detail

/// Exact minimizer of the single-unit stage objective subject to the unit's
/// output bounds, min up/down times, ramp and start/stop limits, and the
/// 3-bin transition logic. On/off ties prefer off; flat argmins take the
/// leftmost point.
inline UnitCommitmentResult solve_1uc(const GeneratorSpec& gen, std::span<const double> lambda,
                                      std::span<const double> residual, double rho,
                                      int initial_status, double initial_power) {
    using namespace dp_detail;
    const int T = static_cast<int>(lambda.size());
    if (residual.size() != lambda.size())
        throw std::invalid_argument("solve_1uc: lambda/residual length mismatch");
    if (initial_status == 0)
        throw std::invalid_argument("solve_1uc: initial_status must be nonzero");
    if (T == 0) return UnitCommitmentResult{true, {}, {}, {}, {}, 0.0};

    const int UT = gen.min_uptime, DT = gen.min_downtime;
    const double su_cap = std::min(gen.startup_limit, gen.p_max);
    const double sd_cap = std::min(gen.shutdown_limit, gen.p_max);

    std::vector<DpLevel> levels(static_cast<std::size_t>(T) + 1);
    for (auto& level : levels) {
        level.on.resize(static_cast<std::size_t>(UT));
        level.off.resize(static_cast<std::size_t>(DT));
    }

    // level 0: the initial condition as a point mass / scalar
    if (initial_status > 0) {
        const int k = std::min(initial_status, UT);
        levels[0].on[static_cast<std::size_t>(k - 1)].push_back(
            OnFn{PiecewiseQuadratic::point(initial_power, 0.0), k, 0});
    } else {
        const int k = std::min(-initial_status, DT);
        levels[0].off[static_cast<std::size_t>(k - 1)] = OffVal{0.0, false, k, 0};
    }

    for (int t = 1; t <= T; ++t) {
        const StageCost stage =
            build_stage_cost(gen, lambda[static_cast<std::size_t>(t - 1)],
                             residual[static_cast<std::size_t>(t - 1)], rho);
        const auto& on_q = stage.on_cost.pieces().front();
        DpLevel& prev = levels[static_cast<std::size_t>(t - 1)];
        DpLevel& cur = levels[static_cast<std::size_t>(t)];

        auto stay_on = [&](int from_k, std::vector<OnFn>& dst) {
            const auto& src = prev.on[static_cast<std::size_t>(from_k - 1)];
            for (std::size_t idx = 0; idx < src.size(); ++idx) {
                PiecewiseQuadratic g = src[idx].f.min_over_window(gen.ramp_down, gen.ramp_up)
                                           .restrict_to(gen.p_min, gen.p_max);
                if (g.empty()) continue;
                dst.push_back(OnFn{g.add_quadratic(on_q.q2, on_q.q1, on_q.q0), from_k,
                                   static_cast<int>(idx)});
            }
        };

        for (int k = 2; k < UT; ++k)
            stay_on(k - 1, cur.on[static_cast<std::size_t>(k - 1)]);
        if (UT >= 2) {
            stay_on(UT - 1, cur.on[static_cast<std::size_t>(UT - 1)]);
            stay_on(UT, cur.on[static_cast<std::size_t>(UT - 1)]);
        } else {
            stay_on(1, cur.on[0]);
        }

        // start: only from the capped off state, output limited by SU
        const OffVal& off_cap = prev.off[static_cast<std::size_t>(DT - 1)];
        if (off_cap.value < kInf) {
            PiecewiseQuadratic f = stage.on_cost.restrict_to(gen.p_min, su_cap);
            if (!f.empty())
                cur.on[0].push_back(
                    OnFn{f.add_constant(gen.start_cost + off_cap.value), 0, DT});
        }

        for (auto& list : cur.on) prune_dominated(list);

        // shutdown: only from the capped on state, previous output limited by SD
        OffVal shut;
        for (std::size_t idx = 0; idx < prev.on[static_cast<std::size_t>(UT - 1)].size();
             ++idx) {
            const auto& fn = prev.on[static_cast<std::size_t>(UT - 1)][idx];
            const auto m = fn.f.min_restricted(gen.p_min, sd_cap);
            if (m && m->second < shut.value)
                shut = OffVal{m->second, true, UT, static_cast<int>(idx)};
        }

        for (int k = 1; k <= DT; ++k) {
            OffVal best;
            if (k == 1) best = shut;
            if (k >= 2 && prev.off[static_cast<std::size_t>(k - 2)].value < best.value)
                best = OffVal{prev.off[static_cast<std::size_t>(k - 2)].value, false, k - 1, 0};
            if (k == DT && prev.off[static_cast<std::size_t>(DT - 1)].value <= best.value)
                best = OffVal{prev.off[static_cast<std::size_t>(DT - 1)].value, false, DT, 0};
            if (best.value < kInf) {
                best.value += stage.off_cost;
                cur.off[static_cast<std::size_t>(k - 1)] = best;
            }
        }
    }

    // terminal choice: off states first so exact ties prefer off
    const DpLevel& last = levels[static_cast<std::size_t>(T)];
    double best_value = kInf;
    bool best_is_on = false;
    int best_k = 0, best_idx = 0;
    double best_p = 0.0;
    for (int k = 1; k <= DT; ++k) {
        const double val = last.off[static_cast<std::size_t>(k - 1)].value;
        if (val < best_value) {
            best_value = val;
            best_is_on = false;
            best_k = k;
        }
    }
    for (int k = 1; k <= UT; ++k) {
        const auto& list = last.on[static_cast<std::size_t>(k - 1)];
        for (std::size_t idx = 0; idx < list.size(); ++idx) {
            const auto [pstar, val] = list[idx].f.argmin();
            if (val < best_value) {
                best_value = val;
                best_is_on = true;
                best_k = k;
                best_idx = static_cast<int>(idx);
                best_p = pstar;
            }
        }
    }
    if (!(best_value < kInf)) {
        UnitCommitmentResult r;
        r.feasible = false;
        return r;
    }

    UnitCommitmentResult r;
    r.feasible = true;
    r.u.assign(static_cast<std::size_t>(T), 0);
    r.v.assign(static_cast<std::size_t>(T), 0);
    r.w.assign(static_cast<std::size_t>(T), 0);
    r.p.assign(static_cast<std::size_t>(T), 0.0);
    r.value = best_value;

    bool cur_on = best_is_on;
    int cur_k = best_k, cur_idx = best_idx;
    double cur_p = best_p;
    for (int t = T; t >= 1; --t) {
        const DpLevel& level = levels[static_cast<std::size_t>(t)];
        const std::size_t ti = static_cast<std::size_t>(t - 1);
        if (cur_on) {
            const OnFn& fn = level.on[static_cast<std::size_t>(cur_k - 1)]
                                     [static_cast<std::size_t>(cur_idx)];
            r.u[ti] = 1;
            r.p[ti] = cur_p;
            if (fn.pred_k == 0) {  // unit started at t
                r.v[ti] = 1;
                cur_on = false;
                cur_k = fn.pred_idx;  // capped off state
                cur_idx = 0;
                cur_p = 0.0;
            } else {
                const OnFn& pred = levels[static_cast<std::size_t>(t - 1)]
                                       .on[static_cast<std::size_t>(fn.pred_k - 1)]
                                           [static_cast<std::size_t>(fn.pred_idx)];
                auto m = pred.f.min_restricted(cur_p - gen.ramp_up, cur_p + gen.ramp_down);
                if (!m) {
                    // the window can miss the predecessor domain by one ulp
                    const double eps = 1e-10 * (1.0 + std::abs(cur_p));
                    m = pred.f.min_restricted(cur_p - gen.ramp_up - eps,
                                              cur_p + gen.ramp_down + eps);
                }
                if (!m) throw std::logic_error("solve_1uc: broken ramp back-pointer");
                cur_on = true;
                cur_k = fn.pred_k;
                cur_idx = fn.pred_idx;
                cur_p = m->first;
            }
        } else {
            const OffVal& off = level.off[static_cast<std::size_t>(cur_k - 1)];
            r.u[ti] = 0;
            r.p[ti] = 0.0;
            if (off.from_shutdown) {
                r.w[ti] = 1;
                const OnFn& pred = levels[static_cast<std::size_t>(t - 1)]
                                       .on[static_cast<std::size_t>(off.pred_k - 1)]
                                           [static_cast<std::size_t>(off.pred_idx)];
                const auto m = pred.f.min_restricted(gen.p_min, sd_cap);
                if (!m) throw std::logic_error("solve_1uc: broken shutdown back-pointer");
                cur_on = true;
                cur_k = off.pred_k;
                cur_idx = off.pred_idx;
                cur_p = m->first;
            } else {
                cur_on = false;
                cur_k = off.pred_k;
                cur_idx = 0;
            }
        }
    }
    return r;
}

inline UnitCommitmentResult solve_1uc(const GeneratorSpec& gen, std::span<const double> lambda,
                                      std::span<const double> residual, double rho) {
    return solve_1uc(gen, lambda, residual, rho, gen.initial_status, gen.p0);
}

}  // namespace ucadmm
