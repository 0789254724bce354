#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "ucadmm/matrix.hpp"

namespace ucadmm {

/// Thermal generator. Costs are a (per committed step), b (per MWh) and
/// c (per MWh^2); start_cost is charged on every off->on transition.
/// initial_status is signed: +k = on for k steps entering the horizon with
/// output p0, -k = off for k steps.
struct GeneratorSpec {
    std::string id;
    std::string node;
    double p_min = 0.0;
    double p_max = 0.0;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double start_cost = 0.0;
    double ramp_up = 0.0;
    double ramp_down = 0.0;
    double startup_limit = 0.0;
    double shutdown_limit = 0.0;
    int min_uptime = 1;
    int min_downtime = 1;
    int initial_status = -1;
    double p0 = 0.0;

    bool initially_on() const { return initial_status > 0; }
    int initial_run() const { return std::abs(initial_status); }
};

struct RenewableSpec {
    std::string id;
    std::string node;
    double p_max = 0.0;
    std::vector<double> availability;  // one factor in [0,1] per step
};

struct StorageSpec {
    std::string id;
    std::string node;
    double charge_limit = 0.0;
    double discharge_limit = 0.0;
    double energy_min = 0.0;
    double energy_max = 0.0;
    double charge_eff = 1.0;
    double discharge_eff = 1.0;
    double initial_energy = 0.0;
};

/// Directed line. Positive flow runs from `from` to `to`; f_min <= 0 allows
/// reverse flow up to |f_min|.
struct LineSpec {
    std::string id;
    std::string from;
    std::string to;
    double f_min = 0.0;
    double f_max = 0.0;
};

struct NodeSpec {
    std::string id;
    std::vector<double> demand;  // MW per step
};

struct UcInstance {
    int horizon = 0;
    std::vector<NodeSpec> nodes;
    std::vector<GeneratorSpec> generators;
    std::vector<RenewableSpec> renewables;
    std::vector<StorageSpec> storage;
    std::vector<LineSpec> lines;

    int node_index(const std::string& id) const {
        for (std::size_t n = 0; n < nodes.size(); ++n)
            if (nodes[n].id == id) return static_cast<int>(n);
        return -1;
    }
};

/// All decision variables over the horizon. Rows are units (instance order),
/// columns are time steps.
struct Schedule {
    Matrix<std::uint8_t> u, v, w;   // G x T commitment / start / stop
    Matrix<double> p;               // G x T generator output
    Matrix<double> p_res;           // R x T renewable output
    Matrix<double> pc, pd, pe, p_st;  // S x T charge, discharge, energy, net
    Matrix<double> inj;             // N x T power drawn from the grid
    Matrix<double> f;               // L x T line flows

    static Schedule zeros(const UcInstance& inst) {
        Schedule s;
        const auto G = inst.generators.size();
        const auto R = inst.renewables.size();
        const auto S = inst.storage.size();
        const auto N = inst.nodes.size();
        const auto L = inst.lines.size();
        const auto T = static_cast<std::size_t>(inst.horizon);
        s.u = Matrix<std::uint8_t>(G, T);
        s.v = Matrix<std::uint8_t>(G, T);
        s.w = Matrix<std::uint8_t>(G, T);
        s.p = Matrix<double>(G, T);
        s.p_res = Matrix<double>(R, T);
        s.pc = Matrix<double>(S, T);
        s.pd = Matrix<double>(S, T);
        s.p_st = Matrix<double>(S, T);
        s.pe = Matrix<double>(S, T);
        for (std::size_t i = 0; i < S; ++i)
            for (std::size_t t = 0; t < T; ++t) s.pe(i, t) = inst.storage[i].initial_energy;
        s.inj = Matrix<double>(N, T);
        s.f = Matrix<double>(L, T);
        return s;
    }

    friend bool operator==(const Schedule& a, const Schedule& b) {
        return a.u == b.u && a.v == b.v && a.w == b.w && a.p == b.p && a.p_res == b.p_res &&
               a.pc == b.pc && a.pd == b.pd && a.pe == b.pe && a.p_st == b.p_st &&
               a.inj == b.inj && a.f == b.f;
    }
};

/// One reported constraint or invariant violation.
struct Violation {
    std::string constraint;  // short family name, e.g. "max_output"
    std::string entity;      // unit / node / line id
    int step = 0;            // 1-based step, 0 when not step specific
    double magnitude = 0.0;
    std::string detail;
};

inline std::string violation_summary(const std::vector<Violation>& report) {
    std::ostringstream os;
    for (const auto& v : report) {
        os << v.constraint << " [" << v.entity << "]";
        if (v.step > 0) os << " t=" << v.step;
        if (!v.detail.empty()) os << ": " << v.detail;
        os << "\n";
    }
    return os.str();
}

namespace detail {

inline void check_series_length(std::vector<Violation>& out, const std::string& entity,
                                const char* what, std::size_t got, int horizon) {
    if (got != static_cast<std::size_t>(horizon)) {
        Violation v;
        v.constraint = "series_length";
        v.entity = entity;
        v.magnitude = static_cast<double>(got);
        v.detail = std::string(what) + " has length " + std::to_string(got) +
                   ", horizon is " + std::to_string(horizon);
        out.push_back(v);
    }
}

inline void add_violation(std::vector<Violation>& out, std::string constraint, std::string entity,
                          int step, double magnitude, std::string detail = {}) {
    out.push_back(Violation{std::move(constraint), std::move(entity), step, magnitude,
                            std::move(detail)});
}

}  // namespace detail

/// Checks every type invariant; an empty report means the instance is valid.
inline std::vector<Violation> validate_instance(const UcInstance& inst) {
    using detail::add_violation;
    std::vector<Violation> out;
    if (inst.horizon < 1)
        add_violation(out, "horizon", "instance", 0, inst.horizon, "horizon must be >= 1");

    for (const auto& node : inst.nodes) {
        detail::check_series_length(out, node.id, "demand", node.demand.size(), inst.horizon);
        for (std::size_t t = 0; t < node.demand.size(); ++t) {
            if (node.demand[t] < 0.0)
                add_violation(out, "demand_sign", node.id, static_cast<int>(t) + 1,
                              -node.demand[t], "demand must be nonnegative");
        }
    }

    for (const auto& g : inst.generators) {
        if (inst.node_index(g.node) < 0)
            add_violation(out, "node_ref", g.id, 0, 0.0, "unknown node '" + g.node + "'");
        if (!(0.0 <= g.p_min && g.p_min <= g.p_max))
            add_violation(out, "output_bounds", g.id, 0, g.p_min - g.p_max,
                          "requires 0 <= p_min <= p_max");
        if (g.c < 0.0)
            add_violation(out, "cost_curvature", g.id, 0, -g.c, "quadratic cost must be >= 0");
        if (g.ramp_up < 0.0 || g.ramp_down < 0.0)
            add_violation(out, "ramp_sign", g.id, 0, std::min(g.ramp_up, g.ramp_down),
                          "ramp limits must be >= 0");
        if (g.startup_limit < g.p_min)
            add_violation(out, "startup_limit", g.id, 0, g.p_min - g.startup_limit,
                          "startup_limit must be >= p_min");
        if (g.shutdown_limit < g.p_min)
            add_violation(out, "shutdown_limit", g.id, 0, g.p_min - g.shutdown_limit,
                          "shutdown_limit must be >= p_min");
        if (g.min_uptime < 1 || g.min_downtime < 1)
            add_violation(out, "min_times", g.id, 0, std::min(g.min_uptime, g.min_downtime),
                          "min up/down times must be >= 1");
        if (g.initial_status == 0)
            add_violation(out, "initial_status", g.id, 0, 0.0,
                          "initial_status must be nonzero signed steps");
        if (g.initially_on() && (g.p0 < g.p_min || g.p0 > g.p_max))
            add_violation(out, "initial_power", g.id, 0,
                          std::max(g.p_min - g.p0, g.p0 - g.p_max),
                          "p0 must lie in [p_min, p_max] for an initially-on unit");
    }

    for (const auto& r : inst.renewables) {
        if (inst.node_index(r.node) < 0)
            add_violation(out, "node_ref", r.id, 0, 0.0, "unknown node '" + r.node + "'");
        if (r.p_max < 0.0) add_violation(out, "output_bounds", r.id, 0, -r.p_max);
        detail::check_series_length(out, r.id, "availability", r.availability.size(),
                                    inst.horizon);
        for (std::size_t t = 0; t < r.availability.size(); ++t) {
            const double af = r.availability[t];
            if (af < 0.0 || af > 1.0)
                add_violation(out, "availability_bound", r.id, static_cast<int>(t) + 1,
                              std::max(-af, af - 1.0),
                              "availability factor must lie in [0, 1], got " + std::to_string(af));
        }
    }

    for (const auto& s : inst.storage) {
        if (inst.node_index(s.node) < 0)
            add_violation(out, "node_ref", s.id, 0, 0.0, "unknown node '" + s.node + "'");
        if (s.charge_limit < 0.0 || s.discharge_limit < 0.0)
            add_violation(out, "storage_limits", s.id, 0,
                          std::min(s.charge_limit, s.discharge_limit),
                          "charge/discharge limits must be >= 0");
        if (!(0.0 <= s.energy_min && s.energy_min <= s.initial_energy &&
              s.initial_energy <= s.energy_max))
            add_violation(out, "energy_bounds", s.id, 0, 0.0,
                          "requires 0 <= energy_min <= initial_energy <= energy_max");
        if (!(s.charge_eff > 0.0 && s.charge_eff <= 1.0 && s.discharge_eff > 0.0 &&
              s.discharge_eff <= 1.0))
            add_violation(out, "efficiency", s.id, 0, 0.0,
                          "efficiencies must lie in (0, 1]");
    }

    for (const auto& l : inst.lines) {
        if (inst.node_index(l.from) < 0)
            add_violation(out, "node_ref", l.id, 0, 0.0, "unknown node '" + l.from + "'");
        if (inst.node_index(l.to) < 0)
            add_violation(out, "node_ref", l.id, 0, 0.0, "unknown node '" + l.to + "'");
        if (l.from == l.to)
            add_violation(out, "line_endpoints", l.id, 0, 0.0, "line endpoints must differ");
        if (!(l.f_min <= 0.0 && 0.0 <= l.f_max))
            add_violation(out, "flow_bounds", l.id, 0, std::max(l.f_min, -l.f_max),
                          "requires f_min <= 0 <= f_max");
    }
    return out;
}

namespace detail {

inline void require_dimensions(const UcInstance& inst, const Schedule& s) {
    const auto T = static_cast<std::size_t>(inst.horizon);
    const bool ok = s.u.rows() == inst.generators.size() && s.u.cols() == T &&
                    s.v.rows() == inst.generators.size() && s.v.cols() == T &&
                    s.w.rows() == inst.generators.size() && s.w.cols() == T &&
                    s.p.rows() == inst.generators.size() && s.p.cols() == T &&
                    s.p_res.rows() == inst.renewables.size() && s.p_res.cols() == T &&
                    s.pc.rows() == inst.storage.size() && s.pc.cols() == T &&
                    s.pd.rows() == inst.storage.size() && s.pd.cols() == T &&
                    s.pe.rows() == inst.storage.size() && s.pe.cols() == T &&
                    s.p_st.rows() == inst.storage.size() && s.p_st.cols() == T &&
                    s.inj.rows() == inst.nodes.size() && s.inj.cols() == T &&
                    s.f.rows() == inst.lines.size() && s.f.cols() == T;
    if (!ok) throw std::invalid_argument("schedule dimensions do not match instance");
}

}  // namespace detail

/// Total generation + start cost of a schedule.
inline double evaluate_objective(const UcInstance& inst, const Schedule& s) {
    detail::require_dimensions(inst, s);
    double cost = 0.0;
    for (std::size_t g = 0; g < inst.generators.size(); ++g) {
        const auto& gen = inst.generators[g];
        for (std::size_t t = 0; t < static_cast<std::size_t>(inst.horizon); ++t) {
            const double pgt = s.p(g, t);
            cost += gen.a * s.u(g, t) + gen.b * pgt + gen.c * pgt * pgt +
                    gen.start_cost * s.v(g, t);
        }
    }
    return cost;
}

/// Residual demand: unmet balance per node and step.
inline Matrix<double> residual_demand(const UcInstance& inst, const Schedule& s) {
    detail::require_dimensions(inst, s);
    const auto T = static_cast<std::size_t>(inst.horizon);
    Matrix<double> rd(inst.nodes.size(), T);
    for (std::size_t n = 0; n < inst.nodes.size(); ++n)
        for (std::size_t t = 0; t < T; ++t) rd(n, t) = inst.nodes[n].demand[t];
    for (std::size_t g = 0; g < inst.generators.size(); ++g) {
        const auto n = static_cast<std::size_t>(inst.node_index(inst.generators[g].node));
        for (std::size_t t = 0; t < T; ++t) rd(n, t) -= s.p(g, t);
    }
    for (std::size_t r = 0; r < inst.renewables.size(); ++r) {
        const auto n = static_cast<std::size_t>(inst.node_index(inst.renewables[r].node));
        for (std::size_t t = 0; t < T; ++t) rd(n, t) -= s.p_res(r, t);
    }
    for (std::size_t i = 0; i < inst.storage.size(); ++i) {
        const auto n = static_cast<std::size_t>(inst.node_index(inst.storage[i].node));
        for (std::size_t t = 0; t < T; ++t) rd(n, t) -= s.p_st(i, t);
    }
    for (std::size_t n = 0; n < inst.nodes.size(); ++n)
        for (std::size_t t = 0; t < T; ++t) rd(n, t) -= s.inj(n, t);
    return rd;
}

inline double l1_norm(const Matrix<double>& m) {
    double sum = 0.0;
    for (double x : m.data()) sum += std::abs(x);
    return sum;
}

inline double linf_norm(const Matrix<double>& m) {
    double mx = 0.0;
    for (double x : m.data()) mx = std::max(mx, std::abs(x));
    return mx;
}

/// Checks every constraint family of the model plus the schedule-domain
/// invariants. A constraint is reported when its residual exceeds tol.
/// Balance violations are reported under the family "balance" so callers can
/// filter them when only per-unit feasibility matters.
inline std::vector<Violation> check_feasibility(const UcInstance& inst, const Schedule& s,
                                                double tol) {
    using detail::add_violation;
    detail::require_dimensions(inst, s);
    std::vector<Violation> out;
    const int T = inst.horizon;

    for (std::size_t g = 0; g < inst.generators.size(); ++g) {
        const auto& gen = inst.generators[g];
        const int u0 = gen.initially_on() ? 1 : 0;
        const double prev0 = gen.initially_on() ? gen.p0 : 0.0;

        // forced run from the initial status
        if (gen.initially_on() && gen.initial_run() < gen.min_uptime) {
            const int forced = gen.min_uptime - gen.initial_run();
            for (int t = 1; t <= std::min(T, forced); ++t)
                if (!s.u(g, t - 1))
                    add_violation(out, "initial_run", gen.id, t, 1.0,
                                  "unit must remain on to satisfy min uptime");
        }
        if (!gen.initially_on() && gen.initial_run() < gen.min_downtime) {
            const int forced = gen.min_downtime - gen.initial_run();
            for (int t = 1; t <= std::min(T, forced); ++t)
                if (s.u(g, t - 1))
                    add_violation(out, "initial_run", gen.id, t, 1.0,
                                  "unit must remain off to satisfy min downtime");
        }

        for (int t = 1; t <= T; ++t) {
            const std::size_t ti = static_cast<std::size_t>(t - 1);
            const int ut = s.u(g, ti), vt = s.v(g, ti), wt = s.w(g, ti);
            const double pt = s.p(g, ti);
            if ((ut != 0 && ut != 1) || (vt != 0 && vt != 1) || (wt != 0 && wt != 1))
                add_violation(out, "binary_domain", gen.id, t, 1.0, "u/v/w must be 0 or 1");
            if (vt + wt > 1)
                add_violation(out, "binary_domain", gen.id, t, 1.0, "v + w must be <= 1");
            if (ut == 0 && std::abs(pt) > tol)
                add_violation(out, "binary_domain", gen.id, t, std::abs(pt),
                              "output must be zero while off");

            const double lo = gen.p_min * ut - pt;
            if (lo > tol) add_violation(out, "min_output", gen.id, t, lo);
            const double hi = pt - gen.p_max * ut;
            if (hi > tol) add_violation(out, "max_output", gen.id, t, hi);

            // 3-bin logic and ramps, with the initial status supplying step 0
            const int uprev = (t == 1) ? u0 : s.u(g, ti - 1);
            const double pprev = (t == 1) ? prev0 : s.p(g, ti - 1);
            if (ut - uprev != vt - wt)
                add_violation(out, "commitment_logic", gen.id, t,
                              std::abs(ut - uprev - vt + wt));
            const double up = pt - pprev -
                              ((gen.startup_limit - gen.ramp_up) * vt + gen.ramp_up * ut);
            if (up > tol) add_violation(out, "ramp_up", gen.id, t, up);
            const double down = pprev - pt -
                                ((gen.shutdown_limit - gen.ramp_down) * wt +
                                 gen.ramp_down * uprev);
            if (down > tol) add_violation(out, "ramp_down", gen.id, t, down);

            // min up/down windows (starts/stops before the horizon count as 0)
            int vsum = 0, wsum = 0;
            for (int i = std::max(1, t - gen.min_uptime + 1); i <= t; ++i)
                vsum += s.v(g, static_cast<std::size_t>(i - 1));
            for (int i = std::max(1, t - gen.min_downtime + 1); i <= t; ++i)
                wsum += s.w(g, static_cast<std::size_t>(i - 1));
            if (vsum > ut) add_violation(out, "min_uptime", gen.id, t, vsum - ut);
            if (wsum > 1 - ut) add_violation(out, "min_downtime", gen.id, t, wsum - (1 - ut));
        }
    }

    for (std::size_t r = 0; r < inst.renewables.size(); ++r) {
        const auto& res = inst.renewables[r];
        for (int t = 1; t <= T; ++t) {
            const double prt = s.p_res(r, static_cast<std::size_t>(t - 1));
            const double cap = res.availability[static_cast<std::size_t>(t - 1)] * res.p_max;
            if (prt - cap > tol)
                add_violation(out, "res_availability", res.id, t, prt - cap);
            if (-prt > tol) add_violation(out, "res_availability", res.id, t, -prt);
        }
    }

    for (std::size_t i = 0; i < inst.storage.size(); ++i) {
        const auto& st = inst.storage[i];
        double prev_e = st.initial_energy;
        for (int t = 1; t <= T; ++t) {
            const std::size_t ti = static_cast<std::size_t>(t - 1);
            const double pct = s.pc(i, ti), pdt = s.pd(i, ti), pet = s.pe(i, ti);
            if (-pct > tol || pct - st.charge_limit > tol)
                add_violation(out, "charge_limit", st.id, t,
                              std::max(-pct, pct - st.charge_limit));
            if (-pdt > tol || pdt - st.discharge_limit > tol)
                add_violation(out, "discharge_limit", st.id, t,
                              std::max(-pdt, pdt - st.discharge_limit));
            const double net = std::abs(s.p_st(i, ti) - (pdt - pct));
            if (net > tol) add_violation(out, "storage_net", st.id, t, net);
            if (pet - st.energy_max > tol || st.energy_min - pet > tol)
                add_violation(out, "energy_bounds", st.id, t,
                              std::max(pet - st.energy_max, st.energy_min - pet));
            const double rec = std::abs(pet - (prev_e + pct * st.charge_eff -
                                               pdt / st.discharge_eff));
            if (rec > tol) add_violation(out, "energy_recursion", st.id, t, rec);
            prev_e = pet;
        }
    }

    // injection/flow coupling: a flow enters its `to` node positively and
    // leaves its `from` node negatively
    for (std::size_t n = 0; n < inst.nodes.size(); ++n) {
        for (int t = 1; t <= T; ++t) {
            const std::size_t ti = static_cast<std::size_t>(t - 1);
            double sum_f = 0.0;
            for (std::size_t l = 0; l < inst.lines.size(); ++l) {
                if (inst.node_index(inst.lines[l].to) == static_cast<int>(n))
                    sum_f += s.f(l, ti);
                if (inst.node_index(inst.lines[l].from) == static_cast<int>(n))
                    sum_f -= s.f(l, ti);
            }
            const double gap = std::abs(s.inj(n, ti) - sum_f);
            if (gap > tol)
                add_violation(out, "injection_coupling", inst.nodes[n].id, t, gap);
        }
    }
    for (std::size_t l = 0; l < inst.lines.size(); ++l) {
        for (int t = 1; t <= T; ++t) {
            const double flt = s.f(l, static_cast<std::size_t>(t - 1));
            const double over = std::max(flt - inst.lines[l].f_max, inst.lines[l].f_min - flt);
            if (over > tol) add_violation(out, "flow_limit", inst.lines[l].id, t, over);
        }
    }

    const Matrix<double> rd = residual_demand(inst, s);
    for (std::size_t n = 0; n < inst.nodes.size(); ++n)
        for (int t = 1; t <= T; ++t) {
            const double gap = std::abs(rd(n, static_cast<std::size_t>(t - 1)));
            if (gap > tol) add_violation(out, "balance", inst.nodes[n].id, t, gap);
        }
    return out;
}

/// Report filtered to everything except nodal balance.
inline std::vector<Violation> filter_out_balance(std::vector<Violation> report) {
    report.erase(std::remove_if(report.begin(), report.end(),
                                [](const Violation& v) { return v.constraint == "balance"; }),
                 report.end());
    return report;
}

}  // namespace ucadmm
