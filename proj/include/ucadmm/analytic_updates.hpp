#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace ucadmm {

/// Renewable update: exact minimizer of -lambda*p + (rho/2)(residual - p)^2
/// on [0, cap].
inline double res_update(double lambda, double residual, double rho, double cap) {
    if (rho <= 0.0) throw std::invalid_argument("res_update: rho must be > 0");
    if (cap < 0.0) throw std::invalid_argument("res_update: cap must be >= 0");
    return std::clamp(residual + lambda / rho, 0.0, cap);
}

/// Injection update: vertex of the nodal quadratic of the inner transmission
/// Lagrangian. sum_f is the current signed flow sum at the node.
inline double injection_update(double lambda, double residual, double pi, double rho,
                               double rho_trans, double sum_f) {
    const double quad = rho + rho_trans;
    if (quad <= 0.0) throw std::invalid_argument("injection_update: rho + rho_trans must be > 0");
    const double lin = -lambda - rho * residual + pi - rho_trans * sum_f;
    return -lin / quad;
}

/// Flow update for line from -> to. A flow enters its head node positively
/// and its tail node negatively; partial sums exclude this line's own flow.
/// Returns the exact vertex of the scalar quadratic, clamped to the bounds.
inline double flow_update(double pi_from, double pi_to, double inj_from, double inj_to,
                          double partial_from, double partial_to, double rho_trans,
                          double f_min, double f_max) {
    if (rho_trans <= 0.0) throw std::invalid_argument("flow_update: rho_trans must be > 0");
    const double c_to = inj_to - partial_to;
    const double c_from = inj_from - partial_from;
    const double f = (pi_to - pi_from) / (2.0 * rho_trans) + 0.5 * (c_to - c_from);
    return std::clamp(f, f_min, f_max);
}

/// One per-time-step transmission subproblem: nodal quadratics coupled by
/// inj_n = sum of signed incident flows, relaxed with multipliers pi and
/// penalty rho_trans. Holds the warm-started iterates.
struct TransmissionStepProblem {
    struct Node {
        double lambda = 0.0;
        double residual = 0.0;
        double inj = 0.0;
        double pi = 0.0;
    };
    struct Line {
        int from = 0;
        int to = 0;
        double f_min = 0.0;
        double f_max = 0.0;
        double flow = 0.0;
    };
    std::vector<Node> nodes;
    std::vector<Line> lines;
    double rho = 0.0;
    double rho_trans = 0.0;

    double signed_flow_sum(int n) const {
        double s = 0.0;
        for (const auto& l : lines) {
            if (l.to == n) s += l.flow;
            if (l.from == n) s -= l.flow;
        }
        return s;
    }

    bool node_isolated(int n) const {
        for (const auto& l : lines)
            if (l.from == n || l.to == n) return false;
        return true;
    }

    /// Objective of the underlying coupled QP (a function of inj only).
    double objective() const {
        double obj = 0.0;
        for (const auto& node : nodes) {
            const double gap = node.residual - node.inj;
            obj += -node.lambda * node.inj + 0.5 * rho * gap * gap;
        }
        return obj;
    }
};

struct TransmissionStepResult {
    bool converged = false;
    int iterations = 0;
    double coupling_residual = 0.0;
};

/// Gauss-Seidel ADMM on one time step: injection sweep, flow sweep, then the
/// pi ascent, until the worst coupling residual max_n |inj_n - sum_f(n)| is
/// within inner_tol. Isolated nodes are pinned to inj = 0, the value their
/// empty coupling sum forces.
inline TransmissionStepResult solve_transmission_step(TransmissionStepProblem& prob,
                                                      double inner_tol, int inner_max_iters) {
    const int N = static_cast<int>(prob.nodes.size());
    for (const auto& l : prob.lines) {
        if (l.from < 0 || l.from >= N || l.to < 0 || l.to >= N || l.from == l.to)
            throw std::invalid_argument("solve_transmission_step: bad line endpoints");
    }

    std::vector<bool> isolated(static_cast<std::size_t>(N));
    bool any_coupled = false;
    for (int n = 0; n < N; ++n) {
        isolated[static_cast<std::size_t>(n)] = prob.node_isolated(n);
        if (!isolated[static_cast<std::size_t>(n)]) any_coupled = true;
        else prob.nodes[static_cast<std::size_t>(n)].inj = 0.0;
    }

    TransmissionStepResult result;
    if (!any_coupled) {
        result.converged = true;
        return result;
    }

    for (int it = 1; it <= inner_max_iters; ++it) {
        for (int n = 0; n < N; ++n) {
            if (isolated[static_cast<std::size_t>(n)]) continue;
            auto& node = prob.nodes[static_cast<std::size_t>(n)];
            node.inj = injection_update(node.lambda, node.residual, node.pi, prob.rho,
                                        prob.rho_trans, prob.signed_flow_sum(n));
        }
        for (std::size_t l = 0; l < prob.lines.size(); ++l) {
            auto& line = prob.lines[l];
            const auto& nf = prob.nodes[static_cast<std::size_t>(line.from)];
            const auto& nt = prob.nodes[static_cast<std::size_t>(line.to)];
            const double partial_from = prob.signed_flow_sum(line.from) + line.flow;
            const double partial_to = prob.signed_flow_sum(line.to) - line.flow;
            line.flow = flow_update(nf.pi, nt.pi, nf.inj, nt.inj, partial_from, partial_to,
                                    prob.rho_trans, line.f_min, line.f_max);
        }
        double worst = 0.0;
        for (int n = 0; n < N; ++n) {
            if (isolated[static_cast<std::size_t>(n)]) continue;
            auto& node = prob.nodes[static_cast<std::size_t>(n)];
            const double r = node.inj - prob.signed_flow_sum(n);
            node.pi += prob.rho_trans * r;
            worst = std::max(worst, std::abs(r));
        }
        result.iterations = it;
        result.coupling_residual = worst;
        if (worst <= inner_tol) {
            result.converged = true;
            return result;
        }
    }
    return result;
}

}  // namespace ucadmm
