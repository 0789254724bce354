#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "ucadmm/model.hpp"

namespace ucadmm {

struct StorageDispatchResult {
    bool ok = false;
    std::vector<double> charge, discharge, energy, net;
    double objective = 0.0;
    std::string message;
};

/// Iterates kept between calls so consecutive dispatches of the same unit
/// start from the previous solution.
struct StorageQpWarmStart {
    Eigen::VectorXd x, y, z;
    Eigen::MatrixXd ctc;  // cached C^T C of the cumulative-energy rows
    int horizon = 0;
};

inline double storage_objective(std::span<const double> lambda, std::span<const double> residual,
                                double rho, std::span<const double> net) {
    double obj = 0.0;
    for (std::size_t t = 0; t < lambda.size(); ++t) {
        const double gap = residual[t] - net[t];
        obj += -lambda[t] * net[t] + 0.5 * rho * gap * gap;
    }
    return obj;
}

namespace storage_detail {

/// Cumulative-energy row t has eta_c on pc_0..pc_t and -1/eta_d on pd_0..pd_t.
inline Eigen::MatrixXd energy_matrix(const StorageSpec& spec, int T) {
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(T, 2 * T);
    for (int t = 0; t < T; ++t)
        for (int i = 0; i <= t; ++i) {
            C(t, i) = spec.charge_eff;
            C(t, T + i) = -1.0 / spec.discharge_eff;
        }
    return C;
}

/// Walks the energy path and absorbs residual bound violations into the
/// charge/discharge variables. Violations after a converged solve are at
/// rounding level, so each adjustment is tiny.
inline bool repair_energy_path(const StorageSpec& spec, std::vector<double>& pc,
                               std::vector<double>& pd) {
    const int T = static_cast<int>(pc.size());
    const double scale = std::max({1.0, spec.energy_max, spec.charge_limit});
    for (int pass = 0; pass < 6; ++pass) {
        bool dirty = false;
        double e = spec.initial_energy;
        for (int t = 0; t < T && !dirty; ++t) {
            e += spec.charge_eff * pc[static_cast<std::size_t>(t)] -
                 pd[static_cast<std::size_t>(t)] / spec.discharge_eff;
            if (e > spec.energy_max) {
                double dc = std::min(pc[static_cast<std::size_t>(t)],
                                     (e - spec.energy_max) / spec.charge_eff);
                pc[static_cast<std::size_t>(t)] -= dc;
                e -= spec.charge_eff * dc;
                if (e > spec.energy_max) {
                    double dd = std::min(spec.discharge_limit - pd[static_cast<std::size_t>(t)],
                                         (e - spec.energy_max) * spec.discharge_eff);
                    pd[static_cast<std::size_t>(t)] += dd;
                    e -= dd / spec.discharge_eff;
                }
                if (e > spec.energy_max + 1e-12 * scale) {
                    // saturated here; release charge at earlier steps and rewalk
                    double excess = e - spec.energy_max;
                    for (int tau = t - 1; tau >= 0 && excess > 0.0; --tau) {
                        const double r = std::min(pc[static_cast<std::size_t>(tau)],
                                                  excess / spec.charge_eff);
                        pc[static_cast<std::size_t>(tau)] -= r;
                        excess -= spec.charge_eff * r;
                    }
                    dirty = true;
                }
            } else if (e < spec.energy_min) {
                double dd = std::min(pd[static_cast<std::size_t>(t)],
                                     (spec.energy_min - e) * spec.discharge_eff);
                pd[static_cast<std::size_t>(t)] -= dd;
                e += dd / spec.discharge_eff;
                if (e < spec.energy_min) {
                    double dc = std::min(spec.charge_limit - pc[static_cast<std::size_t>(t)],
                                         (spec.energy_min - e) / spec.charge_eff);
                    pc[static_cast<std::size_t>(t)] += dc;
                    e += spec.charge_eff * dc;
                }
                if (e < spec.energy_min - 1e-12 * scale) {
                    double deficit = spec.energy_min - e;
                    for (int tau = t - 1; tau >= 0 && deficit > 0.0; --tau) {
                        const double r = std::min(pd[static_cast<std::size_t>(tau)],
                                                  deficit * spec.discharge_eff);
                        pd[static_cast<std::size_t>(tau)] -= r;
                        deficit -= r / spec.discharge_eff;
                    }
                    dirty = true;
                }
            }
        }
        if (!dirty) break;
    }
    // verify
    double e = spec.initial_energy;
    for (int t = 0; t < T; ++t) {
        e += spec.charge_eff * pc[static_cast<std::size_t>(t)] -
             pd[static_cast<std::size_t>(t)] / spec.discharge_eff;
        if (e > spec.energy_max + 1e-9 * scale || e < spec.energy_min - 1e-9 * scale)
            return false;
    }
    return true;
}

}  // namespace storage_detail

/// Solves the storage stage problem
///   min sum_t -lambda_t p_t + (rho/2)(residual_t - p_t)^2,  p = pd - pc,
/// subject to charge/discharge limits and the energy recursion with bounds,
/// by operator-splitting on the box-and-cumulative constraint set. The
/// returned point satisfies every constraint exactly (the energy recursion by
/// construction, bounds by final clamping/repair) and is within tol of the
/// optimum in objective.
inline StorageDispatchResult storage_dispatch(const StorageSpec& spec,
                                              std::span<const double> lambda,
                                              std::span<const double> residual, double rho,
                                              double tol,
                                              StorageQpWarmStart* warm = nullptr) {
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    if (rho <= 0.0) throw std::invalid_argument("storage_dispatch: rho must be > 0");
    if (tol <= 0.0) throw std::invalid_argument("storage_dispatch: tol must be > 0");
    if (lambda.size() != residual.size())
        throw std::invalid_argument("storage_dispatch: lambda/residual length mismatch");
    const int T = static_cast<int>(lambda.size());
    const int n = 2 * T;   // pc then pd
    const int m = 3 * T;   // box rows then energy rows

    StorageQpWarmStart local;
    StorageQpWarmStart& ws = warm ? *warm : local;
    if (ws.horizon != T) {
        ws.x = VectorXd::Zero(n);
        ws.y = VectorXd::Zero(m);
        ws.z = VectorXd::Zero(m);
        const MatrixXd C = storage_detail::energy_matrix(spec, T);
        ws.ctc = C.transpose() * C;
        ws.horizon = T;
    }
    const MatrixXd C = storage_detail::energy_matrix(spec, T);

    VectorXd q(n), lower(m), upper(m);
    for (int t = 0; t < T; ++t) {
        const double lin = lambda[static_cast<std::size_t>(t)] +
                           rho * residual[static_cast<std::size_t>(t)];
        q(t) = lin;
        q(T + t) = -lin;
        lower(t) = 0.0;
        upper(t) = spec.charge_limit;
        lower(T + t) = 0.0;
        upper(T + t) = spec.discharge_limit;
        lower(2 * T + t) = spec.energy_min - spec.initial_energy;
        upper(2 * T + t) = spec.energy_max - spec.initial_energy;
    }

    // P has rho [[1,-1],[-1,1]] blocks per step
    MatrixXd P = MatrixXd::Zero(n, n);
    for (int t = 0; t < T; ++t) {
        P(t, t) = rho;
        P(T + t, T + t) = rho;
        P(t, T + t) = -rho;
        P(T + t, t) = -rho;
    }

    const double sigma = 1e-6;
    const double rho_q = std::max(0.1, rho);
    MatrixXd K = P + (sigma + rho_q) * MatrixXd::Identity(n, n) + rho_q * ws.ctc;
    Eigen::LLT<MatrixXd> llt(K);
    if (llt.info() != Eigen::Success)
        return StorageDispatchResult{false, {}, {}, {}, {}, 0.0, "factorization failed"};

    auto apply_a = [&](const VectorXd& x) {
        VectorXd ax(m);
        ax.head(n) = x;
        ax.tail(T) = C * x;
        return ax;
    };
    auto apply_at = [&](const VectorXd& v) {
        VectorXd atv = v.head(n);
        atv += C.transpose() * v.tail(T);
        return atv;
    };

    VectorXd x = ws.x, y = ws.y, z = ws.z;
    const double eps = std::max(1e-11, 1e-3 * tol);
    const int max_iters = 100000;
    for (int it = 0; it < max_iters; ++it) {
        const VectorXd rhs = sigma * x - q + apply_at(rho_q * z - y);
        x = llt.solve(rhs);
        const VectorXd ax = apply_a(x);
        z = (ax + y / rho_q).cwiseMax(lower).cwiseMin(upper);
        y += rho_q * (ax - z);
        if (it % 10 == 9) {
            const double rp = (ax - z).lpNorm<Eigen::Infinity>();
            const double rd = (P * x + q + apply_at(y)).lpNorm<Eigen::Infinity>();
            const double sp = std::max(1.0, std::max(ax.lpNorm<Eigen::Infinity>(),
                                                     z.lpNorm<Eigen::Infinity>()));
            const double sd = std::max(1.0, q.lpNorm<Eigen::Infinity>());
            if (rp <= eps * sp && rd <= eps * sd) break;
        }
    }
    ws.x = x;
    ws.y = y;
    ws.z = z;

    StorageDispatchResult result;
    result.charge.resize(static_cast<std::size_t>(T));
    result.discharge.resize(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
        result.charge[static_cast<std::size_t>(t)] = std::clamp(x(t), 0.0, spec.charge_limit);
        result.discharge[static_cast<std::size_t>(t)] =
            std::clamp(x(T + t), 0.0, spec.discharge_limit);
    }
    if (spec.charge_eff * spec.discharge_eff == 1.0) {
        // lossless units: simultaneous charge/discharge cancels exactly
        for (int t = 0; t < T; ++t) {
            const double r = std::min(result.charge[static_cast<std::size_t>(t)],
                                      result.discharge[static_cast<std::size_t>(t)]);
            result.charge[static_cast<std::size_t>(t)] -= r;
            result.discharge[static_cast<std::size_t>(t)] -= r;
        }
    }
    if (!storage_detail::repair_energy_path(spec, result.charge, result.discharge)) {
        result.ok = false;
        result.message = "energy bounds could not be restored";
        return result;
    }

    result.energy.resize(static_cast<std::size_t>(T));
    result.net.resize(static_cast<std::size_t>(T));
    double e = spec.initial_energy;
    for (int t = 0; t < T; ++t) {
        e += spec.charge_eff * result.charge[static_cast<std::size_t>(t)] -
             result.discharge[static_cast<std::size_t>(t)] / spec.discharge_eff;
        result.energy[static_cast<std::size_t>(t)] = e;
        result.net[static_cast<std::size_t>(t)] =
            result.discharge[static_cast<std::size_t>(t)] -
            result.charge[static_cast<std::size_t>(t)];
    }
    result.objective = storage_objective(lambda, residual, rho, result.net);
    result.ok = true;
    return result;
}

}  // namespace ucadmm
