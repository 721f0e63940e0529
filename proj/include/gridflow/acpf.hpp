#pragma once

#include <stdexcept>

#include <Eigen/Core>

#include "gridflow/grid_case.hpp"

namespace gridflow {

// One power flow operating point. All vectors have length B; flattened
// layout throughout the library is (p, q, v, theta).
struct PowerFlowRecord {
    Eigen::VectorXd p;
    Eigen::VectorXd q;
    Eigen::VectorXd v;
    Eigen::VectorXd theta;

    Eigen::VectorXd flatten() const;
    static PowerFlowRecord from_flat(const Eigen::VectorXd& x);
};

// Nodal balance mismatches; zero iff the record satisfies the equality
// constraints exactly.
struct EqualityResidual {
    Eigen::VectorXd dp;
    Eigen::VectorXd dq;

    Eigen::VectorXd flat() const;  // (dp, dq), length 2B
    double inf_norm() const;
};

// Directed branch flows. Because the line-flow expression has no v^2 self
// term, the forward and reverse flows differ whenever theta_i != theta_j.
struct LineFlows {
    double p_fwd, q_fwd;  // i -> j
    double p_rev, q_rev;  // j -> i
};

LineFlows line_flows(const PowerFlowRecord& state, const Branch& branch);

EqualityResidual equality_residual(const PowerFlowRecord& state, const GridCase& grid);

// Inequality constraints rewritten as g(x) <= 0, stacked as:
//   [p - pmax; pmin - p; q - qmax; qmin - q; v - vmax; vmin - v;
//    fp^2 + fq^2 - smax^2 per branch]
// giving 6B + L entries. Positive entries signal violations.
Eigen::VectorXd inequality_residual(const PowerFlowRecord& state, const GridCase& grid);

double residual_norm_h(const PowerFlowRecord& state, const GridCase& grid);
double residual_norm_g(const PowerFlowRecord& state, const GridCase& grid);

// Gradient of ||H(x)||_2^2 with respect to the flattened (p, q, v, theta)
// state, assembled as 2 J_H^T H from the analytic branch-flow partials.
Eigen::VectorXd grad_residual_h(const PowerFlowRecord& state, const GridCase& grid);

// Gradient of ||max(G(x), 0)||_2^2. The max(., 0) kink uses subgradient 0
// exactly at g = 0.
Eigen::VectorXd grad_residual_g(const PowerFlowRecord& state, const GridCase& grid);

struct NewtonOptions {
    double tolerance = 1e-8;  // infinity norm of the mismatch, p.u.
    int max_iterations = 50;
};

struct DivergenceError : std::runtime_error {
    double final_mismatch;
    int iterations;
    DivergenceError(double mismatch, int iters)
        : std::runtime_error("Newton power flow diverged: mismatch " +
                             std::to_string(mismatch) + " after " +
                             std::to_string(iters) + " iterations"),
          final_mismatch(mismatch),
          iterations(iters) {}
};

struct NewtonStats {
    int iterations = 0;
};

// Solves the power flow for the given per-bus loads and PV-bus active
// generation (p_gen is length B, ignored except at PV buses). Flat start
// with PV/slack setpoints applied. The returned record carries net
// injections; slack p, q and PV q are set from the solved flow sums so the
// equality residual is zero to machine precision there.
PowerFlowRecord newton_solve(const GridCase& grid, const Eigen::VectorXd& p_load,
                             const Eigen::VectorXd& q_load,
                             const Eigen::VectorXd& p_gen,
                             const NewtonOptions& options = {},
                             NewtonStats* stats = nullptr);

}  // namespace gridflow
