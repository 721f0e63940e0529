#include "gridflow/acpf.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace gridflow {

Eigen::VectorXd PowerFlowRecord::flatten() const {
    const int n = static_cast<int>(p.size());
    Eigen::VectorXd x(4 * n);
    x << p, q, v, theta;
    return x;
}

PowerFlowRecord PowerFlowRecord::from_flat(const Eigen::VectorXd& x) {
    const int n = static_cast<int>(x.size()) / 4;
    PowerFlowRecord r;
    r.p = x.segment(0, n);
    r.q = x.segment(n, n);
    r.v = x.segment(2 * n, n);
    r.theta = x.segment(3 * n, n);
    return r;
}

Eigen::VectorXd EqualityResidual::flat() const {
    Eigen::VectorXd out(dp.size() + dq.size());
    out << dp, dq;
    return out;
}

double EqualityResidual::inf_norm() const {
    return flat().lpNorm<Eigen::Infinity>();
}

LineFlows line_flows(const PowerFlowRecord& state, const Branch& branch) {
    const int i = branch.from_bus, j = branch.to_bus;
    const double d = state.theta[i] - state.theta[j];
    const double c = std::cos(d), s = std::sin(d);
    const double vv = state.v[i] * state.v[j];
    LineFlows f;
    f.p_fwd = vv * (branch.g * c + branch.b * s);
    f.q_fwd = vv * (branch.g * s - branch.b * c);
    // j -> i: same expression with the angle difference negated.
    f.p_rev = vv * (branch.g * c - branch.b * s);
    f.q_rev = vv * (-branch.g * s - branch.b * c);
    return f;
}

namespace {

// Sum of outgoing line flows (plus shunt draw) at each bus.
void flow_sums(const PowerFlowRecord& state, const GridCase& grid,
               Eigen::VectorXd& sp, Eigen::VectorXd& sq) {
    const int n = grid.n_bus();
    sp = Eigen::VectorXd::Zero(n);
    sq = Eigen::VectorXd::Zero(n);
    for (const Branch& br : grid.branches) {
        LineFlows f = line_flows(state, br);
        sp[br.from_bus] += f.p_fwd;
        sq[br.from_bus] += f.q_fwd;
        sp[br.to_bus] += f.p_rev;
        sq[br.to_bus] += f.q_rev;
    }
    for (const Bus& bus : grid.buses) {
        if (bus.shunt_g != 0.0)
            sp[bus.index] += state.v[bus.index] * state.v[bus.index] * bus.shunt_g;
        if (bus.shunt_b != 0.0)
            sq[bus.index] -= state.v[bus.index] * state.v[bus.index] * bus.shunt_b;
    }
}

// Jacobian of (dp, dq) with respect to (p, q, v, theta); 2B x 4B.
Eigen::MatrixXd equality_jacobian(const PowerFlowRecord& state, const GridCase& grid) {
    const int n = grid.n_bus();
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2 * n, 4 * n);
    for (int b = 0; b < n; ++b) {
        jac(b, b) = 1.0;          // d(dp_b)/dp_b
        jac(n + b, n + b) = 1.0;  // d(dq_b)/dq_b
    }
    const int vcol = 2 * n, tcol = 3 * n;
    for (const Branch& br : grid.branches) {
        const int i = br.from_bus, j = br.to_bus;
        const double d = state.theta[i] - state.theta[j];
        const double c = std::cos(d), s = std::sin(d);
        const double vi = state.v[i], vj = state.v[j];
        const double gc_bs = br.g * c + br.b * s;   // f_p / (vi vj), fwd
        const double gs_bc = br.g * s - br.b * c;   // f_q / (vi vj), fwd
        const double gc_bs_r = br.g * c - br.b * s; // rev
        const double gs_bc_r = -br.g * s - br.b * c;

        // Residual rows subtract the flow sums, hence the negated partials.
        // Forward flow contributes to bus i's balance.
        jac(i, vcol + i) -= vj * gc_bs;
        jac(i, vcol + j) -= vi * gc_bs;
        jac(i, tcol + i) -= vi * vj * (-br.g * s + br.b * c);
        jac(i, tcol + j) += vi * vj * (-br.g * s + br.b * c);
        jac(n + i, vcol + i) -= vj * gs_bc;
        jac(n + i, vcol + j) -= vi * gs_bc;
        jac(n + i, tcol + i) -= vi * vj * gc_bs;
        jac(n + i, tcol + j) += vi * vj * gc_bs;
        // Reverse flow contributes to bus j's balance; angle difference is
        // -d, so theta partials pick up the opposite sign.
        jac(j, vcol + i) -= vj * gc_bs_r;
        jac(j, vcol + j) -= vi * gc_bs_r;
        jac(j, tcol + i) += vi * vj * (br.g * s + br.b * c);
        jac(j, tcol + j) -= vi * vj * (br.g * s + br.b * c);
        jac(n + j, vcol + i) -= vj * gs_bc_r;
        jac(n + j, vcol + j) -= vi * gs_bc_r;
        jac(n + j, tcol + i) += vi * vj * gc_bs_r;
        jac(n + j, tcol + j) -= vi * vj * gc_bs_r;
    }
    for (const Bus& bus : grid.buses) {
        const int b = bus.index;
        if (bus.shunt_g != 0.0) jac(b, vcol + b) -= 2.0 * state.v[b] * bus.shunt_g;
        if (bus.shunt_b != 0.0) jac(n + b, vcol + b) += 2.0 * state.v[b] * bus.shunt_b;
    }
    return jac;
}

}  // namespace

EqualityResidual equality_residual(const PowerFlowRecord& state, const GridCase& grid) {
    Eigen::VectorXd sp, sq;
    flow_sums(state, grid, sp, sq);
    EqualityResidual r;
    r.dp = state.p - sp;
    r.dq = state.q - sq;
    return r;
}

Eigen::VectorXd inequality_residual(const PowerFlowRecord& state, const GridCase& grid) {
    const int n = grid.n_bus();
    const int l = grid.n_branch();
    Eigen::VectorXd g(6 * n + l);
    for (int b = 0; b < n; ++b) {
        const Bus& bus = grid.buses[b];
        g[b] = state.p[b] - bus.p_max;
        g[n + b] = bus.p_min - state.p[b];
        g[2 * n + b] = state.q[b] - bus.q_max;
        g[3 * n + b] = bus.q_min - state.q[b];
        g[4 * n + b] = state.v[b] - bus.v_max;
        g[5 * n + b] = bus.v_min - state.v[b];
    }
    for (int k = 0; k < l; ++k) {
        LineFlows f = line_flows(state, grid.branches[k]);
        g[6 * n + k] = f.p_fwd * f.p_fwd + f.q_fwd * f.q_fwd -
                       grid.branches[k].s_max * grid.branches[k].s_max;
    }
    return g;
}

double residual_norm_h(const PowerFlowRecord& state, const GridCase& grid) {
    return equality_residual(state, grid).flat().squaredNorm();
}

double residual_norm_g(const PowerFlowRecord& state, const GridCase& grid) {
    return inequality_residual(state, grid).cwiseMax(0.0).squaredNorm();
}

Eigen::VectorXd grad_residual_h(const PowerFlowRecord& state, const GridCase& grid) {
    Eigen::VectorXd h = equality_residual(state, grid).flat();
    Eigen::MatrixXd jac = equality_jacobian(state, grid);
    return 2.0 * jac.transpose() * h;
}

Eigen::VectorXd grad_residual_g(const PowerFlowRecord& state, const GridCase& grid) {
    const int n = grid.n_bus();
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(4 * n);
    for (int b = 0; b < n; ++b) {
        const Bus& bus = grid.buses[b];
        double e;
        if ((e = state.p[b] - bus.p_max) > 0.0) grad[b] += 2.0 * e;
        if ((e = bus.p_min - state.p[b]) > 0.0) grad[b] -= 2.0 * e;
        if ((e = state.q[b] - bus.q_max) > 0.0) grad[n + b] += 2.0 * e;
        if ((e = bus.q_min - state.q[b]) > 0.0) grad[n + b] -= 2.0 * e;
        if ((e = state.v[b] - bus.v_max) > 0.0) grad[2 * n + b] += 2.0 * e;
        if ((e = bus.v_min - state.v[b]) > 0.0) grad[2 * n + b] -= 2.0 * e;
    }
    for (const Branch& br : grid.branches) {
        LineFlows f = line_flows(state, br);
        double e = f.p_fwd * f.p_fwd + f.q_fwd * f.q_fwd - br.s_max * br.s_max;
        if (e <= 0.0) continue;
        const int i = br.from_bus, j = br.to_bus;
        const double d = state.theta[i] - state.theta[j];
        const double c = std::cos(d), s = std::sin(d);
        const double vi = state.v[i], vj = state.v[j];
        const double gc_bs = br.g * c + br.b * s;
        const double gs_bc = br.g * s - br.b * c;
        // d(fp^2 + fq^2)/d(.) = 2 fp dfp + 2 fq dfq; outer factor 2e.
        const double w = 2.0 * e;
        grad[2 * n + i] += w * 2.0 * (f.p_fwd * vj * gc_bs + f.q_fwd * vj * gs_bc);
        grad[2 * n + j] += w * 2.0 * (f.p_fwd * vi * gc_bs + f.q_fwd * vi * gs_bc);
        const double dfp_dti = vi * vj * (-br.g * s + br.b * c);
        const double dfq_dti = vi * vj * gc_bs;
        grad[3 * n + i] += w * 2.0 * (f.p_fwd * dfp_dti + f.q_fwd * dfq_dti);
        grad[3 * n + j] -= w * 2.0 * (f.p_fwd * dfp_dti + f.q_fwd * dfq_dti);
    }
    return grad;
}

PowerFlowRecord newton_solve(const GridCase& grid, const Eigen::VectorXd& p_load,
                             const Eigen::VectorXd& q_load,
                             const Eigen::VectorXd& p_gen,
                             const NewtonOptions& options, NewtonStats* stats) {
    const int n = grid.n_bus();
    PowerFlowRecord state;
    state.v = Eigen::VectorXd::Ones(n);
    state.theta = Eigen::VectorXd::Zero(n);
    state.p = Eigen::VectorXd::Zero(n);
    state.q = Eigen::VectorXd::Zero(n);

    std::vector<int> non_slack, pq;
    for (const Bus& bus : grid.buses) {
        if (bus.kind != BusKind::Slack) non_slack.push_back(bus.index);
        if (bus.kind == BusKind::Pq) pq.push_back(bus.index);
        if (bus.kind != BusKind::Pq) state.v[bus.index] = bus.v_setpoint;
    }

    // Specified net injections at the solved buses.
    for (int b : non_slack)
        state.p[b] = (grid.buses[b].kind == BusKind::Pv ? p_gen[b] : 0.0) - p_load[b];
    for (int b : pq) state.q[b] = -q_load[b];

    const int nt = static_cast<int>(non_slack.size());
    const int nv = static_cast<int>(pq.size());
    const int dim = nt + nv;

    auto mismatch = [&](const PowerFlowRecord& st) {
        EqualityResidual r = equality_residual(st, grid);
        Eigen::VectorXd f(dim);
        for (int k = 0; k < nt; ++k) f[k] = r.dp[non_slack[k]];
        for (int k = 0; k < nv; ++k) f[nt + k] = r.dq[pq[k]];
        return f;
    };

    Eigen::VectorXd f = mismatch(state);
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        if (f.lpNorm<Eigen::Infinity>() <= options.tolerance) break;
        Eigen::MatrixXd jac_full = equality_jacobian(state, grid);
        Eigen::MatrixXd jac(dim, dim);
        for (int r = 0; r < dim; ++r) {
            const int row = r < nt ? non_slack[r] : n + pq[r - nt];
            for (int c = 0; c < nt; ++c) jac(r, c) = jac_full(row, 3 * n + non_slack[c]);
            for (int c = 0; c < nv; ++c) jac(r, nt + c) = jac_full(row, 2 * n + pq[c]);
        }
        Eigen::VectorXd step = jac.partialPivLu().solve(-f);
        // Backtracking keeps the flat start usable on stiff cases.
        const double f0 = f.norm();
        double scale = 1.0;
        PowerFlowRecord trial;
        Eigen::VectorXd f_trial;
        for (int halvings = 0; halvings < 14; ++halvings) {
            trial = state;
            for (int k = 0; k < nt; ++k) trial.theta[non_slack[k]] += scale * step[k];
            for (int k = 0; k < nv; ++k) trial.v[pq[k]] += scale * step[nt + k];
            f_trial = mismatch(trial);
            if (f_trial.allFinite() && f_trial.norm() < f0 * (1.0 - 1e-4 * scale)) break;
            scale *= 0.5;
        }
        state = trial;
        f = f_trial;
    }
    if (f.lpNorm<Eigen::Infinity>() > options.tolerance)
        throw DivergenceError(f.lpNorm<Eigen::Infinity>(), it);
    if (stats) stats->iterations = it;

    // Close the balance exactly at the buses whose injections are free.
    Eigen::VectorXd sp, sq;
    flow_sums(state, grid, sp, sq);
    for (const Bus& bus : grid.buses) {
        const int b = bus.index;
        if (bus.kind == BusKind::Slack) {
            state.p[b] = sp[b];
            state.q[b] = sq[b];
        } else if (bus.kind == BusKind::Pv) {
            state.q[b] = sq[b];
        }
    }
    return state;
}

}  // namespace gridflow
