#include "gridflow/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "gridflow/acpf.hpp"
#include "gridflow/mlp.hpp"

namespace gridflow {

std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
    // Jonker-Volgenant style successive shortest augmenting paths with dual
    // potentials. Ties break on the lowest column index.
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0);  // match[j] = row assigned to column j (1-based)
    std::vector<int> way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            double delta = inf;
            int j1 = -1;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> assignment(n);
    for (int j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
    return assignment;
}

TransportPlan wasserstein1(const Dataset& real, const Dataset& synthetic) {
    if (real.width() != synthetic.width())
        throw EvalError("wasserstein1: datasets have different widths");
    if (real.size() != synthetic.size())
        throw EvalError("wasserstein1: datasets must have equal size (subsample "
                        "explicitly before calling)");
    const int n = real.size();
    if (n < 1) throw EvalError("wasserstein1: empty dataset");
    Eigen::MatrixXd cost(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            cost(i, j) = (real.rows[i] - synthetic.rows[j]).norm();
    TransportPlan plan;
    plan.assignment = solve_assignment(cost);
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += cost(i, plan.assignment[i]);
    plan.total_cost = total / n;
    return plan;
}

MismatchReport mismatch_report(const Dataset& data, const GridCase& grid) {
    const int n = grid.n_bus();
    const int N = data.size();
    MismatchReport rep;
    rep.dp_samples.resize(n);
    rep.dq_samples.resize(n);
    Eigen::VectorXd sum_dp = Eigen::VectorXd::Zero(n), sum_dq = sum_dp;
    Eigen::VectorXd sq_dp = sum_dp, sq_dq = sum_dp;
    for (int i = 0; i < N; ++i) {
        EqualityResidual r = equality_residual(data.record(i), grid);
        for (int b = 0; b < n; ++b) {
            rep.dp_samples[b].push_back(r.dp[b]);
            rep.dq_samples[b].push_back(r.dq[b]);
            sum_dp[b] += r.dp[b];
            sum_dq[b] += r.dq[b];
            sq_dp[b] += r.dp[b] * r.dp[b];
            sq_dq[b] += r.dq[b] * r.dq[b];
        }
    }
    rep.mean_dp = sum_dp / N;
    rep.mean_dq = sum_dq / N;
    rep.std_dp.resize(n);
    rep.std_dq.resize(n);
    for (int b = 0; b < n; ++b) {
        rep.std_dp[b] = std::sqrt(std::max(0.0, sq_dp[b] / N - rep.mean_dp[b] * rep.mean_dp[b]));
        rep.std_dq[b] = std::sqrt(std::max(0.0, sq_dq[b] / N - rep.mean_dq[b] * rep.mean_dq[b]));
    }
    return rep;
}

void write_mismatch_csv(const MismatchReport& report, const GridCase& grid,
                        const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw EvalError("cannot open for writing: " + path);
    f << "bus,mean_dp_pu,std_dp_pu,mean_dq_pu,std_dq_pu,"
         "mean_dp_mw,std_dp_mw,mean_dq_mvar,std_dq_mvar\n";
    char buf[320];
    const double s = grid.base_mva;
    for (int b = 0; b < grid.n_bus(); ++b) {
        std::snprintf(buf, sizeof(buf),
                      "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", b + 1,
                      report.mean_dp[b], report.std_dp[b], report.mean_dq[b],
                      report.std_dq[b], report.mean_dp[b] * s, report.std_dp[b] * s,
                      report.mean_dq[b] * s, report.std_dq[b] * s);
        f << buf;
    }
}

Histogram make_histogram(const std::vector<double>& values, int bins) {
    if (bins < 1) throw EvalError("histogram needs at least one bin");
    Histogram h;
    double lo = 0.0, hi = 1.0;
    if (!values.empty()) {
        lo = *std::min_element(values.begin(), values.end());
        hi = *std::max_element(values.begin(), values.end());
        if (lo == hi) hi = lo + 1.0;
    }
    h.edges.resize(bins + 1);
    for (int k = 0; k <= bins; ++k) h.edges[k] = lo + (hi - lo) * k / bins;
    h.counts.assign(bins, 0);
    for (double v : values) {
        int k = static_cast<int>((v - lo) / (hi - lo) * bins);
        if (k >= bins) k = bins - 1;  // closes the last bin
        if (k < 0) k = 0;
        ++h.counts[k];
    }
    return h;
}

void histogram_export(const std::vector<double>& values, int bins,
                      const std::string& path) {
    Histogram h = make_histogram(values, bins);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw EvalError("cannot open for writing: " + path);
    f << "bin_left,bin_right,count\n";
    char buf[128];
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%ld\n", h.edges[k], h.edges[k + 1],
                      h.counts[k]);
        f << buf;
    }
}

Eigen::VectorXd known_variables(const PowerFlowRecord& rec, const GridCase& grid) {
    const int n = grid.n_bus();
    Eigen::VectorXd known(2 * n);
    for (int b = 0; b < n; ++b) {
        switch (grid.buses[b].kind) {
            case BusKind::Pq:
                known[2 * b] = rec.p[b];
                known[2 * b + 1] = rec.q[b];
                break;
            case BusKind::Pv:
                known[2 * b] = rec.p[b];
                known[2 * b + 1] = rec.v[b];
                break;
            case BusKind::Slack:
                known[2 * b] = rec.v[b];
                known[2 * b + 1] = rec.theta[b];
                break;
        }
    }
    return known;
}

Eigen::VectorXd unknown_variables(const PowerFlowRecord& rec, const GridCase& grid) {
    const int n = grid.n_bus();
    Eigen::VectorXd unknown(2 * n);
    for (int b = 0; b < n; ++b) {
        switch (grid.buses[b].kind) {
            case BusKind::Pq:
                unknown[2 * b] = rec.v[b];
                unknown[2 * b + 1] = rec.theta[b];
                break;
            case BusKind::Pv:
                unknown[2 * b] = rec.q[b];
                unknown[2 * b + 1] = rec.theta[b];
                break;
            case BusKind::Slack:
                unknown[2 * b] = rec.p[b];
                unknown[2 * b + 1] = rec.q[b];
                break;
        }
    }
    return unknown;
}

PowerFlowRecord assemble_state(const PowerFlowRecord& known_source,
                               const Eigen::VectorXd& unknowns, const GridCase& grid) {
    const int n = grid.n_bus();
    PowerFlowRecord out = known_source;
    for (int b = 0; b < n; ++b) {
        switch (grid.buses[b].kind) {
            case BusKind::Pq:
                out.v[b] = unknowns[2 * b];
                out.theta[b] = unknowns[2 * b + 1];
                break;
            case BusKind::Pv:
                out.q[b] = unknowns[2 * b];
                out.theta[b] = unknowns[2 * b + 1];
                break;
            case BusKind::Slack:
                out.p[b] = unknowns[2 * b];
                out.q[b] = unknowns[2 * b + 1];
                break;
        }
    }
    return out;
}

namespace {

struct MinMax {
    Eigen::VectorXd lo, hi;
    Eigen::VectorXd encode(const Eigen::VectorXd& x) const {
        Eigen::VectorXd out(x.size());
        for (int i = 0; i < x.size(); ++i) {
            const double r = hi[i] - lo[i];
            out[i] = r == 0.0 ? 0.0 : 2.0 * (x[i] - lo[i]) / r - 1.0;
        }
        return out;
    }
    Eigen::VectorXd decode(const Eigen::VectorXd& x) const {
        Eigen::VectorXd out(x.size());
        for (int i = 0; i < x.size(); ++i) {
            const double r = hi[i] - lo[i];
            out[i] = r == 0.0 ? lo[i] : 0.5 * (x[i] + 1.0) * r + lo[i];
        }
        return out;
    }
};

MinMax fit_minmax(const Eigen::MatrixXd& cols) {
    MinMax mm;
    mm.lo = cols.rowwise().minCoeff();
    mm.hi = cols.rowwise().maxCoeff();
    return mm;
}

}  // namespace

DownstreamResult downstream_warmstart(const Dataset& train, const Dataset& test,
                                      const GridCase& grid, const DownstreamConfig& cfg) {
    const int n = grid.n_bus();
    if (train.n_bus != n || test.n_bus != n)
        throw EvalError("downstream: dataset dimension does not match case");
    const int N = train.size();
    Eigen::MatrixXd x(2 * n, N), y(2 * n, N);
    for (int i = 0; i < N; ++i) {
        PowerFlowRecord rec = train.record(i);
        x.col(i) = known_variables(rec, grid);
        y.col(i) = unknown_variables(rec, grid);
    }
    const MinMax in_mm = fit_minmax(x), out_mm = fit_minmax(y);
    for (int i = 0; i < N; ++i) {
        x.col(i) = in_mm.encode(x.col(i));
        y.col(i) = out_mm.encode(y.col(i));
    }

    Rng rng = Rng::substream(cfg.seed, 0);
    Mlp model = make_mlp(2 * n, 0, 1, {cfg.hidden, cfg.hidden}, 2 * n, rng);
    AdamState adam = make_adam(model, cfg.lr);
    MlpGradients grads;
    Eigen::MatrixXd bx(2 * n, cfg.batch), by(2 * n, cfg.batch);
    std::vector<int> ts(cfg.batch, 0);
    for (int step = 0; step < cfg.steps; ++step) {
        for (int k = 0; k < cfg.batch; ++k) {
            const int i = static_cast<int>(rng.uniform() * N);
            bx.col(k) = x.col(i);
            by.col(k) = y.col(i);
        }
        mlp_param_gradients(model, bx, ts, by, grads);
        adam_step(model, grads, adam);
    }

    // Evaluate total mismatches induced by the predictions on the test set.
    std::vector<double> tot_dp, tot_dq;
    for (int i = 0; i < test.size(); ++i) {
        PowerFlowRecord rec = test.record(i);
        Eigen::VectorXd pred =
            out_mm.decode(mlp_forward(model, in_mm.encode(known_variables(rec, grid)), 0));
        PowerFlowRecord assembled = assemble_state(rec, pred, grid);
        EqualityResidual r = equality_residual(assembled, grid);
        tot_dp.push_back(r.dp.cwiseAbs().sum());
        tot_dq.push_back(r.dq.cwiseAbs().sum());
    }
    auto moments = [](const std::vector<double>& v) {
        double mean = 0.0, sq = 0.0;
        for (double a : v) mean += a;
        mean /= v.size();
        for (double a : v) sq += (a - mean) * (a - mean);
        return std::pair<double, double>(mean, std::sqrt(sq / v.size()));
    };
    DownstreamResult res;
    std::tie(res.mean_dp, res.std_dp) = moments(tot_dp);
    std::tie(res.mean_dq, res.std_dq) = moments(tot_dq);
    return res;
}

void write_downstream_csv(
    const std::vector<std::pair<std::string, DownstreamResult>>& rows,
    const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw EvalError("cannot open for writing: " + path);
    f << "training_data,mean_abs_dp,std_abs_dp,mean_abs_dq,std_abs_dq\n";
    char buf[256];
    for (const auto& [name, r] : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%.17g\n", name.c_str(),
                      r.mean_dp, r.std_dp, r.mean_dq, r.std_dq);
        f << buf;
    }
}

}  // namespace gridflow
