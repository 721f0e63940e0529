#include "gridflow/diffusion.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "gridflow/acpf.hpp"

namespace gridflow {

NoiseSchedule make_schedule(int T, double beta_1, double beta_T) {
    if (T < 1 || !(beta_1 > 0.0) || beta_1 > beta_T || !(beta_T < 1.0))
        throw TrainingError("schedule requires 0 < beta_1 <= beta_T < 1 and T >= 1");
    NoiseSchedule sch;
    sch.T = T;
    sch.beta.resize(T);
    for (int t = 0; t < T; ++t)
        sch.beta[t] = T == 1 ? beta_1
                             : beta_1 + (beta_T - beta_1) * t / static_cast<double>(T - 1);
    sch.alpha = 1.0 - sch.beta.array();
    sch.alpha_bar.resize(T);
    double prod = 1.0;
    for (int t = 0; t < T; ++t) sch.alpha_bar[t] = (prod *= sch.alpha[t]);
    sch.sigma.resize(T);
    for (int t = 1; t <= T; ++t)
        sch.sigma[t - 1] = std::sqrt(sch.beta[t - 1] * (1.0 - sch.alpha_bar_prev(t)) /
                                     (1.0 - sch.alpha_bar[t - 1]));
    return sch;
}

Eigen::VectorXd forward_diffuse(const Eigen::VectorXd& x0, int t,
                                const Eigen::VectorXd& eps, const NoiseSchedule& sch) {
    const double ab = sch.alpha_bar[t - 1];
    return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
}

Eigen::VectorXd tweedie_estimate(const Eigen::VectorXd& x_t,
                                 const Eigen::VectorXd& eps_pred, int t,
                                 const NoiseSchedule& sch) {
    const double ab = sch.alpha_bar[t - 1];
    return (x_t - std::sqrt(1.0 - ab) * eps_pred) / std::sqrt(ab);
}

Eigen::VectorXd posterior_step(const Eigen::VectorXd& x_t, const Eigen::VectorXd& x0_hat,
                               int t, const Eigen::VectorXd& z, const NoiseSchedule& sch) {
    const double ab = sch.alpha_bar[t - 1];
    const double ab_prev = sch.alpha_bar_prev(t);
    const double c_xt = std::sqrt(sch.alpha[t - 1]) * (1.0 - ab_prev) / (1.0 - ab);
    const double c_x0 = std::sqrt(ab_prev) * sch.beta[t - 1] / (1.0 - ab);
    return c_xt * x_t + c_x0 * x0_hat + sch.sigma[t - 1] * z;
}

Eigen::VectorXd Decoupling::half1(const Eigen::VectorXd& full) const {
    Eigen::VectorXd x(2 * n_bus);
    x.head(n_bus) = full.segment(0, n_bus);            // p
    x.tail(n_bus) = full.segment(3 * n_bus, n_bus);    // theta
    return x;
}

Eigen::VectorXd Decoupling::half2(const Eigen::VectorXd& full) const {
    return full.segment(n_bus, 2 * n_bus);             // (q, v)
}

Eigen::VectorXd Decoupling::concat(const Eigen::VectorXd& x1,
                                   const Eigen::VectorXd& x2) const {
    Eigen::VectorXd full(4 * n_bus);
    full.segment(0, n_bus) = x1.head(n_bus);
    full.segment(n_bus, 2 * n_bus) = x2;
    full.segment(3 * n_bus, n_bus) = x1.tail(n_bus);
    return full;
}

DecoupledModel train_decoupled(const Dataset& data, const TrainConfig& config) {
    if (data.size() < 1) throw TrainingError("training dataset is empty");
    const int n = data.n_bus;
    const int half = 2 * n;
    const int hidden = config.hidden > 0 ? config.hidden : std::max(128, 4 * n);

    DecoupledModel model;
    model.case_name = data.case_name;
    model.n_bus = n;
    model.schedule = make_schedule(config.T, config.beta_1, config.beta_T);
    model.stats = fit_norm(data);

    Rng init1 = Rng::substream(config.seed, 0);
    Rng init2 = Rng::substream(config.seed, 1);
    Rng batch_rng = Rng::substream(config.seed, 2);
    model.denoiser_1 =
        make_mlp(half, config.emb_dim, config.T, {hidden, hidden}, half, init1);
    model.denoiser_2 =
        make_mlp(half, config.emb_dim, config.T, {hidden, hidden}, half, init2);

    const Decoupling dec = model.decoupling();
    const int N = data.size();
    Eigen::MatrixXd x1(half, N), x2(half, N);
    for (int i = 0; i < N; ++i) {
        Eigen::VectorXd norm = normalize(data.rows[i], model.stats);
        x1.col(i) = dec.half1(norm);
        x2.col(i) = dec.half2(norm);
    }

    AdamState adam1 = make_adam(model.denoiser_1, config.lr);
    AdamState adam2 = make_adam(model.denoiser_2, config.lr);
    MlpGradients g1, g2;
    Eigen::MatrixXd b1(half, config.batch), b2(half, config.batch);
    Eigen::MatrixXd e1(half, config.batch), e2(half, config.batch);
    std::vector<int> ts(config.batch);

    for (int step = 0; step < config.steps; ++step) {
        // Fixed draw order: indices, steps, then the two noise blocks.
        std::vector<int> idx(config.batch);
        for (int k = 0; k < config.batch; ++k)
            idx[k] = static_cast<int>(batch_rng.uniform() * N);
        for (int k = 0; k < config.batch; ++k)
            ts[k] = 1 + static_cast<int>(batch_rng.uniform() * config.T);
        for (int k = 0; k < config.batch; ++k)
            for (int r = 0; r < half; ++r) e1(r, k) = batch_rng.normal();
        for (int k = 0; k < config.batch; ++k)
            for (int r = 0; r < half; ++r) e2(r, k) = batch_rng.normal();

        for (int k = 0; k < config.batch; ++k) {
            const double ab = model.schedule.alpha_bar[ts[k] - 1];
            b1.col(k) = std::sqrt(ab) * x1.col(idx[k]) + std::sqrt(1.0 - ab) * e1.col(k);
            b2.col(k) = std::sqrt(ab) * x2.col(idx[k]) + std::sqrt(1.0 - ab) * e2.col(k);
        }
        const double l1 = mlp_param_gradients(model.denoiser_1, b1, ts, e1, g1);
        const double l2 = mlp_param_gradients(model.denoiser_2, b2, ts, e2, g2);
        if (!std::isfinite(l1 + l2))
            throw TrainingError("non-finite loss at step " + std::to_string(step) +
                                " (l1=" + std::to_string(l1) +
                                ", l2=" + std::to_string(l2) + ")");
        adam_step(model.denoiser_1, g1, adam1);
        adam_step(model.denoiser_2, g2, adam2);
        if (config.on_log && (step % config.log_every == 0 || step + 1 == config.steps))
            config.on_log(step, l1 + l2);
    }
    return model;
}

Eigen::VectorXd guidance_gradient(const Eigen::VectorXd& x_t_full,
                                  const Eigen::VectorXd& x0_hat_full,
                                  const DecoupledModel& model, const GridCase& grid,
                                  int t, const GuidanceConfig& config) {
    const Decoupling dec = model.decoupling();
    const Eigen::VectorXd phys = denormalize(x0_hat_full, model.stats);
    const PowerFlowRecord state = PowerFlowRecord::from_flat(phys);
    Eigen::VectorXd g_phys = grad_residual_h(state, grid);
    if (config.include_inequalities) g_phys += grad_residual_g(state, grid);
    const Eigen::VectorXd cot = g_phys.cwiseProduct(denorm_jacobian_diag(model.stats));

    const double ab = model.schedule.alpha_bar[t - 1];
    const double root_ab = std::sqrt(ab);
    const double root_1mab = std::sqrt(1.0 - ab);

    Eigen::VectorXd c1 = dec.half1(cot), c2 = dec.half2(cot);
    Eigen::VectorXd u1, u2;
    if (config.mode == GuidanceMode::ExactVjp) {
        u1 = (c1 - root_1mab *
                       mlp_input_vjp(model.denoiser_1, dec.half1(x_t_full), t, c1)) /
             root_ab;
        u2 = (c2 - root_1mab *
                       mlp_input_vjp(model.denoiser_2, dec.half2(x_t_full), t, c2)) /
             root_ab;
    } else {
        u1 = c1 / root_ab;
        u2 = c2 / root_ab;
    }
    return dec.concat(u1, u2);
}

namespace {

// Chains are processed in fixed-size blocks so batched network calls are
// identical regardless of thread count.
constexpr int kChainBlock = 64;

void sample_block(const DecoupledModel& model, const GridCase* grid,
                  const GuidanceConfig& config, std::uint64_t seed, int first, int count,
                  std::vector<Eigen::VectorXd>& out) {
    const int n = model.n_bus;
    const int half = 2 * n;
    const NoiseSchedule& sch = model.schedule;
    const Decoupling dec = model.decoupling();

    std::vector<Rng> rngs;
    rngs.reserve(count);
    for (int c = 0; c < count; ++c)
        rngs.push_back(Rng::substream(seed, static_cast<std::uint64_t>(first + c)));

    Eigen::MatrixXd x(4 * n, count);
    for (int c = 0; c < count; ++c)
        for (int r = 0; r < 4 * n; ++r) x(r, c) = rngs[c].normal();

    Eigen::MatrixXd x1(half, count), x2(half, count);
    std::vector<int> ts(count);
    for (int t = sch.T; t >= 1; --t) {
        for (int c = 0; c < count; ++c) {
            x1.col(c) = dec.half1(x.col(c));
            x2.col(c) = dec.half2(x.col(c));
            ts[c] = t;
        }
        const Eigen::MatrixXd eps1 = mlp_forward_batch(model.denoiser_1, x1, ts);
        const Eigen::MatrixXd eps2 = mlp_forward_batch(model.denoiser_2, x2, ts);
        const double ab = sch.alpha_bar[t - 1];
        const double root_ab = std::sqrt(ab);
        const double root_1mab = std::sqrt(1.0 - ab);

        Eigen::MatrixXd x0_hat(4 * n, count);
        for (int c = 0; c < count; ++c)
            x0_hat.col(c) = dec.concat((x1.col(c) - root_1mab * eps1.col(c)) / root_ab,
                                       (x2.col(c) - root_1mab * eps2.col(c)) / root_ab);

        if (grid) {
            // Exact-vjp pullback batched over the block.
            Eigen::MatrixXd cot1(half, count), cot2(half, count);
            for (int c = 0; c < count; ++c) {
                const Eigen::VectorXd phys = denormalize(x0_hat.col(c), model.stats);
                const PowerFlowRecord st = PowerFlowRecord::from_flat(phys);
                Eigen::VectorXd g_phys = grad_residual_h(st, *grid);
                if (config.include_inequalities) g_phys += grad_residual_g(st, *grid);
                const Eigen::VectorXd cot =
                    g_phys.cwiseProduct(denorm_jacobian_diag(model.stats));
                cot1.col(c) = dec.half1(cot);
                cot2.col(c) = dec.half2(cot);
            }
            Eigen::MatrixXd u1, u2;
            if (config.mode == GuidanceMode::ExactVjp) {
                u1 = (cot1 - root_1mab *
                                 mlp_input_vjp_batch(model.denoiser_1, x1, ts, cot1)) /
                     root_ab;
                u2 = (cot2 - root_1mab *
                                 mlp_input_vjp_batch(model.denoiser_2, x2, ts, cot2)) /
                     root_ab;
            } else {
                u1 = cot1 / root_ab;
                u2 = cot2 / root_ab;
            }
            if (config.lambda != 0.0) {
                for (int c = 0; c < count; ++c)
                    x0_hat.col(c) -= config.lambda * dec.concat(u1.col(c), u2.col(c));
            }
        }

        const double ab_prev = sch.alpha_bar_prev(t);
        const double c_xt = std::sqrt(sch.alpha[t - 1]) * (1.0 - ab_prev) / (1.0 - ab);
        const double c_x0 = std::sqrt(ab_prev) * sch.beta[t - 1] / (1.0 - ab);
        for (int c = 0; c < count; ++c) {
            Eigen::VectorXd z = Eigen::VectorXd::Zero(4 * n);
            if (t > 1)
                for (int r = 0; r < 4 * n; ++r) z[r] = rngs[c].normal();
            x.col(c) = c_xt * x.col(c) + c_x0 * x0_hat.col(c) + sch.sigma[t - 1] * z;
        }
        if (!x.allFinite()) throw NumericalAbort(t);
    }
    for (int c = 0; c < count; ++c)
        out[first + c] = denormalize(x.col(c), model.stats);
}

}  // namespace

Dataset sample(const DecoupledModel& model, int n, std::uint64_t seed,
               const GuidanceConfig& config, const GridCase* grid, int threads) {
    Dataset data;
    data.case_name = model.case_name;
    data.seed = seed;
    data.n_bus = model.n_bus;
    data.rows.resize(n);

    const int blocks = (n + kChainBlock - 1) / kChainBlock;
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            int blk = next.fetch_add(1);
            if (blk >= blocks) return;
            const int first = blk * kChainBlock;
            const int count = std::min(kChainBlock, n - first);
            try {
                sample_block(model, grid, config, seed, first, count, data.rows);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
    return data;
}

Dataset sample_unguided(const DecoupledModel& model, int n, std::uint64_t seed,
                        int threads) {
    return sample(model, n, seed, GuidanceConfig{}, nullptr, threads);
}

Dataset sample_guided(const DecoupledModel& model, const GridCase& grid, int n,
                      std::uint64_t seed, const GuidanceConfig& config, int threads) {
    return sample(model, n, seed, config, &grid, threads);
}

}  // namespace gridflow
