#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gridflow/datagen.hpp"
#include "gridflow/grid_case.hpp"
#include "gridflow/mlp.hpp"

namespace gridflow {

// beta_t, alpha_t, alpha_bar_t and the posterior noise scale sigma_t for
// t = 1..T (index t-1 in the vectors); alpha_bar_0 is defined as 1.
struct NoiseSchedule {
    int T = 0;
    Eigen::VectorXd beta;
    Eigen::VectorXd alpha;
    Eigen::VectorXd alpha_bar;
    Eigen::VectorXd sigma;

    double alpha_bar_prev(int t) const { return t <= 1 ? 1.0 : alpha_bar[t - 2]; }
};

NoiseSchedule make_schedule(int T, double beta_1, double beta_T);

Eigen::VectorXd forward_diffuse(const Eigen::VectorXd& x0, int t,
                                const Eigen::VectorXd& eps, const NoiseSchedule& sch);

Eigen::VectorXd tweedie_estimate(const Eigen::VectorXd& x_t,
                                 const Eigen::VectorXd& eps_pred, int t,
                                 const NoiseSchedule& sch);

// One reverse ancestral step; the caller passes z = 0 at t = 1.
Eigen::VectorXd posterior_step(const Eigen::VectorXd& x_t, const Eigen::VectorXd& x0_hat,
                               int t, const Eigen::VectorXd& z, const NoiseSchedule& sch);

// Fixed permutation between the full (p, q, v, theta) layout and the two
// decoupled halves x1 = (p, theta), x2 = (q, v).
struct Decoupling {
    int n_bus = 0;
    Eigen::VectorXd half1(const Eigen::VectorXd& full) const;
    Eigen::VectorXd half2(const Eigen::VectorXd& full) const;
    Eigen::VectorXd concat(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2) const;
};

struct DecoupledModel {
    std::string case_name;
    int n_bus = 0;
    Mlp denoiser_1;  // over (p, theta)
    Mlp denoiser_2;  // over (q, v)
    NoiseSchedule schedule;
    NormStats stats;

    Decoupling decoupling() const { return Decoupling{n_bus}; }
};

struct TrainConfig {
    int steps = 30000;
    int batch = 128;
    double lr = 1e-3;
    int T = 1000;
    double beta_1 = 1e-4;
    double beta_T = 2e-2;
    int hidden = 0;    // 0 -> max(128, 4 * B)
    int emb_dim = 32;
    std::uint64_t seed = 0;
    int log_every = 500;
    std::function<void(int step, double loss)> on_log;
};

struct TrainingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Trains both decoupled denoisers on the min-max normalized dataset
// (stats fitted here and stored in the model).
DecoupledModel train_decoupled(const Dataset& data, const TrainConfig& config);

enum class GuidanceMode { ExactVjp, Approximate };

struct GuidanceConfig {
    double lambda = 0.0;
    GuidanceMode mode = GuidanceMode::ExactVjp;
    bool include_inequalities = true;
};

struct NumericalAbort : std::runtime_error {
    int step;
    explicit NumericalAbort(int step_)
        : std::runtime_error("non-finite sampling trajectory at step " +
                             std::to_string(step_) +
                             " (guidance scale may be too large)"),
          step(step_) {}
};

// Gradient of R_H + R_G with respect to the normalized noisy sample x_t:
// physical-space constraint gradient at denormalize(x0_hat), pulled back
// through the min-max map and, in exact-vjp mode, through the denoisers'
// Tweedie map.
Eigen::VectorXd guidance_gradient(const Eigen::VectorXd& x_t_full,
                                  const Eigen::VectorXd& x0_hat_full,
                                  const DecoupledModel& model, const GridCase& grid,
                                  int t, const GuidanceConfig& config);

// Ancestral sampling per the decoupled scheme; chains run on independent RNG
// substreams of (seed, chain index), so output is worker-count invariant.
// When `grid` is set, the x0 estimate is corrected by -lambda * guidance
// gradient at every step (the correction is computed even at lambda = 0).
Dataset sample(const DecoupledModel& model, int n, std::uint64_t seed,
               const GuidanceConfig& config, const GridCase* grid, int threads = 1);

Dataset sample_unguided(const DecoupledModel& model, int n, std::uint64_t seed,
                        int threads = 1);

Dataset sample_guided(const DecoupledModel& model, const GridCase& grid, int n,
                      std::uint64_t seed, const GuidanceConfig& config, int threads = 1);

}  // namespace gridflow
