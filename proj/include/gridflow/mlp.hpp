#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "gridflow/rng.hpp"

namespace gridflow {

// Feedforward network with SiLU hidden layers and a linear output. Inputs
// are the data vector concatenated with a sinusoidal embedding of the time
// step (embedding width may be zero for plain regression use).
struct Mlp {
    int data_dim = 0;
    int emb_dim = 0;
    int time_steps = 1;  // T used to scale the embedding argument
    std::vector<Eigen::MatrixXd> weights;  // layer l: out x in
    std::vector<Eigen::VectorXd> biases;

    int input_dim() const { return data_dim + emb_dim; }
    int output_dim() const { return weights.empty() ? 0 : (int)weights.back().rows(); }
    int layer_count() const { return static_cast<int>(weights.size()); }
};

// Sinusoidal features of t/T at geometrically spaced frequencies;
// deterministic function of (t, T, width).
Eigen::VectorXd time_embedding(int t, int time_steps, int width);

// Uniform He-style init, all randomness from the supplied stream.
Mlp make_mlp(int data_dim, int emb_dim, int time_steps,
             const std::vector<int>& hidden_widths, int output_dim, Rng& rng);

Eigen::VectorXd mlp_forward(const Mlp& model, const Eigen::VectorXd& x, int t);

// Column-per-sample batch forward; ts holds one step index per column.
Eigen::MatrixXd mlp_forward_batch(const Mlp& model, const Eigen::MatrixXd& x,
                                  const std::vector<int>& ts);

struct MlpGradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

// Exact gradients of the mean-squared loss mean_i ||target_i - out_i||^2
// over the batch. Returns the loss value.
double mlp_param_gradients(const Mlp& model, const Eigen::MatrixXd& x,
                           const std::vector<int>& ts, const Eigen::MatrixXd& target,
                           MlpGradients& grads);

// cotangent^T * d(forward)/d(x), restricted to the data block.
Eigen::VectorXd mlp_input_vjp(const Mlp& model, const Eigen::VectorXd& x, int t,
                              const Eigen::VectorXd& cotangent);

// Batched VJP: one cotangent column per sample.
Eigen::MatrixXd mlp_input_vjp_batch(const Mlp& model, const Eigen::MatrixXd& x,
                                    const std::vector<int>& ts,
                                    const Eigen::MatrixXd& cotangents);

// Adam with bias correction.
struct AdamState {
    std::vector<Eigen::MatrixXd> m_w, v_w;
    std::vector<Eigen::VectorXd> m_b, v_b;
    long step = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

AdamState make_adam(const Mlp& model, double lr);
void adam_step(Mlp& model, const MlpGradients& grads, AdamState& state);

}  // namespace gridflow
