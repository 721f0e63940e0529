#include "gridflow/mlp.hpp"

#include <cmath>

namespace gridflow {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double silu(double x) { return x * sigmoid(x); }
inline double silu_deriv(double x) {
    const double s = sigmoid(x);
    return s * (1.0 + x * (1.0 - s));
}

// Forward pass caching pre-activations and activations per layer.
struct ForwardCache {
    std::vector<Eigen::MatrixXd> pre;   // z_l
    std::vector<Eigen::MatrixXd> act;   // a_0 = input, a_l = activation(z_l)
};

Eigen::MatrixXd assemble_input(const Mlp& model, const Eigen::MatrixXd& x,
                               const std::vector<int>& ts) {
    if (x.rows() != model.data_dim)
        throw std::invalid_argument("mlp: input width mismatch");
    if (model.emb_dim == 0) return x;
    Eigen::MatrixXd in(model.input_dim(), x.cols());
    in.topRows(model.data_dim) = x;
    for (int c = 0; c < x.cols(); ++c)
        in.col(c).tail(model.emb_dim) =
            time_embedding(ts[c], model.time_steps, model.emb_dim);
    return in;
}

void run_forward(const Mlp& model, const Eigen::MatrixXd& input, ForwardCache& cache) {
    const int layers = model.layer_count();
    cache.pre.resize(layers);
    cache.act.resize(layers + 1);
    cache.act[0] = input;
    for (int l = 0; l < layers; ++l) {
        cache.pre[l] = (model.weights[l] * cache.act[l]).colwise() + model.biases[l];
        if (l + 1 < layers)
            cache.act[l + 1] = cache.pre[l].unaryExpr([](double z) { return silu(z); });
        else
            cache.act[l + 1] = cache.pre[l];
    }
}

// Backpropagates dL/d(output) through the layers; fills parameter gradients
// when grads != nullptr and returns dL/d(input).
Eigen::MatrixXd backprop(const Mlp& model, const ForwardCache& cache,
                         Eigen::MatrixXd delta, MlpGradients* grads) {
    const int layers = model.layer_count();
    for (int l = layers - 1; l >= 0; --l) {
        if (grads) {
            grads->weights[l] = delta * cache.act[l].transpose();
            grads->biases[l] = delta.rowwise().sum();
        }
        delta = model.weights[l].transpose() * delta;
        if (l > 0)
            delta.array() *=
                cache.pre[l - 1].unaryExpr([](double z) { return silu_deriv(z); }).array();
    }
    return delta;
}

}  // namespace

Eigen::VectorXd time_embedding(int t, int time_steps, int width) {
    Eigen::VectorXd emb(width);
    if (width == 0) return emb;
    const double s = static_cast<double>(t) / static_cast<double>(time_steps);
    const int pairs = width / 2;
    for (int k = 0; k < pairs; ++k) {
        // Frequencies geometrically spaced over three decades.
        const double freq =
            6.283185307179586 * std::pow(1000.0, pairs > 1 ? (double)k / (pairs - 1) : 0.0);
        emb[2 * k] = std::sin(s * freq);
        emb[2 * k + 1] = std::cos(s * freq);
    }
    if (width % 2 == 1) emb[width - 1] = s;
    return emb;
}

Mlp make_mlp(int data_dim, int emb_dim, int time_steps,
             const std::vector<int>& hidden_widths, int output_dim, Rng& rng) {
    Mlp model;
    model.data_dim = data_dim;
    model.emb_dim = emb_dim;
    model.time_steps = time_steps;
    int in = data_dim + emb_dim;
    std::vector<int> widths = hidden_widths;
    widths.push_back(output_dim);
    for (int out : widths) {
        const double bound = std::sqrt(6.0 / in);
        Eigen::MatrixXd w(out, in);
        for (int r = 0; r < out; ++r)
            for (int c = 0; c < in; ++c) w(r, c) = rng.uniform(-bound, bound);
        model.weights.push_back(std::move(w));
        model.biases.push_back(Eigen::VectorXd::Zero(out));
        in = out;
    }
    return model;
}

Eigen::VectorXd mlp_forward(const Mlp& model, const Eigen::VectorXd& x, int t) {
    return mlp_forward_batch(model, x, {t}).col(0);
}

Eigen::MatrixXd mlp_forward_batch(const Mlp& model, const Eigen::MatrixXd& x,
                                  const std::vector<int>& ts) {
    ForwardCache cache;
    run_forward(model, assemble_input(model, x, ts), cache);
    return cache.act.back();
}

double mlp_param_gradients(const Mlp& model, const Eigen::MatrixXd& x,
                           const std::vector<int>& ts, const Eigen::MatrixXd& target,
                           MlpGradients& grads) {
    ForwardCache cache;
    run_forward(model, assemble_input(model, x, ts), cache);
    const Eigen::MatrixXd diff = cache.act.back() - target;
    const double batch = static_cast<double>(x.cols());
    grads.weights.resize(model.layer_count());
    grads.biases.resize(model.layer_count());
    backprop(model, cache, (2.0 / batch) * diff, &grads);
    return diff.squaredNorm() / batch;
}

Eigen::VectorXd mlp_input_vjp(const Mlp& model, const Eigen::VectorXd& x, int t,
                              const Eigen::VectorXd& cotangent) {
    return mlp_input_vjp_batch(model, x, {t}, cotangent).col(0);
}

Eigen::MatrixXd mlp_input_vjp_batch(const Mlp& model, const Eigen::MatrixXd& x,
                                    const std::vector<int>& ts,
                                    const Eigen::MatrixXd& cotangents) {
    if (cotangents.rows() != model.output_dim())
        throw std::invalid_argument("mlp: cotangent width mismatch");
    ForwardCache cache;
    run_forward(model, assemble_input(model, x, ts), cache);
    Eigen::MatrixXd grad_in = backprop(model, cache, cotangents, nullptr);
    return grad_in.topRows(model.data_dim);
}

AdamState make_adam(const Mlp& model, double lr) {
    AdamState st;
    st.lr = lr;
    for (int l = 0; l < model.layer_count(); ++l) {
        st.m_w.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(),
                                               model.weights[l].cols()));
        st.v_w.push_back(st.m_w.back());
        st.m_b.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
        st.v_b.push_back(st.m_b.back());
    }
    return st;
}

void adam_step(Mlp& model, const MlpGradients& grads, AdamState& st) {
    st.step += 1;
    const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
    const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
    for (int l = 0; l < model.layer_count(); ++l) {
        st.m_w[l] = st.beta1 * st.m_w[l] + (1.0 - st.beta1) * grads.weights[l];
        st.v_w[l] = st.beta2 * st.v_w[l] +
                    (1.0 - st.beta2) * grads.weights[l].cwiseProduct(grads.weights[l]);
        model.weights[l].array() -=
            st.lr * (st.m_w[l].array() / c1) /
            ((st.v_w[l].array() / c2).sqrt() + st.eps);
        st.m_b[l] = st.beta1 * st.m_b[l] + (1.0 - st.beta1) * grads.biases[l];
        st.v_b[l] = st.beta2 * st.v_b[l] +
                    (1.0 - st.beta2) * grads.biases[l].cwiseProduct(grads.biases[l]);
        model.biases[l].array() -=
            st.lr * (st.m_b[l].array() / c1) /
            ((st.v_b[l].array() / c2).sqrt() + st.eps);
    }
}

}  // namespace gridflow
