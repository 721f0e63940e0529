#include "gridflow/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace gridflow {

namespace {

void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
    char buf[40];
    for (int i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%a", v[i]);
        out << buf << (i + 1 == v.size() ? "" : " ");
    }
    out << "\n";
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    char buf[40];
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), "%a", m(r, c));
            out << buf << (c + 1 == m.cols() ? "" : " ");
        }
        out << "\n";
    }
}

// operator>> does not accept hexfloat; go through strtod.
double read_double(std::istream& in) {
    std::string tok;
    if (!(in >> tok)) throw CheckpointError("truncated checkpoint");
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
        throw CheckpointError("bad number in checkpoint: " + tok);
    return v;
}

Eigen::VectorXd read_vector(std::istream& in, int size) {
    Eigen::VectorXd v(size);
    for (int i = 0; i < size; ++i) v[i] = read_double(in);
    return v;
}

Eigen::MatrixXd read_matrix(std::istream& in, int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = read_double(in);
    return m;
}

void write_mlp(std::ostream& out, const Mlp& model) {
    out << "mlp " << model.data_dim << " " << model.emb_dim << " " << model.time_steps
        << " " << model.layer_count() << "\n";
    for (int l = 0; l < model.layer_count(); ++l) {
        out << "layer " << model.weights[l].rows() << " " << model.weights[l].cols()
            << "\n";
        write_matrix(out, model.weights[l]);
        write_vector(out, model.biases[l]);
    }
}

Mlp read_mlp(std::istream& in) {
    std::string tag;
    int layers = 0;
    Mlp model;
    if (!(in >> tag >> model.data_dim >> model.emb_dim >> model.time_steps >> layers) ||
        tag != "mlp")
        throw CheckpointError("bad mlp section");
    for (int l = 0; l < layers; ++l) {
        int rows = 0, cols = 0;
        if (!(in >> tag >> rows >> cols) || tag != "layer")
            throw CheckpointError("bad layer header");
        model.weights.push_back(read_matrix(in, rows, cols));
        model.biases.push_back(read_vector(in, rows));
    }
    return model;
}

}  // namespace

void save_checkpoint(const DecoupledModel& model, double beta_1, double beta_T,
                     const std::string& path) {
    std::ostringstream out;
    out << "gridflow-checkpoint 1\n";
    out << "case " << (model.case_name.empty() ? "-" : model.case_name) << "\n";
    out << "n_bus " << model.n_bus << "\n";
    char buf[96];
    std::snprintf(buf, sizeof(buf), "schedule %d %a %a\n", model.schedule.T, beta_1,
                  beta_T);
    out << buf;
    out << "norm " << model.stats.x_min.size() << "\n";
    write_vector(out, model.stats.x_min);
    write_vector(out, model.stats.x_max);
    write_mlp(out, model.denoiser_1);
    write_mlp(out, model.denoiser_2);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw CheckpointError("cannot open for writing: " + path);
    f << out.str();
}

DecoupledModel load_checkpoint(const std::string& path, double* beta_1_out,
                               double* beta_T_out) {
    std::ifstream in(path);
    if (!in) throw CheckpointError("cannot open checkpoint: " + path);
    std::string tag;
    int version = 0;
    if (!(in >> tag >> version) || tag != "gridflow-checkpoint" || version != 1)
        throw CheckpointError("not a gridflow checkpoint: " + path);
    DecoupledModel model;
    if (!(in >> tag >> model.case_name) || tag != "case")
        throw CheckpointError("bad case line");
    if (model.case_name == "-") model.case_name.clear();
    if (!(in >> tag >> model.n_bus) || tag != "n_bus")
        throw CheckpointError("bad n_bus line");
    int T = 0;
    if (!(in >> tag >> T) || tag != "schedule")
        throw CheckpointError("bad schedule line");
    double beta_1 = read_double(in);
    double beta_T = read_double(in);
    model.schedule = make_schedule(T, beta_1, beta_T);
    int norm_size = 0;
    if (!(in >> tag >> norm_size) || tag != "norm")
        throw CheckpointError("bad norm line");
    model.stats.x_min = read_vector(in, norm_size);
    model.stats.x_max = read_vector(in, norm_size);
    model.denoiser_1 = read_mlp(in);
    model.denoiser_2 = read_mlp(in);
    if (beta_1_out) *beta_1_out = beta_1;
    if (beta_T_out) *beta_T_out = beta_T;
    return model;
}

std::uint64_t file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open for hashing: " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char chunk[4096];
    while (in.read(chunk, sizeof(chunk)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(chunk[i]);
            h *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    return h;
}

}  // namespace gridflow
