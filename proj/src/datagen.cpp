#include "gridflow/datagen.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>
#include <fstream>
#include <sstream>
#include <thread>

namespace gridflow {

std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_loads(const GridCase& grid, Rng& rng) {
    const int n = grid.n_bus();
    Eigen::VectorXd p(n), q(n);
    for (int b = 0; b < n; ++b) {
        const Bus& bus = grid.buses[b];
        // Draw order is fixed (p then q per bus) for reproducibility.
        p[b] = bus.p_load_nom == 0.0 ? 0.0
                                     : rng.uniform(0.8 * bus.p_load_nom, bus.p_load_nom);
        q[b] = bus.q_load_nom == 0.0 ? 0.0
                                     : rng.uniform(0.8 * bus.q_load_nom, bus.q_load_nom);
    }
    return {p, q};
}

Eigen::VectorXd dispatch_generation(const GridCase& grid, const Eigen::VectorXd& p_load) {
    const int n = grid.n_bus();
    Eigen::VectorXd p_gen = Eigen::VectorXd::Zero(n);
    double pmax_total = 0.0;
    for (int b : grid.pv_buses()) pmax_total += grid.buses[b].p_max;
    if (pmax_total <= 0.0) return p_gen;
    const double target = 1.02 * p_load.sum();
    for (int b : grid.pv_buses())
        p_gen[b] = target * grid.buses[b].p_max / pmax_total;
    return p_gen;
}

namespace {

// One record from its dedicated RNG substream; resamples on divergence.
Eigen::VectorXd generate_record(const GridCase& grid, std::uint64_t seed,
                                std::uint64_t index, std::atomic<int>& divergences,
                                std::atomic<int>& attempts) {
    Rng rng = Rng::substream(seed, index);
    for (;;) {
        attempts.fetch_add(1, std::memory_order_relaxed);
        auto [p_load, q_load] = sample_loads(grid, rng);
        Eigen::VectorXd p_gen = dispatch_generation(grid, p_load);
        try {
            PowerFlowRecord rec = newton_solve(grid, p_load, q_load, p_gen);
            return rec.flatten();
        } catch (const DivergenceError&) {
            int d = divergences.fetch_add(1, std::memory_order_relaxed) + 1;
            int a = attempts.load(std::memory_order_relaxed);
            if (a >= 20 && d * 2 > a)
                throw GenerationError(
                    "divergence rate above 50% (" + std::to_string(d) + "/" +
                    std::to_string(a) + " attempts); case looks mis-specified");
        }
    }
}

}  // namespace

Dataset generate_dataset(const GridCase& grid, int n, std::uint64_t seed, int threads,
                         GenerationReport* report) {
    if (n < 1) throw GenerationError("dataset size must be >= 1");
    Dataset data;
    data.case_name = grid.name;
    data.seed = seed;
    data.n_bus = grid.n_bus();
    data.rows.resize(n);

    std::atomic<int> divergences{0}, attempts{0};
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                data.rows[i] = generate_record(grid, seed, i, divergences, attempts);
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
    if (report) report->divergences = divergences.load();
    return data;
}

NormStats fit_norm(const Dataset& data) {
    if (data.size() < 1) throw GenerationError("fit_norm: empty dataset");
    NormStats stats;
    stats.x_min = data.rows[0];
    stats.x_max = data.rows[0];
    for (const auto& row : data.rows) {
        stats.x_min = stats.x_min.cwiseMin(row);
        stats.x_max = stats.x_max.cwiseMax(row);
    }
    return stats;
}

Eigen::VectorXd normalize(const Eigen::VectorXd& x, const NormStats& stats) {
    Eigen::VectorXd out(x.size());
    for (int i = 0; i < x.size(); ++i) {
        const double range = stats.x_max[i] - stats.x_min[i];
        out[i] = range == 0.0 ? 0.0 : 2.0 * (x[i] - stats.x_min[i]) / range - 1.0;
    }
    return out;
}

Eigen::VectorXd denormalize(const Eigen::VectorXd& x_norm, const NormStats& stats) {
    Eigen::VectorXd out(x_norm.size());
    for (int i = 0; i < x_norm.size(); ++i) {
        const double range = stats.x_max[i] - stats.x_min[i];
        out[i] = range == 0.0
                     ? stats.x_min[i]
                     : 0.5 * (x_norm[i] + 1.0) * range + stats.x_min[i];
    }
    return out;
}

Eigen::VectorXd denorm_jacobian_diag(const NormStats& stats) {
    return 0.5 * (stats.x_max - stats.x_min);
}

namespace {

std::string csv_header(int n_bus) {
    std::string header;
    const char* groups[4] = {"p", "q", "v", "theta"};
    for (int g = 0; g < 4; ++g)
        for (int b = 1; b <= n_bus; ++b) {
            if (!header.empty()) header += ',';
            header += std::string(groups[g]) + "_" + std::to_string(b);
        }
    return header;
}

void append_row(std::string& out, const Eigen::VectorXd& row) {
    char buf[40];
    for (int i = 0; i < row.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
        if (i) out += ',';
        out += buf;
    }
    out += '\n';
}

std::vector<double> split_row(const std::string& line, int line_no) {
    std::vector<double> vals;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            vals.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw GenerationError("csv line " + std::to_string(line_no) +
                                  ": bad number '" + cell + "'");
        }
    }
    return vals;
}

}  // namespace

void write_dataset_csv(const Dataset& data, const std::string& path) {
    std::string out = csv_header(data.n_bus) + "\n";
    for (const auto& row : data.rows) append_row(out, row);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw GenerationError("cannot open for writing: " + path);
    f << out;
}

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw GenerationError("cannot open dataset: " + path);
    std::string line;
    if (!std::getline(f, line)) throw GenerationError("empty dataset file: " + path);
    int cols = 1;
    for (char c : line)
        if (c == ',') ++cols;
    if (cols % 4 != 0) throw GenerationError("dataset width not a multiple of 4");
    Dataset data;
    data.n_bus = cols / 4;
    int line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto vals = split_row(line, line_no);
        if (static_cast<int>(vals.size()) != cols)
            throw GenerationError("csv line " + std::to_string(line_no) +
                                  ": expected " + std::to_string(cols) + " columns");
        data.rows.push_back(
            Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<int>(vals.size())));
    }
    return data;
}

void write_norm_csv(const NormStats& stats, int n_bus, const std::string& path) {
    std::string out = csv_header(n_bus) + "\n";
    append_row(out, stats.x_min);
    append_row(out, stats.x_max);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw GenerationError("cannot open for writing: " + path);
    f << out;
}

NormStats read_norm_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw GenerationError("cannot open norm stats: " + path);
    std::string line;
    std::getline(f, line);
    NormStats stats;
    for (int r = 0; r < 2; ++r) {
        if (!std::getline(f, line))
            throw GenerationError("norm stats file needs two data rows");
        auto vals = split_row(line, r + 2);
        auto vec = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<int>(vals.size()));
        if (r == 0) stats.x_min = vec;
        else stats.x_max = vec;
    }
    return stats;
}

}  // namespace gridflow
