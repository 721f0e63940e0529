#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gridflow/acpf.hpp"
#include "gridflow/grid_case.hpp"
#include "gridflow/rng.hpp"

namespace gridflow {

// A set of flattened power flow records, one (p, q, v, theta) row each.
struct Dataset {
    std::string case_name;
    std::uint64_t seed = 0;
    int n_bus = 0;
    std::vector<Eigen::VectorXd> rows;  // each of length 4 * n_bus

    int width() const { return 4 * n_bus; }
    int size() const { return static_cast<int>(rows.size()); }
    PowerFlowRecord record(int i) const { return PowerFlowRecord::from_flat(rows[i]); }
};

// Per-coordinate min/max over a training dataset; drives the [-1, 1]
// normalization and its chain-rule diagonal.
struct NormStats {
    Eigen::VectorXd x_min;
    Eigen::VectorXd x_max;
};

// Independent uniform draws in [0.8 * nominal, nominal] per bus and
// component. A zero nominal load stays exactly zero.
std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_loads(const GridCase& grid, Rng& rng);

// Deterministic dispatch: total sampled load plus a 2% loss allowance split
// across PV buses proportionally to p_max; the slack absorbs the residual.
Eigen::VectorXd dispatch_generation(const GridCase& grid, const Eigen::VectorXd& p_load);

struct GenerationReport {
    int divergences = 0;
};

struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// n feasible records via sample_loads -> dispatch -> newton_solve. Diverged
// solves are resampled from the same per-record stream, so results do not
// depend on worker count. Aborts when more than half of all attempts fail.
Dataset generate_dataset(const GridCase& grid, int n, std::uint64_t seed,
                         int threads = 1, GenerationReport* report = nullptr);

NormStats fit_norm(const Dataset& data);

// Min-max map onto [-1, 1]; degenerate coordinates (min == max) map to 0.
Eigen::VectorXd normalize(const Eigen::VectorXd& x, const NormStats& stats);

// Inverse of normalize; degenerate coordinates return x_min.
Eigen::VectorXd denormalize(const Eigen::VectorXd& x_norm, const NormStats& stats);

// Diagonal of d(denormalize)/d(x_norm): (x_max - x_min) / 2, zero on
// degenerate coordinates.
Eigen::VectorXd denorm_jacobian_diag(const NormStats& stats);

void write_dataset_csv(const Dataset& data, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

void write_norm_csv(const NormStats& stats, int n_bus, const std::string& path);
NormStats read_norm_csv(const std::string& path);

}  // namespace gridflow
