#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gridflow/datagen.hpp"
#include "gridflow/grid_case.hpp"

namespace gridflow {

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Optimal pairing of N ground-truth rows to N synthetic rows under uniform
// marginals; for equal sizes the optimum is a permutation.
struct TransportPlan {
    std::vector<int> assignment;  // row i of D matched to assignment[i] of D~
    double total_cost = 0.0;      // sum of matched Euclidean distances / N
};

// Exact type-1 Wasserstein distance via a shortest-augmenting-path
// assignment solve on the N x N Euclidean cost matrix. Requires N == M.
TransportPlan wasserstein1(const Dataset& real, const Dataset& synthetic);

// Exact assignment on an explicit cost matrix (row -> column), used by the
// transport solve and directly testable against brute force.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

struct MismatchReport {
    Eigen::VectorXd mean_dp, std_dp;  // per bus, p.u.
    Eigen::VectorXd mean_dq, std_dq;
    std::vector<std::vector<double>> dp_samples;  // per bus, for histograms
    std::vector<std::vector<double>> dq_samples;
};

MismatchReport mismatch_report(const Dataset& data, const GridCase& grid);

void write_mismatch_csv(const MismatchReport& report, const GridCase& grid,
                        const std::string& path);

// Deterministic binning: left-closed right-open, last bin closed.
struct Histogram {
    std::vector<double> edges;   // bins + 1
    std::vector<long> counts;    // bins
};

Histogram make_histogram(const std::vector<double>& values, int bins);
void histogram_export(const std::vector<double>& values, int bins,
                      const std::string& path);

struct DownstreamConfig {
    int steps = 4000;
    int batch = 64;
    double lr = 1e-3;
    int hidden = 128;
    std::uint64_t seed = 0;
};

struct DownstreamResult {
    double mean_dp = 0.0, std_dp = 0.0;  // total |dp| over buses, p.u.
    double mean_dq = 0.0, std_dq = 0.0;
};

// Splits each record into known variables (PQ: p,q; PV: p,v; slack: v,theta)
// and the complementary unknowns.
Eigen::VectorXd known_variables(const PowerFlowRecord& rec, const GridCase& grid);
Eigen::VectorXd unknown_variables(const PowerFlowRecord& rec, const GridCase& grid);

// Rebuilds a full state from a record's known variables and a prediction of
// the unknowns.
PowerFlowRecord assemble_state(const PowerFlowRecord& known_source,
                               const Eigen::VectorXd& unknowns, const GridCase& grid);

// Trains a feedforward predictor known -> unknown on `train`, then reports
// mean and std of the total nodal mismatches it induces on `test`.
DownstreamResult downstream_warmstart(const Dataset& train, const Dataset& test,
                                      const GridCase& grid, const DownstreamConfig& cfg);

void write_downstream_csv(const std::vector<std::pair<std::string, DownstreamResult>>& rows,
                          const std::string& path);

}  // namespace gridflow
