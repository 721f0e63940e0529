#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gridflow {

enum class BusKind { Slack, Pv, Pq };

std::string to_string(BusKind kind);

// One bus of the network. Indices are 0-based internally; the case-file
// format is 1-based.
struct Bus {
    int index = 0;
    BusKind kind = BusKind::Pq;
    double p_min = 0.0, p_max = 0.0;  // net injection limits, p.u.
    double q_min = 0.0, q_max = 0.0;
    double v_min = 0.0, v_max = 0.0;  // voltage magnitude limits, p.u.
    double p_load_nom = 0.0, q_load_nom = 0.0;
    double v_setpoint = 1.0;  // held at PV and slack buses
    double shunt_g = 0.0, shunt_b = 0.0;
};

// A transmission line, parameterized directly by the off-diagonal admittance
// entries it contributes: g = G_ij, b = B_ij of Y = G + jB.
struct Branch {
    int from_bus = 0;
    int to_bus = 0;
    double g = 0.0;
    double b = 0.0;
    double s_max = 0.0;  // apparent power flow limit, p.u.
};

struct GridCase {
    std::string name;
    double base_mva = 100.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    int slack_bus = 0;

    int n_bus() const { return static_cast<int>(buses.size()); }
    int n_branch() const { return static_cast<int>(branches.size()); }

    std::vector<int> pv_buses() const;
    std::vector<int> pq_buses() const;

    // Checks all structural invariants; throws CaseError on violation.
    void validate() const;
};

struct CaseError : std::runtime_error {
    explicit CaseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Syntax error carrying the offending line number.
struct CaseParseError : CaseError {
    int line;
    CaseParseError(int line_, const std::string& msg)
        : CaseError("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

GridCase parse_case(const std::string& text);
std::string serialize_case(const GridCase& grid);
GridCase load_case_file(const std::string& path);

// Dense bus admittance matrix. Off-diagonals come straight from the branch
// (g, b) pairs; diagonals accumulate the negated incident branch terms plus
// bus shunts. Construction is symmetric by assignment, so G and B equal
// their transposes bitwise.
struct AdmittanceMatrix {
    Eigen::MatrixXd G;
    Eigen::MatrixXd B;
};

AdmittanceMatrix build_admittance(const GridCase& grid);

// Series-impedance conversion used when a case supplies (r, x) instead of
// (g, b): returns the off-diagonal entry of Y, i.e. -1/(r + jx).
std::pair<double, double> branch_admittance_from_impedance(double r, double x);

}  // namespace gridflow
