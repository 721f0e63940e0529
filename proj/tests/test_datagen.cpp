#include <cstdio>
#include <fstream>
#include <string>

#include <doctest.h>

#include "gridflow/acpf.hpp"
#include "gridflow/datagen.hpp"
#include "gridflow/grid_case.hpp"

using namespace gridflow;

namespace {

std::string bundled(const char* name) {
    return std::string(GRIDFLOW_CASES_DIR) + "/" + name;
}

std::string temp_path(const char* name) {
    return std::string("/tmp/gridflow_test_") + name;
}

}  // namespace

TEST_CASE("load sampling stays in the uniform band and keeps zeros exact") {
    GridCase g = load_case_file(bundled("case5.txt"));
    Rng rng = Rng::substream(5, 0);
    for (int trial = 0; trial < 200; ++trial) {
        auto [p, q] = sample_loads(g, rng);
        for (int b = 0; b < 5; ++b) {
            const Bus& bus = g.buses[b];
            if (bus.p_load_nom == 0.0) {
                CHECK(p[b] == 0.0);
            } else {
                CHECK(p[b] >= 0.8 * bus.p_load_nom);
                CHECK(p[b] <= bus.p_load_nom);
            }
            if (bus.q_load_nom == 0.0) {
                CHECK(q[b] == 0.0);
            } else {
                CHECK(q[b] >= 0.8 * bus.q_load_nom);
                CHECK(q[b] <= bus.q_load_nom);
            }
        }
    }
}

TEST_CASE("dispatch splits the load plus allowance proportionally to pmax") {
    GridCase g = load_case_file(bundled("case5.txt"));
    Eigen::VectorXd p_load(5);
    p_load << 0.0, 2.5, 2.9, 3.3, 0.0;
    Eigen::VectorXd p_gen = dispatch_generation(g, p_load);
    const double target = 1.02 * p_load.sum();
    CHECK(p_gen.sum() == doctest::Approx(target).epsilon(1e-12));
    double pmax_total = 0.0;
    for (int b : g.pv_buses()) pmax_total += g.buses[b].p_max;
    for (int b = 0; b < 5; ++b) {
        if (g.buses[b].kind == BusKind::Pv) {
            CHECK(p_gen[b] ==
                  doctest::Approx(target * g.buses[b].p_max / pmax_total));
            CHECK(p_gen[b] <= g.buses[b].p_max);
        } else {
            CHECK(p_gen[b] == 0.0);
        }
    }
}

TEST_CASE("generated records are feasible") {
    GridCase g = load_case_file(bundled("case5.txt"));
    GenerationReport report;
    Dataset data = generate_dataset(g, 100, 42, 4, &report);
    REQUIRE(data.size() == 100);
    CHECK(data.case_name == "case5");
    for (int i = 0; i < data.size(); ++i) {
        PowerFlowRecord rec = data.record(i);
        CHECK(equality_residual(rec, g).inf_norm() <= 1e-8);
        CHECK(inequality_residual(rec, g).maxCoeff() <= 0.0);
    }
}

TEST_CASE("generation is deterministic and worker-count invariant") {
    GridCase g = load_case_file(bundled("case5.txt"));
    Dataset a = generate_dataset(g, 60, 9, 1);
    Dataset b = generate_dataset(g, 60, 9, 7);
    Dataset c = generate_dataset(g, 60, 9, 7);
    REQUIRE(a.size() == b.size());
    for (int i = 0; i < a.size(); ++i) {
        CHECK((a.rows[i] - b.rows[i]).cwiseAbs().maxCoeff() == 0.0);
        CHECK((b.rows[i] - c.rows[i]).cwiseAbs().maxCoeff() == 0.0);
    }
    Dataset d = generate_dataset(g, 60, 10, 7);
    CHECK((a.rows[0] - d.rows[0]).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("normalization maps the data onto [-1, 1] and inverts exactly") {
    GridCase g = load_case_file(bundled("case5.txt"));
    Dataset data = generate_dataset(g, 50, 3, 4);
    NormStats stats = fit_norm(data);
    for (const auto& row : data.rows) {
        Eigen::VectorXd z = normalize(row, stats);
        CHECK(z.minCoeff() >= -1.0);
        CHECK(z.maxCoeff() <= 1.0);
        Eigen::VectorXd back = denormalize(z, stats);
        CHECK((back - row).cwiseAbs().maxCoeff() < 1e-12);
    }
    // The per-coordinate extremes hit the interval ends exactly.
    Eigen::VectorXd z_min = normalize(stats.x_min, stats);
    Eigen::VectorXd z_max = normalize(stats.x_max, stats);
    for (int i = 0; i < z_min.size(); ++i) {
        const bool degenerate = stats.x_min[i] == stats.x_max[i];
        CHECK(z_min[i] == (degenerate ? 0.0 : -1.0));
        CHECK(z_max[i] == (degenerate ? 0.0 : 1.0));
    }
}

TEST_CASE("degenerate coordinates follow the documented convention") {
    NormStats stats;
    stats.x_min = Eigen::VectorXd::Constant(3, 2.5);
    stats.x_max = Eigen::VectorXd::Constant(3, 2.5);
    stats.x_max[2] = 3.5;
    Eigen::VectorXd x = Eigen::VectorXd::Constant(3, 2.5);
    Eigen::VectorXd z = normalize(x, stats);
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 0.0);
    CHECK(z[2] == -1.0);
    Eigen::VectorXd back = denormalize(Eigen::VectorXd::Constant(3, 0.7), stats);
    CHECK(back[0] == 2.5);
    CHECK(back[1] == 2.5);
    Eigen::VectorXd jac = denorm_jacobian_diag(stats);
    CHECK(jac[0] == 0.0);
    CHECK(jac[1] == 0.0);
    CHECK(jac[2] == 0.5);
}

TEST_CASE("dataset csv round trip is bit exact") {
    GridCase g = load_case_file(bundled("case5.txt"));
    Dataset data = generate_dataset(g, 30, 77, 4);
    const std::string path = temp_path("ds.csv");
    write_dataset_csv(data, path);
    {
        std::ifstream f(path);
        std::string header;
        std::getline(f, header);
        CHECK(header ==
              "p_1,p_2,p_3,p_4,p_5,q_1,q_2,q_3,q_4,q_5,"
              "v_1,v_2,v_3,v_4,v_5,theta_1,theta_2,theta_3,theta_4,theta_5");
    }
    Dataset back = read_dataset_csv(path);
    REQUIRE(back.size() == data.size());
    CHECK(back.n_bus == 5);
    for (int i = 0; i < data.size(); ++i)
        CHECK((back.rows[i] - data.rows[i]).cwiseAbs().maxCoeff() == 0.0);
    std::remove(path.c_str());
}

TEST_CASE("norm stats csv round trip is bit exact") {
    GridCase g = load_case_file(bundled("case5.txt"));
    Dataset data = generate_dataset(g, 30, 78, 4);
    NormStats stats = fit_norm(data);
    const std::string path = temp_path("norm.csv");
    write_norm_csv(stats, 5, path);
    NormStats back = read_norm_csv(path);
    CHECK((back.x_min - stats.x_min).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.x_max - stats.x_max).cwiseAbs().maxCoeff() == 0.0);
    std::remove(path.c_str());
}

TEST_CASE("csv reader rejects malformed files") {
    const std::string path = temp_path("bad.csv");
    {
        std::ofstream f(path);
        f << "p_1,q_1,v_1,theta_1\n1,2,3\n";
    }
    CHECK_THROWS_AS(read_dataset_csv(path), GenerationError);
    {
        std::ofstream f(path);
        f << "p_1,q_1,v_1\n";
    }
    CHECK_THROWS_AS(read_dataset_csv(path), GenerationError);
    CHECK_THROWS_AS(read_dataset_csv(temp_path("does_not_exist.csv")),
                    GenerationError);
    std::remove(path.c_str());
}
