// gridflow: batch pipeline driver.
//   gen-data    sample loads and solve power flows into a dataset CSV
//   train       fit the decoupled denoisers on a dataset
//   sample      draw synthetic records (optionally constraint-guided)
//   eval        Wasserstein-1 + per-bus mismatch reports
//   downstream  warm-start predictor comparison across training sets
//
// Every run writes a JSON manifest with the fully resolved configuration and
// input/output file hashes; re-running with `--config <manifest>` reproduces
// the outputs byte-for-byte. Exit codes: 0 success, 2 bad usage, 3 file
// error, 4 numerical abort.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridflow/acpf.hpp"
#include "gridflow/checkpoint.hpp"
#include "gridflow/datagen.hpp"
#include "gridflow/diffusion.hpp"
#include "gridflow/evaluate.hpp"
#include "gridflow/grid_case.hpp"

using nlohmann::json;
using namespace gridflow;

namespace {

struct FileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failures (exit 4), distinct from file problems (exit 3).
struct AbortError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Pulls values out of a config JSON for options the user did not pass on the
// command line; explicit flags always win.
class ConfigLayer {
  public:
    explicit ConfigLayer(const json& j) : j_(j) {}

    template <typename T>
    void apply(const CLI::App& app, const std::string& flag, const std::string& key,
               T& value) const {
        const CLI::Option* opt = app.get_option(flag);
        if (opt->count() > 0) return;
        if (auto it = j_.find(key); it != j_.end()) value = it->get<T>();
    }

  private:
    const json& j_;
};

json load_config_json(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream f(path);
    if (!f) throw FileError("cannot open config: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw FileError("bad config JSON in " + path + ": " + e.what());
    }
    // A previous run's manifest doubles as a config file.
    if (j.contains("config")) return j["config"];
    return j;
}

std::uint64_t resolve_seed(const CLI::App& app, const json& cfg, std::uint64_t flag_val) {
    if (app.get_option("--seed")->count() > 0) return flag_val;
    if (auto it = cfg.find("seed"); it != cfg.end()) return it->get<std::uint64_t>();
    if (const char* env = std::getenv("GRIDFLOW_SEED"); env && *env)
        return std::strtoull(env, nullptr, 10);
    return flag_val;
}

void write_manifest(const std::string& path, const std::string& command,
                    const json& config, const json& inputs, const json& outputs,
                    const json& events) {
    json m;
    m["tool"] = "gridflow";
    m["manifest_version"] = 1;
    m["command"] = command;
    m["config"] = config;
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    m["events"] = events;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FileError("cannot write manifest: " + path);
    f << m.dump(2) << "\n";
}

json file_entry(const std::string& path) {
    return json{{"path", path}, {"fnv1a64", hex64(file_hash(path))}};
}

double default_lambda(const std::string& case_name) {
    static const std::map<std::string, double> table = {
        {"case5", 1e-2}, {"case24", 1e-4}, {"case118", 5e-4}};
    auto it = table.find(case_name);
    return it == table.end() ? 0.0 : it->second;
}

GridCase load_case_checked(const std::string& path) {
    if (!std::filesystem::exists(path)) throw FileError("no such case file: " + path);
    return load_case_file(path);
}

Dataset load_dataset_checked(const std::string& path) {
    if (!std::filesystem::exists(path)) throw FileError("no such dataset: " + path);
    return read_dataset_csv(path);
}

// ---------------------------------------------------------------- gen-data

int cmd_gen_data(CLI::App& app, const json& cfg) {
    ConfigLayer layer(cfg);
    std::string case_path = app["--case"]->as<std::string>();
    std::string out = app["--out"]->as<std::string>();
    std::string manifest_path = app["--manifest"]->as<std::string>();
    int n = app["--n"]->as<int>();
    int threads = app["--threads"]->as<int>();
    layer.apply(app, "--case", "case", case_path);
    layer.apply(app, "--n", "n", n);
    layer.apply(app, "--out", "out", out);
    layer.apply(app, "--threads", "threads", threads);
    std::uint64_t seed = resolve_seed(app, cfg, app["--seed"]->as<std::uint64_t>());
    if (case_path.empty() || out.empty())
        throw CLI::ValidationError("gen-data requires --case and --out");
    if (manifest_path.empty()) {
        if (auto it = cfg.find("manifest"); it != cfg.end()) manifest_path = *it;
        if (manifest_path.empty()) manifest_path = out + ".manifest.json";
    }

    GridCase grid = load_case_checked(case_path);
    GenerationReport report;
    Dataset data;
    try {
        data = generate_dataset(grid, n, seed, threads, &report);
    } catch (const GenerationError& e) {
        throw AbortError(e.what());
    }
    write_dataset_csv(data, out);
    std::cout << "gen-data: " << n << " records, " << report.divergences
              << " divergences resampled\n";

    json config{{"case", case_path}, {"n", n}, {"seed", seed},
                {"threads", threads}, {"out", out}, {"manifest", manifest_path}};
    write_manifest(manifest_path, "gen-data", config,
                   json{{"case", file_entry(case_path)}},
                   json{{"dataset", file_entry(out)}},
                   json{{"divergences", report.divergences}});
    return 0;
}

// ------------------------------------------------------------------- train

int cmd_train(CLI::App& app, const json& cfg) {
    ConfigLayer layer(cfg);
    std::string data_path = app["--data"]->as<std::string>();
    std::string out = app["--out"]->as<std::string>();
    std::string manifest_path = app["--manifest"]->as<std::string>();
    TrainConfig tc;
    tc.steps = app["--steps"]->as<int>();
    tc.batch = app["--batch"]->as<int>();
    tc.lr = app["--lr"]->as<double>();
    tc.T = app["--T"]->as<int>();
    tc.beta_1 = app["--beta1"]->as<double>();
    tc.beta_T = app["--betaT"]->as<double>();
    tc.hidden = app["--hidden"]->as<int>();
    tc.emb_dim = app["--emb"]->as<int>();
    tc.log_every = app["--log-every"]->as<int>();
    layer.apply(app, "--data", "data", data_path);
    layer.apply(app, "--out", "out", out);
    layer.apply(app, "--steps", "steps", tc.steps);
    layer.apply(app, "--batch", "batch", tc.batch);
    layer.apply(app, "--lr", "lr", tc.lr);
    layer.apply(app, "--T", "T", tc.T);
    layer.apply(app, "--beta1", "beta_1", tc.beta_1);
    layer.apply(app, "--betaT", "beta_T", tc.beta_T);
    layer.apply(app, "--hidden", "hidden", tc.hidden);
    layer.apply(app, "--emb", "emb_dim", tc.emb_dim);
    layer.apply(app, "--log-every", "log_every", tc.log_every);
    tc.seed = resolve_seed(app, cfg, app["--seed"]->as<std::uint64_t>());
    if (data_path.empty() || out.empty())
        throw CLI::ValidationError("train requires --data and --out");
    if (manifest_path.empty()) {
        if (auto it = cfg.find("manifest"); it != cfg.end()) manifest_path = *it;
        if (manifest_path.empty()) manifest_path = out + ".manifest.json";
    }

    Dataset data = load_dataset_checked(data_path);
    tc.on_log = [&](int step, double loss) {
        std::cout << "train: step " << step << " loss " << loss << "\n";
    };
    DecoupledModel model = train_decoupled(data, tc);
    save_checkpoint(model, tc.beta_1, tc.beta_T, out);
    std::cout << "train: wrote " << out << "\n";

    json config{{"data", data_path},   {"out", out},        {"steps", tc.steps},
                {"batch", tc.batch},   {"lr", tc.lr},       {"T", tc.T},
                {"beta_1", tc.beta_1}, {"beta_T", tc.beta_T}, {"hidden", tc.hidden},
                {"emb_dim", tc.emb_dim}, {"seed", tc.seed}, {"log_every", tc.log_every},
                {"manifest", manifest_path}};
    write_manifest(manifest_path, "train", config,
                   json{{"dataset", file_entry(data_path)}},
                   json{{"checkpoint", file_entry(out)}}, json::object());
    return 0;
}

// ------------------------------------------------------------------ sample

int cmd_sample(CLI::App& app, const json& cfg) {
    ConfigLayer layer(cfg);
    std::string ckpt_path = app["--checkpoint"]->as<std::string>();
    std::string case_path = app["--case"]->as<std::string>();
    std::string out = app["--out"]->as<std::string>();
    std::string manifest_path = app["--manifest"]->as<std::string>();
    std::string mode_str = app["--mode"]->as<std::string>();
    int n = app["--n"]->as<int>();
    int threads = app["--threads"]->as<int>();
    double lambda = app["--lambda"]->as<double>();
    bool lambda_given = app.get_option("--lambda")->count() > 0;
    bool no_ineq = app["--no-inequalities"]->as<bool>();
    layer.apply(app, "--checkpoint", "checkpoint", ckpt_path);
    layer.apply(app, "--case", "case", case_path);
    layer.apply(app, "--out", "out", out);
    layer.apply(app, "--mode", "mode", mode_str);
    layer.apply(app, "--n", "n", n);
    layer.apply(app, "--threads", "threads", threads);
    layer.apply(app, "--no-inequalities", "no_inequalities", no_ineq);
    if (!lambda_given && cfg.contains("lambda")) {
        lambda = cfg["lambda"].get<double>();
        lambda_given = true;
    }
    std::uint64_t seed = resolve_seed(app, cfg, app["--seed"]->as<std::uint64_t>());
    if (ckpt_path.empty() || out.empty())
        throw CLI::ValidationError("sample requires --checkpoint and --out");
    if (manifest_path.empty()) {
        if (auto it = cfg.find("manifest"); it != cfg.end()) manifest_path = *it;
        if (manifest_path.empty()) manifest_path = out + ".manifest.json";
    }
    if (mode_str != "exact" && mode_str != "approx")
        throw CLI::ValidationError("--mode must be exact or approx");

    if (!std::filesystem::exists(ckpt_path))
        throw FileError("no such checkpoint: " + ckpt_path);
    DecoupledModel model = load_checkpoint(ckpt_path);

    GuidanceConfig gc;
    gc.mode = mode_str == "exact" ? GuidanceMode::ExactVjp : GuidanceMode::Approximate;
    gc.include_inequalities = !no_ineq;

    Dataset synth;
    json inputs{{"checkpoint", file_entry(ckpt_path)}};
    if (!case_path.empty()) {
        GridCase grid = load_case_checked(case_path);
        gc.lambda = lambda_given ? lambda : default_lambda(grid.name);
        std::cout << "sample: guided, lambda " << gc.lambda << ", mode " << mode_str
                  << "\n";
        synth = sample_guided(model, grid, n, seed, gc, threads);
        inputs["case"] = file_entry(case_path);
    } else {
        gc.lambda = 0.0;
        std::cout << "sample: unguided\n";
        synth = sample_unguided(model, n, seed, threads);
    }
    synth.case_name = model.case_name;
    synth.seed = seed;
    write_dataset_csv(synth, out);
    std::cout << "sample: wrote " << n << " records to " << out << "\n";

    json config{{"checkpoint", ckpt_path}, {"case", case_path}, {"out", out},
                {"n", n},                  {"seed", seed},      {"lambda", gc.lambda},
                {"mode", mode_str},        {"threads", threads},
                {"no_inequalities", no_ineq}, {"manifest", manifest_path}};
    write_manifest(manifest_path, "sample", config, inputs,
                   json{{"dataset", file_entry(out)}}, json::object());
    return 0;
}

// -------------------------------------------------------------------- eval

int cmd_eval(CLI::App& app, const json& cfg) {
    ConfigLayer layer(cfg);
    std::string real_path = app["--real"]->as<std::string>();
    std::string syn_path = app["--syn"]->as<std::string>();
    std::string case_path = app["--case"]->as<std::string>();
    std::string out_dir = app["--out-dir"]->as<std::string>();
    std::string manifest_path = app["--manifest"]->as<std::string>();
    int bins = app["--bins"]->as<int>();
    layer.apply(app, "--real", "real", real_path);
    layer.apply(app, "--syn", "syn", syn_path);
    layer.apply(app, "--case", "case", case_path);
    layer.apply(app, "--out-dir", "out_dir", out_dir);
    layer.apply(app, "--bins", "bins", bins);
    if (real_path.empty() || syn_path.empty())
        throw CLI::ValidationError("eval requires --real and --syn");
    if (manifest_path.empty()) {
        if (auto it = cfg.find("manifest"); it != cfg.end()) manifest_path = *it;
        if (manifest_path.empty())
            manifest_path = (std::filesystem::path(out_dir) / "eval.manifest.json").string();
    }

    Dataset real = load_dataset_checked(real_path);
    Dataset syn = load_dataset_checked(syn_path);
    // All validation happens before any report file is written, so a failed
    // run leaves no partial outputs.
    if (real.width() != syn.width())
        throw FileError("dataset width mismatch: " + real_path + " has " +
                        std::to_string(real.width()) + " columns, " + syn_path + " has " +
                        std::to_string(syn.width()));
    GridCase grid;
    bool have_case = !case_path.empty();
    if (have_case) {
        grid = load_case_checked(case_path);
        if (4 * grid.n_bus() != real.width())
            throw FileError("case/dataset dimension mismatch");
    }

    // The transport solve needs equal sizes; truncate both sets to the
    // smaller one (explicit, and recorded in the manifest and w1.txt).
    const int n_w1 = std::min(real.size(), syn.size());
    Dataset real_w1 = real, syn_w1 = syn;
    real_w1.rows.resize(n_w1);
    syn_w1.rows.resize(n_w1);

    std::filesystem::create_directories(out_dir);
    TransportPlan plan = wasserstein1(real_w1, syn_w1);

    const std::string w1_path = (std::filesystem::path(out_dir) / "w1.txt").string();
    {
        std::ofstream f(w1_path, std::ios::binary);
        if (!f) throw FileError("cannot write " + w1_path);
        f << fmt_double(plan.total_cost) << "\n";
        f << "metric euclidean_flat_pu\n";
        f << "n " << n_w1 << "\n";
        f << "real " << real_path << "\n";
        f << "syn " << syn_path << "\n";
    }
    std::cout << "eval: W1 = " << fmt_double(plan.total_cost) << "\n";

    json outputs{{"w1", file_entry(w1_path)}};
    if (have_case) {
        MismatchReport rep = mismatch_report(syn, grid);
        const std::string mm_path =
            (std::filesystem::path(out_dir) / ("mismatch_" + grid.name + ".csv")).string();
        write_mismatch_csv(rep, grid, mm_path);
        outputs["mismatch"] = file_entry(mm_path);
        for (int b = 0; b < grid.n_bus(); ++b) {
            for (const char* kind : {"dp", "dq"}) {
                const std::string hp =
                    (std::filesystem::path(out_dir) /
                     ("hist_" + std::to_string(b + 1) + "_" + kind + ".csv")).string();
                histogram_export(kind[1] == 'p' ? rep.dp_samples[b] : rep.dq_samples[b],
                                 bins, hp);
            }
        }
        outputs["histograms"] = json{{"dir", out_dir}, {"bins", bins},
                                     {"buses", grid.n_bus()}};
    }

    json config{{"real", real_path}, {"syn", syn_path}, {"case", case_path},
                {"out_dir", out_dir}, {"bins", bins},   {"manifest", manifest_path}};
    json inputs{{"real", file_entry(real_path)}, {"syn", file_entry(syn_path)}};
    if (have_case) inputs["case"] = file_entry(case_path);
    write_manifest(manifest_path, "eval", config, inputs, outputs, json::object());
    return 0;
}

// -------------------------------------------------------------- downstream

int cmd_downstream(CLI::App& app, const json& cfg) {
    ConfigLayer layer(cfg);
    std::string case_path = app["--case"]->as<std::string>();
    std::string test_path = app["--test"]->as<std::string>();
    std::string out = app["--out"]->as<std::string>();
    std::string manifest_path = app["--manifest"]->as<std::string>();
    std::vector<std::string> train_specs;
    if (app.get_option("--train")->count() > 0)
        train_specs = app["--train"]->as<std::vector<std::string>>();
    DownstreamConfig dc;
    dc.steps = app["--steps"]->as<int>();
    dc.batch = app["--batch"]->as<int>();
    dc.lr = app["--lr"]->as<double>();
    dc.hidden = app["--hidden"]->as<int>();
    layer.apply(app, "--case", "case", case_path);
    layer.apply(app, "--test", "test", test_path);
    layer.apply(app, "--out", "out", out);
    layer.apply(app, "--train", "train", train_specs);
    layer.apply(app, "--steps", "steps", dc.steps);
    layer.apply(app, "--batch", "batch", dc.batch);
    layer.apply(app, "--lr", "lr", dc.lr);
    layer.apply(app, "--hidden", "hidden", dc.hidden);
    dc.seed = resolve_seed(app, cfg, app["--seed"]->as<std::uint64_t>());
    if (case_path.empty() || test_path.empty() || out.empty() || train_specs.empty())
        throw CLI::ValidationError(
            "downstream requires --case, --test, --out and at least one --train "
            "name=path");

    if (manifest_path.empty()) {
        if (auto it = cfg.find("manifest"); it != cfg.end()) manifest_path = *it;
        if (manifest_path.empty()) manifest_path = out + ".manifest.json";
    }

    GridCase grid = load_case_checked(case_path);
    Dataset test = load_dataset_checked(test_path);
    json inputs{{"case", file_entry(case_path)}, {"test", file_entry(test_path)}};
    std::vector<std::pair<std::string, DownstreamResult>> rows;
    for (const std::string& spec : train_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--train expects name=path, got " + spec);
        const std::string name = spec.substr(0, eq);
        const std::string path = spec.substr(eq + 1);
        Dataset train = load_dataset_checked(path);
        DownstreamResult res = downstream_warmstart(train, test, grid, dc);
        std::cout << "downstream: " << name << " mean|dp| " << fmt_double(res.mean_dp)
                  << " mean|dq| " << fmt_double(res.mean_dq) << "\n";
        rows.emplace_back(name, res);
        inputs["train_" + name] = file_entry(path);
    }
    write_downstream_csv(rows, out);

    json config{{"case", case_path}, {"test", test_path}, {"train", train_specs},
                {"out", out},        {"steps", dc.steps}, {"batch", dc.batch},
                {"lr", dc.lr},       {"hidden", dc.hidden}, {"seed", dc.seed},
                {"manifest", manifest_path}};
    write_manifest(manifest_path, "downstream", config, inputs,
                   json{{"report", file_entry(out)}}, json::object());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridflow: power flow dataset synthesis with constrained diffusion"};
    app.require_subcommand(1);

    std::string config_path;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path,
                        "JSON config or a previous run's manifest; flags override");
        sub->add_option("--seed", "random seed (fallback: GRIDFLOW_SEED, then 0)")
            ->default_val(std::uint64_t{0});
        sub->add_option("--manifest", "manifest output path")->default_val(std::string{});
    };

    CLI::App* gen = app.add_subcommand("gen-data", "generate a feasible dataset");
    add_common(gen);
    gen->add_option("--case", "case file")->default_val(std::string{});
    gen->add_option("--n", "number of records")->default_val(1000);
    gen->add_option("--out", "output dataset CSV")->default_val(std::string{});
    gen->add_option("--threads", "worker threads")->default_val(1);

    CLI::App* train = app.add_subcommand("train", "train the decoupled denoisers");
    add_common(train);
    train->add_option("--data", "training dataset CSV")->default_val(std::string{});
    train->add_option("--out", "checkpoint output path")->default_val(std::string{});
    train->add_option("--steps", "optimizer steps")->default_val(30000);
    train->add_option("--batch", "batch size")->default_val(128);
    train->add_option("--lr", "learning rate")->default_val(1e-3);
    train->add_option("--T", "diffusion steps")->default_val(1000);
    train->add_option("--beta1", "first beta")->default_val(1e-4);
    train->add_option("--betaT", "last beta")->default_val(2e-2);
    train->add_option("--hidden", "hidden width (0 = auto)")->default_val(0);
    train->add_option("--emb", "time embedding width")->default_val(32);
    train->add_option("--log-every", "loss log interval")->default_val(500);

    CLI::App* sample = app.add_subcommand("sample", "draw synthetic records");
    add_common(sample);
    sample->add_option("--checkpoint", "model checkpoint")->default_val(std::string{});
    sample->add_option("--case", "case file; enables constraint guidance")
        ->default_val(std::string{});
    sample->add_option("--out", "output dataset CSV")->default_val(std::string{});
    sample->add_option("--n", "number of samples")->default_val(1000);
    sample->add_option("--lambda", "guidance scale (default: per-case)")
        ->default_val(0.0);
    sample->add_option("--mode", "guidance gradient mode: exact|approx")
        ->default_val(std::string{"exact"});
    sample->add_option("--threads", "worker threads")->default_val(1);
    sample->add_flag("--no-inequalities", "guide on equality constraints only");

    CLI::App* eval = app.add_subcommand("eval", "similarity and feasibility reports");
    add_common(eval);
    eval->add_option("--real", "ground-truth dataset CSV")->default_val(std::string{});
    eval->add_option("--syn", "synthetic dataset CSV")->default_val(std::string{});
    eval->add_option("--case", "case file for mismatch reports")
        ->default_val(std::string{});
    eval->add_option("--out-dir", "report directory")->default_val(std::string{"."});
    eval->add_option("--bins", "histogram bins")->default_val(50);

    CLI::App* down = app.add_subcommand("downstream", "warm-start predictor comparison");
    add_common(down);
    down->add_option("--case", "case file")->default_val(std::string{});
    down->add_option("--test", "held-out test dataset CSV")->default_val(std::string{});
    down->add_option("--train", "repeatable name=path training dataset")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    down->add_option("--out", "downstream report CSV")->default_val(std::string{});
    down->add_option("--steps", "optimizer steps")->default_val(4000);
    down->add_option("--batch", "batch size")->default_val(64);
    down->add_option("--lr", "learning rate")->default_val(1e-3);
    down->add_option("--hidden", "hidden width")->default_val(128);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return 2;
    }

    try {
        const json cfg = load_config_json(config_path);
        if (gen->parsed()) return cmd_gen_data(*gen, cfg);
        if (train->parsed()) return cmd_train(*train, cfg);
        if (sample->parsed()) return cmd_sample(*sample, cfg);
        if (eval->parsed()) return cmd_eval(*eval, cfg);
        if (down->parsed()) return cmd_downstream(*down, cfg);
        std::cerr << "error: usage: no subcommand\n";
        return 2;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return 2;
    } catch (const NumericalAbort& e) {
        std::cerr << "error: numerical-abort: " << e.what() << "\n";
        return 4;
    } catch (const TrainingError& e) {
        std::cerr << "error: numerical-abort: " << e.what() << "\n";
        return 4;
    } catch (const AbortError& e) {
        std::cerr << "error: numerical-abort: " << e.what() << "\n";
        return 4;
    } catch (const FileError& e) {
        std::cerr << "error: file: " << e.what() << "\n";
        return 3;
    } catch (const CaseError& e) {
        std::cerr << "error: file: " << e.what() << "\n";
        return 3;
    } catch (const CheckpointError& e) {
        std::cerr << "error: file: " << e.what() << "\n";
        return 3;
    } catch (const EvalError& e) {
        std::cerr << "error: file: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: file: " << e.what() << "\n";
        return 3;
    }
}
