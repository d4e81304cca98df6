// graphclust: community detection toolkit CLI.
//
// Subcommands: run <algo>, bench, export-embeddings, convert, datasets.
// Exit codes: 0 success, 1 validation error, 2 runtime error,
// 3 bench finished with failed cells.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "graphclust/bench.hpp"
#include "graphclust/deep.hpp"
#include "graphclust/sbm.hpp"

namespace {

using namespace graphclust;

void add_option_flag(CLI::App* cmd, std::map<std::string, std::string>& opts,
                     const std::string& cli_name, const std::string& key,
                     const std::string& desc) {
    cmd->add_option_function<std::string>(
        cli_name, [&opts, key](const std::string& v) { opts[key] = v; }, desc);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << content;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

// A small planted-partition dataset with block-indicator features, for
// demos and pipeline smoke tests without external data.
Dataset demo_dataset(std::uint64_t seed) {
    const int blocks = 4, per = 30, d = 12;
    const int n = blocks * per;
    std::vector<int> z(n);
    for (int i = 0; i < n; ++i) z[i] = i / per;
    DenseMatrix b(blocks, blocks, 0.02);
    for (int k = 0; k < blocks; ++k) b(k, k) = 0.25;
    Dataset ds;
    ds.graph = generate_sbm(n, z, b, seed);
    ds.features = DenseMatrix(n, d);
    Rng rng(seed + 1);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) {
            ds.features(i, j) = 0.2 * rng.normal() + (j % blocks == z[i] ? 1.0 : 0.0);
        }
    }
    ds.labels = std::move(z);
    ds.num_classes = blocks;
    ds.name = "demo";
    return ds;
}

int run_command(const std::string& algorithm, const std::string& dataset_arg, std::uint64_t seed,
                const std::map<std::string, std::string>& options, const std::string& out_prefix) {
    AlgoConfig cfg{algorithm, options};
    Dataset ds = resolve_dataset(dataset_arg);
    RunOutcome outcome = run_single(cfg, ds, seed);
    if (outcome.failed) {
        std::cerr << "run failed: " << outcome.error << "\n";
        return 2;
    }
    std::cout << MetricsReport::csv_header() << "\n" << outcome.report.to_csv_row() << "\n";
    for (const auto& flag : outcome.report.flags) std::cout << "# flag: " << flag << "\n";
    if (!out_prefix.empty()) {
        write_file(out_prefix + ".csv",
                   MetricsReport::csv_header() + "\n" + outcome.report.to_csv_row() + "\n");
        write_file(out_prefix + ".json", outcome.report.to_json() + "\n");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graphclust: graph community detection toolkit"};
    app.require_subcommand(1);

    // --- run ---------------------------------------------------------------
    auto* run = app.add_subcommand("run", "Run one algorithm on one dataset");
    std::string run_algo, run_dataset, run_out;
    std::uint64_t run_seed = 0;
    std::map<std::string, std::string> run_opts;
    run->add_option("algorithm", run_algo, "One of: spectral, sbm, mcl, leiden, gae, arga, mvgrl")
        ->required();
    run->add_option("--dataset", run_dataset, "Dataset name (cora|citeseer|uat) or GCT1 path")
        ->required();
    run->add_option("--seed", run_seed, "RNG seed (fully determines the report)");
    run->add_option("--out", run_out, "Report file prefix (writes .csv and .json)");
    add_option_flag(run, run_opts, "--k", "k", "Cluster count (default: dataset classes)");
    // spectral
    run->add_flag_callback("--normalize-rows", [&] { run_opts["normalize-rows"] = "true"; },
                           "spectral: L2-normalize embedding rows");
    run->add_flag_callback("--no-component-fallback",
                           [&] { run_opts["component-fallback"] = "false"; },
                           "spectral: error on disconnected input");
    // sbm
    add_option_flag(run, run_opts, "--method", "method", "sbm: em | mh | dcsbm-mh");
    add_option_flag(run, run_opts, "--iters", "iters", "sbm chains: iterations");
    add_option_flag(run, run_opts, "--burn-in", "burn-in", "sbm chains: burn-in");
    add_option_flag(run, run_opts, "--restarts", "restarts", "sbm em: restarts");
    add_option_flag(run, run_opts, "--trace", "trace", "sbm chains: CSV trace output path");
    // mcl
    add_option_flag(run, run_opts, "--expansion", "expansion", "mcl: expansion power");
    add_option_flag(run, run_opts, "--inflation", "inflation", "mcl: inflation exponent");
    add_option_flag(run, run_opts, "--eps", "eps", "mcl: convergence threshold");
    add_option_flag(run, run_opts, "--prune", "prune", "mcl: pruning threshold (0 disables)");
    run->add_flag_callback("--no-self-loops", [&] { run_opts["self-loops"] = "false"; },
                           "mcl: skip self-loop addition");
    // leiden
    add_option_flag(run, run_opts, "--objective", "objective", "leiden: modularity | cpm");
    add_option_flag(run, run_opts, "--gamma", "gamma", "leiden: CPM resolution");
    add_option_flag(run, run_opts, "--theta", "theta", "leiden: refinement randomness");
    // deep
    add_option_flag(run, run_opts, "--epochs", "epochs", "deep: training epochs");
    add_option_flag(run, run_opts, "--latent-dim", "latent-dim", "deep: latent width");
    add_option_flag(run, run_opts, "--hidden-dim", "hidden-dim", "deep: hidden width (0 = latent)");
    add_option_flag(run, run_opts, "--lr", "lr", "deep: learning rate");
    add_option_flag(run, run_opts, "--ppr-alpha", "ppr-alpha", "mvgrl: PPR restart probability");
    add_option_flag(run, run_opts, "--disc-iters", "disc-iters", "arga: discriminator steps");
    run->add_flag_callback("--pos-weight", [&] { run_opts["pos-weight"] = "true"; },
                           "deep: reweight positive reconstruction terms");
    run->add_flag_callback("--no-normalize-features",
                           [&] { run_opts["normalize-features"] = "false"; },
                           "deep: keep raw feature rows");

    // --- bench --------------------------------------------------------------
    auto* bench = app.add_subcommand("bench", "Run a benchmark plan");
    std::string plan_path;
    bench->add_option("--plan", plan_path, "Plan file (line-oriented key = value sections)")
        ->required();

    // --- export-embeddings ---------------------------------------------------
    auto* exp = app.add_subcommand("export-embeddings",
                                   "Train a deep model and write node embeddings as CSV");
    std::string exp_algo = "gae", exp_dataset, exp_out = "emb.csv";
    std::uint64_t exp_seed = 0;
    std::map<std::string, std::string> exp_opts;
    exp->add_option("--algo", exp_algo, "gae | arga | mvgrl");
    exp->add_option("--dataset", exp_dataset, "Dataset name or path")->required();
    exp->add_option("--seed", exp_seed, "RNG seed");
    exp->add_option("--out", exp_out, "Output CSV path");
    add_option_flag(exp, exp_opts, "--epochs", "epochs", "training epochs");
    add_option_flag(exp, exp_opts, "--latent-dim", "latent-dim", "latent width");
    add_option_flag(exp, exp_opts, "--lr", "lr", "learning rate");
    add_option_flag(exp, exp_opts, "--ppr-alpha", "ppr-alpha", "mvgrl diffusion alpha");

    // --- convert -------------------------------------------------------------
    auto* convert = app.add_subcommand(
        "convert", "Convert edge TSV + feature CSV + label CSV into a canonical GCT1 file");
    std::string cv_edges, cv_features, cv_labels, cv_out, cv_name = "converted";
    convert->add_option("--edges", cv_edges, "Edge list TSV (u v [w])")->required();
    convert->add_option("--features", cv_features, "Feature CSV, one row per node")->required();
    convert->add_option("--labels", cv_labels, "Label CSV, one label per node")->required();
    convert->add_option("--out", cv_out, "Output .gct path")->required();
    convert->add_option("--name", cv_name, "Dataset name recorded in the header comment");

    // --- datasets ------------------------------------------------------------
    auto* datasets = app.add_subcommand("datasets", "List dataset availability");
    std::string demo_path;
    std::uint64_t demo_seed = 0;
    datasets->add_option("--generate-demo", demo_path,
                         "Write a synthetic planted-partition dataset to this path");
    datasets->add_option("--demo-seed", demo_seed, "Seed for the demo generator");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return run_command(run_algo, run_dataset, run_seed, run_opts, run_out);
        }
        if (bench->parsed()) {
            BenchPlan plan = parse_plan(plan_path);
            validate_plan(plan);
            BenchResult result = run_bench(plan);
            std::filesystem::create_directories(plan.output);
            write_file(plan.output + "/bench.csv", result.csv);
            write_file(plan.output + "/bench.json", result.json);
            write_file(plan.output + "/bench.txt", result.text_table);
            std::cout << result.text_table;
            if (result.failures > 0) {
                std::cerr << result.failures << " cell(s) failed; see " << plan.output
                          << "/bench.json\n";
                return 3;
            }
            return 0;
        }
        if (exp->parsed()) {
            Dataset ds = resolve_dataset(exp_dataset);
            AlgoConfig cfg{exp_algo, exp_opts};
            if (exp_algo != "gae" && exp_algo != "arga" && exp_algo != "mvgrl") {
                throw ValidationError("export-embeddings: algo must be gae, arga or mvgrl");
            }
            DeepHyper hyper = [&] {
                DeepHyper h = exp_algo == "mvgrl" ? DeepHyper::mvgrl() : DeepHyper::gae();
                if (exp_opts.count("epochs")) h.epochs = std::stoi(exp_opts.at("epochs"));
                if (exp_opts.count("latent-dim"))
                    h.latent_dim = std::stoi(exp_opts.at("latent-dim"));
                if (exp_opts.count("lr")) h.lr = std::stod(exp_opts.at("lr"));
                if (exp_opts.count("ppr-alpha")) h.ppr_alpha = std::stod(exp_opts.at("ppr-alpha"));
                h.seed = exp_seed;
                return h;
            }();
            DenseMatrix z;
            if (exp_algo == "gae") {
                z = embed(gae_train(ds, hyper), ds);
            } else if (exp_algo == "arga") {
                z = embed(arga_train(ds, hyper), ds);
            } else {
                z = embed(mvgrl_train(ds, hyper), ds);
            }
            std::string csv = "node_id";
            for (std::size_t j = 0; j < z.cols(); ++j) csv += ",dim_" + std::to_string(j);
            csv += ",label\n";
            for (std::size_t i = 0; i < z.rows(); ++i) {
                csv += std::to_string(i);
                for (std::size_t j = 0; j < z.cols(); ++j) csv += ',' + format_double(z(i, j));
                csv += ',' + std::to_string(ds.labels[i]) + '\n';
            }
            write_file(exp_out, csv);
            std::cout << "wrote " << z.rows() << " embeddings (" << z.cols() << " dims) to "
                      << exp_out << "\n";
            return 0;
        }
        if (convert->parsed()) {
            Dataset ds = convert_split_files(cv_edges, cv_features, cv_labels, cv_name);
            save_canonical(ds, cv_out,
                           {"converted by graphclust convert",
                            "sources: " + cv_edges + " " + cv_features + " " + cv_labels,
                            "nodes: " + std::to_string(ds.graph.num_nodes()) +
                                ", edges: " + std::to_string(ds.graph.num_edges())});
            std::cout << "wrote " << cv_out << " (n=" << ds.graph.num_nodes()
                      << ", m=" << ds.graph.num_edges() << ", d=" << ds.features.cols()
                      << ", k=" << ds.num_classes << ")\n";
            return 0;
        }
        if (datasets->parsed()) {
            if (!demo_path.empty()) {
                Dataset demo = demo_dataset(demo_seed);
                save_canonical(demo, demo_path,
                               {"synthetic planted-partition demo (4 blocks of 30)"});
                std::cout << "wrote demo dataset to " << demo_path << "\n";
            }
            for (const std::string& line : dataset_status()) std::cout << line << "\n";
            return 0;
        }
    } catch (const ValidationError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        // dataset resolution problems are validation-class failures
        const std::string what = ex.what();
        if (what.find("dataset") != std::string::npos ||
            what.find("GRAPHCLUST_DATA") != std::string::npos) {
            return 1;
        }
        return 2;
    }
    return 0;
}
