// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The ffgp authors

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <ffgp/ffgp.hpp>

namespace {

// Exit codes: 0 success / equivalent, 1 not equivalent, 2 usage or validation error.
constexpr int exit_ok = 0;
constexpr int exit_mismatch = 1;
constexpr int exit_error = 2;

std::atomic<bool> interrupted { false };

extern "C" void on_sigint(int /*signal*/) { interrupted.store(true); }

auto gen_data(std::string const& config_path, std::string const& out_path, std::optional<std::uint64_t> seed,
    std::optional<int> k_box) -> int
{
    auto kv = config_path.empty() ? ffgp::KeyValues {} : ffgp::read_key_values(config_path);
    auto cfg = ffgp::data_config_from(std::move(kv));
    if (seed) {
        cfg.seed = *seed;
    }
    if (k_box) {
        if (*k_box < 1) {
            throw ffgp::ConfigError("k_box must be at least 1");
        }
        cfg.k_box = *k_box;
    }
    auto const data = ffgp::build_dataset(cfg.spec, cfg.k_box, cfg.seed);
    ffgp::save_dataset(data, out_path);
    std::cout << "wrote " << out_path << ": " << data.box_count() << " boxes, "
              << ffgp::format_double(data.mean_distance_count()) << " distances per box on average\n";
    return exit_ok;
}

struct RunOverrides {
    std::string dataset;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<int> max_generations;
    bool plant_exact { false };
};

auto run(std::string const& config_path, RunOverrides const& o, std::string const& out_dir) -> int
{
    auto kv = config_path.empty() ? ffgp::KeyValues {} : ffgp::read_key_values(config_path);
    auto cfg = ffgp::run_config_from(std::move(kv));
    if (!o.dataset.empty()) {
        cfg.dataset = o.dataset;
    }
    if (o.seed) {
        cfg.seed = *o.seed;
    }
    if (o.workers) {
        cfg.workers = *o.workers;
    }
    if (o.max_generations) {
        cfg.max_generations = *o.max_generations;
    }
    cfg.plant_exact = cfg.plant_exact || o.plant_exact;
    cfg.validate();
    if (cfg.dataset.empty()) {
        throw ffgp::ConfigError("no dataset given (config key 'dataset' or --dataset)");
    }
    // everything is validated before any output is created
    auto const data = ffgp::load_dataset(cfg.dataset);

    std::filesystem::create_directories(out_dir);
    auto const history_path = std::filesystem::path(out_dir) / "history.csv";
    auto const result_path = std::filesystem::path(out_dir) / "result.json";
    std::ofstream history(history_path);
    if (!history) {
        throw std::runtime_error("cannot write " + history_path.string());
    }
    history << ffgp::history_header << '\n';

    ffgp::RunHooks hooks;
    hooks.on_row = [&](ffgp::HistoryRow const& row) {
        history << ffgp::format_history_row(row) << '\n' << std::flush;
        std::cerr << "generation " << row.generation << "  best mse " << ffgp::format_double(row.best_mse_so_far)
                  << '\n';
    };
    hooks.stop_requested = [] { return interrupted.load(); };
    std::signal(SIGINT, on_sigint);

    auto const result = ffgp::run(cfg, data, hooks);

    std::ofstream out(result_path);
    out << ffgp::result_to_json(result, cfg).dump(2) << '\n';
    std::cout << "best tree: " << result.best_infix << '\n'
              << "best mse: " << ffgp::format_double(result.best_mse()) << " (generation " << result.generation_found
              << ", " << (result.converged ? "converged" : "not converged") << ")\n";
    return exit_ok;
}

auto check_equiv(std::string tree_text, std::string const& tree_file, ffgp::BoxSpec const& spec, int samples,
    double tolerance, std::string const& report_path) -> int
{
    if (!tree_file.empty()) {
        std::ifstream in(tree_file);
        if (!in) {
            throw std::runtime_error("cannot open " + tree_file);
        }
        std::getline(in, tree_text);
    }
    if (tree_text.empty()) {
        throw ffgp::ConfigError("no candidate tree given (--tree or --tree-file)");
    }
    auto const tree = ffgp::parse_infix(tree_text);
    auto const rep = ffgp::check_equivalence(tree, spec, samples, tolerance);
    auto const doc = ffgp::equivalence_to_json(rep);
    if (report_path.empty()) {
        auto summary = doc;
        summary.erase("samples");
        std::cout << summary.dump(2) << '\n';
    } else {
        std::ofstream out(report_path);
        out << doc.dump(1) << '\n';
        std::cout << (rep.verdict ? "equivalent" : "not equivalent") << " (max relative error "
                  << ffgp::format_double(rep.max_rel_error) << ")\n";
    }
    return rep.verdict ? exit_ok : exit_mismatch;
}

} // namespace

auto main(int argc, char** argv) -> int
{
    CLI::App app { "Pair-potential discovery by parallel-tempering genetic programming" };
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> k_box;
    auto* gen = app.add_subcommand("gen-data", "Build a manufactured Lennard-Jones training set");
    gen->add_option("--config", config_path, "Key/value file with box spec, k_box and seed")->check(CLI::ExistingFile);
    gen->add_option("--out,-o", out_path, "Dataset JSON to write")->required();
    gen->add_option("--seed", seed, "Override the dataset seed");
    gen->add_option("--k-box", k_box, "Override the number of boxes");

    RunOverrides overrides;
    std::string out_dir;
    auto* run_cmd = app.add_subcommand("run", "Evolve pair potentials against a dataset");
    run_cmd->add_option("--config", config_path, "Key/value run configuration")->check(CLI::ExistingFile);
    run_cmd->add_option("--dataset", overrides.dataset, "Dataset JSON (overrides the config key)");
    run_cmd->add_option("--out-dir", out_dir, "Directory for history.csv and result.json")->required();
    run_cmd->add_option("--seed", overrides.seed, "Override the master seed");
    run_cmd->add_option("--workers", overrides.workers, "Worker threads (0: all cores)");
    run_cmd->add_option("--max-generations", overrides.max_generations, "Override the generation cap");
    run_cmd->add_flag("--plant-exact", overrides.plant_exact, "Seed a replica (config key plant_replica, default coldest) with the exact LJ tree");

    int m = 5;
    int k = 4;
    int p = 20;
    auto* count = app.add_subcommand("count-space", "Count maximal trees of a given depth");
    count->add_option("--m", m, "Number of binary operators")->capture_default_str();
    count->add_option("--k", k, "Tree depth")->capture_default_str();
    count->add_option("--p", p, "Constant bound P; leaves take 2P+2 values")->capture_default_str();

    std::string tree_text;
    std::string tree_file;
    std::string report_path;
    ffgp::BoxSpec spec;
    int samples = 1001;
    double tolerance = 1e-9;
    auto* equiv = app.add_subcommand("check-equiv", "Compare a candidate tree with Lennard-Jones on a dense grid");
    auto* tree_opt = equiv->add_option("--tree", tree_text, "Candidate in infix form");
    equiv->add_option("--tree-file", tree_file, "File whose first line is the candidate")->excludes(tree_opt);
    equiv->add_option("--samples", samples, "Grid points on [r_lo, r_hi]")->capture_default_str();
    equiv->add_option("--tol", tolerance, "Relative tolerance")->capture_default_str();
    equiv->add_option("--r-lo", spec.r_lo)->capture_default_str();
    equiv->add_option("--r-hi", spec.r_hi)->capture_default_str();
    equiv->add_option("--epsilon", spec.epsilon)->capture_default_str();
    equiv->add_option("--sigma", spec.sigma)->capture_default_str();
    equiv->add_option("--report", report_path, "Write the full JSON report here");

    try {
        app.parse(argc, argv);
    } catch (CLI::CallForHelp const& e) {
        return app.exit(e);
    } catch (CLI::CallForAllHelp const& e) {
        return app.exit(e);
    } catch (CLI::ParseError const& e) {
        app.exit(e);
        return exit_error;
    }

    try {
        if (gen->parsed()) {
            return gen_data(config_path, out_path, seed, k_box);
        }
        if (run_cmd->parsed()) {
            return run(config_path, overrides, out_dir);
        }
        if (count->parsed()) {
            std::cout << ffgp::count_search_space(m, k, p) << '\n';
            return exit_ok;
        }
        if (equiv->parsed()) {
            return check_equiv(tree_text, tree_file, spec, samples, tolerance, report_path);
        }
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_error;
    }
    return exit_error;
}
