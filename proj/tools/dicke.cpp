// dicke: command-line front end.
//
//   dicke solve    --n-atoms 32 --lambda 1
//   dicke compare  --n-atoms 32 --lambdas 0..2:21 --cells DCS:6,DFS:100
//   dicke converge --N 16 --lambdas 0..1:41 --n-tr 4,6,8
//   dicke scaling  --observable energy --D 0.1,1,10 --N 16..1024
//
// Exit codes: 0 success, 1 partial grid failure, 2 config error,
// 3 solver failure, 4 resource cap.

#include "dicke/cli.hpp"
#include "dicke/eigen_solver.hpp"
#include "dicke/observables.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace {

enum Exit { kOk = 0, kPartial = 1, kConfig = 2, kSolver = 3, kResource = 4 };

struct Flags {
    std::string config_path;
    std::map<std::string, std::string> values;  // key -> text, only flags actually given
    bool dense_oracle{false};
    bool no_cache{false};
};

void add_value(CLI::App* app, Flags& f, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        flag, [&f, key](const std::string& v) { f.values[key] = v; }, help);
}

void add_common(CLI::App* app, Flags& f) {
    app->add_option("--config", f.config_path, "key = value file; flags override it");
    add_value(app, f, "--omega", "omega", "boson frequency (default 1)");
    add_value(app, f, "--delta", "delta", "atomic splitting (default 1)");
    add_value(app, f, "--threshold", "threshold", "relative convergence threshold");
    add_value(app, f, "--schedule", "schedule", "increasing N_tr list");
    add_value(app, f, "--parity", "parity", "even | odd | full");
    add_value(app, f, "--basis", "basis", "DCS | DFS");
    add_value(app, f, "--seed", "seed", "Lanczos start-vector seed");
    add_value(app, f, "--workers", "workers", "worker threads (default: hardware)");
    add_value(app, f, "--output", "output", "also copy CSV files to this directory");
    app->add_flag("--dense-oracle", f.dense_oracle, "force dense diagonalization");
    app->add_flag("--no-cache", f.no_cache, "recompute even if the result store has this config");
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw dicke::ConfigError("cannot open config file '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run(dicke::Command command, const Flags& f) {
    dicke::KeyValues kv;
    if (!f.config_path.empty()) {
        try {
            kv = dicke::parse_key_values(read_text(f.config_path));
        } catch (const dicke::ConfigError& e) {
            throw dicke::ConfigError(f.config_path + ": " + e.what());
        }
        kv.erase("workers");  // parallelism is a property of the invocation
    }
    for (const auto& [k, v] : f.values) kv[k] = v;
    if (f.dense_oracle) kv["dense_oracle"] = "true";
    if (!kv.count("workers")) kv["workers"] = std::to_string(std::max(1u, std::thread::hardware_concurrency()));

    const dicke::RunConfig config = dicke::config_from_key_values(command, kv);
    dicke::ResultStore store(dicke::ResultStore::default_root());
    const std::string digest = dicke::config_digest(config);

    const bool cacheable = config.dump_matrix.empty() && !f.no_cache;
    if (cacheable)
        if (const auto hit = store.lookup(digest)) {
            std::cerr << "cache hit " << digest << " (" << hit->timestamp << ")\n";
            std::cout << store.stored_text(*hit);
            return kOk;
        }

    const auto t0 = std::chrono::steady_clock::now();
    const dicke::CommandOutput out = dicke::run_command(config);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << out.text;

    if (!config.dump_matrix.empty() && command == dicke::Command::Solve) {
        const dicke::ConvergedResult r = dicke::converge(config.params, [&] {
            dicke::ConvergeOptions o;
            o.threshold = config.threshold;
            o.schedule = config.schedule;
            o.basis = config.basis;
            o.parity = config.parity;
            return o;
        }());
        const auto full = dicke::assemble(config.basis, config.params, r.n_tr_used);
        std::ofstream dump(config.dump_matrix);
        if (config.parity == dicke::Parity::Full)
            full.dump_coordinates(dump);
        else
            dicke::project_parity(full, config.parity).dump_coordinates(dump);
        if (!dump) throw std::runtime_error("cannot write " + config.dump_matrix);
    }

    if (!config.output_dir.empty()) {
        std::filesystem::create_directories(config.output_dir);
        for (const auto& [name, contents] : out.files) {
            std::ofstream file(std::filesystem::path(config.output_dir) / name);
            file << contents;
        }
    }
    if (out.all_ok) {
        const auto entry = store.commit(config, out, wall);
        std::cerr << "stored " << entry.dir.string() << " in " << wall << " s\n";
        return kOk;
    }
    std::cerr << "some grid cells failed; result not stored\n";
    return kPartial;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ground states of the Dicke model in a displaced coherent-state basis"};
    app.require_subcommand(1);

    Flags solve_f, compare_f, converge_f, scaling_f;

    auto* solve = app.add_subcommand("solve", "converged ground state at one parameter point");
    add_common(solve, solve_f);
    add_value(solve, solve_f, "--n-atoms", "n_atoms", "number of atoms N");
    add_value(solve, solve_f, "--lambda", "lambda", "coupling");
    add_value(solve, solve_f, "--alpha", "alpha", "4 lambda^2 / (omega Delta), instead of --lambda");
    solve->add_option_function<std::string>(
        "--dump-matrix", [&](const std::string& v) { solve_f.values["dump_matrix"] = v; },
        "write 'row col value' triplets of the final matrix");

    auto* compare = app.add_subcommand("compare", "DCS and DFS energies over a coupling grid");
    add_common(compare, compare_f);
    add_value(compare, compare_f, "--n-atoms", "n_atoms", "number of atoms N");
    add_value(compare, compare_f, "--N", "N", "list of N (overrides --n-atoms)");
    add_value(compare, compare_f, "--lambdas", "lambdas", "coupling list or lo..hi:count");
    add_value(compare, compare_f, "--cells", "cells", "BASIS:N_tr list, e.g. DCS:6,DFS:100");

    auto* conv = app.add_subcommand("converge", "truncation error versus coupling");
    add_common(conv, converge_f);
    add_value(conv, converge_f, "--n-atoms", "n_atoms", "number of atoms N");
    add_value(conv, converge_f, "--N", "N", "list of N (overrides --n-atoms)");
    add_value(conv, converge_f, "--lambdas", "lambdas", "coupling list or lo..hi:count");
    add_value(conv, converge_f, "--n-tr", "n_tr", "truncations to compare");
    add_value(conv, converge_f, "--reference-n-tr", "reference_n_tr", "truncation of the reference energy");

    auto* scaling = app.add_subcommand("scaling", "finite-size exponents at the critical coupling");
    add_common(scaling, scaling_f);
    add_value(scaling, scaling_f, "--observable", "observable", "energy | berry | concurrence (comma list)");
    add_value(scaling, scaling_f, "--D", "D", "Delta / omega list");
    add_value(scaling, scaling_f, "--N", "N", "N list or lo..hi over powers of two");
    add_value(scaling, scaling_f, "--c-inf", "c_inf", "supplied concurrence limit (default: joint fit)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (solve->parsed()) return run(dicke::Command::Solve, solve_f);
        if (compare->parsed()) return run(dicke::Command::Compare, compare_f);
        if (conv->parsed()) return run(dicke::Command::Converge, converge_f);
        return run(dicke::Command::Scaling, scaling_f);
    } catch (const dicke::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const dicke::DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const dicke::ResourceError& e) {
        std::cerr << "resource cap: " << e.what() << '\n';
        return kResource;
    } catch (const dicke::ScheduleExhausted& e) {
        std::cerr << "solver failure: " << e.what() << " (last N_tr " << (e.history.empty() ? 0 : e.history.back().n_tr)
                  << ")\n";
        return kSolver;
    } catch (const dicke::ConvergenceError& e) {
        std::cerr << "solver failure: " << e.what() << " (residual " << e.best_residual << ")\n";
        return kSolver;
    } catch (const dicke::FitError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kSolver;
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kSolver;
    }
}
