#include "dicke/cli.hpp"

#include "dicke/eigen_solver.hpp"
#include "dicke/observables.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace dicke {

std::string_view to_string(Command c) {
    switch (c) {
        case Command::Solve: return "solve";
        case Command::Compare: return "compare";
        case Command::Converge: return "converge";
        case Command::Scaling: return "scaling";
    }
    return "?";
}

Command command_from_string(std::string_view s) {
    if (s == "solve") return Command::Solve;
    if (s == "compare") return Command::Compare;
    if (s == "converge") return Command::Converge;
    if (s == "scaling") return Command::Scaling;
    throw ConfigError("unknown command '" + std::string(s) + "'");
}

namespace {

std::string key_error(std::string_view key, const std::string& msg) {
    return "key '" + std::string(key) + "': " + msg;
}

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : text) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != ' ' && c != '\t') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double to_real(std::string_view key, const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key_error(key, "'" + s + "' is not a number"));
    }
}

long long to_integer(std::string_view key, const std::string& s) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key_error(key, "'" + s + "' is not an integer"));
    }
}

int to_positive_int(std::string_view key, const std::string& s) {
    const long long v = to_integer(key, s);
    if (v < 1 || v > std::numeric_limits<int>::max()) throw ConfigError(key_error(key, "must be a positive integer"));
    return static_cast<int>(v);
}

bool to_bool(std::string_view key, const std::string& s) {
    if (s == "1" || s == "true" || s == "yes") return true;
    if (s == "0" || s == "false" || s == "no") return false;
    throw ConfigError(key_error(key, "expected true or false"));
}

Basis basis_from_string(std::string_view key, std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    if (s == "DCS") return Basis::DCS;
    if (s == "DFS") return Basis::DFS;
    throw ConfigError(key_error(key, "unknown basis '" + s + "'"));
}

std::string exact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F&& fmt) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += fmt(xs[i]);
    }
    return out;
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "n_atoms", "omega",     "delta",     "lambda",    "alpha",  "lambdas",      "N",
        "cells",   "n_tr",      "reference_n_tr",         "D",      "observable",   "c_inf",
        "basis",   "schedule",  "threshold", "parity",    "seed",   "dense_oracle", "workers",
        "output",  "dump_matrix"};
    return keys;
}

// Runs body(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
    const auto threads = static_cast<std::size_t>(std::max(1, workers));
    if (threads == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(threads, n); ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) body(i);
        });
}

SolverOptions solver_options(const RunConfig& c) {
    SolverOptions s;
    s.seed = c.seed;
    s.force_dense = c.dense_oracle;
    return s;
}

ConvergeOptions converge_options(const RunConfig& c, ConvergeOptions o = {}) {
    o.threshold = c.threshold;
    o.schedule = c.schedule;
    o.basis = c.basis;
    o.parity = c.parity;
    o.solver.seed = c.seed;
    o.solver.force_dense = c.dense_oracle;
    return o;
}

GroundState solve_at(const RunConfig& c, Basis basis, const ModelParams& p, int n_tr) {
    const BlockHamiltonian full = assemble(basis, p, n_tr);
    const SolverOptions s = solver_options(c);
    return c.parity == Parity::Full ? ground_state(full, s) : ground_state(project_parity(full, c.parity), s);
}

ModelParams point(const RunConfig& c, int n_atoms, double lambda) {
    ModelParams p = c.params;
    p.n_atoms = n_atoms;
    p.lambda = lambda;
    p.validate();
    return p;
}

std::vector<int> atoms_list(const RunConfig& c) {
    return c.n_list.empty() ? std::vector<int>{c.params.n_atoms} : c.n_list;
}

std::string d_label(double d) {
    std::string s = format_real(d);
    std::replace(s.begin(), s.end(), '.', 'p');
    return s;
}

}  // namespace

std::vector<int> parse_int_list(std::string_view key, std::string_view text) {
    std::vector<int> out;
    const std::string t(text);
    if (const auto dots = t.find(".."); dots != std::string::npos) {
        const int lo = to_positive_int(key, t.substr(0, dots));
        const int hi = to_positive_int(key, t.substr(dots + 2));
        const auto pow2 = [](int v) { return (v & (v - 1)) == 0; };
        if (!pow2(lo) || !pow2(hi) || lo > hi)
            throw ConfigError(key_error(key, "range '" + t + "' must run between powers of two, low to high"));
        for (long long v = lo; v <= hi; v *= 2) out.push_back(static_cast<int>(v));
        return out;
    }
    for (const auto& item : split(t, ',')) out.push_back(to_positive_int(key, item));
    return out;
}

std::vector<double> parse_real_list(std::string_view key, std::string_view text) {
    std::vector<double> out;
    const std::string t(text);
    if (const auto dots = t.find(".."); dots != std::string::npos) {
        const auto colon = t.find(':', dots);
        if (colon == std::string::npos) throw ConfigError(key_error(key, "range needs a point count, lo..hi:count"));
        const double lo = to_real(key, t.substr(0, dots));
        const double hi = to_real(key, t.substr(dots + 2, colon - dots - 2));
        const int count = to_positive_int(key, t.substr(colon + 1));
        if (count == 1) return {lo};
        for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo) * i / (count - 1));
        return out;
    }
    for (const auto& item : split(t, ',')) out.push_back(to_real(key, item));
    return out;
}

RunConfig config_from_key_values(Command command, const KeyValues& kv) {
    for (const auto& [key, value] : kv)
        if (!known_keys().count(key)) throw ConfigError(key_error(key, "unknown key"));

    RunConfig c;
    c.command = command;
    const auto has = [&](const char* k) { return kv.count(k) > 0; };
    const auto get = [&](const char* k) -> const std::string& { return kv.at(k); };

    c.params.omega = has("omega") ? to_real("omega", get("omega")) : 1.0;
    c.params.delta = has("delta") ? to_real("delta", get("delta")) : 1.0;
    if (!(c.params.omega > 0.0)) throw ConfigError(key_error("omega", "must be positive"));
    if (!(c.params.delta > 0.0)) throw ConfigError(key_error("delta", "must be positive"));
    if (has("n_atoms")) c.params.n_atoms = to_positive_int("n_atoms", get("n_atoms"));
    if (has("lambda") && has("alpha")) throw ConfigError("give at most one of 'lambda' or 'alpha'");
    if (has("lambda")) {
        c.params.lambda = to_real("lambda", get("lambda"));
        if (c.params.lambda < 0.0) throw ConfigError(key_error("lambda", "must be non-negative"));
    }
    if (has("alpha")) {
        c.alpha_given = true;
        c.alpha = to_real("alpha", get("alpha"));
        if (c.alpha < 0.0) throw ConfigError(key_error("alpha", "must be non-negative"));
        c.params.lambda = 0.5 * std::sqrt(c.alpha * c.params.delta * c.params.omega);
    }

    if (has("lambdas")) c.lambdas = parse_real_list("lambdas", get("lambdas"));
    if (has("N")) c.n_list = parse_int_list("N", get("N"));
    if (has("n_tr")) c.n_tr_list = parse_int_list("n_tr", get("n_tr"));
    if (has("reference_n_tr")) c.reference_n_tr = to_positive_int("reference_n_tr", get("reference_n_tr"));
    if (has("D")) c.d_list = parse_real_list("D", get("D"));
    if (has("cells"))
        for (const auto& item : split(get("cells"), ',')) {
            const auto colon = item.find(':');
            if (colon == std::string::npos) throw ConfigError(key_error("cells", "expected BASIS:N_tr, got '" + item + "'"));
            c.cells.emplace_back(basis_from_string("cells", item.substr(0, colon)),
                                 to_positive_int("cells", item.substr(colon + 1)));
        }
    if (has("observable")) {
        c.observables.clear();
        for (const auto& item : split(get("observable"), ',')) try {
                c.observables.push_back(scaling_observable_from_string(item));
            } catch (const std::exception& e) {
                throw ConfigError(key_error("observable", e.what()));
            }
    }
    if (has("c_inf")) {
        c.c_inf_mode = CInfMode::Supplied;
        c.c_inf = to_real("c_inf", get("c_inf"));
    }
    if (has("basis")) c.basis = basis_from_string("basis", get("basis"));
    if (has("schedule")) c.schedule = parse_int_list("schedule", get("schedule"));
    if (has("threshold")) {
        c.threshold = to_real("threshold", get("threshold"));
        if (!(c.threshold > 0.0)) throw ConfigError(key_error("threshold", "must be positive"));
    }
    if (has("parity")) try {
            c.parity = parity_from_string(get("parity"));
        } catch (const std::exception& e) {
            throw ConfigError(key_error("parity", e.what()));
        }
    if (has("seed")) {
        const long long s = to_integer("seed", get("seed"));
        if (s < 0) throw ConfigError(key_error("seed", "must be non-negative"));
        c.seed = static_cast<std::uint64_t>(s);
    }
    if (has("dense_oracle")) c.dense_oracle = to_bool("dense_oracle", get("dense_oracle"));
    if (has("workers")) c.workers = to_positive_int("workers", get("workers"));
    if (has("output")) c.output_dir = get("output");
    if (has("dump_matrix")) c.dump_matrix = get("dump_matrix");

    switch (command) {
        case Command::Solve:
            if (!has("n_atoms")) throw ConfigError(key_error("n_atoms", "required by solve"));
            if (!has("lambda") && !has("alpha")) throw ConfigError("solve needs 'lambda' or 'alpha'");
            break;
        case Command::Compare:
        case Command::Converge:
            if (!has("n_atoms") && !has("N")) throw ConfigError(key_error("n_atoms", "required (or give 'N')"));
            if (c.lambdas.empty()) {
                if (!has("lambda") && !has("alpha")) throw ConfigError(key_error("lambdas", "required"));
                c.lambdas = {c.params.lambda};
            }
            for (const double l : c.lambdas)
                if (l < 0.0) throw ConfigError(key_error("lambdas", "values must be non-negative"));
            if (command == Command::Compare && c.cells.empty())
                c.cells = {{Basis::DCS, 6}, {Basis::DFS, 6}, {Basis::DFS, 45}, {Basis::DFS, 100}};
            if (command == Command::Converge && c.n_tr_list.empty()) c.n_tr_list = {2, 4, 6, 8, 12, 16, 24, 32};
            break;
        case Command::Scaling:
            if (c.d_list.empty()) c.d_list = {1.0};
            for (const double d : c.d_list)
                if (!(d > 0.0)) throw ConfigError(key_error("D", "values must be positive"));
            if (c.n_list.empty()) c.n_list = power_of_two_grid(4, 10);
            if (c.n_list.size() < 4) throw ConfigError(key_error("N", "scaling needs at least four sizes"));
            if (!has("threshold")) c.threshold = ScalingOptions{}.converge.threshold;
            if (!has("schedule")) c.schedule = ScalingOptions{}.converge.schedule;
            break;
    }
    for (std::size_t i = 1; i < c.schedule.size(); ++i)
        if (c.schedule[i] <= c.schedule[i - 1]) throw ConfigError(key_error("schedule", "must be strictly increasing"));
    return c;
}

namespace {

std::string serialize_impl(const RunConfig& c, bool with_neutral) {
    std::ostringstream out;
    out << "# dicke " << to_string(c.command) << '\n';
    out << "n_atoms = " << c.params.n_atoms << '\n';
    out << "omega = " << exact(c.params.omega) << '\n';
    out << "delta = " << exact(c.params.delta) << '\n';
    if (c.alpha_given)
        out << "alpha = " << exact(c.alpha) << '\n';
    else
        out << "lambda = " << exact(c.params.lambda) << '\n';
    if (!c.lambdas.empty()) out << "lambdas = " << join(c.lambdas, exact) << '\n';
    const auto itoa = [](int v) { return std::to_string(v); };
    if (!c.n_list.empty()) out << "N = " << join(c.n_list, itoa) << '\n';
    if (!c.cells.empty())
        out << "cells = "
            << join(c.cells, [](const std::pair<Basis, int>& p) {
                   return std::string(to_string(p.first)) + ":" + std::to_string(p.second);
               })
            << '\n';
    if (!c.n_tr_list.empty()) out << "n_tr = " << join(c.n_tr_list, itoa) << '\n';
    out << "reference_n_tr = " << c.reference_n_tr << '\n';
    if (!c.d_list.empty()) out << "D = " << join(c.d_list, exact) << '\n';
    out << "observable = "
        << join(c.observables, [](ScalingObservable o) { return std::string(to_string(o)); }) << '\n';
    if (c.c_inf_mode == CInfMode::Supplied) out << "c_inf = " << exact(c.c_inf) << '\n';
    out << "basis = " << to_string(c.basis) << '\n';
    out << "schedule = " << join(c.schedule, itoa) << '\n';
    out << "threshold = " << exact(c.threshold) << '\n';
    out << "parity = " << to_string(c.parity) << '\n';
    out << "seed = " << c.seed << '\n';
    out << "dense_oracle = " << (c.dense_oracle ? "true" : "false") << '\n';
    if (with_neutral) {
        out << "workers = " << c.workers << '\n';
        if (!c.output_dir.empty()) out << "output = " << c.output_dir << '\n';
        if (!c.dump_matrix.empty()) out << "dump_matrix = " << c.dump_matrix << '\n';
    }
    return out.str();
}

}  // namespace

std::string serialize(const RunConfig& config) { return serialize_impl(config, true); }

std::string config_digest(const RunConfig& config) {
    const std::string text = serialize_impl(config, false) + "schema = " + std::to_string(kCsvSchemaVersion);
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

CommandOutput run_solve(const RunConfig& c) {
    const ModelParams p = point(c, c.params.n_atoms, c.params.lambda);
    const ConvergedResult r = converge(p, converge_options(c));
    CommandOutput out;
    const std::string csv = observables_csv_header() + '\n' + observables_csv_row(p, r) + '\n';
    out.text = csv;
    out.files["solve.csv"] = csv;
    std::string hist = "Ntr,E0,B_N,Jy2,C_N,residual\n";
    for (const auto& h : r.history)
        hist += std::to_string(h.n_tr) + ',' + format_real(h.values.energy) + ',' + format_real(h.values.berry_deviation) +
                ',' + format_real(h.values.jy2) + ',' + format_real(h.values.concurrence) + ',' +
                format_real(h.residual) + '\n';
    out.files["history.csv"] = hist;
    return out;
}

CommandOutput run_compare(const RunConfig& c) {
    struct Cell {
        int n_atoms;
        double lambda;
        Basis basis;
        int n_tr;
        std::string row;
        bool ok{true};
    };
    std::vector<Cell> cells;
    for (const int n : atoms_list(c))
        for (const double l : c.lambdas)
            for (const auto& [basis, n_tr] : c.cells) cells.push_back({n, l, basis, n_tr, {}});

    parallel_for(cells.size(), c.workers, [&](std::size_t i) {
        Cell& cell = cells[i];
        std::string head = std::to_string(cell.n_atoms) + ',' + format_real(cell.lambda) + ',' +
                           std::string(to_string(cell.basis)) + ',' + std::to_string(cell.n_tr) + ',';
        try {
            const ModelParams p = point(c, cell.n_atoms, cell.lambda);
            const GroundState gs = solve_at(c, cell.basis, p, cell.n_tr);
            cell.row = head + format_real(gs.energy) + ',' + format_real(gs.energy / (p.j() * p.delta)) + ",ok";
        } catch (const std::exception& e) {
            std::string msg = e.what();
            std::replace(msg.begin(), msg.end(), ',', ';');
            cell.row = head + ",,failed: " + msg;
            cell.ok = false;
        }
    });

    CommandOutput out;
    std::string csv = "N,lambda,basis,Ntr,E0,E0_scaled,status\n";
    for (const auto& cell : cells) {
        csv += cell.row + '\n';
        out.all_ok = out.all_ok && cell.ok;
    }
    out.text = csv;
    out.files["compare.csv"] = csv;
    return out;
}

CommandOutput run_converge(const RunConfig& c) {
    struct Point {
        int n_atoms;
        double lambda;
        double reference{0.0};
        std::vector<double> energy;
        std::vector<double> deviation;
        std::string error;
    };
    std::vector<Point> points;
    for (const int n : atoms_list(c))
        for (const double l : c.lambdas) points.push_back({n, l, 0.0, {}, {}, {}});

    parallel_for(points.size(), c.workers, [&](std::size_t i) {
        Point& pt = points[i];
        try {
            const ModelParams p = point(c, pt.n_atoms, pt.lambda);
            pt.reference = solve_at(c, c.basis, p, c.reference_n_tr).energy;
            for (const int n_tr : c.n_tr_list) {
                const double e = solve_at(c, c.basis, p, n_tr).energy;
                pt.energy.push_back(e);
                pt.deviation.push_back(std::abs(e - pt.reference) / std::abs(pt.reference));
            }
        } catch (const std::exception& e) {
            pt.error = e.what();
            std::replace(pt.error.begin(), pt.error.end(), ',', ';');
        }
    });

    CommandOutput out;
    std::string table = "N,lambda,Ntr,E0,E0_reference,rel_deviation,status\n";
    std::string required = "N,lambda,Ntr_required\n";
    for (const auto& pt : points) {
        const std::string head = std::to_string(pt.n_atoms) + ',' + format_real(pt.lambda) + ',';
        if (!pt.error.empty()) {
            out.all_ok = false;
            table += head + ",,,,failed: " + pt.error + '\n';
            required += head + '\n';
            continue;
        }
        for (std::size_t k = 0; k < c.n_tr_list.size(); ++k)
            table += head + std::to_string(c.n_tr_list[k]) + ',' + format_real(pt.energy[k]) + ',' +
                     format_real(pt.reference) + ',' + format_real(pt.deviation[k]) + ",ok\n";
        // Smallest listed N_tr from which every larger listed N_tr stays below the threshold.
        std::optional<int> need;
        for (std::size_t k = c.n_tr_list.size(); k-- > 0;) {
            if (pt.deviation[k] >= c.threshold) break;
            need = c.n_tr_list[k];
        }
        required += head + (need ? std::to_string(*need) : std::string()) + '\n';
    }

    std::string peaks = "N,Ntr,lambda_peak,rel_deviation_peak\n";
    for (const int n : atoms_list(c))
        for (std::size_t k = 0; k < c.n_tr_list.size(); ++k) {
            const Point* best = nullptr;
            for (const auto& pt : points)
                if (pt.n_atoms == n && pt.error.empty() && (!best || pt.deviation[k] > best->deviation[k])) best = &pt;
            if (best)
                peaks += std::to_string(n) + ',' + std::to_string(c.n_tr_list[k]) + ',' + format_real(best->lambda) +
                         ',' + format_real(best->deviation[k]) + '\n';
        }

    out.files["converge.csv"] = table;
    out.files["required_ntr.csv"] = required;
    out.files["peaks.csv"] = peaks;
    out.text = table + '\n' + peaks + '\n' + required;
    return out;
}

CommandOutput run_scaling(const RunConfig& c) {
    ScalingOptions opts;
    opts.converge = converge_options(c, opts.converge);
    opts.workers = c.workers;
    opts.omega = c.params.omega;

    CommandOutput out;
    std::string summary = "observable,D,exponent,uncertainty,c_inf,fit_rms\n";
    for (const double d : c.d_list) {
        const auto sweep = critical_sweep(d, c.n_list, opts);
        for (const ScalingObservable obs : c.observables) {
            ScalingSeries s;
            switch (obs) {
                case ScalingObservable::Energy: s = energy_deviation_series(d, sweep); break;
                case ScalingObservable::Berry: s = berry_deviation_series(d, sweep); break;
                case ScalingObservable::Concurrence:
                    s = concurrence_deviation_series(d, sweep, c.c_inf_mode, c.c_inf);
                    break;
            }
            const std::string tag = std::string(to_string(obs)) + "_D" + d_label(d);
            out.files["series_" + tag + ".csv"] = series_csv(s);
            out.files["slopes_" + tag + ".csv"] = slopes_csv(s);
            const double c_inf = s.fit ? s.fit->c_inf : (obs == ScalingObservable::Concurrence ? c.c_inf : NAN);
            summary += std::string(to_string(obs)) + ',' + format_real(d) + ',' + format_real(s.exponent.exponent) +
                       ',' + format_real(s.exponent.uncertainty) + ',' +
                       (std::isnan(c_inf) ? std::string() : format_real(c_inf)) + ',' +
                       (s.fit ? format_real(s.fit->rms_residual) : std::string()) + '\n';
        }
    }
    out.files["summary.csv"] = summary;
    out.text = summary;
    return out;
}

CommandOutput run_command(const RunConfig& config) {
    switch (config.command) {
        case Command::Solve: return run_solve(config);
        case Command::Compare: return run_compare(config);
        case Command::Converge: return run_converge(config);
        case Command::Scaling: return run_scaling(config);
    }
    throw ConfigError("unknown command");
}

std::string_view version_string() {
#ifdef DICKE_VERSION
    return DICKE_VERSION;
#else
    return "unknown";
#endif
}

}  // namespace dicke
