// Acceptance gate: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset (e.g. `acceptance 1 2 3`).

#include "dicke/cli.hpp"
#include "dicke/dcs_basis.hpp"
#include "dicke/scaling.hpp"
#include "../oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace dicke;

namespace {

struct Outcome {
    bool pass{true};
    std::string detail;

    void fail(const std::string& why) {
        pass = false;
        if (!detail.empty()) detail += "; ";
        detail += why;
    }
    void note(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GroundState solve(Basis basis, const ModelParams& p, int n_tr, double tol = 1e-12) {
    SolverOptions o;
    o.tol = tol;
    return ground_state(project_parity(assemble(basis, p, n_tr), Parity::Even), o);
}

// Every state solved along the way feeds the sum-rule and variational checks.
struct Ledger {
    double worst_sum_rule{0.0};
    std::string worst_sum_rule_at;
    int states{0};
    double worst_variational{0.0};
    int histories{0};

    void state(const GroundState& gs, const std::string& where) {
        const SpinSquares sq = spin_squares_by_norm(gs);
        const double j = 0.5 * gs.params.n_atoms;
        const double err = std::abs(sq.jx2 + sq.jy2 + sq.jz2 - j * (j + 1.0));
        ++states;
        if (err > worst_sum_rule) {
            worst_sum_rule = err;
            worst_sum_rule_at = where;
        }
    }
    // Rises beyond round-off, relative to |E0|.
    void history(const std::vector<HistoryEntry>& h) {
        ++histories;
        for (std::size_t i = 1; i < h.size(); ++i) {
            const double rise = (h[i].values.energy - h[i - 1].values.energy) / std::abs(h[i].values.energy);
            worst_variational = std::max(worst_variational, rise);
        }
    }
};

Ledger ledger;

const std::vector<int>& scaling_grid() {
    static const std::vector<int> n = power_of_two_grid(4, 10);
    return n;
}

std::map<double, std::vector<SweepPoint>> sweeps;

const std::vector<SweepPoint>& sweep(double d) {
    auto it = sweeps.find(d);
    if (it != sweeps.end()) return it->second;
    ScalingOptions o;
    o.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<SweepPoint> s = critical_sweep(d, scaling_grid(), o);
    std::printf("  [sweep D=%g, N=16..1024: %.1f s, N_tr used", d, seconds_since(t0));
    for (const auto& pt : s) {
        std::printf(" %d", pt.result.n_tr_used);
        ledger.state(pt.result.state, "sweep D=" + format_real(d) + " N=" + std::to_string(pt.params.n_atoms));
        ledger.history(pt.result.history);
    }
    std::printf("]\n");
    std::fflush(stdout);
    return sweeps.emplace(d, std::move(s)).first->second;
}

// 1. DCS agrees with a dense bare-Fock diagonalization.
Outcome oracle_equivalence() {
    Outcome out;
    double worst = 0.0;
    for (const int n : {1, 2, 3, 4})
        for (const double lambda : {0.1, 0.3, 0.5, 0.8, 1.0}) {
            const ModelParams p{n, 1.0, 1.0, lambda};
            ConvergeOptions o;
            o.threshold = 1e-10;
            o.solver.tol = 1e-13;
            const ConvergedResult r = converge(p, o);
            ledger.state(r.state, "oracle N=" + std::to_string(n));
            ledger.history(r.history);
            const double ref = oracle::dense_ground_energy(n, 1.0, 1.0, lambda, 400);
            const double err = std::abs(r.values.energy - ref);
            worst = std::max(worst, err);
            if (!(err < 1e-8))
                out.fail("N=" + std::to_string(n) + " lambda=" + format_real(lambda) + " |dE|=" + fmt("%.3g", err));
        }
    out.note("max |dE| = " + fmt("%.3g", worst));
    return out;
}

// 2. Decoupled limit.
Outcome decoupled_limit() {
    Outcome out;
    double worst = 0.0;
    for (const int n : {2, 8, 32, 128}) {
        const ModelParams p{n, 1.0, 1.0, 0.0};
        const ConvergedResult r = converge(p);
        ledger.state(r.state, "decoupled N=" + std::to_string(n));
        ledger.history(r.history);
        const double de = std::abs(r.values.energy + p.j() * p.delta);
        const double db = std::abs(r.values.berry_deviation);
        const double dc = std::abs(r.values.concurrence);
        worst = std::max({worst, de, db, dc});
        if (!(de < 1e-10 && db < 1e-10 && dc < 1e-10))
            out.fail("N=" + std::to_string(n) + " dE=" + fmt("%.3g", de) + " B_N=" + fmt("%.3g", db) +
                     " C_N=" + fmt("%.3g", dc));
    }
    out.note("max deviation = " + fmt("%.3g", worst));
    return out;
}

// 3. Energy ordering at N = 32, lambda = 1.
Outcome basis_ordering() {
    Outcome out;
    const ModelParams p{32, 1.0, 1.0, 1.0};
    const GroundState dcs6 = solve(Basis::DCS, p, 6);
    ledger.state(dcs6, "DCS N_tr=6");
    std::map<int, double> dfs;
    std::map<int, double> roundoff;  // backward-error bound dim * eps * ||H||
    for (int n_tr = 6; n_tr <= 100; n_tr += 1) {
        const BlockHamiltonian h = project_parity(assemble(Basis::DFS, p, n_tr), Parity::Even);
        SolverOptions o;
        o.tol = 1e-12;
        const GroundState gs = ground_state(h, o);
        ledger.state(gs, "DFS N_tr=" + std::to_string(n_tr));
        dfs[n_tr] = gs.energy;
        roundoff[n_tr] = static_cast<double>(h.dim()) * std::numeric_limits<double>::epsilon() * h.norm_bound();
    }
    const double e_dcs = dcs6.energy;
    out.note("E(DCS,6)=" + fmt("%.10f", e_dcs) + " E(DFS,100)=" + fmt("%.10f", dfs[100]) +
             " E(DFS,45)=" + fmt("%.10f", dfs[45]) + " E(DFS,6)=" + fmt("%.10f", dfs[6]));
    if (!(e_dcs < dfs[100])) out.fail("E(DCS,6) is not below E(DFS,100)");
    if (!(dfs[100] < dfs[45])) out.fail("E(DFS,100) is not below E(DFS,45)");
    if (!(dfs[45] < dfs[6])) out.fail("E(DFS,45) is not below E(DFS,6)");
    double worst_rise = 0.0;
    for (auto it = std::next(dfs.begin()); it != dfs.end(); ++it) {
        const double rise = it->second - std::prev(it)->second;
        worst_rise = std::max(worst_rise, rise);
        if (rise > roundoff[it->first])
            out.fail("E(DFS) rises from N_tr=" + std::to_string(std::prev(it)->first) + " to " +
                     std::to_string(it->first) + " by " + fmt("%.3g", rise));
    }
    out.note("largest DFS rise " + fmt("%.2g", worst_rise) + " (round-off bound " + fmt("%.2g", roundoff[100]) + ")");
    return out;
}

// 4. Truncation deviation structure.
Outcome truncation_structure() {
    Outcome out;
    const double lc = critical_coupling(1.0, 1.0);
    constexpr int kReference = 48;

    // Peak of (E(N_tr) - E_ref)/|E_ref| over lambda in (0, 2 lambda_c] at N = 16.
    {
        std::vector<double> lambdas;
        for (int i = 1; i <= 40; ++i) lambdas.push_back(2.0 * lc * i / 40.0);
        const std::vector<int> n_trs{2, 4, 6, 8};
        std::vector<std::pair<double, double>> peak(n_trs.size(), {0.0, -1.0});
        for (const double lambda : lambdas) {
            const ModelParams p{16, 1.0, 1.0, lambda};
            const double ref = solve(Basis::DCS, p, kReference).energy;
            for (std::size_t t = 0; t < n_trs.size(); ++t) {
                const GroundState gs = solve(Basis::DCS, p, n_trs[t]);
                const double dev = (gs.energy - ref) / std::abs(ref);
                if (dev > peak[t].second) peak[t] = {lambda, dev};
            }
        }
        std::string where = "N=16 peak lambda/lambda_c:";
        for (std::size_t t = 0; t < n_trs.size(); ++t) {
            const double rel = peak[t].first / lc;
            where += " " + fmt("%.2f", rel) + " (N_tr=" + std::to_string(n_trs[t]) + ")";
            if (!(rel >= 0.8 && rel <= 1.2))
                out.fail("N_tr=" + std::to_string(n_trs[t]) + " peaks at " + fmt("%.2f", rel) + " lambda_c");
        }
        out.note(where);
    }

    // Required N_tr for 1e-6 at lambda_c, N = 64 .. 1024.
    {
        const std::vector<int> n_trs{2, 3, 4, 5, 6, 7, 8, 10, 12, 16, 20};
        std::vector<int> required;
        for (const int n : power_of_two_grid(6, 10)) {
            const ModelParams p{n, 1.0, 1.0, lc};
            const double ref = solve(Basis::DCS, p, kReference).energy;
            std::vector<double> dev;
            for (const int n_tr : n_trs) dev.push_back(std::abs(solve(Basis::DCS, p, n_tr).energy - ref) / std::abs(ref));
            int req = -1;
            for (std::size_t k = dev.size(); k-- > 0;) {
                if (dev[k] >= 1e-6) break;
                req = n_trs[k];
            }
            required.push_back(req);
        }
        std::string where = "required N_tr at lambda_c for N=64..1024:";
        for (const int r : required) where += " " + std::to_string(r);
        out.note(where);
        for (std::size_t i = 0; i < required.size(); ++i) {
            if (required[i] < 0) out.fail("no listed N_tr reaches 1e-6");
            if (i > 0 && required[i] > required[i - 1]) out.fail("required N_tr increases with N");
        }
    }
    return out;
}

Outcome exponent_window(ScalingObservable obs, const std::vector<double>& ds, double lo, double hi) {
    Outcome out;
    for (const double d : ds) {
        const auto& s = sweep(d);
        ScalingSeries series = obs == ScalingObservable::Energy  ? energy_deviation_series(d, s)
                               : obs == ScalingObservable::Berry ? berry_deviation_series(d, s)
                                                                 : concurrence_deviation_series(d, s, CInfMode::Fit);
        const double e = series.exponent.exponent;
        std::string note = "D=" + format_real(d) + ": " + fmt("%.4f", e) + " +- " + fmt("%.4f", series.exponent.uncertainty);
        if (series.fit) note += " (C_inf=" + fmt("%.6f", series.fit->c_inf) + ")";
        out.note(note);
        if (!(e >= lo && e <= hi))
            out.fail("D=" + format_real(d) + " outside [" + format_real(lo) + ", " + format_real(hi) + "]");
    }
    return out;
}

// 7. Concurrence joint fit, and the same fit restricted to N <= 32.
Outcome concurrence_exponent() {
    const std::vector<double> ds{0.1, 1.0, 5.0};
    Outcome out = exponent_window(ScalingObservable::Concurrence, ds, -0.38, -0.28);
    ScalingOptions o;
    for (const double d : ds) {
        const auto& big = sweep(d);
        const auto small = critical_sweep(d, {4, 8}, o);
        std::vector<int> n;
        std::vector<double> c;
        for (const auto& pt : small) {
            ledger.state(pt.result.state, "small-N D=" + format_real(d));
            ledger.history(pt.result.history);
            n.push_back(pt.params.n_atoms);
            c.push_back(pt.result.values.concurrence);
        }
        for (const auto& pt : big)
            if (pt.params.n_atoms <= 32) {
                n.push_back(pt.params.n_atoms);
                c.push_back(pt.result.values.concurrence);
            }
        const double beta_all = fit_offset_power_law(scaling_grid(), [&] {
                                    std::vector<double> v;
                                    for (const auto& pt : big) v.push_back(pt.result.values.concurrence);
                                    return v;
                                }()).beta;
        try {
            const double beta_small = fit_offset_power_law(n, c).beta;
            out.note("D=" + format_real(d) + " N<=32: " + fmt("%.4f", -beta_small));
            if (!(beta_small <= beta_all - 0.04))
                out.fail("D=" + format_real(d) + " N<=32 magnitude " + fmt("%.4f", beta_small) +
                         " is not 0.04 below " + fmt("%.4f", beta_all));
        } catch (const FitError& e) {
            out.fail("D=" + format_real(d) + " N<=32 fit: " + e.what());
        }
    }
    return out;
}

// 8. Property suites.
Outcome properties() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();

    std::mt19937 rng(11);
    std::uniform_int_distribution<int> idx(0, 40);
    std::uniform_real_distribution<double> gd(0.0, 5.0);
    double kernel = 0.0;
    for (int trial = 0; trial < 2000; ++trial) {
        const int l = idx(rng);
        const int k = idx(rng);
        const double g = gd(rng);
        const double d = coupling_d(l, k, g);
        const double sk = (k & 1) ? -1.0 : 1.0;
        const double sl = (l & 1) ? -1.0 : 1.0;
        kernel = std::max({kernel, std::abs(coupling_d(k, l, g) - d), std::abs(generic_overlap(l, k, g) - sk * d),
                           std::abs(generic_overlap(l, k, -g) - sl * d)});
    }
    if (!(kernel < 1e-12)) out.fail("kernel symmetry/sign " + fmt("%.3g", kernel));
    const double defect = unitarity_defect(coupling_kernel(1.0, 60));
    if (!(defect < 1e-12)) out.fail("unitarity defect " + fmt("%.3g", defect));
    for (const double g : {0.5, 2.0, 5.0})
        if (coupling_kernel(g, 30).table.colwise().squaredNorm().maxCoeff() > 1.0 + 1e-12)
            out.fail("column norm above one at g=" + format_real(g));

    double asym = 0.0;
    double commutator = 0.0;
    std::normal_distribution<double> normal;
    for (const Basis b : {Basis::DCS, Basis::DFS})
        for (const auto& [n, lambda] : {std::pair{5, 0.3}, {6, 1.2}, {11, 0.5}}) {
            const BlockHamiltonian h = assemble(b, ModelParams{n, 1.0, 1.3, lambda}, 9);
            const Eigen::MatrixXd m = h.to_dense();
            asym = std::max(asym, (m - m.transpose()).cwiseAbs().maxCoeff());
            const ParityOperator pi = parity_operator(n, 9);
            Eigen::VectorXd x(static_cast<Eigen::Index>(h.dim()));
            for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = normal(rng);
            commutator = std::max(commutator, (pi.apply(h.apply(x)) - h.apply(pi.apply(x))).cwiseAbs().maxCoeff());
            commutator = std::max(commutator, (pi.apply(pi.apply(x)) - x).cwiseAbs().maxCoeff());
        }
    if (asym != 0.0) out.fail("asymmetry " + fmt("%.3g", asym));
    if (!(commutator < 1e-12)) out.fail("parity commutator " + fmt("%.3g", commutator));

    for (const auto& [n, lambda] : {std::pair{3, 0.7}, {20, 0.5}, {64, 1.5}})
        for (const Parity parity : {Parity::Even, Parity::Odd}) {
            ConvergeOptions o;
            o.parity = parity;
            const ConvergedResult r = converge(ModelParams{n, 1.0, 1.0, lambda}, o);
            ledger.state(r.state, "property N=" + std::to_string(n));
            ledger.history(r.history);
        }
    if (!(ledger.worst_sum_rule < 1e-9))
        out.fail("sum rule off by " + fmt("%.3g", ledger.worst_sum_rule) + " at " + ledger.worst_sum_rule_at);
    if (ledger.worst_variational > 1e-12)
        out.fail("E0 rises with N_tr by " + fmt("%.3g", ledger.worst_variational) + " relative");

    double recovery = 0.0;
    for (const double p : {-1.0, -2.0 / 3.0, -1.0 / 3.0, 0.7}) {
        std::vector<double> v;
        for (const int x : scaling_grid()) v.push_back(2.5 * std::pow(static_cast<double>(x), p));
        const auto e = extrapolate_exponent(make_series(ScalingObservable::Berry, 1.0, 0.5, scaling_grid(), v));
        recovery = std::max(recovery, std::abs(e.exponent - p));
    }
    if (!(recovery < 1e-12)) out.fail("power-law recovery " + fmt("%.3g", recovery));

    const double elapsed = seconds_since(t0);
    if (!(elapsed < 300.0)) out.fail("took " + fmt("%.0f", elapsed) + " s");
    out.note(std::to_string(ledger.states) + " states, worst sum rule " + fmt("%.2g", ledger.worst_sum_rule) + ", " +
             std::to_string(ledger.histories) + " histories, " + fmt("%.1f", elapsed) + " s");
    return out;
}

// 9. One converged solve at N = 4096.
Outcome scale_demo() {
    Outcome out;
    const std::filesystem::path root = std::filesystem::current_path() / "acceptance-results";
    RunConfig c = config_from_key_values(Command::Solve, parse_key_values("n_atoms=4096\nlambda=0.5\n"));
    ResultStore store(root);
    const auto t0 = std::chrono::steady_clock::now();
    const CommandOutput result = run_solve(c);
    const double wall = seconds_since(t0);
    const auto entry = store.commit(c, result, wall);
    if (!result.all_ok) out.fail("solve reported failure");
    if (!store.lookup(config_digest(c))) out.fail("no manifest entry");
    out.note("this run " + fmt("%.2f", wall) + " s; manifest " + (root / "manifest.csv").string() + " records " +
             fmt("%.2f", entry.wall_seconds) + " s");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle equivalence, N<=4", oracle_equivalence},
        {"decoupled limit", decoupled_limit},
        {"energy ordering DCS vs DFS at N=32", basis_ordering},
        {"truncation deviation peak and required N_tr", truncation_structure},
        {"energy exponent in [-1.05, -0.95]",
         [] { return exponent_window(ScalingObservable::Energy, {0.1, 1.0, 10.0}, -1.05, -0.95); }},
        {"Berry exponent in [-0.72, -0.62]",
         [] { return exponent_window(ScalingObservable::Berry, {0.1, 1.0, 5.0}, -0.72, -0.62); }},
        {"concurrence exponent in [-0.38, -0.28], small-N reduction", concurrence_exponent},
        {"property suites", properties},
        {"scale demonstration N=4096", scale_demo},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int number = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(number)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.fail(std::string("error: ") + e.what());
        }
        if (!o.pass) ++failed;
        std::printf("%s %d. %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", number, criteria[i].first.c_str(),
                    seconds_since(t0), o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
