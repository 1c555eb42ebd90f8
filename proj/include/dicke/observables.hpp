// observables.hpp: ground-state physics quantities and the truncation driver.
//
// Expectation values are contracted directly in the displaced-frame basis;
// cross-sector terms use the overlap kernels at displacement differences
// G (|dn| = 1) and 2G (|dn| = 2).

#pragma once

#include "dicke/eigen_solver.hpp"
#include "dicke/hamiltonian.hpp"
#include "dicke/model.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace dicke {

// Rotated-frame expectation values.
double expect_jz_squared(const GroundState& gs);
double expect_jx(const GroundState& gs);            // <(J_+ + J_-)/2>
double expect_jplus_squared(const GroundState& gs);  // <J_+^2> = <J_-^2> for real states
double expect_jy_squared(const GroundState& gs);

// <J_x^2>, <J_y^2>, <J_z^2> as squared norms of J_a |psi>.
struct SpinSquares {
    double jx2{0.0};
    double jy2{0.0};
    double jz2{0.0};
};
SpinSquares spin_squares_by_norm(const GroundState& gs);

// <J_x>/j in the rotated frame, i.e. -<J_z>/j of the original frame; +1 at lambda = 0.
double magnetization_x(const GroundState& gs);

// B_N = 1 - magnetization_x: 0 at lambda = 0, -> 1 deep in the superradiant phase.
double berry_deviation(const GroundState& gs);

// gamma = 2 pi <J_z> (original frame) = -2 pi j (1 - B_N).
double berry_phase(const GroundState& gs);

// C_N = 1 - 4 <J_y^2> / N.
double concurrence(const GroundState& gs);

struct Observables {
    double energy{0.0};
    double berry_deviation{0.0};
    double berry_phase{0.0};
    double jy2{0.0};
    double concurrence{0.0};
};

Observables measure(const GroundState& gs);

struct ConvergeOptions {
    double threshold{1e-6};
    double unit_floor{1e-2};  // see observable_change
    std::vector<int> schedule{4, 6, 8, 12, 16, 24, 32, 48, 64, 96};
    Basis basis{Basis::DCS};
    Parity parity{Parity::Even};
    SolverOptions solver{};
    AssemblyOptions assembly{};
};

struct HistoryEntry {
    int n_tr{0};
    Observables values;
    double residual{0.0};
};

struct ConvergedResult {
    Observables values;
    int n_tr_used{0};
    std::vector<HistoryEntry> history;
    double relative_change{0.0};  // worst observable change at acceptance
    GroundState state;
};

struct ScheduleExhausted : std::runtime_error {
    ScheduleExhausted(const std::string& what, std::vector<HistoryEntry> history)
        : std::runtime_error(what), history(std::move(history)) {}
    std::vector<HistoryEntry> history;
};

// Largest relative change between two observable sets. The spin quantities
// B_N and C_N live in [0, 1] and are compared relative to max(|x|, unit_floor).
double observable_change(const Observables& a, const Observables& b, double unit_floor = 1e-2);

// Solve at successive truncations until every observable settles below the threshold.
ConvergedResult converge(const ModelParams& params, const ConvergeOptions& opts = {});

// CSV row: N, omega, delta, lambda, alpha, Ntr_used, E0, E0_scaled, B_N,
// berry_gamma, Jy2, C_N, parity, residual.
std::string observables_csv_header();
std::string observables_csv_row(const ModelParams& params, const ConvergedResult& result);

// 12 significant digits.
std::string format_real(double v);

}  // namespace dicke
