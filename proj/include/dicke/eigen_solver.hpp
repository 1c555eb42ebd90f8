// eigen_solver.hpp: lowest eigenpairs of a BlockHamiltonian.
//
// Thick-restart (Krylov-Schur) Lanczos with full reorthogonalization; small
// matrices go to a dense symmetric solver.

#pragma once

#include "dicke/hamiltonian.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dicke {

struct SolverOptions {
    // Residual target: ||H c - E c|| <= tol * ||H|| (infinity-norm bound).
    double tol{1e-10};
    std::uint64_t seed{1};
    int max_iterations{200000};     // matrix-vector products
    int subspace{96};               // Krylov basis size before a thick restart
    std::size_t dense_threshold{2000};
    std::size_t dense_cap{12000};   // forced dense solves above this throw ResourceError
    bool force_dense{false};
    bool force_lanczos{false};
};

struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& what, double best_residual, int iterations)
        : std::runtime_error(what), best_residual(best_residual), iterations(iterations) {}
    double best_residual;
    int iterations;
};

// Eigenpair lifted to the full (n, k) layout of its basis.
struct GroundState {
    double energy{0.0};
    Eigen::VectorXd coefficients;  // unit norm, full SectorLayout ordering
    ModelParams params;
    Basis basis{Basis::DCS};
    int n_tr{0};
    Parity parity{Parity::Full};
    double residual{0.0};          // ||H c - E c||
    int iterations{0};

    SectorLayout layout() const { return {params.n_atoms, n_tr}; }
    double coeff(int sector, int k) const {
        return coefficients[static_cast<Eigen::Index>(layout().flat(sector, k))];
    }
};

struct EigenPairs {
    Eigen::VectorXd values;          // ascending
    Eigen::MatrixXd vectors;         // columns, in the operator's own basis
    std::vector<double> residuals;   // true residual norms
    int iterations{0};
    std::vector<double> ritz_history;  // lowest Ritz value after each Lanczos cycle
};

using LinearOperator = std::function<void(const Eigen::Ref<const Eigen::VectorXd>&, Eigen::Ref<Eigen::VectorXd>)>;

// Lowest `nev` eigenpairs of a symmetric operator by thick-restart Lanczos.
// `norm` scales the residual tolerance. Throws ConvergenceError.
EigenPairs lanczos_lowest(const LinearOperator& op, std::size_t dim, double norm, int nev,
                          const SolverOptions& opts);

EigenPairs dense_lowest(const Eigen::MatrixXd& m, int nev);

EigenPairs lowest_eigenpairs(const BlockHamiltonian& h, int nev, const SolverOptions& opts = {});

GroundState ground_state(const BlockHamiltonian& h, const SolverOptions& opts = {});

std::pair<GroundState, GroundState> lowest_pair(const BlockHamiltonian& h, const SolverOptions& opts = {});

}  // namespace dicke
