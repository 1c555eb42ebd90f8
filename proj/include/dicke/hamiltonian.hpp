// hamiltonian.hpp: block-tridiagonal real symmetric matrices for the
// displaced-Fock (DCS) and bare-Fock (DFS) bases, parity and its sectors.

#pragma once

#include "dicke/model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace dicke {

struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Basis { DCS, DFS };
enum class Parity { Full, Even, Odd };

std::string_view to_string(Basis b);
std::string_view to_string(Parity p);
Parity parity_from_string(std::string_view s);

struct AssemblyOptions {
    std::size_t max_dim{4'000'000};
};

// Symmetric matrix with dense diagonal blocks D_i and dense couplings U_i
// between blocks i and i+1 (the i+1 -> i coupling is U_i^T).
//
// Full matrices use the SectorLayout ordering. Parity-projected matrices keep
// only sectors with m >= 0; lift()/restrict() map between the two.
class BlockHamiltonian {
public:
    BlockHamiltonian(ModelParams params, int n_tr, Basis basis, Parity parity,
                     std::vector<Eigen::MatrixXd> diag, std::vector<Eigen::MatrixXd> upper);

    const ModelParams& params() const { return params_; }
    int n_tr() const { return n_tr_; }
    Basis basis() const { return basis_; }
    Parity parity() const { return parity_; }
    SectorLayout layout() const { return {params_.n_atoms, n_tr_}; }

    std::size_t dim() const { return offsets_.back(); }
    std::size_t full_dim() const { return layout().dim(); }
    int n_blocks() const { return static_cast<int>(diag_.size()); }
    std::size_t block_offset(int i) const { return offsets_[static_cast<std::size_t>(i)]; }
    const Eigen::MatrixXd& diag_block(int i) const { return diag_[static_cast<std::size_t>(i)]; }
    const Eigen::MatrixXd& upper_block(int i) const { return upper_[static_cast<std::size_t>(i)]; }

    // y = H x
    void apply(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> y) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

    Eigen::MatrixXd to_dense() const;

    // Infinity-norm bound on the spectral radius.
    double norm_bound() const { return norm_bound_; }

    // Largest mismatch between each stored coupling and the transpose of the
    // same coupling rebuilt from the rows of the neighbouring sector.
    double assembly_asymmetry() const { return assembly_asymmetry_; }
    void set_assembly_asymmetry(double v) { assembly_asymmetry_ = v; }

    // Embedding of this matrix's basis into the full (n, k) layout.
    Eigen::VectorXd lift(const Eigen::VectorXd& x) const;
    Eigen::VectorXd restrict(const Eigen::VectorXd& full) const;

    struct Embedding {
        std::size_t first;
        double first_coeff;
        std::size_t second;  // == npos when the basis vector is a single state
        double second_coeff;
        static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    };
    void set_embedding(std::vector<Embedding> e) { embedding_ = std::move(e); }

    // "row col value" per nonzero entry, flat indices of this matrix.
    void dump_coordinates(std::ostream& out) const;

private:
    ModelParams params_;
    int n_tr_;
    Basis basis_;
    Parity parity_;
    std::vector<Eigen::MatrixXd> diag_;
    std::vector<Eigen::MatrixXd> upper_;
    std::vector<std::size_t> offsets_;
    std::vector<Embedding> embedding_;  // empty for the full layout
    double norm_bound_{0.0};
    double assembly_asymmetry_{0.0};
};

// Row equation: omega (l - g_n^2) c_{n,l} - Delta j_n^+ sum_k (-1)^k D_{l,k} c_{n+1,k}
//                                     - Delta j_n^- sum_k (-1)^l D_{l,k} c_{n-1,k}.
BlockHamiltonian assemble_dcs(const ModelParams& params, int n_tr, const AssemblyOptions& opts = {});

// Bare Fock basis |l> (l <= n_tr) times Dicke states, rotated-frame Hamiltonian.
BlockHamiltonian assemble_dfs(const ModelParams& params, int n_tr, const AssemblyOptions& opts = {});

BlockHamiltonian assemble(Basis basis, const ModelParams& params, int n_tr,
                          const AssemblyOptions& opts = {});

// Pi (n, k) = (-1)^k (-n, k) on the full layout; the spin-rotation phase is +1.
class ParityOperator {
public:
    ParityOperator(int n_atoms, int n_tr) : layout_(n_atoms, n_tr) {}

    const SectorLayout& layout() const { return layout_; }
    std::size_t image(std::size_t flat) const;
    double amplitude(std::size_t flat) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

private:
    SectorLayout layout_;
};

ParityOperator parity_operator(int n_atoms, int n_tr);

// Restriction of a full matrix to the Pi = +1 (Even) or Pi = -1 (Odd) subspace.
BlockHamiltonian project_parity(const BlockHamiltonian& full, Parity sector);

// Number of basis states with the given parity.
std::size_t parity_sector_dim(int n_atoms, int n_tr, Parity sector);

}  // namespace dicke
