// dcs_basis.hpp: overlaps between Fock states of displaced boson frames.
//
// The displaced frame of sector n is spanned by |k>_n, k = 0..N_tr. Between
// neighbouring sectors
//     _n<l|k>_{n-1} = (-1)^l D_{l,k}(G),    _n<l|k>_{n+1} = (-1)^k D_{l,k}(G),
// and in general _n<l|k>_{n'} = <l| exp(d a^+ - d a) |k> with d = (n' - n) G.

#pragma once

#include <Eigen/Dense>

#include <memory>

namespace dicke {

enum class KernelConvention { Coupling, Generic };

struct OverlapKernel {
    double delta{0.0};
    KernelConvention convention{KernelConvention::Coupling};
    Eigen::MatrixXd table;

    int n_tr() const { return static_cast<int>(table.rows()) - 1; }
};

// D_{l,k}(G) = e^{-G^2/2} sum_r (-1)^r sqrt(l! k!) G^{l+k-2r} / ((l-r)! (k-r)! r!).
double coupling_d(int l, int k, double g);

// Table of D_{l,k}(G) for l, k <= n_tr. Symmetric by construction.
OverlapKernel coupling_kernel(double g, int n_tr);

// <l| exp(d a^+ - d a) |k> for real d.
double generic_overlap(int l, int k, double d);

// Table of generic_overlap(l, k, d) for l, k <= n_tr.
OverlapKernel generic_kernel(double d, int n_tr);

// max_{l <= n_tr/2} |1 - sum_k table(l,k)^2|.
double unitarity_defect(const OverlapKernel& kernel);

namespace detail {
// Direct alternating sum for D_{l,k}, log-factorial terms, pairwise summed.
// Also reports the largest |term| so callers can bound the cancellation error.
double coupling_d_direct(int l, int k, double g, double* max_term = nullptr);
// <l|D(d)|k> for l >= k through the Laguerre recurrence:
//   sqrt(k!/l!) d^{l-k} e^{-d^2/2} L_k^{(l-k)}(d^2).
double displaced_overlap_laguerre(int l, int k, double d);
}  // namespace detail

// Process-wide cache of immutable kernel tables keyed by (delta, n_tr, convention).
std::shared_ptr<const OverlapKernel> cached_kernel(double delta, int n_tr, KernelConvention convention);

}  // namespace dicke
