#include "dicke/eigen_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace dicke {

namespace {

Eigen::VectorXd random_unit_vector(std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = dist(rng);
    return v / v.norm();
}

// Two passes of classical Gram-Schmidt against the first `cols` columns of V.
Eigen::VectorXd orthogonalize(const Eigen::MatrixXd& v, Eigen::Index cols, Eigen::VectorXd& w) {
    Eigen::VectorXd h = v.leftCols(cols).transpose() * w;
    w.noalias() -= v.leftCols(cols) * h;
    const Eigen::VectorXd h2 = v.leftCols(cols).transpose() * w;
    w.noalias() -= v.leftCols(cols) * h2;
    return h + h2;
}

}  // namespace

EigenPairs dense_lowest(const Eigen::MatrixXd& m, int nev) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", 0.0, 0);
    const auto n = std::min<Eigen::Index>(nev, m.rows());
    EigenPairs out;
    out.values = es.eigenvalues().head(n);
    out.vectors = es.eigenvectors().leftCols(n);
    for (Eigen::Index i = 0; i < n; ++i)
        out.residuals.push_back((m * out.vectors.col(i) - out.values[i] * out.vectors.col(i)).norm());
    return out;
}

EigenPairs lanczos_lowest(const LinearOperator& op, std::size_t dim, double norm, int nev,
                          const SolverOptions& opts) {
    if (nev < 1) throw std::invalid_argument("lanczos_lowest: nev must be positive");
    if (!(opts.tol > 0.0)) throw std::invalid_argument("lanczos_lowest: tol must be positive");
    const auto n = static_cast<Eigen::Index>(dim);
    const Eigen::Index m = std::min<Eigen::Index>(std::max(opts.subspace, 2 * nev + 8), n);
    const Eigen::Index keep = std::max<Eigen::Index>(nev + 1, m / 2);
    const double scale = std::max(norm, std::numeric_limits<double>::min());
    const double target = opts.tol * scale;

    Eigen::MatrixXd v(n, m + 1);
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, m + 1);
    v.col(0) = random_unit_vector(dim, opts.seed);

    EigenPairs out;
    Eigen::VectorXd w(n);
    Eigen::Index start = 0;
    int iterations = 0;
    double best_residual = std::numeric_limits<double>::infinity();
    std::uint64_t refill_seed = opts.seed ^ 0x9e3779b97f4a7c15ULL;

    while (true) {
        Eigen::Index used = m;
        for (Eigen::Index j = start; j < m; ++j) {
            op(v.col(j), w);
            ++iterations;
            const Eigen::VectorXd h = orthogonalize(v, j + 1, w);
            t.col(j).head(j + 1) = h;
            t.row(j).head(j + 1) = h.transpose();
            const double beta = w.norm();
            if (beta <= 1e-13 * scale) {
                // Invariant subspace reached.
                if (j + 1 == n) {
                    used = j + 1;
                    t.row(used).setZero();
                    break;
                }
                // Continue with a fresh direction; the Krylov block decouples.
                w = random_unit_vector(dim, ++refill_seed);
                orthogonalize(v, j + 1, w);
                v.col(j + 1) = w / w.norm();
                t(j + 1, j) = t(j, j + 1) = 0.0;
                continue;
            }
            t(j + 1, j) = t(j, j + 1) = beta;
            v.col(j + 1) = w / beta;
        }

        const Eigen::MatrixXd tm = t.topLeftCorner(used, used);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tm);
        const Eigen::VectorXd& theta = es.eigenvalues();
        const Eigen::MatrixXd& y = es.eigenvectors();
        const Eigen::RowVectorXd coupling = t.row(used).head(used);
        out.ritz_history.push_back(theta[0]);

        const int found = static_cast<int>(std::min<Eigen::Index>(nev, used));
        bool estimates_ok = true;
        for (int i = 0; i < found; ++i) {
            const double r = std::abs(coupling.dot(y.col(i)));
            if (r > target) estimates_ok = false;
        }
        if (found < nev && used < n) estimates_ok = false;

        if (estimates_ok) {
            out.values = theta.head(found);
            out.vectors = v.leftCols(used) * y.leftCols(found);
            out.residuals.clear();
            bool true_ok = true;
            Eigen::VectorXd hv(n);
            for (int i = 0; i < found; ++i) {
                out.vectors.col(i).normalize();
                op(out.vectors.col(i), hv);
                ++iterations;
                const double r = (hv - out.values[i] * out.vectors.col(i)).norm();
                out.residuals.push_back(r);
                best_residual = std::min(best_residual, r);
                if (r > target) true_ok = false;
            }
            if (true_ok) {
                out.iterations = iterations;
                return out;
            }
        } else {
            for (int i = 0; i < found; ++i)
                best_residual = std::min(best_residual, std::abs(coupling.dot(y.col(i))));
        }

        if (iterations >= opts.max_iterations)
            throw ConvergenceError("Lanczos did not converge within " + std::to_string(opts.max_iterations) +
                                       " iterations",
                                   best_residual, iterations);
        // Thick restart: keep the lowest `k` Ritz vectors plus the residual direction.
        const Eigen::Index k = std::min(keep, used - 1);
        const Eigen::MatrixXd ritz = v.leftCols(used) * y.leftCols(k);
        const Eigen::VectorXd next = v.col(std::min(used, m));
        v.leftCols(k) = ritz;
        t.setZero();
        for (Eigen::Index i = 0; i < k; ++i) t(i, i) = theta[i];
        if (used < n && coupling.size() > 0 && coupling.norm() > 0.0) {
            for (Eigen::Index i = 0; i < k; ++i) {
                const double s = coupling.dot(y.col(i));
                t(k, i) = t(i, k) = s;
            }
            v.col(k) = next;
        } else {
            Eigen::VectorXd fresh = random_unit_vector(dim, ++refill_seed);
            orthogonalize(v, k, fresh);
            v.col(k) = fresh / fresh.norm();
        }
        // Re-orthonormalize the kept block against drift.
        Eigen::VectorXd col = v.col(k);
        orthogonalize(v, k, col);
        v.col(k) = col / col.norm();
        start = k;
    }
}

EigenPairs lowest_eigenpairs(const BlockHamiltonian& h, int nev, const SolverOptions& opts) {
    const bool dense = opts.force_dense || (!opts.force_lanczos && h.dim() <= opts.dense_threshold);
    if (dense) {
        if (h.dim() > opts.dense_cap)
            throw ResourceError("dense solve of dimension " + std::to_string(h.dim()) + " exceeds cap " +
                                std::to_string(opts.dense_cap));
        return dense_lowest(h.to_dense(), nev);
    }
    const LinearOperator op = [&h](const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> y) {
        h.apply(x, y);
    };
    return lanczos_lowest(op, h.dim(), h.norm_bound(), nev, opts);
}

namespace {

GroundState make_state(const BlockHamiltonian& h, const EigenPairs& pairs, int i) {
    GroundState gs;
    gs.energy = pairs.values[i];
    gs.coefficients = h.lift(pairs.vectors.col(i));
    long double norm2 = 0.0L;
    for (const double x : gs.coefficients) norm2 += static_cast<long double>(x) * x;
    gs.coefficients /= static_cast<double>(std::sqrt(norm2));
    gs.params = h.params();
    gs.basis = h.basis();
    gs.n_tr = h.n_tr();
    gs.parity = h.parity();
    gs.residual = pairs.residuals[static_cast<std::size_t>(i)];
    gs.iterations = pairs.iterations;
    return gs;
}

}  // namespace

GroundState ground_state(const BlockHamiltonian& h, const SolverOptions& opts) {
    return make_state(h, lowest_eigenpairs(h, 1, opts), 0);
}

std::pair<GroundState, GroundState> lowest_pair(const BlockHamiltonian& h, const SolverOptions& opts) {
    if (h.dim() < 2) throw std::invalid_argument("lowest_pair: matrix dimension below 2");
    const auto pairs = lowest_eigenpairs(h, 2, opts);
    return {make_state(h, pairs, 0), make_state(h, pairs, 1)};
}

}  // namespace dicke
