#include "dicke/hamiltonian.hpp"

#include "dicke/dcs_basis.hpp"

#include <cmath>
#include <ostream>
#include <string>

namespace dicke {

namespace {

double sign_of_boson(int k) { return (k & 1) ? -1.0 : 1.0; }

void check_dim(const SectorLayout& layout, const AssemblyOptions& opts) {
    if (layout.dim() > opts.max_dim)
        throw ResourceError("matrix dimension " + std::to_string(layout.dim()) + " exceeds cap " +
                            std::to_string(opts.max_dim));
}

}  // namespace

std::string_view to_string(Basis b) { return b == Basis::DCS ? "DCS" : "DFS"; }

std::string_view to_string(Parity p) {
    switch (p) {
        case Parity::Even: return "even";
        case Parity::Odd: return "odd";
        default: return "full";
    }
}

Parity parity_from_string(std::string_view s) {
    if (s == "even") return Parity::Even;
    if (s == "odd") return Parity::Odd;
    if (s == "full") return Parity::Full;
    throw ConfigError("unknown parity '" + std::string(s) + "' (expected even|odd|full)");
}

BlockHamiltonian::BlockHamiltonian(ModelParams params, int n_tr, Basis basis, Parity parity,
                                   std::vector<Eigen::MatrixXd> diag, std::vector<Eigen::MatrixXd> upper)
    : params_(params), n_tr_(n_tr), basis_(basis), parity_(parity), diag_(std::move(diag)),
      upper_(std::move(upper)) {
    if (diag_.empty() || upper_.size() + 1 != diag_.size())
        throw std::invalid_argument("BlockHamiltonian: need n diagonal and n-1 coupling blocks");
    offsets_.assign(diag_.size() + 1, 0);
    for (std::size_t i = 0; i < diag_.size(); ++i) {
        if (diag_[i].rows() != diag_[i].cols())
            throw std::invalid_argument("BlockHamiltonian: diagonal block not square");
        offsets_[i + 1] = offsets_[i] + static_cast<std::size_t>(diag_[i].rows());
    }
    for (std::size_t i = 0; i < upper_.size(); ++i) {
        if (upper_[i].rows() != diag_[i].rows() || upper_[i].cols() != diag_[i + 1].rows())
            throw std::invalid_argument("BlockHamiltonian: coupling block shape mismatch");
    }

    Eigen::VectorXd row_sums(static_cast<Eigen::Index>(dim()));
    for (std::size_t i = 0; i < diag_.size(); ++i) {
        Eigen::VectorXd s = diag_[i].cwiseAbs().rowwise().sum();
        if (i + 1 < diag_.size()) s += upper_[i].cwiseAbs().rowwise().sum();
        if (i > 0) s += upper_[i - 1].cwiseAbs().colwise().sum().transpose();
        row_sums.segment(static_cast<Eigen::Index>(offsets_[i]), s.size()) = s;
    }
    norm_bound_ = row_sums.size() ? row_sums.maxCoeff() : 0.0;
}

void BlockHamiltonian::apply(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> y) const {
    const auto n = diag_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto off = static_cast<Eigen::Index>(offsets_[i]);
        const auto len = diag_[i].rows();
        auto yi = y.segment(off, len);
        yi.noalias() = diag_[i] * x.segment(off, len);
        if (i + 1 < n) {
            const auto off_next = static_cast<Eigen::Index>(offsets_[i + 1]);
            yi.noalias() += upper_[i] * x.segment(off_next, upper_[i].cols());
        }
        if (i > 0) {
            const auto off_prev = static_cast<Eigen::Index>(offsets_[i - 1]);
            yi.noalias() += upper_[i - 1].transpose() * x.segment(off_prev, upper_[i - 1].rows());
        }
    }
}

Eigen::VectorXd BlockHamiltonian::apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y(x.size());
    apply(x, y);
    return y;
}

Eigen::MatrixXd BlockHamiltonian::to_dense() const {
    const auto d = static_cast<Eigen::Index>(dim());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < diag_.size(); ++i) {
        const auto off = static_cast<Eigen::Index>(offsets_[i]);
        m.block(off, off, diag_[i].rows(), diag_[i].cols()) = diag_[i];
        if (i + 1 < diag_.size()) {
            const auto off_next = static_cast<Eigen::Index>(offsets_[i + 1]);
            m.block(off, off_next, upper_[i].rows(), upper_[i].cols()) = upper_[i];
            m.block(off_next, off, upper_[i].cols(), upper_[i].rows()) = upper_[i].transpose();
        }
    }
    return m;
}

Eigen::VectorXd BlockHamiltonian::lift(const Eigen::VectorXd& x) const {
    if (embedding_.empty()) return x;
    Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(full_dim()));
    for (std::size_t i = 0; i < embedding_.size(); ++i) {
        const auto& e = embedding_[i];
        const double v = x[static_cast<Eigen::Index>(i)];
        full[static_cast<Eigen::Index>(e.first)] += e.first_coeff * v;
        if (e.second != Embedding::npos) full[static_cast<Eigen::Index>(e.second)] += e.second_coeff * v;
    }
    return full;
}

Eigen::VectorXd BlockHamiltonian::restrict(const Eigen::VectorXd& full) const {
    if (embedding_.empty()) return full;
    Eigen::VectorXd x(static_cast<Eigen::Index>(embedding_.size()));
    for (std::size_t i = 0; i < embedding_.size(); ++i) {
        const auto& e = embedding_[i];
        double v = e.first_coeff * full[static_cast<Eigen::Index>(e.first)];
        if (e.second != Embedding::npos) v += e.second_coeff * full[static_cast<Eigen::Index>(e.second)];
        x[static_cast<Eigen::Index>(i)] = v;
    }
    return x;
}

void BlockHamiltonian::dump_coordinates(std::ostream& out) const {
    const auto old_precision = out.precision(17);
    const auto emit = [&](std::size_t r, std::size_t c, double v) {
        if (v != 0.0) out << r << ' ' << c << ' ' << v << '\n';
    };
    for (std::size_t i = 0; i < diag_.size(); ++i) {
        const auto off = offsets_[i];
        for (Eigen::Index r = 0; r < diag_[i].rows(); ++r) {
            const auto row = off + static_cast<std::size_t>(r);
            if (i > 0) {
                const auto& u = upper_[i - 1];
                for (Eigen::Index c = 0; c < u.rows(); ++c)
                    emit(row, offsets_[i - 1] + static_cast<std::size_t>(c), u(c, r));
            }
            for (Eigen::Index c = 0; c < diag_[i].cols(); ++c)
                emit(row, off + static_cast<std::size_t>(c), diag_[i](r, c));
            if (i + 1 < diag_.size()) {
                const auto& u = upper_[i];
                for (Eigen::Index c = 0; c < u.cols(); ++c)
                    emit(row, offsets_[i + 1] + static_cast<std::size_t>(c), u(r, c));
            }
        }
    }
    out.precision(old_precision);
}

BlockHamiltonian assemble_dcs(const ModelParams& params, int n_tr, const AssemblyOptions& opts) {
    params.validate();
    const SectorLayout layout(params.n_atoms, n_tr);
    check_dim(layout, opts);

    const int b = layout.block_size();
    const double j = params.j();
    const auto kernel = cached_kernel(params.displacement_step(), n_tr, KernelConvention::Coupling);
    const Eigen::MatrixXd& d = kernel->table;

    // (-1)^k D_{l,k} couples sector n to n+1, (-1)^l D_{l,k} couples n to n-1.
    const Eigen::VectorXd parity_signs =
        Eigen::VectorXd::NullaryExpr(b, [](Eigen::Index k) { return sign_of_boson(static_cast<int>(k)); });
    const Eigen::MatrixXd up_kernel = d * parity_signs.asDiagonal();
    const Eigen::MatrixXd down_kernel = parity_signs.asDiagonal() * d;

    std::vector<Eigen::MatrixXd> diag;
    std::vector<Eigen::MatrixXd> upper;
    diag.reserve(static_cast<std::size_t>(layout.n_sectors()));
    upper.reserve(static_cast<std::size_t>(layout.n_sectors() - 1));
    double asymmetry = 0.0;
    for (int s = 0; s < layout.n_sectors(); ++s) {
        const double m = layout.m_of(s);
        const double g = params.displacement(m);
        Eigen::VectorXd onsite(b);
        for (int l = 0; l < b; ++l) onsite[l] = params.omega * (l - g * g);
        diag.emplace_back(onsite.asDiagonal());

        if (s + 1 < layout.n_sectors()) {
            Eigen::MatrixXd u = -params.delta * ladder_coeff(j, m, +1) * up_kernel;
            // Same coupling seen from the row of sector m+1.
            const Eigen::MatrixXd lower = -params.delta * ladder_coeff(j, m + 1.0, -1) * down_kernel;
            asymmetry = std::max(asymmetry, (lower - u.transpose()).cwiseAbs().maxCoeff());
            upper.push_back(std::move(u));
        }
    }
    BlockHamiltonian h(params, n_tr, Basis::DCS, Parity::Full, std::move(diag), std::move(upper));
    h.set_assembly_asymmetry(asymmetry);
    return h;
}

BlockHamiltonian assemble_dfs(const ModelParams& params, int n_tr, const AssemblyOptions& opts) {
    params.validate();
    const SectorLayout layout(params.n_atoms, n_tr);
    check_dim(layout, opts);

    const int b = layout.block_size();
    const double j = params.j();
    const double coupling = 2.0 * params.lambda / std::sqrt(static_cast<double>(params.n_atoms));

    std::vector<Eigen::MatrixXd> diag;
    std::vector<Eigen::MatrixXd> upper;
    double asymmetry = 0.0;
    for (int s = 0; s < layout.n_sectors(); ++s) {
        const double m = layout.m_of(s);
        Eigen::MatrixXd block = Eigen::MatrixXd::Zero(b, b);
        for (int l = 0; l < b; ++l) {
            block(l, l) = params.omega * l;
            if (l + 1 < b) {
                const double v = coupling * m * std::sqrt(l + 1.0);
                block(l, l + 1) = v;
                block(l + 1, l) = v;
            }
        }
        diag.push_back(std::move(block));
        if (s + 1 < layout.n_sectors()) {
            const double up = -params.delta * ladder_coeff(j, m, +1);
            const double down = -params.delta * ladder_coeff(j, m + 1.0, -1);
            asymmetry = std::max(asymmetry, std::abs(up - down));
            upper.emplace_back(up * Eigen::MatrixXd::Identity(b, b));
        }
    }
    BlockHamiltonian h(params, n_tr, Basis::DFS, Parity::Full, std::move(diag), std::move(upper));
    h.set_assembly_asymmetry(asymmetry);
    return h;
}

BlockHamiltonian assemble(Basis basis, const ModelParams& params, int n_tr, const AssemblyOptions& opts) {
    return basis == Basis::DCS ? assemble_dcs(params, n_tr, opts) : assemble_dfs(params, n_tr, opts);
}

std::size_t ParityOperator::image(std::size_t flat) const {
    const auto [sector, k] = layout_.unflat(flat);
    return layout_.flat(layout_.n_atoms() - sector, k);
}

double ParityOperator::amplitude(std::size_t flat) const { return sign_of_boson(layout_.unflat(flat).k); }

Eigen::VectorXd ParityOperator::apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y(x.size());
    for (std::size_t i = 0; i < layout_.dim(); ++i)
        y[static_cast<Eigen::Index>(image(i))] = amplitude(i) * x[static_cast<Eigen::Index>(i)];
    return y;
}

ParityOperator parity_operator(int n_atoms, int n_tr) { return {n_atoms, n_tr}; }

namespace {

// Columns of the projector restricted to one full sector.
struct SectorPiece {
    int sector;
    Eigen::MatrixXd map;  // block_size x reduced_size
};

std::vector<SectorPiece> reduced_block_pieces(int n_atoms, int block, int full_sector, double eps) {
    const int mirror = n_atoms - full_sector;
    if (mirror == full_sector) {
        std::vector<int> keep;
        for (int k = 0; k < block; ++k)
            if (sign_of_boson(k) == eps) keep.push_back(k);
        Eigen::MatrixXd sel = Eigen::MatrixXd::Zero(block, static_cast<Eigen::Index>(keep.size()));
        for (std::size_t c = 0; c < keep.size(); ++c) sel(keep[c], static_cast<Eigen::Index>(c)) = 1.0;
        return {{full_sector, std::move(sel)}};
    }
    const double r = 1.0 / std::sqrt(2.0);
    Eigen::MatrixXd a = r * Eigen::MatrixXd::Identity(block, block);
    Eigen::MatrixXd bmap = Eigen::MatrixXd::Zero(block, block);
    for (int k = 0; k < block; ++k) bmap(k, k) = eps * sign_of_boson(k) * r;
    return {{full_sector, std::move(a)}, {mirror, std::move(bmap)}};
}

Eigen::MatrixXd full_block(const BlockHamiltonian& h, int s, int t) {
    if (s == t) return h.diag_block(s);
    if (t == s + 1) return h.upper_block(s);
    if (s == t + 1) return h.upper_block(t).transpose();
    const auto b = h.diag_block(0).rows();
    return Eigen::MatrixXd::Zero(b, b);
}

}  // namespace

std::size_t parity_sector_dim(int n_atoms, int n_tr, Parity sector) {
    const SectorLayout layout(n_atoms, n_tr);
    if (sector == Parity::Full) return layout.dim();
    const auto b = static_cast<std::size_t>(layout.block_size());
    const auto pairs = static_cast<std::size_t>((n_atoms + 1) / 2);
    if (n_atoms % 2 == 1) return pairs * b;
    const std::size_t even_k = b / 2 + b % 2;
    return pairs * b + (sector == Parity::Even ? even_k : b - even_k);
}

BlockHamiltonian project_parity(const BlockHamiltonian& full, Parity sector) {
    if (full.parity() != Parity::Full) throw std::invalid_argument("project_parity: matrix already projected");
    if (sector == Parity::Full) return full;

    const int n_atoms = full.params().n_atoms;
    const SectorLayout layout = full.layout();
    const int b = layout.block_size();
    const double eps = sector == Parity::Even ? 1.0 : -1.0;
    const int first = (n_atoms + 1) / 2;  // smallest sector index with m >= 0
    const int n_reduced = n_atoms + 1 - first;

    std::vector<std::vector<SectorPiece>> pieces;
    for (int r = 0; r < n_reduced; ++r) pieces.push_back(reduced_block_pieces(n_atoms, b, first + r, eps));

    const auto project = [&](int r, int t) {
        const auto cols = pieces[static_cast<std::size_t>(t)].front().map.cols();
        const auto rows = pieces[static_cast<std::size_t>(r)].front().map.cols();
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
        for (const auto& pr : pieces[static_cast<std::size_t>(r)])
            for (const auto& pt : pieces[static_cast<std::size_t>(t)])
                if (std::abs(pr.sector - pt.sector) <= 1)
                    out.noalias() += pr.map.transpose() * full_block(full, pr.sector, pt.sector) * pt.map;
        return out;
    };

    std::vector<Eigen::MatrixXd> diag;
    std::vector<Eigen::MatrixXd> upper;
    std::vector<BlockHamiltonian::Embedding> embedding;
    for (int r = 0; r < n_reduced; ++r) {
        Eigen::MatrixXd d = project(r, r);
        diag.push_back(0.5 * (d + d.transpose()));
        if (r + 1 < n_reduced) upper.push_back(project(r, r + 1));

        const auto& ps = pieces[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < ps.front().map.cols(); ++c) {
            BlockHamiltonian::Embedding e{0, 0.0, BlockHamiltonian::Embedding::npos, 0.0};
            bool have_first = false;
            for (const auto& p : ps) {
                for (Eigen::Index k = 0; k < b; ++k) {
                    const double v = p.map(k, c);
                    if (v == 0.0) continue;
                    const auto flat = layout.flat(p.sector, static_cast<int>(k));
                    if (!have_first) {
                        e.first = flat;
                        e.first_coeff = v;
                        have_first = true;
                    } else {
                        e.second = flat;
                        e.second_coeff = v;
                    }
                }
            }
            embedding.push_back(e);
        }
    }
    BlockHamiltonian h(full.params(), full.n_tr(), full.basis(), sector, std::move(diag), std::move(upper));
    h.set_embedding(std::move(embedding));
    h.set_assembly_asymmetry(full.assembly_asymmetry());
    return h;
}

}  // namespace dicke
