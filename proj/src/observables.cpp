#include "dicke/observables.hpp"

#include "dicke/dcs_basis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace dicke {

namespace {

// Overlap kernel between boson frames of sectors s and s + shift
// (bra s, ket s + shift). Identity in the bare Fock basis.
std::shared_ptr<const OverlapKernel> frame_kernel(const GroundState& gs, int shift) {
    const double step = gs.basis == Basis::DCS ? gs.params.displacement_step() : 0.0;
    return cached_kernel(shift * step, gs.n_tr, KernelConvention::Generic);
}

Eigen::Map<const Eigen::VectorXd> sector_coeffs(const GroundState& gs, int sector) {
    const SectorLayout layout = gs.layout();
    return {gs.coefficients.data() + layout.flat(sector, 0), layout.block_size()};
}

// <phi_{s + shift} | phi_s> for every s with s + shift in range.
std::vector<double> frame_overlaps(const GroundState& gs, int shift) {
    const SectorLayout layout = gs.layout();
    // _{s+shift}<l|k>_s = kernel at displacement (s - (s + shift)) G.
    const auto kernel = frame_kernel(gs, -shift);
    std::vector<double> out(static_cast<std::size_t>(layout.n_sectors()), 0.0);
    for (int s = 0; s + shift < layout.n_sectors(); ++s)
        out[static_cast<std::size_t>(s)] =
            sector_coeffs(gs, s + shift).dot(kernel->table * sector_coeffs(gs, s));
    return out;
}

// Extended-precision sum: at large N the sum rule amplifies the norm's rounding by j(j+1).
double sector_weight(const GroundState& gs, int s) {
    long double w = 0.0L;
    for (const double x : sector_coeffs(gs, s)) w += static_cast<long double>(x) * x;
    return static_cast<double>(w);
}

}  // namespace

double expect_jz_squared(const GroundState& gs) {
    const SectorLayout layout = gs.layout();
    double sum = 0.0;
    for (int s = 0; s < layout.n_sectors(); ++s) {
        const double m = layout.m_of(s);
        sum += m * m * sector_weight(gs, s);
    }
    return sum;
}

double expect_jx(const GroundState& gs) {
    const SectorLayout layout = gs.layout();
    const double j = gs.params.j();
    const auto overlaps = frame_overlaps(gs, 1);
    double jplus = 0.0;
    for (int s = 0; s + 1 < layout.n_sectors(); ++s)
        jplus += 2.0 * ladder_coeff(j, layout.m_of(s), +1) * overlaps[static_cast<std::size_t>(s)];
    return jplus;
}

double expect_jplus_squared(const GroundState& gs) {
    const SectorLayout layout = gs.layout();
    const double j = gs.params.j();
    const auto overlaps = frame_overlaps(gs, 2);
    double sum = 0.0;
    for (int s = 0; s + 2 < layout.n_sectors(); ++s) {
        const double m = layout.m_of(s);
        sum += 4.0 * ladder_coeff(j, m, +1) * ladder_coeff(j, m + 1.0, +1) * overlaps[static_cast<std::size_t>(s)];
    }
    return sum;
}

double expect_jy_squared(const GroundState& gs) {
    const double j = gs.params.j();
    const double jp2 = expect_jplus_squared(gs);
    return (2.0 * (j * (j + 1.0) - expect_jz_squared(gs)) - 2.0 * jp2) / 4.0;
}

SpinSquares spin_squares_by_norm(const GroundState& gs) {
    const SectorLayout layout = gs.layout();
    const double j = gs.params.j();
    const auto cross = frame_overlaps(gs, 2);  // <phi_{m+1}|phi_{m-1}> indexed by m-1
    long double jx2 = 0.0L;
    long double jy2 = 0.0L;
    long double jz2 = 0.0L;
    for (int s = 0; s < layout.n_sectors(); ++s) {
        const double m = layout.m_of(s);
        // Component in sector m: up |phi_{m-1}> + down |phi_{m+1}>.
        const double up = s > 0 ? ladder_coeff(j, m - 1.0, +1) : 0.0;
        const double down = s + 1 < layout.n_sectors() ? ladder_coeff(j, m + 1.0, -1) : 0.0;
        const double w_up = s > 0 ? sector_weight(gs, s - 1) : 0.0;
        const double w_down = s + 1 < layout.n_sectors() ? sector_weight(gs, s + 1) : 0.0;
        const double c = (s > 0 && s + 1 < layout.n_sectors()) ? cross[static_cast<std::size_t>(s - 1)] : 0.0;
        const double diag = up * up * w_up + down * down * w_down;
        jx2 += diag + 2.0 * up * down * c;
        jy2 += diag - 2.0 * up * down * c;
        jz2 += m * m * sector_weight(gs, s);
    }
    return {static_cast<double>(jx2), static_cast<double>(jy2), static_cast<double>(jz2)};
}

double magnetization_x(const GroundState& gs) { return expect_jx(gs) / gs.params.j(); }

double berry_deviation(const GroundState& gs) { return 1.0 - magnetization_x(gs); }

double berry_phase(const GroundState& gs) { return -2.0 * std::numbers::pi * expect_jx(gs); }

double concurrence(const GroundState& gs) {
    return 1.0 - 4.0 * expect_jy_squared(gs) / static_cast<double>(gs.params.n_atoms);
}

Observables measure(const GroundState& gs) {
    Observables o;
    o.energy = gs.energy;
    const double jx = expect_jx(gs);
    o.berry_deviation = 1.0 - jx / gs.params.j();
    o.berry_phase = -2.0 * std::numbers::pi * jx;
    o.jy2 = expect_jy_squared(gs);
    o.concurrence = 1.0 - 4.0 * o.jy2 / static_cast<double>(gs.params.n_atoms);
    return o;
}

double observable_change(const Observables& a, const Observables& b, double unit_floor) {
    const auto rel = [](double x, double y, double floor) {
        const double denom = std::max({std::abs(x), std::abs(y), floor});
        return denom > 0.0 ? std::abs(x - y) / denom : 0.0;
    };
    return std::max({rel(a.energy, b.energy, 0.0), rel(a.berry_deviation, b.berry_deviation, unit_floor),
                     rel(a.jy2, b.jy2, 0.0), rel(a.concurrence, b.concurrence, unit_floor)});
}

ConvergedResult converge(const ModelParams& params, const ConvergeOptions& opts) {
    params.validate();
    if (!(opts.threshold > 0.0)) throw std::invalid_argument("converge: threshold must be positive");
    if (opts.schedule.empty()) throw std::invalid_argument("converge: empty schedule");
    for (std::size_t i = 1; i < opts.schedule.size(); ++i)
        if (opts.schedule[i] <= opts.schedule[i - 1])
            throw std::invalid_argument("converge: schedule must be strictly increasing");

    ConvergedResult result;
    for (const int n_tr : opts.schedule) {
        const BlockHamiltonian full = assemble(opts.basis, params, n_tr, opts.assembly);
        GroundState gs = opts.parity == Parity::Full ? ground_state(full, opts.solver)
                                                     : ground_state(project_parity(full, opts.parity), opts.solver);
        const Observables values = measure(gs);
        result.history.push_back({n_tr, values, gs.residual});
        if (result.history.size() >= 2) {
            const double change = observable_change(result.history[result.history.size() - 2].values, values, opts.unit_floor);
            if (change < opts.threshold) {
                result.values = values;
                result.n_tr_used = n_tr;
                result.relative_change = change;
                result.state = std::move(gs);
                return result;
            }
        }
    }
    throw ScheduleExhausted("truncation schedule exhausted before convergence", std::move(result.history));
}

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string observables_csv_header() {
    return "N,omega,delta,lambda,alpha,Ntr_used,E0,E0_scaled,B_N,berry_gamma,Jy2,C_N,parity,residual";
}

std::string observables_csv_row(const ModelParams& p, const ConvergedResult& r) {
    std::ostringstream out;
    out << p.n_atoms << ',' << format_real(p.omega) << ',' << format_real(p.delta) << ','
        << format_real(p.lambda) << ',' << format_real(p.alpha()) << ',' << r.n_tr_used << ','
        << format_real(r.values.energy) << ',' << format_real(r.values.energy / (p.j() * p.delta)) << ','
        << format_real(r.values.berry_deviation) << ',' << format_real(r.values.berry_phase) << ','
        << format_real(r.values.jy2) << ',' << format_real(r.values.concurrence) << ','
        << to_string(r.state.parity) << ',' << format_real(r.state.residual);
    return out.str();
}

}  // namespace dicke
