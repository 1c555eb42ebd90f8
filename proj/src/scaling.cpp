#include "dicke/scaling.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

namespace dicke {

std::string_view to_string(ScalingObservable o) {
    switch (o) {
        case ScalingObservable::Berry: return "berry";
        case ScalingObservable::Concurrence: return "concurrence";
        default: return "energy";
    }
}

ScalingObservable scaling_observable_from_string(std::string_view s) {
    if (s == "energy") return ScalingObservable::Energy;
    if (s == "berry") return ScalingObservable::Berry;
    if (s == "concurrence") return ScalingObservable::Concurrence;
    throw ConfigError("unknown observable '" + std::string(s) + "' (expected energy|berry|concurrence)");
}

ScalingSeries make_series(ScalingObservable observable, double d, double coupling, std::vector<int> n,
                          std::vector<double> values) {
    if (n.size() != values.size()) throw std::invalid_argument("make_series: size mismatch");
    for (std::size_t i = 1; i < n.size(); ++i)
        if (n[i] <= n[i - 1]) throw std::invalid_argument("make_series: N must be strictly increasing");
    std::ostringstream bad;
    for (std::size_t i = 0; i < n.size(); ++i)
        if (!(values[i] > 0.0)) bad << " N=" << n[i] << " value=" << format_real(values[i]);
    if (!bad.str().empty())
        throw std::domain_error("non-positive values in " + std::string(to_string(observable)) +
                                " series:" + bad.str());

    ScalingSeries s;
    s.observable = observable;
    s.d = d;
    s.coupling = coupling;
    s.n = std::move(n);
    s.values = std::move(values);
    for (std::size_t i = 0; i + 1 < s.n.size(); ++i) {
        const double n0 = s.n[i];
        const double n1 = s.n[i + 1];
        s.inv_n_mid.push_back(1.0 / std::sqrt(n0 * n1));
        s.slopes.push_back(std::log(s.values[i + 1] / s.values[i]) / std::log(n1 / n0));
    }
    return s;
}

ExponentEstimate extrapolate_exponent(const ScalingSeries& s) {
    if (s.n.size() < 4) throw std::invalid_argument("extrapolate_exponent: need at least 4 points");
    const auto& x = s.inv_n_mid;
    const auto& y = s.slopes;
    const double m = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = m * sxx - sx * sx;
    const double slope = (m * sxy - sx * sy) / det;
    const double intercept = (sy - slope * sx) / m;
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (intercept + slope * x[i]);
        ssr += r * r;
    }
    const double sigma2 = m > 2 ? ssr / (m - 2) : 0.0;
    const double se = std::sqrt(std::max(sigma2 * sxx / det, 0.0));
    const double drift = std::abs(y[y.size() - 1] - y[y.size() - 2]);
    return {intercept, std::hypot(se, drift)};
}

double log_log_slope(const std::vector<int>& n, const std::vector<double>& values) {
    if (n.size() != values.size() || n.size() < 2) throw std::invalid_argument("log_log_slope: need >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (!(values[i] > 0.0)) throw std::domain_error("log_log_slope: non-positive value");
        const double x = std::log(static_cast<double>(n[i]));
        const double y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

namespace {

struct LinearPart {
    double c_inf;
    double amplitude;
    double ssr;
};

// For fixed beta, c = c_inf - a N^{-beta} is linear in (c_inf, a).
LinearPart solve_linear(const std::vector<int>& n, const std::vector<double>& c, double beta) {
    const auto rows = static_cast<Eigen::Index>(n.size());
    Eigen::MatrixXd a(rows, 2);
    Eigen::VectorXd b(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        a(i, 0) = 1.0;
        a(i, 1) = -std::pow(static_cast<double>(n[static_cast<std::size_t>(i)]), -beta);
        b[i] = c[static_cast<std::size_t>(i)];
    }
    const Eigen::Vector2d x = a.colPivHouseholderQr().solve(b);
    return {x[0], x[1], (a * x - b).squaredNorm()};
}

}  // namespace

OffsetPowerLawFit fit_offset_power_law(const std::vector<int>& n, const std::vector<double>& c) {
    if (n.size() != c.size() || n.size() < 3) throw FitError("offset power-law fit needs at least 3 points");
    constexpr double lo = 0.01;
    constexpr double hi = 1.99;
    constexpr int grid = 198;
    int best = 0;
    double best_ssr = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid; ++i) {
        const double beta = lo + (hi - lo) * i / grid;
        const double ssr = solve_linear(n, c, beta).ssr;
        if (ssr < best_ssr) {
            best_ssr = ssr;
            best = i;
        }
    }
    if (best == 0 || best == grid) {
        std::ostringstream msg;
        msg << "offset power-law fit: beta at search boundary " << lo + (hi - lo) * best / grid
            << " (ssr " << best_ssr << ")";
        throw FitError(msg.str());
    }
    const double step = (hi - lo) / grid;
    const double center = lo + step * best;
    const auto [beta, ssr] = boost::math::tools::brent_find_minima(
        [&](double b) { return solve_linear(n, c, b).ssr; }, center - step, center + step, 52);
    const LinearPart lin = solve_linear(n, c, beta);

    OffsetPowerLawFit fit;
    fit.c_inf = lin.c_inf;
    fit.amplitude = lin.amplitude;
    fit.beta = beta;
    fit.rms_residual = std::sqrt(ssr / static_cast<double>(n.size()));

    // Gauss-Newton covariance for the three parameters.
    const auto rows = static_cast<Eigen::Index>(n.size());
    Eigen::MatrixXd jac(rows, 3);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double nn = n[static_cast<std::size_t>(i)];
        const double p = std::pow(nn, -beta);
        jac(i, 0) = 1.0;
        jac(i, 1) = -p;
        jac(i, 2) = lin.amplitude * p * std::log(nn);
    }
    if (rows > 3) {
        const double sigma2 = ssr / static_cast<double>(rows - 3);
        const Eigen::Matrix3d cov = sigma2 * (jac.transpose() * jac).inverse();
        fit.beta_error = std::sqrt(std::max(cov(2, 2), 0.0));
    }
    return fit;
}

std::vector<int> power_of_two_grid(int lo, int hi) {
    std::vector<int> out;
    for (int p = lo; p <= hi; ++p) out.push_back(1 << p);
    return out;
}

std::vector<SweepPoint> critical_sweep(double d, const std::vector<int>& n_list, const ScalingOptions& opts) {
    const double omega = opts.omega;
    const double delta = d * omega;
    const double lambda = critical_coupling(omega, delta);

    std::vector<SweepPoint> points(n_list.size());
    std::vector<std::exception_ptr> errors(n_list.size());
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i = next++; i < n_list.size(); i = next++) {
            try {
                const ModelParams p{n_list[i], omega, delta, lambda};
                points[i] = {p, converge(p, opts.converge)};
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int workers = std::max(1, std::min<int>(opts.workers, static_cast<int>(n_list.size())));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i]) continue;
        const std::string where = "sweep point N=" + std::to_string(n_list[i]) + " D=" + format_real(d) + ": ";
        try {
            std::rethrow_exception(errors[i]);
        } catch (const ResourceError& e) {
            throw ResourceError(where + e.what());
        } catch (const std::exception& e) {
            throw std::runtime_error(where + e.what());
        }
    }
    return points;
}

namespace {

std::vector<int> sweep_n(const std::vector<SweepPoint>& sweep) {
    std::vector<int> n;
    for (const auto& p : sweep) n.push_back(p.params.n_atoms);
    return n;
}

double sweep_coupling(const std::vector<SweepPoint>& sweep) {
    return sweep.empty() ? 0.0 : sweep.front().params.lambda;
}

}  // namespace

ScalingSeries energy_deviation_series(double d, const std::vector<SweepPoint>& sweep) {
    std::vector<double> v;
    for (const auto& p : sweep) {
        const double e_per = p.result.values.energy / (p.params.n_atoms * p.params.delta);
        v.push_back(-(e_per + 0.5));
    }
    auto s = make_series(ScalingObservable::Energy, d, sweep_coupling(sweep), sweep_n(sweep), std::move(v));
    if (s.n.size() >= 4) s.exponent = extrapolate_exponent(s);
    return s;
}

ScalingSeries energy_deviation_series(double d, const std::vector<int>& n_list, const ScalingOptions& opts) {
    return energy_deviation_series(d, critical_sweep(d, n_list, opts));
}

ScalingSeries berry_deviation_series(double d, const std::vector<SweepPoint>& sweep) {
    std::vector<double> v;
    for (const auto& p : sweep) v.push_back(p.result.values.berry_deviation);
    auto s = make_series(ScalingObservable::Berry, d, sweep_coupling(sweep), sweep_n(sweep), std::move(v));
    if (s.n.size() >= 4) s.exponent = extrapolate_exponent(s);
    return s;
}

ScalingSeries berry_deviation_series(double d, const std::vector<int>& n_list, const ScalingOptions& opts) {
    return berry_deviation_series(d, critical_sweep(d, n_list, opts));
}

ScalingSeries concurrence_deviation_series(double d, const std::vector<SweepPoint>& sweep, CInfMode mode,
                                           double supplied_c_inf) {
    const auto n = sweep_n(sweep);
    std::vector<double> c;
    for (const auto& p : sweep) c.push_back(p.result.values.concurrence);

    std::optional<OffsetPowerLawFit> fit;
    double c_inf = supplied_c_inf;
    if (mode == CInfMode::Fit) {
        fit = fit_offset_power_law(n, c);
        c_inf = fit->c_inf;
    }
    std::vector<double> v;
    for (double ci : c) v.push_back(c_inf - ci);
    auto s = make_series(ScalingObservable::Concurrence, d, sweep_coupling(sweep), n, std::move(v));
    s.fit = fit;
    if (mode == CInfMode::Fit) {
        double drift = 0.0;
        if (n.size() >= 5) {
            const std::vector<int> n_tail(n.begin() + 1, n.end());
            const std::vector<double> c_tail(c.begin() + 1, c.end());
            drift = std::abs(fit_offset_power_law(n_tail, c_tail).beta - fit->beta);
        }
        s.exponent = {-fit->beta, std::hypot(fit->beta_error, drift)};
    } else if (s.n.size() >= 4) {
        s.exponent = extrapolate_exponent(s);
    }
    return s;
}

ScalingSeries concurrence_deviation_series(double d, const std::vector<int>& n_list, CInfMode mode,
                                           double supplied_c_inf, const ScalingOptions& opts) {
    return concurrence_deviation_series(d, critical_sweep(d, n_list, opts), mode, supplied_c_inf);
}

std::string series_csv(const ScalingSeries& s) {
    std::ostringstream out;
    out << "N,value\n";
    for (std::size_t i = 0; i < s.n.size(); ++i) out << s.n[i] << ',' << format_real(s.values[i]) << '\n';
    return out.str();
}

std::string slopes_csv(const ScalingSeries& s) {
    std::ostringstream out;
    out << "inv_N_mid,slope\n";
    for (std::size_t i = 0; i < s.slopes.size(); ++i)
        out << format_real(s.inv_n_mid[i]) << ',' << format_real(s.slopes[i]) << '\n';
    return out.str();
}

}  // namespace dicke
