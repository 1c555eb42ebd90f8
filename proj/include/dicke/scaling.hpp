// scaling.hpp: finite-size sweeps at the critical coupling and exponent
// extraction from local log-log slopes.

#pragma once

#include "dicke/observables.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dicke {

enum class ScalingObservable { Energy, Berry, Concurrence };

std::string_view to_string(ScalingObservable o);
ScalingObservable scaling_observable_from_string(std::string_view s);

struct ExponentEstimate {
    double exponent{0.0};
    double uncertainty{0.0};
};

// Offset power law c(N) = c_inf - amplitude * N^{-beta}.
struct OffsetPowerLawFit {
    double c_inf{0.0};
    double amplitude{0.0};
    double beta{0.0};
    double beta_error{0.0};
    double rms_residual{0.0};
};

struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScalingSeries {
    ScalingObservable observable{ScalingObservable::Energy};
    double d{1.0};          // Delta / omega
    double coupling{0.0};   // lambda used for every point
    std::vector<int> n;     // strictly increasing
    std::vector<double> values;  // strictly positive
    std::vector<double> inv_n_mid;  // 1 / sqrt(N_i N_{i+1})
    std::vector<double> slopes;     // d ln(value) / d ln(N)
    ExponentEstimate exponent;
    std::optional<OffsetPowerLawFit> fit;  // concurrence joint fit
};

// Builds the slope table; throws std::domain_error naming every non-positive value.
ScalingSeries make_series(ScalingObservable observable, double d, double coupling, std::vector<int> n,
                          std::vector<double> values);

// Linear fit of local slopes against 1/N_mid; the intercept is the exponent.
// Uncertainty combines the intercept standard error with the drift of the last two slopes.
ExponentEstimate extrapolate_exponent(const ScalingSeries& series);

// Least-squares slope of ln(value) against ln(N).
double log_log_slope(const std::vector<int>& n, const std::vector<double>& values);

// Joint least-squares fit of c_inf, amplitude and beta (beta in (0, 2)).
OffsetPowerLawFit fit_offset_power_law(const std::vector<int>& n, const std::vector<double>& c);

struct ScalingOptions {
    ConvergeOptions converge{};
    int workers{1};
    double omega{1.0};

    // Energies are needed to 1e-8 for the deviation series. B_N and C_N are
    // held to 1e-8 absolute, which Lanczos eigenvectors near the critical gap
    // still resolve. At large D the squeezed boson needs N_tr well past 96.
    ScalingOptions() {
        converge.threshold = 1e-8;
        converge.unit_floor = 1.0;
        converge.solver.tol = 1e-12;
        converge.schedule = {4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128, 192, 256};
    }
};

struct SweepPoint {
    ModelParams params;
    ConvergedResult result;
};

// One converged solve per N at lambda_c(omega, Delta = D omega). Points are
// independent; the output order follows n_list regardless of completion order.
std::vector<SweepPoint> critical_sweep(double d, const std::vector<int>& n_list, const ScalingOptions& opts = {});

// -(E0 / (N D omega) + 1/2): depth of the energy below its thermodynamic asymptote.
ScalingSeries energy_deviation_series(double d, const std::vector<SweepPoint>& sweep);
ScalingSeries energy_deviation_series(double d, const std::vector<int>& n_list, const ScalingOptions& opts = {});

// B_N at lambda_c.
ScalingSeries berry_deviation_series(double d, const std::vector<SweepPoint>& sweep);
ScalingSeries berry_deviation_series(double d, const std::vector<int>& n_list, const ScalingOptions& opts = {});

enum class CInfMode { Fit, Supplied };

// C_inf - C_N at lambda_c. In Fit mode the exponent is -beta of the joint fit;
// in Supplied mode it is extrapolated from local slopes.
ScalingSeries concurrence_deviation_series(double d, const std::vector<SweepPoint>& sweep, CInfMode mode,
                                           double supplied_c_inf = 0.0);
ScalingSeries concurrence_deviation_series(double d, const std::vector<int>& n_list, CInfMode mode,
                                           double supplied_c_inf = 0.0, const ScalingOptions& opts = {});

// Powers of two 2^lo .. 2^hi.
std::vector<int> power_of_two_grid(int lo, int hi);

std::string series_csv(const ScalingSeries& s);   // N,value
std::string slopes_csv(const ScalingSeries& s);   // inv_N_mid,slope

}  // namespace dicke
