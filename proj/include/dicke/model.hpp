// model.hpp: Dicke model parameters, Dicke-state ladder coefficients and
// the sector/boson index layout shared by every basis.

#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>

namespace dicke {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Physics configuration. Derived quantities are computed on demand.
//
// All matrices are built in the frame rotated by pi/2 about the y axis:
//   H = omega a^+ a - (Delta/2)(J_+ + J_-) + (2 lambda / sqrt(N)) (a^+ + a) J_z
// The original-frame J_z maps to -J_x here (the lambda = 0 ground state has
// J_x = +j), and J_y is unchanged.
struct ModelParams {
    int n_atoms{1};
    double omega{1.0};
    double delta{1.0};
    double lambda{0.0};

    double j() const { return 0.5 * n_atoms; }
    double dimensionless_d() const { return delta / omega; }
    double alpha() const { return 4.0 * lambda * lambda / (delta * omega); }

    // Displacement of sector m: g_m = 2 lambda m / (omega sqrt(N)).
    double displacement(double m) const;
    // Inter-sector step G = g_{m+1} - g_m.
    double displacement_step() const;

    // Throws DomainError unless N >= 1, omega > 0, delta > 0, lambda >= 0.
    void validate() const;

    static ModelParams from_alpha(int n_atoms, double omega, double delta, double alpha);
};

// Flat layout of the (n, k) product basis: n in {-j..j}, k in {0..n_tr}.
class SectorLayout {
public:
    SectorLayout(int n_atoms, int n_tr);

    int n_atoms() const { return n_atoms_; }
    int n_tr() const { return n_tr_; }
    int n_sectors() const { return n_atoms_ + 1; }
    int block_size() const { return n_tr_ + 1; }
    std::size_t dim() const {
        return static_cast<std::size_t>(n_sectors()) * static_cast<std::size_t>(block_size());
    }

    // Sector position s = n + j in {0..N}.
    double m_of(int sector) const { return sector - 0.5 * n_atoms_; }

    std::size_t flat(int sector, int k) const {
        return static_cast<std::size_t>(sector) * static_cast<std::size_t>(block_size()) +
               static_cast<std::size_t>(k);
    }
    struct Index {
        int sector;
        int k;
    };
    Index unflat(std::size_t flat) const;

private:
    int n_atoms_;
    int n_tr_;
};

// j_m^{+/-} = (1/2) sqrt(j(j+1) - m(m +/- 1)); zero when m +/- 1 leaves the multiplet.
double ladder_coeff(double j, double m, int sign);

// lambda_c = sqrt(omega Delta) / 2, the coupling at which alpha = 1.
double critical_coupling(double omega, double delta);

// Flat key=value parameter map (blank lines and '#' comments ignored).
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(const std::string& text);

// Keys: n_atoms, omega, delta, and exactly one of lambda | alpha.
ModelParams params_from_key_values(const KeyValues& kv);

}  // namespace dicke
