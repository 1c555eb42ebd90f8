#include "dicke/model.hpp"

#include <cmath>
#include <sstream>

namespace dicke {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_real(const KeyValues& kv, const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError("missing key '" + key + "'");
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(key);
        return v;
    } catch (const std::logic_error&) {
        throw ConfigError("key '" + key + "': not a number: '" + it->second + "'");
    }
}

}  // namespace

double ModelParams::displacement(double m) const {
    return 2.0 * lambda * m / (omega * std::sqrt(static_cast<double>(n_atoms)));
}

double ModelParams::displacement_step() const { return displacement(1.0); }

void ModelParams::validate() const {
    if (n_atoms < 1) throw DomainError("n_atoms must be positive");
    if (!(omega > 0.0)) throw DomainError("omega must be positive");
    if (!(delta > 0.0)) throw DomainError("delta must be positive");
    if (!(lambda >= 0.0)) throw DomainError("lambda must be non-negative");
}

ModelParams ModelParams::from_alpha(int n_atoms, double omega, double delta, double alpha) {
    if (!(alpha >= 0.0)) throw DomainError("alpha must be non-negative");
    ModelParams p{n_atoms, omega, delta, 0.5 * std::sqrt(alpha * delta * omega)};
    p.validate();
    return p;
}

SectorLayout::SectorLayout(int n_atoms, int n_tr) : n_atoms_(n_atoms), n_tr_(n_tr) {
    if (n_atoms < 1) throw DomainError("n_atoms must be positive");
    if (n_tr < 0) throw DomainError("truncation must be non-negative");
}

SectorLayout::Index SectorLayout::unflat(std::size_t flat) const {
    const auto b = static_cast<std::size_t>(block_size());
    return {static_cast<int>(flat / b), static_cast<int>(flat % b)};
}

double ladder_coeff(double j, double m, int sign) {
    if (std::abs(m) > j + 1e-12) throw DomainError("ladder_coeff: |m| > j");
    const double target = m + (sign > 0 ? 1.0 : -1.0);
    if (std::abs(target) > j + 1e-12) return 0.0;
    const double arg = j * (j + 1.0) - m * target;
    return 0.5 * std::sqrt(std::max(arg, 0.0));
}

double critical_coupling(double omega, double delta) {
    if (!(omega > 0.0) || !(delta > 0.0))
        throw DomainError("critical_coupling: omega and delta must be positive");
    return 0.5 * std::sqrt(omega * delta);
}

KeyValues parse_key_values(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        if (kv.count(key))
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        kv.emplace(std::move(key), std::move(value));
    }
    return kv;
}

ModelParams params_from_key_values(const KeyValues& kv) {
    const bool has_lambda = kv.count("lambda") > 0;
    const bool has_alpha = kv.count("alpha") > 0;
    if (has_lambda == has_alpha) throw ConfigError("give exactly one of 'lambda' or 'alpha'");

    const double n = parse_real(kv, "n_atoms");
    if (n != std::floor(n) || n < 1) throw ConfigError("key 'n_atoms': must be a positive integer");

    ModelParams p;
    p.n_atoms = static_cast<int>(n);
    p.omega = parse_real(kv, "omega");
    p.delta = parse_real(kv, "delta");
    try {
        if (has_lambda) {
            p.lambda = parse_real(kv, "lambda");
            p.validate();
        } else {
            p = ModelParams::from_alpha(p.n_atoms, p.omega, p.delta, parse_real(kv, "alpha"));
        }
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    return p;
}

}  // namespace dicke
