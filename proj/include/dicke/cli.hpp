// cli.hpp: run configuration, the four commands and the on-disk result store.
//
// Commands are pure functions of RunConfig; the front end in tools/ only
// gathers flags into key=value pairs and maps exceptions to exit codes.

#pragma once

#include "dicke/hamiltonian.hpp"
#include "dicke/model.hpp"
#include "dicke/scaling.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dicke {

inline constexpr int kCsvSchemaVersion = 1;

enum class Command { Solve, Compare, Converge, Scaling };

std::string_view to_string(Command c);
Command command_from_string(std::string_view s);

struct RunConfig {
    Command command{Command::Solve};
    ModelParams params{};
    bool alpha_given{false};
    double alpha{0.0};

    std::vector<double> lambdas;              // compare, converge
    std::vector<int> n_list;                  // compare (N sweep), converge, scaling
    std::vector<std::pair<Basis, int>> cells; // compare
    std::vector<int> n_tr_list;               // converge
    int reference_n_tr{48};                   // converge
    std::vector<double> d_list;               // scaling
    std::vector<ScalingObservable> observables{ScalingObservable::Energy};
    CInfMode c_inf_mode{CInfMode::Fit};
    double c_inf{0.0};

    Basis basis{Basis::DCS};
    std::vector<int> schedule{4, 6, 8, 12, 16, 24, 32, 48, 64, 96};
    double threshold{1e-6};
    Parity parity{Parity::Even};
    std::uint64_t seed{1};
    bool dense_oracle{false};

    // Not part of the digest: they do not change results.
    int workers{1};
    std::string output_dir;
    std::string dump_matrix;
};

// Builds a config from key=value pairs (config-file keys equal flag names
// with '-' replaced by '_'). Unknown keys and bad values throw ConfigError
// naming the key.
RunConfig config_from_key_values(Command command, const KeyValues& kv);

// Canonical key=value text; config_from_key_values(parse_key_values(...)) round-trips it.
std::string serialize(const RunConfig& config);

// FNV-1a 64 of the canonical text with the result-neutral keys removed.
std::string config_digest(const RunConfig& config);

// "16..1024" (powers of two) or "16,32,48".
std::vector<int> parse_int_list(std::string_view key, std::string_view text);
// "0,0.5,1" or "lo..hi:count" (count evenly spaced points, ends included).
std::vector<double> parse_real_list(std::string_view key, std::string_view text);

struct CommandOutput {
    std::string text;                           // printed on stdout
    std::map<std::string, std::string> files;  // name -> CSV contents
    bool all_ok{true};                         // false when some grid cell failed
};

CommandOutput run_solve(const RunConfig& config);
CommandOutput run_compare(const RunConfig& config);
CommandOutput run_converge(const RunConfig& config);
CommandOutput run_scaling(const RunConfig& config);
CommandOutput run_command(const RunConfig& config);

// Version string baked in at configure time (git describe, or the project version).
std::string_view version_string();

// Append-only store: <root>/manifest.csv plus <root>/runs/<digest>/.
class ResultStore {
public:
    explicit ResultStore(std::filesystem::path root);

    // $DICKE_RESULTS, else ./dicke-results.
    static std::filesystem::path default_root();

    struct Entry {
        std::string digest;
        std::string timestamp;
        std::string version;
        std::string command;
        double wall_seconds{0.0};
        std::filesystem::path dir;
    };

    const std::filesystem::path& root() const { return root_; }
    std::optional<Entry> lookup(const std::string& digest) const;
    std::vector<Entry> entries() const;

    // Writes the run directory and appends a manifest line. A digest already
    // present is left untouched and its existing entry returned.
    Entry commit(const RunConfig& config, const CommandOutput& output, double wall_seconds);

    // Stored stdout of a run.
    std::string stored_text(const Entry& entry) const;

private:
    std::filesystem::path root_;
};

}  // namespace dicke
