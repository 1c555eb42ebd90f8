#include "dicke/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>
#include <system_error>

namespace dicke {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestHeader = "schema,digest,timestamp,version,command,wall_seconds";

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    out << contents;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

ResultStore::ResultStore(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_ / "runs");
    const fs::path manifest = root_ / "manifest.csv";
    if (!fs::exists(manifest)) write_file(manifest, std::string(kManifestHeader) + '\n');
}

fs::path ResultStore::default_root() {
    if (const char* env = std::getenv("DICKE_RESULTS"); env && *env) return env;
    return fs::path("dicke-results");
}

std::vector<ResultStore::Entry> ResultStore::entries() const {
    std::vector<Entry> out;
    std::ifstream in(root_ / "manifest.csv");
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() != 6) continue;
        Entry e;
        e.digest = f[1];
        e.timestamp = f[2];
        e.version = f[3];
        e.command = f[4];
        e.wall_seconds = std::strtod(f[5].c_str(), nullptr);
        e.dir = root_ / "runs" / e.digest;
        out.push_back(std::move(e));
    }
    return out;
}

std::optional<ResultStore::Entry> ResultStore::lookup(const std::string& digest) const {
    for (auto& e : entries())
        if (e.digest == digest && fs::exists(e.dir / "stdout.txt")) return e;
    return std::nullopt;
}

ResultStore::Entry ResultStore::commit(const RunConfig& config, const CommandOutput& output, double wall_seconds) {
    const std::string digest = config_digest(config);
    if (auto existing = lookup(digest)) return *existing;

    const fs::path final_dir = root_ / "runs" / digest;
    if (fs::exists(final_dir)) {
        // Left by an interrupted run. Never overwritten.
        throw std::runtime_error("result directory " + final_dir.string() + " exists without a manifest entry");
    }
    std::random_device rd;
    const fs::path staging = root_ / "runs" / (".staging-" + digest + "-" + std::to_string(rd()));
    fs::create_directories(staging);
    write_file(staging / "config.txt", serialize(config));
    write_file(staging / "stdout.txt", output.text);
    for (const auto& [name, contents] : output.files) write_file(staging / name, contents);

    std::error_code ec;
    fs::rename(staging, final_dir, ec);
    if (ec) {
        fs::remove_all(staging);
        if (auto existing = lookup(digest)) return *existing;
        throw std::runtime_error("cannot publish " + final_dir.string() + ": " + ec.message());
    }

    Entry e;
    e.digest = digest;
    e.timestamp = utc_timestamp();
    e.version = std::string(version_string());
    e.command = std::string(to_string(config.command));
    e.wall_seconds = wall_seconds;
    e.dir = final_dir;
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.3f", wall_seconds);
    std::ofstream manifest(root_ / "manifest.csv", std::ios::app);
    manifest << kCsvSchemaVersion << ',' << e.digest << ',' << e.timestamp << ',' << e.version << ',' << e.command
             << ',' << secs << '\n';
    if (!manifest) throw std::runtime_error("cannot append to manifest");
    return e;
}

std::string ResultStore::stored_text(const Entry& entry) const { return read_file(entry.dir / "stdout.txt"); }

}  // namespace dicke
