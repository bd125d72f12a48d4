#pragma once

// Experiment harness behind the heiskak executable. Each subcommand writes a
// key = value report (config, seed and input hash first) plus CSV/SVG
// artifacts into the output directory and returns a process exit code.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace heiskak {

enum ExitCode : int { kExitOk = 0, kExitTolerance = 2, kExitInput = 3 };

struct RunConfig {
    std::string subcommand;
    std::uint64_t seed = 1;
    double rho = 0.125;
    double q = 1.5;
    double t = 3.5;
    std::optional<double> delta;
    int n_theta = 64;
    std::optional<double> cell;
    int n_mc = 256;
    std::optional<double> spacing;  // broad-narrow evaluation grid
    std::string out_dir = ".";
    std::string measure_path;
    double tol_scale = 1.0;  // multiplies every verify-lemmas tolerance

    // generate
    std::string kind = "cantor";
    int depth = 1;
    int n = 41;
    double ratio = 1.0 / 3.0;
};

/// Git blob object id: SHA-1 of "blob <size>\0" followed by the bytes.
std::string git_blob_sha1(std::string_view bytes);

/// Ordered sections of key = value lines.
class Report {
public:
    void section(const std::string& name);
    void add(const std::string& key, const std::string& value);
    void add(const std::string& key, double value);
    void add(const std::string& key, long long value);
    void add(const std::string& key, std::size_t value) { add(key, static_cast<long long>(value)); }
    void add(const std::string& key, int value) { add(key, static_cast<long long>(value)); }
    void add(const std::string& key, bool value) { add(key, std::string(value ? "true" : "false")); }
    void write(std::ostream& out) const;
    void save(const std::string& path) const;

private:
    std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> sections_;
};

/// %.17g, so reports and CSV files round-trip and diff bit-exactly.
std::string format_double(double v);

/// One row of lemmas.csv: passes iff value < limit * tol_scale.
struct LemmaCheck {
    std::string suite;
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    bool pass = false;
};

/// Runs the duality, tube, X-ray, translation and conjugation suites.
std::vector<LemmaCheck> run_lemma_suites(const RunConfig& config);

int cmd_verify_lemmas(const RunConfig& config, std::ostream& log);
int cmd_energy(const RunConfig& config, std::ostream& log);
int cmd_broad_narrow(const RunConfig& config, std::ostream& log);
int cmd_rescale_demo(const RunConfig& config, std::ostream& log);
int cmd_generate(const RunConfig& config, std::ostream& log);

/// Dispatches on config.subcommand. Input errors (unreadable or malformed
/// measure files, invalid parameters) become kExitInput with the message on log.
int run_command(const RunConfig& config, std::ostream& log);

}  // namespace heiskak
