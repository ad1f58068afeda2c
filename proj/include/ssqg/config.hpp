#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ssqg/certificate.hpp"
#include "ssqg/kernel.hpp"
#include "ssqg/solver.hpp"
#include "ssqg/symbol.hpp"

namespace ssqg {

// Flat typed key-value config with [sections]; values are numbers, booleans,
// quoted strings, lists ([...], nestable one level) and inline tables
// ({k = v, ...}, flattened into dotted keys). Duplicate keys are rejected.
struct ConfigEntry {
    enum class Kind { boolean, number, string, list, nested_list };
    Kind kind = Kind::number;
    bool b = false;
    double num = 0.0;
    std::string str;
    std::vector<double> list;
    std::vector<std::vector<double>> nested;
    int line = 0;
};

std::map<std::string, ConfigEntry> parse_config_text(const std::string& text);

enum class Command { certify, solve, kernel, moc_fit };

struct MocFitConfig {
    double sup_norm = 1.0;
    double grad_norm = 1.0;
};

// Fully resolved run configuration (defaults filled, invariants validated).
struct RunConfig {
    Command command = Command::certify;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    int threads = 0;

    Symbol symbol;
    double A = 1.0;
    double kappa = 0.0; // resolved via choose_constants when not supplied
    double gamma = 0.0;

    CertificateConfig certificate;
    SolverConfig solver;
    KernelProbe kernel;
    MocFitConfig moc_fit;

    std::vector<std::string> warnings; // soft-condition violations etc.

    // canonical "key = value" dump of every resolved field, sorted; the
    // config hash and the summary provenance both come from this
    std::vector<std::pair<std::string, std::string>> resolved() const;
    std::string canonical_text() const;
    std::string hash() const;
};

struct CliOverrides {
    std::optional<std::string> symbol_kind;
    std::optional<double> beta;
    std::optional<double> A, kappa, gamma;
    std::optional<int> N;
    std::optional<double> T;
    std::optional<std::string> B_list; // comma-separated
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

// Builds and validates the run config from an optional config file plus flag
// overrides. Throws UsageError listing every offending key.
RunConfig build_run_config(Command cmd, const std::string& config_path,
                           const CliOverrides& overrides);

} // namespace ssqg
