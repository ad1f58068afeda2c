#include "ssqg/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ssqg/errors.hpp"
#include "ssqg/io.hpp"

namespace ssqg {
namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace((unsigned char)s[a])) ++a;
    while (b > a && std::isspace((unsigned char)s[b - 1])) --b;
    return s.substr(a, b - a);
}

struct ValueParser {
    std::string text;
    size_t pos = 0;
    int line;
    std::vector<std::string>& errors;

    void skip_ws() {
        while (pos < text.size() && std::isspace((unsigned char)text[pos])) ++pos;
    }
    bool eat(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    void fail(const std::string& what) {
        errors.push_back("line " + std::to_string(line) + ": " + what);
        pos = text.size();
    }

    std::optional<double> parse_number() {
        skip_ws();
        const char* start = text.c_str() + pos;
        char* end = nullptr;
        const double v = std::strtod(start, &end);
        if (end == start) return std::nullopt;
        pos += (size_t)(end - start);
        return v;
    }

    // number | bool | "string" | [ ... ] | { k = v, ... } (table handled by caller)
    bool parse_scalar_or_list(ConfigEntry& out) {
        skip_ws();
        if (pos >= text.size()) {
            fail("missing value");
            return false;
        }
        const char c = text[pos];
        if (c == '"') {
            ++pos;
            const size_t close = text.find('"', pos);
            if (close == std::string::npos) {
                fail("unterminated string");
                return false;
            }
            out.kind = ConfigEntry::Kind::string;
            out.str = text.substr(pos, close - pos);
            pos = close + 1;
            return true;
        }
        if (text.compare(pos, 4, "true") == 0) {
            out.kind = ConfigEntry::Kind::boolean;
            out.b = true;
            pos += 4;
            return true;
        }
        if (text.compare(pos, 5, "false") == 0) {
            out.kind = ConfigEntry::Kind::boolean;
            out.b = false;
            pos += 5;
            return true;
        }
        if (c == '[') {
            ++pos;
            skip_ws();
            if (pos < text.size() && text[pos] == '[') {
                out.kind = ConfigEntry::Kind::nested_list;
                while (true) {
                    if (!eat('[')) {
                        fail("expected '[' in nested list");
                        return false;
                    }
                    std::vector<double> inner;
                    while (true) {
                        auto v = parse_number();
                        if (!v) break;
                        inner.push_back(*v);
                        if (!eat(',')) break;
                    }
                    if (!eat(']')) {
                        fail("expected ']' in nested list");
                        return false;
                    }
                    out.nested.push_back(std::move(inner));
                    if (!eat(',')) break;
                }
                if (!eat(']')) {
                    fail("expected closing ']' of nested list");
                    return false;
                }
                return true;
            }
            out.kind = ConfigEntry::Kind::list;
            while (true) {
                auto v = parse_number();
                if (!v) break;
                out.list.push_back(*v);
                if (!eat(',')) break;
            }
            if (!eat(']')) {
                fail("expected closing ']' of list");
                return false;
            }
            return true;
        }
        auto v = parse_number();
        if (!v) {
            fail("unrecognized value '" + trim(text.substr(pos)) + "'");
            return false;
        }
        out.kind = ConfigEntry::Kind::number;
        out.num = *v;
        return true;
    }
};

void insert_entry(std::map<std::string, ConfigEntry>& out, const std::string& key,
                  ConfigEntry entry, int line, std::vector<std::string>& errors) {
    if (out.count(key)) {
        errors.push_back("line " + std::to_string(line) + ": duplicate key '" + key + "'");
        return;
    }
    entry.line = line;
    out.emplace(key, std::move(entry));
}

} // namespace

std::map<std::string, ConfigEntry> parse_config_text(const std::string& text) {
    std::map<std::string, ConfigEntry> out;
    std::vector<std::string> errors;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const size_t hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        const std::string s = trim(raw);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') {
                errors.push_back("line " + std::to_string(lineno) + ": malformed section");
                continue;
            }
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        const size_t eq = s.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string key_local = trim(s.substr(0, eq));
        const std::string key = section.empty() ? key_local : section + "." + key_local;
        const std::string value = trim(s.substr(eq + 1));
        if (key_local.empty()) {
            errors.push_back("line " + std::to_string(lineno) + ": empty key");
            continue;
        }
        if (!value.empty() && value.front() == '{') {
            // inline table: flatten into dotted keys
            if (value.back() != '}') {
                errors.push_back("line " + std::to_string(lineno) +
                                 ": unterminated inline table");
                continue;
            }
            const std::string body = value.substr(1, value.size() - 2);
            std::istringstream fields(body);
            std::string field;
            while (std::getline(fields, field, ',')) {
                const size_t feq = field.find('=');
                if (feq == std::string::npos) {
                    errors.push_back("line " + std::to_string(lineno) +
                                     ": inline table needs k = v pairs");
                    continue;
                }
                const std::string fkey = trim(field.substr(0, feq));
                ValueParser vp{trim(field.substr(feq + 1)), 0, lineno, errors};
                ConfigEntry e;
                if (vp.parse_scalar_or_list(e)) insert_entry(out, key + "." + fkey, e, lineno, errors);
            }
            continue;
        }
        ValueParser vp{value, 0, lineno, errors};
        ConfigEntry e;
        if (!vp.parse_scalar_or_list(e)) continue;
        vp.skip_ws();
        if (vp.pos != vp.text.size()) {
            errors.push_back("line " + std::to_string(lineno) + ": trailing characters after value");
            continue;
        }
        insert_entry(out, key, e, lineno, errors);
    }
    if (!errors.empty()) {
        std::string msg = "config parse errors:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw UsageError(msg);
    }
    return out;
}

namespace {

// typed view over the parsed entries with consumption tracking
struct ConfigReader {
    std::map<std::string, ConfigEntry> entries;
    std::map<std::string, bool> consumed;
    std::vector<std::string> errors;

    explicit ConfigReader(std::map<std::string, ConfigEntry> e) : entries(std::move(e)) {
        for (const auto& [k, v] : entries) consumed[k] = false;
    }

    const ConfigEntry* find(const std::string& key) {
        auto it = entries.find(key);
        if (it == entries.end()) return nullptr;
        consumed[key] = true;
        return &it->second;
    }

    double number(const std::string& key, double dflt) {
        const auto* e = find(key);
        if (!e) return dflt;
        if (e->kind != ConfigEntry::Kind::number) {
            errors.push_back("'" + key + "' must be a number");
            return dflt;
        }
        return e->num;
    }
    int integer(const std::string& key, int dflt) {
        const double v = number(key, (double)dflt);
        if (v != std::floor(v)) errors.push_back("'" + key + "' must be an integer");
        return (int)v;
    }
    bool boolean(const std::string& key, bool dflt) {
        const auto* e = find(key);
        if (!e) return dflt;
        if (e->kind != ConfigEntry::Kind::boolean) {
            errors.push_back("'" + key + "' must be true or false");
            return dflt;
        }
        return e->b;
    }
    std::string string(const std::string& key, const std::string& dflt) {
        const auto* e = find(key);
        if (!e) return dflt;
        if (e->kind != ConfigEntry::Kind::string) {
            errors.push_back("'" + key + "' must be a quoted string");
            return dflt;
        }
        return e->str;
    }
    std::vector<double> list(const std::string& key, std::vector<double> dflt) {
        const auto* e = find(key);
        if (!e) return dflt;
        if (e->kind != ConfigEntry::Kind::list) {
            errors.push_back("'" + key + "' must be a list of numbers");
            return dflt;
        }
        return e->list;
    }
    std::vector<std::vector<double>> nested(const std::string& key) {
        const auto* e = find(key);
        if (!e) return {};
        if (e->kind != ConfigEntry::Kind::nested_list) {
            errors.push_back("'" + key + "' must be a list of lists");
            return {};
        }
        return e->nested;
    }

    void finish() {
        for (const auto& [k, used] : consumed)
            if (!used) errors.push_back("unknown key '" + k + "'");
        if (!errors.empty()) {
            std::string msg = "config validation failed:";
            for (const auto& e : errors) msg += "\n  " + e;
            throw UsageError(msg);
        }
    }
};

std::vector<double> parse_csv_numbers(const std::string& s) {
    std::vector<double> out;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (trim(tok).empty()) continue;
        out.push_back(std::strtod(tok.c_str(), nullptr));
    }
    return out;
}

} // namespace

RunConfig build_run_config(Command cmd, const std::string& config_path,
                           const CliOverrides& ov) {
    std::map<std::string, ConfigEntry> entries;
    if (!config_path.empty()) {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) throw UsageError("cannot open config file: " + config_path);
        std::stringstream ss;
        ss << in.rdbuf();
        entries = parse_config_text(ss.str());
    }
    ConfigReader rd(std::move(entries));
    RunConfig rc;
    rc.command = cmd;

    rc.out_dir = ov.out_dir.value_or(rd.string("output.dir", "out"));
    rc.seed = ov.seed.value_or((std::uint64_t)rd.number("output.seed", 1.0));
    rc.threads = ov.threads.value_or(rd.integer("output.threads", 0));

    // symbol: [symbol] section or inline table at top level
    std::string kind = ov.symbol_kind.value_or(rd.string("symbol.kind", "constant-one"));
    double beta = ov.beta.value_or(rd.number("symbol.beta", 0.5));
    if (kind == "constant-one") {
        rc.symbol = Symbol::constant_one();
    } else if (kind == "loglog-power") {
        if (!(beta >= 0.0) || !(beta < 1.0))
            rd.errors.push_back("symbol.beta must lie in [0, 1)");
        else
            rc.symbol = Symbol::loglog_power(beta);
    } else {
        rd.errors.push_back("symbol.kind must be \"constant-one\" or \"loglog-power\"");
    }

    const std::string csec = cmd == Command::certify  ? "certificate"
                             : cmd == Command::kernel ? "kernel"
                                                      : "solver";

    // constants shared by certify / moc-fit / solve monitor; when A is not
    // supplied anywhere it comes from the kernel module's bound estimate
    const bool monitor_on = rd.boolean("monitor.enabled", false);
    const bool needs_A =
        cmd == Command::certify || cmd == Command::moc_fit ||
        (cmd == Command::solve && monitor_on);
    double A_in = ov.A ? *ov.A : rd.number("constants.A", -1.0);
    if (A_in <= 0.0 && needs_A && rd.errors.empty()) {
        A_in = estimate_A(rc.symbol);
        rc.warnings.push_back("constants.A estimated from the kernel bounds: " +
                              format_double(A_in));
    }
    rc.A = A_in > 0.0 ? A_in : 1.0;
    double kappa_in = ov.kappa.value_or(rd.number("constants.kappa", 0.0));
    double gamma_in = ov.gamma.value_or(rd.number("constants.gamma", 0.0));
    if (!(rc.A >= 1.0)) rd.errors.push_back("constants.A must satisfy A >= 1");

    double g_cap = 0.0;
    if (rd.errors.empty()) {
        g_cap = g_of_delta(rc.symbol, 1.0 / find_r0(rc.symbol));
        if (kappa_in <= 0.0 && gamma_in <= 0.0) {
            auto [k, g] = choose_constants(rc.A, rc.symbol);
            rc.kappa = k;
            rc.gamma = g;
        } else {
            rc.kappa = kappa_in;
            rc.gamma = gamma_in > 0.0 ? gamma_in : kappa_in / 2.0;
            if (!(rc.kappa > 0.0)) rd.errors.push_back("constants.kappa must be positive");
            if (!(rc.gamma > 0.0)) rd.errors.push_back("constants.gamma must be positive");
            if (!(rc.gamma < rc.kappa))
                rd.errors.push_back(
                    "constants.gamma must satisfy gamma < kappa");
            if (rc.kappa > g_cap)
                rd.errors.push_back("constants.kappa exceeds the monotone range g(1/r0) = " +
                                    format_double(g_cap));
        }
        if (rd.errors.empty()) {
            if (!(32.0 * kPi * rc.kappa * rc.A < 1.0))
                rc.warnings.push_back("32 pi kappa A >= 1: the negativity certificate "
                                      "is expected to fail");
            if (!(4.0 * kPi * rc.A * rc.gamma < 1.0))
                rc.warnings.push_back("4 pi A gamma >= 1: the negativity certificate "
                                      "is expected to fail");
        }
    }

    // certificate section
    rc.certificate.B_list = rd.list("certificate.B_list", {1.0, 10.0, 1e3, 1e6});
    rc.certificate.xi_low = rd.number("certificate.xi_low", 1e-6);
    rc.certificate.xi_high = rd.number("certificate.xi_high", 1e6);
    rc.certificate.points_per_decade = rd.integer("certificate.points_per_decade", 50);
    rc.certificate.quad_tol = rd.number("certificate.quadrature_tol", 1e-10);
    rc.certificate.tail_M = rd.number("certificate.tail_cutoff", 1e6);
    rc.certificate.margin = rd.number("certificate.margin", 1e-3);
    rc.certificate.intermediate_bounds = rd.boolean("certificate.intermediate_bounds", true);
    rc.certificate.continuity_guard = rd.boolean("certificate.continuity_guard", true);
    rc.certificate.threads = rc.threads;
    if (cmd == Command::certify) {
        for (double b : rc.certificate.B_list)
            if (!(b >= 1.0)) rd.errors.push_back("certificate.B_list entries must be >= 1");
        if (!(rc.certificate.xi_low < 1.0 && rc.certificate.xi_high > 1.0))
            rd.errors.push_back("certificate.xi_low < 1 < certificate.xi_high required");
        if (rc.certificate.points_per_decade < 50)
            rd.errors.push_back("certificate.points_per_decade must be at least 50");
        if (!(rc.certificate.quad_tol > 0.0))
            rd.errors.push_back("certificate.quadrature_tol must be positive");
        if (!(rc.certificate.margin > 0.0))
            rd.errors.push_back("certificate.margin must be positive");
        if (!(rc.certificate.tail_M >= 10.0))
            rd.errors.push_back("certificate.tail_cutoff must be at least 10");
    }

    // solver section
    rc.solver.N = ov.N.value_or(rd.integer("solver.N", 128));
    rc.solver.T = ov.T.value_or(rd.number("solver.T", 1.0));
    rc.solver.symbol = rc.symbol;
    rc.solver.cfl = rd.number("solver.cfl", 0.5);
    rc.solver.dt_cap = rd.number("solver.dt_cap", 0.1);
    rc.solver.diagnostics_every = rd.integer("solver.diagnostics_every", 10);
    rc.solver.snapshot_every = rd.integer("solver.snapshot_every", 0);
    rc.solver.preset = rd.string("solver.preset", "shear+vortex");
    rc.solver.amplitude = rd.number("solver.amplitude", 1.0);
    rc.solver.seed = rc.seed;
    rc.solver.advection = rd.boolean("solver.advection", true);
    const double fdt = rd.number("solver.fixed_dt", 0.0);
    if (fdt > 0.0) rc.solver.fixed_dt = fdt;
    for (const auto& row : rd.nested("solver.modes")) {
        if (row.size() != 4) {
            rd.errors.push_back("solver.modes entries must be [k1, k2, re, im]");
            continue;
        }
        rc.solver.modes.push_back(
            {(int)row[0], (int)row[1], row[2], row[3]});
    }
    rc.solver.monitor.enabled = rd.boolean("monitor.enabled", false);
    rc.solver.monitor.A = rd.number("monitor.A", rc.A);
    rc.solver.monitor.kappa = rd.number("monitor.kappa", 0.0);
    rc.solver.monitor.gamma = rd.number("monitor.gamma", 0.0);
    rc.solver.monitor.B = rd.number("monitor.B", 0.0);
    for (const auto& row : rd.nested("monitor.lags")) {
        if (row.size() != 2) {
            rd.errors.push_back("monitor.lags entries must be [h1, h2]");
            continue;
        }
        rc.solver.monitor.lags.push_back({(int)row[0], (int)row[1]});
    }
    if (cmd == Command::solve) {
        if (rc.solver.N < 16 || rc.solver.N % 2 != 0)
            rd.errors.push_back("solver.N must be even and at least 16");
        if (!(rc.solver.T > 0.0)) rd.errors.push_back("solver.T must be positive");
        if (!(rc.solver.cfl > 0.0 && rc.solver.cfl <= 1.0))
            rd.errors.push_back("solver.cfl must lie in (0, 1]");
        if (rc.solver.preset != "shear+vortex" && rc.solver.preset != "random-lowpass" &&
            rc.solver.preset != "modes")
            rd.errors.push_back("solver.preset must be shear+vortex, random-lowpass or modes");
        if (rc.solver.diagnostics_every < 1)
            rd.errors.push_back("solver.diagnostics_every must be >= 1");
    }

    // kernel section
    rc.kernel.symbol = rc.symbol;
    rc.kernel.component = rd.integer("kernel.component", 1);
    rc.kernel.r_min = rd.number("kernel.r_min", 1e-6);
    rc.kernel.r_max = rd.number("kernel.r_max", 1e2);
    rc.kernel.per_decade = rd.integer("kernel.per_decade", 4);
    rc.kernel.angular_samples = rd.integer("kernel.angular_samples", 16);
    rc.kernel.truncation_z = rd.number("kernel.truncation_z", 1e3);
    rc.kernel.quad_tol = rd.number("kernel.quad_tol", 1e-7);
    if (cmd == Command::kernel) {
        if (rc.kernel.component != 1 && rc.kernel.component != 2)
            rd.errors.push_back("kernel.component must be 1 or 2");
        if (!(rc.kernel.r_min > 0.0 && rc.kernel.r_max > rc.kernel.r_min))
            rd.errors.push_back("kernel radii must satisfy 0 < r_min < r_max");
        if (rc.kernel.per_decade < 1) rd.errors.push_back("kernel.per_decade must be >= 1");
        if (rc.kernel.angular_samples < 1)
            rd.errors.push_back("kernel.angular_samples must be >= 1");
        if (!(rc.kernel.truncation_z >= 1e3))
            rd.errors.push_back("kernel.truncation_z must be at least 1e3");
    }

    // moc-fit section
    rc.moc_fit.sup_norm = rd.number("moc_fit.sup_norm", 1.0);
    rc.moc_fit.grad_norm = rd.number("moc_fit.grad_norm", 1.0);
    if (cmd == Command::moc_fit) {
        if (!(rc.moc_fit.sup_norm > 0.0) || !(rc.moc_fit.grad_norm > 0.0))
            rd.errors.push_back("moc_fit norms must be positive");
    }

    rd.finish();
    return rc;
}

std::vector<std::pair<std::string, std::string>> RunConfig::resolved() const {
    std::vector<std::pair<std::string, std::string>> kv;
    auto add = [&kv](const std::string& k, const std::string& v) { kv.emplace_back(k, v); };
    const char* cmd_name = command == Command::certify  ? "certify"
                           : command == Command::solve  ? "solve"
                           : command == Command::kernel ? "kernel"
                                                        : "moc-fit";
    add("command", cmd_name);
    add("output.seed", std::to_string(seed));
    add("symbol.kind",
        symbol.kind == SymbolKind::constant_one ? "constant-one" : "loglog-power");
    if (symbol.kind == SymbolKind::loglog_power)
        add("symbol.beta", format_double(symbol.beta));
    add("constants.A", format_double(A));
    add("constants.kappa", format_double(kappa));
    add("constants.gamma", format_double(gamma));

    if (command == Command::certify) {
        std::string bl;
        for (double b : certificate.B_list) bl += (bl.empty() ? "" : ",") + format_double(b);
        add("certificate.B_list", bl);
        add("certificate.xi_low", format_double(certificate.xi_low));
        add("certificate.xi_high", format_double(certificate.xi_high));
        add("certificate.points_per_decade", std::to_string(certificate.points_per_decade));
        add("certificate.quadrature_tol", format_double(certificate.quad_tol));
        add("certificate.tail_cutoff", format_double(certificate.tail_M));
        add("certificate.margin", format_double(certificate.margin));
        add("certificate.intermediate_bounds",
            certificate.intermediate_bounds ? "true" : "false");
        add("certificate.continuity_guard", certificate.continuity_guard ? "true" : "false");
    }
    if (command == Command::solve) {
        add("solver.N", std::to_string(solver.N));
        add("solver.T", format_double(solver.T));
        add("solver.cfl", format_double(solver.cfl));
        add("solver.dt_cap", format_double(solver.dt_cap));
        add("solver.diagnostics_every", std::to_string(solver.diagnostics_every));
        add("solver.snapshot_every", std::to_string(solver.snapshot_every));
        add("solver.preset", solver.preset);
        add("solver.amplitude", format_double(solver.amplitude));
        add("solver.advection", solver.advection ? "true" : "false");
        if (solver.fixed_dt) add("solver.fixed_dt", format_double(*solver.fixed_dt));
        add("monitor.enabled", solver.monitor.enabled ? "true" : "false");
        if (solver.monitor.enabled) {
            add("monitor.A", format_double(solver.monitor.A));
            add("monitor.kappa", format_double(solver.monitor.kappa));
            add("monitor.gamma", format_double(solver.monitor.gamma));
            add("monitor.B", format_double(solver.monitor.B));
        }
    }
    if (command == Command::kernel) {
        add("kernel.component", std::to_string(kernel.component));
        add("kernel.r_min", format_double(kernel.r_min));
        add("kernel.r_max", format_double(kernel.r_max));
        add("kernel.per_decade", std::to_string(kernel.per_decade));
        add("kernel.angular_samples", std::to_string(kernel.angular_samples));
        add("kernel.truncation_z", format_double(kernel.truncation_z));
        add("kernel.quad_tol", format_double(kernel.quad_tol));
    }
    if (command == Command::moc_fit) {
        add("moc_fit.sup_norm", format_double(moc_fit.sup_norm));
        add("moc_fit.grad_norm", format_double(moc_fit.grad_norm));
    }
    return kv;
}

std::string RunConfig::canonical_text() const {
    auto kv = resolved();
    std::sort(kv.begin(), kv.end());
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

std::string RunConfig::hash() const { return hex16(fnv1a64(canonical_text())); }

} // namespace ssqg
