// ssqg: certify / solve / kernel / moc-fit for the slightly supercritical
// SQG laboratory. Exit codes: 0 success, 2 certificate or bound failure,
// 3 numerical non-convergence, 4 blow-up, 64 usage, 74 I/O.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "ssqg/certificate.hpp"
#include "ssqg/config.hpp"
#include "ssqg/errors.hpp"
#include "ssqg/io.hpp"
#include "ssqg/kernel.hpp"
#include "ssqg/modulus.hpp"
#include "ssqg/solver.hpp"
#include "ssqg/symbol.hpp"

using json = nlohmann::ordered_json;
using namespace ssqg;

namespace {

json config_json(const RunConfig& rc) {
    json cfg = json::object();
    for (const auto& [k, v] : rc.resolved()) cfg[k] = v;
    return cfg;
}

std::string command_name(Command c) {
    switch (c) {
        case Command::certify: return "certify";
        case Command::solve: return "solve";
        case Command::kernel: return "kernel";
        case Command::moc_fit: return "moc-fit";
    }
    return "?";
}

std::string prepare_outdir(const RunConfig& rc) {
    const std::string dir = rc.out_dir + "/" + command_name(rc.command) + "-" + rc.hash();
    ensure_directory(dir);
    return dir;
}

void emit_warnings(const RunConfig& rc) {
    for (const auto& w : rc.warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_certify(const RunConfig& rc) {
    auto fam = ModulusFamily::make(rc.symbol, rc.A, rc.kappa, rc.gamma);
    const auto rep = verify_negativity(fam, rc.certificate);
    const std::string dir = prepare_outdir(rc);
    write_text_file(dir + "/report.csv", certificate_csv(rep));

    json bounds = json::array();
    for (const auto& b : rep.bounds)
        if (!b.passed)
            bounds.push_back({{"id", b.id}, {"B", b.B}, {"xi", b.xi}, {"lhs", b.lhs},
                              {"rhs", b.rhs}});
    json summary = {
        {"passed", rep.passed && rep.bounds_passed},
        {"worst_margin", rep.worst_margin},
        {"worst_B", rep.worst_B},
        {"worst_xi_over_delta", rep.worst_xi_over_delta},
        {"constants", {{"A", rep.A}, {"kappa", rep.kappa}, {"gamma", rep.gamma}}},
        {"symbol", rep.symbol_name},
        {"negativity_passed", rep.passed},
        {"bounds_passed", rep.bounds_passed},
        {"bound_violations", bounds},
        {"guard_margin", rep.guard_margin},
        {"guard_passed", rep.guard_passed},
        {"notes", rep.notes},
        {"config", config_json(rc)},
    };
    write_text_file(dir + "/summary.json", summary.dump(2) + "\n");
    std::cout << dir << "/summary.json\n";
    std::cout << (rep.passed && rep.bounds_passed ? "PASS" : "FAIL")
              << " worst_margin=" << format_double(rep.worst_margin) << " at B="
              << format_double(rep.worst_B)
              << " xi/delta=" << format_double(rep.worst_xi_over_delta) << "\n";
    return rep.passed && rep.bounds_passed ? 0 : 2;
}

int cmd_solve(const RunConfig& rc) {
    // symbol growth conditions are a caller obligation here: warn, never block
    for (const auto& rep : check_conditions(rc.symbol))
        if (!rep.passed)
            std::cerr << "warning: symbol condition " << rep.condition_id
                      << " did not pass (worst ratio " << format_double(rep.worst_ratio)
                      << ")\n";
    const auto result = run(rc.solver);
    const std::string dir = prepare_outdir(rc);
    write_text_file(dir + "/diagnostics.csv", diagnostics_csv(result.diagnostics));
    ensure_directory(dir + "/snapshots");
    for (size_t i = 0; i < result.snapshots.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "/snapshots/snap-%05zu.ssqg", i);
        write_snapshot(dir + name, result.snapshots[i].t, result.snapshots[i].field);
    }
    json summary = {
        {"completed", !result.blew_up},
        {"blew_up", result.blew_up},
        {"final_time", result.final_state.time},
        {"diagnostics_rows", result.diagnostics.size()},
        {"snapshots", result.snapshots.size()},
        {"note", result.note},
        {"config", config_json(rc)},
    };
    if (rc.solver.monitor.enabled) {
        summary["fitted_B"] = result.fitted_B;
        if (result.monitor_event) {
            summary["breakthrough"] = {{"t", result.monitor_event->t},
                                       {"ratio", result.monitor_event->ratio},
                                       {"x", {result.monitor_event->x1, result.monitor_event->x2}},
                                       {"lag", {result.monitor_event->h1, result.monitor_event->h2}}};
        } else {
            summary["breakthrough"] = nullptr;
        }
    }
    write_text_file(dir + "/summary.json", summary.dump(2) + "\n");
    std::cout << dir << "/summary.json\n";
    if (result.blew_up) {
        std::cout << "BLOWUP at t=" << format_double(result.blowup_time) << "\n";
        return 4;
    }
    std::cout << "OK t=" << format_double(result.final_state.time) << "\n";
    return 0;
}

int cmd_kernel(const RunConfig& rc) {
    const auto rep = verify_kernel_bounds(rc.kernel);
    const std::string dir = prepare_outdir(rc);
    write_text_file(dir + "/report.csv", kernel_report_csv(rep));
    json summary = {
        {"passed", rep.passed},
        {"C_K", rep.C_K},
        {"C_gradK", rep.C_gradK},
        {"stable", rep.stable},
        {"A_estimate", std::max(1.0, 64.0 * std::max(rep.C_K, rep.C_gradK))},
        {"note", rep.note},
        {"config", config_json(rc)},
    };
    write_text_file(dir + "/summary.json", summary.dump(2) + "\n");
    std::cout << dir << "/summary.json\n";
    std::cout << (rep.passed ? "PASS" : "FAIL") << " C_K=" << format_double(rep.C_K)
              << " C_gradK=" << format_double(rep.C_gradK) << "\n";
    return rep.passed ? 0 : 2;
}

int cmd_moc_fit(const RunConfig& rc) {
    auto fam = ModulusFamily::make(rc.symbol, rc.A, rc.kappa, rc.gamma);
    const double B = find_B_for_data(fam, rc.moc_fit.sup_norm, rc.moc_fit.grad_norm);
    auto inst = ModulusInstance::make(fam, B);
    json out = {{"B", B}, {"delta", inst.delta()}};
    std::cout << out.dump() << "\n";
    const std::string dir = prepare_outdir(rc);
    json summary = {
        {"B", B},
        {"delta", inst.delta()},
        {"omega_at_delta", inst.omega_at_delta()},
        {"constants", {{"A", rc.A}, {"kappa", rc.kappa}, {"gamma", rc.gamma}}},
        {"config", config_json(rc)},
    };
    write_text_file(dir + "/summary.json", summary.dump(2) + "\n");
    write_text_file(dir + "/modulus.csv",
                    modulus_csv(inst, 1e-2 * inst.delta(), 1e4 * inst.delta(), 16));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"slightly supercritical SQG laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    CliOverrides ov;
    std::string symbol_kind, b_list;
    double beta = -1.0, A = -1.0, kappa = -1.0, gamma = -1.0, T = -1.0;
    int N = 0, threads = -1;
    long long seed = -1;
    std::string out_dir;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "config file path");
        sub->add_option("--out", out_dir, "output directory root");
        sub->add_option("--seed", seed, "seed for random presets");
        sub->add_option("--threads", threads, "worker pool width");
        sub->add_option("--symbol", symbol_kind, "symbol kind");
        sub->add_option("--beta", beta, "loglog-power exponent");
        sub->add_option("--A", A, "velocity-modulus constant");
        sub->add_option("--kappa", kappa, "modulus constant kappa");
        sub->add_option("--gamma", gamma, "modulus constant gamma");
    };
    auto* certify = app.add_subcommand("certify", "verify the negativity certificate");
    add_common(certify);
    certify->add_option("--B-list", b_list, "comma-separated B values");
    auto* solve = app.add_subcommand("solve", "time-integrate the active scalar");
    add_common(solve);
    solve->add_option("--N", N, "grid points per dimension");
    solve->add_option("--T", T, "final time");
    auto* kernel = app.add_subcommand("kernel", "probe the velocity kernel bounds");
    add_common(kernel);
    auto* mocfit = app.add_subcommand("moc-fit", "fit B to data norms");
    add_common(mocfit);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 64;
    }

    Command cmd = Command::certify;
    if (solve->parsed()) cmd = Command::solve;
    if (kernel->parsed()) cmd = Command::kernel;
    if (mocfit->parsed()) cmd = Command::moc_fit;

    if (!symbol_kind.empty()) ov.symbol_kind = symbol_kind;
    if (beta >= 0.0) ov.beta = beta;
    if (A >= 0.0) ov.A = A;
    if (kappa >= 0.0) ov.kappa = kappa;
    if (gamma >= 0.0) ov.gamma = gamma;
    if (N > 0) ov.N = N;
    if (T > 0.0) ov.T = T;
    if (!out_dir.empty()) ov.out_dir = out_dir;
    if (seed >= 0) ov.seed = (std::uint64_t)seed;
    if (threads >= 0)
        ov.threads = threads;
    else if (const char* env = std::getenv("SSQG_THREADS"))
        ov.threads = std::atoi(env);

    try {
        RunConfig rc = build_run_config(cmd, config_path, ov);
        if (!b_list.empty()) {
            rc.certificate.B_list.clear();
            std::stringstream ss(b_list);
            std::string tok;
            while (std::getline(ss, tok, ','))
                if (!tok.empty()) rc.certificate.B_list.push_back(std::strtod(tok.c_str(), nullptr));
            for (double b : rc.certificate.B_list)
                if (!(b >= 1.0)) throw UsageError("--B-list entries must be >= 1");
        }
        emit_warnings(rc);
        switch (cmd) {
            case Command::certify: return cmd_certify(rc);
            case Command::solve: return cmd_solve(rc);
            case Command::kernel: return cmd_kernel(rc);
            case Command::moc_fit: return cmd_moc_fit(rc);
        }
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 64;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 74;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 74;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const BlowUpError& e) {
        std::cerr << "blow-up: " << e.what() << "\n";
        return 4;
    } catch (const CertificationError& e) {
        std::cerr << "certification error: " << e.what() << "\n";
        return 2;
    } catch (const PreconditionError& e) {
        std::cerr << "precondition error: " << e.what() << "\n";
        return 64;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 64;
    }
}
