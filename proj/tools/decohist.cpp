// decohist: run experiment presets, list them, and verify results.
//
//   decohist list
//   decohist <preset> [--d0 N] [--gamma-grid a:b:steps] [--length L] [--dt eq|neq|x]
//                     [--family F] [--seed S] [--threads T] [--out FILE] [--set key=value]...
//   decohist verify --result FILE --criteria FILE
//
// Exit codes: 0 success, 1 error, 2 a criterion failed.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "decohist/runner.hpp"

using namespace decohist;

namespace {

int cmd_list() {
    for (const auto& p : list_presets()) {
        std::cout << p.name << "\t" << p.figure << "\t" << p.description << "\n";
        std::cout << "    defaults " << p.defaults.dump() << "\n";
    }
    return 0;
}

int cmd_verify(const std::string& result, const std::string& criteria) {
    const VerifyReport r = verify(result, criteria);
    for (const auto& c : r.results) std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  " << c.detail << "\n";
    return r.pass() ? 0 : 2;
}

// Single-dimension shorthands map onto whichever key the preset uses.
void put_dimension(ExperimentConfig& cfg, const PresetInfo& p, long d0) {
    for (const char* key : {"d0", "d", "dims"})
        if (p.defaults.contains(key)) {
            cfg.params[key] = std::string(key) == "dims" ? Json::array({d0}) : Json(d0);
            return;
        }
    throw Error(ErrorKind::InvalidConfig, "--d0 does not apply to " + p.name);
}

void put_length(ExperimentConfig& cfg, const PresetInfo& p, long length) {
    for (const char* key : {"length", "lengths"})
        if (p.defaults.contains(key)) {
            cfg.params[key] = std::string(key) == "lengths" ? Json::array({length}) : Json(length);
            return;
        }
    throw Error(ErrorKind::InvalidConfig, "--length does not apply to " + p.name);
}

void put_family(ExperimentConfig& cfg, const PresetInfo& p, const std::string& family) {
    for (const char* key : {"family", "families"})
        if (p.defaults.contains(key)) {
            cfg.params[key] = family;
            return;
        }
    throw Error(ErrorKind::InvalidConfig, "--family does not apply to " + p.name);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decoherent histories experiments"};
    app.require_subcommand(0, 1);
    app.fallthrough(false);

    app.add_subcommand("list", "list presets and their defaults");

    auto* ver = app.add_subcommand("verify", "check a result file against acceptance criteria");
    std::string result_path, criteria_path;
    ver->add_option("--result", result_path, "result CSV")->required();
    ver->add_option("--criteria", criteria_path, "criteria JSON")->required();

    std::string preset;
    long d0 = 0, length = 0;
    std::string grid, dt, family, out;
    std::uint64_t seed = 1;
    int threads = 1;
    bool quiet = false;
    std::vector<std::string> sets;
    app.add_option("preset", preset, "experiment preset (see 'decohist list')");
    app.add_option("--d0", d0, "dimension (D0 for history presets, d for discrimination)");
    app.add_option("--gamma-grid", grid, "gamma grid a:b:steps or a,b,c");
    app.add_option("--length", length, "history length L");
    app.add_option("--dt", dt, "time step: eq, neq or a number");
    app.add_option("--family", family, "state family: haar, perm, sign, mub");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--threads", threads, "worker threads for independent grid points")->check(CLI::PositiveNumber);
    app.add_option("--out", out, "output CSV; the summary goes to a .json sidecar");
    app.add_option("--set", sets, "override any preset parameter, key=value");
    app.add_flag("--quiet", quiet, "no progress output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand("list")) return cmd_list();
        if (app.got_subcommand("verify")) return cmd_verify(result_path, criteria_path);
        if (preset.empty()) {
            std::cerr << app.help();
            return 1;
        }
        if (!quiet) set_progress_sink([](const std::string& m) { std::fprintf(stderr, "[decohist] %s\n", m.c_str()); });

        ExperimentConfig cfg;
        cfg.experiment = preset;
        cfg.seed = seed;
        cfg.threads = threads;
        cfg.out = out;
        const PresetInfo& p = find_preset(preset);
        if (d0 > 0) put_dimension(cfg, p, d0);
        if (length > 0) put_length(cfg, p, length);
        if (!grid.empty()) cfg.params["gamma_grid"] = grid;
        if (!dt.empty()) cfg.params["dt"] = dt;
        if (!family.empty()) put_family(cfg, p, family);
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            require(eq != std::string::npos && eq > 0, ErrorKind::InvalidConfig, "--set expects key=value, got '" + s + "'");
            cfg.params[s.substr(0, eq)] = s.substr(eq + 1);
        }
        const ResultTable t = run(cfg);
        if (out.empty()) {
            std::cout << to_csv(t);
            std::cout << "# summary " << t.summary.dump() << "\n";
        } else {
            std::cerr << "wrote " << out << " and " << sidecar_path(out) << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
