#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "barankin/errors.hpp"
#include "barankin/experiment.hpp"
#include "barankin/verification.hpp"

using namespace barankin;

namespace {

enum Exit { kOk = 0, kConfig = 1, kVerify = 2, kNumerical = 3 };

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::string out;
    std::string snr_list;
    std::string angle_list;
    bool low_complexity = false;
    std::optional<double> gb_perturbation;
    std::optional<double> mc_scale;
    std::vector<std::string> checks;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "JSON experiment configuration");
    cmd->add_option("--seed", o.seed, "Base RNG seed");
    cmd->add_option("--out", o.out, "Output file (default stdout)");
}

void add_sweep(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--trials", o.trials, "Monte-Carlo trials per sweep point");
    cmd->add_option("--snr-list", o.snr_list, "Comma-separated SNR values in dB");
    cmd->add_option("--angle-list", o.angle_list, "Comma-separated DOA angles in radians");
    cmd->add_flag("--low-complexity", o.low_complexity, "Add the low-complexity LU-CBTB column");
}

enum class Command { Bounds, Simulate, Verify };

ExperimentConfig build_config(const Overrides& o, Command cmd) {
    ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
    if (o.seed) c.seed = *o.seed;
    if (o.trials) c.trials = *o.trials;
    if (!o.out.empty()) c.output = o.out;
    if (!o.snr_list.empty()) {
        c.snr_list_db = parse_number_list(o.snr_list);
        c.angle_list.clear();
        c.kind = ExperimentKind::SnrSweep;
    }
    if (!o.angle_list.empty()) {
        c.angle_list = parse_number_list(o.angle_list);
        c.snr_list_db.clear();
        c.kind = ExperimentKind::AngleSweep;
    }
    if (o.low_complexity) c.low_complexity = true;
    if (o.gb_perturbation) c.verify.gb_perturbation = *o.gb_perturbation;
    if (o.mc_scale) c.verify.mc_scale = *o.mc_scale;
    if (!o.checks.empty()) c.verify.checks = o.checks;
    switch (cmd) {
        case Command::Bounds:
            c.kind = ExperimentKind::BoundsOnly;
            break;
        case Command::Simulate:
            if (c.kind != ExperimentKind::SnrSweep && c.kind != ExperimentKind::AngleSweep)
                c.kind = !c.angle_list.empty() && c.snr_list_db.empty() ? ExperimentKind::AngleSweep
                                                                         : ExperimentKind::SnrSweep;
            break;
        case Command::Verify:
            c.kind = ExperimentKind::Verify;
            return c;
    }
    validate_config(c);
    return c;
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file: " + path);
    f << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained Barankin-type bounds and the DOA/constant-modulus study"};
    app.require_subcommand(1);
    Overrides o;
    auto* bounds = app.add_subcommand("bounds", "Tabulate closed-form LU-CBTB and CBTB");
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo CML study with bounds");
    auto* verify = app.add_subcommand("verify", "Run the numerical check suite");
    for (auto* cmd : {bounds, simulate, verify}) add_common(cmd, o);
    add_sweep(bounds, o);
    add_sweep(simulate, o);
    verify->add_option("--check", o.checks, "Run only the named checks");
    verify->add_option("--mc-scale", o.mc_scale, "Scale Monte-Carlo trial counts");
    verify->add_option("--gb-perturbation", o.gb_perturbation)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*verify) {
            const ExperimentConfig c = build_config(o, Command::Verify);
            const VerifyReport r = cmd_verify(c);
            emit(r.text(), c.output);
            return r.passed() ? kOk : kVerify;
        }
        const bool is_bounds = static_cast<bool>(*bounds);
        const ExperimentConfig c = build_config(o, is_bounds ? Command::Bounds : Command::Simulate);
        emit(is_bounds ? cmd_bounds(c) : cmd_simulate(c), c.output);
        return kOk;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfig;
    } catch (const AllCandidatesInvalid& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kNumerical;
    } catch (const InvalidInput& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return kConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kNumerical;
    }
}
