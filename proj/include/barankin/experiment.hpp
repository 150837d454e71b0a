#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "barankin/simulation.hpp"

namespace barankin {

enum class ExperimentKind { SnrSweep, AngleSweep, BoundsOnly, Verify };

struct VerifySettings {
    std::vector<std::string> checks;  // empty runs every check
    double mc_scale = 1.0;            // multiplies Monte-Carlo trial counts
    double gb_perturbation = 0.0;     // relative perturbation of G_B (sensitivity hook)
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::SnrSweep;
    DoaScenario scenario;
    std::vector<double> snr_list_db;
    std::vector<double> angle_list;
    int h_nu_grid_size = 64;
    std::vector<double> h_nu_points;          // overrides the equally spaced grid
    std::optional<double> h_nu_local = 1e-5;  // extra local candidate
    std::vector<double> h_phi_set{-M_PI, -M_PI / 2, M_PI / 2};
    double h_alpha = 1e-5;
    bool low_complexity = false;
    double low_complexity_h_nu = 1e-5;
    bool include_cbtb = true;
    EstimatorSettings estimator;
    std::size_t trials = 10000;
    std::uint64_t seed = 1;
    std::string output;
    VerifySettings verify;

    DoaGrid grid() const;
    BoundSettings bound_settings() const;
};

ExperimentKind parse_kind(const std::string& s);
std::string kind_name(ExperimentKind k);

// Throws ConfigError on malformed input or unknown keys.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
void validate_config(const ExperimentConfig& c);

// Comma-separated list of reals.
std::vector<double> parse_number_list(const std::string& s);
// printf("%.12g")
std::string format_number(double v);

std::string cmd_bounds(const ExperimentConfig& c);
std::string cmd_simulate(const ExperimentConfig& c);

}  // namespace barankin
