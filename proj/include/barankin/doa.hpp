#pragma once

#include <array>
#include <optional>
#include <vector>

#include "barankin/bounds.hpp"
#include "barankin/constraints.hpp"
#include "barankin/moments.hpp"

namespace barankin {

inline const std::vector<double>& qpsk_phases() {
    static const std::vector<double> p{M_PI / 4, 3 * M_PI / 4, -3 * M_PI / 4, -M_PI / 4};
    return p;
}

// Wraps to [-pi, pi).
double wrap_angle(double a);

struct DoaScenario {
    int q_sensors = 4;
    double zeta = 0.5;
    double noise_variance = 0.5;
    double amplitude = 1.0;
    double phase = M_PI / 4;
    double doa_angle = 0.0;
    std::vector<double> phase_set = qpsk_phases();

    void validate() const;
    // theta = (cos, sin, phase, amplitude)
    Vector theta() const;
    double snr() const { return amplitude * amplitude / noise_variance; }
};

// Returns a copy with the amplitude set from SNR in dB.
DoaScenario with_snr_db(DoaScenario s, double snr_db);

struct DoaTestOffsets {
    double h_nu = 0.0;
    double h_phi = M_PI / 2;
    double h_alpha = 1e-5;
};

CVector steering_vector(const DoaScenario& s, double doa_angle);
CVector noiseless_mean(const DoaScenario& s);
// Mean map over theta = (nu_re, nu_im, phase, amplitude).
GaussianMeanModel doa_model(const DoaScenario& s);

// The six distinct log-entries of B for the three offset test points.
struct DoaBEntries {
    double l22 = 0, l23 = 0, l24 = 0, l33 = 0, l34 = 0, l44 = 0;
    std::vector<double> d;  // d_q
    bool saturated() const;
    // Full (P+1) x (P+1) log-matrix with zero first row and column.
    Matrix log_matrix() const;
};

DoaBEntries b_entries_closed_form(const DoaScenario& s, const DoaTestOffsets& off);

// G_B from the entries. Empty when the normalized denominator
// 1 - rho_34^2 is at most 1e-12.
std::optional<double> g_b(const DoaBEntries& e);

// Numerically stable pieces of G_B: G_B = 1 + exp(log c22) * gamma.
struct GbTerms {
    double log_c22 = 0.0;  // -inf when c22 = 0
    double gamma = 0.0;
    double rho34_gap = 1.0;  // 1 - rho_34^2
};
std::optional<GbTerms> g_b_terms(const DoaBEntries& e);

// Per-candidate closed forms. gb_scale multiplies G_B (sensitivity hook).
PointBound lu_cbtb_candidate(const DoaScenario& s, const DoaTestOffsets& off,
                             double gb_scale = 1.0);
PointBound cbtb_candidate(const DoaScenario& s, const DoaTestOffsets& off, double gb_scale = 1.0);

// Same candidates through the generic engine.
TestPointSet make_doa_test_points(const DoaScenario& s, const DoaTestOffsets& off);
Matrix doa_weight();
PointBound lu_cbtb_generic(const DoaScenario& s, const DoaTestOffsets& off);
PointBound cbtb_generic(const DoaScenario& s, const DoaTestOffsets& off);

// D = Btilde (x) e1 e1^T and t = vec(e1 [0, -sin h_nu, 0, 0]).
Matrix doa_d_structured(const DoaScenario& s, const DoaTestOffsets& off);
Vector doa_t_structured(const DoaTestOffsets& off);

struct DoaGrid {
    std::vector<double> h_nu;
    std::vector<double> h_phi{-M_PI, -M_PI / 2, M_PI / 2};
    std::vector<double> h_alpha{1e-5};

    std::vector<DoaTestOffsets> candidates() const;
};

// h_nu = -pi + 2 pi k / n, k = 0..n-1, plus an optional local candidate.
DoaGrid standard_grid(int n = 64, std::optional<double> local_h_nu = 1e-5);
DoaGrid low_complexity_grid(double h_nu = 1e-5);

// Candidate params are (h_nu, h_phi, h_alpha).
BoundResult lu_cbtb_closed_form(const DoaScenario& s, const DoaGrid& grid, double gb_scale = 1.0);
BoundResult cbtb_closed_form(const DoaScenario& s, const DoaGrid& grid, double gb_scale = 1.0);

}  // namespace barankin
