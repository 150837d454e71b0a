#include "barankin/doa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "barankin/errors.hpp"

namespace barankin {

namespace {

constexpr double kGuard = 1e-12;

double sensor_angle(int q, int nq) { return 2.0 * M_PI * q / nq; }

bool in_phase_set(const std::vector<double>& set, double phase) {
    const double p = wrap_angle(phase);
    for (double s : set) {
        const double diff = std::abs(wrap_angle(p - s));
        if (diff <= 1e-9) return true;
    }
    return false;
}

void check_offsets(const DoaScenario& s, const DoaTestOffsets& off) {
    if (!std::isfinite(off.h_nu) || !std::isfinite(off.h_phi) || !std::isfinite(off.h_alpha))
        throw InvalidOffset("non-finite test-point offset");
    if (!in_phase_set(s.phase_set, s.phase + off.h_phi))
        throw InvalidOffset("phase offset leaves the discrete phase set");
    if (!(s.amplitude + off.h_alpha > 0.0))
        throw InvalidOffset("amplitude offset makes the amplitude non-positive");
}

}  // namespace

double wrap_angle(double a) {
    double r = std::fmod(a + M_PI, 2.0 * M_PI);
    if (r < 0) r += 2.0 * M_PI;
    r -= M_PI;
    // fmod can land exactly on +pi after the shift.
    if (r >= M_PI) r -= 2.0 * M_PI;
    return r;
}

void DoaScenario::validate() const {
    if (q_sensors < 1) throw InvalidInput("q_sensors must be >= 1");
    if (!std::isfinite(zeta)) throw InvalidInput("zeta must be finite");
    if (!(noise_variance > 0.0) || !std::isfinite(noise_variance))
        throw InvalidInput("noise variance must be positive");
    if (!(amplitude > 0.0) || !std::isfinite(amplitude))
        throw InvalidInput("amplitude must be positive");
    if (phase_set.empty()) throw InvalidInput("phase set is empty");
    if (!in_phase_set(phase_set, phase)) throw InvalidInput("phase is not in the phase set");
    if (!std::isfinite(doa_angle)) throw InvalidInput("doa angle must be finite");
}

Vector DoaScenario::theta() const {
    Vector t(4);
    const double a = wrap_angle(doa_angle);
    t << std::cos(a), std::sin(a), phase, amplitude;
    return t;
}

DoaScenario with_snr_db(DoaScenario s, double snr_db) {
    s.amplitude = std::sqrt(std::pow(10.0, snr_db / 10.0) * s.noise_variance);
    return s;
}

CVector steering_vector(const DoaScenario& s, double doa_angle) {
    CVector a(s.q_sensors);
    for (int q = 0; q < s.q_sensors; ++q)
        a(q) = std::polar(1.0, s.zeta * std::cos(doa_angle - sensor_angle(q, s.q_sensors)));
    return a;
}

CVector noiseless_mean(const DoaScenario& s) {
    return s.amplitude * std::polar(1.0, s.phase) * steering_vector(s, wrap_angle(s.doa_angle));
}

GaussianMeanModel doa_model(const DoaScenario& s) {
    s.validate();
    GaussianMeanModel m;
    const int nq = s.q_sensors;
    const double zeta = s.zeta;
    m.obs_dim = nq;
    m.noise_variance = s.noise_variance;
    m.nondifferentiable = {2};
    m.mean_map = [nq, zeta](const Vector& th) -> CVector {
        CVector mu(nq);
        const Complex g = th(3) * std::polar(1.0, th(2));
        for (int q = 0; q < nq; ++q) {
            const double ang = sensor_angle(q, nq);
            mu(q) = g * std::polar(1.0, zeta * (th(0) * std::cos(ang) + th(1) * std::sin(ang)));
        }
        return mu;
    };
    return m;
}

bool DoaBEntries::saturated() const {
    return std::max({l22, l23, l24, l33, l34, l44}) > kSaturationLog;
}

Matrix DoaBEntries::log_matrix() const {
    Matrix m = Matrix::Zero(4, 4);
    m(1, 1) = l22;
    m(1, 2) = m(2, 1) = l23;
    m(1, 3) = m(3, 1) = l24;
    m(2, 2) = l33;
    m(2, 3) = m(3, 2) = l34;
    m(3, 3) = l44;
    return m;
}

DoaBEntries b_entries_closed_form(const DoaScenario& s, const DoaTestOffsets& off) {
    s.validate();
    check_offsets(s, off);
    const double a = s.amplitude, s2 = s.noise_variance, ha = off.h_alpha;
    const double nu = wrap_angle(s.doa_angle);
    const int nq = s.q_sensors;
    DoaBEntries e;
    e.d.resize(static_cast<size_t>(nq));
    // Product forms avoid cancellation at small offsets:
    // d_q = -2 zeta sin(A + h/2) sin(h/2), 1 - cos x = 2 sin^2(x/2).
    double sum_1mcos = 0.0, sum_sin = 0.0;
    const double sh = std::sin(0.5 * off.h_nu);
    for (int q = 0; q < nq; ++q) {
        const double aq = nu - sensor_angle(q, nq);
        const double d = -2.0 * s.zeta * std::sin(aq + 0.5 * off.h_nu) * sh;
        e.d[static_cast<size_t>(q)] = d;
        const double hs = std::sin(0.5 * d);
        sum_1mcos += 2.0 * hs * hs;
        sum_sin += std::sin(d);
    }
    const double hp = std::sin(0.5 * off.h_phi);
    const double v_phi = 2.0 * hp * hp;
    e.l22 = 4.0 * a * a / s2 * sum_1mcos;
    e.l23 = 2.0 * a * a / s2 * (v_phi * sum_1mcos + std::sin(off.h_phi) * sum_sin);
    e.l24 = -2.0 * ha * a / s2 * sum_1mcos;
    e.l33 = 4.0 * a * a * nq / s2 * v_phi;
    e.l34 = -2.0 * ha * a * nq / s2 * v_phi;
    e.l44 = 2.0 * nq * ha * ha / s2;
    return e;
}

std::optional<GbTerms> g_b_terms(const DoaBEntries& e) {
    const SignedLog c22 = signed_log_expm1(e.l22);
    const SignedLog c23 = signed_log_expm1(e.l23);
    const SignedLog c24 = signed_log_expm1(e.l24);
    const SignedLog c33 = signed_log_expm1(e.l33);
    const SignedLog c34 = signed_log_expm1(e.l34);
    const SignedLog c44 = signed_log_expm1(e.l44);
    if (c33.sign <= 0 || c44.sign <= 0) return std::nullopt;
    auto corr = [](const SignedLog& cij, const SignedLog& cii, const SignedLog& cjj) {
        if (cij.sign == 0 || cii.sign <= 0) return 0.0;
        return cij.sign * std::exp(cij.log_abs - 0.5 * cii.log_abs - 0.5 * cjj.log_abs);
    };
    const double r23 = corr(c23, c22, c33);
    const double r24 = corr(c24, c22, c44);
    const double r34 = corr(c34, c33, c44);
    GbTerms g;
    g.rho34_gap = 1.0 - r34 * r34;
    if (!(g.rho34_gap > kGuard)) return std::nullopt;
    g.log_c22 = c22.sign > 0 ? c22.log_abs : -std::numeric_limits<double>::infinity();
    // Sum-of-squares form of rho^T R^{-1} rho for the 2 x 2 correlation block.
    const double r = r23 - r24 * r34;
    g.gamma = r * r / g.rho34_gap + r24 * r24;
    return g;
}

std::optional<double> g_b(const DoaBEntries& e) {
    const auto g = g_b_terms(e);
    if (!g) return std::nullopt;
    return 1.0 + std::exp(g->log_c22) * g->gamma;
}

PointBound lu_cbtb_candidate(const DoaScenario& s, const DoaTestOffsets& off, double gb_scale) {
    const DoaBEntries e = b_entries_closed_form(s, off);
    PointBound pb;
    pb.saturated = e.saturated();
    const auto g = g_b_terms(e);
    if (!g) {
        pb.valid = false;
        return pb;
    }
    const double sn = std::sin(off.h_nu);
    const double cs = std::cos(off.h_nu);
    const double num = sn * sn;
    if (!std::isfinite(g->log_c22)) {
        // h_nu = 0: both numerator and the nu-excess vanish.
        pb.value = 0.0;
        return pb;
    }
    const double a = 1.0 - gb_scale * cs * cs * g->gamma;
    const double rest = gb_scale == 1.0 ? num : 1.0 - gb_scale * cs * cs;
    // Guard on (B22 - cos^2 G_B) / B22, formed without overflow.
    const double w22 = -std::expm1(-e.l22);
    const double normalized = w22 * a + rest * std::exp(-e.l22);
    if (!(normalized > kGuard)) {
        pb.valid = false;
        return pb;
    }
    const double k = std::exp(-g->log_c22);
    pb.value = num * k / (a + rest * k);
    pb.valid = std::isfinite(pb.value);
    return pb;
}

PointBound cbtb_candidate(const DoaScenario& s, const DoaTestOffsets& off, double gb_scale) {
    const DoaBEntries e = b_entries_closed_form(s, off);
    PointBound pb;
    pb.saturated = e.saturated();
    const auto g = g_b_terms(e);
    if (!g) {
        pb.valid = false;
        return pb;
    }
    const double hs = std::sin(0.5 * off.h_nu);
    const double num = 4.0 * hs * hs;
    if (!std::isfinite(g->log_c22)) {
        pb.value = 0.0;
        return pb;
    }
    const double k = std::exp(-g->log_c22);
    // (B22 - G_B) / c22
    const double normalized = (1.0 - gb_scale * g->gamma) + (1.0 - gb_scale) * k;
    if (!(normalized > kGuard)) {
        pb.valid = false;
        return pb;
    }
    pb.value = num * k / normalized;
    pb.valid = std::isfinite(pb.value);
    return pb;
}

TestPointSet make_doa_test_points(const DoaScenario& s, const DoaTestOffsets& off) {
    s.validate();
    check_offsets(s, off);
    const Vector th = s.theta();
    const double nu = wrap_angle(s.doa_angle);
    TestPointSet pts{th, {th, th, th}};
    pts.points[0](0) = std::cos(nu + off.h_nu);
    pts.points[0](1) = std::sin(nu + off.h_nu);
    pts.points[1](2) = wrap_angle(s.phase + off.h_phi);
    pts.points[2](3) = s.amplitude + off.h_alpha;
    return pts;
}

Matrix doa_weight() {
    Matrix w = Matrix::Zero(4, 4);
    w(0, 0) = w(1, 1) = 1.0;
    return w;
}

PointBound lu_cbtb_generic(const DoaScenario& s, const DoaTestOffsets& off) {
    const TestPointSet pts = make_doa_test_points(s, off);
    const MomentMatrixB b = b_matrix_gaussian(doa_model(s), pts);
    static const ConstraintSpec spec = make_doa_cm_constraint();
    return lu_cbtb_for_points(pts, doa_weight(), spec, b);
}

PointBound cbtb_generic(const DoaScenario& s, const DoaTestOffsets& off) {
    const TestPointSet pts = make_doa_test_points(s, off);
    const MomentMatrixB b = b_matrix_gaussian(doa_model(s), pts);
    return cbtb_for_points(pts, doa_weight(), b);
}

Matrix doa_d_structured(const DoaScenario& s, const DoaTestOffsets& off) {
    const DoaBEntries e = b_entries_closed_form(s, off);
    const Matrix b = e.log_matrix().array().exp().matrix();
    const double c = std::cos(off.h_nu);
    Matrix bt = b;
    // Rows/columns touching the nu test point carry cos(h_nu).
    for (int i = 0; i < 4; ++i)
        if (i != 1) {
            bt(1, i) *= c;
            bt(i, 1) *= c;
        }
    Matrix e11 = Matrix::Zero(3, 3);
    e11(0, 0) = 1.0;
    return kronecker(bt, e11);
}

Vector doa_t_structured(const DoaTestOffsets& off) {
    Matrix t = Matrix::Zero(3, 4);
    t(0, 1) = -std::sin(off.h_nu);
    return vec(t);
}

std::vector<DoaTestOffsets> DoaGrid::candidates() const {
    std::vector<DoaTestOffsets> c;
    for (double hn : h_nu)
        for (double hp : h_phi)
            for (double ha : h_alpha) c.push_back({hn, hp, ha});
    return c;
}

DoaGrid standard_grid(int n, std::optional<double> local_h_nu) {
    if (n < 1) throw InvalidInput("h_nu grid size must be >= 1");
    DoaGrid g;
    for (int k = 0; k < n; ++k) g.h_nu.push_back(-M_PI + 2.0 * M_PI * k / n);
    if (local_h_nu && std::find(g.h_nu.begin(), g.h_nu.end(), *local_h_nu) == g.h_nu.end())
        g.h_nu.push_back(*local_h_nu);
    return g;
}

DoaGrid low_complexity_grid(double h_nu) {
    DoaGrid g;
    g.h_nu = {h_nu};
    return g;
}

namespace {

BoundResult sweep(const DoaScenario& s, const DoaGrid& grid,
                  PointBound (*cand)(const DoaScenario&, const DoaTestOffsets&, double),
                  double gb_scale) {
    s.validate();
    const auto offs = grid.candidates();
    std::vector<std::vector<double>> params;
    params.reserve(offs.size());
    for (const auto& o : offs) {
        check_offsets(s, o);
        params.push_back({o.h_nu, o.h_phi, o.h_alpha});
    }
    return supremum_bound(params, [&](std::size_t i) { return cand(s, offs[i], gb_scale); });
}

}  // namespace

BoundResult lu_cbtb_closed_form(const DoaScenario& s, const DoaGrid& grid, double gb_scale) {
    return sweep(s, grid, &lu_cbtb_candidate, gb_scale);
}

BoundResult cbtb_closed_form(const DoaScenario& s, const DoaGrid& grid, double gb_scale) {
    return sweep(s, grid, &cbtb_candidate, gb_scale);
}

}  // namespace barankin
