#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "plab/wave.hpp"
#include "plab/rng.hpp"

#include <cmath>

using namespace plab;

namespace {

// k = const, f = K = h = 0: decoupled damped oscillators
// a_i'' + c a_i' + lambda_i a_i = 0
ModelSpec linear_case(int n_modes, double damping) {
    ModelSpec m;
    m.name = "linear";
    m.domain_length = M_PI;
    m.n_modes = n_modes;
    m.dt = 1e-3;
    m.k_expr = "const";
    m.k = [damping](double) { return damping; };
    m.k0 = damping > 0.0 ? damping : 1e-9;
    m.k1 = damping > 0.0 ? damping : 1e-9;
    m.kernel = Eigen::MatrixXd::Zero(1, 1);
    m.K0_declared = 0.0;
    m.h_modes = Eigen::VectorXd::Zero(n_modes);
    m.h0_declared = 0.0;
    m.f = ScalarField::zero();
    m.df_dv = ScalarField::zero();
    m.df_dt = ScalarField::zero();
    m.F = ScalarField::zero();
    m.dF_dt = ScalarField::zero();
    m.f_expr = m.df_dv_expr = m.df_dt_expr = m.F_expr = m.dF_dt_expr = "0";
    m.c0 = DecayFunction::constant(1.0);
    return m;
}

// closed-form underdamped evolution of (a, b) per mode; requires c^2 < 4 lambda_i
WaveState linear_exact(const ModelSpec& m, double damping, const WaveState& V0, double t) {
    WaveState out;
    out.a.resize(m.n_modes);
    out.b.resize(m.n_modes);
    for (int i = 0; i < m.n_modes; ++i) {
        const double sq = (i + 1) * M_PI / m.domain_length;
        const double lambda = sq * sq;
        const double omega = std::sqrt(lambda - 0.25 * damping * damping);
        const double A = V0.a[i];
        const double aprime0 = sq * V0.b[i];
        const double B = (aprime0 + 0.5 * damping * A) / omega;
        const double decay = std::exp(-0.5 * damping * t);
        const double a = decay * (A * std::cos(omega * t) + B * std::sin(omega * t));
        const double aprime =
            decay * (-0.5 * damping * (A * std::cos(omega * t) + B * std::sin(omega * t)) +
                     omega * (-A * std::sin(omega * t) + B * std::cos(omega * t)));
        out.a[i] = a;
        out.b[i] = aprime / sq;
    }
    return out;
}

ModelSpec shrink_modes(ModelSpec m, int n) {
    m.n_modes = n;
    const Eigen::VectorXd h = m.h_modes;
    m.h_modes = Eigen::VectorXd::Zero(n);
    m.h_modes.head(std::min<int>(n, h.size())) = h.head(std::min<int>(n, h.size()));
    return m;
}

WaveState low_mode_state(int n_modes) {
    WaveState V;
    V.a = Eigen::VectorXd::Zero(n_modes);
    V.b = Eigen::VectorXd::Zero(n_modes);
    V.a[0] = 0.8;
    V.a[1] = -0.4;
    V.a[2] = 0.2;
    V.a[3] = -0.1;
    V.b[0] = 0.3;
    V.b[1] = 0.5;
    V.b[3] = -0.2;
    return V;
}

} // namespace

TEST_CASE("first Dirichlet eigenvalue of the interval") {
    ModelSpec m = default_benchmark();
    CHECK(m.lambda1() == doctest::Approx(1.0)); // (pi/pi)^2
    m.domain_length = 1.0;
    CHECK(m.lambda1() == doctest::Approx(M_PI * M_PI));
    m.domain_length = 2.0 * M_PI;
    CHECK(m.lambda1() == doctest::Approx(0.25));
}

TEST_CASE("benchmark passes the hypothesis gate with the expected threshold") {
    const ModelSpec m = default_benchmark();
    const auto rep = validate_hypotheses(m, 0.5, 10.0, default_t_probes());
    CHECK(rep.ok);
    CHECK(rep.lambda1 == doctest::Approx(1.0));
    // df/dv >= 0 beyond |v| = 2, so the grid threshold must sit below that
    CHECK(rep.M_mu0 <= 2.0);
    CHECK(rep.M_mu0 >= 0.4);
    CHECK(rep.c0_verdict.status == Membership::CertifiedDecay);
}

TEST_CASE("linear nonlinearity passes with a zero threshold") {
    ModelSpec m = default_benchmark();
    m.f_expr = "v";
    m.f = ScalarField::from_expression("v");
    m.df_dv = ScalarField::from_expression("1");
    m.df_dt = ScalarField::zero();
    m.df_dt_expr = "0";
    m.F_expr = "v^2/2";
    m.F = ScalarField::from_expression("v^2/2");
    m.dF_dt = ScalarField::zero();
    m.dF_dt_expr = "0";
    const auto rep = validate_hypotheses(m, 0.5, 10.0, default_t_probes());
    CHECK(rep.ok);
    CHECK(rep.M_mu0 == doctest::Approx(0.0));
}

TEST_CASE("designed failures trip the right hypotheses") {
    const auto h3 = validate_hypotheses(benchmark_with_H3_violated(), 0.5, 10.0,
                                        default_t_probes());
    CHECK_FALSE(h3.ok);
    CHECK_FALSE(h3.h3);
    REQUIRE(!h3.failures.empty());
    bool found_h3 = false;
    for (const auto& w : h3.failures) found_h3 |= w.hypothesis == "H3";
    CHECK(found_h3);

    const auto h4 = validate_hypotheses(benchmark_with_H4_violated(), 0.5, 10.0,
                                        default_t_probes());
    CHECK_FALSE(h4.ok);
    CHECK_FALSE(h4.h4);
    bool found_h4 = false;
    for (const auto& w : h4.failures)
        if (w.hypothesis == "H4" && w.value == doctest::Approx(-2.0)) found_h4 = true;
    CHECK(found_h4);

    const auto h6 = validate_hypotheses(benchmark_with_H6_violated(), 0.5, 10.0,
                                        default_t_probes());
    CHECK_FALSE(h6.ok);
    CHECK_FALSE(h6.h6);
    CHECK(h6.c0_verdict.status == Membership::Refuted);
}

TEST_CASE("rhs: zero state with forcing only") {
    ModelSpec m = linear_case(8, 1.0);
    m.h_modes[2] = 1.7;
    m.h0_declared = 1.7;
    WaveIntegrator I(m);
    WaveState zero;
    zero.a = Eigen::VectorXd::Zero(8);
    zero.b = Eigen::VectorXd::Zero(8);
    const WaveState d = I.rhs(0.0, 0.0, zero);
    CHECK(d.a.norm() == doctest::Approx(0.0));
    for (int i = 0; i < 8; ++i) CHECK(d.b[i] == doctest::Approx(m.h_modes[i]));
}

TEST_CASE("rhs: modal projection of the nonlinearity against a finer quadrature") {
    const ModelSpec m = default_benchmark();
    WaveIntegrator I(m);
    WaveState V;
    V.a = Eigen::VectorXd::Zero(m.n_modes);
    V.b = Eigen::VectorXd::Zero(m.n_modes);
    V.a[0] = 1.3; // single-mode state
    const double t = 0.4;
    const WaveState d = I.rhs(0.0, t, V);

    // oracle: trapezoid with 20000 points of int f(t, v(x)) e_1(x) dx
    const double ell = m.domain_length;
    const int n = 20000;
    double acc = 0.0;
    for (int q = 0; q <= n; ++q) {
        const double x = ell * q / n;
        const double v = V.a[0] * std::sqrt(2.0 / ell) * std::sin(x); // phi_1 = e_1/sqrt(lambda_1)
        const double w = (q == 0 || q == n) ? 0.5 : 1.0;
        acc += w * m.f(t, v) * std::sqrt(2.0 / ell) * std::sin(x);
    }
    acc *= ell / n;
    // db_1 = -sqrt(lambda_1) a_1 - k(t) b_1 + kernel b_1 + h_1 - (f)_1
    const double expected = -V.a[0] - m.k(t) * V.b[0] + m.kernel(0, 0) * V.b[0] +
                            m.h_modes[0] - acc;
    CHECK(d.b[0] == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("step: linear diagonal case hits the closed form at fourth order") {
    const double damping = 1.0;
    ModelSpec m = linear_case(8, damping);
    const WaveState V0 = low_mode_state(8);
    const WaveState exact = linear_exact(m, damping, V0, 1.0);

    double errors[3];
    const double dts[3] = {4e-3, 2e-3, 1e-3};
    for (int i = 0; i < 3; ++i) {
        ModelSpec mi = m;
        mi.dt = dts[i];
        WaveIntegrator I(mi);
        auto ws = I.make_workspace();
        WaveState st = V0;
        const long steps = std::llround(1.0 / dts[i]);
        for (long k = 0; k < steps; ++k)
            I.step_inplace(static_cast<double>(k) * dts[i], dts[i], st, ws);
        errors[i] = std::sqrt((st.a - exact.a).squaredNorm() + (st.b - exact.b).squaredNorm());
    }
    const double order1 = std::log2(errors[0] / errors[1]);
    const double order2 = std::log2(errors[1] / errors[2]);
    CHECK(order1 >= 3.8);
    CHECK(order2 >= 3.8);
    CHECK(errors[2] < 1e-8);
}

TEST_CASE("step: zero data with zero sources stays zero") {
    ModelSpec m = linear_case(8, 1.0);
    WaveIntegrator I(m);
    auto ws = I.make_workspace();
    WaveState st;
    st.a = Eigen::VectorXd::Zero(8);
    st.b = Eigen::VectorXd::Zero(8);
    for (int k = 0; k < 1000; ++k) I.step_inplace(k * 1e-3, 1e-3, st, ws);
    CHECK(st.xnorm() == doctest::Approx(0.0));
}

TEST_CASE("step: undamped energy conservation") {
    ModelSpec m = linear_case(8, 0.0); // k = 0, f = K = h = 0
    WaveIntegrator I(m);
    auto ws = I.make_workspace();
    WaveState st = low_mode_state(8);
    const double e0 = st.xnorm2();
    for (int k = 0; k < 1000; ++k) I.step_inplace(k * 1e-3, 1e-3, st, ws);
    CHECK(std::abs(st.xnorm2() - e0) < 1e-8 * e0);
}

TEST_CASE("integration blowup is detected and carries a timestamp") {
    ModelSpec m = default_benchmark();
    WaveIntegrator I(m);
    auto ws = I.make_workspace();
    WaveState st;
    st.a = Eigen::VectorXd::Constant(m.n_modes, 3e7);
    st.b = Eigen::VectorXd::Zero(m.n_modes);
    bool blew_up = false;
    try {
        for (int k = 0; k < 100; ++k) I.step_inplace(k * 1e-3, 1e-3, st, ws);
    } catch (const BlowupError& e) {
        blew_up = true;
        CHECK(e.time > 0.0);
    }
    CHECK(blew_up);
}

TEST_CASE("nonlocal kernel bound holds on random states") {
    const ModelSpec m = default_benchmark();
    WaveIntegrator I(m);
    Rng rng(314);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd b(m.n_modes);
        for (int i = 0; i < m.n_modes; ++i) b[i] = rng.gaussian();
        CHECK(I.apply_kernel(b).norm() <= m.K0() * b.norm() + 1e-12);
    }
}

TEST_CASE("growth bounds of the benchmark nonlinearity") {
    const ModelSpec m = default_benchmark();
    for (double t : default_t_probes()) {
        const double c0t = m.c0(t);
        for (double v = -6.0; v <= 6.0; v += 0.05) {
            CHECK(std::abs(m.f(t, v)) <= 2.0 * c0t * (1.0 + std::abs(v * v * v)) + 1e-12);
            CHECK(std::abs(m.F(t, v)) <= 4.0 * c0t * (1.0 + v * v * v * v) + 1e-12);
            const double w = v + 0.7;
            CHECK(std::abs(m.F(t, v) - m.F(t, w)) <=
                  8.0 * c0t * (1.0 + std::abs(v * v * v) + std::abs(w * w * w)) *
                          std::abs(v - w) +
                      1e-12);
        }
    }
}

TEST_CASE("wave process satisfies identity and cocycle laws") {
    ModelSpec m = shrink_modes(default_benchmark(), 8); // keep the unit test quick
    auto S = make_process(m, m.dt);
    Rng rng(99);
    std::vector<ProcessLawProbe> probes;
    for (int i = 0; i < 5; ++i) {
        const double s = -0.2 + 1e-3 * static_cast<double>(rng.raw() % 200);
        const double r = s + 1e-3 * static_cast<double>(rng.raw() % 150);
        const double t = r + 1e-3 * static_cast<double>(rng.raw() % 150);
        probes.push_back({t, r, s, rng.ball_point(16, 2.0)});
    }
    const auto report = verify_process_laws(S, probes);
    CHECK(report.max_identity_rel == doctest::Approx(0.0));
    CHECK(report.max_cocycle_rel < 1e-12);
}

TEST_CASE("translated problem matches the process path") {
    ModelSpec m = shrink_modes(default_benchmark(), 8);
    WaveIntegrator I(m);
    auto S = make_process(m, m.dt);
    Rng rng(7);
    const State x0 = rng.ball_point(16, 1.5);

    const double s = 0.25, t = 0.45;
    const State via_process = S.advance(t, s, x0);

    // integrate the shifted problem from local time 0 with explicit shift s
    WaveState st = WaveState::from_flat(x0);
    auto ws = I.make_workspace();
    const long steps = std::llround((t - s) / m.dt);
    for (long k = 0; k < steps; ++k)
        I.step_inplace(s + static_cast<double>(k) * m.dt, m.dt, st, ws);
    const State direct = st.to_flat();
    for (std::size_t i = 0; i < direct.size(); ++i)
        CHECK(std::abs(direct[i] - via_process[i]) < 1e-12);
}

TEST_CASE("model spec JSON round trip") {
    const ModelSpec m = default_benchmark();
    const ModelSpec n = ModelSpec::from_json_text(m.to_json());
    for (double t : {-2.0, 0.0, 1.0})
        CHECK(n.k(t) == doctest::Approx(m.k(t)).epsilon(1e-14));
    for (double t : {0.3, 2.0})
        for (double v : {-1.5, 0.2, 2.5}) {
            CHECK(n.f(t, v) == doctest::Approx(m.f(t, v)).epsilon(1e-13));
            CHECK(n.F(t, v) == doctest::Approx(m.F(t, v)).epsilon(1e-13));
            CHECK(n.df_dv(t, v) == doctest::Approx(m.df_dv(t, v)).epsilon(1e-13));
        }
    CHECK(n.h0() == doctest::Approx(m.h0()));
    CHECK(n.K0() == doctest::Approx(m.K0()));
    CHECK(n.c0(5.0) == doctest::Approx(3.0));
}

TEST_CASE("lipschitz check: identical initial data is trivially fine") {
    ModelSpec m = shrink_modes(default_benchmark(), 8);
    WaveIntegrator I(m);
    WaveState V = WaveState::from_flat(Rng(3).ball_point(16, 1.0));
    const auto report = lipschitz_check(I, 0.0, 0.2, {{V, V}}, m.dt, 10.0, 0.05);
    CHECK(report.ok);
    CHECK(report.pairs[0].max_ratio == doctest::Approx(0.0));
}

TEST_CASE("lipschitz check: linear flow against the exact growth envelope") {
    const double damping = 1.0;
    ModelSpec m = linear_case(6, damping);
    WaveIntegrator I(m);
    Rng rng(12);
    std::vector<std::pair<WaveState, WaveState>> pairs;
    for (int i = 0; i < 4; ++i) {
        pairs.emplace_back(WaveState::from_flat(rng.ball_point(12, 1.0)),
                           WaveState::from_flat(rng.ball_point(12, 1.0)));
    }
    // linear case: d/dt ||Z||^2 = -2k ||z_t||^2 <= 0, so c = 0 works
    const auto report = lipschitz_check(I, 0.0, 1.0, pairs, m.dt, 0.0, 0.05);
    CHECK(report.ok);

    // two-sided: the difference flow cannot decay faster than the full-damping
    // envelope e^{-k tau} (each mode's quadratic envelope decays at rate k)
    auto ws = I.make_workspace();
    for (auto [x, y] : pairs) {
        const double z0 = std::sqrt((x.a - y.a).squaredNorm() + (x.b - y.b).squaredNorm());
        for (int k = 0; k < 1000; ++k) {
            I.step_inplace(k * 1e-3, 1e-3, x, ws);
            I.step_inplace(k * 1e-3, 1e-3, y, ws);
        }
        const double z1 = std::sqrt((x.a - y.a).squaredNorm() + (x.b - y.b).squaredNorm());
        CHECK(z1 >= 0.2 * std::exp(-damping * 1.0) * z0);
    }
}
