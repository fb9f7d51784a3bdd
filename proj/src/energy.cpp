#include "plab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace plab {

ConstantsLedger compute_constants(const ModelSpec& spec, double mu0, double e0_scan_box,
                                  const std::vector<double>& t_probes) {
    ConstantsLedger L;
    L.lambda1 = spec.lambda1();
    if (!(mu0 > 0.0 && mu0 < L.lambda1)) throw EnergyError("mu0 must lie in (0, lambda1)");
    L.mu0 = mu0;
    L.k0 = spec.k0;
    L.k1 = spec.k1;
    L.K0 = spec.K0();
    L.h0 = spec.h0();
    L.omega_measure = spec.omega_measure();
    L.c0 = spec.c0;

    const HypothesisReport hyp = validate_hypotheses(spec, mu0, e0_scan_box / 5.0, t_probes);
    if (!hyp.ok) throw EnergyError("compute_constants requires a validated model");
    L.M = hyp.M_mu0;
    L.L0_scale = hyp.L0_scale;

    // e0: max of F - v f - (mu0/2) v^2 over M < |v| <= box, clamped at 0
    {
        double worst = 0.0;
        const int n_scan = 4000;
        for (int j = 0; j <= n_scan; ++j) {
            const double v_abs = L.M + (e0_scan_box - L.M) * static_cast<double>(j) / n_scan;
            if (v_abs <= L.M || v_abs == 0.0) continue;
            for (double sign : {1.0, -1.0}) {
                const double v = sign * v_abs;
                for (double t : t_probes) {
                    const double gap =
                        spec.F(t, v) - v * spec.f(t, v) - 0.5 * mu0 * v * v;
                    worst = std::max(worst, gap);
                }
            }
        }
        L.e0 = worst;
    }

    L.K_star = 1.0 / std::sqrt(L.lambda1);
    L.beta = 0.8 * (1.0 - mu0 / L.lambda1);
    const double budget = 1.0 - L.K0 / L.k0;
    if (!(budget > 0.0)) throw EnergyError("damping budget requires K0 < k0");
    const double load = L.K_star * L.k1 / L.k0 + 1.0 / L.k0 +
                        3.0 * L.K0 * L.K0 / ((L.lambda1 - mu0) * L.k0) +
                        (L.lambda1 - mu0) / (2.0 * L.k0 * L.lambda1);
    L.eps1 = budget / load;

    L.eps_ctr = std::min(std::sqrt(L.lambda1), L.k0);
    L.T_ctr = 1.0 + std::log(3.0) / L.eps_ctr;
    L.mu_ctr = std::exp(-L.eps_ctr);
    L.r_exp = 2;
    L.c_L4_pow4 = (spec.domain_length / 3.0) / L.lambda1;

    // strictly positive floor so sourceless models keep valid decay functions
    const auto positive_const = [](double x) { return DecayFunction::constant(std::max(x, 1e-300)); };
    const double m4 = 1.0 + L.M * L.M * L.M * L.M;
    L.C0 = scale_sqrt(spec.c0, 8.0 * m4 * L.omega_measure, false);
    const double h_term = 4.0 * L.h0 * L.h0 / (L.lambda1 - mu0);
    L.d0 = combine(L.C0, positive_const(h_term), CombineOp::Sum);
    // g0 = e0 |O| + 8 c0 (1+M^4) |O| + 8 M c0 (1+M^4) + C0
    {
        DecayFunction mid = scale_sqrt(spec.c0, 8.0 * m4 * (L.omega_measure + L.M), false);
        DecayFunction sum = combine(mid, L.C0, CombineOp::Sum);
        L.g0 = combine(positive_const(L.e0 * L.omega_measure), sum, CombineOp::Sum);
    }
    // delta1 = beta eps1 d0 + c0 + eps1 g0 + 4 eps1 h0^2/(lambda1 - mu0)
    {
        DecayFunction part = combine(scale_sqrt(L.d0, L.beta * L.eps1, false), spec.c0,
                                     CombineOp::Sum);
        part = combine(part, scale_sqrt(L.g0, L.eps1, false), CombineOp::Sum);
        L.delta1 = combine(part, positive_const(L.eps1 * h_term), CombineOp::Sum);
    }
    L.alpha0 = scale_sqrt(spec.c0, 4.0 * std::max(L.omega_measure, L.c_L4_pow4), false);
    return L;
}

std::string ConstantsLedger::dump() const {
    std::ostringstream os;
    os.precision(17);
    os << "lambda1 = " << lambda1 << "   # first Dirichlet eigenvalue (pi/length)^2\n";
    os << "mu0 = " << mu0 << "   # chosen in (0, lambda1)\n";
    os << "k0 = " << k0 << ", k1 = " << k1 << "   # damping range\n";
    os << "K0 = " << K0 << "   # kernel norm\n";
    os << "h0 = " << h0 << "   # forcing norm\n";
    os << "|Omega| = " << omega_measure << "\n";
    os << "M = " << M << "   # least box threshold with df/dv > -mu0 and f/v > -mu0 beyond it\n";
    os << "e0 = " << e0 << "   # max of F - v f - (mu0/2) v^2 over M < |v| <= box\n";
    os << "K_star = " << K_star << "   # = lambda1^{-1/2}, Poincare pairing constant\n";
    os << "eps1 = " << eps1
       << "   # = (1 - K0/k0) / (K* k1/k0 + 1/k0 + 3 K0^2/((lambda1-mu0) k0) + "
          "(lambda1-mu0)/(2 k0 lambda1))\n";
    os << "beta = " << beta << "   # = (4/5)(1 - mu0/lambda1)\n";
    os << "eps_ctr = " << eps_ctr << "   # = min{sqrt(lambda1), k0}\n";
    os << "T_ctr = " << T_ctr << "   # = 1 + ln(3)/eps_ctr\n";
    os << "mu_ctr = " << mu_ctr << "   # = e^{-eps_ctr} = 3 e^{-eps_ctr T_ctr}\n";
    os << "r_exp = " << r_exp << "   # squared-norm contraction exponent\n";
    os << "c_L4^4 = " << c_L4_pow4 << "   # ||v||_{L4}^4 <= c_L4^4 ||v||_{H1}^4\n";
    os << "L0_scale = " << L0_scale << "   # L0(t) = L0_scale * c0(t)\n";
    os << "c0 = " << c0.description() << "\n";
    os << "C0 = " << C0.description() << "   # 8 (1+M^4) |Omega| c0\n";
    os << "d0 = " << d0.description() << "   # C0 + 4 h0^2/(lambda1-mu0)\n";
    os << "g0 = " << g0.description()
       << "   # e0 |Omega| + 8 c0 (1+M^4) |Omega| + 8 M c0 (1+M^4) + C0\n";
    os << "delta1 = " << delta1.description()
       << "   # beta eps1 d0 + c0 + eps1 g0 + 4 eps1 h0^2/(lambda1-mu0)\n";
    os << "alpha0 = " << alpha0.description() << "   # 4 max{|Omega|, c_L4^4} c0\n";
    return os.str();
}

double energy(const WaveIntegrator& I, const ConstantsLedger& L, double s, double t,
              const WaveState& state, WaveIntegrator::Workspace& ws) {
    const double quad = 0.5 * state.xnorm2();
    const double f_int = I.integrate_F(t + s, state.a, ws);
    const double vl2 = I.l2_norm_of_v(state.a);
    return quad + f_int + 0.25 * (L.lambda1 + L.mu0) * vl2 * vl2 + L.C0(t + s);
}

double energy(const WaveIntegrator& I, const ConstantsLedger& L, double s, double t,
              const WaveState& state) {
    auto ws = I.make_workspace();
    return energy(I, L, s, t, state, ws);
}

double lyapunov(const WaveIntegrator& I, const ConstantsLedger& L, double s, double t,
                const WaveState& state, double eps, WaveIntegrator::Workspace& ws) {
    if (!(eps >= 0.0 && eps <= L.eps1 * (1.0 + 1e-12)))
        throw EnergyError("lyapunov requires 0 <= eps <= eps1");
    const double quad = 0.5 * state.xnorm2();
    const double f_int = I.integrate_F(t + s, state.a, ws);
    return quad + f_int - I.inner_h_v(state.a) + eps * I.inner_v_vt(state.a, state.b);
}

double lyapunov(const WaveIntegrator& I, const ConstantsLedger& L, double s, double t,
                const WaveState& state, double eps) {
    auto ws = I.make_workspace();
    return lyapunov(I, L, s, t, state, eps, ws);
}

TrajectoryDiagnostics check_decay_inequality(const WaveIntegrator& I, const ConstantsLedger& L,
                                             double s, const Trajectory& traj, double eps,
                                             double tol_decay) {
    if (!(eps > 0.0 && eps <= L.eps1 * (1.0 + 1e-12)))
        throw EnergyError("decay inequality requires 0 < eps <= eps1");
    if (traj.states.size() < 3) throw EnergyError("trajectory too short for finite differences");

    TrajectoryDiagnostics diag;
    auto ws = I.make_workspace();
    diag.times = traj.times;
    diag.E_values.reserve(traj.states.size());
    diag.V_values.reserve(traj.states.size());
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        diag.E_values.push_back(energy(I, L, s, traj.times[i], traj.states[i], ws));
        diag.V_values.push_back(lyapunov(I, L, s, traj.times[i], traj.states[i], eps, ws));
    }
    for (double v : diag.V_values) diag.scale = std::max(diag.scale, std::abs(v));

    // central differences against the declared decay bound
    diag.violation_margin = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < diag.V_values.size(); ++i) {
        const double h_prev = diag.times[i] - diag.times[i - 1];
        const double h_next = diag.times[i + 1] - diag.times[i];
        const double dvdt = (diag.V_values[i + 1] - diag.V_values[i - 1]) / (h_prev + h_next);
        const double bound = -L.beta * eps * diag.V_values[i] + L.delta1(diag.times[i] + s);
        diag.dVdt_estimates.push_back(dvdt);
        diag.bound_values.push_back(bound);
        diag.violation_margin = std::max(diag.violation_margin, dvdt - bound);
    }

    // integrated form: V(t) <= V(0) e^{-beta eps t} + int_0^t delta1(r+s) e^{-beta eps (t-r)} dr
    const double rate = L.beta * eps;
    double conv = 0.0;
    diag.gronwall_margin = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < diag.V_values.size(); ++i) {
        const double h = diag.times[i] - diag.times[i - 1];
        const double decay = std::exp(-rate * h);
        conv = conv * decay +
               0.5 * h * (L.delta1(diag.times[i - 1] + s) * decay + L.delta1(diag.times[i] + s));
        const double envelope = diag.V_values[0] * std::exp(-rate * diag.times[i]) + conv;
        diag.gronwall_margin = std::max(diag.gronwall_margin, diag.V_values[i] - envelope);
    }

    const double tol_abs = tol_decay * std::max(diag.scale, 1.0);
    diag.ok = diag.violation_margin <= tol_abs && diag.gronwall_margin <= tol_abs;
    return diag;
}

double global_norm_envelope(const ConstantsLedger& L, double s, double t, double v0_norm2) {
    const double rate = L.beta * L.eps1;
    const double head = 1.25 * (0.5 + (L.lambda1 + L.mu0) / (2.0 * L.lambda1)) * v0_norm2 +
                        1.25 * L.alpha0(s) * (1.0 + v0_norm2 * v0_norm2) + 1.25 * L.C0(s) +
                        L.d0(s);
    // convolution of delta1 against the decay kernel on [0, t]
    double conv = 0.0;
    const int n = std::max(2, static_cast<int>(t / 0.05));
    double prev = L.delta1(s);
    for (int k = 1; k <= n; ++k) {
        const double r = t * static_cast<double>(k) / n;
        const double h = t / n;
        const double cur = L.delta1(r + s);
        conv = conv * std::exp(-rate * h) + 0.5 * h * (prev * std::exp(-rate * h) + cur);
        prev = cur;
    }
    return L.front_factor() * (head * std::exp(-rate * t) + conv + L.d0(t + s));
}

double absorbing_radius(const ConstantsLedger& L, double xi, const QuadratureParams& q) {
    // composite trapezoid for int_0^inf delta1(xi - u) e^{-beta eps1 u} du
    const double eta = L.beta * L.eps1;
    const std::size_t n = std::max<std::size_t>(2, static_cast<std::size_t>(q.cutoff / q.step));
    const double h = q.cutoff / static_cast<double>(n);
    double acc = 0.5 * (L.delta1(xi) + L.delta1(xi - q.cutoff) * std::exp(-eta * q.cutoff));
    for (std::size_t j = 1; j < n; ++j) {
        const double u = h * static_cast<double>(j);
        acc += L.delta1(xi - u) * std::exp(-eta * u);
    }
    const double integral = acc * h;
    const double front = L.front_factor();
    return std::sqrt(front * integral + front * L.d0(xi) + 1.0);
}

DecayFunction absorbing_radius_fn(const ConstantsLedger& L, double xi_lo, double xi_hi,
                                  double xi_step, const QuadratureParams& q) {
    std::vector<double> ts, vals;
    for (double xi = xi_lo; xi <= xi_hi + 0.5 * xi_step; xi += xi_step) {
        ts.push_back(xi);
        vals.push_back(absorbing_radius(L, xi, q));
    }
    return DecayFunction::from_table(std::move(ts), std::move(vals), "r0");
}

double gamma_envelope(const ConstantsLedger& L, const DecayFunction& r, double xi) {
    const double rx = r(xi);
    const double r2 = rx * rx;
    const double inner = 1.25 * (0.5 + (L.lambda1 + L.mu0) / (2.0 * L.lambda1)) * r2 +
                         1.25 * L.alpha0(xi) * (1.0 + r2 * r2) + 1.25 * L.C0(xi) + L.d0(xi);
    return L.front_factor() * inner;
}

double xi_envelope(const ConstantsLedger&, double gamma_s, const DecayFunction& r0_fn, double s,
                   double T) {
    double sup_r0 = 0.0;
    const int n = 64;
    for (int i = 0; i <= n; ++i) {
        const double r0 = r0_fn(s + T * static_cast<double>(i) / n);
        sup_r0 = std::max(sup_r0, r0 * r0);
    }
    return std::sqrt(gamma_s + sup_r0);
}

double phi_envelope(const ConstantsLedger& L, double xi_T_s, double s, double T) {
    double sup_L0 = 0.0;
    const int n = 64;
    for (int i = 0; i <= n; ++i)
        sup_L0 = std::max(sup_L0, L.L0(s + T * static_cast<double>(i) / n));
    const double e = L.eps_ctr;
    return xi_T_s *
           (2.0 + L.K0 * e + e * e + L.k1 * e + e * sup_L0 * (1.0 + 2.0 * xi_T_s * xi_T_s));
}

double lipschitz_growth_constant(const ConstantsLedger& L, double gamma_s,
                                 const DecayFunction& r0_fn, double s, double gamma) {
    double c = 0.0;
    const int n = 256;
    for (int i = 0; i <= n; ++i) {
        const double tau = gamma * static_cast<double>(i) / n;
        const double r0 = r0_fn(s + tau);
        const double cand = 2.0 * L.K0 +
                            L.L0(tau + s) * (1.0 + 2.0 * gamma_s * std::exp(-L.beta * L.eps1 * tau) +
                                             2.0 * r0 * r0);
        c = std::max(c, cand);
    }
    return c;
}

ContractionData contraction_data(const WaveIntegrator& I, const ConstantsLedger& L,
                                 double phi_T_value, double t, int n, const WaveState& V1,
                                 const WaveState& V2, double dt) {
    if (n < 1) throw EnergyError("contraction window index n must be >= 1");
    const long steps_per_T = std::llround(L.T_grid(dt) / dt);
    const double T = static_cast<double>(steps_per_T) * dt; // grid-snapped window
    const double s = t - static_cast<double>(n) * T;

    ContractionData data;
    data.T = T;
    data.phi_T = phi_T_value;

    WaveState x = V1, y = V2;
    auto ws = I.make_workspace();
    auto ws2 = I.make_workspace();

    const auto z_l2 = [&](const WaveState& p, const WaveState& q) {
        return I.l2_norm_of_v(p.a - q.a);
    };
    const auto kernel_term = [&](const WaveState& p, const WaveState& q) {
        return I.apply_kernel(p.b - q.b).norm();
    };
    const auto psi_integrand = [&](double tau, const WaveState& p, const WaveState& q) {
        const Eigen::VectorXd zb = p.b - q.b;
        return std::exp(L.eps_ctr * (tau - T)) *
               I.nonlinearity_pair_inner(tau + s, p.a, q.a, zb, ws2);
    };

    const double z0_sq = (x.a - y.a).squaredNorm() + (x.b - y.b).squaredNorm();
    data.mu_term = L.mu_ctr * z0_sq;

    double rho1 = 0.0, rho2 = z_l2(x, y), psi = 0.0;
    double prev_kernel = kernel_term(x, y);
    double prev_psi = psi_integrand(0.0, x, y);
    for (long k = 0; k < steps_per_T; ++k) {
        const double u = s + static_cast<double>(k) * dt;
        I.step_inplace(u, dt, x, ws);
        I.step_inplace(u, dt, y, ws);
        const double tau = static_cast<double>(k + 1) * dt;
        const double cur_kernel = kernel_term(x, y);
        const double cur_psi = psi_integrand(tau, x, y);
        rho1 += 0.5 * dt * (prev_kernel + cur_kernel);
        psi += 0.5 * dt * (prev_psi + cur_psi);
        rho2 = std::max(rho2, z_l2(x, y));
        prev_kernel = cur_kernel;
        prev_psi = cur_psi;
    }

    data.lhs = (x.a - y.a).squaredNorm() + (x.b - y.b).squaredNorm();
    data.rho1 = rho1;
    data.rho2 = rho2;
    data.psi_term = 4.0 * std::abs(psi);
    data.g_term = 4.0 * phi_T_value * rho1 + 4.0 * T * phi_T_value * rho2;
    return data;
}

} // namespace plab
