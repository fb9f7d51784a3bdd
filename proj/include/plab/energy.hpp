#pragma once

#include "plab/decay.hpp"
#include "plab/wave.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace plab {

struct EnergyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Every derived constant of the dissipativity and contraction estimates,
// with the defining formula recorded next to the value.
struct ConstantsLedger {
    // inputs
    double lambda1 = 0.0, mu0 = 0.0, k0 = 0.0, k1 = 0.0, K0 = 0.0, h0 = 0.0;
    double omega_measure = 0.0; // |domain|
    DecayFunction c0 = DecayFunction::constant(1.0);

    // derived
    double M = 0.0;          // asymptotic sign threshold for f
    double e0 = 0.0;         // F <= v f + (mu0/2) v^2 + e0 beyond M
    double K_star = 0.0;     // lambda1^{-1/2}
    double eps1 = 0.0;       // largest eps admitted by the damping budget
    double beta = 0.0;       // (4/5)(1 - mu0/lambda1)
    double eps_ctr = 0.0;    // min{sqrt(lambda1), k0}
    double T_ctr = 0.0;      // 1 + ln(3)/eps_ctr
    double mu_ctr = 0.0;     // e^{-eps_ctr} = 3 e^{-eps_ctr T_ctr}
    int r_exp = 2;           // exponent of the contraction inequality
    double c_L4_pow4 = 0.0;  // ||v||_{L4}^4 <= c_L4^4 ||v||_{H1}^4
    double L0_scale = 0.0;   // L0(t) = L0_scale * c0(t)

    DecayFunction C0 = DecayFunction::constant(1.0);
    DecayFunction g0 = DecayFunction::constant(1.0);
    DecayFunction d0 = DecayFunction::constant(1.0);
    DecayFunction delta1 = DecayFunction::constant(1.0);
    DecayFunction alpha0 = DecayFunction::constant(1.0);

    double front_factor() const { return 8.0 * lambda1 / (lambda1 - mu0); }
    double L0(double t) const { return L0_scale * c0(t); }
    // contraction window snapped onto the integration grid; T_grid >= T_ctr
    // keeps 3 e^{-eps_ctr T_grid} <= mu_ctr
    double T_grid(double dt) const {
        return std::ceil(T_ctr / dt - 1e-9) * dt;
    }

    std::string dump() const; // structured text, one constant per line with its formula
};

ConstantsLedger compute_constants(const ModelSpec& spec, double mu0, double e0_scan_box = 50.0,
                                  const std::vector<double>& t_probes = default_t_probes());

// E_s(t, V) of the translated problem evaluated on a given state
double energy(const WaveIntegrator& I, const ConstantsLedger& L, double s, double t,
              const WaveState& state, WaveIntegrator::Workspace& ws);
double energy(const WaveIntegrator& I, const ConstantsLedger& L, double s, double t,
              const WaveState& state);

// V_eps^s(t, V); requires 0 < eps <= eps1
double lyapunov(const WaveIntegrator& I, const ConstantsLedger& L, double s, double t,
                const WaveState& state, double eps, WaveIntegrator::Workspace& ws);
double lyapunov(const WaveIntegrator& I, const ConstantsLedger& L, double s, double t,
                const WaveState& state, double eps);

struct TrajectoryDiagnostics {
    std::vector<double> times;
    std::vector<double> E_values;
    std::vector<double> V_values;
    std::vector<double> dVdt_estimates; // central differences, interior points
    std::vector<double> bound_values;   // -beta eps V + delta1(t+s)
    double violation_margin = 0.0;      // max over interior points of dVdt - bound
    double gronwall_margin = 0.0;       // max of V - (V(0) e^{-beta eps t} + convolution)
    double scale = 0.0;                 // max |V| along the trajectory
    bool ok = false;
};

TrajectoryDiagnostics check_decay_inequality(const WaveIntegrator& I, const ConstantsLedger& L,
                                             double s, const Trajectory& traj, double eps,
                                             double tol_decay = 1e-3);

// Global-existence envelope: upper bound on ||V(t, s, V0)||^2 assembled from
// the ledger constants and the initial norm alone.
double global_norm_envelope(const ConstantsLedger& L, double s, double t, double v0_norm2);

struct QuadratureParams {
    double cutoff = 400.0;
    double step = 0.01;
};

// r0(xi) of the absorbing family
double absorbing_radius(const ConstantsLedger& L, double xi, const QuadratureParams& q = {});
// r0 over a xi-grid as a decay function
DecayFunction absorbing_radius_fn(const ConstantsLedger& L, double xi_lo, double xi_hi,
                                  double xi_step, const QuadratureParams& q = {});
// Gamma(xi) for a family bounded by r
double gamma_envelope(const ConstantsLedger& L, const DecayFunction& r, double xi);

// sup-norm envelope of trajectories released from the absorbing family
double xi_envelope(const ConstantsLedger& L, double gamma_s, const DecayFunction& r0_fn, double s,
                   double T);
// coefficient envelope of the pair estimates over [0, T]
double phi_envelope(const ConstantsLedger& L, double xi_T_s, double s, double T);

// growth constant of the continuous-dependence bound over [0, gamma]
double lipschitz_growth_constant(const ConstantsLedger& L, double gamma_s,
                                 const DecayFunction& r0_fn, double s, double gamma);

struct ContractionData {
    double lhs = 0.0;      // ||Z(T)||_X^2
    double mu_term = 0.0;  // mu ||Z(0)||_X^2
    double g_term = 0.0;   // 4 phi_T rho1 + 4 T phi_T rho2
    double psi_term = 0.0; // 4 |int_0^T e^{eps_ctr (tau - T)} <f(v)-f(w), z_t> dtau|
    double rho1 = 0.0;     // int_0^T ||kernel z_t||_{L2} dtau
    double rho2 = 0.0;     // sup_{tau in [0,T]} ||z||_{L2}
    double T = 0.0;
    double phi_T = 0.0;
    double slack() const { return mu_term + g_term + psi_term - lhs; }
};

// Integrates the coupled pair released at t - n T over one contraction window
// and accumulates the three right-hand-side terms.
ContractionData contraction_data(const WaveIntegrator& I, const ConstantsLedger& L,
                                 double phi_T_value, double t, int n, const WaveState& V1,
                                 const WaveState& V2, double dt);

} // namespace plab
