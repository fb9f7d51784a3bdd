#pragma once

#include "plab/decay.hpp"
#include "plab/process.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace plab {

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BlowupError : ModelError {
    double time;
    explicit BlowupError(double t)
        : ModelError("integration blew up at t = " + std::to_string(t)), time(t) {}
};

// Scalar field of (t, v) with a vectorized evaluation hook used on the
// collocation grid.
struct ScalarField {
    std::function<double(double, double)> scalar;
    std::function<void(double, const Eigen::ArrayXd&, Eigen::ArrayXd&)> batch;

    double operator()(double t, double v) const { return scalar(t, v); }
    void eval(double t, const Eigen::ArrayXd& v, Eigen::ArrayXd& out) const {
        if (batch) {
            batch(t, v, out);
        } else {
            out.resize(v.size());
            for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = scalar(t, v[i]);
        }
    }

    static ScalarField from_expression(const std::string& text);
    static ScalarField zero();
};

// Full data of the damped wave model on the interval (0, domain_length):
// modal truncation, damping coefficient k, separable kernel, forcing h,
// nonlinearity f with its antiderivative F and the declared envelopes.
struct ModelSpec {
    std::string name = "model";
    double domain_length = M_PI;
    int n_modes = 32;
    double dt = 1e-3;

    std::function<double(double)> k;
    std::string k_expr;
    double k0 = 0.0, k1 = 0.0;

    Eigen::MatrixXd kernel;     // coefficients on the L2 eigenbasis
    double K0_declared = 0.0;   // Frobenius norm of kernel
    Eigen::VectorXd h_modes;    // L2-basis coefficients of h
    double h0_declared = 0.0;

    ScalarField f, df_dv, df_dt, F, dF_dt;
    std::string f_expr, df_dv_expr, df_dt_expr, F_expr, dF_dt_expr;

    DecayFunction c0 = DecayFunction::constant(1.0);

    double lambda1() const;
    double omega_measure() const { return domain_length; }
    double h0() const { return h_modes.norm(); }
    double K0() const { return kernel.norm(); }

    std::string to_json() const;
    static ModelSpec from_json_text(const std::string& text);
    static ModelSpec load(const std::string& path);
    void save(const std::string& path) const;
};

ModelSpec default_benchmark();
// Designed failures for the hypothesis gate.
ModelSpec benchmark_with_H3_violated(); // kernel norm >= k0
ModelSpec benchmark_with_H4_violated(); // f = -2 lambda1 v
ModelSpec benchmark_with_H6_violated(); // c0 = e^{-t}

struct WaveState {
    Eigen::VectorXd a; // H1_0-orthonormal coefficients of v
    Eigen::VectorXd b; // L2-orthonormal coefficients of v_t

    double xnorm2() const { return a.squaredNorm() + b.squaredNorm(); }
    double xnorm() const { return std::sqrt(xnorm2()); }

    State to_flat() const;
    static WaveState from_flat(const State& flat);
};

struct HypothesisWitness {
    std::string hypothesis;
    double t = 0.0, v = 0.0, value = 0.0;
    std::string note;
};

struct HypothesisReport {
    bool ok = false;
    bool h1 = false, h2 = false, h3 = false, h4 = false, h5 = false, h6 = false;
    std::vector<HypothesisWitness> failures;
    double M_mu0 = 0.0;
    double L0_scale = 0.0; // constant c in L0(t) = c c0(t)
    double lambda1 = 0.0;
    MembershipVerdict c0_verdict;

    std::string to_json() const;
};

HypothesisReport validate_hypotheses(const ModelSpec& spec, double mu0, double v_box,
                                     const std::vector<double>& t_probes);

std::vector<double> default_t_probes();

// Galerkin right-hand side and RK4 stepping on the shared grid. All methods
// are const and safe to call from several threads; each caller owns a
// Workspace.
class WaveIntegrator {
public:
    explicit WaveIntegrator(const ModelSpec& spec);

    struct Workspace {
        Eigen::ArrayXd v_nodes, f_nodes, tmp_nodes;
        Eigen::VectorXd da, db, ka, kb, ya, yb, acc_a, acc_b;
    };
    Workspace make_workspace() const;

    int n_modes() const { return n_; }
    int n_quad() const { return static_cast<int>(nodes_.size()); }
    const ModelSpec& spec() const { return spec_; }
    const Eigen::VectorXd& sqrt_lambda() const { return sqrt_lambda_; }

    // derivative of (a, b) for the problem released at time s, local time t
    void rhs(double s, double t, const WaveState& state, WaveState& out, Workspace& ws) const;
    WaveState rhs(double s, double t, const WaveState& state) const;

    // one RK4 step; dt must equal the grid step of the owning process
    WaveState step(double s, double t, double dt, const WaveState& state) const;
    void step_inplace(double u_abs, double dt, WaveState& state, Workspace& ws) const;

    // L2 values of v on the collocation nodes
    void v_at_nodes(const Eigen::VectorXd& a, Eigen::ArrayXd& out) const;
    // integral of F(t_abs, v(x)) dx over the domain
    double integrate_F(double t_abs, const Eigen::VectorXd& a, Workspace& ws) const;
    // L2 inner product <g(t_abs, v) - g(t_abs, w), sum_i c_i e_i>
    double nonlinearity_pair_inner(double t_abs, const Eigen::VectorXd& a_v,
                                   const Eigen::VectorXd& a_w, const Eigen::VectorXd& c,
                                   Workspace& ws) const;
    // kernel applied to L2 coefficients
    Eigen::VectorXd apply_kernel(const Eigen::VectorXd& b) const;
    double l2_norm_of_v(const Eigen::VectorXd& a) const; // ||v||_{L2} from H1 coefficients
    double inner_v_vt(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
    double inner_h_v(const Eigen::VectorXd& a) const;

private:
    void rhs_abs(double u_abs, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                 Eigen::VectorXd& da, Eigen::VectorXd& db, Workspace& ws) const;

    ModelSpec spec_;
    int n_;
    Eigen::VectorXd sqrt_lambda_, inv_sqrt_lambda_;
    std::vector<double> nodes_;
    Eigen::VectorXd weights_;
    Eigen::MatrixXd basis_;   // n x Q, e_i(x_q)
    Eigen::MatrixXd basis_t_; // Q x n
};

struct Trajectory {
    double s = 0.0;   // release time
    double dt = 1e-3; // grid step
    std::vector<double> times; // local times since release
    std::vector<WaveState> states;
};

Trajectory integrate_trajectory(const WaveIntegrator& I, double s, const WaveState& V0,
                                double horizon, int record_stride = 1);

EvolutionProcess make_process(const ModelSpec& spec, double dt);
EvolutionProcess make_process(std::shared_ptr<const WaveIntegrator> integrator, double dt);

struct LipschitzPairResult {
    double z0_norm = 0.0;
    double max_ratio = 0.0; // max over the tau grid of ||Z(tau)|| / (e^{(c/2)tau} ||Z(0)||)
    bool violated = false;
    double worst_tau = 0.0;
};

struct LipschitzReport {
    double growth_c = 0.0;
    double tol = 0.0;
    std::vector<LipschitzPairResult> pairs;
    bool ok = true;
};

// Checks ||Z(tau)|| <= e^{(c/2) tau} ||Z(0)|| (1 + tol) along the grid for
// each pair; growth_c comes from the energy module envelopes.
LipschitzReport lipschitz_check(const WaveIntegrator& I, double s, double gamma,
                                const std::vector<std::pair<WaveState, WaveState>>& pairs,
                                double dt, double growth_c, double tol);

// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights);

} // namespace plab
