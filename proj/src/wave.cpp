#include "plab/wave.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace plab {

ScalarField ScalarField::from_expression(const std::string& text) {
    auto tree = parse_expression(text);
    ScalarField field;
    field.scalar = [tree](double t, double v) { return tree->eval(t, v); };
    return field;
}

ScalarField ScalarField::zero() {
    ScalarField field;
    field.scalar = [](double, double) { return 0.0; };
    field.batch = [](double, const Eigen::ArrayXd& v, Eigen::ArrayXd& out) {
        out.setZero(v.size());
    };
    return field;
}

double ModelSpec::lambda1() const {
    const double w = M_PI / domain_length;
    return w * w;
}

std::string ModelSpec::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["domain_length"] = domain_length;
    j["n_modes"] = n_modes;
    j["dt"] = dt;
    j["k"] = k_expr;
    j["k0"] = k0;
    j["k1"] = k1;
    std::vector<std::vector<double>> ker(kernel.rows());
    for (Eigen::Index i = 0; i < kernel.rows(); ++i)
        for (Eigen::Index q = 0; q < kernel.cols(); ++q) ker[i].push_back(kernel(i, q));
    j["kernel"] = ker;
    j["K0"] = K0_declared;
    j["h_modes"] = std::vector<double>(h_modes.data(), h_modes.data() + h_modes.size());
    j["h0"] = h0_declared;
    j["f"] = f_expr;
    j["df_dv"] = df_dv_expr;
    j["df_dt"] = df_dt_expr;
    j["F"] = F_expr;
    j["dF_dt"] = dF_dt_expr;
    j["c0"] = c0.description();
    return j.dump(2);
}

ModelSpec ModelSpec::from_json_text(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ModelSpec m;
    m.name = j.value("name", "model");
    m.domain_length = j.at("domain_length").get<double>();
    m.n_modes = j.at("n_modes").get<int>();
    m.dt = j.at("dt").get<double>();
    m.k_expr = j.at("k").get<std::string>();
    {
        auto tree = parse_expression(m.k_expr);
        m.k = [tree](double t) { return tree->eval(t); };
    }
    m.k0 = j.at("k0").get<double>();
    m.k1 = j.at("k1").get<double>();
    const auto ker = j.at("kernel").get<std::vector<std::vector<double>>>();
    const std::size_t mrows = ker.size();
    if (mrows == 0) throw ModelError("kernel matrix must be nonempty");
    m.kernel.resize(static_cast<Eigen::Index>(mrows), static_cast<Eigen::Index>(ker[0].size()));
    for (std::size_t i = 0; i < mrows; ++i) {
        if (ker[i].size() != ker[0].size()) throw ModelError("ragged kernel matrix");
        for (std::size_t q = 0; q < ker[i].size(); ++q)
            m.kernel(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(q)) = ker[i][q];
    }
    m.K0_declared = j.at("K0").get<double>();
    const auto hv = j.at("h_modes").get<std::vector<double>>();
    m.h_modes = Eigen::Map<const Eigen::VectorXd>(hv.data(), static_cast<Eigen::Index>(hv.size()));
    m.h0_declared = j.at("h0").get<double>();
    m.f_expr = j.at("f").get<std::string>();
    m.df_dv_expr = j.at("df_dv").get<std::string>();
    m.df_dt_expr = j.at("df_dt").get<std::string>();
    m.F_expr = j.at("F").get<std::string>();
    m.dF_dt_expr = j.at("dF_dt").get<std::string>();
    m.f = ScalarField::from_expression(m.f_expr);
    m.df_dv = ScalarField::from_expression(m.df_dv_expr);
    m.df_dt = ScalarField::from_expression(m.df_dt_expr);
    m.F = ScalarField::from_expression(m.F_expr);
    m.dF_dt = ScalarField::from_expression(m.dF_dt_expr);
    m.c0 = DecayFunction::from_expression(j.at("c0").get<std::string>());
    return m;
}

ModelSpec ModelSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open model file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

void ModelSpec::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ModelError("cannot write model file " + path);
    out << to_json() << "\n";
}

ModelSpec default_benchmark() {
    ModelSpec m;
    m.name = "benchmark";
    m.domain_length = M_PI;
    m.n_modes = 32;
    m.dt = 1e-3;

    m.k_expr = "2 + sin(t)/2";
    m.k = [](double t) { return 2.0 + 0.5 * std::sin(t); };
    m.k0 = 1.5;
    m.k1 = 2.5;

    m.kernel = Eigen::MatrixXd::Constant(1, 1, 0.5);
    m.K0_declared = 0.5;

    m.h_modes = Eigen::VectorXd::Zero(m.n_modes);
    m.h_modes[0] = std::sqrt(M_PI / 2.0); // h(x) = sin x on the L2 basis
    m.h0_declared = std::sqrt(M_PI / 2.0);

    m.f_expr = "v^3 + sin(t)*(1 - 2*v^2)*exp(-v^2)";
    m.f.scalar = [](double t, double v) {
        return v * v * v + std::sin(t) * (1.0 - 2.0 * v * v) * std::exp(-v * v);
    };
    m.f.batch = [](double t, const Eigen::ArrayXd& v, Eigen::ArrayXd& out) {
        const double st = std::sin(t);
        out = v.cube() + st * (1.0 - 2.0 * v.square()) * (-v.square()).exp();
    };

    m.df_dv_expr = "3*v^2 + sin(t)*(4*v^3 - 6*v)*exp(-v^2)";
    m.df_dv.scalar = [](double t, double v) {
        return 3.0 * v * v + std::sin(t) * (4.0 * v * v * v - 6.0 * v) * std::exp(-v * v);
    };

    m.df_dt_expr = "cos(t)*(1 - 2*v^2)*exp(-v^2)";
    m.df_dt.scalar = [](double t, double v) {
        return std::cos(t) * (1.0 - 2.0 * v * v) * std::exp(-v * v);
    };

    m.F_expr = "v^4/4 + sin(t)*v*exp(-v^2)";
    m.F.scalar = [](double t, double v) {
        return 0.25 * v * v * v * v + std::sin(t) * v * std::exp(-v * v);
    };
    m.F.batch = [](double t, const Eigen::ArrayXd& v, Eigen::ArrayXd& out) {
        const double st = std::sin(t);
        out = 0.25 * v.square().square() + st * v * (-v.square()).exp();
    };

    m.dF_dt_expr = "cos(t)*v*exp(-v^2)";
    m.dF_dt.scalar = [](double t, double v) { return std::cos(t) * v * std::exp(-v * v); };

    m.c0 = DecayFunction::from_expression("const(3)");
    return m;
}

ModelSpec benchmark_with_H3_violated() {
    ModelSpec m = default_benchmark();
    m.name = "benchmark_H3_violated";
    m.kernel(0, 0) = 2.0; // kernel norm 2.0 >= k0 = 1.5
    m.K0_declared = 2.0;
    return m;
}

ModelSpec benchmark_with_H4_violated() {
    ModelSpec m = default_benchmark();
    m.name = "benchmark_H4_violated";
    const double lam1 = m.lambda1();
    m.f_expr = "-2*v";
    m.f.scalar = [lam1](double, double v) { return -2.0 * lam1 * v; };
    m.f.batch = [lam1](double, const Eigen::ArrayXd& v, Eigen::ArrayXd& out) {
        out = -2.0 * lam1 * v;
    };
    m.df_dv_expr = "-2";
    m.df_dv.scalar = [lam1](double, double) { return -2.0 * lam1; };
    m.df_dt = ScalarField::zero();
    m.df_dt_expr = "0";
    m.F_expr = "-v^2";
    m.F.scalar = [lam1](double, double v) { return -lam1 * v * v; };
    m.F.batch = [lam1](double, const Eigen::ArrayXd& v, Eigen::ArrayXd& out) {
        out = -lam1 * v.square();
    };
    m.dF_dt = ScalarField::zero();
    m.dF_dt_expr = "0";
    return m;
}

ModelSpec benchmark_with_H6_violated() {
    ModelSpec m = default_benchmark();
    m.name = "benchmark_H6_violated";
    m.c0 = DecayFunction::from_expression("exp(-1)"); // e^{-t}, not in the decay class
    return m;
}

State WaveState::to_flat() const {
    State flat(static_cast<std::size_t>(a.size() + b.size()));
    Eigen::Map<Eigen::VectorXd>(flat.data(), a.size()) = a;
    Eigen::Map<Eigen::VectorXd>(flat.data() + a.size(), b.size()) = b;
    return flat;
}

WaveState WaveState::from_flat(const State& flat) {
    if (flat.size() % 2 != 0) throw ModelError("flat wave state must have even size");
    const Eigen::Index n = static_cast<Eigen::Index>(flat.size() / 2);
    WaveState st;
    st.a = Eigen::Map<const Eigen::VectorXd>(flat.data(), n);
    st.b = Eigen::Map<const Eigen::VectorXd>(flat.data() + n, n);
    return st;
}

std::vector<double> default_t_probes() {
    std::vector<double> probes;
    for (int i = 0; i < 64; ++i) probes.push_back(2.0 * M_PI * i / 64.0);
    for (double t : {-10.0, -5.0, 5.0, 10.0}) probes.push_back(t);
    return probes;
}

namespace {

void record_failure(HypothesisReport& rep, bool& flag, const std::string& hyp, double t, double v,
                    double value, const std::string& note) {
    flag = false;
    rep.failures.push_back({hyp, t, v, value, note});
}

} // namespace

HypothesisReport validate_hypotheses(const ModelSpec& spec, double mu0, double v_box,
                                     const std::vector<double>& t_probes) {
    const double lam1 = spec.lambda1();
    if (!(mu0 > 0.0 && mu0 < lam1)) throw ModelError("mu0 must lie in (0, lambda1)");
    if (!(v_box > 0.0)) throw ModelError("v_box must be positive");
    if (t_probes.empty()) throw ModelError("need at least one t probe");

    HypothesisReport rep;
    rep.lambda1 = lam1;
    rep.h1 = rep.h2 = rep.h3 = rep.h4 = rep.h5 = rep.h6 = true;

    // H1, H2: declared norms match the data
    const double h0 = spec.h0();
    if (std::abs(h0 - spec.h0_declared) > 1e-12 * std::max(1.0, h0))
        record_failure(rep, rep.h1, "H1", 0, 0, h0, "declared h0 does not match ||h||");
    const double K0 = spec.K0();
    if (std::abs(K0 - spec.K0_declared) > 1e-12 * std::max(1.0, K0))
        record_failure(rep, rep.h2, "H2", 0, 0, K0, "declared K0 does not match ||K||");

    // H3: 0 <= K0 < k0 <= k(t) <= k1
    if (!(K0 >= 0.0 && K0 < spec.k0)) {
        record_failure(rep, rep.h3, "H3", 0, 0, K0,
                       "requires K0 < k0 but K0 = " + std::to_string(K0) + ", k0 = " +
                           std::to_string(spec.k0));
    }
    for (double t : t_probes) {
        const double kt = spec.k(t);
        if (!(spec.k0 <= kt && kt <= spec.k1)) {
            record_failure(rep, rep.h3, "H3", t, 0, kt, "k(t) escapes [k0, k1]");
            break;
        }
    }

    // H4 growth bounds against c0
    for (double t : t_probes) {
        const double c0t = spec.c0(t);
        if (std::abs(spec.f(t, 0.0)) > c0t * (1.0 + 1e-12)) {
            record_failure(rep, rep.h4, "H4", t, 0.0, spec.f(t, 0.0), "|f(t,0)| exceeds c0(t)");
            break;
        }
    }
    const int n_scan = 2000;
    const double dv = v_box / n_scan;
    bool bound_df_dv_ok = true, bound_df_dt_ok = true;
    for (int j = 0; j <= n_scan && (bound_df_dv_ok || bound_df_dt_ok); ++j) {
        for (double sign : {1.0, -1.0}) {
            const double v = sign * dv * j;
            for (double t : t_probes) {
                const double c0t = spec.c0(t);
                if (bound_df_dv_ok && std::abs(spec.df_dv(t, v)) > c0t * (1.0 + v * v) * (1.0 + 1e-12)) {
                    record_failure(rep, rep.h4, "H4", t, v, spec.df_dv(t, v),
                                   "|df/dv| exceeds c0(t)(1+v^2)");
                    bound_df_dv_ok = false;
                }
                if (bound_df_dt_ok && std::abs(spec.df_dt(t, v)) > c0t * (1.0 + 1e-12)) {
                    record_failure(rep, rep.h4, "H4", t, v, spec.df_dt(t, v),
                                   "|df/dt| exceeds c0(t)");
                    bound_df_dt_ok = false;
                }
            }
            if (j == 0) break;
        }
    }

    // H4 asymptotic sign condition: least grid M with
    // inf_t df/dv(t, v) > -mu0 and inf_t f(t,v)/v > -mu0 for all |v| > M
    int worst_fail = -1;
    double worst_value = 0.0, worst_t = 0.0, worst_v = 0.0;
    for (int j = 1; j <= n_scan; ++j) {
        const double v_abs = dv * j;
        bool ok = true;
        for (double sign : {1.0, -1.0}) {
            const double v = sign * v_abs;
            for (double t : t_probes) {
                const double slope = spec.df_dv(t, v);
                const double ratio = spec.f(t, v) / v;
                if (!(slope > -mu0) || !(ratio > -mu0)) {
                    ok = false;
                    if (j > worst_fail) {
                        worst_value = !(slope > -mu0) ? slope : ratio;
                        worst_t = t;
                        worst_v = v;
                    }
                    break;
                }
            }
            if (!ok) break;
        }
        if (!ok) worst_fail = j;
    }
    if (worst_fail == n_scan) {
        record_failure(rep, rep.h4, "H4", worst_t, worst_v, worst_value,
                       "no M within the scan box satisfies the asymptotic condition");
    } else if (worst_fail > n_scan / 2) {
        record_failure(rep, rep.h4, "H4", worst_t, worst_v, worst_value,
                       "asymptotic condition only holds too close to the scan boundary");
    } else {
        rep.M_mu0 = dv * (worst_fail < 0 ? 0 : worst_fail);
    }

    // H5: int_R |dF/dt(t, v)| dv <= c0(t), trapezoid on the scan box
    for (double t : t_probes) {
        double acc = 0.0;
        const int nq = 4000;
        const double h5dv = 2.0 * v_box / nq;
        for (int j = 0; j <= nq; ++j) {
            const double v = -v_box + h5dv * j;
            const double w = (j == 0 || j == nq) ? 0.5 : 1.0;
            acc += w * std::abs(spec.dF_dt(t, v));
        }
        acc *= h5dv;
        if (acc > spec.c0(t) * (1.0 + 1e-9)) {
            record_failure(rep, rep.h5, "H5", t, 0, acc, "integral of |dF/dt| exceeds c0(t)");
            break;
        }
    }

    // H6: c0 must certify as a decay-class member
    rep.c0_verdict = membership_check(spec.c0, deep_probe());
    if (rep.c0_verdict.status != Membership::CertifiedDecay) {
        double wt = 0.0, wv = 0.0;
        if (rep.c0_verdict.counterexample) {
            wt = rep.c0_verdict.counterexample->t_anchor;
            wv = rep.c0_verdict.counterexample->values.back();
        }
        record_failure(rep, rep.h6, "H6", wt, 0, wv,
                       rep.c0_verdict.status == Membership::Refuted
                           ? "c0 refuted: " + rep.c0_verdict.summary
                           : "c0 inconclusive: " + rep.c0_verdict.summary);
    }

    rep.L0_scale = 2.0 * std::max(1.0, spec.domain_length / 3.0) / std::sqrt(lam1);
    rep.ok = rep.h1 && rep.h2 && rep.h3 && rep.h4 && rep.h5 && rep.h6;
    return rep;
}

std::string HypothesisReport::to_json() const {
    nlohmann::json j;
    j["ok"] = ok;
    j["h1"] = h1;
    j["h2"] = h2;
    j["h3"] = h3;
    j["h4"] = h4;
    j["h5"] = h5;
    j["h6"] = h6;
    j["M_mu0"] = M_mu0;
    j["L0_scale"] = L0_scale;
    j["lambda1"] = lambda1;
    nlohmann::json fails = nlohmann::json::array();
    for (const auto& w : failures)
        fails.push_back({{"hypothesis", w.hypothesis},
                         {"t", w.t},
                         {"v", w.v},
                         {"value", w.value},
                         {"note", w.note}});
    j["failures"] = fails;
    return j.dump(2);
}

void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double xl = 0.5 * (b - a), xm = 0.5 * (b + a);
        nodes[i] = xm - xl * x;
        nodes[n - 1 - i] = xm + xl * x;
        weights[i] = 2.0 * xl / ((1.0 - x * x) * pp * pp);
        weights[n - 1 - i] = weights[i];
    }
}

WaveIntegrator::WaveIntegrator(const ModelSpec& spec) : spec_(spec), n_(spec.n_modes) {
    if (n_ < 1) throw ModelError("need at least one mode");
    if (spec_.kernel.rows() > n_ || spec_.kernel.cols() > n_)
        throw ModelError("kernel matrix larger than the modal truncation");
    if (spec_.h_modes.size() != n_) throw ModelError("h_modes must have n_modes entries");

    const double ell = spec_.domain_length;
    sqrt_lambda_.resize(n_);
    inv_sqrt_lambda_.resize(n_);
    for (int i = 0; i < n_; ++i) {
        sqrt_lambda_[i] = (i + 1) * M_PI / ell;
        inv_sqrt_lambda_[i] = 1.0 / sqrt_lambda_[i];
    }

    const int Q = 4 * n_;
    std::vector<double> w;
    gauss_legendre(Q, 0.0, ell, nodes_, w);
    weights_ = Eigen::Map<Eigen::VectorXd>(w.data(), Q);
    if (static_cast<int>(nodes_.size()) < 4 * n_)
        throw ModelError("collocation grid below the declared minimum of 4N points");

    basis_.resize(n_, Q);
    const double scale = std::sqrt(2.0 / ell);
    for (int i = 0; i < n_; ++i)
        for (int q = 0; q < Q; ++q)
            basis_(i, q) = scale * std::sin((i + 1) * M_PI * nodes_[q] / ell);
    basis_t_ = basis_.transpose();
}

WaveIntegrator::Workspace WaveIntegrator::make_workspace() const {
    Workspace ws;
    const int Q = n_quad();
    ws.v_nodes.resize(Q);
    ws.f_nodes.resize(Q);
    ws.tmp_nodes.resize(Q);
    ws.da.resize(n_);
    ws.db.resize(n_);
    ws.ka.resize(n_);
    ws.kb.resize(n_);
    ws.ya.resize(n_);
    ws.yb.resize(n_);
    ws.acc_a.resize(n_);
    ws.acc_b.resize(n_);
    return ws;
}

void WaveIntegrator::v_at_nodes(const Eigen::VectorXd& a, Eigen::ArrayXd& out) const {
    out = (basis_t_ * inv_sqrt_lambda_.cwiseProduct(a)).array();
}

void WaveIntegrator::rhs_abs(double u_abs, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                             Eigen::VectorXd& da, Eigen::VectorXd& db, Workspace& ws) const {
    da = sqrt_lambda_.cwiseProduct(b);
    v_at_nodes(a, ws.v_nodes);
    spec_.f.eval(u_abs, ws.v_nodes, ws.f_nodes);
    db = -sqrt_lambda_.cwiseProduct(a) - spec_.k(u_abs) * b + spec_.h_modes;
    const Eigen::Index m = spec_.kernel.rows();
    db.head(m).noalias() += spec_.kernel * b.head(m);
    db.noalias() -= basis_ * (weights_.array() * ws.f_nodes).matrix();
}

void WaveIntegrator::rhs(double s, double t, const WaveState& state, WaveState& out,
                         Workspace& ws) const {
    if (state.a.size() != n_ || state.b.size() != n_)
        throw ModelError("state dimension does not match the model");
    out.a.resize(n_);
    out.b.resize(n_);
    rhs_abs(s + t, state.a, state.b, out.a, out.b, ws);
}

WaveState WaveIntegrator::rhs(double s, double t, const WaveState& state) const {
    Workspace ws = make_workspace();
    WaveState out;
    rhs(s, t, state, out, ws);
    return out;
}

void WaveIntegrator::step_inplace(double u_abs, double dt, WaveState& state, Workspace& ws) const {
    const double half = 0.5 * dt;
    // k1
    rhs_abs(u_abs, state.a, state.b, ws.da, ws.db, ws);
    ws.acc_a = ws.da;
    ws.acc_b = ws.db;
    ws.ya = state.a + half * ws.da;
    ws.yb = state.b + half * ws.db;
    // k2
    rhs_abs(u_abs + half, ws.ya, ws.yb, ws.ka, ws.kb, ws);
    ws.acc_a += 2.0 * ws.ka;
    ws.acc_b += 2.0 * ws.kb;
    ws.ya = state.a + half * ws.ka;
    ws.yb = state.b + half * ws.kb;
    // k3
    rhs_abs(u_abs + half, ws.ya, ws.yb, ws.da, ws.db, ws);
    ws.acc_a += 2.0 * ws.da;
    ws.acc_b += 2.0 * ws.db;
    ws.ya = state.a + dt * ws.da;
    ws.yb = state.b + dt * ws.db;
    // k4
    rhs_abs(u_abs + dt, ws.ya, ws.yb, ws.ka, ws.kb, ws);
    ws.acc_a += ws.ka;
    ws.acc_b += ws.kb;

    state.a += (dt / 6.0) * ws.acc_a;
    state.b += (dt / 6.0) * ws.acc_b;
    if (!(state.xnorm2() < 1e16)) throw BlowupError(u_abs + dt);
}

WaveState WaveIntegrator::step(double s, double t, double dt, const WaveState& state) const {
    Workspace ws = make_workspace();
    WaveState out = state;
    step_inplace(s + t, dt, out, ws);
    return out;
}

double WaveIntegrator::integrate_F(double t_abs, const Eigen::VectorXd& a, Workspace& ws) const {
    v_at_nodes(a, ws.v_nodes);
    spec_.F.eval(t_abs, ws.v_nodes, ws.f_nodes);
    return (weights_.array() * ws.f_nodes).sum();
}

double WaveIntegrator::nonlinearity_pair_inner(double t_abs, const Eigen::VectorXd& a_v,
                                               const Eigen::VectorXd& a_w,
                                               const Eigen::VectorXd& c, Workspace& ws) const {
    v_at_nodes(a_v, ws.v_nodes);
    spec_.f.eval(t_abs, ws.v_nodes, ws.f_nodes);
    v_at_nodes(a_w, ws.v_nodes);
    spec_.f.eval(t_abs, ws.v_nodes, ws.tmp_nodes);
    ws.f_nodes -= ws.tmp_nodes;
    ws.tmp_nodes = (basis_t_ * c).array();
    return (weights_.array() * ws.f_nodes * ws.tmp_nodes).sum();
}

Eigen::VectorXd WaveIntegrator::apply_kernel(const Eigen::VectorXd& b) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_);
    const Eigen::Index m = spec_.kernel.rows();
    out.head(m).noalias() = spec_.kernel * b.head(m);
    return out;
}

double WaveIntegrator::l2_norm_of_v(const Eigen::VectorXd& a) const {
    return inv_sqrt_lambda_.cwiseProduct(a).norm();
}

double WaveIntegrator::inner_v_vt(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return inv_sqrt_lambda_.cwiseProduct(a).dot(b);
}

double WaveIntegrator::inner_h_v(const Eigen::VectorXd& a) const {
    return spec_.h_modes.dot(inv_sqrt_lambda_.cwiseProduct(a));
}

Trajectory integrate_trajectory(const WaveIntegrator& I, double s, const WaveState& V0,
                                double horizon, int record_stride) {
    const double dt = I.spec().dt;
    const long n_steps = std::llround(horizon / dt);
    if (std::abs(horizon - n_steps * dt) > 1e-9)
        throw ModelError("horizon must be a multiple of the grid step");
    Trajectory traj;
    traj.s = s;
    traj.dt = dt;
    auto ws = I.make_workspace();
    WaveState state = V0;
    traj.times.push_back(0.0);
    traj.states.push_back(state);
    for (long k = 0; k < n_steps; ++k) {
        I.step_inplace(s + static_cast<double>(k) * dt, dt, state, ws);
        if ((k + 1) % record_stride == 0 || k + 1 == n_steps) {
            traj.times.push_back(static_cast<double>(k + 1) * dt);
            traj.states.push_back(state);
        }
    }
    return traj;
}

EvolutionProcess make_process(const ModelSpec& spec, double dt) {
    auto owned = std::make_shared<ModelSpec>(spec);
    owned->dt = dt;
    return make_process(std::make_shared<const WaveIntegrator>(*owned), dt);
}

EvolutionProcess make_process(std::shared_ptr<const WaveIntegrator> integrator, double dt) {
    EvolutionProcess S;
    S.id = "wave:" + integrator->spec().name;
    S.time_grid_step = dt;
    S.dim = static_cast<std::size_t>(2 * integrator->n_modes());
    S.advance = [integrator, dt](double t, double s, const State& x) -> State {
        if (t < s - 1e-12) throw ProcessError("advance needs t >= s");
        const double ks = s / dt, kt = t / dt;
        const long i0 = std::llround(ks), i1 = std::llround(kt);
        if (std::abs(ks - static_cast<double>(i0)) * dt > 1e-9 ||
            std::abs(kt - static_cast<double>(i1)) * dt > 1e-9)
            throw ProcessError("off-grid advance times");
        WaveState state = WaveState::from_flat(x);
        auto ws = integrator->make_workspace();
        // absolute times from grid indices keep the composition law exact
        for (long i = i0; i < i1; ++i)
            integrator->step_inplace(static_cast<double>(i) * dt, dt, state, ws);
        return state.to_flat();
    };
    return S;
}

LipschitzReport lipschitz_check(const WaveIntegrator& I, double s, double gamma,
                                const std::vector<std::pair<WaveState, WaveState>>& pairs,
                                double dt, double growth_c, double tol) {
    LipschitzReport report;
    report.growth_c = growth_c;
    report.tol = tol;
    const long n_steps = std::llround(gamma / dt);
    auto ws = I.make_workspace();
    for (const auto& [V1, V2] : pairs) {
        LipschitzPairResult res;
        WaveState x = V1, y = V2;
        WaveState z;
        z.a = x.a - y.a;
        z.b = x.b - y.b;
        res.z0_norm = z.xnorm();
        for (long k = 1; k <= n_steps; ++k) {
            I.step_inplace(s + static_cast<double>(k - 1) * dt, dt, x, ws);
            I.step_inplace(s + static_cast<double>(k - 1) * dt, dt, y, ws);
            const double tau = static_cast<double>(k) * dt;
            const double znorm = std::sqrt((x.a - y.a).squaredNorm() + (x.b - y.b).squaredNorm());
            const double bound = std::exp(0.5 * growth_c * tau) * res.z0_norm * (1.0 + tol);
            const double ratio = res.z0_norm > 0.0
                                     ? znorm / (std::exp(0.5 * growth_c * tau) * res.z0_norm)
                                     : 0.0;
            if (ratio > res.max_ratio) {
                res.max_ratio = ratio;
                res.worst_tau = tau;
            }
            if (znorm > bound) res.violated = true;
        }
        if (res.violated) report.ok = false;
        report.pairs.push_back(res);
    }
    return report;
}

} // namespace plab
