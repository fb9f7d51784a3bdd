#include "plab/experiment.hpp"
#include "plab/parallel.hpp"
#include "plab/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace plab {

namespace fs = std::filesystem;
using nlohmann::json;

WaveLab WaveLab::make(const ModelSpec& spec, double mu0, double r0_lo, double r0_hi,
                      double r0_step) {
    WaveLab lab;
    lab.spec = spec;
    lab.mu0 = mu0;
    lab.hypotheses = validate_hypotheses(spec, mu0, 10.0, default_t_probes());
    if (!lab.hypotheses.ok) {
        std::string what = "model failed hypothesis validation:";
        for (const auto& w : lab.hypotheses.failures) what += " [" + w.hypothesis + "] " + w.note;
        throw ModelError(what);
    }
    lab.ledger = compute_constants(spec, mu0);
    lab.integrator = std::make_shared<const WaveIntegrator>(spec);
    lab.process = make_process(lab.integrator, spec.dt);
    lab.r0_fn = absorbing_radius_fn(lab.ledger, r0_lo, r0_hi, r0_step);
    return lab;
}

FamilySpec WaveLab::absorbing_family() const {
    FamilySpec fam;
    fam.universe_tag = UniverseTag::Cstar;
    fam.bound = r0_fn;
    return fam;
}

WaveState WaveLab::random_state_in_ball(double radius, std::uint64_t seed) const {
    Rng rng(seed);
    const std::size_t dim = static_cast<std::size_t>(2 * integrator->n_modes());
    return WaveState::from_flat(rng.ball_point(dim, radius));
}

AbsorptionThreshold absorption_threshold(const ConstantsLedger& L,
                                         const std::function<double(double)>& gamma_xi,
                                         const std::vector<double>& s_probes, double tau_step,
                                         double tau_cap) {
    if (s_probes.empty()) throw EnergyError("absorption_threshold needs probes");
    const double rate = L.beta * L.eps1;
    const auto sup_value = [&](double tau) {
        double sup = 0.0;
        for (double s : s_probes) sup = std::max(sup, gamma_xi(s - tau) * std::exp(-rate * tau));
        return sup;
    };
    AbsorptionThreshold out;
    double grid_tau = -1.0;
    for (double tau = 0.0; tau <= tau_cap + 0.5 * tau_step; tau += tau_step) {
        if (sup_value(tau) <= 1.0) {
            grid_tau = tau;
            break;
        }
    }
    if (grid_tau < 0.0)
        throw EnergyError("absorption threshold not reached below tau_cap = " +
                          std::to_string(tau_cap));
    out.tau_grid = grid_tau;
    // continuous root inside the bracketing grid cell
    double lo = std::max(0.0, grid_tau - tau_step), hi = grid_tau;
    if (sup_value(lo) <= 1.0) {
        out.tau_continuous = lo;
        return out;
    }
    for (int iter = 0; iter < 80; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (sup_value(mid) <= 1.0 ? hi : lo) = mid;
    }
    out.tau_continuous = hi;
    return out;
}

PointCloud build_invariant_cloud(const WaveLab& lab, double t, const AbsorbedFamilyParams& params,
                                 double* tau1_out) {
    const FamilySpec B = lab.absorbing_family();
    std::vector<double> search_grid;
    for (double tau = 0.0; tau <= params.tau1_search_cap; tau += params.tau1_search_step)
        search_grid.push_back(tau);
    const std::vector<double> probes{t, t - 2.0, t - 4.0};
    const auto tau1 = estimate_absorbing_time(lab.process, B, B, t, probes, search_grid,
                                              std::max<std::size_t>(params.samples_per_layer, 8),
                                              params.seed);
    if (!tau1)
        throw ProcessError("self-absorbing lag of the absorbing family not found below cap");
    if (tau1_out) *tau1_out = *tau1;
    std::vector<double> ladder;
    for (std::size_t k = 0; k < params.layers; ++k)
        ladder.push_back(*tau1 + params.layer_step * static_cast<double>(k));
    return build_absorbed_family(lab.process, B, *tau1, t, ladder, params.samples_per_layer,
                                 mix_seed(params.seed, 0x10c));
}

// ----- runners -------------------------------------------------------------

namespace {

struct RunContext {
    json config;
    std::string config_text;
    fs::path out;
    std::uint64_t seed = 0;
    ModelSpec model;
    std::string model_text;

    fs::path file(const std::string& name) const { return out / name; }
};

ModelSpec model_from_config(const json& cfg, std::string* text_out) {
    const std::string which = cfg.value("model", "default");
    ModelSpec spec;
    if (which == "default") {
        spec = default_benchmark();
    } else if (which == "fail-H3") {
        spec = benchmark_with_H3_violated();
    } else if (which == "fail-H4") {
        spec = benchmark_with_H4_violated();
    } else if (which == "fail-H6") {
        spec = benchmark_with_H6_violated();
    } else {
        spec = ModelSpec::load(which);
    }
    if (text_out) *text_out = spec.to_json();
    return spec;
}

void write_manifest(const RunContext& ctx) {
    Manifest man;
    man.model_hash = hash_hex(ctx.model_text);
    man.config_hash = hash_hex(ctx.config_text);
    man.seed = ctx.seed;
    man.save(ctx.file("manifest.json").string());
}

std::vector<double> grid_from(double lo, double hi, double step) {
    std::vector<double> g;
    for (double x = lo; x <= hi + 0.5 * step; x += step) g.push_back(x);
    return g;
}

RunOutcome run_validate(RunContext& ctx) {
    const double mu0 = ctx.config.value("mu0", 0.5);
    const double v_box = ctx.config.value("v_box", 10.0);
    const HypothesisReport rep =
        validate_hypotheses(ctx.model, mu0, v_box, default_t_probes());
    write_text_file(ctx.file("hypothesis_report.json").string(), rep.to_json() + "\n");
    if (!rep.ok) {
        std::string what = "hypothesis failures:";
        for (const auto& w : rep.failures) what += " [" + w.hypothesis + "] " + w.note;
        return {kExitHypothesisFailure, what};
    }
    const ConstantsLedger ledger = compute_constants(ctx.model, mu0);
    write_text_file(ctx.file("ledger.txt").string(), ledger.dump());
    return {kExitOk, "hypotheses validated; ledger written"};
}

RunOutcome run_cstar(RunContext& ctx) {
    const std::string expr = ctx.config.at("expression").get<std::string>();
    DecayFunction r = DecayFunction::from_expression(expr);
    MembershipProbe probe;
    if (ctx.config.contains("alphas")) probe.alphas = ctx.config["alphas"].get<std::vector<double>>();
    if (ctx.config.contains("t_anchors"))
        probe.t_anchors = ctx.config["t_anchors"].get<std::vector<double>>();
    probe.tau_max = ctx.config.value("tau_max", probe.tau_max);
    probe.tol = ctx.config.value("tol", probe.tol);
    probe.window = ctx.config.value("window", probe.window);
    probe.s_grid_density = ctx.config.value("s_grid_density", probe.s_grid_density);
    const MembershipVerdict verdict = membership_check(r, probe);

    json j;
    j["expression"] = expr;
    j["status"] = verdict.status == Membership::CertifiedDecay
                      ? "certified-decay"
                      : (verdict.status == Membership::Refuted ? "refuted" : "inconclusive");
    j["overflow"] = verdict.overflow;
    j["summary"] = verdict.summary;
    if (verdict.counterexample) {
        j["counterexample"] = {{"alpha", verdict.counterexample->alpha},
                               {"t", verdict.counterexample->t_anchor},
                               {"margin", verdict.counterexample->margin}};
    }
    write_text_file(ctx.file("verdict.json").string(), j.dump(2) + "\n");

    CsvTable witnesses;
    witnesses.header = {"alpha", "t", "tau", "value"};
    for (const auto& w : verdict.witnesses)
        witnesses.rows.push_back({w.alpha, w.t_anchor, w.tau, w.value});
    witnesses.save(ctx.file("witnesses.csv").string());

    if (verdict.status == Membership::CertifiedDecay) return {kExitOk, "certified"};
    return {kExitInvariantViolation, "membership " + j["status"].get<std::string>() + ": " +
                                         verdict.summary};
}

RunOutcome run_simulate(RunContext& ctx) {
    WaveLab lab = WaveLab::make(ctx.model, ctx.config.value("mu0", 0.5));
    const double s = ctx.config.value("s", 0.0);
    const double horizon = ctx.config.value("horizon", 30.0);
    const int stride = ctx.config.value("record_stride", 10);
    const std::string initial = ctx.config.value("initial", "ball");
    WaveState V0;
    if (initial == "zero") {
        V0.a = Eigen::VectorXd::Zero(ctx.model.n_modes);
        V0.b = Eigen::VectorXd::Zero(ctx.model.n_modes);
    } else if (initial == "ball") {
        const double radius = ctx.config.value("radius", lab.r0_fn(s));
        V0 = lab.random_state_in_ball(radius, ctx.seed);
    } else {
        return {kExitParseError, "unknown initial condition '" + initial + "'"};
    }
    const double eps = ctx.config.value("eps", lab.ledger.eps1);

    Trajectory traj = integrate_trajectory(*lab.integrator, s, V0, horizon, stride);
    const TrajectoryDiagnostics diag =
        check_decay_inequality(*lab.integrator, lab.ledger, s, traj, eps);

    CsvTable table;
    table.header = {"t", "v_h1", "vt_l2", "E", "V"};
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        table.rows.push_back({traj.times[i], traj.states[i].a.norm(), traj.states[i].b.norm(),
                              diag.E_values[i], diag.V_values[i]});
    }
    table.save(ctx.file("trajectory.csv").string());

    json j;
    j["violation_margin"] = diag.violation_margin;
    j["gronwall_margin"] = diag.gronwall_margin;
    j["scale"] = diag.scale;
    j["eps"] = eps;
    j["ok"] = diag.ok;
    write_text_file(ctx.file("diagnostics.json").string(), j.dump(2) + "\n");
    if (!diag.ok) return {kExitInvariantViolation, "decay inequality violated beyond tolerance"};
    return {kExitOk, "trajectory integrated; decay inequality holds"};
}

RunOutcome run_absorb(RunContext& ctx) {
    WaveLab lab = WaveLab::make(ctx.model, ctx.config.value("mu0", 0.5));
    const DecayFunction bound =
        DecayFunction::from_expression(ctx.config.value("bound", "const(1) + abs"));
    const auto s_probes = ctx.config.value("s_probes", std::vector<double>{-5.0, 0.0, 5.0});
    const double tau_step = ctx.config.value("tau_step", 5.0);
    const double tau_max = ctx.config.value("tau_max", 60.0);
    const std::size_t n_samples = ctx.config.value("n_samples", std::size_t{32});

    FamilySpec D;
    D.universe_tag = universe_tag_from_string(ctx.config.value("universe", "Cstar"));
    D.bound = bound;

    const double rate = lab.ledger.beta * lab.ledger.eps1;
    const auto taus = grid_from(tau_step, tau_max, tau_step);

    CsvTable table;
    table.header = {"s", "tau", "max_image_norm2", "theorem_bound", "inside_r0_ball"};
    struct Row {
        double s, tau, worst, bound, inside;
    };
    std::vector<Row> rows(taus.size() * s_probes.size());
    parallel_for(rows.size(), [&](std::size_t idx) {
        const double tau = taus[idx / s_probes.size()];
        const double s = s_probes[idx % s_probes.size()];
        const PointCloud base =
            D.sample(s - tau, n_samples, mix_seed(ctx.seed, idx), lab.process.dim);
        const PointCloud img = pullback_image(lab.process, s, tau, base);
        double worst = 0.0;
        for (const auto& p : img.points) worst = std::max(worst, point_norm(p));
        const double r0s = lab.r0_fn(s);
        const double envelope =
            lab.gamma_of(bound, s - tau) * std::exp(-rate * tau) + r0s * r0s;
        rows[idx] = {s, tau, worst * worst, envelope, worst <= r0s ? 1.0 : 0.0};
    });
    std::size_t violations = 0;
    for (const auto& r : rows) {
        if (r.worst > r.bound) ++violations;
        table.rows.push_back({r.s, r.tau, r.worst, r.bound, r.inside});
    }
    table.save(ctx.file("absorb.csv").string());

    // summary of the worst norm over probes per tau, for the decay plot
    CsvTable decay;
    decay.header = {"tau", "max_norm2"};
    for (std::size_t i = 0; i < taus.size(); ++i) {
        double worst = 0.0;
        for (std::size_t k = 0; k < s_probes.size(); ++k)
            worst = std::max(worst, rows[i * s_probes.size() + k].worst);
        decay.rows.push_back({taus[i], worst});
    }
    decay.save(ctx.file("absorb_decay.csv").string());
    emit_decay_plot(ctx.file("absorb_decay.csv").string(), ctx.file("absorb_decay.svg").string(),
                    {.title = "pullback image norm"});

    const auto threshold = absorption_threshold(
        lab.ledger, [&](double xi) { return lab.gamma_of(bound, xi); }, s_probes,
        ctx.config.value("threshold_step", 1.0), ctx.config.value("threshold_cap", 2000.0));
    json j;
    j["tau_hat_grid"] = threshold.tau_grid;
    j["tau_hat_continuous"] = threshold.tau_continuous;
    j["pointwise_violations"] = violations;
    write_text_file(ctx.file("threshold.json").string(), j.dump(2) + "\n");

    if (violations > 0)
        return {kExitInvariantViolation,
                std::to_string(violations) + " pointwise absorption bound violations"};
    return {kExitOk, "absorption bound holds on the probed grid"};
}

RunOutcome run_attract(RunContext& ctx) {
    WaveLab lab = WaveLab::make(ctx.model, ctx.config.value("mu0", 0.5));
    const double t = ctx.config.value("t", 0.0);
    const std::size_t n_deep = ctx.config.value("n", std::size_t{8});
    AbsorbedFamilyParams cparams;
    cparams.seed = ctx.seed;
    cparams.layers = ctx.config.value("c_layers", cparams.layers);
    cparams.layer_step = ctx.config.value("c_layer_step", cparams.layer_step);
    cparams.samples_per_layer = ctx.config.value("c_samples", cparams.samples_per_layer);

    const double T = lab.ledger.T_grid(lab.spec.dt);
    double tau1 = 0.0;
    PointCloud c_cloud;
    const PointCloud attractor = approximate_attractor(
        lab.process,
        [&](double base_time) {
            c_cloud = build_invariant_cloud(lab, base_time, cparams, &tau1);
            return c_cloud;
        },
        t, n_deep, T);

    FamilySpec D;
    D.universe_tag = universe_tag_from_string(ctx.config.value("universe", "Cstar"));
    D.bound = DecayFunction::from_expression(ctx.config.value("bound", "const(2)"));
    // explicit lag list wins; otherwise a uniform grid
    std::vector<double> taus;
    if (ctx.config.contains("taus")) {
        taus = ctx.config["taus"].get<std::vector<double>>();
        for (double& tau : taus) tau = std::round(tau / lab.spec.dt) * lab.spec.dt;
    } else {
        taus = grid_from(ctx.config.value("tau_min", 10.0), ctx.config.value("tau_max", 60.0),
                         ctx.config.value("tau_step", 2.5));
    }
    const std::size_t n_samples = ctx.config.value("n_samples", std::size_t{12});

    CsvTable table;
    table.header = {"tau", "d_H"};
    std::vector<double> dh(taus.size());
    parallel_for(taus.size(), [&](std::size_t i) {
        const PointCloud base =
            D.sample(t - taus[i], n_samples, mix_seed(ctx.seed, 7000 + i), lab.process.dim);
        const PointCloud img = pullback_image(lab.process, t, taus[i], base);
        dh[i] = hausdorff_semidist(img, attractor);
    });
    std::vector<std::pair<double, double>> samples;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        table.rows.push_back({taus[i], dh[i]});
        samples.emplace_back(taus[i], dh[i]);
    }
    table.save(ctx.file("dh.csv").string());
    const RateFit fit =
        emit_decay_plot(ctx.file("dh.csv").string(), ctx.file("dh.svg").string(),
                        {.title = "pullback attraction"});
    json j;
    j["C_hat"] = fit.C_hat;
    j["omega_hat"] = fit.omega_hat;
    j["residual"] = fit.residual;
    j["tau1"] = tau1;
    j["n"] = n_deep;
    j["T"] = T;
    write_text_file(ctx.file("fit.json").string(), j.dump(2) + "\n");
    return {kExitOk, "attraction rate fitted: omega_hat = " + format_double(fit.omega_hat)};
}

RunOutcome run_kappa(RunContext& ctx) {
    WaveLab lab = WaveLab::make(ctx.model, ctx.config.value("mu0", 0.5));
    const double t = ctx.config.value("t", 0.0);
    FamilySpec D;
    D.universe_tag = universe_tag_from_string(ctx.config.value("universe", "Cstar"));
    D.bound = DecayFunction::from_expression(ctx.config.value("bound", "const(2)"));
    const double sigma_cap = ctx.config.value("sigma_cap", 40.0);
    const auto taus = grid_from(0.0, sigma_cap, ctx.config.value("tau_step", 2.5));
    const std::size_t n_samples = ctx.config.value("n_samples", std::size_t{12});
    const std::size_t k_cap = ctx.config.value("k_cap", std::size_t{8});

    const auto est = estimate_kappa_dissipativity(lab.process, D, t, taus, sigma_cap, n_samples,
                                                  ctx.seed, k_cap);
    CsvTable table;
    table.header = {"tau", "kappa_upper"};
    for (std::size_t i = 0; i < est.taus.size(); ++i)
        table.rows.push_back({est.taus[i], est.kappa_upper[i]});
    table.save(ctx.file("kappa.csv").string());
    const RateFit fit = emit_decay_plot(ctx.file("kappa.csv").string(),
                                        ctx.file("kappa.svg").string(),
                                        {.title = "kappa dissipativity"});
    json j;
    j["C_hat"] = fit.C_hat;
    j["omega_hat"] = fit.omega_hat;
    j["residual"] = fit.residual;
    j["theoretical_omega"] = 1.0 / (2.0 * lab.ledger.r_exp * lab.ledger.T_ctr);
    write_text_file(ctx.file("fit.json").string(), j.dump(2) + "\n");
    return {kExitOk, "kappa rate fitted: omega_hat = " + format_double(fit.omega_hat)};
}

RunOutcome run_contract(RunContext& ctx) {
    WaveLab lab = WaveLab::make(ctx.model, ctx.config.value("mu0", 0.5));
    const double t = ctx.config.value("t", 0.0);
    const auto n_list = ctx.config.value("n_list", std::vector<int>{1, 2, 3});
    const std::size_t n_pairs = ctx.config.value("n_pairs", std::size_t{20});
    const double tol = ctx.config.value("tol", 0.05);
    AbsorbedFamilyParams cparams;
    cparams.seed = ctx.seed;

    const double T = lab.ledger.T_grid(lab.spec.dt);
    CsvTable table;
    table.header = {"n", "pair", "lhs", "mu_term", "g_term", "psi_term", "rho1", "rho2", "slack"};
    bool violated = false;
    Rng rng(mix_seed(ctx.seed, 0xc0ULL));
    CsvTable psi_seq;
    psi_seq.header = {"n", "k", "rho2", "psi"};
    for (int n : n_list) {
        const double base_time = t - static_cast<double>(n) * T;
        const PointCloud cloud = build_invariant_cloud(lab, base_time, cparams);
        const double gamma_b = lab.gamma_of(lab.r0_fn, base_time);
        const double xi = xi_envelope(lab.ledger, gamma_b, lab.r0_fn, base_time, T);
        const double phi = phi_envelope(lab.ledger, xi, base_time, T);
        for (std::size_t p = 0; p < n_pairs; ++p) {
            const auto& P1 = cloud.points[rng.raw() % cloud.points.size()];
            const auto& P2 = cloud.points[rng.raw() % cloud.points.size()];
            const auto data =
                contraction_data(*lab.integrator, lab.ledger, phi, t, n,
                                 WaveState::from_flat(P1), WaveState::from_flat(P2),
                                 lab.spec.dt);
            const double rhs = data.mu_term + data.g_term + data.psi_term;
            const bool bad = data.lhs > rhs * (1.0 + tol);
            violated |= bad;
            table.rows.push_back({static_cast<double>(n), static_cast<double>(p), data.lhs,
                                  data.mu_term, data.g_term, data.psi_term, data.rho1, data.rho2,
                                  rhs - data.lhs});
        }
        // pairs converging in rho2: shrink a fixed offset from a post-transient
        // anchor point
        const std::size_t per_layer = cparams.samples_per_layer;
        const WaveState base = WaveState::from_flat(
            cloud.points[std::min<std::size_t>(3 * per_layer, cloud.size() - 1)]);
        const WaveState other = WaveState::from_flat(cloud.points.back());
        Eigen::VectorXd dir_a = other.a - base.a;
        Eigen::VectorXd dir_b = other.b - base.b;
        const double dir_norm = std::sqrt(dir_a.squaredNorm() + dir_b.squaredNorm());
        if (dir_norm > 0.0) {
            dir_a *= 0.5 / dir_norm;
            dir_b *= 0.5 / dir_norm;
        }
        for (int k = 0; k < 8; ++k) {
            const double scale = std::pow(0.5, k);
            WaveState shifted;
            shifted.a = base.a + scale * dir_a;
            shifted.b = base.b + scale * dir_b;
            const auto data = contraction_data(*lab.integrator, lab.ledger, phi, t, n, base,
                                               shifted, lab.spec.dt);
            psi_seq.rows.push_back({static_cast<double>(n), static_cast<double>(k), data.rho2,
                                    data.psi_term});
        }
    }
    table.save(ctx.file("contraction.csv").string());
    psi_seq.save(ctx.file("psi_sequence.csv").string());
    if (violated)
        return {kExitInvariantViolation, "contraction inequality violated beyond tolerance"};
    return {kExitOk, "contraction inequality holds for all sampled pairs"};
}

} // namespace

RunOutcome run_experiment(const std::string& config_path, const std::string& out_dir,
                          std::optional<std::uint64_t> seed_override,
                          const std::string& expect_command) {
    RunContext ctx;
    try {
        ctx.config_text = read_text_file(config_path);
        ctx.config = json::parse(ctx.config_text);
    } catch (const std::exception& e) {
        return {kExitParseError, std::string("config parse error: ") + e.what()};
    }
    ctx.out = out_dir;
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    ctx.seed = seed_override.value_or(ctx.config.value("seed", std::uint64_t{1}));

    std::string command;
    try {
        command = ctx.config.at("command").get<std::string>();
        if (!expect_command.empty() && command != expect_command)
            return {kExitParseError, "config declares command '" + command +
                                         "' but '" + expect_command + "' was requested"};
        if (command != "cstar") ctx.model = model_from_config(ctx.config, &ctx.model_text);
        write_manifest(ctx);
    } catch (const std::exception& e) {
        return {kExitParseError, std::string("config error: ") + e.what()};
    }

    try {
        if (command == "validate") return run_validate(ctx);
        if (command == "cstar") return run_cstar(ctx);
        if (command == "simulate") return run_simulate(ctx);
        if (command == "absorb") return run_absorb(ctx);
        if (command == "attract") return run_attract(ctx);
        if (command == "kappa") return run_kappa(ctx);
        if (command == "contract") return run_contract(ctx);
        return {kExitParseError, "unknown command '" + command + "'"};
    } catch (const BlowupError& e) {
        return {kExitBlowup, e.what()};
    } catch (const ModelError& e) {
        // validation failures inside lab construction
        return {kExitHypothesisFailure, e.what()};
    } catch (const std::exception& e) {
        return {kExitInvariantViolation, e.what()};
    }
}

} // namespace plab
