#include "plab/process.hpp"
#include "plab/parallel.hpp"
#include "plab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace plab {

long EvolutionProcess::grid_index(double t) const {
    const double k = t / time_grid_step;
    const double rounded = std::round(k);
    if (std::abs(k - rounded) * time_grid_step > 1e-9)
        throw ProcessError("time " + std::to_string(t) + " is off the grid (step " +
                           std::to_string(time_grid_step) + ")");
    return static_cast<long>(rounded);
}

ProcessLawReport verify_process_laws(const EvolutionProcess& S,
                                     const std::vector<ProcessLawProbe>& probes) {
    ProcessLawReport report;
    for (const auto& p : probes) {
        if (!(p.t >= p.r && p.r >= p.s)) throw ProcessError("probe needs t >= r >= s");
        S.grid_index(p.t);
        S.grid_index(p.r);
        S.grid_index(p.s);
        const double scale = std::max(point_norm(p.state), 1.0);

        const State same = S.advance(p.s, p.s, p.state);
        double id_err = 0.0;
        for (std::size_t i = 0; i < p.state.size(); ++i)
            id_err = std::max(id_err, std::abs(same[i] - p.state[i]));
        report.identity_rel.push_back(id_err / scale);

        const State direct = S.advance(p.t, p.s, p.state);
        const State through = S.advance(p.t, p.r, S.advance(p.r, p.s, p.state));
        double co_err = 0.0;
        const double out_scale = std::max({point_norm(direct), 1.0});
        for (std::size_t i = 0; i < direct.size(); ++i)
            co_err = std::max(co_err, std::abs(direct[i] - through[i]));
        report.cocycle_rel.push_back(co_err / out_scale);
    }
    for (double e : report.identity_rel) report.max_identity_rel = std::max(report.max_identity_rel, e);
    for (double e : report.cocycle_rel) report.max_cocycle_rel = std::max(report.max_cocycle_rel, e);
    return report;
}

PointCloud pullback_image(const EvolutionProcess& S, double t, double tau, const PointCloud& D) {
    if (tau < 0.0) throw ProcessError("pullback_image requires tau >= 0");
    D.validate();
    S.grid_index(t);
    S.grid_index(t - tau);
    PointCloud out;
    out.norm_tag = D.norm_tag;
    out.points.resize(D.points.size());
    parallel_for(D.points.size(), [&](std::size_t i) {
        try {
            out.points[i] = S.advance(t, t - tau, D.points[i]);
        } catch (const std::exception& e) {
            throw ProcessError("integration failed for point " + std::to_string(i) + ": " +
                               e.what());
        }
    });
    std::ostringstream label;
    label << "S(" << t << "," << t - tau << ") " << (D.label.empty() ? "cloud" : D.label);
    out.label = label.str();
    return out;
}

std::string to_string(UniverseTag tag) {
    switch (tag) {
        case UniverseTag::Cstar: return "Cstar";
        case UniverseTag::BackwardsBounded: return "backwards_bounded";
        case UniverseTag::UniformlyBounded: return "uniformly_bounded";
    }
    return "?";
}

UniverseTag universe_tag_from_string(const std::string& s) {
    if (s == "Cstar" || s == "cstar") return UniverseTag::Cstar;
    if (s == "backwards_bounded") return UniverseTag::BackwardsBounded;
    if (s == "uniformly_bounded") return UniverseTag::UniformlyBounded;
    throw ProcessError("unknown universe tag '" + s + "'");
}

PointCloud FamilySpec::sample(double t, std::size_t count, std::uint64_t seed,
                              std::size_t dim) const {
    PointCloud cloud;
    if (sampler) {
        cloud = sampler(t, count, seed);
    } else {
        if (count == 0) throw ProcessError("family sample needs count >= 1");
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(static_cast<long long>(
                                   std::llround(t * 1024.0)))));
        const double radius = bound(t);
        cloud.points.reserve(count);
        for (std::size_t i = 0; i < count; ++i) cloud.points.push_back(rng.ball_point(dim, radius));
        std::ostringstream label;
        label << "D_{" << t << "} sample (n=" << count << ", seed=" << seed << ")";
        cloud.label = label.str();
    }
    const double radius = bound(t);
    for (const auto& p : cloud.points)
        if (point_norm(p) > radius * (1.0 + 1e-12))
            throw ProcessError("family sample exceeds its declared bound at t=" + std::to_string(t));
    return cloud;
}

bool universe_accepts(UniverseTag tag, const DecayFunction& candidate_bound,
                      const DecayFunction& member_bound, const std::vector<double>& t_probes) {
    for (double t : t_probes)
        if (candidate_bound(t) > member_bound(t) * (1.0 + 1e-12)) return false;
    (void)tag; // domination transfers membership in every supported universe
    return true;
}

std::optional<double> estimate_absorbing_time(const EvolutionProcess& S, const FamilySpec& D,
                                              const FamilySpec& B, double t,
                                              const std::vector<double>& s_probes,
                                              const std::vector<double>& tau_grid,
                                              std::size_t n_samples, std::uint64_t seed) {
    if (tau_grid.empty()) throw ProcessError("estimate_absorbing_time needs a tau grid");
    for (double s : s_probes)
        if (s > t) throw ProcessError("absorbing-time probes must satisfy s <= t");
    std::vector<double> taus = tau_grid;
    std::sort(taus.begin(), taus.end());

    // absorbed[i] == true when every sampled image point at every probe lands
    // inside B at lag taus[i]
    std::vector<char> absorbed(taus.size(), 1);
    parallel_for(taus.size(), [&](std::size_t i) {
        const double tau = taus[i];
        for (std::size_t si = 0; si < s_probes.size(); ++si) {
            const double s = s_probes[si];
            const PointCloud cloud =
                D.sample(s - tau, n_samples, mix_seed(seed, i * 8191 + si), S.dim);
            const double target = B.bound(s);
            for (const auto& p : cloud.points) {
                const State img = S.advance(s, s - tau, p);
                if (point_norm(img) > target) {
                    absorbed[i] = 0;
                    return;
                }
            }
        }
    });
    // smallest grid tau with absorption at every grid lag from there on
    std::size_t idx = taus.size();
    for (std::size_t i = taus.size(); i-- > 0;) {
        if (!absorbed[i]) break;
        idx = i;
    }
    if (idx == taus.size()) return std::nullopt;
    return taus[idx];
}

PointCloud build_absorbed_family(const EvolutionProcess& S, const FamilySpec& B, double tau1,
                                 double t, const std::vector<double>& tau_grid,
                                 std::size_t n_samples, std::uint64_t seed) {
    if (tau_grid.empty()) throw ProcessError("build_absorbed_family needs a nonempty tau grid");
    std::vector<double> taus;
    for (double tau : tau_grid)
        if (tau >= tau1 - 1e-12) taus.push_back(tau);
    if (taus.empty())
        throw ProcessError("tau grid has no entries at or beyond tau1 = " + std::to_string(tau1));

    std::vector<PointCloud> images(taus.size());
    parallel_for(taus.size(), [&](std::size_t i) {
        const PointCloud base = B.sample(t - taus[i], n_samples, mix_seed(seed, i), S.dim);
        images[i] = pullback_image(S, t, taus[i], base);
    });
    PointCloud out;
    out.norm_tag = images.front().norm_tag;
    for (auto& img : images)
        for (auto& p : img.points) out.points.push_back(std::move(p));
    std::ostringstream label;
    label << "C_{" << t << "} approx (tau1=" << tau1 << ", layers=" << taus.size()
          << ", n=" << n_samples << ", seed=" << seed << ")";
    out.label = label.str();
    return out;
}

RateFit fit_exponential_rate(const std::vector<std::pair<double, double>>& samples) {
    std::vector<std::pair<double, double>> usable;
    bool floored = false;
    for (auto [tau, d] : samples) {
        if (!(d > 0.0)) {
            d = kRateFitFloor;
            floored = true;
        } else if (d < kRateFitFloor) {
            d = kRateFitFloor;
            floored = true;
        }
        usable.emplace_back(tau, std::log(d));
    }
    if (usable.size() < 3) throw ProcessError("fit_exponential_rate needs >= 3 usable samples");

    const double n = static_cast<double>(usable.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : usable) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-30) throw ProcessError("degenerate tau grid in rate fit");
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;

    RateFit fit;
    fit.C_hat = std::exp(intercept);
    fit.omega_hat = -slope;
    fit.floored = floored;
    fit.tau_min = std::numeric_limits<double>::infinity();
    fit.tau_max = -std::numeric_limits<double>::infinity();
    for (auto [x, y] : usable) {
        fit.residual = std::max(fit.residual, std::abs(y - (intercept + slope * x)));
        fit.tau_min = std::min(fit.tau_min, x);
        fit.tau_max = std::max(fit.tau_max, x);
    }
    return fit;
}

KappaDissipativityEstimate estimate_kappa_dissipativity(const EvolutionProcess& S,
                                                        const FamilySpec& D, double t,
                                                        const std::vector<double>& tau_grid,
                                                        double sigma_cap, std::size_t n_samples,
                                                        std::uint64_t seed, std::size_t center_cap,
                                                        double cover_tol) {
    if (tau_grid.empty()) throw ProcessError("estimate_kappa_dissipativity needs a tau grid");
    for (double tau : tau_grid)
        if (tau < 0.0 || tau > sigma_cap)
            throw ProcessError("tau grid must lie within [0, sigma_cap]");
    std::vector<double> sigmas = tau_grid;
    std::sort(sigmas.begin(), sigmas.end());

    // one image cloud per sigma; the union over sigma >= tau is a suffix union
    std::vector<PointCloud> images(sigmas.size());
    parallel_for(sigmas.size(), [&](std::size_t i) {
        const PointCloud base = D.sample(t - sigmas[i], n_samples, mix_seed(seed, i), S.dim);
        images[i] = pullback_image(S, t, sigmas[i], base);
    });

    KappaDissipativityEstimate est;
    std::vector<std::pair<double, double>> fit_samples;
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        PointCloud uni;
        uni.norm_tag = images.front().norm_tag;
        for (std::size_t j = i; j < sigmas.size(); ++j)
            for (const auto& p : images[j].points) uni.points.push_back(p);
        std::ostringstream label;
        label << "union_{sigma>=" << sigmas[i] << "} S(" << t << ",.)D";
        uni.label = label.str();
        const double upper = kappa_bounds(uni, cover_tol, center_cap).upper;
        est.taus.push_back(sigmas[i]);
        est.kappa_upper.push_back(upper);
        fit_samples.emplace_back(sigmas[i], upper);
    }
    est.fit = fit_exponential_rate(fit_samples);
    return est;
}

PointCloud approximate_attractor(const EvolutionProcess& S,
                                 const std::function<PointCloud(double)>& c_family, double t,
                                 std::size_t n_steps, double T) {
    if (n_steps == 0) throw ProcessError("approximate_attractor needs n_steps >= 1");
    const double depth = static_cast<double>(n_steps) * T;
    PointCloud base = c_family(t - depth);
    PointCloud out = pullback_image(S, t, depth, base);
    std::ostringstream label;
    label << "M_{" << t << "} approx (n=" << n_steps << ", T=" << T << ")";
    out.label = label.str();
    return out;
}

EvolutionProcess make_contraction_toy(double rate, std::size_t dim, double dt) {
    EvolutionProcess S;
    S.id = "contraction_toy";
    S.time_grid_step = dt;
    S.dim = dim;
    const double step_factor = std::exp(-rate * dt);
    S.advance = [step_factor, dt](double t, double s, const State& x) -> State {
        const double span = t - s;
        if (span < -1e-12) throw ProcessError("advance needs t >= s");
        const long n = static_cast<long>(std::llround(span / dt));
        if (std::abs(span - static_cast<double>(n) * dt) > 1e-9)
            throw ProcessError("off-grid advance");
        State y = x;
        for (long k = 0; k < n; ++k)
            for (auto& c : y) c *= step_factor;
        return y;
    };
    return S;
}

EvolutionProcess make_diagonal_linear_toy(const std::vector<double>& decay_rates, double dt) {
    EvolutionProcess S;
    S.id = "diagonal_linear_toy";
    S.time_grid_step = dt;
    S.dim = decay_rates.size();
    std::vector<double> factors(decay_rates.size());
    for (std::size_t i = 0; i < decay_rates.size(); ++i) factors[i] = std::exp(-decay_rates[i] * dt);
    S.advance = [factors, dt](double t, double s, const State& x) -> State {
        const double span = t - s;
        if (span < -1e-12) throw ProcessError("advance needs t >= s");
        const long n = static_cast<long>(std::llround(span / dt));
        if (std::abs(span - static_cast<double>(n) * dt) > 1e-9)
            throw ProcessError("off-grid advance");
        State y = x;
        for (long k = 0; k < n; ++k)
            for (std::size_t i = 0; i < y.size(); ++i) y[i] *= factors[i];
        return y;
    };
    return S;
}

} // namespace plab
