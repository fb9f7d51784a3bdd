#pragma once

#include "plab/decay.hpp"
#include "plab/geometry.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace plab {

struct ProcessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using State = std::vector<double>;

// Two-parameter solution operator on a shared uniform time grid. advance over
// [s, t] must be a composition of single-step maps so that the identity and
// cocycle laws hold exactly.
struct EvolutionProcess {
    std::string id;
    double time_grid_step = 1e-3;
    std::size_t dim = 0;
    std::function<State(double t, double s, const State&)> advance;

    // snaps to the grid; throws on off-grid times (beyond 1e-9 absolute)
    long grid_index(double t) const;
};

struct ProcessLawProbe {
    double t, r, s;
    State state;
};

struct ProcessLawReport {
    double max_identity_rel = 0.0;
    double max_cocycle_rel = 0.0;
    std::vector<double> identity_rel, cocycle_rel;
};

ProcessLawReport verify_process_laws(const EvolutionProcess& S,
                                     const std::vector<ProcessLawProbe>& probes);

// {advance(t, t - tau, x) : x in D}
PointCloud pullback_image(const EvolutionProcess& S, double t, double tau, const PointCloud& D);

enum class UniverseTag { Cstar, BackwardsBounded, UniformlyBounded };

std::string to_string(UniverseTag tag);
UniverseTag universe_tag_from_string(const std::string& s);

// Time-indexed family of sets, represented by a norm bound plus a seeded
// sampler of points within the bound at each time.
struct FamilySpec {
    UniverseTag universe_tag = UniverseTag::Cstar;
    DecayFunction bound = DecayFunction::constant(1.0);
    // when set, overrides the default ball sampler
    std::function<PointCloud(double t, std::size_t count, std::uint64_t seed)> sampler;

    PointCloud sample(double t, std::size_t count, std::uint64_t seed, std::size_t dim) const;
};

// A family whose bound is dominated pointwise by an accepted member's bound
// belongs to the same universe (universes are closed by inclusion).
bool universe_accepts(UniverseTag tag, const DecayFunction& candidate_bound,
                      const DecayFunction& member_bound, const std::vector<double>& t_probes);

std::optional<double> estimate_absorbing_time(const EvolutionProcess& S, const FamilySpec& D,
                                              const FamilySpec& B, double t,
                                              const std::vector<double>& s_probes,
                                              const std::vector<double>& tau_grid,
                                              std::size_t n_samples, std::uint64_t seed);

PointCloud build_absorbed_family(const EvolutionProcess& S, const FamilySpec& B, double tau1,
                                 double t, const std::vector<double>& tau_grid,
                                 std::size_t n_samples, std::uint64_t seed);

struct RateFit {
    double C_hat = 0.0;
    double omega_hat = 0.0;
    double residual = 0.0; // max absolute log residual
    double tau_min = 0.0, tau_max = 0.0;
    bool floored = false;  // some d_k were clamped to the positivity floor
};

inline constexpr double kRateFitFloor = 1e-15;

RateFit fit_exponential_rate(const std::vector<std::pair<double, double>>& samples);

struct KappaDissipativityEstimate {
    std::vector<double> taus;
    std::vector<double> kappa_upper;
    RateFit fit;
};

KappaDissipativityEstimate estimate_kappa_dissipativity(
    const EvolutionProcess& S, const FamilySpec& D, double t, const std::vector<double>& tau_grid,
    double sigma_cap, std::size_t n_samples, std::uint64_t seed, std::size_t center_cap = 8,
    double cover_tol = 1e-6);

// Deep-pullback surrogate of the attractor section at time t: the image of
// the positively invariant family at t - n T pushed forward over n T.
PointCloud approximate_attractor(const EvolutionProcess& S,
                                 const std::function<PointCloud(double)>& c_family, double t,
                                 std::size_t n_steps, double T);

// Toy processes used by tests and experiments.
EvolutionProcess make_contraction_toy(double rate, std::size_t dim, double dt);
EvolutionProcess make_diagonal_linear_toy(const std::vector<double>& decay_rates, double dt);

} // namespace plab
