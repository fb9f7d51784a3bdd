#pragma once

#include "plab/energy.hpp"
#include "plab/io.hpp"
#include "plab/process.hpp"
#include "plab/wave.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace plab {

// Exit codes of the experiment driver.
inline constexpr int kExitOk = 0;
inline constexpr int kExitParseError = 2;
inline constexpr int kExitHypothesisFailure = 3;
inline constexpr int kExitInvariantViolation = 4;
inline constexpr int kExitBlowup = 5;

// Validated model bundled with its derived machinery: integrator, evolution
// process, constants ledger and the absorbing radius over a wide grid.
struct WaveLab {
    ModelSpec spec;
    std::shared_ptr<const WaveIntegrator> integrator;
    HypothesisReport hypotheses;
    ConstantsLedger ledger;
    EvolutionProcess process;
    DecayFunction r0_fn = DecayFunction::constant(1.0);
    double mu0 = 0.5;

    static WaveLab make(const ModelSpec& spec, double mu0 = 0.5, double r0_lo = -700.0,
                        double r0_hi = 80.0, double r0_step = 1.0);

    FamilySpec absorbing_family() const;
    double gamma_of(const DecayFunction& bound, double xi) const {
        return gamma_envelope(ledger, bound, xi);
    }
    WaveState random_state_in_ball(double radius, std::uint64_t seed) const;
};

struct AbsorptionThreshold {
    double tau_grid = 0.0;       // first grid lag with sup_s Gamma(s - tau) e^{-beta eps tau} <= 1
    double tau_continuous = 0.0; // bisection root of the same inequality
};

AbsorptionThreshold absorption_threshold(const ConstantsLedger& L,
                                         const std::function<double(double)>& gamma_xi,
                                         const std::vector<double>& s_probes, double tau_step,
                                         double tau_cap);

// Sampled stand-in for the closed positively invariant family: the union of
// pullback images of the absorbing family over a lag ladder starting at the
// empirically estimated self-absorbing lag.
struct AbsorbedFamilyParams {
    std::size_t layers = 14;
    double layer_step = 3.0;
    std::size_t samples_per_layer = 12;
    double tau1_search_cap = 80.0;
    double tau1_search_step = 2.0;
    std::uint64_t seed = 1;
};

PointCloud build_invariant_cloud(const WaveLab& lab, double t, const AbsorbedFamilyParams& params,
                                 double* tau1_out = nullptr);

// ----- experiment driver -------------------------------------------------

struct RunOutcome {
    int exit_code = kExitOk;
    std::string message;
};

// Dispatch on the "command" field of the JSON config; artifacts land in
// out_dir together with a manifest. A nonempty expect_command must match the
// config.
RunOutcome run_experiment(const std::string& config_path, const std::string& out_dir,
                          std::optional<std::uint64_t> seed_override = std::nullopt,
                          const std::string& expect_command = "");

} // namespace plab
