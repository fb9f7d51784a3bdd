#pragma once

#include "plab/expr.hpp"

#include <optional>
#include <string>
#include <vector>

namespace plab {

struct DecayError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GridMismatchError : DecayError {
    using DecayError::DecayError;
};
struct OutOfGridError : DecayError {
    using DecayError::DecayError;
};

// A strictly positive continuous function of time. Either a closed-form
// expression in t or a table with linear interpolation on a declared grid;
// evaluation outside a declared grid is an error, never an extrapolation.
class DecayFunction {
public:
    static DecayFunction from_expression(std::string_view expr_text);
    static DecayFunction constant(double c);
    static DecayFunction from_table(std::vector<double> t, std::vector<double> value,
                                    std::string description);
    // CSV with header "t,value", strictly increasing t
    static DecayFunction from_csv(const std::string& path);

    double operator()(double t) const;

    bool is_tabulated() const { return tabulated_; }
    // null for tabulated functions
    Expr::Ptr expression_tree() const { return expr_; }
    const std::vector<double>& grid() const { return grid_t_; }
    const std::vector<double>& values() const { return grid_v_; }
    const std::string& description() const { return description_; }
    // recorded by exp_integral_transform
    double truncation_bound() const { return truncation_bound_; }

    void save_csv(const std::string& path) const;

    static DecayFunction from_expr_tree(Expr::Ptr expr, std::string description);

private:
    DecayFunction() = default;

    bool tabulated_ = false;
    Expr::Ptr expr_;
    std::vector<double> grid_t_, grid_v_;
    std::string description_;
    double truncation_bound_ = 0.0;

    friend DecayFunction exp_integral_transform(const DecayFunction&, double, double, double,
                                                double, double, double);
};

enum class CombineOp { Sum, Product };

DecayFunction combine(const DecayFunction& r1, const DecayFunction& r2, CombineOp op);

// c * r, optionally sqrt(c * r); requires c > 0
DecayFunction scale_sqrt(const DecayFunction& r, double c, bool take_sqrt);

enum class Membership { CertifiedDecay, Refuted, Inconclusive };

struct MembershipWitness {
    double alpha, t_anchor, tau, value;
};

struct MembershipCounterexample {
    double alpha, t_anchor;
    std::vector<double> taus;
    std::vector<double> values;
    double margin; // values on the final quartile stay >= margin > tol
};

struct MembershipVerdict {
    Membership status = Membership::Inconclusive;
    std::vector<MembershipWitness> witnesses;
    std::optional<MembershipCounterexample> counterexample;
    bool overflow = false;
    std::string summary;
};

struct MembershipProbe {
    std::vector<double> alphas{0.05, 0.2, 1.0, 5.0};
    std::vector<double> t_anchors{-10.0, 0.0, 10.0};
    double tau_max = 200.0;
    double s_grid_density = 2.0; // samples per unit time in the s-window
    double tol = 1e-6;
    double window = 100.0;       // s ranges over (t - window, t]
    std::size_t tau_samples = 400;
};

// Probe deep enough for the slowest default alpha to push desk-scale
// constants below tol; used by the hypothesis gate.
inline MembershipProbe deep_probe() {
    MembershipProbe p;
    p.tau_max = 1500.0;
    p.tau_samples = 600;
    return p;
}

// Windowed surrogate of the defining limit: for each (alpha, t) evaluates
// m(tau) = sup over an s-grid in (t - window, t] of r(s - tau) e^{-alpha tau}
// on a tau-grid, then classifies the tail.
MembershipVerdict membership_check(const DecayFunction& r, const MembershipProbe& probe = {});

// mu(t) = int_0^inf delta(t - u) e^{-eta u} du, composite trapezoid truncated
// at `cutoff`, tabulated on [t_lo, t_hi] with step t_step.
DecayFunction exp_integral_transform(const DecayFunction& delta, double eta, double cutoff,
                                     double quadrature_step, double t_lo, double t_hi,
                                     double t_step);

// mu(s) = sup_{l in [0, T]} delta(l + s), tabulated on [s_lo, s_hi].
DecayFunction window_sup_transform(const DecayFunction& delta, double T, double ell_grid_density,
                                   double s_lo, double s_hi, double s_step);

} // namespace plab
