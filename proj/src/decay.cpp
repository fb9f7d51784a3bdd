#include "plab/decay.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace plab {

namespace {

void check_positive(double value, double t, const std::string& description) {
    if (!(value > 0.0) || !std::isfinite(value))
        throw DecayError("decay function '" + description + "' is not strictly positive at t=" +
                         std::to_string(t) + " (value " + std::to_string(value) + ")");
}

} // namespace

DecayFunction DecayFunction::from_expression(std::string_view expr_text) {
    DecayFunction f;
    f.expr_ = parse_decay_expression(expr_text);
    f.description_ = std::string(expr_text);
    return f;
}

DecayFunction DecayFunction::from_expr_tree(Expr::Ptr expr, std::string description) {
    DecayFunction f;
    f.expr_ = std::move(expr);
    f.description_ = std::move(description);
    return f;
}

DecayFunction DecayFunction::constant(double c) {
    if (!(c > 0.0)) throw DecayError("constant decay function requires c > 0");
    DecayFunction f;
    f.expr_ = Expr::make_const(c);
    std::ostringstream os;
    os << "const(" << c << ")";
    f.description_ = os.str();
    return f;
}

DecayFunction DecayFunction::from_table(std::vector<double> t, std::vector<double> value,
                                        std::string description) {
    if (t.size() != value.size() || t.size() < 2)
        throw DecayError("tabulated decay function needs >= 2 aligned samples");
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
        if (!(t[i] < t[i + 1])) throw DecayError("tabulation grid must be strictly increasing");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(value[i]))
            throw DecayError("tabulated decay function has a non-finite sample");
        check_positive(value[i], t[i], description);
    }
    DecayFunction f;
    f.tabulated_ = true;
    f.grid_t_ = std::move(t);
    f.grid_v_ = std::move(value);
    f.description_ = std::move(description);
    return f;
}

DecayFunction DecayFunction::from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DecayError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DecayError("empty CSV " + path);
    // tolerate an optional UTF-8 BOM and surrounding whitespace in the header
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line = line.substr(3);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line != "t,value") throw DecayError("expected header 't,value' in " + path);
    std::vector<double> ts, vs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string a, b;
        if (!std::getline(row, a, ',') || !std::getline(row, b))
            throw DecayError("malformed row '" + line + "' in " + path);
        ts.push_back(std::stod(a));
        vs.push_back(std::stod(b));
    }
    return from_table(std::move(ts), std::move(vs), "table:" + path);
}

void DecayFunction::save_csv(const std::string& path) const {
    if (!tabulated_) throw DecayError("save_csv requires a tabulated decay function");
    std::ofstream out(path);
    if (!out) throw DecayError("cannot write " + path);
    out << "t,value\n";
    out.precision(17);
    for (std::size_t i = 0; i < grid_t_.size(); ++i)
        out << grid_t_[i] << "," << grid_v_[i] << "\n";
}

double DecayFunction::operator()(double t) const {
    if (!tabulated_) {
        const double val = expr_->eval(t);
        check_positive(val, t, description_);
        return val;
    }
    if (t < grid_t_.front() || t > grid_t_.back())
        throw OutOfGridError("t=" + std::to_string(t) + " outside tabulation grid [" +
                             std::to_string(grid_t_.front()) + ", " +
                             std::to_string(grid_t_.back()) + "] of '" + description_ + "'");
    const auto it = std::upper_bound(grid_t_.begin(), grid_t_.end(), t);
    if (it == grid_t_.begin()) return grid_v_.front();
    if (it == grid_t_.end()) return grid_v_.back();
    const std::size_t hi = static_cast<std::size_t>(it - grid_t_.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - grid_t_[lo]) / (grid_t_[hi] - grid_t_[lo]);
    const double val = (1.0 - w) * grid_v_[lo] + w * grid_v_[hi];
    check_positive(val, t, description_);
    return val;
}

DecayFunction combine(const DecayFunction& r1, const DecayFunction& r2, CombineOp op) {
    const char* opname = op == CombineOp::Sum ? " + " : " * ";
    const std::string desc = "(" + r1.description() + ")" + opname + "(" + r2.description() + ")";
    auto apply = [op](double a, double b) { return op == CombineOp::Sum ? a + b : a * b; };

    if (!r1.is_tabulated() && !r2.is_tabulated()) {
        auto tree = Expr::make_binary(op == CombineOp::Sum ? Expr::Kind::Add : Expr::Kind::Mul,
                                      r1.expression_tree(), r2.expression_tree());
        return DecayFunction::from_expr_tree(std::move(tree), desc);
    }
    if (r1.is_tabulated() && r2.is_tabulated()) {
        if (r1.grid() != r2.grid())
            throw GridMismatchError("incompatible tabulation grids for '" + r1.description() +
                                    "' and '" + r2.description() + "'");
        std::vector<double> vals(r1.grid().size());
        for (std::size_t i = 0; i < vals.size(); ++i)
            vals[i] = apply(r1.values()[i], r2.values()[i]);
        return DecayFunction::from_table(r1.grid(), std::move(vals), desc);
    }
    // mixed: evaluate on the tabulated grid
    const DecayFunction& tab = r1.is_tabulated() ? r1 : r2;
    const DecayFunction& closed = r1.is_tabulated() ? r2 : r1;
    std::vector<double> vals(tab.grid().size());
    for (std::size_t i = 0; i < vals.size(); ++i)
        vals[i] = apply(tab.values()[i], closed(tab.grid()[i]));
    return DecayFunction::from_table(tab.grid(), std::move(vals), desc);
}

DecayFunction scale_sqrt(const DecayFunction& r, double c, bool take_sqrt) {
    if (!(c > 0.0)) throw DecayError("scale_sqrt requires c > 0");
    std::ostringstream desc;
    if (take_sqrt)
        desc << "sqrt(" << c << " * (" << r.description() << "))";
    else
        desc << c << " * (" << r.description() << ")";
    if (r.is_tabulated()) {
        std::vector<double> vals(r.grid().size());
        for (std::size_t i = 0; i < vals.size(); ++i) {
            const double scaled = c * r.values()[i];
            vals[i] = take_sqrt ? std::sqrt(scaled) : scaled;
        }
        return DecayFunction::from_table(r.grid(), std::move(vals), desc.str());
    }
    auto tree = Expr::make_binary(Expr::Kind::Mul, Expr::make_const(c), r.expression_tree());
    if (take_sqrt) tree = Expr::make_unary(Expr::Kind::Sqrt, std::move(tree));
    return DecayFunction::from_expr_tree(std::move(tree), desc.str());
}

MembershipVerdict membership_check(const DecayFunction& r, const MembershipProbe& probe) {
    if (probe.alphas.empty()) throw DecayError("membership_check needs at least one alpha");
    for (double a : probe.alphas)
        if (!(a > 0.0)) throw DecayError("membership_check alphas must be positive");
    if (!(probe.tau_max > 0.0)) throw DecayError("membership_check needs tau_max > 0");
    if (!(probe.tol > 0.0)) throw DecayError("membership_check needs tol > 0");

    MembershipVerdict verdict;
    bool all_certified = true;

    const std::size_t n_tau = std::max<std::size_t>(probe.tau_samples, 8);
    const double dtau = probe.tau_max / static_cast<double>(n_tau);
    const std::size_t n_s =
        std::max<std::size_t>(2, static_cast<std::size_t>(probe.window * probe.s_grid_density));

    for (double alpha : probe.alphas) {
        for (double t0 : probe.t_anchors) {
            std::vector<double> taus(n_tau + 1), m(n_tau + 1);
            bool overflowed = false;
            for (std::size_t k = 0; k <= n_tau; ++k) {
                const double tau = dtau * static_cast<double>(k);
                double sup = 0.0;
                for (std::size_t j = 0; j <= n_s; ++j) {
                    const double s =
                        t0 - probe.window + probe.window * static_cast<double>(j) / n_s;
                    double val;
                    try {
                        val = r(s - tau) * std::exp(-alpha * tau);
                    } catch (const OutOfGridError&) {
                        throw; // probe grid exceeds the tabulation; caller's call
                    } catch (const DecayError&) {
                        val = std::numeric_limits<double>::infinity();
                    }
                    if (!std::isfinite(val)) {
                        overflowed = true;
                        sup = std::numeric_limits<double>::infinity();
                        break;
                    }
                    sup = std::max(sup, val);
                }
                taus[k] = tau;
                m[k] = sup;
                if (overflowed) {
                    taus.resize(k + 1);
                    m.resize(k + 1);
                    break;
                }
            }
            verdict.witnesses.push_back({alpha, t0, taus.back(), m.back()});

            if (overflowed) {
                verdict.status = Membership::Refuted;
                verdict.overflow = true;
                verdict.counterexample = MembershipCounterexample{alpha, t0, taus, m,
                                                                  std::numeric_limits<double>::infinity()};
                verdict.summary = "overflow while probing alpha=" + std::to_string(alpha) +
                                  ", t=" + std::to_string(t0);
                return verdict;
            }

            // refute if m stays >= margin > tol on the whole final quartile and
            // shows no decay trend there (flat or growing tail)
            const std::size_t q3 = (3 * (n_tau + 1)) / 4;
            double tail_min = std::numeric_limits<double>::infinity();
            for (std::size_t k = q3; k <= n_tau; ++k) tail_min = std::min(tail_min, m[k]);
            const double margin = 10.0 * probe.tol;
            const bool no_decay_trend = tail_min >= 0.99 * m[q3];
            if (tail_min >= margin && no_decay_trend) {
                verdict.status = Membership::Refuted;
                verdict.counterexample =
                    MembershipCounterexample{alpha, t0,
                                             std::vector<double>(taus.begin() + q3, taus.end()),
                                             std::vector<double>(m.begin() + q3, m.end()), tail_min};
                std::ostringstream os;
                os << "sup stays >= " << tail_min << " (> tol " << probe.tol
                   << ") on the final quartile for alpha=" << alpha << ", t=" << t0;
                verdict.summary = os.str();
                return verdict;
            }

            // certified tail: monotone non-increasing over at least the final
            // quartile and ending below tol
            std::size_t mono_from = n_tau;
            while (mono_from > 0 && m[mono_from - 1] >= m[mono_from] * (1.0 - 1e-12)) --mono_from;
            const bool certified = (m.back() <= probe.tol) && (mono_from <= q3);
            if (!certified) all_certified = false;
        }
    }

    verdict.status = all_certified ? Membership::CertifiedDecay : Membership::Inconclusive;
    verdict.summary = all_certified ? "tail monotone below tol for every probed (alpha, t)"
                                    : "tail not conclusively decayed for some probed (alpha, t)";
    return verdict;
}

DecayFunction exp_integral_transform(const DecayFunction& delta, double eta, double cutoff,
                                     double quadrature_step, double t_lo, double t_hi,
                                     double t_step) {
    if (!(eta > 0.0)) throw DecayError("exp_integral_transform requires eta > 0");
    if (!(cutoff > 0.0) || !(quadrature_step > 0.0) || !(t_step > 0.0) || !(t_hi > t_lo))
        throw DecayError("exp_integral_transform: bad grid parameters");

    const std::size_t n_q = std::max<std::size_t>(2, static_cast<std::size_t>(cutoff / quadrature_step));
    const double h = cutoff / static_cast<double>(n_q);
    std::vector<double> ts, vals;
    double trunc = 0.0;
    for (double t = t_lo; t <= t_hi + 0.5 * t_step; t += t_step) {
        double acc = 0.5 * (delta(t) + delta(t - cutoff) * std::exp(-eta * cutoff));
        for (std::size_t j = 1; j < n_q; ++j) {
            const double u = h * static_cast<double>(j);
            acc += delta(t - u) * std::exp(-eta * u);
        }
        ts.push_back(t);
        vals.push_back(acc * h);
        // tail estimate with the integrand frozen at the cutoff
        trunc = std::max(trunc, delta(t - cutoff) * std::exp(-eta * cutoff) / eta);
    }
    std::ostringstream desc;
    desc << "exp_integral(" << delta.description() << "; eta=" << eta << ", cutoff=" << cutoff << ")";
    auto out = DecayFunction::from_table(std::move(ts), std::move(vals), desc.str());
    out.truncation_bound_ = trunc;
    return out;
}

DecayFunction window_sup_transform(const DecayFunction& delta, double T, double ell_grid_density,
                                   double s_lo, double s_hi, double s_step) {
    if (!(T > 0.0)) throw DecayError("window_sup_transform requires T > 0");
    if (!(ell_grid_density > 0.0) || !(s_step > 0.0) || !(s_hi > s_lo))
        throw DecayError("window_sup_transform: bad grid parameters");
    const std::size_t n_ell = std::max<std::size_t>(2, static_cast<std::size_t>(T * ell_grid_density));
    std::vector<double> ts, vals;
    for (double s = s_lo; s <= s_hi + 0.5 * s_step; s += s_step) {
        double sup = 0.0;
        for (std::size_t j = 0; j <= n_ell; ++j) {
            const double ell = T * static_cast<double>(j) / static_cast<double>(n_ell);
            sup = std::max(sup, delta(ell + s));
        }
        ts.push_back(s);
        vals.push_back(sup);
    }
    std::ostringstream desc;
    desc << "window_sup(" << delta.description() << "; T=" << T << ")";
    return DecayFunction::from_table(std::move(ts), std::move(vals), desc.str());
}

} // namespace plab
