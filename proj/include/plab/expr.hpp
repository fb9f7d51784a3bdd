#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace plab {

struct ExprError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Expression tree over up to two variables, t and v. Decay functions use
// only t; model nonlinearities use both.
class Expr {
public:
    enum class Kind {
        Const,   // value
        VarT,
        VarV,
        Poly,    // coeffs in t: c0 + c1 t + c2 t^2 + ...
        ExpAt,   // e^{value * t}
        Add, Sub, Mul, Div, Pow,
        Neg,
        Sin, Cos, Exp, Sqrt, Abs,
    };

    using Ptr = std::shared_ptr<const Expr>;

    Kind kind;
    double value = 0.0;
    std::vector<double> coeffs;
    Ptr lhs, rhs;

    double eval(double t, double v = 0.0) const;
    std::string str() const;

    static Ptr make_const(double c);
    static Ptr make_unary(Kind k, Ptr a);
    static Ptr make_binary(Kind k, Ptr a, Ptr b);
    static Ptr make_poly(std::vector<double> coeffs);
    static Ptr make_exp_at(double a);
    static Ptr make_var_t();
    static Ptr make_var_v();
};

// General infix grammar with variables t, v; operators + - * / ^ and unary
// minus; functions sin, cos, exp, sqrt, abs; constant pi.
Expr::Ptr parse_expression(std::string_view src);

// Restricted grammar for decay functions of t:
//   const(c) | poly(c0,c1,...) | exp(a)  [meaning e^{a t}] | sin | cos | abs
// combined with '+', '*', and sqrt(...); bare numeric literals are constants.
Expr::Ptr parse_decay_expression(std::string_view src);

} // namespace plab
