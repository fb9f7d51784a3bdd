#include "plab/expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace plab {

double Expr::eval(double t, double v) const {
    switch (kind) {
        case Kind::Const: return value;
        case Kind::VarT: return t;
        case Kind::VarV: return v;
        case Kind::Poly: {
            double acc = 0.0;
            for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * t + coeffs[i];
            return acc;
        }
        case Kind::ExpAt: return std::exp(value * t);
        case Kind::Add: return lhs->eval(t, v) + rhs->eval(t, v);
        case Kind::Sub: return lhs->eval(t, v) - rhs->eval(t, v);
        case Kind::Mul: return lhs->eval(t, v) * rhs->eval(t, v);
        case Kind::Div: return lhs->eval(t, v) / rhs->eval(t, v);
        case Kind::Pow: return std::pow(lhs->eval(t, v), rhs->eval(t, v));
        case Kind::Neg: return -lhs->eval(t, v);
        case Kind::Sin: return std::sin(lhs->eval(t, v));
        case Kind::Cos: return std::cos(lhs->eval(t, v));
        case Kind::Exp: return std::exp(lhs->eval(t, v));
        case Kind::Sqrt: return std::sqrt(lhs->eval(t, v));
        case Kind::Abs: return std::abs(lhs->eval(t, v));
    }
    throw ExprError("corrupt expression node");
}

std::string Expr::str() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::Const: os << value; break;
        case Kind::VarT: os << "t"; break;
        case Kind::VarV: os << "v"; break;
        case Kind::Poly: {
            os << "poly(";
            for (std::size_t i = 0; i < coeffs.size(); ++i) {
                if (i) os << ",";
                os << coeffs[i];
            }
            os << ")";
            break;
        }
        case Kind::ExpAt: os << "exp(" << value << ")"; break;
        case Kind::Add: os << "(" << lhs->str() << " + " << rhs->str() << ")"; break;
        case Kind::Sub: os << "(" << lhs->str() << " - " << rhs->str() << ")"; break;
        case Kind::Mul: os << "(" << lhs->str() << " * " << rhs->str() << ")"; break;
        case Kind::Div: os << "(" << lhs->str() << " / " << rhs->str() << ")"; break;
        case Kind::Pow: os << "(" << lhs->str() << "^" << rhs->str() << ")"; break;
        case Kind::Neg: os << "(-" << lhs->str() << ")"; break;
        case Kind::Sin: os << "sin(" << lhs->str() << ")"; break;
        case Kind::Cos: os << "cos(" << lhs->str() << ")"; break;
        case Kind::Exp: os << "exp(" << lhs->str() << ")"; break;
        case Kind::Sqrt: os << "sqrt(" << lhs->str() << ")"; break;
        case Kind::Abs: os << "abs(" << lhs->str() << ")"; break;
    }
    return os.str();
}

Expr::Ptr Expr::make_const(double c) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Const;
    e->value = c;
    return e;
}

Expr::Ptr Expr::make_unary(Kind k, Ptr a) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->lhs = std::move(a);
    return e;
}

Expr::Ptr Expr::make_binary(Kind k, Ptr a, Ptr b) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
}

Expr::Ptr Expr::make_poly(std::vector<double> coeffs) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Poly;
    e->coeffs = std::move(coeffs);
    return e;
}

Expr::Ptr Expr::make_exp_at(double a) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::ExpAt;
    e->value = a;
    return e;
}

Expr::Ptr Expr::make_var_t() {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::VarT;
    return e;
}

Expr::Ptr Expr::make_var_v() {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::VarV;
    return e;
}

namespace {

struct Lexer {
    std::string_view src;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }

    bool eof() {
        skip_ws();
        return pos >= src.size();
    }

    char peek() {
        skip_ws();
        return pos < src.size() ? src[pos] : '\0';
    }

    bool accept(char c) {
        skip_ws();
        if (pos < src.size() && src[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c))
            throw ExprError(std::string("expected '") + c + "' at offset " + std::to_string(pos) +
                            " in \"" + std::string(src) + "\"");
    }

    bool accept_word(std::string_view w) {
        skip_ws();
        if (src.substr(pos, w.size()) == w) {
            const std::size_t end = pos + w.size();
            // word boundary: next char must not continue an identifier
            if (end >= src.size() || !std::isalnum(static_cast<unsigned char>(src[end]))) {
                pos = end;
                return true;
            }
        }
        return false;
    }

    double number() {
        skip_ws();
        std::size_t consumed = 0;
        double val = 0.0;
        try {
            val = std::stod(std::string(src.substr(pos)), &consumed);
        } catch (const std::exception&) {
            throw ExprError("expected number at offset " + std::to_string(pos) + " in \"" +
                            std::string(src) + "\"");
        }
        pos += consumed;
        return val;
    }
};

// --- general grammar -------------------------------------------------------

Expr::Ptr parse_sum(Lexer& lx);

Expr::Ptr parse_primary(Lexer& lx) {
    if (lx.accept('(')) {
        auto e = parse_sum(lx);
        lx.expect(')');
        return e;
    }
    for (auto [name, kind] : {std::pair{"sin", Expr::Kind::Sin},
                              std::pair{"cos", Expr::Kind::Cos},
                              std::pair{"exp", Expr::Kind::Exp},
                              std::pair{"sqrt", Expr::Kind::Sqrt},
                              std::pair{"abs", Expr::Kind::Abs}}) {
        if (lx.accept_word(name)) {
            lx.expect('(');
            auto arg = parse_sum(lx);
            lx.expect(')');
            return Expr::make_unary(kind, std::move(arg));
        }
    }
    if (lx.accept_word("pi")) return Expr::make_const(M_PI);
    if (lx.accept_word("t")) return Expr::make_var_t();
    if (lx.accept_word("v")) return Expr::make_var_v();
    const char c = lx.peek();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return Expr::make_const(lx.number());
    throw ExprError("unexpected token at offset " + std::to_string(lx.pos) + " in \"" +
                    std::string(lx.src) + "\"");
}

Expr::Ptr parse_power(Lexer& lx) {
    // unary minus binds looser than '^', so -v^2 means -(v^2)
    if (lx.accept('-')) return Expr::make_unary(Expr::Kind::Neg, parse_power(lx));
    if (lx.accept('+')) return parse_power(lx);
    auto base = parse_primary(lx);
    if (lx.accept('^')) {
        // right associative
        auto exponent = parse_power(lx);
        return Expr::make_binary(Expr::Kind::Pow, std::move(base), std::move(exponent));
    }
    return base;
}

Expr::Ptr parse_product(Lexer& lx) {
    auto e = parse_power(lx);
    for (;;) {
        if (lx.accept('*')) {
            e = Expr::make_binary(Expr::Kind::Mul, std::move(e), parse_power(lx));
        } else if (lx.accept('/')) {
            e = Expr::make_binary(Expr::Kind::Div, std::move(e), parse_power(lx));
        } else {
            return e;
        }
    }
}

Expr::Ptr parse_sum(Lexer& lx) {
    auto e = parse_product(lx);
    for (;;) {
        if (lx.accept('+')) {
            e = Expr::make_binary(Expr::Kind::Add, std::move(e), parse_product(lx));
        } else if (lx.accept('-')) {
            e = Expr::make_binary(Expr::Kind::Sub, std::move(e), parse_product(lx));
        } else {
            return e;
        }
    }
}

// --- decay grammar ---------------------------------------------------------

Expr::Ptr parse_decay_sum(Lexer& lx);

Expr::Ptr parse_decay_primary(Lexer& lx) {
    if (lx.accept('(')) {
        auto e = parse_decay_sum(lx);
        lx.expect(')');
        return e;
    }
    if (lx.accept_word("const")) {
        lx.expect('(');
        const double c = lx.number();
        lx.expect(')');
        return Expr::make_const(c);
    }
    if (lx.accept_word("poly")) {
        lx.expect('(');
        std::vector<double> coeffs;
        coeffs.push_back(lx.number());
        while (lx.accept(',')) coeffs.push_back(lx.number());
        lx.expect(')');
        return Expr::make_poly(std::move(coeffs));
    }
    if (lx.accept_word("exp")) {
        lx.expect('(');
        const double a = lx.number();
        lx.expect(')');
        return Expr::make_exp_at(a);
    }
    if (lx.accept_word("sqrt")) {
        lx.expect('(');
        auto arg = parse_decay_sum(lx);
        lx.expect(')');
        return Expr::make_unary(Expr::Kind::Sqrt, std::move(arg));
    }
    if (lx.accept_word("sin")) return Expr::make_unary(Expr::Kind::Sin, Expr::make_var_t());
    if (lx.accept_word("cos")) return Expr::make_unary(Expr::Kind::Cos, Expr::make_var_t());
    if (lx.accept_word("abs")) return Expr::make_unary(Expr::Kind::Abs, Expr::make_var_t());
    const char c = lx.peek();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return Expr::make_const(lx.number());
    throw ExprError("unexpected token in decay expression at offset " + std::to_string(lx.pos) +
                    " in \"" + std::string(lx.src) + "\"");
}

Expr::Ptr parse_decay_product(Lexer& lx) {
    auto e = parse_decay_primary(lx);
    while (lx.accept('*')) e = Expr::make_binary(Expr::Kind::Mul, std::move(e), parse_decay_primary(lx));
    return e;
}

Expr::Ptr parse_decay_sum(Lexer& lx) {
    auto e = parse_decay_product(lx);
    while (lx.accept('+')) e = Expr::make_binary(Expr::Kind::Add, std::move(e), parse_decay_product(lx));
    return e;
}

} // namespace

Expr::Ptr parse_expression(std::string_view src) {
    Lexer lx{src};
    auto e = parse_sum(lx);
    if (!lx.eof()) throw ExprError("trailing input at offset " + std::to_string(lx.pos) + " in \"" +
                                   std::string(src) + "\"");
    return e;
}

Expr::Ptr parse_decay_expression(std::string_view src) {
    Lexer lx{src};
    auto e = parse_decay_sum(lx);
    if (!lx.eof()) throw ExprError("trailing input at offset " + std::to_string(lx.pos) + " in \"" +
                                   std::string(src) + "\"");
    return e;
}

} // namespace plab
