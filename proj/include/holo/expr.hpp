#pragma once

// Arithmetic expressions over chart coordinates x1..xn: the input language
// for metric entries, contact-form coefficients and curve parameterizations.
// Trees are immutable and shareable; every operation here is pure.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "holo/errors.hpp"

namespace holo {

enum class ExprOp : std::uint8_t {
    constant,
    variable,
    neg,
    add,
    sub,
    mul,
    div,
    pow, // exponent is always a constant node
    sin,
    cos,
    tan,
    exp,
    log,
    sqrt,
    abs,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    ExprOp op;
    double value = 0.0; // constant payload
    int var = 0;        // 1-based coordinate index
    ExprPtr a, b;
};

inline bool is_unary_fn(ExprOp op) {
    return op >= ExprOp::sin && op <= ExprOp::abs;
}

inline const char* fn_name(ExprOp op) {
    switch (op) {
    case ExprOp::sin: return "sin";
    case ExprOp::cos: return "cos";
    case ExprOp::tan: return "tan";
    case ExprOp::exp: return "exp";
    case ExprOp::log: return "log";
    case ExprOp::sqrt: return "sqrt";
    case ExprOp::abs: return "abs";
    default: return "?";
    }
}

// ---------------------------------------------------------------------------
// scalar kernels (shared by the recursive evaluator and the compiled tape)

namespace detail {

constexpr double kTanPoleTol = 1e-12;

inline void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw eval_error(std::string("non-finite value in ") + what);
}

inline double eval_unary(ExprOp op, double x) {
    switch (op) {
    case ExprOp::neg: return -x;
    case ExprOp::sin: return std::sin(x);
    case ExprOp::cos: return std::cos(x);
    case ExprOp::tan:
        if (std::abs(std::cos(x)) < kTanPoleTol)
            throw eval_error("tan evaluated at a pole");
        return std::tan(x);
    case ExprOp::exp: {
        double r = std::exp(x);
        check_finite(r, "exp");
        return r;
    }
    case ExprOp::log:
        if (x <= 0.0) throw eval_error("log of non-positive argument");
        return std::log(x);
    case ExprOp::sqrt:
        if (x < 0.0) throw eval_error("sqrt of negative argument");
        return std::sqrt(x);
    case ExprOp::abs: return std::abs(x);
    default: throw eval_error("bad unary op");
    }
}

// Power with a constant real exponent. Integer exponents of small magnitude
// take a multiplicative path so results are reproducible across code paths.
inline double eval_pow(double base, double expo) {
    double n = std::nearbyint(expo);
    if (n == expo && std::abs(expo) <= 1e9) {
        if (base == 0.0 && expo < 0.0) throw eval_error("zero raised to negative power");
        long k = static_cast<long>(n);
        long ak = k < 0 ? -k : k;
        double r;
        if (ak <= 8) {
            r = 1.0;
            for (long i = 0; i < ak; ++i) r *= base;
        } else {
            r = std::pow(base, static_cast<double>(ak));
        }
        if (k < 0) {
            if (r == 0.0) throw eval_error("zero raised to negative power");
            r = 1.0 / r;
        }
        check_finite(r, "pow");
        return r;
    }
    if (base < 0.0) throw eval_error("negative base with non-integer exponent");
    if (base == 0.0 && expo < 0.0) throw eval_error("zero raised to negative power");
    double r = std::pow(base, expo);
    check_finite(r, "pow");
    return r;
}

inline double eval_binary(ExprOp op, double x, double y) {
    switch (op) {
    case ExprOp::add: return x + y;
    case ExprOp::sub: return x - y;
    case ExprOp::mul: return x * y;
    case ExprOp::div:
        if (y == 0.0) throw eval_error("division by zero");
        return x / y;
    case ExprOp::pow: return eval_pow(x, y);
    default: throw eval_error("bad binary op");
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// construction (with constant folding of literal-only subtrees)

inline ExprPtr constant(double v) {
    auto e = std::make_shared<Expr>();
    e->op = ExprOp::constant;
    e->value = v;
    return e;
}

inline ExprPtr variable(int index) {
    if (index < 1) throw config_error("variable index must be >= 1");
    auto e = std::make_shared<Expr>();
    e->op = ExprOp::variable;
    e->var = index;
    return e;
}

inline bool is_const(const ExprPtr& e, double v) {
    return e->op == ExprOp::constant && e->value == v;
}

inline ExprPtr make_unary(ExprOp op, ExprPtr a) {
    if (op == ExprOp::neg) {
        if (a->op == ExprOp::constant) return constant(-a->value);
        if (a->op == ExprOp::neg) return a->a;
    } else if (a->op == ExprOp::constant) {
        try {
            return constant(detail::eval_unary(op, a->value));
        } catch (const eval_error&) {
            // keep the node; evaluation will report the domain violation
        }
    }
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->a = std::move(a);
    return e;
}

inline ExprPtr make_binary(ExprOp op, ExprPtr a, ExprPtr b) {
    if (op == ExprOp::pow) {
        if (b->op != ExprOp::constant)
            throw config_error("power exponent must be a constant");
        if (is_const(b, 0.0)) return constant(1.0);
        if (is_const(b, 1.0)) return a;
        if (a->op == ExprOp::constant) {
            try {
                return constant(detail::eval_pow(a->value, b->value));
            } catch (const eval_error&) {
            }
        }
    } else if (a->op == ExprOp::constant && b->op == ExprOp::constant) {
        try {
            return constant(detail::eval_binary(op, a->value, b->value));
        } catch (const eval_error&) {
        }
    }
    switch (op) {
    case ExprOp::add:
        if (is_const(a, 0.0)) return b;
        if (is_const(b, 0.0)) return a;
        break;
    case ExprOp::sub:
        if (is_const(b, 0.0)) return a;
        if (is_const(a, 0.0)) return make_unary(ExprOp::neg, b);
        break;
    case ExprOp::mul:
        if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
        if (is_const(a, 1.0)) return b;
        if (is_const(b, 1.0)) return a;
        break;
    case ExprOp::div:
        if (is_const(b, 1.0)) return a;
        if (is_const(a, 0.0) && !is_const(b, 0.0)) return constant(0.0);
        break;
    default: break;
    }
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
}

inline ExprPtr neg(ExprPtr a) { return make_unary(ExprOp::neg, std::move(a)); }
inline ExprPtr add(ExprPtr a, ExprPtr b) { return make_binary(ExprOp::add, std::move(a), std::move(b)); }
inline ExprPtr sub(ExprPtr a, ExprPtr b) { return make_binary(ExprOp::sub, std::move(a), std::move(b)); }
inline ExprPtr mul(ExprPtr a, ExprPtr b) { return make_binary(ExprOp::mul, std::move(a), std::move(b)); }
inline ExprPtr div(ExprPtr a, ExprPtr b) { return make_binary(ExprOp::div, std::move(a), std::move(b)); }
inline ExprPtr pow(ExprPtr a, ExprPtr b) { return make_binary(ExprOp::pow, std::move(a), std::move(b)); }
inline ExprPtr pow(ExprPtr a, double c) { return pow(std::move(a), constant(c)); }
inline ExprPtr sin(ExprPtr a) { return make_unary(ExprOp::sin, std::move(a)); }
inline ExprPtr cos(ExprPtr a) { return make_unary(ExprOp::cos, std::move(a)); }
inline ExprPtr tan(ExprPtr a) { return make_unary(ExprOp::tan, std::move(a)); }
inline ExprPtr exp(ExprPtr a) { return make_unary(ExprOp::exp, std::move(a)); }
inline ExprPtr log(ExprPtr a) { return make_unary(ExprOp::log, std::move(a)); }
inline ExprPtr sqrt(ExprPtr a) { return make_unary(ExprOp::sqrt, std::move(a)); }
inline ExprPtr abs(ExprPtr a) { return make_unary(ExprOp::abs, std::move(a)); }

// ---------------------------------------------------------------------------
// structure queries

inline bool struct_equal(const ExprPtr& x, const ExprPtr& y) {
    if (x.get() == y.get()) return true;
    if (x->op != y->op) return false;
    switch (x->op) {
    case ExprOp::constant: return x->value == y->value;
    case ExprOp::variable: return x->var == y->var;
    default:
        if (x->a && !struct_equal(x->a, y->a)) return false;
        if ((x->b == nullptr) != (y->b == nullptr)) return false;
        if (x->b && !struct_equal(x->b, y->b)) return false;
        return true;
    }
}

inline int max_var_index(const ExprPtr& e) {
    switch (e->op) {
    case ExprOp::constant: return 0;
    case ExprOp::variable: return e->var;
    default: {
        int m = e->a ? max_var_index(e->a) : 0;
        if (e->b) m = std::max(m, max_var_index(e->b));
        return m;
    }
    }
}

inline void collect_vars(const ExprPtr& e, std::set<int>& out) {
    switch (e->op) {
    case ExprOp::constant: return;
    case ExprOp::variable: out.insert(e->var); return;
    default:
        if (e->a) collect_vars(e->a, out);
        if (e->b) collect_vars(e->b, out);
    }
}

// ---------------------------------------------------------------------------
// evaluation

using EvalPoint = std::vector<double>;

inline double evaluate(const ExprPtr& e, std::span<const double> p) {
    switch (e->op) {
    case ExprOp::constant: return e->value;
    case ExprOp::variable:
        if (e->var > static_cast<int>(p.size()))
            throw eval_error("variable x" + std::to_string(e->var) +
                             " outside chart of dimension " + std::to_string(p.size()));
        return p[e->var - 1];
    case ExprOp::add:
    case ExprOp::sub:
    case ExprOp::mul:
    case ExprOp::div:
    case ExprOp::pow:
        return detail::eval_binary(e->op, evaluate(e->a, p), evaluate(e->b, p));
    default:
        return detail::eval_unary(e->op, evaluate(e->a, p));
    }
}

inline double evaluate(const ExprPtr& e, std::initializer_list<double> p) {
    return evaluate(e, std::span<const double>(p.begin(), p.size()));
}

// ---------------------------------------------------------------------------
// symbolic differentiation (exact; only constant folding is applied)

inline ExprPtr differentiate(const ExprPtr& e, int k) {
    if (k < 1) throw config_error("derivative index must be >= 1");
    switch (e->op) {
    case ExprOp::constant: return constant(0.0);
    case ExprOp::variable: return constant(e->var == k ? 1.0 : 0.0);
    case ExprOp::neg: return neg(differentiate(e->a, k));
    case ExprOp::add: return add(differentiate(e->a, k), differentiate(e->b, k));
    case ExprOp::sub: return sub(differentiate(e->a, k), differentiate(e->b, k));
    case ExprOp::mul:
        return add(mul(differentiate(e->a, k), e->b), mul(e->a, differentiate(e->b, k)));
    case ExprOp::div:
        return div(sub(mul(differentiate(e->a, k), e->b), mul(e->a, differentiate(e->b, k))),
                   pow(e->b, 2.0));
    case ExprOp::pow: {
        // exponent is a constant c: d(u^c) = c*u^(c-1)*u'
        double c = e->b->value;
        return mul(mul(constant(c), pow(e->a, c - 1.0)), differentiate(e->a, k));
    }
    case ExprOp::sin: return mul(cos(e->a), differentiate(e->a, k));
    case ExprOp::cos: return neg(mul(sin(e->a), differentiate(e->a, k)));
    case ExprOp::tan: return div(differentiate(e->a, k), pow(cos(e->a), 2.0));
    case ExprOp::exp: return mul(exp(e->a), differentiate(e->a, k));
    case ExprOp::log: return div(differentiate(e->a, k), e->a);
    case ExprOp::sqrt: return div(differentiate(e->a, k), mul(constant(2.0), sqrt(e->a)));
    case ExprOp::abs:
        // d|u| = u/|u| * u'; undefined at u = 0 (division error there)
        return div(mul(e->a, differentiate(e->a, k)), abs(e->a));
    }
    throw eval_error("bad node");
}

// Replace variable k by an expression, refolding constants.
inline ExprPtr substitute(const ExprPtr& e, int k, const ExprPtr& repl) {
    switch (e->op) {
    case ExprOp::constant: return e;
    case ExprOp::variable: return e->var == k ? repl : e;
    default: {
        ExprPtr a = e->a ? substitute(e->a, k, repl) : nullptr;
        ExprPtr b = e->b ? substitute(e->b, k, repl) : nullptr;
        if (a.get() == e->a.get() && b.get() == e->b.get()) return e;
        if (b) return make_binary(e->op, std::move(a), std::move(b));
        return make_unary(e->op, std::move(a));
    }
    }
}

// ---------------------------------------------------------------------------
// printer (minimal parentheses; output re-parses to the same tree)

namespace detail {

inline int precedence(ExprOp op) {
    switch (op) {
    case ExprOp::add:
    case ExprOp::sub: return 1;
    case ExprOp::mul:
    case ExprOp::div: return 2;
    case ExprOp::neg: return 3;
    case ExprOp::pow: return 4;
    default: return 5;
    }
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // trim to the shortest string that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[40];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
        if (std::strtod(shorter, nullptr) == v) return shorter;
    }
    return buf;
}

inline void print_rec(const ExprPtr& e, std::string& out) {
    auto wrapped = [&out](const ExprPtr& c, bool need) {
        if (need) out += '(';
        print_rec(c, out);
        if (need) out += ')';
    };
    int p = precedence(e->op);
    switch (e->op) {
    case ExprOp::constant: out += format_double(e->value); break;
    case ExprOp::variable: out += 'x' + std::to_string(e->var); break;
    case ExprOp::neg:
        out += '-';
        wrapped(e->a, precedence(e->a->op) < p);
        break;
    case ExprOp::add:
    case ExprOp::sub:
        wrapped(e->a, precedence(e->a->op) < p);
        out += e->op == ExprOp::add ? '+' : '-';
        wrapped(e->b, precedence(e->b->op) <= p);
        break;
    case ExprOp::mul:
    case ExprOp::div:
        wrapped(e->a, precedence(e->a->op) < p);
        out += e->op == ExprOp::mul ? '*' : '/';
        wrapped(e->b, precedence(e->b->op) <= p);
        break;
    case ExprOp::pow:
        wrapped(e->a, precedence(e->a->op) <= p);
        out += '^';
        // constant exponent: negative values print with parentheses
        wrapped(e->b, e->b->value < 0.0);
        break;
    default:
        out += fn_name(e->op);
        out += '(';
        print_rec(e->a, out);
        out += ')';
    }
}

} // namespace detail

inline std::string print(const ExprPtr& e) {
    std::string out;
    detail::print_rec(e, out);
    return out;
}

// ---------------------------------------------------------------------------
// parser: recursive descent over
//   expr   := term  { ('+'|'-') term }
//   term   := unary { ('*'|'/') unary }
//   unary  := '-' unary | power
//   power  := atom [ '^' pexp ]          (right-associative)
//   pexp   := '-' pexp | power
//   atom   := number | 'pi' | x<digits> | fn '(' expr ')' | '(' expr ')'

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view src) : s_(src) {}

    ExprPtr run() {
        ExprPtr e = parse_expr();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) { throw parse_error(msg, pos_); }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    ExprPtr parse_expr() {
        ExprPtr e = parse_term();
        for (;;) {
            if (eat('+')) e = add(std::move(e), parse_term());
            else if (eat('-')) e = sub(std::move(e), parse_term());
            else return e;
        }
    }

    ExprPtr parse_term() {
        ExprPtr e = parse_unary();
        for (;;) {
            if (eat('*')) e = mul(std::move(e), parse_unary());
            else if (eat('/')) e = div(std::move(e), parse_unary());
            else return e;
        }
    }

    ExprPtr parse_unary() {
        if (eat('-')) return neg(parse_unary());
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_atom();
        if (eat('^')) {
            std::size_t at = pos_;
            ExprPtr expo = parse_power_exponent();
            try {
                return pow(std::move(base), std::move(expo));
            } catch (const config_error& err) {
                throw parse_error(err.what(), at);
            }
        }
        return base;
    }

    ExprPtr parse_power_exponent() {
        if (eat('-')) return neg(parse_power_exponent());
        return parse_power();
    }

    ExprPtr parse_atom() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            ExprPtr e = parse_expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        fail(std::string("unexpected character '") + c + "'");
    }

    ExprPtr parse_number() {
        const char* begin = s_.data() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        if (!std::isfinite(v)) fail("numeric literal out of range");
        pos_ += static_cast<std::size_t>(end - begin);
        return constant(v);
    }

    ExprPtr parse_identifier() {
        std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        std::string_view name = s_.substr(start, pos_ - start);

        if (name == "pi") return constant(std::numbers::pi);

        if (name.size() >= 2 && name[0] == 'x') {
            bool digits = true;
            for (std::size_t i = 1; i < name.size(); ++i)
                if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
            if (digits) {
                int idx = std::atoi(std::string(name.substr(1)).c_str());
                if (idx >= 1) return variable(idx);
                pos_ = start;
                fail("invalid coordinate index in '" + std::string(name) + "'");
            }
        }

        static const std::pair<std::string_view, ExprOp> fns[] = {
            {"sin", ExprOp::sin}, {"cos", ExprOp::cos},   {"tan", ExprOp::tan},
            {"exp", ExprOp::exp}, {"log", ExprOp::log},   {"sqrt", ExprOp::sqrt},
            {"abs", ExprOp::abs},
        };
        for (auto& [fname, op] : fns) {
            if (name == fname) {
                if (!eat('(')) fail("expected '(' after '" + std::string(name) + "'");
                ExprPtr arg = parse_expr();
                if (!eat(')')) fail("expected ')'");
                return make_unary(op, std::move(arg));
            }
        }
        pos_ = start;
        fail("unknown identifier '" + std::string(name) + "'");
    }
};

} // namespace detail

inline ExprPtr parse(std::string_view source) { return detail::Parser(source).run(); }

// ---------------------------------------------------------------------------
// compiled evaluation tape for hot paths (connection fields, curve sampling)

struct TapeInstr {
    ExprOp op;
    int var = 0;      // variable index, or 1 when pow has an integer exponent
    double value = 0; // constant payload / exponent
};

class Tape {
public:
    Tape() = default;

    explicit Tape(const ExprPtr& e) {
        compile(e);
        max_stack_ = std::max(max_stack_, 1);
    }

    int max_stack() const { return max_stack_; }

    double eval(std::span<const double> p, std::vector<double>& stack) const {
        if (static_cast<int>(stack.size()) < max_stack_) stack.resize(max_stack_);
        int sp = 0;
        for (const TapeInstr& in : code_) {
            switch (in.op) {
            case ExprOp::constant: stack[sp++] = in.value; break;
            case ExprOp::variable:
                if (in.var > static_cast<int>(p.size()))
                    throw eval_error("variable x" + std::to_string(in.var) +
                                     " outside chart of dimension " + std::to_string(p.size()));
                stack[sp++] = p[in.var - 1];
                break;
            case ExprOp::add:
            case ExprOp::sub:
            case ExprOp::mul:
            case ExprOp::div:
                --sp;
                stack[sp - 1] = detail::eval_binary(in.op, stack[sp - 1], stack[sp]);
                break;
            case ExprOp::pow:
                stack[sp - 1] = detail::eval_pow(stack[sp - 1], in.value);
                break;
            default:
                stack[sp - 1] = detail::eval_unary(in.op, stack[sp - 1]);
            }
        }
        return stack[0];
    }

    double eval(std::span<const double> p) const {
        std::vector<double> stack(static_cast<std::size_t>(max_stack_));
        return eval(p, stack);
    }

private:
    std::vector<TapeInstr> code_;
    int max_stack_ = 0;

    void compile(const ExprPtr& e, int depth = 1) {
        max_stack_ = std::max(max_stack_, depth);
        switch (e->op) {
        case ExprOp::constant: code_.push_back({ExprOp::constant, 0, e->value}); break;
        case ExprOp::variable: code_.push_back({ExprOp::variable, e->var, 0.0}); break;
        case ExprOp::pow:
            compile(e->a, depth);
            code_.push_back({ExprOp::pow, 0, e->b->value});
            break;
        case ExprOp::add:
        case ExprOp::sub:
        case ExprOp::mul:
        case ExprOp::div:
            compile(e->a, depth);
            compile(e->b, depth + 1);
            code_.push_back({e->op, 0, 0.0});
            break;
        default:
            compile(e->a, depth);
            code_.push_back({e->op, 0, 0.0});
        }
    }
};

// ---------------------------------------------------------------------------
// self-test helper: symbolic gradient vs central finite differences

inline double gradient_check(const ExprPtr& e, const EvalPoint& p, double h) {
    if (h <= 0) throw config_error("finite-difference step must be positive");
    double worst = 0.0;
    EvalPoint q = p;
    for (int k = 1; k <= static_cast<int>(p.size()); ++k) {
        double sym = evaluate(differentiate(e, k), p);
        q[k - 1] = p[k - 1] + h;
        double fp = evaluate(e, q);
        q[k - 1] = p[k - 1] - h;
        double fm = evaluate(e, q);
        q[k - 1] = p[k - 1];
        worst = std::max(worst, std::abs(sym - (fp - fm) / (2.0 * h)));
    }
    return worst;
}

} // namespace holo
