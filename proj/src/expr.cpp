#include "branchode/expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace branchode {

namespace {

ExprPtr node(ExprKind kind, ExprPtr a = nullptr, ExprPtr b = nullptr) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
}

bool is_const(const ExprPtr& e, double v) {
    return e->kind == ExprKind::Constant && e->value == v;
}

double apply_unary(ExprKind kind, double x) {
    switch (kind) {
        case ExprKind::Neg: return -x;
        case ExprKind::Sin: return std::sin(x);
        case ExprKind::Cos: return std::cos(x);
        case ExprKind::Exp: return std::exp(x);
        case ExprKind::Log: return std::log(x);
        case ExprKind::Sqrt: return std::sqrt(x);
        case ExprKind::Atan: return std::atan(x);
        case ExprKind::Tanh: return std::tanh(x);
        default: throw std::logic_error("apply_unary: not a unary kind");
    }
}

double pow_int(double x, int k) {
    if (k < 0) return 1.0 / pow_int(x, -k);
    double result = 1.0;
    double base = x;
    for (int n = k; n > 0; n >>= 1) {
        if (n & 1) result *= base;
        base *= base;
    }
    return result;
}

ExprPtr make_unary(ExprKind kind, ExprPtr a) {
    if (a->kind == ExprKind::Constant) return constant(apply_unary(kind, a->value));
    return node(kind, std::move(a));
}

} // namespace

ExprPtr constant(double v) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Constant;
    e->value = v;
    return e;
}

ExprPtr variable(int axis) {
    if (axis < 0) throw std::invalid_argument("variable axis must be >= 0");
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Variable;
    e->axis = axis;
    return e;
}

ExprPtr neg(ExprPtr a) { return make_unary(ExprKind::Neg, std::move(a)); }
ExprPtr sin_(ExprPtr a) { return make_unary(ExprKind::Sin, std::move(a)); }
ExprPtr cos_(ExprPtr a) { return make_unary(ExprKind::Cos, std::move(a)); }
ExprPtr exp_(ExprPtr a) { return make_unary(ExprKind::Exp, std::move(a)); }
ExprPtr log_(ExprPtr a) { return make_unary(ExprKind::Log, std::move(a)); }
ExprPtr sqrt_(ExprPtr a) { return make_unary(ExprKind::Sqrt, std::move(a)); }
ExprPtr atan_(ExprPtr a) { return make_unary(ExprKind::Atan, std::move(a)); }
ExprPtr tanh_(ExprPtr a) { return make_unary(ExprKind::Tanh, std::move(a)); }

ExprPtr add(ExprPtr a, ExprPtr b) {
    if (a->kind == ExprKind::Constant && b->kind == ExprKind::Constant)
        return constant(a->value + b->value);
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    return node(ExprKind::Add, std::move(a), std::move(b));
}

ExprPtr sub(ExprPtr a, ExprPtr b) {
    if (a->kind == ExprKind::Constant && b->kind == ExprKind::Constant)
        return constant(a->value - b->value);
    if (is_const(b, 0.0)) return a;
    return node(ExprKind::Sub, std::move(a), std::move(b));
}

ExprPtr mul(ExprPtr a, ExprPtr b) {
    if (a->kind == ExprKind::Constant && b->kind == ExprKind::Constant)
        return constant(a->value * b->value);
    if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    return node(ExprKind::Mul, std::move(a), std::move(b));
}

ExprPtr div(ExprPtr a, ExprPtr b) {
    // No constant folding of a/b with b == 0: the error must surface at
    // evaluation time, where the caller can classify it.
    if (a->kind == ExprKind::Constant && b->kind == ExprKind::Constant && b->value != 0.0)
        return constant(a->value / b->value);
    if (is_const(b, 1.0)) return a;
    if (is_const(a, 0.0) && !is_const(b, 0.0)) return constant(0.0);
    return node(ExprKind::Div, std::move(a), std::move(b));
}

ExprPtr powi(ExprPtr a, int k) {
    if (k == 0) return constant(1.0);
    if (k == 1) return a;
    if (a->kind == ExprKind::Constant) return constant(pow_int(a->value, k));
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::PowInt;
    e->exponent = k;
    e->a = std::move(a);
    return e;
}

namespace {

ExprPtr diff_rec(const ExprPtr& e, int axis,
                 std::unordered_map<const Expr*, ExprPtr>& memo) {
    if (auto it = memo.find(e.get()); it != memo.end()) return it->second;
    ExprPtr result;
    switch (e->kind) {
        case ExprKind::Constant:
            result = constant(0.0);
            break;
        case ExprKind::Variable:
            result = constant(e->axis == axis ? 1.0 : 0.0);
            break;
        case ExprKind::Neg:
            result = neg(diff_rec(e->a, axis, memo));
            break;
        case ExprKind::Sin:
            result = mul(cos_(e->a), diff_rec(e->a, axis, memo));
            break;
        case ExprKind::Cos:
            result = mul(neg(sin_(e->a)), diff_rec(e->a, axis, memo));
            break;
        case ExprKind::Exp:
            result = mul(exp_(e->a), diff_rec(e->a, axis, memo));
            break;
        case ExprKind::Log:
            result = div(diff_rec(e->a, axis, memo), e->a);
            break;
        case ExprKind::Sqrt:
            result = div(diff_rec(e->a, axis, memo), mul(constant(2.0), sqrt_(e->a)));
            break;
        case ExprKind::Atan:
            result = div(diff_rec(e->a, axis, memo),
                         add(constant(1.0), powi(e->a, 2)));
            break;
        case ExprKind::Tanh:
            result = mul(sub(constant(1.0), powi(tanh_(e->a), 2)),
                         diff_rec(e->a, axis, memo));
            break;
        case ExprKind::Add:
            result = add(diff_rec(e->a, axis, memo), diff_rec(e->b, axis, memo));
            break;
        case ExprKind::Sub:
            result = sub(diff_rec(e->a, axis, memo), diff_rec(e->b, axis, memo));
            break;
        case ExprKind::Mul:
            result = add(mul(diff_rec(e->a, axis, memo), e->b),
                         mul(e->a, diff_rec(e->b, axis, memo)));
            break;
        case ExprKind::Div:
            // (a/b)' = (a'b - ab') / b^2
            result = div(sub(mul(diff_rec(e->a, axis, memo), e->b),
                             mul(e->a, diff_rec(e->b, axis, memo))),
                         powi(e->b, 2));
            break;
        case ExprKind::PowInt:
            result = mul(mul(constant(static_cast<double>(e->exponent)),
                             powi(e->a, e->exponent - 1)),
                         diff_rec(e->a, axis, memo));
            break;
    }
    memo.emplace(e.get(), result);
    return result;
}

} // namespace

ExprPtr differentiate(const ExprPtr& e, int axis) {
    if (axis < 0) throw std::invalid_argument("differentiate: axis must be >= 0");
    std::unordered_map<const Expr*, ExprPtr> memo;
    return diff_rec(e, axis, memo);
}

namespace {

double eval_rec(const Expr* e, const std::vector<double>& point) {
    switch (e->kind) {
        case ExprKind::Constant: return e->value;
        case ExprKind::Variable:
            if (e->axis >= static_cast<int>(point.size()))
                throw std::invalid_argument("evaluate: point shorter than variable axis");
            return point[static_cast<std::size_t>(e->axis)];
        case ExprKind::Add: return eval_rec(e->a.get(), point) + eval_rec(e->b.get(), point);
        case ExprKind::Sub: return eval_rec(e->a.get(), point) - eval_rec(e->b.get(), point);
        case ExprKind::Mul: return eval_rec(e->a.get(), point) * eval_rec(e->b.get(), point);
        case ExprKind::Div: return eval_rec(e->a.get(), point) / eval_rec(e->b.get(), point);
        case ExprKind::PowInt: return pow_int(eval_rec(e->a.get(), point), e->exponent);
        default: return apply_unary(e->kind, eval_rec(e->a.get(), point));
    }
}

} // namespace

double evaluate(const ExprPtr& e, const std::vector<double>& point) {
    const double v = eval_rec(e.get(), point);
    if (!std::isfinite(v)) throw SingularEvaluation("singular evaluation");
    return v;
}

int max_axis(const ExprPtr& e) {
    switch (e->kind) {
        case ExprKind::Constant: return -1;
        case ExprKind::Variable: return e->axis;
        default: {
            int m = e->a ? max_axis(e->a) : -1;
            if (e->b) m = std::max(m, max_axis(e->b));
            return m;
        }
    }
}

namespace {

const char* unary_name(ExprKind kind) {
    switch (kind) {
        case ExprKind::Sin: return "sin";
        case ExprKind::Cos: return "cos";
        case ExprKind::Exp: return "exp";
        case ExprKind::Log: return "log";
        case ExprKind::Sqrt: return "sqrt";
        case ExprKind::Atan: return "atan";
        case ExprKind::Tanh: return "tanh";
        default: return "?";
    }
}

void print_rec(std::ostringstream& out, const Expr* e) {
    switch (e->kind) {
        case ExprKind::Constant: out << e->value; break;
        case ExprKind::Variable: out << 'y' << e->axis; break;
        case ExprKind::Neg:
            out << "(-";
            print_rec(out, e->a.get());
            out << ')';
            break;
        case ExprKind::Add:
        case ExprKind::Sub:
        case ExprKind::Mul:
        case ExprKind::Div: {
            const char op = e->kind == ExprKind::Add ? '+'
                          : e->kind == ExprKind::Sub ? '-'
                          : e->kind == ExprKind::Mul ? '*' : '/';
            out << '(';
            print_rec(out, e->a.get());
            out << op;
            print_rec(out, e->b.get());
            out << ')';
            break;
        }
        case ExprKind::PowInt:
            out << '(';
            print_rec(out, e->a.get());
            out << '^' << e->exponent << ')';
            break;
        default:
            out << unary_name(e->kind) << '(';
            print_rec(out, e->a.get());
            out << ')';
            break;
    }
}

} // namespace

std::string to_string(const ExprPtr& e) {
    std::ostringstream out;
    print_rec(out, e.get());
    return out.str();
}

namespace {

// Recursive-descent parser for the config grammar.
class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    ExprPtr parse() {
        ExprPtr e = parse_sum();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    ExprPtr parse_sum() {
        ExprPtr e = parse_term();
        for (;;) {
            skip_ws();
            if (consume('+')) e = add(e, parse_term());
            else if (consume('-')) e = sub(e, parse_term());
            else return e;
        }
    }

    ExprPtr parse_term() {
        ExprPtr e = parse_factor();
        for (;;) {
            skip_ws();
            if (consume('*')) e = mul(e, parse_factor());
            else if (consume('/')) e = div(e, parse_factor());
            else return e;
        }
    }

    ExprPtr parse_factor() {
        skip_ws();
        if (consume('-')) return neg(parse_factor());
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_primary();
        skip_ws();
        if (!consume('^')) return base;
        skip_ws();
        bool negative = consume('-');
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
            fail("integer exponent expected after '^'");
        int k = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
            k = k * 10 + (text_[pos_++] - '0');
        return powi(base, negative ? -k : k);
    }

    ExprPtr parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
        if (consume('(')) {
            ExprPtr e = parse_sum();
            skip_ws();
            if (!consume(')')) fail("')' expected");
            return e;
        }
        fail("number, name, or '(' expected");
        return nullptr;
    }

    ExprPtr parse_number() {
        const char* begin = text_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - begin);
        return constant(v);
    }

    ExprPtr parse_identifier() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string name = text_.substr(start, pos_ - start);
        if (name == "t") return variable(0);
        if (name == "y") return variable(1);
        if (name.size() > 1 && name[0] == 'y') {
            bool digits = true;
            for (std::size_t i = 1; i < name.size(); ++i)
                digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
            if (digits) return variable(std::stoi(name.substr(1)));
        }
        skip_ws();
        if (!consume('(')) fail("'(' expected after function name '" + name + "'");
        ExprPtr arg = parse_sum();
        skip_ws();
        if (!consume(')')) fail("')' expected");
        if (name == "sin") return sin_(arg);
        if (name == "cos") return cos_(arg);
        if (name == "exp") return exp_(arg);
        if (name == "log") return log_(arg);
        if (name == "sqrt") return sqrt_(arg);
        if (name == "atan") return atan_(arg);
        if (name == "tanh") return tanh_(arg);
        fail("unknown function '" + name + "'");
        return nullptr;
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool consume(char c) {
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("parse error at position " + std::to_string(pos_) +
                                    ": " + what);
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

} // namespace

ExprPtr parse_expression(const std::string& text) { return Parser(text).parse(); }

RhsSystem make_system(std::vector<ExprPtr> components, std::vector<double> y0, double t0) {
    RhsSystem sys;
    sys.dim = static_cast<int>(components.size());
    if (sys.dim == 0) throw std::invalid_argument("system needs at least one component");
    if (y0.size() != components.size())
        throw std::invalid_argument("y0 length must equal the number of components");
    for (const auto& c : components)
        if (max_axis(c) >= sys.dim)
            throw std::invalid_argument("component references a variable outside the system");
    sys.components = std::move(components);
    sys.y0 = std::move(y0);
    sys.t0 = t0;
    return sys;
}

} // namespace branchode
