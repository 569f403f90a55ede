#ifndef BRANCHODE_EXPR_HPP
#define BRANCHODE_EXPR_HPP

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace branchode {

// Thrown when an evaluation produces a non-finite value (division by zero,
// log of a non-positive number, ...). Callers decide whether to abort the
// enclosing Monte Carlo sample or the whole run.
struct SingularEvaluation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ExprKind {
    Constant,
    Variable,
    // unary
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Atan,
    Tanh,
    // binary
    Add,
    Sub,
    Mul,
    Div,
    // integer power; exponent stored in Expr::exponent, single child
    PowInt,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable expression node. Shared subtrees are welcome (differentiation
// produces heavily shared DAGs); nothing is mutated after construction.
struct Expr {
    ExprKind kind;
    double value = 0.0; // Constant
    int axis = 0;       // Variable
    int exponent = 0;   // PowInt
    ExprPtr a;           // first child
    ExprPtr b;           // second child (binary ops only)
};

// Factory functions. Simplification is deliberately limited to constant
// folding, x*0 -> 0, x*1 -> x, x+0 -> x, x-0 -> x, x^0 -> 1, x^1 -> x;
// anything smarter risks changing evaluation domains.
ExprPtr constant(double v);
ExprPtr variable(int axis);
ExprPtr neg(ExprPtr a);
ExprPtr sin_(ExprPtr a);
ExprPtr cos_(ExprPtr a);
ExprPtr exp_(ExprPtr a);
ExprPtr log_(ExprPtr a);
ExprPtr sqrt_(ExprPtr a);
ExprPtr atan_(ExprPtr a);
ExprPtr tanh_(ExprPtr a);
ExprPtr add(ExprPtr a, ExprPtr b);
ExprPtr sub(ExprPtr a, ExprPtr b);
ExprPtr mul(ExprPtr a, ExprPtr b);
ExprPtr div(ExprPtr a, ExprPtr b);
ExprPtr powi(ExprPtr a, int k);

// Exact symbolic partial derivative with respect to the given axis.
// Shared subtrees are differentiated once per call (internal memo on node
// identity), so the result size is linear in the DAG size.
ExprPtr differentiate(const ExprPtr& e, int axis);

// Evaluates at a point (length >= 1 + max axis used). Throws
// SingularEvaluation on any non-finite intermediate or final value.
double evaluate(const ExprPtr& e, const std::vector<double>& point);

// Largest variable axis appearing in e, or -1 if none.
int max_axis(const ExprPtr& e);

// Infix rendering, mainly for reports and debugging.
std::string to_string(const ExprPtr& e);

// Parses the small infix grammar used by CLI configs:
//   variables y0, y1, ...; t is an alias for y0 and y for y1
//   (the convention for scalar time-dependent right-hand sides);
//   functions sin cos exp log sqrt atan tanh; operators + - * / and
//   ^ with an integer literal exponent; parentheses; unary minus.
ExprPtr parse_expression(const std::string& text);

// A first-order system y' = f(y) with initial state y0 at time t0.
// Time-dependent problems enter through autonomize() in codes.hpp, which
// makes axis 0 the time variable.
struct RhsSystem {
    int dim = 0;
    std::vector<ExprPtr> components;
    std::vector<double> y0;
    double t0 = 0.0;
};

// Validates sizes and variable ranges; throws std::invalid_argument.
RhsSystem make_system(std::vector<ExprPtr> components, std::vector<double> y0, double t0 = 0.0);

} // namespace branchode

#endif // BRANCHODE_EXPR_HPP
