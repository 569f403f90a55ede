#include "branchode/codes.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace branchode {

std::string to_string(const Code& c) {
    std::ostringstream out;
    if (c.identity) {
        out << "Id" << c.component;
    } else {
        out << 'f' << c.component;
        if (c.total_order() > 0) {
            out << '[';
            for (std::size_t i = 0; i < c.multi.size(); ++i) {
                if (i) out << ',';
                out << c.multi[i];
            }
            out << ']';
        }
    }
    return out.str();
}

MechanismTable MechanismTable::autonomous(int dim) {
    if (dim < 1) throw std::invalid_argument("mechanism dimension must be >= 1");
    MechanismTable t;
    t.mode_ = MechanismMode::Autonomous;
    t.dim_ = dim;
    return t;
}

MechanismTable MechanismTable::single_tree() {
    MechanismTable t;
    t.mode_ = MechanismMode::SingleTree;
    t.dim_ = 2;
    return t;
}

MechanismTable MechanismTable::custom(int dim, std::map<Code, std::vector<Branch>> table) {
    if (dim < 1) throw std::invalid_argument("mechanism dimension must be >= 1");
    for (const auto& [code, branches] : table) {
        if (branches.empty())
            throw std::invalid_argument("custom mechanism: empty branch list for " + to_string(code));
        for (const auto& b : branches)
            if (b.codes.empty() || b.codes.size() > 2)
                throw std::invalid_argument("custom mechanism: branch arity must be 1 or 2");
    }
    MechanismTable t;
    t.mode_ = MechanismMode::Custom;
    t.dim_ = dim;
    t.custom_ = std::move(table);
    return t;
}

namespace {

void check_code(const MechanismTable& t, const Code& c) {
    if (c.component < 0 || c.component >= t.dim())
        throw std::invalid_argument("code component out of range: " + to_string(c));
    if (!c.identity && static_cast<int>(c.multi.size()) != t.dim())
        throw std::invalid_argument("code multi-index length must equal the dimension");
    // the single-tree rule only ever touches the state component; the time
    // axis is advanced exactly, never sampled
    if (t.mode() == MechanismMode::SingleTree && c.component != 1)
        throw MechanismUndefined("single-tree mechanism undefined for code " + to_string(c));
}

} // namespace

int MechanismTable::branch_count(const Code& c) const {
    switch (mode_) {
        case MechanismMode::Autonomous:
            check_code(*this, c);
            return c.identity ? 1 : dim_;
        case MechanismMode::SingleTree:
            check_code(*this, c);
            return c.identity ? 1 : 2;
        case MechanismMode::Custom: {
            auto it = custom_.find(c);
            if (it == custom_.end())
                throw MechanismUndefined("mechanism undefined for code " + to_string(c));
            return static_cast<int>(it->second.size());
        }
    }
    return 0;
}

Branch MechanismTable::branch_at(const Code& c, int index) const {
    switch (mode_) {
        case MechanismMode::Autonomous:
            check_code(*this, c);
            if (c.identity) return Branch{{Code::rhs(c.component, dim_)}};
            // branch j: split into the plain factor f_j and one more
            // derivative of the current code along axis j
            return Branch{{Code::rhs(index, dim_), c.bumped(index)}};
        case MechanismMode::SingleTree:
            check_code(*this, c);
            if (c.identity) return Branch{{Code::rhs(1, 2)}};
            if (index == 0) return Branch{{c.bumped(0)}};
            return Branch{{Code::rhs(1, 2), c.bumped(1)}};
        case MechanismMode::Custom: {
            auto it = custom_.find(c);
            if (it == custom_.end())
                throw MechanismUndefined("mechanism undefined for code " + to_string(c));
            return it->second.at(static_cast<std::size_t>(index));
        }
    }
    throw std::logic_error("unreachable");
}

std::vector<std::pair<Branch, double>> MechanismTable::branches(const Code& c) const {
    const int nb = branch_count(c);
    std::vector<std::pair<Branch, double>> out;
    out.reserve(static_cast<std::size_t>(nb));
    for (int k = 0; k < nb; ++k)
        out.emplace_back(branch_at(c, k), 1.0 / nb);
    return out;
}

ExprPtr CodeValueCache::expr(const Code& c, const RhsSystem& sys) {
    if (c.identity) throw std::logic_error("identity codes have no expression");
    if (auto it = exprs_.find(c); it != exprs_.end()) return it->second;
    if (c.total_order() > kMaxDerivativeOrder)
        throw std::runtime_error("derivative order cap exceeded for code " + to_string(c));
    ExprPtr e;
    if (c.total_order() == 0) {
        e = sys.components.at(static_cast<std::size_t>(c.component));
    } else {
        // Build from the parent along the highest nonzero axis. The fixed
        // build order makes every cache replica construct bit-identical
        // expressions regardless of the order codes are first seen in.
        int axis = static_cast<int>(c.multi.size()) - 1;
        while (c.multi[static_cast<std::size_t>(axis)] == 0) --axis;
        Code parent = c;
        parent.multi[static_cast<std::size_t>(axis)] -= 1;
        e = differentiate(expr(parent, sys), axis);
    }
    exprs_.emplace(c, e);
    return e;
}

// Above this order the Taylor route takes over where it applies; below it
// the symbolic derivative stays small enough to build and evaluate directly.
constexpr int kSymbolicOrderLimit = 6;

// Truncated Taylor polynomial around the initial point, in one or two
// variables. Coefficients are stored in a dense (degree+1) x (degree+1)
// square (second index fixed at 0 for one variable); entries of total degree
// beyond `degree` stay zero. Every retained coefficient is independent of
// the truncation degree, so tables grown to different degrees agree on
// their overlap and cache replicas stay bit-identical.
struct CodeValueCache::SeriesTable {
    int dim = 1;
    int degree = 0;
    std::vector<double> c;

    SeriesTable(int dim_, int degree_)
        : dim(dim_), degree(degree_),
          c(static_cast<std::size_t>(degree_ + 1) * static_cast<std::size_t>(degree_ + 1), 0.0) {}

    double& at(int i, int j) {
        return c[static_cast<std::size_t>(i) * static_cast<std::size_t>(degree + 1)
                 + static_cast<std::size_t>(j)];
    }
    double at(int i, int j) const {
        return c[static_cast<std::size_t>(i) * static_cast<std::size_t>(degree + 1)
                 + static_cast<std::size_t>(j)];
    }
    // largest second index for a given first index
    int jmax(int i) const { return dim == 2 ? degree - i : 0; }
};

namespace {

using Series = CodeValueCache::SeriesTable;

bool series_supported(const Expr* e) {
    switch (e->kind) {
        case ExprKind::Constant:
        case ExprKind::Variable:
            return true;
        case ExprKind::Neg:
        case ExprKind::PowInt:
            return series_supported(e->a.get());
        case ExprKind::Add:
        case ExprKind::Sub:
        case ExprKind::Mul:
        case ExprKind::Div:
            return series_supported(e->a.get()) && series_supported(e->b.get());
        default:
            return false;
    }
}

Series series_mul(const Series& a, const Series& b) {
    Series r(a.dim, a.degree);
    for (int i = 0; i <= r.degree; ++i)
        for (int j = 0; j <= r.jmax(i); ++j) {
            double s = 0.0;
            for (int p = 0; p <= i; ++p)
                for (int q = 0; q <= j; ++q)
                    s += a.at(p, q) * b.at(i - p, j - q);
            r.at(i, j) = s;
        }
    return r;
}

Series series_div(const Series& a, const Series& b) {
    if (b.at(0, 0) == 0.0)
        throw SingularEvaluation("series division by zero at the initial point");
    Series r(a.dim, a.degree);
    // by increasing total degree; the subtracted terms only involve
    // quotient coefficients of strictly smaller total degree
    for (int k = 0; k <= r.degree; ++k)
        for (int i = 0; i <= k; ++i) {
            int j = k - i;
            if (j > r.jmax(i)) continue;
            double s = a.at(i, j);
            for (int p = 0; p <= i; ++p)
                for (int q = 0; q <= j; ++q) {
                    if (p == i && q == j) continue;
                    s -= r.at(p, q) * b.at(i - p, j - q);
                }
            r.at(i, j) = s / b.at(0, 0);
        }
    return r;
}

Series series_pow(const Series& a, int k) {
    Series one(a.dim, a.degree);
    one.at(0, 0) = 1.0;
    if (k < 0) return series_div(one, series_pow(a, -k));
    Series r = one;
    Series base = a;
    for (int e = k; e > 0; e >>= 1) {
        if (e & 1) r = series_mul(r, base);
        if (e > 1) base = series_mul(base, base);
    }
    return r;
}

Series series_eval(const Expr* e, const RhsSystem& sys, int degree,
                   std::map<const Expr*, Series>& memo) {
    if (auto it = memo.find(e); it != memo.end()) return it->second;
    Series r(sys.dim, degree);
    switch (e->kind) {
        case ExprKind::Constant:
            r.at(0, 0) = e->value;
            break;
        case ExprKind::Variable:
            r.at(0, 0) = sys.y0.at(static_cast<std::size_t>(e->axis));
            if (degree >= 1) {
                if (e->axis == 0) r.at(1, 0) = 1.0;
                else r.at(0, 1) = 1.0;
            }
            break;
        case ExprKind::Neg: {
            r = series_eval(e->a.get(), sys, degree, memo);
            for (double& v : r.c) v = -v;
            break;
        }
        case ExprKind::Add:
        case ExprKind::Sub: {
            r = series_eval(e->a.get(), sys, degree, memo);
            Series rb = series_eval(e->b.get(), sys, degree, memo);
            for (std::size_t n = 0; n < r.c.size(); ++n)
                r.c[n] = e->kind == ExprKind::Add ? r.c[n] + rb.c[n] : r.c[n] - rb.c[n];
            break;
        }
        case ExprKind::Mul:
            r = series_mul(series_eval(e->a.get(), sys, degree, memo),
                           series_eval(e->b.get(), sys, degree, memo));
            break;
        case ExprKind::Div:
            r = series_div(series_eval(e->a.get(), sys, degree, memo),
                           series_eval(e->b.get(), sys, degree, memo));
            break;
        case ExprKind::PowInt:
            r = series_pow(series_eval(e->a.get(), sys, degree, memo), e->exponent);
            break;
        default:
            throw std::logic_error("series_eval: unsupported node kind");
    }
    memo.emplace(e, r);
    return r;
}

} // namespace

const CodeValueCache::SeriesTable& CodeValueCache::series_for(int component, int degree,
                                                              const RhsSystem& sys) {
    auto it = series_.find(component);
    if (it != series_.end() && it->second->degree >= degree) return *it->second;
    int target = degree;
    if (it != series_.end())
        target = std::min(kMaxDerivativeOrder, std::max(degree, 2 * it->second->degree));
    std::map<const Expr*, Series> memo;
    auto table = std::make_shared<Series>(series_eval(
        sys.components.at(static_cast<std::size_t>(component)).get(), sys, target, memo));
    auto& slot = series_[component];
    slot = std::move(table);
    return *slot;
}

double CodeValueCache::value(const Code& c, const RhsSystem& sys) {
    if (auto it = values_.find(c); it != values_.end()) return it->second;
    double v;
    if (c.identity) {
        v = sys.y0.at(static_cast<std::size_t>(c.component));
    } else if (c.total_order() > kMaxDerivativeOrder) {
        throw std::runtime_error("derivative order cap exceeded for code " + to_string(c));
    } else if (c.total_order() <= kSymbolicOrderLimit ||
               sys.dim > 2 ||
               !series_supported(sys.components.at(static_cast<std::size_t>(c.component)).get())) {
        v = evaluate(expr(c, sys), sys.y0);
    } else {
        const SeriesTable& s = series_for(c.component, c.total_order(), sys);
        const int i = c.multi[0];
        const int j = sys.dim == 2 ? c.multi[1] : 0;
        double fact = 1.0;
        for (int n = 2; n <= i; ++n) fact *= n;
        for (int n = 2; n <= j; ++n) fact *= n;
        v = s.at(i, j) * fact;
        if (!std::isfinite(v))
            throw SingularEvaluation("non-finite derivative value for code " + to_string(c));
    }
    values_.emplace(c, v);
    return v;
}

double code_value(const Code& c, const RhsSystem& sys, CodeValueCache& cache) {
    if (c.component < 0 || c.component >= sys.dim)
        throw std::invalid_argument("code component out of range: " + to_string(c));
    return cache.value(c, sys);
}

RhsSystem autonomize(const ExprPtr& f, double y_init, double t_lo) {
    if (max_axis(f) > 1)
        throw std::invalid_argument("time-dependent rhs may only use axes 0 (t) and 1 (y)");
    return make_system({constant(1.0), f}, {t_lo, y_init}, t_lo);
}

RhsSystem reduce_higher_order(const ExprPtr& f, int order,
                              const std::vector<double>& initial_derivatives,
                              double t_lo) {
    if (order < 1) throw std::invalid_argument("order must be >= 1");
    if (static_cast<int>(initial_derivatives.size()) != order)
        throw std::invalid_argument("need one initial value per derivative order 0..n-1");
    if (max_axis(f) > order)
        throw std::invalid_argument("rhs may only use axes 0..n");
    std::vector<ExprPtr> components;
    components.push_back(constant(1.0));             // axis 0 is time
    for (int k = 1; k < order; ++k)
        components.push_back(variable(k + 1));       // y_k' = y_{k+1}
    components.push_back(f);                         // y_n' = f
    std::vector<double> y0;
    y0.push_back(t_lo);
    y0.insert(y0.end(), initial_derivatives.begin(), initial_derivatives.end());
    return make_system(std::move(components), std::move(y0), t_lo);
}

double initial_bound_K(const RhsSystem& sys, const MechanismTable& table, int probe_depth) {
    if (probe_depth < 0) throw std::invalid_argument("probe_depth must be >= 0");
    CodeValueCache cache;
    std::vector<Code> frontier;
    if (table.mode() == MechanismMode::SingleTree) {
        frontier.push_back(Code::make_identity(1));
    } else {
        for (int i = 0; i < table.dim(); ++i)
            frontier.push_back(Code::make_identity(i));
    }
    std::set<Code> seen(frontier.begin(), frontier.end());
    double best = 0.0;
    auto visit = [&](const Code& c) {
        best = std::max(best, std::abs(code_value(c, sys, cache)));
    };
    for (const Code& c : frontier) visit(c);
    for (int depth = 0; depth < probe_depth && !frontier.empty(); ++depth) {
        std::vector<Code> next;
        for (const Code& c : frontier) {
            int nb;
            try {
                nb = table.branch_count(c);
            } catch (const MechanismUndefined&) {
                continue; // custom tables may stop expanding here
            }
            for (int k = 0; k < nb; ++k)
                for (const Code& child : table.branch_at(c, k).codes)
                    if (seen.insert(child).second) {
                        visit(child);
                        next.push_back(child);
                    }
        }
        frontier = std::move(next);
    }
    return best;
}

} // namespace branchode
