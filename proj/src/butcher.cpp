#include "branchode/butcher.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace branchode {

ButcherTree ButcherTree::with_children(std::vector<ButcherTree> children) {
    std::sort(children.begin(), children.end(),
              [](const ButcherTree& a, const ButcherTree& b) { return a.encode() < b.encode(); });
    ButcherTree t;
    t.children = std::move(children);
    return t;
}

int ButcherTree::order() const {
    int n = 1;
    for (const ButcherTree& c : children) n += c.order();
    return n;
}

std::string ButcherTree::encode() const {
    std::string s = "[";
    for (const ButcherTree& c : children) s += c.encode();
    s += "]";
    return s;
}

std::string to_string(const ButcherTree& b) { return b.encode(); }

std::vector<std::vector<ButcherTree>> enumerate_butcher_trees(int max_order) {
    if (max_order < 1 || max_order > 8)
        throw std::invalid_argument("enumerate_butcher_trees: max_order must lie in [1, 8]");
    std::vector<std::vector<ButcherTree>> by_order(static_cast<std::size_t>(max_order) + 1);
    by_order[1].push_back(ButcherTree::leaf());

    for (int n = 2; n <= max_order; ++n) {
        // pool of all smaller trees in a fixed linear order; a child multiset
        // is generated exactly once as a non-increasing index sequence
        std::vector<const ButcherTree*> pool;
        std::vector<int> pool_order;
        for (int k = 1; k < n; ++k)
            for (const ButcherTree& t : by_order[static_cast<std::size_t>(k)]) {
                pool.push_back(&t);
                pool_order.push_back(k);
            }

        std::vector<ButcherTree>& out = by_order[static_cast<std::size_t>(n)];
        std::vector<ButcherTree> current;
        std::function<void(int, std::size_t)> pick = [&](int budget, std::size_t bound) {
            if (budget == 0) {
                out.push_back(ButcherTree::with_children(current));
                return;
            }
            for (std::size_t i = 0; i < bound; ++i) {
                if (pool_order[i] > budget) continue;
                current.push_back(*pool[i]);
                pick(budget - pool_order[i], i + 1);
                current.pop_back();
            }
        };
        pick(n - 1, pool.size());
        std::sort(out.begin(), out.end(), [](const ButcherTree& a, const ButcherTree& b) {
            return a.encode() < b.encode();
        });
    }
    return by_order;
}

TreeCoefficients coefficients(const ButcherTree& b) {
    long long sigma = 1;
    long long gamma_children = 1;
    // canonical order puts equal subtrees next to each other
    std::size_t i = 0;
    while (i < b.children.size()) {
        std::size_t j = i;
        while (j < b.children.size() && b.children[j] == b.children[i]) ++j;
        const long long mult = static_cast<long long>(j - i);
        const TreeCoefficients child = coefficients(b.children[i]);
        for (long long k = 1; k <= mult; ++k) sigma *= k * child.sigma;
        for (long long k = 0; k < mult; ++k) gamma_children *= child.gamma;
        i = j;
    }
    TreeCoefficients out;
    out.sigma = sigma;
    out.gamma = static_cast<long long>(b.order()) * gamma_children;
    out.nu = out.sigma * out.gamma;
    return out;
}

namespace {

std::vector<double> ed_rec(const ButcherTree& b, const RhsSystem& sys, CodeValueCache& cache) {
    const int d = sys.dim;
    const std::size_t m = b.children.size();
    std::vector<std::vector<double>> kid(m);
    for (std::size_t k = 0; k < m; ++k) kid[k] = ed_rec(b.children[k], sys, cache);

    std::vector<double> out(static_cast<std::size_t>(d), 0.0);
    if (d == 1) {
        double prod = cache.value(Code::derivative(0, {static_cast<int>(m)}), sys);
        for (std::size_t k = 0; k < m; ++k) prod *= kid[k][0];
        out[0] = prod;
        return out;
    }

    // sum over every assignment of a component to each subtree
    std::vector<int> assign(m, 0);
    for (;;) {
        std::vector<int> multi(static_cast<std::size_t>(d), 0);
        double w = 1.0;
        for (std::size_t k = 0; k < m; ++k) {
            ++multi[static_cast<std::size_t>(assign[k])];
            w *= kid[k][static_cast<std::size_t>(assign[k])];
        }
        for (int i = 0; i < d; ++i)
            out[static_cast<std::size_t>(i)] += w * cache.value(Code::derivative(i, multi), sys);

        std::size_t pos = 0;
        while (pos < m && ++assign[pos] == d) {
            assign[pos] = 0;
            ++pos;
        }
        if (pos == m) break;
    }
    return out;
}

} // namespace

std::vector<double> elementary_differential(const ButcherTree& b, const RhsSystem& sys,
                                            const std::vector<double>& point) {
    if (static_cast<int>(point.size()) != sys.dim)
        throw std::invalid_argument("elementary_differential: point size must equal the dimension");
    RhsSystem at_point = sys;
    at_point.y0 = point;
    CodeValueCache cache;
    return ed_rec(b, at_point, cache);
}

std::vector<double> butcher_partial_sum(const RhsSystem& sys, double t, int max_order) {
    if (max_order < 0)
        throw std::invalid_argument("butcher_partial_sum: max_order must be >= 0");
    std::vector<double> y = sys.y0;
    if (max_order == 0) return y;
    const auto trees = enumerate_butcher_trees(max_order);
    double tk = 1.0;
    for (int k = 1; k <= max_order; ++k) {
        tk *= t;
        for (const ButcherTree& b : trees[static_cast<std::size_t>(k)]) {
            const TreeCoefficients co = coefficients(b);
            const std::vector<double> ed = elementary_differential(b, sys, sys.y0);
            for (int i = 0; i < sys.dim; ++i)
                y[static_cast<std::size_t>(i)] +=
                    tk / static_cast<double>(co.nu) * ed[static_cast<std::size_t>(i)];
        }
    }
    return y;
}

namespace {

// f-code subtree shape: '0' never branches, '2' branches into the plain
// factor (first) and the derivative continuation (second)
std::string f_shape(const ButcherTree& b) {
    std::string cur = "0";
    // reversed canonical order: the branching nearest the root carries the
    // smallest child encoding
    for (auto it = b.children.rbegin(); it != b.children.rend(); ++it)
        cur = "2" + f_shape(*it) + cur;
    return cur;
}

ButcherTree parse_f(const ShapeSignature& s, std::size_t& pos) {
    if (pos >= s.size()) throw std::invalid_argument("not a coding shape");
    const char ch = s[pos++];
    if (ch == '0') return ButcherTree::leaf();
    if (ch != '2') throw std::invalid_argument("not a coding shape");
    ButcherTree factor = parse_f(s, pos);
    ButcherTree continuation = parse_f(s, pos);
    // sticking rule: the factor's tree becomes one more child of the
    // continuation's root
    std::vector<ButcherTree> kids = std::move(continuation.children);
    kids.push_back(std::move(factor));
    return ButcherTree::with_children(std::move(kids));
}

} // namespace

ShapeSignature butcher_to_bin(const ButcherTree& b) { return "1" + f_shape(b); }

ButcherTree bin_to_butcher(const ShapeSignature& shape) {
    if (shape.empty() || shape[0] != '1') throw std::invalid_argument("not a coding shape");
    std::size_t pos = 1;
    ButcherTree b = parse_f(shape, pos);
    if (pos != shape.size()) throw std::invalid_argument("not a coding shape");
    return b;
}

ShapeConditioned shape_conditioned_estimate(const RhsSystem& sys, const MechanismTable& table,
                                            int component, double t, long long n_samples,
                                            const SampleOptions& opts, const ButcherTree& b,
                                            std::uint64_t seed, const ParallelOptions& par) {
    if (table.mode() != MechanismMode::Autonomous)
        throw std::invalid_argument("shape conditioning is defined for the autonomous mechanism");
    if (n_samples < 2)
        throw std::invalid_argument("shape_conditioned_estimate: need at least 2 samples");
    if (component < 0 || component >= sys.dim)
        throw std::invalid_argument("shape_conditioned_estimate: component out of range");
    const double horizon = t - sys.t0;
    if (horizon < 0.0)
        throw std::invalid_argument("shape_conditioned_estimate: t precedes the initial time");

    SampleOptions shape_opts = opts;
    shape_opts.record_shape = true;
    const std::string target = b.encode();
    const Code root = Code::make_identity(component);

    const long long chunk = par.chunk_size > 0 ? par.chunk_size : 65536;
    const long long n_chunks = (n_samples + chunk - 1) / chunk;

    struct Agg {
        RunningMoments cond;
        RunningMoments plain;
        long long aborted = 0;
        std::map<ShapeSignature, long long> counts;
    };
    std::vector<Agg> results(static_cast<std::size_t>(n_chunks));

    auto run_chunk = [&](long long k, CodeValueCache& cache,
                         std::unordered_map<ShapeSignature, bool>& match_memo) {
        Agg r;
        auto matches = [&](const ShapeSignature& s) {
            if (auto it = match_memo.find(s); it != match_memo.end()) return it->second;
            bool m = false;
            try {
                m = bin_to_butcher(s).encode() == target;
            } catch (const std::invalid_argument&) {
                m = false; // the unbranched shape carries the constant term
            }
            match_memo.emplace(s, m);
            return m;
        };
        const long long lo = k * chunk;
        const long long hi = std::min(n_samples, lo + chunk);
        for (long long idx = lo; idx < hi; ++idx) {
            Rng rng = Rng::for_sample(seed, static_cast<std::uint64_t>(idx));
            TreeSample s = sample_tree(root, horizon, sys, table, shape_opts, rng, cache);
            if (s.status != SampleStatus::Ok || !std::isfinite(s.value)) {
                ++r.aborted;
                continue;
            }
            r.plain.add(s.value);
            r.cond.add(matches(s.shape) ? s.value : 0.0);
            ++r.counts[s.shape];
        }
        results[static_cast<std::size_t>(k)] = std::move(r);
    };

    int threads = par.threads;
    if (threads <= 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        threads = hw > 0 ? static_cast<int>(hw) : 1;
    }
    threads = static_cast<int>(std::min<long long>(threads, n_chunks));

    if (threads <= 1) {
        CodeValueCache cache;
        std::unordered_map<ShapeSignature, bool> memo;
        for (long long k = 0; k < n_chunks; ++k) run_chunk(k, cache, memo);
    } else {
        std::atomic<long long> next{0};
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                CodeValueCache cache;
                std::unordered_map<ShapeSignature, bool> memo;
                try {
                    for (long long k; (k = next.fetch_add(1)) < n_chunks;)
                        run_chunk(k, cache, memo);
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    ShapeConditioned out;
    RunningMoments cond, plain;
    long long aborted = 0;
    for (const Agg& r : results) { // fixed chunk order
        cond.combine(r.cond);
        plain.combine(r.plain);
        aborted += r.aborted;
        for (const auto& [shape, count] : r.counts) out.shape_counts[shape] += count;
    }
    if (plain.n == 0) throw std::runtime_error("no usable samples");

    auto fill = [aborted](const RunningMoments& m) {
        Estimate e;
        e.mean = m.mean;
        e.variance = m.variance();
        e.std_error = std::sqrt(e.variance / static_cast<double>(m.n));
        e.n_used = m.n;
        e.n_aborted = aborted;
        return e;
    };
    out.conditioned = fill(cond);
    out.unconditioned = fill(plain);
    return out;
}

} // namespace branchode
