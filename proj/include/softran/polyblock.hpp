// Outer polyblock approximation for maximizing an increasing function over the
// intersection of a normal set and a conormal set inside a box [0, upper].
#pragma once

#include <concepts>
#include <cstddef>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace softran {

using vecd = Eigen::VectorXd;

// `objective` must be nondecreasing on the box. `certify` returns the true
// value of a candidate point (or nothing when the point is rejected).
template <class P>
concept MonotoneModel = requires(const P& p, const vecd& z) {
    { p.upper() } -> std::convertible_to<vecd>;
    { p.objective(z) } -> std::convertible_to<double>;
    { p.in_normal(z) } -> std::same_as<bool>;
    { p.in_conormal(z) } -> std::same_as<bool>;
    { p.certify(z) } -> std::same_as<std::optional<double>>;
};

struct PolyblockOptions {
    double eps = 1e-3;
    int max_iter = 5000;
    double bisection_rel = 1e-4;
    std::size_t max_vertices = 2'000'000;
    std::optional<double> incumbent;  // value of a known feasible point, if any
};

struct PolyblockResult {
    vecd best_point;
    double best_value = -std::numeric_limits<double>::infinity();
    double upper_bound = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool found = false;      // some feasible point was certified
    bool certified = false;  // gap closed to eps
    std::vector<double> best_trace;
    std::vector<double> bound_trace;
    double gap() const { return upper_bound - best_value; }
};

class PolyblockError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Largest lambda in [0, 1] (up to `rel` in lambda) with lambda * vertex in the normal set.
/// Models with a faster search of their own provide a `boundary_scale` member.
template <MonotoneModel P>
double boundary_scale(const P& p, const vecd& vertex, double rel = 1e-4) {
    if constexpr (requires { { p.boundary_scale(vertex, rel) } -> std::convertible_to<double>; }) {
        return p.boundary_scale(vertex, rel);
    }
    if (p.in_normal(vertex)) return 1.0;
    if (!p.in_normal(vecd::Zero(vertex.size()))) throw PolyblockError("origin is outside the normal set");
    double lo = 0.0, hi = 1.0;
    while (hi - lo > rel) {
        const double mid = 0.5 * (lo + hi);
        (p.in_normal(mid * vertex) ? lo : hi) = mid;
    }
    return lo;
}

template <MonotoneModel P>
vecd project_to_boundary(const P& p, const vecd& vertex, double rel = 1e-4) {
    return boundary_scale(p, vertex, rel) * vertex;
}

template <MonotoneModel P>
PolyblockResult polyblock_solve(const P& p, const PolyblockOptions& opt = {}) {
    if (!(opt.eps > 0.0)) throw std::invalid_argument("polyblock eps must be positive");
    PolyblockResult res;
    if (opt.incumbent) res.best_value = *opt.incumbent;

    struct Item {
        double bound;
        std::size_t id;
        bool operator<(const Item& o) const { return bound < o.bound; }
    };
    std::vector<vecd> store;
    std::priority_queue<Item> heap;
    auto push = [&](vecd v) {
        const double f = p.objective(v);
        if (f <= res.best_value + opt.eps) return;
        store.push_back(std::move(v));
        heap.push({f, store.size() - 1});
    };

    const vecd top = p.upper();
    if (p.in_conormal(top)) push(top);

    while (true) {
        if (heap.empty()) {
            res.upper_bound = std::min(res.upper_bound, std::max(res.best_value, 0.0));
            res.certified = true;
            break;
        }
        const Item it = heap.top();
        res.upper_bound = it.bound;
        if (it.bound <= res.best_value + opt.eps) {
            res.certified = true;
            break;
        }
        if (res.iterations >= opt.max_iter || store.size() >= opt.max_vertices) break;
        heap.pop();
        ++res.iterations;
        vecd v = std::move(store[it.id]);

        const double lam = boundary_scale(p, v, opt.bisection_rel);
        const vecd pi = lam * v;
        if (p.in_conormal(pi))
            if (auto val = p.certify(pi); val && *val > res.best_value) {
                res.best_value = *val;
                res.best_point = pi;
                res.found = true;
            }
        res.best_trace.push_back(res.best_value);
        res.bound_trace.push_back(it.bound);
        if (lam >= 1.0) continue;  // the whole box below v is reachable

        for (Eigen::Index j = 0; j < v.size(); ++j) {
            if (!(v[j] > pi[j])) continue;
            vecd c = v;
            c[j] = pi[j];
            if (p.in_conormal(c)) push(std::move(c));
        }
    }
    if (res.best_trace.empty()) {
        res.best_trace.push_back(res.best_value);
        res.bound_trace.push_back(res.upper_bound);
    }
    if (res.upper_bound < res.best_value) res.upper_bound = res.best_value;
    return res;
}

}  // namespace softran
