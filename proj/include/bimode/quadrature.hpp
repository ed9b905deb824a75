#pragma once

#include "bimode/common.hpp"

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace bimode::quadrature {

enum class RuleKind { smooth, log_augmented };

struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    RuleKind kind = RuleKind::smooth;
};

// Gauss-Legendre on [-1, 1]. Cached; returned reference stays valid.
const QuadRule& gauss_legendre(std::size_t n);

// One-sided rule on [0, 1] exact for P(s) + Q(s) log s, deg P, Q < n.
// Built once per n from a fixed deterministic procedure (see quadrature.cpp).
const QuadRule& log_endpoint_rule(std::size_t n);

// Rule on [-1, 1] for f(x) + g(x) log|x - x_t| with x_t the target_index-th
// (1-based) Gauss-Legendre node of order p. Supported p: 10, 16.
QuadRule log_ggq_rule(std::size_t p, std::size_t target_index);

bool log_rule_supported(std::size_t p);

// Lagrange basis of the n-point Gauss-Legendre nodes evaluated at x in [-1,1].
void lagrange_basis(std::size_t n, double x, std::span<double> out);

// Barycentric weights for the n-point Gauss-Legendre nodes.
const std::vector<double>& barycentric_weights(std::size_t n);

struct AdaptiveOptions {
    double abs_tol = 1e-13;
    double rel_tol = 1e-13;
    std::size_t order = 10;
    int max_depth = 50;
    std::size_t max_intervals = 20000;
};

struct AdaptiveResult {
    std::vector<Complex> value;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
    bool converged = true;
};

// Callback fills out[0..dim) with the integrand at x.
using VectorIntegrand = std::function<void(double, std::span<Complex>)>;

// Nested-subdivision adaptive Gauss-Legendre on [a, b]. Throws
// ConvergenceError (carrying the best error estimate) on subdivision limit.
AdaptiveResult adaptive_integrate(const VectorIntegrand& f, double a, double b, std::size_t dim,
                                  const AdaptiveOptions& opt = {});

Complex adaptive_integrate(const std::function<Complex(double)>& f, double a, double b,
                           const AdaptiveOptions& opt = {});

// Same, for integrands with a log-type singularity at the endpoint a (b may
// be less than a; the result is the oriented integral). Uses the log endpoint rule with geometric refinement toward a.
AdaptiveResult adaptive_integrate_log_endpoint(const VectorIntegrand& f, double a, double b,
                                               std::size_t dim, const AdaptiveOptions& opt = {});

namespace detail {

template <class F>
void apply_rule(F& f, const QuadRule& rule, double a, double b, std::span<Complex> acc,
                std::span<Complex> tmp) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    std::fill(acc.begin(), acc.end(), Complex(0.0));
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        f(mid + half * rule.nodes[i], tmp);
        const double w = half * rule.weights[i];
        for (std::size_t d = 0; d < acc.size(); ++d) acc[d] += w * tmp[d];
    }
}

template <class F>
void apply_endpoint_rule(F& f, const QuadRule& rule, double a, double b, std::span<Complex> acc,
                         std::span<Complex> tmp) {
    const double len = b - a;
    std::fill(acc.begin(), acc.end(), Complex(0.0));
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        f(a + len * rule.nodes[i], tmp);
        const double w = len * rule.weights[i];
        for (std::size_t d = 0; d < acc.size(); ++d) acc[d] += w * tmp[d];
    }
}

inline double max_abs_diff(std::span<const Complex> a, std::span<const Complex> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_abs(std::span<const Complex> a) {
    double m = 0.0;
    for (const Complex& v : a) m = std::max(m, std::abs(v));
    return m;
}

// Accumulates the adaptive integral of f over [a, b] into sum (not zeroed).
// Returns false if limits were hit. Integrals over b < a carry the sign.
template <class F>
bool adaptive_accumulate(F& f, double a, double b, std::span<Complex> sum, const AdaptiveOptions& opt,
                         double tol, std::size_t& evals, double& err_total) {
    const QuadRule& rule = gauss_legendre(opt.order);
    const std::size_t dim = sum.size();
    struct Item {
        double a, b;
        int depth;
        std::vector<Complex> est;
    };
    std::vector<Complex> tmp(dim), left(dim), right(dim), both(dim);
    std::vector<Item> stack;
    stack.push_back({a, b, 0, std::vector<Complex>(dim)});
    apply_rule(f, rule, a, b, stack.back().est, tmp);
    evals += rule.nodes.size();
    std::size_t processed = 0;
    bool ok = true;
    while (!stack.empty()) {
        Item it = std::move(stack.back());
        stack.pop_back();
        const double m = 0.5 * (it.a + it.b);
        apply_rule(f, rule, it.a, m, left, tmp);
        apply_rule(f, rule, m, it.b, right, tmp);
        evals += 2 * rule.nodes.size();
        for (std::size_t d = 0; d < dim; ++d) both[d] = left[d] + right[d];
        const double diff = max_abs_diff(it.est, both);
        ++processed;
        if (diff <= tol || it.depth >= opt.max_depth || processed > opt.max_intervals) {
            if (diff > tol) ok = false;
            err_total += diff;
            for (std::size_t d = 0; d < dim; ++d) sum[d] += both[d];
            continue;
        }
        stack.push_back({m, it.b, it.depth + 1, right});
        stack.push_back({it.a, m, it.depth + 1, left});
    }
    return ok;
}

// Endpoint-singular adaptive integration: singular point at a.
template <class F>
bool adaptive_accumulate_log_endpoint(F& f, double a, double b, std::span<Complex> sum,
                                      const AdaptiveOptions& opt, double tol, std::size_t& evals,
                                      double& err_total) {
    const QuadRule& rule = log_endpoint_rule(opt.order);
    const std::size_t dim = sum.size();
    std::vector<Complex> tmp(dim), coarse(dim), fine_l(dim), fine_r(dim);
    apply_endpoint_rule(f, rule, a, b, coarse, tmp);
    evals += rule.nodes.size();
    double cur_b = b;
    for (int level = 0; level < 60; ++level) {
        const double m = a + 0.5 * (cur_b - a);
        apply_endpoint_rule(f, rule, a, m, fine_l, tmp);
        evals += rule.nodes.size();
        std::fill(fine_r.begin(), fine_r.end(), Complex(0.0));
        bool ok = adaptive_accumulate(f, m, cur_b, fine_r, opt, tol, evals, err_total);
        double diff = 0.0;
        for (std::size_t d = 0; d < dim; ++d) diff = std::max(diff, std::abs(coarse[d] - fine_l[d] - fine_r[d]));
        for (std::size_t d = 0; d < dim; ++d) sum[d] += fine_r[d];
        if (!ok) return false;
        if (diff <= tol || m == a || m == cur_b) {
            for (std::size_t d = 0; d < dim; ++d) sum[d] += fine_l[d];
            err_total += diff;
            return true;
        }
        coarse = fine_l;
        cur_b = m;
    }
    for (std::size_t d = 0; d < dim; ++d) sum[d] += coarse[d];
    return false;
}

}  // namespace detail

}  // namespace bimode::quadrature
