#include "doctest.h"

#include "bimode/quadrature.hpp"

#include <cmath>
#include <random>

using namespace bimode;
using namespace bimode::quadrature;

namespace {

// int_0^a u^m log u du
long double mono_log(int m, long double a) {
    if (a == 0.0L) return 0.0L;
    return std::pow(a, m + 1) * (std::log(a) / (m + 1) - 1.0L / ((m + 1) * (m + 1)));
}

// int_{-1}^{1} x^j log|x - t| dx via u = x - t and the binomial expansion.
long double exact_log_moment(int j, long double t) {
    long double s = 0.0L, binom = 1.0L;
    for (int m = 0; m <= j; ++m) {
        const long double right = mono_log(m, 1.0L - t);
        const long double left = (m % 2 ? -1.0L : 1.0L) * mono_log(m, 1.0L + t);
        s += binom * std::pow(t, j - m) * (right + left);
        binom = binom * (j - m) / (m + 1);
    }
    return s;
}

}  // namespace

TEST_CASE("Gauss-Legendre is exact through degree 2n-1") {
    for (std::size_t n : {2, 5, 10, 16, 24}) {
        const QuadRule& r = gauss_legendre(n);
        for (std::size_t d = 0; d < 2 * n; ++d) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], double(d));
            const double exact = d % 2 ? 0.0 : 2.0 / (d + 1);
            CHECK(std::abs(s - exact) < 1e-14);
        }
    }
}

TEST_CASE("log GGQ rules integrate x^j log|x - x_t| exactly") {
    for (std::size_t p : {10, 16}) {
        const QuadRule& gl = gauss_legendre(p);
        for (std::size_t t = 1; t <= p; ++t) {
            const QuadRule r = log_ggq_rule(p, t);
            const double xt = gl.nodes[t - 1];
            for (int j = 0; j < int(p); ++j) {
                double sl = 0.0, sp = 0.0;
                for (std::size_t i = 0; i < r.nodes.size(); ++i) {
                    sl += r.weights[i] * std::pow(r.nodes[i], j) * std::log(std::abs(r.nodes[i] - xt));
                    sp += r.weights[i] * std::pow(r.nodes[i], j);
                }
                CHECK(std::abs(sl - double(exact_log_moment(j, xt))) < 1e-13);
                CHECK(std::abs(sp - (j % 2 ? 0.0 : 2.0 / (j + 1))) < 1e-13);
            }
        }
    }
}

TEST_CASE("log GGQ agrees with the adaptive log-endpoint integrator") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    for (std::size_t p : {10, 16}) {
        const QuadRule& gl = gauss_legendre(p);
        for (std::size_t t : {std::size_t(1), p / 2, p}) {
            const double xt = gl.nodes[t - 1];
            std::vector<double> a(p), b(p);
            for (auto& v : a) v = nd(rng);
            for (auto& v : b) v = nd(rng);
            auto poly = [](const std::vector<double>& c, double x) {
                double s = 0.0;
                for (std::size_t i = c.size(); i-- > 0;) s = s * x + c[i];
                return s;
            };
            auto f = [&](double x) { return poly(a, x) + poly(b, x) * std::log(std::abs(x - xt)); };
            const QuadRule r = log_ggq_rule(p, t);
            double ggq = 0.0;
            for (std::size_t i = 0; i < r.nodes.size(); ++i) ggq += r.weights[i] * f(r.nodes[i]);
            AdaptiveOptions o;
            o.abs_tol = 1e-15;
            o.rel_tol = 1e-15;
            auto vf = [&](double x, std::span<Complex> out) { out[0] = f(x); };
            const Complex right = adaptive_integrate_log_endpoint(vf, xt, 1.0, 1, o).value[0];
            const Complex left = adaptive_integrate_log_endpoint(vf, xt, -1.0, 1, o).value[0];
            const double oracle = (right - left).real();
            CHECK(std::abs(ggq - oracle) <= 1e-13 * std::max(1.0, std::abs(oracle)));
        }
    }
}

TEST_CASE("unsupported GGQ orders are rejected") {
    CHECK_FALSE(log_rule_supported(7));
    CHECK_THROWS_AS(log_ggq_rule(7, 1), ConfigError);
    CHECK_THROWS_AS(log_ggq_rule(10, 0), DomainError);
}

TEST_CASE("log endpoint rule") {
    for (std::size_t n : {4, 8, 12}) {
        const QuadRule& r = log_endpoint_rule(n);
        for (int j = 0; j < int(n); ++j) {
            double sl = 0.0, sp = 0.0;
            for (std::size_t i = 0; i < r.nodes.size(); ++i) {
                sl += r.weights[i] * std::pow(r.nodes[i], j) * std::log(r.nodes[i]);
                sp += r.weights[i] * std::pow(r.nodes[i], j);
            }
            CHECK(std::abs(sl + 1.0 / ((j + 1.0) * (j + 1.0))) < 1e-13);
            CHECK(std::abs(sp - 1.0 / (j + 1.0)) < 1e-13);
        }
    }
}

TEST_CASE("adaptive integration examples") {
    AdaptiveOptions o;
    CHECK(std::abs(adaptive_integrate([](double x) { return Complex(std::sqrt(x)); }, 0.0, 1.0, o) - 2.0 / 3.0) <
          1e-12);
    CHECK(std::abs(adaptive_integrate([](double x) { return std::exp(Complex(0.0, 30.0 * x)); }, 0.0, 1.0, o) -
                   (std::exp(Complex(0.0, 30.0)) - 1.0) / Complex(0.0, 30.0)) < 1e-13);
    // Oriented integral.
    CHECK(std::abs(adaptive_integrate([](double x) { return Complex(x * x); }, 1.0, 0.0, o) + 1.0 / 3.0) < 1e-14);
    AdaptiveOptions tight;
    tight.max_intervals = 8;
    CHECK_THROWS_AS(adaptive_integrate([](double x) { return Complex(1.0 / (x * x + 1e-12)); }, -1.0, 1.0, tight),
                    ConvergenceError);
}

TEST_CASE("Lagrange basis interpolates polynomials of degree < n") {
    const std::size_t n = 10;
    std::vector<double> l(n);
    const QuadRule& gl = gauss_legendre(n);
    for (double x : {-1.0, -0.37, 0.0, 0.81, 1.0}) {
        lagrange_basis(n, x, l);
        double s = 0.0, p = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += l[i];
            p += l[i] * std::pow(gl.nodes[i], 7);
        }
        CHECK(std::abs(s - 1.0) < 1e-14);
        CHECK(std::abs(p - std::pow(x, 7)) < 1e-14);
    }
    lagrange_basis(n, gl.nodes[3], l);
    CHECK(l[3] == doctest::Approx(1.0).epsilon(1e-15));
}
