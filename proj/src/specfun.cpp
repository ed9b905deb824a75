#include "bimode/specfun.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace bimode::specfun {
namespace {

constexpr double euler_gamma = 0.57721566490153286060651209;

struct LaguerreRule {
    std::vector<double> x;
    std::vector<double> w;
};

// Generalized Gauss-Laguerre rule (weight u^alpha e^-u): Golub-Welsch,
// then Newton polish of the nodes and weights from the derivative formula.
LaguerreRule make_laguerre(int n, double alpha) {
    Eigen::VectorXd diag(n), sub(n - 1);
    for (int k = 0; k < n; ++k) diag(k) = 2.0 * k + alpha + 1.0;
    for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(k * (k + alpha));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    LaguerreRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    const double log_ratio = std::lgamma(n + alpha + 1.0) - std::lgamma(n + 1.0);
    for (int i = 0; i < n; ++i) {
        double x = es.eigenvalues()(i);
        double dp = 1.0;
        for (int it = 0; it < 8; ++it) {
            double p0 = 1.0;
            double p1 = 1.0 + alpha - x;
            for (int k = 1; k < n; ++k) {
                double p2 = ((2.0 * k + 1.0 + alpha - x) * p1 - (k + alpha) * p0) / (k + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = (n * p1 - (n + alpha) * p0) / x;
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) <= 1e-16 * x) break;
        }
        double p0 = 1.0;
        double p1 = 1.0 + alpha - x;
        for (int k = 1; k < n; ++k) {
            double p2 = ((2.0 * k + 1.0 + alpha - x) * p1 - (k + alpha) * p0) / (k + 1.0);
            p0 = p1;
            p1 = p2;
        }
        dp = (n * p1 - (n + alpha) * p0) / x;
        rule.x[i] = x;
        rule.w[i] = std::exp(log_ratio) / (x * dp * dp);
    }
    // Fix the zeroth moment exactly; lgamma/exp carry a few ulps of error.
    double total = 0.0;
    for (int i = n - 1; i >= 0; --i) total += rule.w[i];
    const double mu0 = std::tgamma(alpha + 1.0);
    for (double& w : rule.w) w *= mu0 / total;
    return rule;
}

// The branch point of the integrand sits at u = 2iz; near the series radius it is
// close enough to the positive axis that 40 nodes lose several digits.
constexpr double dense_laguerre_radius = 4.0;

const LaguerreRule& laguerre_minus_half(bool dense) {
    static const LaguerreRule r = make_laguerre(40, -0.5);
    static const LaguerreRule d = make_laguerre(120, -0.5);
    return dense ? d : r;
}

const LaguerreRule& laguerre_plus_half(bool dense) {
    static const LaguerreRule r = make_laguerre(40, 0.5);
    static const LaguerreRule d = make_laguerre(120, 0.5);
    return dense ? d : r;
}

// Power-series sums in q = z^2/4:
//   a0 = sum (-q)^m/(m!)^2                      = J0
//   s0 = sum_{m>=1} (-1)^{m+1} H_m q^m/(m!)^2
//   a1 = sum (-q)^m/(m!(m+1)!)                  = 2 J1/z
//   s1 = sum (psi(m+1)+psi(m+2)) (-q)^m/(m!(m+1)!)
struct SeriesSums {
    Complex a0, s0, a1, s1;
};

SeriesSums series_sums(Complex z) {
    const Complex q = 0.25 * z * z;
    Complex t0 = 1.0;  // (-q)^m/(m!)^2
    Complex t1 = 1.0;  // (-q)^m/(m!(m+1)!)
    double harm = 0.0;
    SeriesSums s{1.0, 0.0, 1.0, 1.0 - 2.0 * euler_gamma};
    for (int m = 1; m < 60; ++m) {
        t0 *= -q / double(m * m);
        t1 *= -q / double(m * (m + 1));
        double harm_next = harm + 1.0 / m;
        s.a0 += t0;
        s.s0 -= harm_next * t0;
        s.a1 += t1;
        s.s1 += (-2.0 * euler_gamma + harm_next + harm_next + 1.0 / (m + 1)) * t1;
        harm = harm_next;
        if (std::abs(t0) < 1e-18 * std::abs(s.a0) && std::abs(t1) < 1e-18) break;
    }
    return s;
}

}  // namespace

namespace detail {

Hankel01 hankel01_series(Complex z) {
    const SeriesSums s = series_sums(z);
    const Complex lg = std::log(0.5 * z) + euler_gamma;
    const Complex j0 = s.a0;
    const Complex j1 = 0.5 * z * s.a1;
    const Complex y0 = (2.0 / pi) * (lg * j0 + s.s0);
    const Complex y1 = -2.0 / (pi * z) + (2.0 / pi) * std::log(0.5 * z) * j1 - (0.5 / pi) * z * s.s1;
    return {j0 + I * y0, j1 + I * y1};
}

// H_nu(z) = sqrt(2/(pi z)) e^{i(z - nu pi/2 - pi/4)} / Gamma(nu+1/2)
//           * int_0^inf e^-u u^{nu-1/2} (1 + i u/(2z))^{nu-1/2} du
Hankel01 hankel01_laplace(Complex z) {
    const Complex pre = std::sqrt(2.0 / (pi * z)) * std::exp(I * (z - 0.25 * pi));
    const Complex c = I / (2.0 * z);
    const bool dense = std::abs(z) < dense_laguerre_radius;
    const LaguerreRule& r0 = laguerre_minus_half(dense);
    const LaguerreRule& r1 = laguerre_plus_half(dense);
    Complex sum0 = 0.0;
    Complex sum1 = 0.0;
    for (std::size_t i = 0; i < r0.x.size(); ++i) sum0 += r0.w[i] / std::sqrt(1.0 + c * r0.x[i]);
    for (std::size_t i = 0; i < r1.x.size(); ++i) sum1 += r1.w[i] * std::sqrt(1.0 + c * r1.x[i]);
    const double g_half = std::sqrt(pi);
    const double g_three_half = 0.5 * std::sqrt(pi);
    return {pre * sum0 / g_half, -I * pre * sum1 / g_three_half};
}

Hankel01 hankel01_asymptotic(Complex z) {
    const Complex pre = std::sqrt(2.0 / (pi * z)) * std::exp(I * (z - 0.25 * pi));
    const Complex iz = I / z;
    Complex sum0 = 1.0, sum1 = 1.0;
    Complex t0 = 1.0, t1 = 1.0;
    double last0 = 1.0, last1 = 1.0;
    for (int k = 1; k < 40; ++k) {
        const double odd = 2.0 * k - 1.0;
        Complex n0 = t0 * (-odd * odd) / (8.0 * k) * iz;
        Complex n1 = t1 * (4.0 - odd * odd) / (8.0 * k) * iz;
        if (std::abs(n0) > last0 && std::abs(n1) > last1) break;
        t0 = n0;
        t1 = n1;
        last0 = std::abs(t0);
        last1 = std::abs(t1);
        sum0 += t0;
        sum1 += t1;
        if (last0 < 1e-17 && last1 < 1e-17) break;
    }
    return {pre * sum0, -I * pre * sum1};
}

}  // namespace detail

Hankel01 hankel01(Complex z) {
    if (z == Complex(0.0, 0.0)) throw DomainError("hankel01: z = 0");
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw DomainError("hankel01: non-finite argument");
    if (z.imag() < 0.0 && -z.imag() > z.real()) throw DomainError("hankel01: argument outside supported sector");
    const double a = std::abs(z);
    if (a <= series_radius) return detail::hankel01_series(z);
    if (a <= asymptotic_radius) return detail::hankel01_laplace(z);
    return detail::hankel01_asymptotic(z);
}

BesselJ01 bessel_j01(Complex z) {
    const double a = std::abs(z);
    if (a <= series_radius) {
        const SeriesSums s = series_sums(z);
        return {s.a0, 0.5 * z * s.a1};
    }
    // Miller backward recurrence normalized by e^{-+iz} = J0 + 2 sum (-+i)^n Jn,
    // choosing the sign whose sum has no cancellation.
    const int nstart = 2 * (static_cast<int>(a + 30.0 + 2.0 * std::sqrt(a)) / 2);
    Complex fn1 = 0.0;
    Complex fn = 1e-300;
    const bool upper = z.imag() >= 0.0;
    const Complex unit = upper ? -I : I;
    Complex f0 = 0.0, f1 = 0.0;
    Complex norm = 0.0;
    std::vector<Complex> f(nstart + 1);
    f[nstart] = fn;
    for (int n = nstart; n >= 1; --n) {
        Complex prev = (2.0 * n / z) * fn - fn1;
        fn1 = fn;
        fn = prev;
        f[n - 1] = fn;
        if (std::abs(fn) > 1e200) {
            for (int m = n - 1; m <= nstart; ++m) f[m] *= 1e-200;
            fn *= 1e-200;
            fn1 *= 1e-200;
        }
    }
    f0 = f[0];
    f1 = f[1];
    Complex p = 1.0;
    norm = f[0];
    for (int n = 1; n <= nstart; ++n) {
        p *= unit;
        norm += 2.0 * p * f[n];
    }
    const Complex e = std::exp(upper ? -I * z : I * z);
    return {e * (f0 / norm), e * (f1 / norm)};
}

SeriesParts series_parts(Complex k, double r) {
    const Complex z = k * r;
    const SeriesSums s = series_sums(z);
    const Complex lk = std::log(0.5 * k);
    SeriesParts out;
    out.j0 = s.a0;
    out.smooth0 = s.a0 + (2.0 * I / pi) * ((lk + euler_gamma) * s.a0 + s.s0);
    out.j1_over_z = 0.5 * s.a1;
    out.smooth1_over_z = out.j1_over_z * (1.0 + (2.0 * I / pi) * lk) - (0.5 * I / pi) * s.s1;
    return out;
}

HankelLogSplit hankel_log_split(Complex k, double r) {
    if (!(r > 0.0)) throw DomainError("hankel_log_split: r must be positive");
    if (k == Complex(0.0, 0.0)) throw DomainError("hankel_log_split: k = 0");
    const Complex z = k * r;
    HankelLogSplit out;
    out.order1.inv_coeff = -2.0 * I / (pi * k);
    if (std::abs(z) <= series_radius) {
        const SeriesParts p = series_parts(k, r);
        out.order0 = {p.smooth0, (2.0 * I / pi) * p.j0};
        out.order1.log_coeff = (2.0 * I / pi) * p.j1_over_z * z;
        out.order1.smooth = p.smooth1_over_z * z;
        return out;
    }
    const Hankel01 h = hankel01(z);
    const BesselJ01 j = bessel_j01(z);
    const double lr = std::log(r);
    out.order0.log_coeff = (2.0 * I / pi) * j.j0;
    out.order0.smooth = h.h0 - out.order0.log_coeff * lr;
    out.order1.log_coeff = (2.0 * I / pi) * j.j1;
    out.order1.smooth = h.h1 - out.order1.inv_coeff / r - out.order1.log_coeff * lr;
    return out;
}

}  // namespace bimode::specfun
