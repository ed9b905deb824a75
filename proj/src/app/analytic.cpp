#include "bimode/app.hpp"

#include "bimode/quadrature.hpp"
#include "bimode/specfun.hpp"

#include <algorithm>
#include <cmath>

namespace bimode::app {

namespace {

struct FiberArgs {
    double u, w;
};

FiberArgs fiber_args(double ne, double radius, double n0, double n1, double wavelength) {
    const double ka = 2.0 * pi / wavelength * radius;
    return {ka * std::sqrt((n1 - ne) * (n1 + ne)), ka * std::sqrt((ne - n0) * (ne + n0))};
}

// A = J' w K + K' u J and B = n1^2 J' w K + n0^2 K' u J.
std::pair<double, double> fiber_ab(int nu, double u, double w, double n0, double n1, double& j, double& k) {
    const double v = nu;
    j = std::cyl_bessel_j(v, u);
    k = std::cyl_bessel_k(v, w);
    const double jp = nu == 0 ? -std::cyl_bessel_j(1.0, u) : std::cyl_bessel_j(v - 1.0, u) - v / u * j;
    const double kp = nu == 0 ? -std::cyl_bessel_k(1.0, w) : -std::cyl_bessel_k(v - 1.0, w) - v / w * k;
    return {jp * w * k + kp * u * j, n1 * n1 * jp * w * k + n0 * n0 * kp * u * j};
}

double bisect(const std::function<double(double)>& f, double a, double b) {
    double fa = f(a);
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm < 0.0) == (fa < 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

double fiber_characteristic(int order, double ne, double radius, double n0, double n1, double wavelength) {
    const auto [u, w] = fiber_args(ne, radius, n0, n1, wavelength);
    double j, k;
    const auto [a, b] = fiber_ab(order, u, w, n0, n1, j, k);
    const double v2 = u * u + w * w;
    return a * b * u * u * w * w - double(order) * order * ne * ne * v2 * v2 * j * j * k * k;
}

std::vector<FiberMode> fiber_dispersion_oracle(double radius, double n0, double n1, double wavelength) {
    if (!(radius > 0.0 && wavelength > 0.0 && n0 > 0.0)) throw ValidationError("oracle: invalid parameters");
    std::vector<FiberMode> out;
    if (!(n1 > n0)) return out;
    const double V = 2.0 * pi / wavelength * radius * std::sqrt(n1 * n1 - n0 * n0);
    // Sample uniformly in u = V sqrt(1 - b); roots are at least ~pi/2 apart in u.
    const std::size_t samples = std::max<std::size_t>(2000, static_cast<std::size_t>(400 * V));
    const double ka = 2.0 * pi / wavelength * radius;
    auto ne_of_u = [&](double u) { return std::sqrt(n1 * n1 - (u / ka) * (u / ka)); };

    auto collect = [&](int nu, const std::function<double(double)>& f, const std::string& family, std::size_t deg) {
        // Guided roots of order nu lie beyond the first zero of J_{nu-1}, so
        // u > nu - 1; this also keeps the sampling off the u -> 0 underflow.
        std::size_t found = 0;
        const double u0 = std::max(std::min(0.5, 0.25 * V), nu - 1.0);
        if (u0 >= V) return found;
        double prev_ne = ne_of_u(u0), prev = f(prev_ne);
        for (std::size_t s = 1; s <= samples; ++s) {
            const double u = u0 + (V - u0) * (double(s) / samples) * (1.0 - 1e-9);
            const double ne = ne_of_u(u);
            const double val = f(ne);
            if ((val < 0.0) != (prev < 0.0) && val != 0.0) {
                out.push_back({bisect(f, ne, prev_ne), nu, family, deg});
                ++found;
            }
            prev = val;
            prev_ne = ne;
        }
        return found;
    };

    for (int nu = 0;; ++nu) {
        if (nu == 0) {
            auto fa = [&](double ne) {
                const auto [u, w] = fiber_args(ne, radius, n0, n1, wavelength);
                double j, k;
                return fiber_ab(0, u, w, n0, n1, j, k).first;
            };
            auto fb = [&](double ne) {
                const auto [u, w] = fiber_args(ne, radius, n0, n1, wavelength);
                double j, k;
                return fiber_ab(0, u, w, n0, n1, j, k).second;
            };
            collect(0, fa, "TE", 1);
            collect(0, fb, "TM", 1);
        } else {
            collect(nu, [&](double ne) { return fiber_characteristic(nu, ne, radius, n0, n1, wavelength); },
                             "hybrid", 2);
        }
        if (nu - 1.0 >= V) break;
    }
    std::sort(out.begin(), out.end(), [](const FiberMode& a, const FiberMode& b) { return a.ne > b.ne; });
    return out;
}

SommerfeldResult run_sommerfeld_check(Complex k, double beta, const std::vector<double>& separations) {
    const Complex kb = std::sqrt(k * k - beta * beta);
    const Complex kbeta = kb.imag() < 0.0 ? -kb : kb;
    // beta > Re k: z = rho sinh t, shifted to Im t = pi/2, where the integrand is
    // exp(-rho (beta cosh u + k sinh u)) / (4 pi) with no cancellation.
    // Otherwise the tilted contour z = x (1 + i eta) with eta = 0.5.
    const bool evanescent = k.real() < beta;
    const double eta = 0.5;
    SommerfeldResult res;
    for (double rho : separations) {
        if (!(rho > 0.0)) throw DomainError("sommerfeld: separation must be positive");
        quadrature::AdaptiveOptions qo;
        qo.abs_tol = 0.0;
        qo.rel_tol = 1e-14;
        qo.order = 20;
        Complex total = 0.0;
        if (evanescent) {
            auto integrand = [&](double u) {
                return std::exp(-rho * (k * std::sinh(u) + beta * std::cosh(u))) / (4.0 * pi);
            };
            const double gap = rho * (beta - k.real());
            const double U = std::max(1.0, std::log(120.0 / gap) + 1.0);
            total = quadrature::adaptive_integrate(integrand, -U, 0.0, qo) +
                    quadrature::adaptive_integrate(integrand, 0.0, U, qo);
        } else {
            auto integrand = [&](double x) {
                const Complex dz(1.0, eta);
                const Complex z = x * dz;
                const Complex R = std::sqrt(rho * rho + z * z);
                return std::exp(I * k * R + I * beta * z) / (4.0 * pi * R) * dz;
            };
            const double decay = std::min((k.real() + beta) * eta + k.imag(), (k.real() - beta) * eta + k.imag());
            if (!(decay > 0.0)) throw ConvergenceError("sommerfeld: no decaying contour (beta equals k)", 1.0);
            const double X = 40.0 / decay + 10.0 * rho;
            qo.abs_tol = 1e-15;
            qo.rel_tol = 1e-13;
            const double cuts[] = {0.0, rho, 4.0 * rho, X};
            for (int side : {-1, 1}) {
                for (int c = 0; c < 3; ++c) {
                    const double a = side * cuts[c], b = side * cuts[c + 1];
                    total += quadrature::adaptive_integrate(integrand, std::min(a, b), std::max(a, b), qo);
                }
            }
        }
        const Complex exact = 0.25 * I * specfun::hankel01(kbeta * rho).h0;
        const double r = std::abs(total - exact) / std::abs(exact);
        res.residuals.push_back(r);
        res.max_residual = std::max(res.max_residual, r);
    }
    return res;
}

}  // namespace bimode::app
