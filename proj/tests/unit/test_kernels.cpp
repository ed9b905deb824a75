#include "doctest.h"

#include "bimode/kernels.hpp"
#include "bimode/specfun.hpp"

#include <random>

using namespace bimode;
using namespace bimode::kernels;
using geometry::FramePoint;

namespace {

FramePoint frame_at(Vec2 p, double angle) {
    const Vec2 t{std::cos(angle), std::sin(angle)};
    return {p, {0.0, 0.0}, t, {t.y, -t.x}, 1.0};
}

Complex green(Complex k, Vec2 P, Vec2 Q) { return 0.25 * I * specfun::hankel01(k * norm(P - Q)).h0; }

Complex value(KernelKind kind, Complex k, const FramePoint& P, const FramePoint& Q) {
    const PairGeometry g = pair_geometry(P.position() - Q.position(), P, Q);
    return kernel_eval(kind, k, g).value(g.log_r);
}

// Fourth-order central difference of f(s) at s = 0.
template <class F>
Complex fd(F f, double h) {
    return (8.0 * (f(h) - f(-h)) - (f(2.0 * h) - f(-2.0 * h))) / (12.0 * h);
}

}  // namespace

TEST_CASE("derivative kernels match finite differences of the Green's function") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (Complex k : {Complex(1.7, 0.0), Complex(0.0, 0.9), Complex(2.5, 0.3)}) {
        for (int trial = 0; trial < 6; ++trial) {
            const FramePoint P = frame_at({u(rng), u(rng)}, 3.0 * u(rng));
            const FramePoint Q = frame_at({u(rng) + 1.5, u(rng)}, 3.0 * u(rng));
            const Vec2 p = P.position(), q = Q.position();
            const double h = 1e-3;
            const Complex d = fd([&](double s) { return green(k, p, q + s * Q.normal); }, h);
            const Complex t = fd([&](double s) { return green(k, p, q + s * Q.tangent); }, h);
            const Complex snu = fd([&](double s) { return green(k, p + s * P.normal, q); }, h);
            const Complex stau = fd([&](double s) { return green(k, p + s * P.tangent, q); }, h);
            const Complex ttau = fd(
                [&](double s) {
                    return fd([&](double r) { return green(k, p + s * P.tangent, q + r * Q.tangent); }, h);
                },
                h);
            const double tol = 1e-8;
            CHECK(std::abs(value(KernelKind::S, k, P, Q) - green(k, p, q)) < 1e-14);
            CHECK(std::abs(value(KernelKind::D, k, P, Q) - d) < tol);
            CHECK(std::abs(value(KernelKind::T, k, P, Q) - t) < tol);
            CHECK(std::abs(value(KernelKind::S_nu, k, P, Q) - snu) < tol);
            CHECK(std::abs(value(KernelKind::S_tau, k, P, Q) - stau) < tol);
            CHECK(std::abs(value(KernelKind::T_tau, k, P, Q) - ttau) < 1e-6);
            CHECK(std::abs(value(KernelKind::S_tau_nu, k, P, Q) - green(k, p, q) * dot(P.tangent, Q.normal)) < 1e-14);
        }
    }
}

TEST_CASE("reciprocity under exchange of target and source") {
    const Complex k(1.3, 0.1);
    const FramePoint P = frame_at({0.2, -0.4}, 0.7), Q = frame_at({1.1, 0.5}, -1.9);
    CHECK(std::abs(value(KernelKind::S, k, P, Q) - value(KernelKind::S, k, Q, P)) < 1e-15);
    CHECK(std::abs(value(KernelKind::D, k, P, Q) - value(KernelKind::S_nu, k, Q, P)) < 1e-15);
    CHECK(std::abs(value(KernelKind::T, k, P, Q) - value(KernelKind::S_tau, k, Q, P)) < 1e-15);
    CHECK(std::abs(value(KernelKind::T_tau, k, P, Q) - value(KernelKind::T_tau, k, Q, P)) < 1e-14);
}

TEST_CASE("matched media give identically zero difference kernels and blocks") {
    const FramePoint P = frame_at({0.0, 0.0}, 0.3), Q = frame_at({0.01, 0.02}, 0.35);
    const PairGeometry g = pair_geometry(P.position() - Q.position(), P, Q);
    for (KernelKind kind : {KernelKind::S, KernelKind::D, KernelKind::T, KernelKind::S_nu, KernelKind::T_tau}) {
        const KernelValue v = difference_kernel_eval(kind, 0.7, 0.7, 2.0, 2.0, g);
        CHECK(v.value(g.log_r) == Complex(0.0));
    }
    const WavenumberSet ws = WavenumberSet::make({1.45, 1.45}, 1.44);
    Block b;
    interface_block(ws, 1, g, b);
    for (const Complex& c : b) CHECK(c == Complex(0.0));
}

TEST_CASE("difference blocks stay bounded as r -> 0 on a smooth curve") {
    // Points on the unit circle approaching each other.
    const WavenumberSet ws = WavenumberSet::make({1.444, 1.4475}, 1.446);
    auto pt = [](double t) {
        const Vec2 p{std::cos(t), std::sin(t)};
        return FramePoint{p, {0.0, 0.0}, {-p.y, p.x}, p, 1.0};
    };
    double prev = 0.0;
    for (double e : {1e-2, 1e-4, 1e-6, 1e-8}) {
        const FramePoint P = pt(0.0), Q = pt(e);
        const PairGeometry g = pair_geometry(P.position() - Q.position(), P, Q);
        Block b;
        interface_block(ws, 1, g, b);
        double m = 0.0;
        for (const Complex& c : b) m = std::max(m, std::abs(c));
        // At most logarithmic growth.
        CHECK(m < 1.0 + 0.1 * std::abs(std::log(e)));
        if (prev > 0.0) CHECK(m < prev + 0.1);
        prev = m;
    }
    const KernelValue s = kernel_eval(KernelKind::S, ws.k[0], pair_geometry({1e-9, 0.0}, pt(0.0), pt(0.0)));
    CHECK(std::abs(s.value(std::log(1e-9)) + std::log(1e-9) / (2.0 * pi)) < 1.0);
}

TEST_CASE("transverse wavenumber branch") {
    CHECK(transverse_wavenumber(1.5, 1.4).imag() == 0.0);
    CHECK(transverse_wavenumber(1.5, 1.4).real() > 0.0);
    CHECK(transverse_wavenumber(1.4, 1.5).imag() > 0.0);
    CHECK(std::abs(transverse_wavenumber(1.4, 1.5).real()) < 1e-15);
    // Leaky: slightly positive Im ne keeps the continuation of the guided branch.
    const Complex k = transverse_wavenumber(1.45, Complex(1.4454, 3e-8));
    CHECK(k.imag() < 0.0);
    CHECK(k.real() > 0.0);
    CHECK(std::abs(k - transverse_wavenumber(1.45, 1.4454)) < 1e-5);
    CHECK_THROWS_AS(WavenumberSet::make({1.45, 1.0}, 1.45 + 1e-12), DegenerateWavenumberError);
    CHECK_THROWS_AS(pair_geometry({0.0, 0.0}, frame_at({0, 0}, 0), frame_at({0, 0}, 0)), DomainError);
}
