#include "doctest.h"

#include "bimode/app.hpp"

#include <random>

using namespace bimode;
using namespace bimode::fields;

namespace {

struct FiberMode {
    app::Config cfg = app::example1_config();
    geometry::Discretization disc = app::build_discretization(cfg);
    modefinder::Mode mode;
    double kv = cfg.phys.k_vacuum();

    FiberMode() {
        const double g = 1.447115413503111 + 2e-9;
        mode = modefinder::find_mode(disc, cfg.phys, {g - 1e-9, g + 1e-9, g});
    }
    Eigen::VectorXcd x() const { return mode.basis.col(0); }
};

const FiberMode& fiber() {
    static const FiberMode m;
    return m;
}

double laplace_residual(const std::function<EMField(Vec2)>& f, Vec2 X, double k2, double h) {
    const EMField c = f(X);
    const EMField lap = Complex(1.0 / (h * h)) * (f(X + Vec2{h, 0}) + f(X - Vec2{h, 0}) + f(X + Vec2{0, h}) +
                                                  f(X - Vec2{0, h}) - Complex(4.0) * c);
    return max_abs(lap + Complex(k2) * c) / (k2 * max_abs(c));
}

}  // namespace

TEST_CASE("zero densities give a zero field") {
    const auto& m = fiber();
    const Eigen::VectorXcd z = Eigen::VectorXcd::Zero(m.disc.unknown_count());
    CHECK(max_abs(eval_field(m.disc, m.cfg.phys, m.mode.ne, z, {10.0, 5.0}, 1)) == 0.0);
    CHECK(max_abs(eval_field(m.disc, m.cfg.phys, m.mode.ne, z, {200.0, 5.0}, 0)) == 0.0);
}

TEST_CASE("transverse reconstruction inverts the curl relations") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd;
    const double n = 1.4475;
    const Complex ne(1.446, 1e-3);
    const Complex ex(nd(rng), nd(rng)), ey(nd(rng), nd(rng)), hx(nd(rng), nd(rng)), hy(nd(rng), nd(rng));
    const Complex dez_dy = I * hx + I * ne * ey;
    const Complex dhz_dx = I * ne * hx + I * n * n * ey;
    const Complex dez_dx = I * ne * ex - I * hy;
    const Complex dhz_dy = -(I * n * n * ex - I * ne * hy);
    const auto t = transverse_from_longitudinal(n, ne, {dez_dx, dez_dy, dhz_dx, dhz_dy});
    CHECK(std::abs(t[0] - ex) < 1e-12 * std::abs(ex));
    CHECK(std::abs(t[1] - ey) < 1e-12 * std::abs(ey));
    CHECK(std::abs(t[2] - hx) < 1e-12 * std::abs(hx));
    CHECK(std::abs(t[3] - hy) < 1e-12 * std::abs(hy));
}

TEST_CASE("point-source fields solve the Helmholtz equation") {
    const PointSource s{{0.3, -0.2}, {-0.4, 0.1}, 1.0, Complex(0.5, 0.5)};
    for (double n : {1.0, 1.45}) {
        const Complex ne = 1.2;
        const Complex k = kernels::transverse_wavenumber(n, ne);
        auto f = [&](Vec2 X) { return point_source_field(s, n, ne, X); };
        CHECK(laplace_residual(f, {2.1, 1.3}, std::real(k * k), 1e-3) < 1e-5);
    }
}

TEST_CASE("mode fields: Helmholtz, transverse relations, decay") {
    const auto& m = fiber();
    REQUIRE(std::abs(m.mode.ne - 1.447115413503111) < 1e-12);
    const Eigen::VectorXcd x = m.x();
    const std::vector<double> n = m.cfg.phys.region_indices();
    for (std::size_t region : {std::size_t(0), std::size_t(1)}) {
        const Vec2 X = region == 0 ? Vec2{120.0, 35.0} : Vec2{40.0, -30.0};
        const Complex k = kernels::transverse_wavenumber(n[region], m.mode.ne);
        auto f = [&](Vec2 P) { return eval_field(m.disc, m.cfg.phys, m.mode.ne, x, P, region); };
        CHECK(laplace_residual(f, X, std::real(k * k), 0.05) < 1e-6);
    }
    // Exterior decay along a ray.
    double prev = 1e300;
    for (double r = 110.0; r < 200.0; r += 15.0) {
        const double v = max_abs(eval_field(m.disc, m.cfg.phys, m.mode.ne, x, {r * 0.8, r * 0.6}, 0));
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("boundary traces match for a mode and not for a generic vector") {
    const auto& m = fiber();
    const BoundaryMismatch bm = boundary_mismatch(m.disc, m.cfg.phys, m.mode.ne, m.x());
    CHECK(bm.ez < 1e-8);
    CHECK(bm.etau < 1e-8);
    CHECK(bm.hz < 1e-8);
    CHECK(bm.htau < 1e-8);
    const Eigen::VectorXcd r = Eigen::VectorXcd::Random(m.disc.unknown_count());
    const BoundaryMismatch bad = boundary_mismatch(m.disc, m.cfg.phys, Complex(1.4460, 0.0), r);
    CHECK(std::max({bad.ez, bad.etau, bad.hz, bad.htau}) > 1e-2);
}

TEST_CASE("field grid: mask and rotational symmetry of a TE mode") {
    const auto& m = fiber();
    const double R = 25e-6 * m.kv;
    const FieldGrid g = field_grid(m.disc, m.cfg.phys, m.mode.ne, m.x(), {-1.2 * R, -1.2 * R}, {1.2 * R, 1.2 * R}, 25, 25);
    double maxe = 0.0;
    for (std::size_t i = 0; i < g.field.size(); ++i) {
        const Vec2 X{g.x0 + (g.x1 - g.x0) * (i % g.nx) / double(g.nx - 1), g.y0 + (g.y1 - g.y0) * (i / g.nx) / double(g.ny - 1)};
        const bool near = relative_boundary_distance(m.disc, X) < FieldOptions{}.exclusion;
        CHECK((g.region[i] == -1) == near);
        const EMField& f = g.field[i];
        maxe = std::max(maxe, std::sqrt(std::norm(f.ex) + std::norm(f.ey) + std::norm(f.ez)));
    }
    CHECK(maxe == doctest::Approx(1.0).epsilon(1e-14));
    // |E| on a circle of radius 0.5 R.
    double lo = 1e300, hi = 0.0;
    for (int a = 0; a < 12; ++a) {
        const double th = 2.0 * pi * a / 12.0 + 0.1;
        const EMField f = eval_field(m.disc, m.cfg.phys, m.mode.ne, m.x(), {0.5 * R * std::cos(th), 0.5 * R * std::sin(th)}, 1);
        const double e = std::sqrt(std::norm(f.ex) + std::norm(f.ey) + std::norm(f.ez));
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    CHECK((hi - lo) / hi < 1e-6);
    CHECK_THROWS_AS(field_grid(m.disc, m.cfg.phys, m.mode.ne, m.x(), {0, 0}, {1, 1}, 0, 4), ValidationError);
}

TEST_CASE("evaluation on the interface is rejected") {
    const auto& m = fiber();
    const Vec2 on = m.disc.nodes()[7].frame.position();
    CHECK_THROWS_AS(eval_field(m.disc, m.cfg.phys, m.mode.ne, m.x(), on, 0), NearBoundaryError);
}

TEST_CASE("region location") {
    const auto& m = fiber();
    CHECK(locate_region(m.disc, {0.0, 0.0}) == 1);
    CHECK(locate_region(m.disc, {200.0, 0.0}) == 0);
    CHECK(locate_region(m.disc, {104.0, 0.0}) == 1);
    CHECK(locate_region(m.disc, {106.0, 0.0}) == 0);
}
