#include "bimode/fields.hpp"

#include "bimode/quadrature.hpp"
#include "bimode/specfun.hpp"

#include <algorithm>
#include <limits>

namespace bimode::fields {

using geometry::Discretization;

EMField operator+(const EMField& a, const EMField& b) {
    return {a.ex + b.ex, a.ey + b.ey, a.ez + b.ez, a.hx + b.hx, a.hy + b.hy, a.hz + b.hz};
}

EMField operator-(const EMField& a, const EMField& b) {
    return {a.ex - b.ex, a.ey - b.ey, a.ez - b.ez, a.hx - b.hx, a.hy - b.hy, a.hz - b.hz};
}

EMField operator*(Complex s, const EMField& a) {
    return {s * a.ex, s * a.ey, s * a.ez, s * a.hx, s * a.hy, s * a.hz};
}

double max_abs(const EMField& f) {
    double m = 0.0;
    for (const Complex& c : f.as_array()) m = std::max(m, std::abs(c));
    return m;
}

namespace {

constexpr double inv_2pi = 0.5 / pi;

struct Medium {
    double n2;
    Complex k;
    Complex ne;
};

// Field at X from densities dens = (J_tau, J_z, M_tau, M_z) * ds at source frame Q.
void accumulate(const Medium& m, Vec2 d, const geometry::FramePoint& Q, const Complex dens[4], Complex out[6]) {
    const double r = norm(d);
    const double lr = std::log(r);
    const kernels::MediumValues mv = kernels::medium_values(m.k, r, lr);
    const Complex gr = mv.h + inv_2pi / (r * r);
    const Complex S = mv.g0;
    const Complex Sx = -gr * d.x, Sy = -gr * d.y;
    const double dtq = dot(d, Q.tangent), dnq = dot(d, Q.normal);
    const Complex D = gr * dnq, T = gr * dtq;
    const Complex f = (m.k * m.k * mv.g0 - 2.0 * gr) * dtq / (r * r);
    const Complex Tx = f * d.x + gr * Q.tangent.x, Ty = f * d.y + gr * Q.tangent.y;
    const double t1 = Q.tangent.x, t2 = Q.tangent.y;
    const Complex a = dens[0], b = dens[1], c = dens[2], e = dens[3];
    const Complex ne = m.ne, n2 = m.n2, kb2 = m.n2 - m.ne * m.ne;
    out[0] += I * Tx * a + ne * Sx * b - I * n2 * S * t1 * a - Sy * e + I * ne * S * t2 * c;
    out[1] += I * Ty * a + ne * Sy * b - I * n2 * S * t2 * a + Sx * e - I * ne * S * t1 * c;
    out[2] += -ne * T * a - I * kb2 * S * b + D * c;
    out[3] += -I * Tx * c - ne * Sx * e + I * n2 * S * t1 * c - n2 * Sy * b + I * ne * n2 * S * t2 * a;
    out[4] += -I * Ty * c - ne * Sy * e + I * n2 * S * t2 * c + n2 * Sx * b - I * ne * n2 * S * t1 * a;
    out[5] += ne * T * c + I * kb2 * S * e + n2 * D * a;
}

Vec2 offset_from(Vec2 X, const geometry::FramePoint& Q) { return (X - Q.anchor) - Q.offset; }

double panel_distance(const Discretization& disc, std::size_t b, Vec2 X) {
    // Sampled minimum refined by ternary search.
    constexpr int samples = 64;
    double best = std::numeric_limits<double>::infinity();
    int ib = 0;
    for (int s = 0; s <= samples; ++s) {
        const double x = -1.0 + 2.0 * s / samples;
        const double dd = norm(offset_from(X, disc.panel_point(b, x)));
        if (dd < best) {
            best = dd;
            ib = s;
        }
    }
    double lo = -1.0 + 2.0 * std::max(0, ib - 1) / samples;
    double hi = -1.0 + 2.0 * std::min(samples, ib + 1) / samples;
    for (int it = 0; it < 60; ++it) {
        const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (norm(offset_from(X, disc.panel_point(b, m1))) < norm(offset_from(X, disc.panel_point(b, m2)))) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    return std::min(best, norm(offset_from(X, disc.panel_point(b, 0.5 * (lo + hi)))));
}

}  // namespace

double relative_boundary_distance(const Discretization& disc, Vec2 X) {
    double rel = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < disc.panel_count(); ++b) {
        const double len = disc.panel_arclength(b);
        const Vec2 c = disc.panel_point(b, 0.0).position();
        if (norm(X - c) > 2.0 * len + rel * len) continue;
        rel = std::min(rel, panel_distance(disc, b, X) / len);
    }
    return rel;
}

std::size_t locate_region(const Discretization& disc, Vec2 X) {
    for (const geometry::Interface& f : disc.interfaces()) {
        double winding = 0.0;
        for (const geometry::Panel& pan : f.panels) {
            const std::size_t gp = disc.nodes()[pan.first_node].panel;
            constexpr int seg = 16;
            Vec2 prev = disc.panel_point(gp, -1.0).position() - X;
            for (int s = 1; s <= seg; ++s) {
                const Vec2 cur = disc.panel_point(gp, -1.0 + 2.0 * s / seg).position() - X;
                winding += std::atan2(cross(prev, cur), dot(prev, cur));
                prev = cur;
            }
        }
        if (std::abs(winding) > pi) return f.region;
    }
    return 0;
}

EMField eval_field(const Discretization& disc, const PhysicalConfig& phys, Complex ne, const assembly::DensityVector& x,
                   Vec2 X, std::size_t region, const FieldOptions& opt) {
    if (static_cast<std::size_t>(x.size()) != disc.unknown_count()) throw DomainError("eval_field: density size");
    const std::vector<double> n = phys.region_indices();
    if (region >= n.size()) throw DomainError("eval_field: unknown region");
    const auto ws = kernels::WavenumberSet::make(n, ne);
    const Medium m{n[region] * n[region], ws.k[region], ne};
    const std::size_t p = disc.p();
    Complex out[6] = {};
    std::vector<double> basis(p);
    for (std::size_t ia = 0; ia < disc.interfaces().size(); ++ia) {
        const geometry::Interface& f = disc.interfaces()[ia];
        if (region != 0 && f.region != region) continue;
        for (const geometry::Panel& pan : f.panels) {
            const std::size_t gp = disc.nodes()[pan.first_node].panel;
            const double len = disc.panel_arclength(gp);
            const Vec2 c = disc.panel_point(gp, 0.0).position();
            std::vector<std::array<Complex, 4>> dens(p);
            for (std::size_t q = 0; q < p; ++q) {
                for (int cc = 0; cc < 4; ++cc) dens[q][cc] = x(disc.unknown_index_of_node(pan.first_node + q, cc));
            }
            if (norm(X - c) >= opt.near_factor * len) {
                for (std::size_t q = 0; q < p; ++q) {
                    const geometry::Node& nd = disc.nodes()[pan.first_node + q];
                    Complex dw[4];
                    for (int cc = 0; cc < 4; ++cc) dw[cc] = dens[q][cc] * nd.weight;
                    accumulate(m, offset_from(X, nd.frame), nd.frame, dw, out);
                }
                continue;
            }
            if (panel_distance(disc, gp, X) < opt.exclusion * len) {
                throw NearBoundaryError("eval_field: point too close to an interface");
            }
            const double half = disc.panel_half_width(gp);
            auto integrand = [&](double xr, std::span<Complex> o) {
                const geometry::FramePoint Q = disc.panel_point(gp, xr);
                quadrature::lagrange_basis(p, xr, basis);
                Complex dw[4] = {};
                for (std::size_t q = 0; q < p; ++q) {
                    for (int cc = 0; cc < 4; ++cc) dw[cc] += basis[q] * dens[q][cc];
                }
                const double s = Q.speed * half;
                for (auto& v : dw) v *= s;
                Complex acc[6] = {};
                accumulate(m, offset_from(X, Q), Q, dw, acc);
                for (int k = 0; k < 6; ++k) o[k] = acc[k];
            };
            quadrature::AdaptiveOptions qo;
            qo.abs_tol = 0.0;
            qo.rel_tol = opt.tol;
            qo.order = 16;
            qo.max_depth = 60;
            const auto res = quadrature::adaptive_integrate(integrand, -1.0, 1.0, 6, qo);
            for (int k = 0; k < 6; ++k) out[k] += res.value[k];
        }
    }
    return {out[0], out[1], out[2], out[3], out[4], out[5]};
}

std::array<Complex, 4> transverse_from_longitudinal(double n, Complex ne, const std::array<Complex, 4>& g) {
    // curl E = i H, curl H = -i n^2 E with d/dz = i ne:
    //   i Hx + i ne Ey = dEz/dy,     i ne Hx + i n^2 Ey = dHz/dx
    //   i ne Ex - i Hy = dEz/dx,     i n^2 Ex - i ne Hy = -dHz/dy
    const double n2 = n * n;
    const Complex det1 = I * I * n2 - (I * ne) * (I * ne);
    const Complex hx = (I * n2 * g[1] - I * ne * g[2]) / det1;
    const Complex ey = (I * g[2] - I * ne * g[1]) / det1;
    const Complex det2 = (I * ne) * (-I * ne) - (-I) * (I * n2);
    const Complex ex = ((-I * ne) * g[0] - (-I) * (-g[3])) / det2;
    const Complex hy = ((I * ne) * (-g[3]) - (I * n2) * g[0]) / det2;
    return {ex, ey, hx, hy};
}

EMField point_source_field(const PointSource& src, double n, Complex ne, Vec2 X) {
    const Complex k = kernels::transverse_wavenumber(n, ne);
    auto green = [&](Vec2 s, Complex& val, Complex& gx, Complex& gy) {
        const Vec2 d = X - s;
        const double r = norm(d);
        const specfun::Hankel01 h = specfun::hankel01(k * r);
        val = 0.25 * I * h.h0;
        const Complex dr = -0.25 * I * k * h.h1;
        gx = dr * d.x / r;
        gy = dr * d.y / r;
    };
    Complex ez, ezx, ezy, hz, hzx, hzy;
    green(src.e_source, ez, ezx, ezy);
    green(src.h_source, hz, hzx, hzy);
    ez *= src.e_amplitude;
    ezx *= src.e_amplitude;
    ezy *= src.e_amplitude;
    hz *= src.h_amplitude;
    hzx *= src.h_amplitude;
    hzy *= src.h_amplitude;
    const auto t = transverse_from_longitudinal(n, ne, {ezx, ezy, hzx, hzy});
    return {t[0], t[1], ez, t[2], t[3], hz};
}

assembly::DensityVector point_source_rhs(const Discretization& disc, const PhysicalConfig& phys, Complex ne,
                                         const PointSource& outer, const std::vector<PointSource>& inner) {
    const std::vector<double> n = phys.region_indices();
    if (inner.size() != disc.interfaces().size()) throw DomainError("point_source_rhs: one inner source per interface");
    assembly::DensityVector b(disc.unknown_count());
    for (std::size_t j = 0; j < disc.node_count(); ++j) {
        const geometry::Node& nd = disc.nodes()[j];
        const std::size_t region = disc.interfaces()[nd.interface].region;
        const Vec2 X = nd.frame.position();
        const EMField f0 = point_source_field(outer, n[0], ne, X);
        const EMField fi = point_source_field(inner[nd.interface], n[region], ne, X);
        const Vec2 t = nd.frame.tangent;
        const EMField df = f0 - fi;
        b(disc.unknown_index_of_node(j, 0)) = df.hz;
        b(disc.unknown_index_of_node(j, 1)) = -(t.x * df.hx + t.y * df.hy);
        b(disc.unknown_index_of_node(j, 2)) = df.ez;
        b(disc.unknown_index_of_node(j, 3)) = -(t.x * df.ex + t.y * df.ey);
    }
    return b;
}

BoundaryMismatch boundary_mismatch(const Discretization& disc, const PhysicalConfig& phys, Complex ne,
                                   const assembly::DensityVector& x, const FieldOptions& opt) {
    BoundaryMismatch bm;
    double jz = 0.0, jt = 0.0, hz = 0.0, ht = 0.0;
    for (std::size_t gp = 0; gp < disc.panel_count(); ++gp) {
        const std::size_t region = disc.interfaces()[disc.panel_interface(gp)].region;
        const geometry::FramePoint P = disc.panel_point(gp, 0.0);
        const double delta = 2.0 * opt.exclusion * disc.panel_arclength(gp);
        auto trace = [&](double side, std::size_t reg) {
            EMField e[5];
            for (int j = 0; j < 5; ++j) {
                const Vec2 X = P.position() + (side * (j + 1) * delta) * P.normal;
                e[j] = eval_field(disc, phys, ne, x, X, reg, opt);
                bm.field_scale = std::max(bm.field_scale, max_abs(e[j]));
            }
            // Quartic extrapolation to the boundary.
            return Complex(5.0) * (e[0] - e[3]) + Complex(10.0) * (e[2] - e[1]) + e[4];
        };
        const EMField out = trace(1.0, 0);
        const EMField in = trace(-1.0, region);
        const EMField d = out - in;
        const Vec2 t = P.tangent;
        jz = std::max(jz, std::abs(d.ez));
        hz = std::max(hz, std::abs(d.hz));
        jt = std::max(jt, std::abs(t.x * d.ex + t.y * d.ey));
        ht = std::max(ht, std::abs(t.x * d.hx + t.y * d.hy));
    }
    const double s = bm.field_scale > 0.0 ? bm.field_scale : 1.0;
    bm.ez = jz / s;
    bm.etau = jt / s;
    bm.hz = hz / s;
    bm.htau = ht / s;
    return bm;
}

FieldGrid field_grid(const Discretization& disc, const PhysicalConfig& phys, Complex ne,
                     const assembly::DensityVector& x, Vec2 lo, Vec2 hi, std::size_t nx, std::size_t ny,
                     const FieldOptions& opt) {
    if (nx == 0 || ny == 0) throw ValidationError("field_grid: zero resolution");
    if (!(hi.x > lo.x && hi.y > lo.y)) throw ValidationError("field_grid: empty bounding box");
    FieldGrid g;
    g.x0 = lo.x;
    g.y0 = lo.y;
    g.x1 = hi.x;
    g.y1 = hi.y;
    g.nx = nx;
    g.ny = ny;
    g.region.assign(nx * ny, -1);
    g.field.assign(nx * ny, EMField{});
    double emax = 0.0;
    for (std::size_t iy = 0; iy < ny; ++iy) {
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const Vec2 X{nx == 1 ? lo.x : lo.x + (hi.x - lo.x) * ix / double(nx - 1),
                         ny == 1 ? lo.y : lo.y + (hi.y - lo.y) * iy / double(ny - 1)};
            const std::size_t idx = iy * nx + ix;
            if (relative_boundary_distance(disc, X) < opt.exclusion) continue;
            const std::size_t reg = locate_region(disc, X);
            g.region[idx] = static_cast<int>(reg);
            g.field[idx] = eval_field(disc, phys, ne, x, X, reg, opt);
            const EMField& f = g.field[idx];
            emax = std::max(emax, std::sqrt(std::norm(f.ex) + std::norm(f.ey) + std::norm(f.ez)));
        }
    }
    if (emax > 0.0) {
        g.normalization = 1.0 / emax;
        for (EMField& f : g.field) f = Complex(g.normalization) * f;
    }
    return g;
}

}  // namespace bimode::fields
