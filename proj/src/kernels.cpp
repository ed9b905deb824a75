#include "bimode/kernels.hpp"

#include "bimode/specfun.hpp"

namespace bimode::kernels {

namespace {
constexpr double inv_2pi = 0.5 / pi;
}

Complex transverse_wavenumber(double n, Complex ne) {
    Complex k = std::sqrt(Complex(n * n) - ne * ne);
    if (std::arg(k) <= -0.25 * pi) k = -k;
    return k;
}

WavenumberSet WavenumberSet::make(const std::vector<double>& indices, Complex ne, double guard) {
    if (indices.empty()) throw ValidationError("wavenumber set: no regions");
    WavenumberSet ws;
    ws.ne = ne;
    ws.n = indices;
    for (double n : indices) {
        if (!(n > 0.0)) throw ValidationError("wavenumber set: refractive indices must be positive");
        if (std::abs(ne - n) < guard) throw DegenerateWavenumberError("n_e too close to a material index");
        ws.k.push_back(transverse_wavenumber(n, ne));
    }
    return ws;
}

PairGeometry pair_geometry(Vec2 d, const geometry::FramePoint& P, const geometry::FramePoint& Q) {
    PairGeometry g;
    g.r = norm(d);
    if (!(g.r > 0.0)) throw DomainError("kernel: coincident target and source");
    g.log_r = std::log(g.r);
    const double r2 = g.r * g.r;
    g.inv_2pi_r2 = inv_2pi / r2;
    g.dnq = dot(d, Q.normal);
    g.dtq = dot(d, Q.tangent);
    g.dnp = dot(d, P.normal);
    g.dtp = dot(d, P.tangent);
    g.tp_nq = dot(P.tangent, Q.normal);
    g.tp_tq = dot(P.tangent, Q.tangent);
    g.c = g.dtp * g.dtq / r2;
    return g;
}

MediumValues medium_values(Complex k, double r, double log_r) {
    const Complex z = k * r;
    if (std::abs(z) <= specfun::series_radius) {
        const specfun::SeriesParts sp = specfun::series_parts(k, r);
        return {-inv_2pi * sp.j0 * log_r + 0.25 * I * sp.smooth0,
                k * k * (-inv_2pi * sp.j1_over_z * log_r + 0.25 * I * sp.smooth1_over_z)};
    }
    const specfun::Hankel01 h = specfun::hankel01(z);
    return {0.25 * I * h.h0, 0.25 * I * k * h.h1 / r - inv_2pi / (r * r)};
}

namespace {

// Kernel of `kind` from medium primitives, split into (h/g0 part, Laplace part).
void kernel_parts(KernelKind kind, Complex k, const MediumValues& m, const PairGeometry& g, Complex& regular,
                  double& principal) {
    switch (kind) {
        case KernelKind::S:
            regular = m.g0;
            principal = 0.0;
            return;
        case KernelKind::D:
            regular = m.h * g.dnq;
            principal = g.inv_2pi_r2 * g.dnq;
            return;
        case KernelKind::T:
            regular = m.h * g.dtq;
            principal = g.inv_2pi_r2 * g.dtq;
            return;
        case KernelKind::S_nu:
            regular = -m.h * g.dnp;
            principal = -g.inv_2pi_r2 * g.dnp;
            return;
        case KernelKind::S_tau:
            regular = -m.h * g.dtp;
            principal = -g.inv_2pi_r2 * g.dtp;
            return;
        case KernelKind::T_tau:
            regular = k * k * m.g0 * g.c + m.h * (g.tp_tq - 2.0 * g.c);
            principal = g.inv_2pi_r2 * (g.tp_tq - 2.0 * g.c);
            return;
        case KernelKind::S_tau_nu:
            regular = m.g0 * g.tp_nq;
            principal = 0.0;
            return;
        case KernelKind::S_tau_tau:
            regular = m.g0 * g.tp_tq;
            principal = 0.0;
            return;
    }
    throw DomainError("kernel: invalid kind");
}

}  // namespace

KernelValue kernel_eval(KernelKind kind, Complex k, const PairGeometry& g) {
    const MediumValues m = medium_values(k, g.r, g.log_r);
    Complex regular;
    double principal = 0.0;
    kernel_parts(kind, k, m, g, regular, principal);
    return {regular, 0.0, principal};
}

KernelValue difference_kernel_eval(KernelKind kind, Complex k0, Complex k1, Complex w0, Complex w1,
                                   const PairGeometry& g) {
    if (k0 == k1 && w0 == w1) return {0.0, 0.0, 0.0};
    const MediumValues m0 = medium_values(k0, g.r, g.log_r);
    const MediumValues m1 = medium_values(k1, g.r, g.log_r);
    Complex r0, r1;
    double p0 = 0.0, p1 = 0.0;
    kernel_parts(kind, k0, m0, g, r0, p0);
    kernel_parts(kind, k1, m1, g, r1, p1);
    return {w0 * r0 - w1 * r1, 0.0, (w0 - w1) * p0};
}

namespace {

// Regular (h, g0) part of one medium's block, Laplace parts excluded.
void medium_block(double n2, Complex k, Complex ne, const MediumValues& m, const PairGeometry& g, Block& b) {
    const Complex S = m.g0;
    const Complex D = m.h * g.dnq;
    const Complex T = m.h * g.dtq;
    const Complex Snu = -m.h * g.dnp;
    const Complex Stau = -m.h * g.dtp;
    const Complex Ttau = k * k * m.g0 * g.c + m.h * (g.tp_tq - 2.0 * g.c);
    const Complex kb2 = n2 - ne * ne;
    b[0] = n2 * D;
    b[1] = 0.0;
    b[2] = ne * T;
    b[3] = I * kb2 * S;
    b[4] = -I * n2 * ne * S * g.tp_nq;
    b[5] = -n2 * Snu;
    b[6] = -I * n2 * S * g.tp_tq + I * Ttau;
    b[7] = ne * Stau;
    b[8] = -ne * T;
    b[9] = -I * kb2 * S;
    b[10] = D;
    b[11] = 0.0;
    b[12] = I * n2 * S * g.tp_tq - I * Ttau;
    b[13] = -ne * Stau;
    b[14] = -I * ne * S * g.tp_nq;
    b[15] = -Snu;
}

}  // namespace

void interface_block(const WavenumberSet& ws, std::size_t region, const PairGeometry& g, Block& out) {
    const MediumValues m0 = medium_values(ws.k[0], g.r, g.log_r);
    const MediumValues m1 = medium_values(ws.k[region], g.r, g.log_r);
    Block b1;
    medium_block(ws.n2(0), ws.k[0], ws.ne, m0, g, out);
    medium_block(ws.n2(region), ws.k[region], ws.ne, m1, g, b1);
    for (int i = 0; i < 16; ++i) out[i] -= b1[i];
    const double dn2 = ws.n2(0) - ws.n2(region);
    out[0] += dn2 * g.inv_2pi_r2 * g.dnq;
    out[5] += dn2 * g.inv_2pi_r2 * g.dnp;
}

void exterior_block(const WavenumberSet& ws, const PairGeometry& g, Block& out) {
    const MediumValues m0 = medium_values(ws.k[0], g.r, g.log_r);
    medium_block(ws.n2(0), ws.k[0], ws.ne, m0, g, out);
    const double n2 = ws.n2(0);
    const double dl = g.inv_2pi_r2 * g.dnq;
    const double tl = g.inv_2pi_r2 * g.dtq;
    const double snl = -g.inv_2pi_r2 * g.dnp;
    const double stl = -g.inv_2pi_r2 * g.dtp;
    const double ttl = g.inv_2pi_r2 * (g.tp_tq - 2.0 * g.c);
    out[0] += n2 * dl;
    out[2] += ws.ne * tl;
    out[5] += -n2 * snl;
    out[6] += I * ttl;
    out[7] += ws.ne * stl;
    out[8] += -ws.ne * tl;
    out[10] += dl;
    out[12] += -I * ttl;
    out[13] += -ws.ne * stl;
    out[15] += -snl;
}

}  // namespace bimode::kernels
