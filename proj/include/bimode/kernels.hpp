#pragma once

#include "bimode/common.hpp"
#include "bimode/geometry.hpp"

#include <array>
#include <vector>

namespace bimode::kernels {

// sqrt(n^2 - ne^2) on the branch arg in (-pi/4, 3pi/4]: Im >= 0 for every real
// ne, and the analytic (outgoing) continuation for leaky ne just above the axis.
Complex transverse_wavenumber(double n, Complex ne);

struct WavenumberSet {
    Complex ne;
    std::vector<double> n;   // region 0 = cladding
    std::vector<Complex> k;  // nondimensional transverse wavenumbers

    static WavenumberSet make(const std::vector<double>& indices, Complex ne, double guard = 1e-10);
    double n2(std::size_t region) const { return n[region] * n[region]; }
};

enum class KernelKind { S, D, T, S_nu, S_tau, T_tau, S_tau_nu, S_tau_tau };

// Geometric data of a target/source pair, d = P - Q.
struct PairGeometry {
    double r = 0.0;
    double log_r = 0.0;
    double inv_2pi_r2 = 0.0;
    double dnq = 0.0;  // d . nu(Q)
    double dtq = 0.0;  // d . tau(Q)
    double dnp = 0.0;  // d . nu(P)
    double dtp = 0.0;  // d . tau(P)
    double tp_nq = 0.0;
    double tp_tq = 0.0;
    double c = 0.0;  // (d.tau_P)(d.tau_Q)/r^2
};

PairGeometry pair_geometry(Vec2 d, const geometry::FramePoint& target, const geometry::FramePoint& source);

// Single-medium primitives at separation r:
//   g0 = (i/4) H0(kr),  h = (i/4) k H1(kr)/r - 1/(2 pi r^2).
struct MediumValues {
    Complex g0;
    Complex h;
};

MediumValues medium_values(Complex k, double r, double log_r);

// value = smooth + log_coeff * log r + principal. principal is the
// k-independent Laplace part (nonzero for D, T, S_nu, S_tau, T_tau).
struct KernelValue {
    Complex smooth;
    Complex log_coeff;
    Complex principal;
    Complex value(double log_r) const { return smooth + log_coeff * log_r + principal; }
};

KernelValue kernel_eval(KernelKind kind, Complex k, const PairGeometry& g);

// w0 K(k0) - w1 K(k1) with the Laplace parts combined analytically as (w0 - w1) principal.
KernelValue difference_kernel_eval(KernelKind kind, Complex k0, Complex k1, Complex w0, Complex w1,
                                   const PairGeometry& g);

// Row-major 4x4: rows (H_z, -H_tau, E_z, -E_tau), columns (J_tau, J_z, M_tau, M_z).
using Block = std::array<Complex, 16>;

// Same-interface kernel block (exterior minus interior of region `region`).
void interface_block(const WavenumberSet& ws, std::size_t region, const PairGeometry& g, Block& out);

// Kernel block for a source on another interface (exterior kernels only).
void exterior_block(const WavenumberSet& ws, const PairGeometry& g, Block& out);

}  // namespace bimode::kernels
