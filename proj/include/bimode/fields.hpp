#pragma once

#include "bimode/assembly.hpp"

#include <array>
#include <optional>
#include <vector>

namespace bimode::fields {

// Nondimensional components; H is pre-scaled by sqrt(mu0/eps0).
struct EMField {
    Complex ex, ey, ez, hx, hy, hz;

    std::array<Complex, 6> as_array() const { return {ex, ey, ez, hx, hy, hz}; }
};

EMField operator+(const EMField& a, const EMField& b);
EMField operator-(const EMField& a, const EMField& b);
EMField operator*(Complex s, const EMField& a);
double max_abs(const EMField& f);

struct FieldOptions {
    double near_factor = 1.5;      // adaptive panel integration when closer than this * panel length
    double exclusion = 1e-3;       // near-boundary error below this * local panel length
    double tol = 1e-13;
};

class NearBoundaryError : public Error {
public:
    using Error::Error;
};

// Fields at a point in region `region` (0 = cladding) from densities x.
EMField eval_field(const geometry::Discretization& disc, const PhysicalConfig& phys, Complex ne,
                   const assembly::DensityVector& x, Vec2 point, std::size_t region, const FieldOptions& opt = {});

// Distance from point to the nearest interface, relative to the local panel length.
double relative_boundary_distance(const geometry::Discretization& disc, Vec2 point);

// Region containing point (winding test on the panel polylines).
std::size_t locate_region(const geometry::Discretization& disc, Vec2 point);

// E and H transverse parts from the z-components' gradients (Maxwell curl relations).
// grad = {dEz/dx, dEz/dy, dHz/dx, dHz/dy}; returns {ex, ey, hx, hy}.
std::array<Complex, 4> transverse_from_longitudinal(double n, Complex ne, const std::array<Complex, 4>& grad);

struct BoundaryMismatch {
    double ez = 0.0, etau = 0.0, hz = 0.0, htau = 0.0;  // max jump / field scale
    double field_scale = 0.0;
};

// Two-sided extrapolation of the tangential traces at panel midpoints.
BoundaryMismatch boundary_mismatch(const geometry::Discretization& disc, const PhysicalConfig& phys, Complex ne,
                                   const assembly::DensityVector& x, const FieldOptions& opt = {});

struct FieldGrid {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
    std::size_t nx = 0, ny = 0;
    std::vector<int> region;  // row-major (iy * nx + ix); -1 = masked near boundary
    std::vector<EMField> field;
    double normalization = 1.0;  // factor applied so that max |E| = 1
};

// bbox in nondimensional units.
FieldGrid field_grid(const geometry::Discretization& disc, const PhysicalConfig& phys, Complex ne,
                     const assembly::DensityVector& x, Vec2 lo, Vec2 hi, std::size_t nx, std::size_t ny,
                     const FieldOptions& opt = {});

// Exact field of line sources: E_z = a G(X - s_e), H_z = b G(X - s_h) in a
// medium of index n (nondimensional).
struct PointSource {
    Vec2 e_source;
    Vec2 h_source;
    Complex e_amplitude = 1.0;
    Complex h_amplitude = 1.0;
};

EMField point_source_field(const PointSource& src, double n, Complex ne, Vec2 point);

// Right-hand side b = [H_z0 - H_zi, -(H_tau0 - H_taui), E_z0 - E_zi, -(E_tau0 - E_taui)]
// for exterior field `outer` (region 0) and interior fields `inner[i]` per interface.
assembly::DensityVector point_source_rhs(const geometry::Discretization& disc, const PhysicalConfig& phys, Complex ne,
                                         const PointSource& outer, const std::vector<PointSource>& inner);

}  // namespace bimode::fields
