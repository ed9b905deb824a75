#pragma once

#include "bimode/common.hpp"

namespace bimode::specfun {

struct Hankel01 {
    Complex h0;
    Complex h1;
};

struct BesselJ01 {
    Complex j0;
    Complex j1;
};

// H = smooth + log_coeff * log(r)
struct LogSplitValue {
    Complex smooth;
    Complex log_coeff;
};

// H1 = inv_coeff / r + log_coeff * log(r) + smooth
struct LogSplitValue1 {
    Complex inv_coeff;
    Complex smooth;
    Complex log_coeff;
};

struct HankelLogSplit {
    LogSplitValue order0;
    LogSplitValue1 order1;
};

// Pieces of the small-argument expansion at z = k r, with the r-dependence
// of the logarithm pulled out:
//   H0(kr) = smooth0 + (2i/pi) j0 log r
//   H1(kr) = -2i/(pi k r) + (2i/pi) j1 log r + smooth1
// j1_over_z = J1(z)/z, smooth1_over_z = smooth1/z stay finite as z -> 0.
struct SeriesParts {
    Complex j0;
    Complex smooth0;
    Complex j1_over_z;
    Complex smooth1_over_z;
};

inline constexpr double series_radius = 2.0;
inline constexpr double asymptotic_radius = 25.0;

// H0^(1)(z), H1^(1)(z). Supported for z != 0 with -pi/4 <= arg z <= pi.
Hankel01 hankel01(Complex z);

// J0(z), J1(z) for any complex z.
BesselJ01 bessel_j01(Complex z);

HankelLogSplit hankel_log_split(Complex k, double r);

// Requires |k r| <= series_radius (not checked in release hot paths).
SeriesParts series_parts(Complex k, double r);

namespace detail {
Hankel01 hankel01_series(Complex z);
Hankel01 hankel01_laplace(Complex z);
Hankel01 hankel01_asymptotic(Complex z);
}  // namespace detail

}  // namespace bimode::specfun
