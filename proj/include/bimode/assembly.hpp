#pragma once

#include "bimode/geometry.hpp"
#include "bimode/kernels.hpp"
#include "bimode/physics.hpp"

#include <Eigen/Dense>

namespace bimode::assembly {

struct AssemblyOptions {
    double near_factor = 1.5;        // adaptive when dist(P, panel centre) < near_factor * panel length
    double oscillation_limit = 4.0;  // adaptive when |k| * panel length exceeds this
    double tol = 1e-13;
    unsigned threads = 0;            // 0: BIMODE_THREADS or hardware concurrency
};

struct SystemMatrix {
    Eigen::MatrixXcd m;
    Complex ne;
};

using DensityVector = Eigen::VectorXcd;

unsigned thread_count(unsigned requested);

// Fills m (resized if needed) with M(ne) = D + A(ne).
void assemble_into(Eigen::MatrixXcd& m, const geometry::Discretization& disc, const PhysicalConfig& phys, Complex ne,
                   const AssemblyOptions& opt = {});

SystemMatrix assemble(const geometry::Discretization& disc, const PhysicalConfig& phys, Complex ne,
                      const AssemblyOptions& opt = {});

// The identity part D alone.
Eigen::VectorXcd diagonal_part(const geometry::Discretization& disc, const PhysicalConfig& phys);

DensityVector apply(const SystemMatrix& M, const DensityVector& x);

}  // namespace bimode::assembly
