#pragma once

#include "bimode/assembly.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bimode::modefinder {

struct ProbeVectors {
    Eigen::VectorXcd u;
    Eigen::VectorXcd v;
    std::uint64_t seed = 0;

    // Entries: independent standard normal real and imaginary parts (mt19937_64).
    static ProbeVectors make(std::size_t n, std::uint64_t seed);
};

inline constexpr std::uint64_t default_seed = 20240611;

struct ObjectiveValue {
    Complex f;
    bool singular = false;  // exact zero pivot: ne is a root
};

// f(ne) = 1/(u^T M(ne)^{-1} v) with a reusable matrix workspace.
class Objective {
public:
    Objective(const geometry::Discretization& disc, const PhysicalConfig& phys, ProbeVectors probes,
              assembly::AssemblyOptions opt = {});

    ObjectiveValue evaluate(Complex ne);
    Complex operator()(Complex ne) { return evaluate(ne).f; }
    std::size_t evaluations() const { return evaluations_; }
    const ProbeVectors& probes() const { return probes_; }

private:
    const geometry::Discretization& disc_;
    PhysicalConfig phys_;
    ProbeVectors probes_;
    assembly::AssemblyOptions opt_;
    Eigen::MatrixXcd work_;
    std::size_t evaluations_ = 0;
};

ObjectiveValue objective(const geometry::Discretization& disc, const PhysicalConfig& phys, Complex ne,
                         const ProbeVectors& probes, const assembly::AssemblyOptions& opt = {});

struct MullerOptions {
    double tol = 1e-13;  // on |step| / max(1, |x|)
    int max_iter = 50;
    double f_floor = 0.0;
};

struct MullerResult {
    Complex root;
    Complex f_root;
    int iterations = 0;
    bool converged = false;
    std::string message;
    std::vector<Complex> history;
};

using ScalarFunction = std::function<Complex(Complex)>;

MullerResult muller_iterate(const ScalarFunction& f, std::array<Complex, 3> guesses, const MullerOptions& opt = {});

struct Window {
    Complex lo;
    Complex hi;
    bool is_real() const { return lo.imag() == hi.imag(); }
};

struct ScanResult {
    std::vector<Complex> points;
    std::vector<double> abs_f;
    std::vector<std::array<Complex, 3>> candidates;
};

// Real window: `samples` equispaced points; complex window: samples x samples grid.
// Candidates: strict local minima of |f| with neighbours as guess triple.
ScanResult scan_objective(const ScalarFunction& f, const Window& window, std::size_t samples);

struct NullspaceOptions {
    std::size_t full_svd_limit = 3000;  // larger matrices use LU subspace iteration
    std::size_t block = 6;
    int max_iter = 200;
    std::uint64_t seed = 7;
};

struct NullspaceResult {
    std::size_t multiplicity = 0;
    Eigen::MatrixXcd basis;                  // orthonormal columns
    std::vector<double> smallest_singular;   // ascending
    double sigma_max = 0.0;
    bool full_svd = true;
};

NullspaceResult nullspace(const Eigen::MatrixXcd& M, double rel_threshold, const NullspaceOptions& opt = {});

Eigen::VectorXcd solve_dense(const Eigen::MatrixXcd& M, const Eigen::VectorXcd& b);

struct GmresResult {
    Eigen::VectorXcd x;
    int iterations = 0;
    std::vector<double> residuals;  // Arnoldi relative residual after each iteration
    double true_residual = 0.0;     // ||b - M x|| / ||b|| at exit
    bool converged = false;
};

using LinearOperator = std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

GmresResult gmres(const LinearOperator& apply, const Eigen::VectorXcd& b, double tol, int max_iter, int restart = 0);
GmresResult gmres(const Eigen::MatrixXcd& M, const Eigen::VectorXcd& b, double tol, int max_iter, int restart = 0);

struct Mode {
    Complex ne;
    std::size_t multiplicity = 0;
    Eigen::MatrixXcd basis;
    double sigma_ratio = 0.0;  // sigma_min / sigma_max
    std::vector<double> smallest_singular;
    double sigma_max = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct ModeSearchOptions {
    MullerOptions muller;
    double null_threshold = 1e-10;
    NullspaceOptions nullspace;
    assembly::AssemblyOptions assembly;
    std::uint64_t seed = default_seed;
};

// Muller from three guesses, then the singular-value confirmation pass.
Mode find_mode(const geometry::Discretization& disc, const PhysicalConfig& phys, std::array<Complex, 3> guesses,
               const ModeSearchOptions& opt = {});

}  // namespace bimode::modefinder
