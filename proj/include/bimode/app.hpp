#pragma once

#include "bimode/fields.hpp"
#include "bimode/modefinder.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bimode::app {

inline constexpr const char* config_schema = "bimode.config/1";
inline constexpr const char* report_schema = "bimode.report/1";
inline constexpr const char* grid_schema = "bimode.grid/1";
inline constexpr const char* table_schema = "bimode.table/1";

// Lengths in the config are micrometres; they are converted once at ingestion.
struct InclusionConfig {
    geometry::CurveSpec curve;  // metres
    double n = 1.0;
    std::size_t panels = 0;         // 0: use the discretization default
    std::size_t corner_levels = 0;  // polygons; resolved from the point count
};

struct DiscretizationConfig {
    std::size_t p = 10;
    std::size_t panels = 5;          // per smooth inclusion
    std::size_t corner_levels = 0;   // dyadic levels at each polygon corner; 0: chunks/3 - 1
};

struct SearchConfig {
    std::vector<modefinder::Window> windows;
    std::vector<std::array<Complex, 3>> guesses;
    std::size_t samples = 41;
    double tol = 1e-13;
    double dedupe = 1e-11;
    double null_threshold = 1e-10;
    std::uint64_t seed = modefinder::default_seed;
};

struct Config {
    std::string name;
    PhysicalConfig phys;
    std::vector<InclusionConfig> inclusions;
    DiscretizationConfig disc;
    SearchConfig search;
    nlohmann::json source;  // as ingested, echoed into reports
};

Config parse_config(const nlohmann::json& j);
Config load_config(const std::string& path);
nlohmann::json config_to_json(const Config& c);

struct PanelLayout {
    std::size_t panels = 0;         // smooth: panels per curve; polygon: base panels per side
    std::size_t corner_levels = 0;
};

// Layout for `points` nodes on a smooth curve or per polygon side. A polygon side
// with c = points/p chunks gets L dyadic levels at each end and B = c - 2L base
// panels; corner_levels = 0 selects L = c/3 - 1.
PanelLayout panels_for_points(const geometry::CurveSpec& curve, std::size_t points, std::size_t p,
                              std::size_t corner_levels);

// Set every inclusion to `points` nodes (per curve, or per side for polygons).
void set_resolution(Config& c, std::size_t points);

geometry::Discretization build_discretization(const Config& c);

// Geometry presets (lengths in metres).
Config example1_config();
Config hexagon_ring_config(double perturbation = 0.0);
Config square_config(std::size_t points_per_side = 150);
Config elliptic_core_config();

struct ModeRecord {
    modefinder::Mode mode;
    std::array<Complex, 3> guesses{};
};

struct RunReport {
    std::vector<ModeRecord> modes;
    modefinder::ScanResult scan;
    nlohmann::json settings;
    double seconds = 0.0;
    std::uint64_t seed = 0;
    std::size_t unknowns = 0;
};

RunReport run_modes(const Config& c);
nlohmann::json report_to_json(const RunReport& r, const Config& c);

struct PointSourceResult {
    double max_relative_error = 0.0;
    int gmres_iterations = 0;
    bool gmres_converged = false;
    double gmres_true_residual = 0.0;
    std::size_t unknowns = 0;
};

// Exterior field from a source inside the first inclusion, interior fields from
// sources outside; error measured at test points at least half a panel length
// from the interfaces.
PointSourceResult run_point_source_verification(const Config& c, Complex probe_ne, double gmres_tol = 1e-14,
                                                int max_iter = 200);

struct ConvergenceRow {
    std::size_t points = 0;
    Complex ne;
    double relative_error = 0.0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    double slope = 0.0;  // least-squares log-log slope over rows with nonzero error
};

// Mode continued from `guess` along the ladder; the finest run is the reference.
ConvergenceTable run_convergence_study(const Config& c, const std::vector<std::size_t>& ladder, Complex guess);

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct SommerfeldResult {
    double max_residual = 0.0;
    std::vector<double> residuals;
};

// Axial integral of the 3D outgoing Green's function against exp(i beta z)
// compared with (i/4) H0(k_beta r).
SommerfeldResult run_sommerfeld_check(Complex k, double beta, const std::vector<double>& separations);

struct FiberMode {
    double ne = 0.0;
    int order = 0;          // azimuthal order
    std::string family;     // TE, TM or hybrid
    std::size_t degeneracy = 1;
};

// Guided modes of a step-index fiber, descending in ne.
std::vector<FiberMode> fiber_dispersion_oracle(double radius, double n_cladding, double n_core, double wavelength);

// Characteristic function used by the oracle (pole free).
double fiber_characteristic(int order, double ne, double radius, double n_cladding, double n_core,
                            double wavelength);

void write_grid_csv(const fields::FieldGrid& g, const std::string& path, double length_scale);
void write_convergence_csv(const ConvergenceTable& t, const std::string& path);

}  // namespace bimode::app
