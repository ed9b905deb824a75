#include "bimode/app.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

using namespace bimode;
using nlohmann::json;

namespace {

struct Source {
    std::string config;
    std::string preset;
    double perturbation = 0.03;
    std::size_t points = 0;
    std::int64_t seed = -1;

    void add(CLI::App* sub) {
        sub->add_option("-c,--config", config, "Config file (bimode.config/1 JSON)");
        sub->add_option("--preset", preset, "Built-in geometry")
            ->check(CLI::IsMember({"fiber", "hexring", "perturbed", "square", "elliptic"}));
        sub->add_option("--perturbation", perturbation, "Perturbation amplitude for the perturbed preset");
        sub->add_option("--points", points, "Nodes per curve (per side for polygons)");
        sub->add_option("--seed", seed, "Probe-vector seed");
    }

    app::Config load() const {
        app::Config c;
        if (!config.empty()) {
            c = app::load_config(config);
        } else if (preset == "fiber") {
            c = app::example1_config();
        } else if (preset == "hexring") {
            c = app::hexagon_ring_config();
        } else if (preset == "perturbed") {
            c = app::hexagon_ring_config(perturbation);
        } else if (preset == "square") {
            c = app::square_config();
        } else if (preset == "elliptic") {
            c = app::elliptic_core_config();
        } else {
            throw ConfigError("either --config or --preset is required");
        }
        if (points) app::set_resolution(c, points);
        if (seed >= 0) c.search.seed = static_cast<std::uint64_t>(seed);
        return c;
    }
};

void emit(const json& j, const std::string& out) {
    if (out.empty()) {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream f(out);
    if (!f) throw Error("cannot write " + out);
    f << j.dump(2) << "\n";
}

Complex parse_complex(const std::vector<double>& v) {
    if (v.size() == 1) return {v[0], 0.0};
    if (v.size() == 2) return {v[0], v[1]};
    throw ConfigError("complex value needs one or two numbers");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Waveguide mode solver"};
    cli.require_subcommand(1);

    Source modes_src;
    std::string modes_out;
    std::vector<double> modes_guess;
    auto* modes = cli.add_subcommand("modes", "Find modes in the configured windows");
    modes_src.add(modes);
    modes->add_option("-o,--out", modes_out, "Report path (default stdout)");
    modes->add_option("--guess", modes_guess, "Extra starting point: re [im]")->expected(1, 2);

    Source verify_src;
    std::vector<double> verify_ne{1.451};
    double verify_tol = 1e-14, verify_max_error = 1e-6;
    int verify_max_iter = 40;
    auto* verify = cli.add_subcommand("verify", "Point-source accuracy check");
    verify_src.add(verify);
    verify->add_option("--ne", verify_ne, "Probe effective index: re [im]")->expected(1, 2);
    verify->add_option("--tol", verify_tol, "GMRES relative tolerance");
    verify->add_option("--max-error", verify_max_error, "Fail above this relative field error");
    verify->add_option("--max-iter", verify_max_iter, "Fail above this GMRES iteration count");

    Source conv_src;
    std::vector<std::size_t> ladder;
    std::vector<double> conv_guess;
    std::string conv_csv;
    auto* conv = cli.add_subcommand("converge", "Self-convergence of one mode over a resolution ladder");
    conv_src.add(conv);
    conv->add_option("--ladder", ladder, "Point counts, increasing")->required()->delimiter(',');
    conv->add_option("--guess", conv_guess, "Starting effective index: re [im]")->required()->expected(1, 2);
    conv->add_option("--csv", conv_csv, "Table output path");

    std::vector<double> som_k{2.0};
    double som_beta = 1.0, som_max = 1e-9;
    std::vector<double> som_sep{0.1, 0.7, 3.0, 10.0};
    auto* som = cli.add_subcommand("sommerfeld", "Axial-integral reduction check");
    som->add_option("--k", som_k, "Wavenumber: re [im]")->expected(1, 2);
    som->add_option("--beta", som_beta, "Axial wavenumber");
    som->add_option("--sep", som_sep, "Separations")->delimiter(',');
    som->add_option("--max", som_max, "Fail above this residual");

    double orc_radius = 25.0, orc_n0 = 1.444, orc_n1 = 1.4475, orc_lambda = 1.5;
    auto* orc = cli.add_subcommand("oracle", "Step-index fiber modes from the characteristic equation");
    orc->add_option("--radius-um", orc_radius, "Core radius");
    orc->add_option("--n0", orc_n0, "Cladding index");
    orc->add_option("--n1", orc_n1, "Core index");
    orc->add_option("--lambda-um", orc_lambda, "Vacuum wavelength");

    Source map_src;
    std::size_t map_mode = 0, map_nx = 101, map_ny = 101;
    std::vector<double> map_bbox, map_guess;
    std::string map_out = "field.csv";
    auto* fmap = cli.add_subcommand("field-map", "Field grid of one mode");
    map_src.add(fmap);
    fmap->add_option("--mode", map_mode, "Index into the mode list");
    fmap->add_option("--guess", map_guess, "Extra starting point: re [im]")->expected(1, 2);
    fmap->add_option("--nx", map_nx, "Grid columns");
    fmap->add_option("--ny", map_ny, "Grid rows");
    fmap->add_option("--bbox", map_bbox, "xmin ymin xmax ymax in micrometres")->required()->expected(4);
    fmap->add_option("-o,--out", map_out, "CSV path");

    CLI11_PARSE(cli, argc, argv);

    try {
        if (*modes) {
            app::Config c = modes_src.load();
            if (!modes_guess.empty()) {
                const Complex g = parse_complex(modes_guess);
                c.search.guesses.push_back({g - 1e-8, g + 1e-8, g});
            }
            const app::RunReport r = app::run_modes(c);
            emit(app::report_to_json(r, c), modes_out);
            return 0;
        }
        if (*verify) {
            const app::Config c = verify_src.load();
            const auto r = app::run_point_source_verification(c, parse_complex(verify_ne), verify_tol);
            const bool ok = r.gmres_converged && r.gmres_iterations <= verify_max_iter &&
                            r.max_relative_error <= verify_max_error;
            emit({{"schema", app::report_schema},
                  {"unknowns", r.unknowns},
                  {"gmres_iterations", r.gmres_iterations},
                  {"gmres_converged", r.gmres_converged},
                  {"gmres_true_residual", r.gmres_true_residual},
                  {"max_relative_error", r.max_relative_error},
                  {"pass", ok}},
                 "");
            return ok ? 0 : 1;
        }
        if (*conv) {
            const app::Config c = conv_src.load();
            const auto t = app::run_convergence_study(c, ladder, parse_complex(conv_guess));
            if (!conv_csv.empty()) app::write_convergence_csv(t, conv_csv);
            json rows = json::array();
            for (const auto& r : t.rows) {
                rows.push_back({{"points", r.points}, {"ne", {r.ne.real(), r.ne.imag()}}, {"relative_error", r.relative_error}});
            }
            emit({{"schema", app::table_schema}, {"rows", rows}, {"slope", t.slope}}, "");
            return 0;
        }
        if (*som) {
            const auto r = app::run_sommerfeld_check(parse_complex(som_k), som_beta, som_sep);
            emit({{"residuals", r.residuals}, {"max_residual", r.max_residual}, {"pass", r.max_residual <= som_max}}, "");
            return r.max_residual <= som_max ? 0 : 1;
        }
        if (*orc) {
            const auto m = app::fiber_dispersion_oracle(orc_radius * 1e-6, orc_n0, orc_n1, orc_lambda * 1e-6);
            json out = json::array();
            for (const auto& x : m) {
                out.push_back({{"ne", x.ne}, {"order", x.order}, {"family", x.family}, {"degeneracy", x.degeneracy}});
            }
            std::cout.precision(17);
            emit({{"modes", out}}, "");
            return 0;
        }
        if (*fmap) {
            app::Config c = map_src.load();
            if (!map_guess.empty()) {
                const Complex g = parse_complex(map_guess);
                c.search.guesses.push_back({g - 1e-8, g + 1e-8, g});
            }
            const app::RunReport r = app::run_modes(c);
            if (map_mode >= r.modes.size()) throw ConfigError("mode index out of range");
            const auto& mode = r.modes[map_mode].mode;
            if (mode.basis.cols() == 0) throw Error("mode has an empty nullspace basis");
            const geometry::Discretization disc = app::build_discretization(c);
            const double kv = c.phys.k_vacuum();
            const Vec2 lo{map_bbox[0] * 1e-6 * kv, map_bbox[1] * 1e-6 * kv};
            const Vec2 hi{map_bbox[2] * 1e-6 * kv, map_bbox[3] * 1e-6 * kv};
            const auto g = fields::field_grid(disc, c.phys, mode.ne, mode.basis.col(0), lo, hi, map_nx, map_ny);
            app::write_grid_csv(g, map_out, 1e6 / kv);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
