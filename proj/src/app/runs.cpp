#include "bimode/app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>

namespace bimode::app {

using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

Vec2 centroid(const geometry::CurveSpec& s) {
    return std::visit(
        [](const auto& c) -> Vec2 {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, geometry::Polygon>) {
                Vec2 m{};
                for (Vec2 v : c.vertices) m = m + v;
                return (1.0 / c.vertices.size()) * m;
            } else {
                return c.center;
            }
        },
        s);
}

}  // namespace

RunReport run_modes(const Config& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const geometry::Discretization disc = build_discretization(c);
    RunReport rep;
    rep.seed = c.search.seed;
    rep.unknowns = disc.unknown_count();
    modefinder::Objective obj(disc, c.phys, modefinder::ProbeVectors::make(disc.unknown_count(), c.search.seed));
    auto f = [&obj](Complex z) { return obj(z); };

    std::vector<std::array<Complex, 3>> candidates = c.search.guesses;
    for (const auto& w : c.search.windows) {
        modefinder::ScanResult s = modefinder::scan_objective(f, w, c.search.samples);
        candidates.insert(candidates.end(), s.candidates.begin(), s.candidates.end());
        rep.scan.points.insert(rep.scan.points.end(), s.points.begin(), s.points.end());
        rep.scan.abs_f.insert(rep.scan.abs_f.end(), s.abs_f.begin(), s.abs_f.end());
        rep.scan.candidates.insert(rep.scan.candidates.end(), s.candidates.begin(), s.candidates.end());
    }

    modefinder::MullerOptions mo;
    mo.tol = c.search.tol;
    for (const auto& g : candidates) {
        modefinder::MullerResult mr;
        try {
            mr = modefinder::muller_iterate(f, g, mo);
        } catch (const Error&) {
            continue;
        }
        if (!mr.converged) continue;
        const bool dup = std::any_of(rep.modes.begin(), rep.modes.end(), [&](const ModeRecord& m) {
            return std::abs(m.mode.ne - mr.root) <= c.search.dedupe * std::max(1.0, std::abs(mr.root));
        });
        if (dup) continue;
        ModeRecord rec;
        rec.guesses = g;
        rec.mode.ne = mr.root;
        rec.mode.iterations = mr.iterations;
        rec.mode.converged = true;
        const assembly::SystemMatrix M = assembly::assemble(disc, c.phys, mr.root);
        const modefinder::NullspaceResult ns = modefinder::nullspace(M.m, c.search.null_threshold);
        rec.mode.multiplicity = ns.multiplicity;
        rec.mode.basis = ns.basis;
        rec.mode.smallest_singular = ns.smallest_singular;
        rec.mode.sigma_max = ns.sigma_max;
        rec.mode.sigma_ratio = ns.smallest_singular.empty() ? 0.0 : ns.smallest_singular.front() / ns.sigma_max;
        rep.modes.push_back(std::move(rec));
    }
    std::sort(rep.modes.begin(), rep.modes.end(),
              [](const ModeRecord& a, const ModeRecord& b) { return a.mode.ne.real() > b.mode.ne.real(); });
    rep.settings = {{"p", c.disc.p},
                    {"unknowns", rep.unknowns},
                    {"muller_tol", c.search.tol},
                    {"dedupe", c.search.dedupe},
                    {"null_threshold", c.search.null_threshold},
                    {"objective_evaluations", obj.evaluations()},
                    {"threads", assembly::thread_count(0)}};
    rep.seconds = seconds_since(t0);
    return rep;
}

json report_to_json(const RunReport& r, const Config& c) {
    json modes = json::array();
    for (const auto& m : r.modes) {
        const auto& sv = m.mode.smallest_singular;
        const std::vector<double> head(sv.begin(), sv.begin() + std::min<std::size_t>(sv.size(), 8));
        modes.push_back({{"ne", complex_json(m.mode.ne)},
                         {"multiplicity", m.mode.multiplicity},
                         {"smallest_singular", head},
                         {"sigma_max", m.mode.sigma_max},
                         {"iterations", m.mode.iterations},
                         {"guess", complex_json(m.guesses[2])},
                         {"normalization", "nullspace basis orthonormal; field grids scaled to max |E| = 1"}});
    }
    json scan = json::array();
    for (std::size_t i = 0; i < r.scan.points.size(); ++i) {
        scan.push_back({complex_json(r.scan.points[i]), r.scan.abs_f[i]});
    }
    return {{"schema", report_schema},
            {"config", config_to_json(c)},
            {"seed", r.seed},
            {"settings", r.settings},
            {"modes", modes},
            {"scan", scan},
            {"timings", {{"total_s", r.seconds}}}};
}

PointSourceResult run_point_source_verification(const Config& c, Complex probe_ne, double gmres_tol, int max_iter) {
    const geometry::Discretization disc = build_discretization(c);
    const double kv = c.phys.k_vacuum();
    const auto& ifs = disc.interfaces();

    // Length scale and centre of each inclusion in nondimensional units.
    std::vector<Vec2> centre;
    std::vector<double> size;
    for (const auto& f : ifs) {
        centre.push_back(kv * centroid(c.inclusions[centre.size()].curve));
        size.push_back(std::sqrt(std::abs(f.curve.signed_area())));
    }
    fields::PointSource outer{centre[0] + Vec2{0.11 * size[0], 0.07 * size[0]},
                              centre[0] + Vec2{-0.09 * size[0], 0.13 * size[0]}, 1.0, Complex(0.6, -0.3)};
    std::vector<fields::PointSource> inner;
    for (std::size_t i = 0; i < ifs.size(); ++i) {
        inner.push_back({centre[i] + Vec2{1.3 * size[i], 0.45 * size[i]}, centre[i] + Vec2{-0.5 * size[i], -1.25 * size[i]},
                         Complex(0.8, 0.2), 1.0});
    }
    const assembly::DensityVector b = fields::point_source_rhs(disc, c.phys, probe_ne, outer, inner);
    const assembly::SystemMatrix M = assembly::assemble(disc, c.phys, probe_ne);
    const modefinder::GmresResult g = modefinder::gmres(M.m, b, gmres_tol, max_iter);

    const std::vector<double> n = c.phys.region_indices();
    double err = 0.0, scale = 0.0;
    auto probe = [&](Vec2 X) {
        if (fields::relative_boundary_distance(disc, X) < 0.5) return;
        const std::size_t reg = fields::locate_region(disc, X);
        const fields::EMField num = fields::eval_field(disc, c.phys, probe_ne, g.x, X, reg);
        const fields::EMField ex = reg == 0 ? fields::point_source_field(outer, n[0], probe_ne, X)
                                            : fields::point_source_field(inner[reg - 1], n[reg], probe_ne, X);
        err = std::max(err, fields::max_abs(num - ex));
        scale = std::max(scale, fields::max_abs(ex));
    };
    for (std::size_t i = 0; i < ifs.size(); ++i) {
        probe(centre[i]);
        for (int a = 0; a < 8; ++a) {
            const double th = 2.0 * pi * (a + 0.3) / 8.0;
            const Vec2 dir{std::cos(th), std::sin(th)};
            for (double r : {0.25, 0.95, 2.0}) probe(centre[i] + (r * size[i]) * dir);
        }
    }
    if (scale == 0.0) throw ValidationError("point-source check: no test point clear of the interfaces");
    PointSourceResult res;
    res.max_relative_error = err / scale;
    res.gmres_iterations = g.iterations;
    res.gmres_converged = g.converged;
    res.gmres_true_residual = g.true_residual;
    res.unknowns = disc.unknown_count();
    return res;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) continue;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m < 2) return 0.0;
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

ConvergenceTable run_convergence_study(const Config& base, const std::vector<std::size_t>& ladder, Complex guess) {
    if (ladder.empty()) throw ValidationError("convergence: empty ladder");
    if (!std::is_sorted(ladder.begin(), ladder.end()) ||
        std::adjacent_find(ladder.begin(), ladder.end()) != ladder.end()) {
        throw ValidationError("convergence: ladder must be strictly increasing");
    }
    ConvergenceTable t;
    Complex g = guess;
    modefinder::MullerOptions mo;
    mo.tol = base.search.tol;
    for (std::size_t pts : ladder) {
        Config c = base;
        set_resolution(c, pts);
        const geometry::Discretization disc = build_discretization(c);
        modefinder::Objective obj(disc, c.phys, modefinder::ProbeVectors::make(disc.unknown_count(), c.search.seed));
        const double step = 1e-8 * std::max(1.0, std::abs(g));
        const auto mr = modefinder::muller_iterate([&obj](Complex z) { return obj(z); }, {g - step, g + step, g}, mo);
        t.rows.push_back({pts, mr.root, 0.0});
        g = mr.root;
    }
    const Complex ref = t.rows.back().ne;
    std::vector<double> xs, ys;
    for (auto& r : t.rows) {
        r.relative_error = std::abs(r.ne - ref) / std::abs(ref);
        if (&r != &t.rows.back()) {
            xs.push_back(double(r.points));
            ys.push_back(r.relative_error);
        }
    }
    t.slope = -loglog_slope(xs, ys);
    return t;
}

void write_grid_csv(const fields::FieldGrid& g, const std::string& path, double length_scale) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "# schema=" << grid_schema << " normalization=max|E|=1 factor=" << std::setprecision(17) << g.normalization
        << "\n";
    out << "x,y,region,ex_re,ex_im,ey_re,ey_im,ez_re,ez_im,hx_re,hx_im,hy_re,hy_im,hz_re,hz_im\n";
    for (std::size_t iy = 0; iy < g.ny; ++iy) {
        for (std::size_t ix = 0; ix < g.nx; ++ix) {
            const double x = g.nx == 1 ? g.x0 : g.x0 + (g.x1 - g.x0) * ix / double(g.nx - 1);
            const double y = g.ny == 1 ? g.y0 : g.y0 + (g.y1 - g.y0) * iy / double(g.ny - 1);
            const std::size_t k = iy * g.nx + ix;
            out << x * length_scale << ',' << y * length_scale << ',' << g.region[k];
            for (const Complex& v : g.field[k].as_array()) out << ',' << v.real() << ',' << v.imag();
            out << '\n';
        }
    }
}

void write_convergence_csv(const ConvergenceTable& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "# schema=" << table_schema << " slope=" << t.slope << "\n";
    out << "points,ne_re,ne_im,relative_error\n" << std::setprecision(17);
    for (const auto& r : t.rows) {
        out << r.points << ',' << r.ne.real() << ',' << r.ne.imag() << ',' << r.relative_error << '\n';
    }
}

}  // namespace bimode::app
