#include "bimode/app.hpp"

#include <cmath>
#include <fstream>

namespace bimode::app {

using nlohmann::json;

namespace {

constexpr double um = 1e-6;

Vec2 vec_um(const json& j) {
    if (!j.is_array() || j.size() != 2) throw ConfigError("expected a 2-vector");
    return {j[0].get<double>() * um, j[1].get<double>() * um};
}

Complex complex_of(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2) throw ConfigError("expected a number or [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

double positive(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("missing key: ") + key);
    const double v = j.at(key).get<double>();
    if (!(v > 0.0)) throw ConfigError(std::string(key) + " must be positive");
    return v;
}

geometry::CurveSpec shape_of(const json& j, Vec2 shift) {
    const std::string shape = j.value("shape", "circle");
    const Vec2 c = (j.contains("center_um") ? vec_um(j.at("center_um")) : Vec2{}) + shift;
    if (shape == "circle") return geometry::Circle{c, positive(j, "radius_um") * um};
    if (shape == "ellipse") return geometry::Ellipse{c, positive(j, "a_um") * um, positive(j, "b_um") * um};
    if (shape == "perturbed") {
        return geometry::PerturbedCircle{c, positive(j, "diameter_um") * um, j.value("amplitude", 0.0),
                                         j.value("lobes", 7)};
    }
    if (shape == "square") {
        const double h = 0.5 * positive(j, "side_um") * um;
        return geometry::Polygon{{c + Vec2{-h, -h}, c + Vec2{h, -h}, c + Vec2{h, h}, c + Vec2{-h, h}}};
    }
    if (shape == "polygon") {
        geometry::Polygon poly;
        for (const json& v : j.at("vertices_um")) poly.vertices.push_back(vec_um(v) + shift);
        return poly;
    }
    throw ConfigError("unknown shape: " + shape);
}

InclusionConfig inclusion_of(const json& j, Vec2 shift) {
    InclusionConfig inc;
    inc.curve = shape_of(j, shift);
    inc.n = positive(j, "n");
    inc.panels = j.value("panels", std::size_t{0});
    inc.corner_levels = j.value("corner_levels", std::size_t{0});
    if (j.contains("points")) {
        throw ConfigError("per-inclusion points are not supported; use discretization.points");
    }
    return inc;
}

json vec_json(Vec2 v) { return json::array({v.x / um, v.y / um}); }

json shape_json(const geometry::CurveSpec& s) {
    return std::visit(
        [](const auto& c) -> json {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, geometry::Circle>) {
                return {{"shape", "circle"}, {"center_um", vec_json(c.center)}, {"radius_um", c.radius / um}};
            } else if constexpr (std::is_same_v<T, geometry::Ellipse>) {
                return {{"shape", "ellipse"}, {"center_um", vec_json(c.center)}, {"a_um", c.a / um}, {"b_um", c.b / um}};
            } else if constexpr (std::is_same_v<T, geometry::PerturbedCircle>) {
                return {{"shape", "perturbed"},   {"center_um", vec_json(c.center)}, {"diameter_um", c.diameter / um},
                        {"amplitude", c.amplitude}, {"lobes", c.lobes}};
            } else {
                json v = json::array();
                for (Vec2 p : c.vertices) v.push_back(vec_json(p));
                return {{"shape", "polygon"}, {"vertices_um", v}};
            }
        },
        s);
}

}  // namespace

Config parse_config(const json& j) {
    if (j.value("schema", "") != config_schema) throw ConfigError(std::string("config schema must be ") + config_schema);
    Config c;
    c.name = j.value("name", "");
    const json& ph = j.at("physics");
    c.phys.wavelength = positive(ph, "lambda_um") * um;
    c.phys.n_cladding = positive(ph, "n_cladding");

    if (j.contains("inclusions")) {
        for (const json& inc : j.at("inclusions")) c.inclusions.push_back(inclusion_of(inc, {}));
    }
    if (j.contains("hex_ring")) {
        // `count` holes equally spaced on a circle of radius `pitch_um`.
        const json& r = j.at("hex_ring");
        const double pitch = positive(r, "pitch_um") * um;
        const int count = r.value("count", 6);
        const double rot = r.value("rotation_deg", 0.0) * pi / 180.0;
        for (int k = 0; k < count; ++k) {
            const double th = rot + 2.0 * pi * k / count;
            c.inclusions.push_back(inclusion_of(r.at("hole"), {pitch * std::cos(th), pitch * std::sin(th)}));
        }
    }
    if (c.inclusions.empty()) throw ConfigError("config has no inclusions");
    for (const auto& inc : c.inclusions) c.phys.inclusion_indices.push_back(inc.n);
    c.phys.validate();

    if (j.contains("discretization")) {
        const json& d = j.at("discretization");
        c.disc.p = d.value("p", c.disc.p);
        c.disc.panels = d.value("panels", c.disc.panels);
        c.disc.corner_levels = d.value("corner_levels", c.disc.corner_levels);
        if (d.contains("points")) set_resolution(c, d.at("points").get<std::size_t>());
    }
    if (c.disc.p < 2) throw ConfigError("discretization.p must be at least 2");

    if (j.contains("search")) {
        const json& s = j.at("search");
        c.search.samples = s.value("samples", c.search.samples);
        c.search.tol = s.value("tol", c.search.tol);
        c.search.dedupe = s.value("dedupe", c.search.dedupe);
        c.search.null_threshold = s.value("null_threshold", c.search.null_threshold);
        c.search.seed = s.value("seed", c.search.seed);
        const double step = s.value("guess_step", 1e-8);
        if (s.contains("windows")) {
            for (const json& w : s.at("windows")) c.search.windows.push_back({complex_of(w.at("lo")), complex_of(w.at("hi"))});
        }
        if (s.contains("guesses")) {
            for (const json& g : s.at("guesses")) {
                const Complex z = complex_of(g);
                c.search.guesses.push_back({z - step, z + step, z});
            }
        }
    }
    c.source = j;
    return c;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    return parse_config(j);
}

json config_to_json(const Config& c) {
    json inc = json::array();
    for (const auto& i : c.inclusions) {
        json s = shape_json(i.curve);
        s["n"] = i.n;
        if (i.panels) s["panels"] = i.panels;
        if (i.corner_levels) s["corner_levels"] = i.corner_levels;
        inc.push_back(s);
    }
    json windows = json::array(), guesses = json::array();
    for (const auto& w : c.search.windows) {
        windows.push_back({{"lo", {w.lo.real(), w.lo.imag()}}, {"hi", {w.hi.real(), w.hi.imag()}}});
    }
    for (const auto& g : c.search.guesses) guesses.push_back({g[2].real(), g[2].imag()});
    return {{"schema", config_schema},
            {"name", c.name},
            {"physics", {{"lambda_um", c.phys.wavelength / um}, {"n_cladding", c.phys.n_cladding}}},
            {"inclusions", inc},
            {"discretization", {{"p", c.disc.p}, {"panels", c.disc.panels}, {"corner_levels", c.disc.corner_levels}}},
            {"search",
             {{"windows", windows},
              {"guesses", guesses},
              {"samples", c.search.samples},
              {"tol", c.search.tol},
              {"dedupe", c.search.dedupe},
              {"null_threshold", c.search.null_threshold},
              {"seed", c.search.seed}}}};
}

PanelLayout panels_for_points(const geometry::CurveSpec& curve, std::size_t points, std::size_t p,
                              std::size_t corner_levels) {
    if (points == 0 || points % p != 0) throw ConfigError("point count must be a positive multiple of p");
    const std::size_t chunks = points / p;
    if (!std::holds_alternative<geometry::Polygon>(curve)) return {chunks, 0};
    std::size_t levels = corner_levels;
    if (levels == 0) {
        if (chunks % 3 != 0 || chunks < 6) throw ConfigError("automatic corner grading needs chunks per side = 3m, m >= 2");
        levels = chunks / 3 - 1;
    }
    if (chunks < 2 * levels + 2) throw ConfigError("too few points per side for the corner grading");
    return {chunks - 2 * levels, levels};
}

void set_resolution(Config& c, std::size_t points) {
    for (auto& inc : c.inclusions) {
        const PanelLayout l = panels_for_points(inc.curve, points, c.disc.p, c.disc.corner_levels);
        inc.panels = l.panels;
        inc.corner_levels = l.corner_levels;
    }
}

geometry::Discretization build_discretization(const Config& c) {
    const double kv = c.phys.k_vacuum();
    std::vector<geometry::InterfaceSpec> specs;
    for (std::size_t i = 0; i < c.inclusions.size(); ++i) {
        const auto& inc = c.inclusions[i];
        geometry::InterfaceSpec s;
        s.curve = geometry::scaled(inc.curve, kv);
        s.n_panels = inc.panels ? inc.panels : c.disc.panels;
        if (std::holds_alternative<geometry::Polygon>(inc.curve)) {
            std::size_t levels = inc.corner_levels ? inc.corner_levels : c.disc.corner_levels;
            if (levels == 0) throw ConfigError("polygon inclusion needs a point count or corner_levels");
            s.grading = {true, static_cast<int>(levels)};
        }
        s.region = i + 1;
        specs.push_back(s);
    }
    return geometry::Discretization(specs, c.disc.p);
}

Config example1_config() {
    Config c;
    c.name = "step-index fiber";
    c.phys = {1.5e-6, 1.444, {1.4475}};
    c.inclusions.push_back({geometry::Circle{{0.0, 0.0}, 25e-6}, 1.4475, 5});
    c.source = config_to_json(c);
    return c;
}

Config hexagon_ring_config(double perturbation) {
    Config c;
    c.name = perturbation == 0.0 ? "hexagon ring PCF" : "perturbed hexagon ring PCF";
    c.phys = {1.45e-6, 1.45, {}};
    const double pitch = 6.75e-6, d = 5e-6;
    for (int k = 0; k < 6; ++k) {
        const double th = pi * k / 3.0;
        const Vec2 ctr{pitch * std::cos(th), pitch * std::sin(th)};
        geometry::CurveSpec s = perturbation == 0.0 ? geometry::CurveSpec(geometry::Circle{ctr, 0.5 * d})
                                                    : geometry::CurveSpec(geometry::PerturbedCircle{ctr, d, perturbation, 7});
        c.inclusions.push_back({s, 1.0, 10});
        c.phys.inclusion_indices.push_back(1.0);
    }
    c.source = config_to_json(c);
    return c;
}

Config square_config(std::size_t points_per_side) {
    Config c;
    c.name = "square waveguide";
    const double n0 = 1.4447, h = 1.7e-6;
    c.phys = {1.55e-6, n0, {1.02 * n0}};
    c.inclusions.push_back({geometry::Polygon{{{-h, -h}, {h, -h}, {h, h}, {-h, h}}}, 1.02 * n0, 0});
    set_resolution(c, points_per_side);
    c.source = config_to_json(c);
    return c;
}

Config elliptic_core_config() {
    Config c;
    c.name = "elliptic-core PCF, one ring";
    c.phys = {1.42e-6, 1.45, {}};
    c.inclusions.push_back({geometry::Ellipse{{0.0, 0.0}, 1.15e-6, 2.3e-6}, 1.0, 24});
    // The ellipse reaches into the first lattice shell, so the ring sits on
    // the corners of the second one.
    const double pitch = 2e-6, d = 0.9 * pitch;
    for (int k = 0; k < 6; ++k) {
        const double th = pi * k / 3.0;
        c.inclusions.push_back({geometry::Circle{{2.0 * pitch * std::cos(th), 2.0 * pitch * std::sin(th)}, 0.5 * d},
                                1.0, 12});
    }
    for (const auto& inc : c.inclusions) c.phys.inclusion_indices.push_back(inc.n);
    c.source = config_to_json(c);
    return c;
}

}  // namespace bimode::app
