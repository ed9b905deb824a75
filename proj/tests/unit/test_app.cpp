#include "doctest.h"

#include "bimode/app.hpp"

#include <random>

using namespace bimode;
using nlohmann::json;

TEST_CASE("Sommerfeld reduction on random (k, beta, r) triples") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> uk(0.5, 3.0), ub(0.0, 1.0), ur(0.1, 10.0), ui(0.0, 0.3);
    for (int i = 0; i < 10; ++i) {
        const Complex k(uk(rng), i % 3 == 0 ? ui(rng) : 0.0);
        // Propagating and evanescent axial wavenumbers, away from beta = k.
        const double beta = (i % 2 ? 0.2 + 0.6 * ub(rng) : 1.2 + 0.8 * ub(rng)) * k.real();
        const auto r = app::run_sommerfeld_check(k, beta, {ur(rng)});
        CHECK(r.max_residual <= 1e-9);
    }
    CHECK(app::run_sommerfeld_check(2.0, 1.0, {0.7}).max_residual <= 1e-9);
    CHECK(app::run_sommerfeld_check(2.0, 3.0, {0.1, 1.0, 10.0}).max_residual <= 1e-9);
}

TEST_CASE("fiber oracle") {
    const auto m = app::fiber_dispersion_oracle(25e-6, 1.444, 1.4475, 1.5e-6);
    const double ref_ne[] = {1.444873245456804, 1.445573321563491, 1.445671696122978, 1.446222363089593,
                            1.447115413503111};
    for (double t : ref_ne) {
        double best = 1.0;
        for (const auto& x : m) best = std::min(best, std::abs(x.ne - t));
        CHECK(best <= 1e-12);
    }
    // V below the first zero of J0: only the HE11 pair is guided.
    const double lambda = 1.5e-6, n0 = 1.444, n1 = 1.4475;
    const double a = 2.0 / (2.0 * pi / lambda * std::sqrt(n1 * n1 - n0 * n0));
    const auto single = app::fiber_dispersion_oracle(a, n0, n1, lambda);
    REQUIRE(single.size() == 1);
    CHECK(single[0].order == 1);
    CHECK(single[0].degeneracy == 2);
    CHECK(app::fiber_dispersion_oracle(25e-6, 1.444, 1.444, 1.5e-6).empty());
}

TEST_CASE("config ingestion") {
    const json j = json::parse(R"({
        "schema": "bimode.config/1",
        "physics": {"lambda_um": 1.45, "n_cladding": 1.45},
        "hex_ring": {"pitch_um": 6.75, "hole": {"shape": "circle", "radius_um": 2.5, "n": 1.0}},
        "discretization": {"p": 10, "points": 100},
        "search": {"guesses": [[1.4453952, 3e-8]], "seed": 5}
    })");
    const app::Config c = app::parse_config(j);
    CHECK(c.inclusions.size() == 6);
    CHECK(c.phys.wavelength == doctest::Approx(1.45e-6));
    CHECK(c.inclusions[0].panels == 10);
    CHECK(c.search.seed == 5);
    REQUIRE(c.search.guesses.size() == 1);
    CHECK(c.search.guesses[0][2] == Complex(1.4453952, 3e-8));
    const auto& circ = std::get<geometry::Circle>(c.inclusions[3].curve);
    CHECK(circ.center.x == doctest::Approx(-6.75e-6));
    CHECK(circ.radius == doctest::Approx(2.5e-6));

    // Round trip through the echo.
    const app::Config d = app::parse_config(app::config_to_json(c));
    CHECK(d.inclusions.size() == 6);
    CHECK(app::config_to_json(d) == app::config_to_json(c));

    CHECK_THROWS_AS(app::parse_config(json::parse(R"({"schema": "other"})")), ConfigError);
    CHECK_THROWS_AS(app::parse_config(json::parse(
                        R"({"schema": "bimode.config/1", "physics": {"lambda_um": -1, "n_cladding": 1.4}, "inclusions": [{"radius_um": 1, "n": 1.5}]})")),
                    ConfigError);
    CHECK_THROWS_AS(app::parse_config(json::parse(
                        R"({"schema": "bimode.config/1", "physics": {"lambda_um": 1, "n_cladding": 1.4}, "inclusions": [{"shape": "blob", "n": 1.5}]})")),
                    ConfigError);
}

TEST_CASE("polygon corner grading layout") {
    const geometry::CurveSpec sq = geometry::Polygon{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    const std::pair<std::size_t, std::size_t> expect[] = {{150, 7}, {300, 12}, {450, 17}, {600, 22}, {750, 27}};
    for (auto [pts, base] : expect) {
        const app::PanelLayout l = app::panels_for_points(sq, pts, 10, 0);
        CHECK(l.panels == base);
        CHECK(l.panels + 2 * l.corner_levels == pts / 10);
    }
    CHECK(app::panels_for_points(geometry::Circle{{0, 0}, 1}, 120, 10, 0).panels == 12);
    CHECK_THROWS_AS(app::panels_for_points(sq, 155, 10, 0), ConfigError);
}

TEST_CASE("point-source verification on a circle") {
    // Probe above the core index: both media evanescent, away from every mode.
    app::Config c = app::example1_config();
    app::set_resolution(c, 150);
    const auto r = app::run_point_source_verification(c, 1.4478);
    CHECK(r.gmres_converged);
    CHECK(r.max_relative_error <= 1e-11);
    app::set_resolution(c, 50);
    const auto coarse = app::run_point_source_verification(c, 1.4478);
    CHECK(coarse.max_relative_error > 10.0 * r.max_relative_error);
}

TEST_CASE("run_modes is deterministic and deduplicates") {
    app::Config c = app::example1_config();
    const double g = 1.446222363089593;
    c.search.guesses = {{g - 1e-8, g + 1e-8, g}, {g + 2e-9, g - 2e-9, g + 1e-9}};
    const app::RunReport a = app::run_modes(c);
    const app::RunReport b = app::run_modes(c);
    REQUIRE(a.modes.size() == 1);
    CHECK(std::abs(a.modes[0].mode.ne - g) < 1e-12);
    CHECK(a.modes[0].mode.multiplicity == 1);
    json ja = app::report_to_json(a, c), jb = app::report_to_json(b, c);
    ja.erase("timings");
    jb.erase("timings");
    CHECK(ja.dump() == jb.dump());
}

TEST_CASE("log-log slope") {
    std::vector<double> x{1, 2, 4, 8}, y;
    for (double v : x) y.push_back(3.0 * std::pow(v, -10.0));
    CHECK(app::loglog_slope(x, y) == doctest::Approx(-10.0));
}
