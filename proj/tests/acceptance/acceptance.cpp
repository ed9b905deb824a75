// Acceptance checks; one PASS/FAIL line per criterion.
#include "bimode/app.hpp"
#include "bimode/quadrature.hpp"
#include "bimode/specfun.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <sstream>
#include <string>

using namespace bimode;

namespace {

int failures = 0;

// Leaky core mode of the one-ring structure, rounded to 7 digits.
const Complex elliptic_guess(0.9260842, 0.0102808);

void report(int id, bool ok, const std::string& what, const std::string& detail, double seconds) {
    std::printf("[%s] criterion %d: %s | %s (%.0f s)\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str(),
                seconds);
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

modefinder::MullerResult root_near(modefinder::Objective& obj, Complex g, double step = 1e-9) {
    return modefinder::muller_iterate([&obj](Complex z) { return obj(z); }, {g - step, g + step, g});
}

// Criterion 1: the five step-index fiber indices and the oracle.
void criterion1() {
    Timer t;
    const double ref_ne[] = {1.444873245456804, 1.445573321563491, 1.445671696122978, 1.446222363089593,
                            1.447115413503111};
    app::Config c = app::example1_config();
    const geometry::Discretization disc = app::build_discretization(c);
    modefinder::Objective obj(disc, c.phys, modefinder::ProbeVectors::make(disc.unknown_count(), c.search.seed));
    const auto oracle = app::fiber_dispersion_oracle(25e-6, 1.444, 1.4475, 1.5e-6);
    double worst_ref = 0.0, worst_oracle = 0.0;
    std::ostringstream os;
    for (double ref : ref_ne) {
        const auto mr = root_near(obj, ref + 2e-9);
        worst_ref = std::max(worst_ref, std::abs(mr.root - ref));
        double best = 1.0;
        for (const auto& m : oracle) best = std::max(0.0, std::min(best, std::abs(m.ne - ref)));
        worst_oracle = std::max(worst_oracle, best);
        double cross = 1.0;
        for (const auto& m : oracle) cross = std::min(cross, std::abs(m.ne - mr.root));
        worst_oracle = std::max(worst_oracle, cross);
    }
    os << "max |dne| vs reference " << fmt("%.1e", worst_ref) << ", vs oracle " << fmt("%.1e", worst_oracle)
       << " (tol 1e-12)";
    report(1, worst_ref <= 1e-12 && worst_oracle <= 1e-12, "step-index fiber, 50 nodes", os.str(), t.seconds());
}

// Criterion 2: hexagon ring PCF, 100 points per hole.
void criterion2() {
    Timer t;
    const Complex ref_ne[] = {{1.44539523214929, 3.19452506e-8},
                             {1.43858364729142, 5.310787285e-7},
                             {1.43844483196668, 9.730851491e-7},
                             {1.43836493417887, 1.4164759939e-6}};
    app::Config c = app::hexagon_ring_config();
    const geometry::Discretization disc = app::build_discretization(c);
    modefinder::Objective obj(disc, c.phys, modefinder::ProbeVectors::make(disc.unknown_count(), c.search.seed));
    bool ok = disc.node_count() == 600;
    std::ostringstream os;
    int found = 0;
    for (int i = 0; i < 4; ++i) {
        // Start from the reference values rounded to 7 digits.
        const Complex g(std::round(ref_ne[i].real() * 1e7) / 1e7, std::round(ref_ne[i].imag() * 1e9) / 1e9);
        const auto mr = root_near(obj, g, 1e-7);
        const double dre = std::abs(mr.root.real() - ref_ne[i].real());
        const double dim = std::abs(mr.root.imag() - ref_ne[i].imag()) / ref_ne[i].imag();
        if (i == 0) {
            ok = ok && dre <= 1e-10 && dim <= 0.02;
            os << "fundamental " << fmt("%.14f", mr.root.real()) << fmt(" + %.8ei", mr.root.imag()) << " (dRe "
               << fmt("%.1e", dre) << ", dIm rel " << fmt("%.1e", dim) << ")";
        }
        if (mr.converged && dre <= 1e-8 && dim <= 0.02) ++found;
    }
    os << "; reference modes found " << found << "/4";
    report(2, ok && found == 4, "hexagon-ring PCF", os.str(), t.seconds());
}

// Criterion 3: perturbed PCF, h = 3%.
void criterion3() {
    Timer t;
    const Complex ref(1.44538217911076, 3.00407424e-8);
    app::Config c = app::hexagon_ring_config(0.03);
    const geometry::Discretization disc = app::build_discretization(c);
    modefinder::Objective obj(disc, c.phys, modefinder::ProbeVectors::make(disc.unknown_count(), c.search.seed));
    // Mode 2 lies 1.8e-8 away, so the start carries 9 digits.
    const auto mr = root_near(obj, Complex(1.445382179, 3.004e-8), 1e-9);
    const double dre = std::abs(mr.root.real() - ref.real());
    const double dim = std::abs(mr.root.imag() - ref.imag()) / ref.imag();
    std::ostringstream os;
    os << fmt("%.14f", mr.root.real()) << fmt(" + %.8ei", mr.root.imag()) << " (dRe " << fmt("%.1e", dre)
       << ", dIm rel " << fmt("%.1e", dim) << ")";
    report(3, mr.converged && dre <= 1e-10 && dim <= 0.02, "perturbed PCF mode 1, h = 3%", os.str(), t.seconds());
}

// Criteria 4 and 5: square waveguide ladder and the SVD at the N = 300 root.
void criteria4and5() {
    Timer t;
    const std::size_t ladder[] = {150, 300, 450, 600};
    const double ref_ne[] = {1.45860141500175, 1.45860141488787, 1.45860141488572, 1.45860141488567};
    const double converged = 1.45860141488567;
    std::ostringstream os;
    bool ok = true;
    double prev_err = 1.0;
    Complex g(converged + 1e-9, 0.0);
    modefinder::NullspaceResult ns;
    double t5 = 0.0;
    for (int i = 0; i < 4; ++i) {
        app::Config c = app::square_config(ladder[i]);
        const geometry::Discretization disc = app::build_discretization(c);
        modefinder::Objective obj(disc, c.phys, modefinder::ProbeVectors::make(disc.unknown_count(), c.search.seed));
        const auto mr = root_near(obj, g);
        const double err = std::abs(mr.root.real() - converged);
        const double row = std::abs(mr.root.real() - ref_ne[i]);
        ok = ok && mr.converged && err <= prev_err && row <= 1e-14;
        os << "N=" << ladder[i] << " " << fmt("%.15f", mr.root.real()) << fmt("%+.0ei", mr.root.imag()) << " (row "
           << fmt("%.0e", row) << ") ";
        prev_err = err;
        if (i == 3) {
            ok = ok && err <= 1e-11;
            os << "| N=600 |dne| " << fmt("%.1e", err);
        }
        if (ladder[i] == 300) {
            Timer ts;
            const assembly::SystemMatrix M = assembly::assemble(disc, c.phys, mr.root);
            ns = modefinder::nullspace(M.m, 1e-10);
            t5 = ts.seconds();
        }
        g = mr.root;
    }
    report(4, ok, "square waveguide ladder", os.str(), t.seconds() - t5);
    std::ostringstream o5;
    const double s0 = ns.smallest_singular[0] / ns.sigma_max, s1 = ns.smallest_singular[1] / ns.sigma_max;
    const double s2 = ns.smallest_singular[2];
    o5 << "sigma/sigma_max " << fmt("%.1e", s0) << ", " << fmt("%.1e", s1) << "; third sigma " << fmt("%.4f", s2)
       << ", multiplicity " << ns.multiplicity << (ns.full_svd ? " (full SVD)" : " (subspace iteration)");
    report(5, ns.multiplicity == 2 && s0 <= 1e-10 && s1 <= 1e-10 && s2 >= 0.05, "square waveguide degeneracy",
           o5.str(), t5);
}

// Criterion 6: point-source verification over N = 150..750 per side.
void criterion6() {
    Timer t;
    std::ostringstream os;
    int lo = 1 << 30, hi = 0;
    bool conv = true;
    std::vector<double> xs, errs;
    for (std::size_t n : {150, 300, 450, 600, 750}) {
        const app::Config c = app::square_config(n);
        const auto r = app::run_point_source_verification(c, 1.451, 1e-14, 100);
        lo = std::min(lo, r.gmres_iterations);
        hi = std::max(hi, r.gmres_iterations);
        conv = conv && r.gmres_converged;
        xs.push_back(double(n));
        errs.push_back(r.max_relative_error);
        os << "N=" << n << " it " << r.gmres_iterations << " err " << fmt("%.1e", r.max_relative_error) << "; ";
    }
    // Fit over the pre-asymptotic part of the ladder: rows until the error reaches the rounding floor.
    std::vector<double> fx, fy;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        fx.push_back(xs[i]);
        fy.push_back(errs[i]);
        if (errs[i] < 1e-13) break;
    }
    const double order = -app::loglog_slope(fx, fy);
    os << "order " << fmt("%.1f", order) << " over " << fx.size() << " rows";
    const bool ok = conv && hi <= 40 && hi - lo <= 6 && std::abs(order - 10.0) <= 2.0;
    report(6, ok, "point-source verification, square", os.str(), t.seconds());
}

// Criterion 7: property suite.
void criterion7() {
    Timer t;
    std::ostringstream os;
    bool ok = true;

    {  // matched media
        const app::Config c = app::example1_config();
        PhysicalConfig phys = c.phys;
        phys.inclusion_indices = {phys.n_cladding};
        const geometry::Discretization disc = app::build_discretization(c);
        const auto M = assembly::assemble(disc, phys, 1.44);
        const Eigen::VectorXcd d = assembly::diagonal_part(disc, phys);
        const double dev = (M.m - Eigen::MatrixXcd(d.asDiagonal())).cwiseAbs().maxCoeff();
        ok = ok && dev == 0.0;
        os << "M-D " << fmt("%.0e", dev);
    }
    {  // Sommerfeld
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> uk(0.5, 3.0), ub(0.0, 1.0), ur(0.1, 10.0);
        double worst = 0.0;
        for (int i = 0; i < 10; ++i) {
            const double k = uk(rng);
            const double beta = (i % 2 ? 0.2 + 0.6 * ub(rng) : 1.2 + 0.8 * ub(rng)) * k;
            worst = std::max(worst, app::run_sommerfeld_check(k, beta, {ur(rng)}).max_residual);
        }
        ok = ok && worst <= 1e-9;
        os << "; Sommerfeld " << fmt("%.1e", worst);
    }
    {  // Wronskian
        double worst = 0.0;
        for (double mag : {0.1, 1.0, 1.9, 2.1, 10.0, 24.0, 26.0, 100.0}) {
            for (double arg : {0.0, 0.4, 1.2, 2.0, 3.0}) {
                const Complex z = std::polar(mag, arg);
                const auto h = specfun::hankel01(z);
                const auto j = specfun::bessel_j01(z);
                const Complex w = (j.j1 * h.h0 - j.j0 * h.h1) * (pi * z / (2.0 * I));
                worst = std::max(worst, std::abs(w - 1.0));
            }
        }
        ok = ok && worst <= 1e-12;
        os << "; Wronskian " << fmt("%.1e", worst);
    }
    {  // log GGQ vs adaptive
        double worst = 0.0;
        std::mt19937_64 rng(5);
        std::normal_distribution<double> nd;
        for (std::size_t p : {10, 16}) {
            const auto& gl = quadrature::gauss_legendre(p);
            for (std::size_t ti = 1; ti <= p; ++ti) {
                const double xt = gl.nodes[ti - 1];
                std::vector<double> a(p), b(p);
                for (auto& v : a) v = nd(rng);
                for (auto& v : b) v = nd(rng);
                auto poly = [](const std::vector<double>& cf, double x) {
                    double s = 0.0;
                    for (std::size_t i = cf.size(); i-- > 0;) s = s * x + cf[i];
                    return s;
                };
                auto f = [&](double x) { return poly(a, x) + poly(b, x) * std::log(std::abs(x - xt)); };
                const auto rule = quadrature::log_ggq_rule(p, ti);
                double q = 0.0;
                for (std::size_t i = 0; i < rule.nodes.size(); ++i) q += rule.weights[i] * f(rule.nodes[i]);
                quadrature::AdaptiveOptions o;
                o.abs_tol = 1e-15;
                o.rel_tol = 1e-15;
                auto vf = [&](double x, std::span<Complex> out) { out[0] = f(x); };
                const double ref = (quadrature::adaptive_integrate_log_endpoint(vf, xt, 1.0, 1, o).value[0] -
                                    quadrature::adaptive_integrate_log_endpoint(vf, xt, -1.0, 1, o).value[0])
                                       .real();
                worst = std::max(worst, std::abs(q - ref) / std::max(1.0, std::abs(ref)));
            }
        }
        ok = ok && worst <= 1e-13;
        os << "; GGQ " << fmt("%.1e", worst);
    }
    {  // transverse relations at 20 interior points, and root invariance over seeds
        app::Config c = app::example1_config();
        const geometry::Discretization disc = app::build_discretization(c);
        const double g = 1.445573321563491 + 2e-9;
        std::vector<Complex> roots;
        modefinder::Mode mode;
        for (std::uint64_t seed : {std::uint64_t(1), std::uint64_t(77), modefinder::default_seed}) {
            modefinder::ModeSearchOptions mo;
            mo.seed = seed;
            mode = modefinder::find_mode(disc, c.phys, {g - 1e-9, g + 1e-9, g}, mo);
            roots.push_back(mode.ne);
        }
        double spread = 0.0;
        for (const Complex& r : roots) spread = std::max(spread, std::abs(r - roots[0]));
        ok = ok && spread <= 1e-12;

        const Eigen::VectorXcd x = mode.basis.col(0);
        const std::vector<double> n = c.phys.region_indices();
        const double R = 25e-6 * c.phys.k_vacuum();
        double worst = 0.0;
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> u(-0.85, 0.85);
        for (int i = 0; i < 20;) {
            const Vec2 X{u(rng) * R, u(rng) * R};
            if (norm(X) > 0.85 * R) continue;
            ++i;
            auto f = [&](Vec2 P) { return fields::eval_field(disc, c.phys, mode.ne, x, P, 1); };
            const double h = 0.05;
            auto d = [&](Vec2 e) {
                return Complex(1.0 / (12.0 * h)) *
                       (Complex(8.0) * (f(X + h * e) - f(X - h * e)) - (f(X + 2.0 * h * e) - f(X - 2.0 * h * e)));
            };
            const fields::EMField dx = d({1.0, 0.0}), dy = d({0.0, 1.0});
            const fields::EMField F = f(X);
            const auto tr = fields::transverse_from_longitudinal(n[1], mode.ne, {dx.ez, dy.ez, dx.hz, dy.hz});
            const double scale = fields::max_abs(F);
            worst = std::max({worst, std::abs(tr[0] - F.ex) / scale, std::abs(tr[1] - F.ey) / scale,
                              std::abs(tr[2] - F.hx) / scale, std::abs(tr[3] - F.hy) / scale});
        }
        ok = ok && worst <= 1e-8;
        os << "; transverse " << fmt("%.1e", worst) << "; seed spread " << fmt("%.0e", spread);
    }
    report(7, ok, "property suite", os.str(), t.seconds());
}

// Criterion 8: elliptic-core PCF with one ring, self-convergence.
void criterion8() {
    Timer t;
    std::ostringstream os;
    Complex g(0.0, 0.0);
    std::vector<Complex> roots;
    g = elliptic_guess;
    for (double scale : {1.0, 1.25}) {
        app::Config c = app::elliptic_core_config();
        c.inclusions[0].panels = static_cast<std::size_t>(24 * scale);
        for (std::size_t i = 1; i < c.inclusions.size(); ++i) c.inclusions[i].panels = static_cast<std::size_t>(12 * scale);
        const geometry::Discretization disc = app::build_discretization(c);
        modefinder::Objective obj(disc, c.phys, modefinder::ProbeVectors::make(disc.unknown_count(), c.search.seed));
        const auto mr = root_near(obj, g, 1e-7);
        roots.push_back(mr.root);
        os << disc.node_count() << " nodes: " << fmt("%.13f", mr.root.real()) << fmt(" + %.10ei", mr.root.imag())
           << "; ";
        g = mr.root;
    }
    const double d = std::abs(roots[1] - roots[0]);
    os << "|dne| " << fmt("%.1e", d);
    report(8, d <= 1e-10, "elliptic-core PCF, one ring", os.str(), t.seconds());
}

}  // namespace

int main(int argc, char** argv) {
    // Optional list of criteria to run, e.g. "acceptance 1 7".
    std::vector<int> which;
    for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
    auto want = [&](int id) { return which.empty() || std::find(which.begin(), which.end(), id) != which.end(); };
    try {
        if (want(1)) criterion1();
        if (want(2)) criterion2();
        if (want(3)) criterion3();
        if (want(4) || want(5)) criteria4and5();
        if (want(6)) criterion6();
        if (want(7)) criterion7();
        if (want(8)) criterion8();
    } catch (const std::exception& e) {
        std::printf("[FAIL] aborted: %s\n", e.what());
        return 1;
    }
    std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
