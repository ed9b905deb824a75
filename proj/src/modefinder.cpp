#include "bimode/modefinder.hpp"

#include <algorithm>
#include <random>

namespace bimode::modefinder {

ProbeVectors ProbeVectors::make(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    ProbeVectors p;
    p.seed = seed;
    p.u.resize(static_cast<Eigen::Index>(n));
    p.v.resize(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < p.u.size(); ++i) {
        const double re = dist(rng);
        p.u(i) = Complex(re, dist(rng));
    }
    for (Eigen::Index i = 0; i < p.v.size(); ++i) {
        const double re = dist(rng);
        p.v(i) = Complex(re, dist(rng));
    }
    return p;
}

Objective::Objective(const geometry::Discretization& disc, const PhysicalConfig& phys, ProbeVectors probes,
                     assembly::AssemblyOptions opt)
    : disc_(disc), phys_(phys), probes_(std::move(probes)), opt_(opt) {
    if (static_cast<std::size_t>(probes_.u.size()) != disc.unknown_count() ||
        static_cast<std::size_t>(probes_.v.size()) != disc.unknown_count()) {
        throw DomainError("objective: probe length does not match unknown count");
    }
}

ObjectiveValue Objective::evaluate(Complex ne) {
    assembly::assemble_into(work_, disc_, phys_, ne, opt_);
    ++evaluations_;
    Eigen::PartialPivLU<Eigen::Ref<Eigen::MatrixXcd>> lu(work_);
    const auto& lu_m = lu.matrixLU();
    for (Eigen::Index i = 0; i < lu_m.rows(); ++i) {
        if (lu_m(i, i) == Complex(0.0)) return {Complex(0.0), true};
    }
    const Eigen::VectorXcd y = lu.solve(probes_.v);
    const Complex s = probes_.u.transpose() * y;
    return {1.0 / s, false};
}

ObjectiveValue objective(const geometry::Discretization& disc, const PhysicalConfig& phys, Complex ne,
                         const ProbeVectors& probes, const assembly::AssemblyOptions& opt) {
    Objective obj(disc, phys, probes, opt);
    return obj.evaluate(ne);
}

MullerResult muller_iterate(const ScalarFunction& f, std::array<Complex, 3> g, const MullerOptions& opt) {
    if (g[0] == g[1] || g[1] == g[2] || g[0] == g[2]) throw DomainError("muller: guesses must be distinct");
    MullerResult res;
    Complex x0 = g[0], x1 = g[1], x2 = g[2];
    Complex f0 = f(x0), f1 = f(x1), f2 = f(x2);
    res.history = {x0, x1, x2};
    Complex best = x2, fbest = f2;
    for (const auto& [x, fx] : {std::pair{x0, f0}, std::pair{x1, f1}}) {
        if (std::abs(fx) < std::abs(fbest)) {
            best = x;
            fbest = fx;
        }
    }
    if (fbest == Complex(0.0)) {
        res.root = best;
        res.f_root = fbest;
        res.converged = true;
        res.message = "exact root among guesses";
        return res;
    }
    int restarts = 0;
    for (int it = 1; it <= opt.max_iter; ++it) {
        res.iterations = it;
        const Complex h1 = x1 - x0, h2 = x2 - x1;
        if (h1 == Complex(0.0) || h2 == Complex(0.0) || h1 + h2 == Complex(0.0)) {
            if (++restarts > 5) break;
            const double eps = 1e-7 * std::max(1.0, std::abs(x2));
            x0 = x2 + Complex(eps, 0.0);
            x1 = x2 - Complex(0.0, eps);
            f0 = f(x0);
            f1 = f(x1);
            continue;
        }
        const Complex d1 = (f1 - f0) / h1, d2 = (f2 - f1) / h2;
        const Complex a = (d2 - d1) / (h2 + h1);
        const Complex b = a * h2 + d2;
        const Complex disc = std::sqrt(b * b - 4.0 * a * f2);
        const Complex e = std::abs(b + disc) >= std::abs(b - disc) ? b + disc : b - disc;
        Complex dx;
        if (e == Complex(0.0)) {
            dx = Complex(1e-6 * std::max(1.0, std::abs(x2)), 0.0);
        } else {
            dx = -2.0 * f2 / e;
        }
        const Complex x3 = x2 + dx;
        const Complex f3 = f(x3);
        res.history.push_back(x3);
        if (std::abs(f3) <= std::abs(fbest)) {
            best = x3;
            fbest = f3;
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        x2 = x3;
        f2 = f3;
        if (f3 == Complex(0.0) || std::abs(f3) <= opt.f_floor) {
            res.root = x3;
            res.f_root = f3;
            res.converged = true;
            res.message = "objective below floor";
            return res;
        }
        if (std::abs(dx) <= opt.tol * std::max(1.0, std::abs(x3))) {
            res.root = x3;
            res.f_root = f3;
            res.converged = true;
            res.message = "step below tolerance";
            return res;
        }
    }
    res.root = best;
    res.f_root = fbest;
    res.converged = false;
    res.message = "maximum iterations reached";
    return res;
}

ScanResult scan_objective(const ScalarFunction& f, const Window& w, std::size_t samples) {
    if (samples < 3) throw ValidationError("scan: need at least 3 samples");
    if (w.lo == w.hi) throw ValidationError("scan: empty window");
    ScanResult out;
    if (w.is_real()) {
        if (!(w.hi.real() > w.lo.real())) throw ValidationError("scan: empty window");
        const double h = (w.hi.real() - w.lo.real()) / double(samples - 1);
        for (std::size_t i = 0; i < samples; ++i) {
            const Complex z(w.lo.real() + h * i, w.lo.imag());
            out.points.push_back(z);
            out.abs_f.push_back(std::abs(f(z)));
        }
        for (std::size_t i = 1; i + 1 < samples; ++i) {
            if (out.abs_f[i] < out.abs_f[i - 1] && out.abs_f[i] < out.abs_f[i + 1]) {
                out.candidates.push_back({out.points[i - 1], out.points[i + 1], out.points[i]});
            }
        }
        return out;
    }
    const double x0 = std::min(w.lo.real(), w.hi.real()), x1 = std::max(w.lo.real(), w.hi.real());
    const double y0 = std::min(w.lo.imag(), w.hi.imag()), y1 = std::max(w.lo.imag(), w.hi.imag());
    if (!(x1 > x0)) throw ValidationError("scan: empty window");
    const double hx = (x1 - x0) / double(samples - 1), hy = (y1 - y0) / double(samples - 1);
    for (std::size_t j = 0; j < samples; ++j) {
        for (std::size_t i = 0; i < samples; ++i) {
            const Complex z(x0 + hx * i, y0 + hy * j);
            out.points.push_back(z);
            out.abs_f.push_back(std::abs(f(z)));
        }
    }
    auto at = [&](std::size_t i, std::size_t j) { return out.abs_f[j * samples + i]; };
    for (std::size_t j = 1; j + 1 < samples; ++j) {
        for (std::size_t i = 1; i + 1 < samples; ++i) {
            const double v = at(i, j);
            bool is_min = true;
            for (int dj = -1; dj <= 1 && is_min; ++dj) {
                for (int di = -1; di <= 1; ++di) {
                    if (di == 0 && dj == 0) continue;
                    if (!(v < at(i + di, j + dj))) {
                        is_min = false;
                        break;
                    }
                }
            }
            if (is_min) {
                const Complex z = out.points[j * samples + i];
                out.candidates.push_back({z - Complex(hx, 0.0), z + Complex(0.0, hy), z});
            }
        }
    }
    return out;
}

namespace {

double estimate_sigma_max(const Eigen::MatrixXcd& M, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist;
    Eigen::VectorXcd x(M.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double re = dist(rng);
        x(i) = Complex(re, dist(rng));
    }
    x.normalize();
    double s = 0.0;
    for (int it = 0; it < 60; ++it) {
        Eigen::VectorXcd y = M.adjoint() * (M * x);
        const double s_new = std::sqrt(y.norm());
        x = y / y.norm();
        if (std::abs(s_new - s) <= 1e-10 * s_new) {
            s = s_new;
            break;
        }
        s = s_new;
    }
    return s;
}

struct SubspaceBlock {
    Eigen::VectorXd sv;      // Ritz singular values, descending
    Eigen::MatrixXcd x;      // right Ritz vectors, matching sv
    Eigen::MatrixXcd left;   // M^{-H} x, orthogonalized: left near-null directions
};

SubspaceBlock smallest_block(const Eigen::MatrixXcd& M, Eigen::Index k, const NullspaceOptions& opt,
                             std::mt19937_64& rng, double sigma_max) {
    const Eigen::Index n = M.cols();
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
    std::normal_distribution<double> dist;
    Eigen::MatrixXcd X(n, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double re = dist(rng);
            X(i, j) = Complex(re, dist(rng));
        }
    }
    SubspaceBlock b;
    Eigen::VectorXd prev = Eigen::VectorXd::Constant(k, -1.0);
    for (int it = 0; it < opt.max_iter; ++it) {
        Eigen::MatrixXcd Y = lu.adjoint().solve(X);
        Eigen::MatrixXcd Z = lu.solve(Y);
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Z);
        X = qr.householderQ() * Eigen::MatrixXcd::Identity(n, k);
        Eigen::JacobiSVD<Eigen::MatrixXcd> small(M * X, Eigen::ComputeThinV);
        b.sv = small.singularValues();
        X = X * small.matrixV();
        bool done = true;
        for (Eigen::Index j = 0; j + 1 < k; ++j) {
            const double tol = 1e-10 * std::max(b.sv(j), 1e-300) + 1e-15 * sigma_max;
            if (std::abs(b.sv(j) - prev(j)) > tol) done = false;
        }
        prev = b.sv;
        if (done && it > 2) break;
    }
    b.x = X;
    b.left = lu.adjoint().solve(X);
    return b;
}

}  // namespace

NullspaceResult nullspace(const Eigen::MatrixXcd& M, double rel_threshold, const NullspaceOptions& opt) {
    NullspaceResult out;
    const Eigen::Index n = M.cols();
    if (static_cast<std::size_t>(n) <= opt.full_svd_limit) {
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeThinV);
        const Eigen::VectorXd& s = svd.singularValues();
        out.sigma_max = s(0);
        for (Eigen::Index i = n; i-- > 0;) out.smallest_singular.push_back(s(i));
        while (out.multiplicity < static_cast<std::size_t>(n) &&
               out.smallest_singular[out.multiplicity] < rel_threshold * out.sigma_max) {
            ++out.multiplicity;
        }
        out.basis.resize(n, static_cast<Eigen::Index>(out.multiplicity));
        for (std::size_t j = 0; j < out.multiplicity; ++j) out.basis.col(j) = svd.matrixV().col(n - 1 - j);
        out.full_svd = true;
        return out;
    }
    // Subspace iteration on (M^H M)^{-1}, Rayleigh-Ritz via a thin SVD of M X.
    // The near-null block swamps the iteration, so the rest of the spectrum is
    // recomputed on M + sigma_max U P^H with the null pair (P, U) deflated.
    out.full_svd = false;
    out.sigma_max = estimate_sigma_max(M, opt.seed);
    const Eigen::Index k = static_cast<Eigen::Index>(std::min<std::size_t>(opt.block, n));
    std::mt19937_64 rng(opt.seed);
    const SubspaceBlock first = smallest_block(M, k, opt, rng, out.sigma_max);
    for (Eigen::Index j = k; j-- > 0;) out.smallest_singular.push_back(first.sv(j));
    out.smallest_singular.pop_back();  // least converged Ritz value
    while (out.multiplicity < out.smallest_singular.size() &&
           out.smallest_singular[out.multiplicity] < rel_threshold * out.sigma_max) {
        ++out.multiplicity;
    }
    const Eigen::Index m = static_cast<Eigen::Index>(out.multiplicity);
    out.basis.resize(n, m);
    for (Eigen::Index j = 0; j < m; ++j) out.basis.col(j) = first.x.col(k - 1 - j);
    if (m == 0) return out;

    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(first.left.rightCols(m));
    const Eigen::MatrixXcd U = qr.householderQ() * Eigen::MatrixXcd::Identity(n, m);
    const Eigen::MatrixXcd Md = M + out.sigma_max * U * out.basis.adjoint();
    const SubspaceBlock rest = smallest_block(Md, k, opt, rng, out.sigma_max);
    out.smallest_singular.resize(static_cast<std::size_t>(m));
    for (Eigen::Index j = k; j-- > 1;) out.smallest_singular.push_back(rest.sv(j));
    return out;
}

Eigen::VectorXcd solve_dense(const Eigen::MatrixXcd& M, const Eigen::VectorXcd& b) {
    if (M.rows() != b.size() || M.rows() != M.cols()) throw DomainError("solve_dense: dimension mismatch");
    return M.partialPivLu().solve(b);
}

GmresResult gmres(const LinearOperator& apply, const Eigen::VectorXcd& b, double tol, int max_iter, int restart) {
    GmresResult res;
    const Eigen::Index n = b.size();
    res.x = Eigen::VectorXcd::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        res.converged = true;
        return res;
    }
    const int m = restart > 0 ? restart : max_iter;
    Eigen::VectorXcd r = b;
    Eigen::VectorXcd w(n);
    while (res.iterations < max_iter) {
        const double beta = r.norm();
        Eigen::MatrixXcd Q(n, m + 1);
        Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m + 1, m);
        std::vector<Complex> cs(m), sn(m);
        Eigen::VectorXcd g = Eigen::VectorXcd::Zero(m + 1);
        g(0) = beta;
        Q.col(0) = r / beta;
        int j = 0;
        bool done = false;
        for (; j < m && res.iterations < max_iter; ++j) {
            apply(Q.col(j), w);
            // two passes of modified Gram-Schmidt
            for (int pass = 0; pass < 2; ++pass) {
                for (int i = 0; i <= j; ++i) {
                    const Complex h = Q.col(i).dot(w);
                    H(i, j) += h;
                    w -= h * Q.col(i);
                }
            }
            const double hn = w.norm();
            H(j + 1, j) = hn;
            if (hn > 0.0) Q.col(j + 1) = w / hn;
            for (int i = 0; i < j; ++i) {
                const Complex t = std::conj(cs[i]) * H(i, j) + std::conj(sn[i]) * H(i + 1, j);
                H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
                H(i, j) = t;
            }
            const Complex a = H(j, j), bb = H(j + 1, j);
            const double den = std::sqrt(std::norm(a) + std::norm(bb));
            cs[j] = den == 0.0 ? Complex(1.0) : a / den;
            sn[j] = den == 0.0 ? Complex(0.0) : bb / den;
            H(j, j) = den;
            H(j + 1, j) = 0.0;
            g(j + 1) = -sn[j] * g(j);
            g(j) = std::conj(cs[j]) * g(j);
            ++res.iterations;
            const double rel = std::abs(g(j + 1)) / bnorm;
            res.residuals.push_back(rel);
            if (rel <= tol || hn == 0.0) {
                ++j;
                done = true;
                break;
            }
        }
        Eigen::VectorXcd y = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
        res.x += Q.leftCols(j) * y;
        apply(res.x, w);
        r = b - w;
        res.true_residual = r.norm() / bnorm;
        if (done) {
            res.converged = true;
            break;
        }
    }
    return res;
}

GmresResult gmres(const Eigen::MatrixXcd& M, const Eigen::VectorXcd& b, double tol, int max_iter, int restart) {
    if (M.rows() != b.size()) throw DomainError("gmres: dimension mismatch");
    return gmres([&M](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { y.noalias() = M * x; }, b, tol, max_iter,
                 restart);
}

Mode find_mode(const geometry::Discretization& disc, const PhysicalConfig& phys, std::array<Complex, 3> guesses,
               const ModeSearchOptions& opt) {
    Objective obj(disc, phys, ProbeVectors::make(disc.unknown_count(), opt.seed), opt.assembly);
    const MullerResult mr = muller_iterate([&obj](Complex z) { return obj(z); }, guesses, opt.muller);
    Mode mode;
    mode.ne = mr.root;
    mode.iterations = mr.iterations;
    mode.converged = mr.converged;
    const assembly::SystemMatrix M = assembly::assemble(disc, phys, mr.root, opt.assembly);
    const NullspaceResult ns = nullspace(M.m, opt.null_threshold, opt.nullspace);
    mode.multiplicity = ns.multiplicity;
    mode.basis = ns.basis;
    mode.smallest_singular = ns.smallest_singular;
    mode.sigma_max = ns.sigma_max;
    mode.sigma_ratio = ns.smallest_singular.empty() ? 0.0 : ns.smallest_singular.front() / ns.sigma_max;
    return mode;
}

}  // namespace bimode::modefinder
