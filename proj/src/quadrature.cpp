#include "bimode/quadrature.hpp"

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <mutex>
#include <numeric>

namespace bimode::quadrature {
namespace {

QuadRule make_gauss_legendre(std::size_t n) {
    QuadRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 1; k < n; ++k) {
                double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-17) break;
        }
        double p0 = 1.0, p1 = x;
        for (std::size_t k = 1; k < n; ++k) {
            double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

// Legendre values P_0..P_{m-1} and derivatives at x.
void legendre_all(std::size_t m, double x, double* p, double* dp) {
    p[0] = 1.0;
    if (dp) dp[0] = 0.0;
    if (m == 1) return;
    p[1] = x;
    if (dp) dp[1] = 1.0;
    for (std::size_t j = 1; j + 1 < m; ++j) {
        p[j + 1] = ((2.0 * j + 1.0) * x * p[j] - j * p[j - 1]) / (j + 1.0);
        if (dp) dp[j + 1] = dp[j - 1] + (2.0 * j + 1.0) * p[j];
    }
}

// Generalized Gaussian quadrature for {P_j(s), P_j(s) log s : j < n} on [0,1].
//
// Construction (deterministic, no random input):
//   1. Reference discretization: dyadic panels [2^-(k+1), 2^-k], k < 60, each
//      with 24 Gauss-Legendre points.
//   2. SVD of the sqrt(w)-weighted samples; keep singular values above
//      1e-15 of the largest. The left singular vectors define an orthonormal
//      basis u_l and exact moments mu_l.
//   3. Column-pivoted QR on the weighted basis samples picks one node per
//      basis function; weights solve the square moment system.
//   4. Node elimination: repeatedly try dropping the least significant node
//      (w_i sum_l u_l(x_i)^2) and re-solve the moment equations by damped
//      Gauss-Newton in (x, w); keep the reduced rule if the moment residual
//      is below 1e-14 and all weights stay positive.
class GgqBuilder {
public:
    explicit GgqBuilder(std::size_t n) : n_(n) {
        const QuadRule& g = gauss_legendre(m_);
        const std::size_t total = panels_ * m_;
        s_.resize(total);
        w_.resize(total);
        for (std::size_t k = 0; k < panels_; ++k) {
            const double a = std::ldexp(1.0, -static_cast<int>(k) - 1);
            const double b = std::ldexp(1.0, -static_cast<int>(k));
            for (std::size_t i = 0; i < m_; ++i) {
                s_[k * m_ + i] = a + 0.5 * (b - a) * (g.nodes[i] + 1.0);
                w_[k * m_ + i] = 0.5 * (b - a) * g.weights[i];
            }
        }
        Eigen::MatrixXd f(total, 2 * n_);
        std::vector<double> p(n_);
        for (std::size_t q = 0; q < total; ++q) {
            legendre_all(n_, 2.0 * s_[q] - 1.0, p.data(), nullptr);
            const double sw = std::sqrt(w_[q]);
            const double ls = std::log(s_[q]);
            for (std::size_t j = 0; j < n_; ++j) {
                f(q, j) = sw * p[j];
                f(q, n_ + j) = sw * p[j] * ls;
            }
        }
        Eigen::BDCSVD<Eigen::MatrixXd> svd(f, Eigen::ComputeThinU);
        const auto& sv = svd.singularValues();
        rank_ = 0;
        while (rank_ < static_cast<std::size_t>(sv.size()) && sv(rank_) > 1e-15 * sv(0)) ++rank_;
        Eigen::MatrixXd u = svd.matrixU().leftCols(rank_);
        mu_ = Eigen::VectorXd::Zero(rank_);
        ufun_.resize(total, rank_);
        for (std::size_t q = 0; q < total; ++q) {
            const double sw = std::sqrt(w_[q]);
            for (std::size_t l = 0; l < rank_; ++l) {
                mu_(l) += sw * u(q, l);
                ufun_(q, l) = u(q, l) / sw;
            }
        }
        // Legendre coefficients of each basis function on each reference panel.
        coef_.resize(panels_);
        for (std::size_t k = 0; k < panels_; ++k) {
            coef_[k] = Eigen::MatrixXd::Zero(m_, rank_);
            std::vector<double> pl(m_);
            for (std::size_t i = 0; i < m_; ++i) {
                legendre_all(m_, g.nodes[i], pl.data(), nullptr);
                for (std::size_t l = 0; l < m_; ++l) {
                    const double c = (2.0 * l + 1.0) / 2.0 * g.weights[i] * pl[l];
                    coef_[k].row(l) += c * ufun_.row(k * m_ + i);
                }
            }
        }
    }

    QuadRule build() {
        const std::size_t total = panels_ * m_;
        Eigen::MatrixXd a(rank_, total);
        for (std::size_t q = 0; q < total; ++q) a.col(q) = ufun_.row(q).transpose() * std::sqrt(w_[q]);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
        std::vector<std::size_t> sel(rank_);
        for (std::size_t l = 0; l < rank_; ++l) sel[l] = qr.colsPermutation().indices()(l);
        std::sort(sel.begin(), sel.end());
        Eigen::VectorXd x(rank_);
        Eigen::MatrixXd us(rank_, rank_);
        for (std::size_t l = 0; l < rank_; ++l) {
            x(l) = s_[sel[l]];
            us.col(l) = ufun_.row(sel[l]).transpose();
        }
        Eigen::VectorXd w = us.partialPivLu().solve(mu_);

        for (;;) {
            Eigen::MatrixXd u, du;
            eval(x, u, du);
            const Eigen::Index nn = x.size();
            std::vector<std::pair<double, Eigen::Index>> sig(nn);
            for (Eigen::Index i = 0; i < nn; ++i) sig[i] = {std::abs(w(i) * u.row(i).squaredNorm()), i};
            std::sort(sig.begin(), sig.end());
            bool reduced = false;
            for (const auto& [_, drop] : sig) {
                Eigen::VectorXd xt(nn - 1), wt(nn - 1);
                for (Eigen::Index i = 0, j = 0; i < nn; ++i) {
                    if (i == drop) continue;
                    xt(j) = x(i);
                    wt(j) = w(i);
                    ++j;
                }
                const double res = gauss_newton(xt, wt);
                if (res < 1e-14 && wt.minCoeff() > 0.0) {
                    x = xt;
                    w = wt;
                    reduced = true;
                    break;
                }
            }
            if (!reduced) break;
        }
        std::vector<std::size_t> order(x.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return x(i) < x(j); });
        QuadRule rule;
        rule.kind = RuleKind::log_augmented;
        for (std::size_t i : order) {
            rule.nodes.push_back(x(i));
            rule.weights.push_back(w(i));
        }
        return rule;
    }

private:
    // u(i, l) = u_l(x_i), du = d/dx.
    void eval(const Eigen::VectorXd& x, Eigen::MatrixXd& u, Eigen::MatrixXd& du) const {
        u.resize(x.size(), rank_);
        du.resize(x.size(), rank_);
        std::vector<double> p(m_), dp(m_);
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            int k = x(i) < 1.0 ? static_cast<int>(std::floor(-std::log2(x(i)))) : 0;
            k = std::clamp(k, 0, static_cast<int>(panels_) - 1);
            const double a = std::ldexp(1.0, -k - 1);
            const double b = std::ldexp(1.0, -k);
            const double t = 2.0 * (x(i) - a) / (b - a) - 1.0;
            legendre_all(m_, t, p.data(), dp.data());
            Eigen::Map<const Eigen::RowVectorXd> pv(p.data(), m_), dpv(dp.data(), m_);
            u.row(i) = pv * coef_[k];
            du.row(i) = dpv * coef_[k] * (2.0 / (b - a));
        }
    }

    double residual(const Eigen::VectorXd& x, const Eigen::VectorXd& w) const {
        Eigen::MatrixXd u, du;
        eval(x, u, du);
        return (u.transpose() * w - mu_).norm();
    }

    double gauss_newton(Eigen::VectorXd& x, Eigen::VectorXd& w) const {
        const Eigen::Index nn = x.size();
        double rn = residual(x, w);
        for (int it = 0; it < 30 && rn >= 1e-15; ++it) {
            Eigen::MatrixXd u, du;
            eval(x, u, du);
            Eigen::VectorXd res = u.transpose() * w - mu_;
            Eigen::MatrixXd jac(rank_, 2 * nn);
            for (Eigen::Index i = 0; i < nn; ++i) {
                jac.col(i) = du.row(i).transpose() * w(i);
                jac.col(nn + i) = u.row(i).transpose();
            }
            Eigen::VectorXd d = jac.completeOrthogonalDecomposition().solve(-res);
            double t = 1.0;
            const double r0 = res.norm();
            Eigen::VectorXd xn = x, wn = w;
            double rnew = r0;
            bool moved = false;
            while (t > 1e-6) {
                xn = x + t * d.head(nn);
                wn = w + t * d.tail(nn);
                if (xn.minCoeff() > 0.0 && xn.maxCoeff() < 1.0) {
                    rnew = residual(xn, wn);
                    if (rnew < r0 || rnew < 1e-15) {
                        moved = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if (!moved) break;
            x = xn;
            w = wn;
            rn = rnew;
        }
        return rn;
    }

    std::size_t n_;
    std::size_t m_ = 24;
    std::size_t panels_ = 60;
    std::size_t rank_ = 0;
    std::vector<double> s_, w_;
    Eigen::MatrixXd ufun_;
    Eigen::VectorXd mu_;
    std::vector<Eigen::MatrixXd> coef_;
};

template <class Make>
const QuadRule& cached(std::map<std::size_t, std::unique_ptr<QuadRule>>& cache, std::mutex& mtx, std::size_t n,
                       Make make) {
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return *it->second;
    auto rule = std::make_unique<QuadRule>(make(n));
    const QuadRule& ref = *rule;
    cache.emplace(n, std::move(rule));
    return ref;
}

}  // namespace

const QuadRule& gauss_legendre(std::size_t n) {
    if (n == 0) throw DomainError("gauss_legendre: n must be positive");
    static std::map<std::size_t, std::unique_ptr<QuadRule>> cache;
    static std::mutex mtx;
    return cached(cache, mtx, n, make_gauss_legendre);
}

const QuadRule& log_endpoint_rule(std::size_t n) {
    if (n < 2 || n > 24) throw ConfigError("log_endpoint_rule: order out of range");
    static std::map<std::size_t, std::unique_ptr<QuadRule>> cache;
    static std::mutex mtx;
    return cached(cache, mtx, n, [](std::size_t k) { return GgqBuilder(k).build(); });
}

bool log_rule_supported(std::size_t p) { return p == 10 || p == 16; }

QuadRule log_ggq_rule(std::size_t p, std::size_t target_index) {
    if (!log_rule_supported(p)) throw ConfigError("log_ggq_rule: unsupported p " + std::to_string(p));
    if (target_index < 1 || target_index > p) throw DomainError("log_ggq_rule: target index out of range");
    const QuadRule& one = log_endpoint_rule(p);
    const double xt = gauss_legendre(p).nodes[target_index - 1];
    const double left = 1.0 + xt;
    const double right = 1.0 - xt;
    QuadRule rule;
    rule.kind = RuleKind::log_augmented;
    for (std::size_t i = one.nodes.size(); i-- > 0;) {
        rule.nodes.push_back(xt - left * one.nodes[i]);
        rule.weights.push_back(left * one.weights[i]);
    }
    for (std::size_t i = 0; i < one.nodes.size(); ++i) {
        rule.nodes.push_back(xt + right * one.nodes[i]);
        rule.weights.push_back(right * one.weights[i]);
    }
    return rule;
}

const std::vector<double>& barycentric_weights(std::size_t n) {
    static std::map<std::size_t, std::vector<double>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    const QuadRule& g = gauss_legendre(n);
    std::vector<double> bw(n);
    // Closed form for Gauss-Legendre nodes: (-1)^i sqrt((1 - x_i^2) w_i).
    for (std::size_t i = 0; i < n; ++i) {
        bw[i] = ((i % 2) ? -1.0 : 1.0) * std::sqrt((1.0 - g.nodes[i] * g.nodes[i]) * g.weights[i]);
    }
    return cache.emplace(n, std::move(bw)).first->second;
}

void lagrange_basis(std::size_t n, double x, std::span<double> out) {
    const QuadRule& g = gauss_legendre(n);
    const std::vector<double>& bw = barycentric_weights(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (x == g.nodes[i]) {
            std::fill(out.begin(), out.begin() + n, 0.0);
            out[i] = 1.0;
            return;
        }
    }
    double denom = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = bw[i] / (x - g.nodes[i]);
        denom += out[i];
    }
    for (std::size_t i = 0; i < n; ++i) out[i] /= denom;
}

AdaptiveResult adaptive_integrate(const VectorIntegrand& f, double a, double b, std::size_t dim,
                                  const AdaptiveOptions& opt) {
    AdaptiveResult res;
    res.value.assign(dim, Complex(0.0));
    std::vector<Complex> coarse(dim), tmp(dim);
    auto fn = [&](double x, std::span<Complex> out) { f(x, out); };
    detail::apply_rule(fn, gauss_legendre(opt.order), a, b, coarse, tmp);
    const double tol = std::max(opt.abs_tol, opt.rel_tol * detail::max_abs(coarse));
    res.converged = detail::adaptive_accumulate(fn, a, b, res.value, opt, tol, res.evaluations, res.error_estimate);
    if (!res.converged) throw ConvergenceError("adaptive_integrate: subdivision limit reached", res.error_estimate);
    return res;
}

Complex adaptive_integrate(const std::function<Complex(double)>& f, double a, double b, const AdaptiveOptions& opt) {
    return adaptive_integrate([&](double x, std::span<Complex> out) { out[0] = f(x); }, a, b, 1, opt).value[0];
}

AdaptiveResult adaptive_integrate_log_endpoint(const VectorIntegrand& f, double a, double b, std::size_t dim,
                                               const AdaptiveOptions& opt) {
    AdaptiveResult res;
    res.value.assign(dim, Complex(0.0));
    std::vector<Complex> coarse(dim), tmp(dim);
    auto fn = [&](double x, std::span<Complex> out) { f(x, out); };
    detail::apply_endpoint_rule(fn, log_endpoint_rule(opt.order), a, b, coarse, tmp);
    const double tol = std::max(opt.abs_tol, opt.rel_tol * detail::max_abs(coarse));
    res.converged =
        detail::adaptive_accumulate_log_endpoint(fn, a, b, res.value, opt, tol, res.evaluations, res.error_estimate);
    if (!res.converged) throw ConvergenceError("adaptive_integrate_log_endpoint: refinement limit", res.error_estimate);
    return res;
}

}  // namespace bimode::quadrature
