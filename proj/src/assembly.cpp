#include "bimode/assembly.hpp"

#include "bimode/quadrature.hpp"

#include <cstdlib>
#include <thread>

namespace bimode::assembly {

using geometry::Discretization;
using kernels::Block;

unsigned thread_count(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("BIMODE_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return static_cast<unsigned>(n);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

namespace {

struct PanelInfo {
    Vec2 center;
    double length;
};

class Assembler {
public:
    Assembler(Eigen::MatrixXcd& m, const Discretization& disc, const kernels::WavenumberSet& ws,
              const AssemblyOptions& opt)
        : m_(m), disc_(disc), ws_(ws), opt_(opt), p_(disc.p()) {
        for (std::size_t b = 0; b < disc.panel_count(); ++b) {
            const geometry::FramePoint f = disc.panel_point(b, 0.0);
            info_.push_back({f.position(), disc.panel_arclength(b)});
        }
        kmax_ext_ = std::abs(ws.k[0]);
    }

    void target(std::size_t i) {
        const auto& nodes = disc_.nodes();
        const geometry::Node& tn = nodes[i];
        const Discretization::PointRef P = disc_.node_ref(i);
        const std::size_t ia = tn.interface;
        const std::size_t region = disc_.interfaces()[ia].region;
        const double kmax_self = std::max(kmax_ext_, std::abs(ws_.k[region]));
        std::size_t rows[4];
        for (int c = 0; c < 4; ++c) rows[c] = disc_.unknown_index_of_node(i, c);
        Block blk;
        std::vector<Complex> acc(16 * p_);
        const bool matched = ws_.n[region] == ws_.n[0];
        for (std::size_t b = 0; b < disc_.panel_count(); ++b) {
            const bool same = disc_.panel_interface(b) == ia;
            if (same && matched) continue;
            const std::size_t first = disc_.panel(b).first_node;
            const PanelInfo& pi_ = info_[b];
            const double dist = norm(tn.frame.position() - pi_.center);
            const double kmax = same ? kmax_self : kmax_ext_;
            const bool self = tn.panel == b;
            const bool near = dist < opt_.near_factor * pi_.length || kmax * pi_.length > opt_.oscillation_limit;
            if (!self && !near) {
                for (std::size_t q = 0; q < p_; ++q) {
                    const std::size_t j = first + q;
                    const Discretization::PointRef Q = disc_.node_ref(j);
                    const kernels::PairGeometry g = kernels::pair_geometry(disc_.separation(P, Q), P.frame, Q.frame);
                    if (same) {
                        kernels::interface_block(ws_, region, g, blk);
                    } else {
                        kernels::exterior_block(ws_, g, blk);
                    }
                    scatter(rows, j, blk, nodes[j].weight);
                }
                continue;
            }
            integrate_panel(P, b, same, region, self, self ? i - first : 0, acc);
            for (std::size_t q = 0; q < p_; ++q) {
                const std::size_t j = first + q;
                for (int e = 0; e < 16; ++e) blk[e] = acc[e * p_ + q];
                scatter(rows, j, blk, 1.0);
            }
        }
    }

private:
    void scatter(const std::size_t rows[4], std::size_t j, const Block& blk, double w) {
        for (int cc = 0; cc < 4; ++cc) {
            const std::size_t col = disc_.unknown_index_of_node(j, cc);
            for (int rr = 0; rr < 4; ++rr) {
                const Complex v = blk[rr * 4 + cc];
                if (v != Complex(0.0)) m_(rows[rr], col) += w * v;
            }
        }
    }

    void integrate_panel(const Discretization::PointRef& P, std::size_t b, bool same, std::size_t region, bool self,
                         std::size_t target_local, std::vector<Complex>& acc) {
        const double half = disc_.panel_half_width(b);
        std::vector<double> basis(p_);
        Block blk;
        auto f = [&](double x, std::span<Complex> out) {
            const Discretization::PointRef Q = disc_.panel_ref(b, x);
            const kernels::PairGeometry g = kernels::pair_geometry(disc_.separation(P, Q), P.frame, Q.frame);
            if (same) {
                kernels::interface_block(ws_, region, g, blk);
            } else {
                kernels::exterior_block(ws_, g, blk);
            }
            quadrature::lagrange_basis(p_, x, basis);
            const double s = Q.frame.speed * half;
            for (int e = 0; e < 16; ++e) {
                const Complex v = blk[e] * s;
                for (std::size_t q = 0; q < p_; ++q) out[e * p_ + q] = v * basis[q];
            }
        };
        quadrature::AdaptiveOptions qo;
        qo.abs_tol = 0.0;
        qo.rel_tol = opt_.tol;
        qo.order = p_ <= 16 ? p_ : 16;
        if (!quadrature::log_rule_supported(qo.order)) qo.order = 10;
        std::fill(acc.begin(), acc.end(), Complex(0.0));
        if (self) {
            const double xt = quadrature::gauss_legendre(p_).nodes[target_local];
            auto left = quadrature::adaptive_integrate_log_endpoint(f, xt, -1.0, acc.size(), qo);
            auto right = quadrature::adaptive_integrate_log_endpoint(f, xt, 1.0, acc.size(), qo);
            for (std::size_t d = 0; d < acc.size(); ++d) acc[d] = right.value[d] - left.value[d];
        } else {
            auto res = quadrature::adaptive_integrate(f, -1.0, 1.0, acc.size(), qo);
            acc = std::move(res.value);
        }
    }

    Eigen::MatrixXcd& m_;
    const Discretization& disc_;
    const kernels::WavenumberSet& ws_;
    const AssemblyOptions& opt_;
    std::size_t p_;
    std::vector<PanelInfo> info_;
    double kmax_ext_ = 0.0;
};

}  // namespace

Eigen::VectorXcd diagonal_part(const Discretization& disc, const PhysicalConfig& phys) {
    const std::vector<double> n = phys.region_indices();
    Eigen::VectorXcd d(disc.unknown_count());
    for (std::size_t i = 0; i < disc.node_count(); ++i) {
        const std::size_t region = disc.interfaces()[disc.nodes()[i].interface].region;
        if (region >= n.size()) throw ValidationError("assembly: interface region has no refractive index");
        const double wj = 0.5 * (n[0] * n[0] + n[region] * n[region]);
        d(disc.unknown_index_of_node(i, 0)) = wj;
        d(disc.unknown_index_of_node(i, 1)) = wj;
        d(disc.unknown_index_of_node(i, 2)) = 1.0;
        d(disc.unknown_index_of_node(i, 3)) = 1.0;
    }
    return d;
}

void assemble_into(Eigen::MatrixXcd& m, const Discretization& disc, const PhysicalConfig& phys, Complex ne,
                   const AssemblyOptions& opt) {
    phys.validate();
    const std::vector<double> n = phys.region_indices();
    const Eigen::VectorXcd dpart = diagonal_part(disc, phys);
    const auto ws = kernels::WavenumberSet::make(n, ne);
    const Eigen::Index size = static_cast<Eigen::Index>(disc.unknown_count());
    if (m.rows() != size || m.cols() != size) m.resize(size, size);
    m.setZero();
    {
        const unsigned nt = std::min<unsigned>(thread_count(opt.threads), static_cast<unsigned>(disc.node_count()));
        if (nt <= 1) {
            Assembler as(m, disc, ws, opt);
            for (std::size_t i = 0; i < disc.node_count(); ++i) as.target(i);
        } else {
            // Each node owns its four rows; threads write disjoint rows.
            std::vector<std::thread> pool;
            std::vector<std::exception_ptr> errs(nt);
            for (unsigned t = 0; t < nt; ++t) {
                pool.emplace_back([&, t] {
                    try {
                        Assembler local(m, disc, ws, opt);
                        for (std::size_t i = t; i < disc.node_count(); i += nt) local.target(i);
                    } catch (...) {
                        errs[t] = std::current_exception();
                    }
                });
            }
            for (auto& th : pool) th.join();
            for (auto& e : errs) {
                if (e) std::rethrow_exception(e);
            }
        }
    }
    m.diagonal() += dpart;
}

SystemMatrix assemble(const Discretization& disc, const PhysicalConfig& phys, Complex ne, const AssemblyOptions& opt) {
    SystemMatrix s;
    s.ne = ne;
    assemble_into(s.m, disc, phys, ne, opt);
    return s;
}

DensityVector apply(const SystemMatrix& M, const DensityVector& x) {
    if (x.size() != M.m.cols()) throw DomainError("apply: dimension mismatch");
    return M.m * x;
}

}  // namespace bimode::assembly
