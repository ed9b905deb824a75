#include "bimode/geometry.hpp"

#include "bimode/quadrature.hpp"

#include <algorithm>

namespace bimode::geometry {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    auto orient = [](Vec2 p, Vec2 q, Vec2 r) { return cross(q - p, r - p); };
    const double o1 = orient(a, b, c), o2 = orient(a, b, d);
    const double o3 = orient(c, d, a), o4 = orient(c, d, b);
    return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

void validate(const CurveSpec& spec) {
    std::visit(overloaded{
                   [](const Circle& c) {
                       if (!(c.radius > 0.0)) throw ValidationError("circle: radius must be positive");
                   },
                   [](const Ellipse& e) {
                       if (!(e.a > 0.0 && e.b > 0.0)) throw ValidationError("ellipse: semi-axes must be positive");
                   },
                   [](const PerturbedCircle& p) {
                       if (!(p.diameter > 0.0)) throw ValidationError("perturbed circle: diameter must be positive");
                       if (!(std::abs(p.amplitude) < 1.0)) throw ValidationError("perturbed circle: |h| must be < 1");
                       if (p.lobes < 1) throw ValidationError("perturbed circle: lobe count must be >= 1");
                   },
                   [](const Polygon& p) {
                       const auto& v = p.vertices;
                       const std::size_t n = v.size();
                       if (n < 3) throw ValidationError("polygon: need at least 3 vertices");
                       double area = 0.0;
                       for (std::size_t i = 0; i < n; ++i) {
                           if (norm(v[(i + 1) % n] - v[i]) == 0.0) throw ValidationError("polygon: repeated vertex");
                           area += cross(v[i], v[(i + 1) % n]);
                       }
                       for (std::size_t i = 0; i < n; ++i) {
                           for (std::size_t j = i + 2; j < n; ++j) {
                               if (i == 0 && j == n - 1) continue;
                               if (segments_intersect(v[i], v[i + 1], v[j], v[(j + 1) % n]))
                                   throw ValidationError("polygon: self-intersecting");
                           }
                       }
                       if (!(area > 0.0)) throw ValidationError("polygon: vertices must be counterclockwise");
                   },
               },
               spec);
}

}  // namespace

CurveSpec scaled(const CurveSpec& spec, double f) {
    return std::visit(overloaded{
                          [f](const Circle& c) -> CurveSpec { return Circle{f * c.center, f * c.radius}; },
                          [f](const Ellipse& e) -> CurveSpec { return Ellipse{f * e.center, f * e.a, f * e.b}; },
                          [f](const PerturbedCircle& p) -> CurveSpec {
                              return PerturbedCircle{f * p.center, f * p.diameter, p.amplitude, p.lobes};
                          },
                          [f](const Polygon& p) -> CurveSpec {
                              Polygon q;
                              for (Vec2 v : p.vertices) q.vertices.push_back(f * v);
                              return q;
                          },
                      },
                      spec);
}

Curve::Curve(CurveSpec spec) : spec_(std::move(spec)) {
    validate(spec_);
    if (const auto* poly = std::get_if<Polygon>(&spec_)) {
        const auto& v = poly->vertices;
        pieces_ = v.size();
        for (std::size_t i = 0; i < v.size(); ++i) {
            const Vec2 e = v[(i + 1) % v.size()] - v[i];
            const double len = norm(e);
            side_len_.push_back(len);
            side_dir_.push_back((1.0 / len) * e);
        }
    }
}

Curve build_curve(const CurveSpec& spec) { return Curve(spec); }

double Curve::piece_length(std::size_t piece) const { return has_corners() ? side_len_.at(piece) : 2.0 * pi; }

FramePoint Curve::frame(std::size_t piece, int anchor, double t) const {
    FramePoint f;
    Vec2 deriv;
    std::visit(overloaded{
                   [&](const Circle& c) {
                       f.anchor = c.center;
                       f.offset = {c.radius * std::cos(t), c.radius * std::sin(t)};
                       deriv = {-c.radius * std::sin(t), c.radius * std::cos(t)};
                   },
                   [&](const Ellipse& e) {
                       f.anchor = e.center;
                       f.offset = {e.a * std::cos(t), e.b * std::sin(t)};
                       deriv = {-e.a * std::sin(t), e.b * std::cos(t)};
                   },
                   [&](const PerturbedCircle& p) {
                       const double r = 0.5 * p.diameter * (1.0 + p.amplitude * std::sin(p.lobes * t));
                       const double dr = 0.5 * p.diameter * p.amplitude * p.lobes * std::cos(p.lobes * t);
                       const double c = std::cos(t), s = std::sin(t);
                       f.anchor = p.center;
                       f.offset = {r * c, r * s};
                       deriv = {dr * c - r * s, dr * s + r * c};
                   },
                   [&](const Polygon& p) {
                       const std::size_t n = p.vertices.size();
                       f.anchor = anchor == 0 ? p.vertices[piece] : p.vertices[(piece + 1) % n];
                       f.offset = t * side_dir_[piece];
                       deriv = side_dir_[piece];
                   },
               },
               spec_);
    f.speed = norm(deriv);
    f.tangent = (1.0 / f.speed) * deriv;
    f.normal = {f.tangent.y, -f.tangent.x};
    return f;
}

FramePoint Curve::frame(double t) const {
    if (!has_corners()) return frame(0, 0, t);
    const double fl = std::floor(t);
    std::size_t side = static_cast<std::size_t>(std::clamp(fl, 0.0, double(pieces_ - 1)));
    return frame(side, 0, (t - double(side)) * side_len_[side]);
}

std::size_t Curve::anchor_slot(std::size_t piece, int anchor) const {
    if (!has_corners()) return 0;
    return (piece + static_cast<std::size_t>(anchor)) % pieces_;
}

std::size_t Curve::anchor_slots() const { return has_corners() ? pieces_ : 1; }

Vec2 Curve::chord(double t1, double t2) const {
    const double h = 0.5 * (t1 - t2);
    const double m = 0.5 * (t1 + t2);
    const double sh = std::sin(h);
    return std::visit(overloaded{
                          [&](const Circle& c) -> Vec2 {
                              return {-2.0 * c.radius * std::sin(m) * sh, 2.0 * c.radius * std::cos(m) * sh};
                          },
                          [&](const Ellipse& e) -> Vec2 {
                              return {-2.0 * e.a * std::sin(m) * sh, 2.0 * e.b * std::cos(m) * sh};
                          },
                          [&](const PerturbedCircle& p) -> Vec2 {
                              const double r1 = 0.5 * p.diameter * (1.0 + p.amplitude * std::sin(p.lobes * t1));
                              const double dr = p.diameter * p.amplitude * std::cos(p.lobes * m) * std::sin(p.lobes * h);
                              const Vec2 de{-2.0 * std::sin(m) * sh, 2.0 * std::cos(m) * sh};
                              const Vec2 e2{std::cos(t2), std::sin(t2)};
                              return r1 * de + dr * e2;
                          },
                          [&](const Polygon&) -> Vec2 {
                              throw DomainError("chord: polygon pieces use anchors");
                          },
                      },
                      spec_);
}

double Curve::perimeter() const {
    if (has_corners()) {
        double s = 0.0;
        for (double l : side_len_) s += l;
        return s;
    }
    if (const auto* c = std::get_if<Circle>(&spec_)) return 2.0 * pi * c->radius;
    quadrature::AdaptiveOptions opt;
    opt.abs_tol = 0.0;
    opt.rel_tol = 1e-15;
    double total = 0.0;
    for (int k = 0; k < 16; ++k) {
        total += quadrature::adaptive_integrate(
                     [this](double t) { return Complex(frame(0, 0, t).speed); }, 2.0 * pi * k / 16, 2.0 * pi * (k + 1) / 16, opt)
                     .real();
    }
    return total;
}

double Curve::signed_area() const {
    if (const auto* p = std::get_if<Polygon>(&spec_)) {
        double a = 0.0;
        const auto& v = p->vertices;
        for (std::size_t i = 0; i < v.size(); ++i) a += cross(v[i], v[(i + 1) % v.size()]);
        return 0.5 * a;
    }
    quadrature::AdaptiveOptions opt;
    opt.abs_tol = 0.0;
    opt.rel_tol = 1e-15;
    double total = 0.0;
    for (int k = 0; k < 16; ++k) {
        total += quadrature::adaptive_integrate(
                     [this](double t) {
                         FramePoint f = frame(0, 0, t);
                         return Complex(0.5 * f.speed * cross(f.offset, f.tangent));
                     },
                     2.0 * pi * k / 16, 2.0 * pi * (k + 1) / 16, opt)
                     .real();
    }
    return total;
}

std::vector<Panel> panelize(const Curve& curve, std::size_t n_panels, std::size_t p, const CornerGrading& grading) {
    if (n_panels < 1) throw ValidationError("panelize: n_panels must be >= 1");
    if (p < 2) throw ValidationError("panelize: p must be >= 2");
    std::vector<Panel> out;
    if (!curve.has_corners()) {
        if (grading.enabled) throw ValidationError("panelize: corner grading requested for a curve without corners");
        const double h = 2.0 * pi / n_panels;
        for (std::size_t k = 0; k < n_panels; ++k) {
            out.push_back({0, 0, k * h, k + 1 == n_panels ? 2.0 * pi : (k + 1) * h, 0});
        }
        return out;
    }
    if (!grading.enabled) throw ValidationError("panelize: polygon curves require corner grading");
    if (n_panels < 2) throw ValidationError("panelize: polygons need at least 2 base panels per side");
    if (grading.levels < 0 || grading.levels > 60) throw ValidationError("panelize: grading levels out of range");
    const int levels = grading.levels;
    for (std::size_t side = 0; side < curve.piece_count(); ++side) {
        const double len = curve.piece_length(side);
        const double h = len / n_panels;
        // start corner: [0, h 2^-L], [h 2^-L, h 2^-(L-1)], ..., [h/2, h]
        out.push_back({side, 0, 0.0, std::ldexp(h, -levels), 0});
        for (int j = levels; j >= 1; --j) out.push_back({side, 0, std::ldexp(h, -j), std::ldexp(h, -j + 1), 0});
        for (std::size_t k = 1; k + 1 < n_panels; ++k) {
            const double a = k * h, b = (k + 1) * h;
            if (0.5 * (a + b) <= 0.5 * len) {
                out.push_back({side, 0, a, b, 0});
            } else {
                out.push_back({side, 1, a - len, b - len, 0});
            }
        }
        for (int j = 1; j <= levels; ++j) out.push_back({side, 1, -std::ldexp(h, -j + 1), -std::ldexp(h, -j), 0});
        out.push_back({side, 1, -std::ldexp(h, -levels), 0.0, 0});
    }
    return out;
}

Discretization::Discretization(const std::vector<InterfaceSpec>& specs, std::size_t p) : p_(p) {
    if (specs.empty()) throw ValidationError("discretization: no interfaces");
    const quadrature::QuadRule& g = quadrature::gauss_legendre(p);
    std::size_t anchors = 0;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (specs[i].region == 0) throw ValidationError("discretization: region 0 is the exterior");
        Interface iface{Curve(specs[i].curve), {}, specs[i].region, nodes_.size(), 0, panel_owner_.size(), anchors};
        iface.panels = panelize(iface.curve, specs[i].n_panels, p, specs[i].grading);
        anchors += iface.curve.anchor_slots();
        for (std::size_t k = 0; k < iface.panels.size(); ++k) {
            Panel& pan = iface.panels[k];
            pan.first_node = nodes_.size();
            const std::size_t gp = panel_owner_.size();
            panel_owner_.push_back(i);
            panel_local_.push_back(k);
            const double half = 0.5 * (pan.t1 - pan.t0);
            for (std::size_t q = 0; q < p; ++q) {
                Node n;
                n.t = pan.t0 + half * (g.nodes[q] + 1.0);
                n.frame = iface.curve.frame(pan.piece, pan.anchor, n.t);
                n.weight = n.frame.speed * half * g.weights[q];
                n.panel = gp;
                n.interface = i;
                n.anchor_id = iface.first_anchor + iface.curve.anchor_slot(pan.piece, pan.anchor);
                nodes_.push_back(n);
            }
        }
        iface.node_count = nodes_.size() - iface.first_node;
        interfaces_.push_back(std::move(iface));
    }
}

const Panel& Discretization::panel(std::size_t global) const {
    return interfaces_[panel_owner_[global]].panels[panel_local_[global]];
}

std::size_t Discretization::unknown_index(std::size_t iface, int component, std::size_t local_node) const {
    const Interface& f = interfaces_[iface];
    return 4 * f.first_node + static_cast<std::size_t>(component) * f.node_count + local_node;
}

std::size_t Discretization::unknown_index_of_node(std::size_t node, int component) const {
    const Interface& f = interfaces_[nodes_[node].interface];
    return 4 * f.first_node + static_cast<std::size_t>(component) * f.node_count + (node - f.first_node);
}

FramePoint Discretization::panel_point(std::size_t gp, double x, double* t_out) const {
    const Panel& pan = panel(gp);
    const double t = pan.t0 + 0.5 * (pan.t1 - pan.t0) * (x + 1.0);
    if (t_out) *t_out = t;
    return interfaces_[panel_owner_[gp]].curve.frame(pan.piece, pan.anchor, t);
}

double Discretization::panel_half_width(std::size_t gp) const {
    const Panel& pan = panel(gp);
    return 0.5 * (pan.t1 - pan.t0);
}

double Discretization::panel_arclength(std::size_t gp) const {
    double s = 0.0;
    for (std::size_t q = 0; q < p_; ++q) s += nodes_[panel(gp).first_node + q].weight;
    return s;
}

Discretization::PointRef Discretization::node_ref(std::size_t node) const {
    const Node& n = nodes_[node];
    return {n.frame, n.interface, panel(n.panel).piece, n.t, n.anchor_id};
}

Discretization::PointRef Discretization::panel_ref(std::size_t gp, double x) const {
    double t = 0.0;
    FramePoint f = panel_point(gp, x, &t);
    const std::size_t i = panel_owner_[gp];
    const Panel& pan = panel(gp);
    return {f, i, pan.piece, t, interfaces_[i].first_anchor + interfaces_[i].curve.anchor_slot(pan.piece, pan.anchor)};
}

Vec2 Discretization::separation(const PointRef& p, const PointRef& q) const {
    if (p.interface == q.interface && !interfaces_[p.interface].curve.has_corners()) {
        return interfaces_[p.interface].curve.chord(p.t, q.t);
    }
    if (p.anchor_id == q.anchor_id) return p.frame.offset - q.frame.offset;
    return (p.frame.anchor - q.frame.anchor) + (p.frame.offset - q.frame.offset);
}

}  // namespace bimode::geometry
