#pragma once

#include "bimode/common.hpp"

#include <cstddef>
#include <variant>
#include <vector>

namespace bimode::geometry {

struct Circle {
    Vec2 center;
    double radius = 0.0;
};

// Semi-axis a along x, b along y.
struct Ellipse {
    Vec2 center;
    double a = 0.0;
    double b = 0.0;
};

// r(theta) = (d/2) (1 + h sin(m theta)) about center.
struct PerturbedCircle {
    Vec2 center;
    double diameter = 0.0;
    double amplitude = 0.0;
    int lobes = 7;
};

// Counterclockwise vertex list, corners at every vertex.
struct Polygon {
    std::vector<Vec2> vertices;
};

using CurveSpec = std::variant<Circle, Ellipse, PerturbedCircle, Polygon>;

CurveSpec scaled(const CurveSpec& spec, double factor);

// Point stored as anchor + offset so that differences of nearby points
// (across a polygon corner or on one smooth piece) keep full relative precision.
struct FramePoint {
    Vec2 anchor;
    Vec2 offset;
    Vec2 tangent;
    Vec2 normal;
    double speed = 0.0;
    Vec2 position() const { return anchor + offset; }
};

class Curve {
public:
    explicit Curve(CurveSpec spec);

    const CurveSpec& spec() const { return spec_; }
    bool has_corners() const { return std::holds_alternative<Polygon>(spec_); }

    // Smooth curves: one piece, parameter t in [0, 2 pi].
    // Polygons: one piece per side, arclength parameter; anchor 0 measures t
    // from the side's first vertex (t in [0, len]), anchor 1 from its last
    // vertex (t in [-len, 0]).
    std::size_t piece_count() const { return pieces_; }
    double piece_length(std::size_t piece) const;
    FramePoint frame(std::size_t piece, int anchor, double t) const;

    // Frame at global parameter: smooth t in [0, 2 pi), polygons t in [0, sides)
    // (integer part selects the side, fraction the position along it).
    FramePoint frame(double t) const;

    // Anchor slot shared by points with the same anchor position: smooth
    // curves have a single slot; polygon anchor (side s, end e) maps to vertex s+e.
    std::size_t anchor_slot(std::size_t piece, int anchor) const;
    std::size_t anchor_slots() const;

    // P(piece, t1) - P(piece, t2) for a smooth curve, cancellation-free.
    Vec2 chord(double t1, double t2) const;

    double perimeter() const;
    double signed_area() const;

private:
    CurveSpec spec_;
    std::size_t pieces_ = 1;
    std::vector<double> side_len_;
    std::vector<Vec2> side_dir_;
};

Curve build_curve(const CurveSpec& spec);

struct CornerGrading {
    bool enabled = false;
    int levels = 25;
};

struct Panel {
    std::size_t piece = 0;
    int anchor = 0;
    double t0 = 0.0;
    double t1 = 0.0;
    std::size_t first_node = 0;  // index into the owning node array
};

struct Node {
    FramePoint frame;
    double weight = 0.0;  // speed * Gauss weight * half panel width
    double t = 0.0;
    std::size_t panel = 0;      // global panel index
    std::size_t interface = 0;
    std::size_t anchor_id = 0;  // global anchor id
};

std::vector<Panel> panelize(const Curve& curve, std::size_t n_panels, std::size_t p, const CornerGrading& grading);

struct InterfaceSpec {
    CurveSpec curve;
    std::size_t n_panels = 5;
    CornerGrading grading;
    std::size_t region = 1;
};

struct Interface {
    Curve curve;
    std::vector<Panel> panels;  // first_node is global
    std::size_t region = 1;
    std::size_t first_node = 0;
    std::size_t node_count = 0;
    std::size_t first_panel = 0;
    std::size_t first_anchor = 0;
};

class Discretization {
public:
    Discretization(const std::vector<InterfaceSpec>& specs, std::size_t p);

    std::size_t p() const { return p_; }
    const std::vector<Interface>& interfaces() const { return interfaces_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t unknown_count() const { return 4 * nodes_.size(); }
    std::size_t panel_count() const { return panel_owner_.size(); }
    const Panel& panel(std::size_t global) const;
    std::size_t panel_interface(std::size_t global) const { return panel_owner_[global]; }

    // Unknown layout: per interface, blocks [J_tau, J_z, M_tau, M_z] of node_count each.
    std::size_t unknown_index(std::size_t iface, int component, std::size_t local_node) const;
    std::size_t unknown_index_of_node(std::size_t node, int component) const;

    // Point on panel at reference coordinate x in [-1, 1].
    FramePoint panel_point(std::size_t global_panel, double x, double* t_out = nullptr) const;
    double panel_half_width(std::size_t global_panel) const;
    double panel_arclength(std::size_t global_panel) const;

    // Source point description for accurate separations.
    struct PointRef {
        FramePoint frame;
        std::size_t interface;
        std::size_t piece;
        double t;
        std::size_t anchor_id;
    };
    PointRef node_ref(std::size_t node) const;
    PointRef panel_ref(std::size_t global_panel, double x) const;

    // P - Q with anchor/chord cancellation control.
    Vec2 separation(const PointRef& p, const PointRef& q) const;

private:
    std::size_t p_;
    std::vector<Interface> interfaces_;
    std::vector<Node> nodes_;
    std::vector<std::size_t> panel_owner_;
    std::vector<std::size_t> panel_local_;
};

}  // namespace bimode::geometry
