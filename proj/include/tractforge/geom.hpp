#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tractforge/report.hpp"

namespace tractforge {

using Point = std::complex<double>;

double cross(Point a, Point b);  // a.x*b.y - a.y*b.x
double dot(Point a, Point b);

struct Bbox {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    static Bbox of(Point p) { return {p.real(), p.imag(), p.real(), p.imag()}; }
    void expand(Point p);
    void expand(const Bbox& b);
    void pad(double m);
    bool overlaps(const Bbox& b) const;
    double diag() const;
    Point center() const { return {(x0 + x1) / 2, (y0 + y1) / 2}; }
};

// An edge is a line segment or a circular arc. `a`, `b` index Forest
// vertices. For arcs, `center` plus the signed angular `extent` (positive =
// counterclockwise, |extent| in (0, 2*pi)) determine the curve from vertex a
// to vertex b.
struct ArcEdge {
    int a = -1;
    int b = -1;
    enum class Kind { segment, arc };
    Kind kind = Kind::segment;
    Point center{0.0, 0.0};
    double extent = 0.0;
};

// Coordinate-resolved edge; all metric queries work on this.
struct EdgeGeo {
    bool is_arc = false;
    Point p0, p1;
    Point center{0.0, 0.0};
    double radius = 0.0;
    double ang0 = 0.0;    // angle of p0 around center
    double extent = 0.0;  // signed; p1 sits at ang0 + extent

    static EdgeGeo segment(Point a, Point b);
    static EdgeGeo arc(Point a, Point b, Point center, double extent);

    Point at(double t) const;       // t in [0,1]
    Point tangent(double t) const;  // unit tangent, direction of increasing t
    double length() const;
    double diam() const;
    Bbox bbox() const;
    // true if angle phi (radians) lies on the arc's angular span
    bool angle_on_arc(double phi, double tol = 1e-12) const;
};

double dist_point(const EdgeGeo& e, Point z);
// inf / sup of |p-q| over p in e, q in f (exact candidate analysis)
double dist(const EdgeGeo& e, const EdgeGeo& f);
double sup_dist(const EdgeGeo& e, const EdgeGeo& f);

// Geometric intersection points of two edges (0, 1 or 2; collinear/cocircular
// overlaps report the overlap midpoint). Points within `tol` of both curves.
std::vector<Point> intersect(const EdgeGeo& e, const EdgeGeo& f, double tol);

// Embedded planar forest. Adjacency (rotation order) and component labels are
// derived from the stored geometry rather than stored redundantly.
struct Forest {
    std::vector<Point> vertices;
    std::vector<ArcEdge> edges;

    int add_vertex(Point p);
    int add_edge(int a, int b);                                // segment
    int add_arc(int a, int b, Point center, double extent);    // arc

    EdgeGeo geo(int e) const;
    EdgeGeo geo(const ArcEdge& e) const;
    std::vector<int> degrees() const;
    int max_degree() const;
    // incident edge ids per vertex, sorted counterclockwise by outgoing tangent
    std::vector<std::vector<int>> rotation_order() const;
    std::vector<int> component_labels() const;  // per vertex, 0-based, first-seen order
    int component_count() const;
    Bbox bbox() const;
};

struct Metrics {
    double diam = 0.0;
    double length = 0.0;
    std::optional<double> dist;
};

// A point-set / edge-set operand for metric queries.
struct SetGeo {
    std::vector<EdgeGeo> edges;
    std::vector<Point> points;
    static SetGeo of(const EdgeGeo& e) { return {{e}, {}}; }
    static SetGeo of(const Forest& f);
    bool empty() const { return edges.empty() && points.empty(); }
};

Metrics metrics(const SetGeo& a);
Metrics metrics(const SetGeo& a, const SetGeo& b);

// Smallest constant M over sampled triples x, z, y (z strictly between x and
// y along the polyline, vertices plus segment midpoints) bounding
// (|x-z| + |z-y|) / |x-y|. Equals 1 exactly on straight polylines; grows like
// the detour factor between near-returning ends. Throws on self-intersecting
// input.
double three_point_constant(const std::vector<Point>& polyline);

// Union over edges of { z : dist(z, e) < r * diam(e) }.
struct EdgeNeighborhood {
    std::vector<EdgeGeo> edges;
    std::vector<double> diams;
    double r = 1.0;
    bool contains(Point z) const;
    // min over edges of dist(z,e) - r*diam(e); negative inside the region
    double signed_margin(Point z) const;
};
EdgeNeighborhood neighborhood(const Forest& f, double r);

struct ValidateOptions {
    bool require_acyclic = true;  // relaxed for scaffolding graphs (box grids)
    double tol_scale = 1e-12;     // relative to forest bbox diagonal
    int max_violations = 32;
};

// Checks edge invariants, pairwise crossings (with witness points), cycles,
// vertex degrees and rotation-order degeneracies. Always returns a report.
Report validate_forest(const Forest& f, const ValidateOptions& opt = {});

// Uniform-grid bucket index over edge bounding boxes.
struct SpatialHash {
    double cell = 1.0;
    std::unordered_map<uint64_t, std::vector<int32_t>> buckets;

    explicit SpatialHash(double cell_size = 1.0) : cell(cell_size) {}
    void insert(int32_t id, const Bbox& b);
    void query(const Bbox& b, std::vector<int32_t>& out) const;  // may contain duplicates
};

// Visits each candidate pair (i < j) whose padded bboxes overlap.
void for_each_close_pair(const std::vector<Bbox>& boxes, double pad,
                         const std::function<void(int, int)>& fn);

}  // namespace tractforge
