#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "tractforge/bgcheck.hpp"
#include "tractforge/conformal.hpp"
#include "tractforge/geom.hpp"
#include "tractforge/partition.hpp"
#include "tractforge/report.hpp"

namespace tractforge {

// One box of the Whitney decomposition of the unit disk. Generation n >= 1
// lives in the annulus between circle n and circle n+1 and is split into
// 2^(n+2) equal sectors. Edge ids index the owning WhitneyGraph's forest;
// the two bottom halves sit on the outer circle, bottom_left covering the
// smaller angles of the sector (further clockwise).
struct WhitneyBox {
    int generation = 1;
    int sector = 0;
    double r_in = 0.0, r_out = 0.0;
    double theta0 = 0.0, dtheta = 0.0;
    int side_cw = -1;   // radial edge at theta0
    int side_ccw = -1;  // radial edge at theta0 + dtheta
    int top = -1;       // inner-circle arc
    int bottom_left = -1, bottom_right = -1;
};

// Whitney scaffold: circles 1..depth+1 (radius(1) = 1/4, radius(m) =
// 1 - 2^(1-m) for m >= 2), circle m carrying 2^(m+2) equally spaced
// vertices, all radial box sides, and every circle arc between consecutive
// vertices. Circle-1 arcs are the central disk boundary.
struct WhitneyGraph {
    Forest forest;
    std::vector<WhitneyBox> boxes;
    int depth = 0;
    std::vector<int> circle_vertex_base;  // entry m-1: first vertex id of circle m

    static int sectors(int generation);  // 2^(generation+2)
    static double radius(int circle);
    int circle_vertices(int circle) const { return sectors(circle); }
    int vertex_id(int circle, int index) const;
    const WhitneyBox& box_at(int generation, int sector) const;
};

WhitneyGraph whitney_graph(int depth);

// Edge path from the outermost circle toward the central disk. The walk
// starts at the outer-circle vertex nearest theta (ties to the
// counterclockwise side) and repeats: vertex index even -> radial edge
// inward (index halves), odd -> one counterclockwise arc. Stops on circle 1.
// Returned ids are forest edge ids ordered boundary-to-center; the walk
// never uses a bottom_left arc.
std::vector<int> route_path(const WhitneyGraph& g, double theta);

// Input for the joined disk tree: marked boundary angles E (strictly
// increasing, in [0, 2pi)) and one partition per complementary arc; arc j
// runs counterclockwise from marked[j] to marked[j+1 mod |E|]. Each
// partition's interval endpoints are points on the unit circle listed
// counterclockwise across the arc. `center` is the approximate center
// angle and must be a partition endpoint bounding the interval that
// contains the true arc midpoint; when absent it is chosen as the endpoint
// of that interval closer to the midpoint (ties counterclockwise).
struct DiskArcSpec {
    BoundaryPartition partition;
    std::optional<double> center;
};

struct DiskTreeInput {
    std::vector<double> marked;
    std::vector<DiskArcSpec> arcs;
    int depth = 0;  // Whitney depth; 0 derives it from the truncation radii
};

// Joins the unit circle's marked structure into a forest: for each arc, a
// segment from the approximate center v_j to the Whitney vertex w_j whose
// distance to the circle lies in [r/2, r] (r = the shorter partition
// interval adjacent to v_j), the routed path from w_j to the central disk,
// and the circle-1 boundary minus the arc starting at angle 0. The
// complement of the result in the disk has exactly |marked| components.
Forest build_disk_tree(const DiskTreeInput& in);

// Ordered dyadic cover produced by the one-sided sweep. Pieces have dyadic
// lengths, non-increasing along the sweep, with `source` the 0-based input
// interval whose covering step emitted the piece.
struct DyadicCover {
    struct Piece {
        double lo = 0.0, hi = 0.0;
        int source = 0;
        double length() const { return hi - lo; }
    };
    std::vector<Piece> pieces;
};

// One-sided sweep over the intervals (cuts[j], cuts[j+1]). Covers
// [cuts[0], cuts.back()] with grid-aligned dyadic pieces: each interval
// requests the unique power of two in [len/8M, len/4M); a request larger
// than the running length is clamped (lengths never increase), a smaller
// one re-splits the straddling piece before continuing.
DyadicCover dyadic_sweep(const std::vector<double>& cuts, double M);

// Symmetric refinement of a partition of the imaginary axis normalized so
// the middle interval is (-i, i). That interval is kept; both sides are
// swept, reflected, and merged pointwise-shorter, giving dyadic lengths,
// non-increasing in |j|, every output interval meeting an input interval I
// strictly shorter than |I|/M, and adjacent ratio at most 2C.
BoundaryPartition symmetric_partition(const BoundaryPartition& q, double M);

struct RaysOptions {
    double window = 0.0;     // ray length; 0 picks 4x the partition span
    bool include_axis = true;  // also emit the partition intervals as edges
};

// Horizontal rays into H_r at every partition endpoint of q (a partition of
// the imaginary axis). Vertex spacing on each ray is the shorter adjacent
// interval length; rays are truncated at the window.
Forest rays_forest(const BoundaryPartition& q, const RaysOptions& opt = {});

// Connector H_k for axis interval I_k: runs from the axis endpoint i*x
// (the I_0-facing endpoint of I_k) to w = |y| + i*y on the region diagonal,
// where y = sign(x) * a[n-1] and n obeys the parity rule (odd for k > 0,
// even for k < 0) with |x - y| < |I_k| / M.
struct TubeConnector {
    int k = 0;
    double x = 0.0;
    double y = 0.0;
    int n = 0;  // 1-based index into the a-schedule
};

struct CentralTubeOptions {
    double window = 0.0;        // cap on the a-schedule extent; 0 = partition extent
    bool include_base_edge = true;  // draw the base interval [-i, i] as an edge
    // First-piece length cap at the axis end of connector |k| (index |k|-1),
    // one vector per sign; empty entries fall back to |I_k|/2. Used when the
    // axis is an existing curve whose local edge lengths the connector
    // grading must match.
    std::vector<double> base_scale_pos, base_scale_neg;
};

// The single-complementary-component tube erected over a normalized
// partition of the imaginary axis. The central region is the rectangle
// [0,1] x [-1,1] united with the sector {|Im| < Re}; a[] holds the
// symmetric-partition endpoints (a[0] = 1), eta[j] = a[j+1] - a[j]. V_j
// spans the cross-section at Re = a[j] leaving an eta gap at the top for
// odd 1-based j and at the bottom for even j. Each complete trapezoid
// (between consecutive connectors on one side) has one diagonal opening
// removed just inside its far connector.
struct CentralTube {
    double C = 1.0, M = 8.0;
    std::vector<double> a;
    std::vector<double> eta;
    BoundaryPartition sym;
    std::vector<TubeConnector> connectors;      // ordered by k: negative then positive
    std::vector<std::pair<Point, Point>> v_segments;
    std::vector<std::pair<Point, Point>> openings;
    int rooms_pos = 0, rooms_neg = 0;  // complete trapezoids per side
    Forest forest;
    Report report;
};

CentralTube central_tube(const BoundaryPartition& q, double C,
                         const CentralTubeOptions& opt = {});

struct GlueOptions {
    double diameter_ratio = 16.0;     // boundary-edge sandwich constant
    double hyperbolic_bound = 16.0;   // internal-edge hyperbolic diameter cap
    double land_tol = 1e-7;           // landing tolerance relative to the local scale
    double hausdorff_rel_tol = 1e-9;  // re-fit tolerance relative to edge diameter
    bool model_is_disk = false;       // inner coordinates are the unit disk, not H_r
};

struct GlueResult {
    Forest forest;
    Report report;
};

// Transfers `inner` (drawn in H_r or the disk) into the plane through the
// inverse of `tau` and unions it with `outer`. Every inner edge is checked
// first: edges with an endpoint on the model boundary must land at an
// outer vertex of degree at most 2 (within land_tol) and satisfy the Euclidean
// diameter sandwich against the image of the two incident outer edges;
// all other edges must have hyperbolic diameter at most hyperbolic_bound.
// Mapped edges are re-fit as segment/arc chains within the Hausdorff
// tolerance; landing endpoints snap to the outer vertex. `face` labels the
// face being filled in report witnesses.
GlueResult glue(const Forest& outer, int face, const Forest& inner,
                const MapSpec& tau, const GlueOptions& opt = {});

enum class FillMode { many, single };

struct PipelineOptions {
    int n_max = 6;                    // tau-partition window per tract
    double min_separation = 1.0 / 16.0;
    double fill_window = 0.0;         // forwarded to rays_forest / central_tube
    BGThresholds thresholds;
};

struct PipelineFace {
    int id = 0;
    bool is_tract = false;        // original model tract vs filled complement face
    TractDescriptor surrogate;    // the atlas face certificates are computed in
    Report certificate;
};

struct PipelineResult {
    Forest forest;
    std::vector<PipelineFace> faces;
    int face_count = 0;
    Report report;
};

// End-to-end construction: tau-partitions of the level curves at rho, the
// joining edges, and a fill of every complement face (rays for mode many,
// the central tube for mode single), with per-face tau-length certificates
// normalized to floor pi and a bounded-geometry report on the result.
// Supported models: a single half-plane tract, or two equal-width
// half-strips facing each other along a common axis; anything else is
// rejected as a non-atlas complement face.
PipelineResult pipeline(const std::vector<TractDescriptor>& model, double rho,
                        FillMode mode, const PipelineOptions& opt = {});

enum class LatticeVariant { two, three, infinite };

struct TwoExtraResult {
    Forest forest;
    Report report;
    int tract_count = 0;
};

// Integer-lattice forests splitting the plane into a half-strip plus one,
// two, or a truncated window of infinitely many companion tracts. Unit
// vertex spacing, max degree 3; the report carries the bounded-geometry
// result and a growth certificate per tract.
TwoExtraResult twoextra(LatticeVariant variant, int window = 12);

}  // namespace tractforge
