#pragma once

#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "tractforge/geom.hpp"
#include "tractforge/partition.hpp"
#include "tractforge/report.hpp"

namespace tractforge {

// Pass thresholds are configuration, not constants; the defaults admit every
// shipped construction with at least a 2x margin.
struct BGThresholds {
    double max_adjacent_ratio = 8.0;
    double min_vertex_angle = std::numbers::pi / 16.0;
    double min_separation = 1.0 / 16.0;
    double max_quasiconvexity = 8.0;
};

// Bounded-geometry constants of a forest, each achieved by the recorded
// witness (edge/vertex ids; lowest ids win ties).
struct BGReport {
    double adjacent_ratio = 1.0;  // sup over adjacent edge pairs of length ratio
    int ratio_edge_a = -1, ratio_edge_b = -1;
    double min_angle = 2.0 * std::numbers::pi;  // min angular gap at a vertex
    int angle_vertex = -1;
    double quasiconvexity = 1.0;  // sup over adjacent two-edge unions
    int qc_edge_a = -1, qc_edge_b = -1;
    double separation = 0.0;  // min over non-adjacent pairs of dist/min diam
    int sep_edge_a = -1, sep_edge_b = -1;
    double sep_modulus_lower = 0.0;  // corroborating modulus bound at the witness
    int max_degree = 0;
    int degree_vertex = -1;
    BGThresholds thresholds;
    bool pass = true;
    Report details;
};

BGReport bounded_geometry_report(const Forest& f, const BGThresholds& th = {});

// Sup over adjacent interval pairs of the length ratio (>= 1). A single
// interval yields 1 by convention.
double partition_bg_constant(const BoundaryPartition& p);

// A boundary range of a face window: the polygon walk lo -> lo+1 -> ... -> hi
// (indices modulo the polygon size). Optional certificates: a known
// tau-length, or an analytic upper bound on the separating modulus
// M(side, K).
struct FaceSide {
    int lo = 0, hi = 0;
    std::optional<double> tau_length;
    std::optional<double> modulus_upper;
};

// Simply connected face window described by a simple polygon with a marked
// base side K and the list of sides to certify. `reference` indexes the side
// I0 whose tau-length is known to be >= pi.
struct FaceSpec {
    std::vector<Point> polygon;
    std::pair<int, int> base{0, 0};
    std::vector<FaceSide> sides;
    int reference = 0;
    std::optional<double> reference_modulus_lower;  // analytic bound on M(I0, K)
    double h = 0.0;                                 // grid spacing; 0 = auto
};

// Certifies tau(J) >= tau(I0) for every listed side J by establishing
// M(J, K) <= M(I0, K) for the separating moduli: directly from stored
// tau-lengths, from the supplied analytic bounds, or from Dirichlet-grid
// solves on the face.
Report tau_length_lower_bound(const FaceSpec& face);

}  // namespace tractforge
