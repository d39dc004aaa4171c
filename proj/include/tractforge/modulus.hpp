#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tractforge/geom.hpp"
#include "tractforge/report.hpp"

namespace tractforge {

struct Interval {
    double lo = 0.0, hi = 0.0;
    double length() const { return hi - lo; }
    double mid() const { return (lo + hi) / 2; }
    bool unbounded_left() const;  // lo == -infinity (left ray)
};

// Which path family a modulus value refers to. A quadrilateral's connecting
// family (between the two plates) and separating family (between the two
// insulated arcs) are conjugate; their moduli multiply to 1.
enum class Family { connecting, separating };

struct ModulusResult {
    double value = 0.0;
    std::string method;  // "exact" | "sc-quadrature" | "dirichlet-grid"
    Family family = Family::connecting;
    double error_estimate = 0.0;
    double h = 0.0;  // grid spacing when applicable
    std::vector<std::string> notes;
};

// Closed forms. rectangle_modulus(a,b): family connecting the two sides of
// length a (they sit distance b apart), value a/b. annulus_modulus(r,R):
// family separating the two boundary circles, value log(R/r)/(2*pi).
ModulusResult rectangle_modulus(double a, double b);
ModulusResult annulus_modulus(double r, double R);

// Polygonal quadrilateral: a simple closed polygon with four marked boundary
// arcs. marks[k] is the vertex index where arc k starts; arcs follow the
// vertex loop cyclically. Arc 0 and arc 2 are the plates (potentials 0 and
// 1), arcs 1 and 3 are insulating.
struct Quadrilateral {
    std::vector<Point> polygon;  // closed loop, last vertex != first
    std::array<int, 4> marks{0, 0, 0, 0};
};

enum class BdryRole { dirichlet0, dirichlet1, neumann };

struct BdrySegment {
    Point a, b;
    BdryRole role;
};

// Masked cell-centered grid domain: simple polygon plus a role cover of its
// boundary. Vertices are snapped to the grid; on axis-aligned rectangles the
// discrete energy is exact at every spacing.
struct GridDomain {
    std::vector<Point> polygon;
    std::vector<BdrySegment> roles;
};

struct GridSolution {
    double energy = 0.0;
    double h = 0.0;
    long long cells = 0;
    int iterations = 0;
    double snap_max_rel = 0.0;  // largest vertex snap displacement / h
};

// 5-point scheme, conjugate gradients to relative residual 1e-10,
// deterministic sweep order. Throws if either plate is unresolved at h.
GridSolution solve_grid(const GridDomain& dom, double h);

// Dirichlet-grid modulus of the family connecting arcs 0 and 2.
ModulusResult quad_connecting_modulus(const Quadrilateral& q, double h);

// Modulus for two disjoint marked intervals P, Q on the real axis, domain the
// upper half plane. P.lo may be -infinity. The half plane is truncated to a
// window with reflecting far sides; the window term and the h vs 2h
// comparison are folded into error_estimate. h = 0 picks min_feature/16,
// coarsened so the main solve stays under max_cells but never beyond
// min_feature/8. Throws if h does not resolve the smallest feature by >= 8.
// Ray configurations are first transplanted by the exact Mobius change of
// variable w = 1/(c - z), c the gap midpoint, which bounds the configuration
// and pins the far field; they require h = 0 (resolution is chosen in the
// transformed coordinates).
ModulusResult halfplane_pair_modulus(Interval P, Interval Q, Family family, double h = 0.0,
                                     double margin_factor = 2.0, long long max_cells = 2000000);

struct ModulusQuery {
    enum class Kind {
        rectangle,
        annulus,
        quadrilateral,
        halfplane_two_intervals,
        halfplane_quadrilateral
    };
    Kind kind = Kind::rectangle;
    double a = 0, b = 0;  // rectangle
    double r = 0, R = 0;  // annulus
    Quadrilateral quad;
    Interval I, J;  // halfplane kinds; I is the left marked set (may be a ray)
    Family family = Family::separating;  // halfplane kinds only
};

ModulusResult exact_modulus(const ModulusQuery& q);  // rectangle | annulus

// Separating modulus of two disjoint bounded intervals by quadrature of the
// four-endpoint inverse-square-root integrand. Exactly invariant under affine
// maps of the line and under swapping I and J.
ModulusResult two_interval_modulus(Interval I, Interval J);

// Same quantity for a left ray (-inf, k] against a bounded interval J, the
// three-endpoint integrand. Used as an independent cross-check of grid
// solves on ray configurations.
double ray_interval_separating_sc(double k, Interval J, double* err = nullptr);

// quadrilateral | halfplane-quadrilateral kinds
ModulusResult discrete_quad_modulus(const ModulusQuery& q, double h);

struct SeparationEstimate {
    double epsilon = 0.0;
    double modulus_lower = 0.0;
    double modulus_upper = 0.0;  // +infinity when epsilon >= 2
};
SeparationEstimate separation_estimate(const SetGeo& e, const SetGeo& f);

struct TubeGrowthOptions {
    std::optional<double> supplied_M;  // skip solves, use this uniform value
    std::optional<std::vector<double>> supplied_per_interval;
    double h = 0.0;                 // 0 = auto per solve
    long long max_cells = 200000;   // auto-h cap per solve
};

// Checks |J_j| >= eps*(1+eps)^(j-1) with eps = exp(-2*pi*sup_j M(J_j, K)),
// K = (-inf, k_end]. Moduli are separating, grid-computed unless supplied.
Report tube_growth_check(double k_end, const std::vector<Interval>& J,
                         const TubeGrowthOptions& opt = {});

struct AddRoomsResult {
    bool comparable = false;  // M(J,K) <= M(I,K)
    bool certified = false;   // comparable and |I| <= |J|
    double M_IK = 0, M_JK = 0;
    double err_IK = 0, err_JK = 0;
};
// Ordering: K entirely left of I, I left of J, pairwise positive gaps.
AddRoomsResult add_rooms_compare(Interval I, Interval J, Interval K, double h = 0.0);

// Sum of part moduli: lower bound for the enclosing family when the parts
// have disjoint support (caller's declaration).
double parallel_lower_bound(const std::vector<ModulusResult>& parts);

}  // namespace tractforge
