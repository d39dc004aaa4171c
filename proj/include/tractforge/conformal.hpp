#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "tractforge/geom.hpp"
#include "tractforge/partition.hpp"
#include "tractforge/report.hpp"

namespace tractforge {

// Rigid motion w = e^{i angle} z + shift.
struct Pose {
    double angle = 0.0;
    Point shift{0.0, 0.0};

    bool is_identity() const { return angle == 0.0 && shift == Point{0.0, 0.0}; }
    // identity short-circuits so signed zeros survive (slit side tags)
    Point apply(Point z) const {
        return is_identity() ? z : std::polar(1.0, angle) * z + shift;
    }
    Point invert(Point w) const {
        return is_identity() ? w : std::polar(1.0, -angle) * (w - shift);
    }
};

// An explicit unbounded tract together with its uniformizing map tau onto the
// right half-plane H_r = {Re > 0}, normalized so infinity maps to infinity.
// Canonical models (before the rigid pose):
//   halfplane      {Re z > 0},            tau(z) = z
//   halfstrip      {x > 0, |y| < w/2},    tau(z) = sinh(pi z / w)
//   sector         {|arg z| < theta},     tau(z) = z^(pi / 2 theta)
//   disk_exterior  {|z| > R} \ (-inf,-R], tau(z) = sinh(log(z/R) / 2)
// The disk exterior carries the slit so the tract is simply connected; its
// boundary is the circle plus both sides of the slit.
struct TractDescriptor {
    enum class Kind { halfplane, halfstrip, sector, disk_exterior };
    Kind kind = Kind::halfplane;
    double width = 0.0;   // halfstrip
    double theta = 0.0;   // sector half-angle, in (0, pi)
    double radius = 0.0;  // disk_exterior
    Pose pose;

    static TractDescriptor halfplane(Pose pose = {});
    static TractDescriptor halfstrip(double width, Pose pose = {});
    static TractDescriptor sector(double theta, Pose pose = {});
    static TractDescriptor disk_exterior(double R, Pose pose = {});

    // tau: tract -> H_r. On the disk-exterior slit the side is taken from the
    // sign of the imaginary part (signed zero included).
    Point tau(Point z) const;
    // Inverse of tau on the closed half-plane; Re w == 0 hits the boundary,
    // where branch sides are resolved by the sign of Im w.
    Point tau_inv(Point w) const;
    bool contains(Point z) const;  // open tract membership
};

// tau-partition of the level curve {Re tau' = rho} of a tract, where
// tau' = lambda * (atlas tau) records cumulative rescaling. Vertices satisfy
// tau'(z_n) = rho + i pi n for n in [-n_max, n_max]; consecutive vertices
// bound arcs of tau'-length exactly pi.
struct TauPartition {
    TractDescriptor tract;
    double rho = 0.0;
    double lambda = 1.0;
    int n_max = 0;
    std::vector<Point> vertices;    // size 2*n_max+1; index i holds n = i - n_max
    std::vector<double> arc_diam;   // size 2*n_max; arc i joins vertices i, i+1
    std::vector<double> arc_length;

    Point vertex(int n) const { return vertices[static_cast<std::size_t>(n + n_max)]; }
};

TauPartition tau_partition(const TractDescriptor& t, double rho, int n_max);

// View a TauPartition as an abstract boundary partition (carrier
// tract_boundary, per-interval tau-length pi).
BoundaryPartition as_boundary_partition(const TauPartition& p);

// Small atlas of explicit maps with tagged inverse branches.
struct MapSpec {
    enum class Kind { mobius, sinh_map, power, exp_map, joukowski, affine_stretch };
    enum class Branch { principal, joukowski_exterior, joukowski_interior };

    Kind kind = Kind::mobius;
    Branch branch = Branch::principal;
    // mobius: (ma z + mb) / (mc z + md)
    Point ma{1.0, 0.0}, mb{0.0, 0.0}, mc{0.0, 0.0}, md{1.0, 0.0};
    double p = 2.0;  // power exponent
    // affine_stretch: (x, y) -> (a x + b, y); stretch_interval(rho, A) builds
    // the map sending {rho < x < 2 rho} onto {rho < x < A rho}.
    double a = 1.0, b = 0.0, rho = 1.0;

    static MapSpec mobius(Point a, Point b, Point c, Point d);
    static MapSpec sinh_map();
    static MapSpec power(double p);
    static MapSpec exp_map();
    static MapSpec joukowski(Branch branch = Branch::principal);
    static MapSpec affine_stretch(double a, double b, double rho = 1.0);
    static MapSpec stretch_interval(double rho, double A);
};

// Evaluate the map or its branch-resolved inverse. Throws std::domain_error
// for points outside the declared domain and std::invalid_argument for a
// missing or inconsistent branch tag.
Point map_eval(const MapSpec& m, Point z, bool inverse);

// Complex derivative of the (holomorphic) map; affine_stretch with a != 1 is
// rejected since it is not conformal.
Point map_deriv(const MapSpec& m, Point z);

// Distortion check for a univalent map on the unit disk: at each sample z,
//   (1/4) |f'(z)| (1 - |z|^2) <= dist(f(z), boundary) <= |f'(z)| (1 - |z|^2).
// `boundary_dist` gives the distance from f(z) to the image boundary; when
// absent it is derived from the image of the unit circle (mobius maps only).
Report koebe_check(const MapSpec& m, const std::vector<Point>& samples,
                   const std::function<double(Point)>& boundary_dist = {});

// Replace tau' by lambda * tau'. Explicit tracts re-derive vertices at the new
// pi-spacing (the index window scales with lambda so the geometric window is
// preserved); abstract partitions keep their geometry and multiply the stored
// tau-lengths.
TauPartition rescale_tau(const TauPartition& p, double lambda);
BoundaryPartition rescale_tau(const BoundaryPartition& p, double lambda);

}  // namespace tractforge
