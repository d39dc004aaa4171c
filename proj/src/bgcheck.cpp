#include "tractforge/bgcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "tractforge/modulus.hpp"

namespace tractforge {
namespace {

constexpr double pi = std::numbers::pi;

double bbox_gap(const Bbox& a, const Bbox& b) {
    double dx = std::max({0.0, b.x0 - a.x1, a.x0 - b.x1});
    double dy = std::max({0.0, b.y0 - a.y1, a.y0 - b.y1});
    return std::hypot(dx, dy);
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

}  // namespace

BGReport bounded_geometry_report(const Forest& f, const BGThresholds& th) {
    ValidateOptions vo;
    vo.require_acyclic = false;
    Report val = validate_forest(f, vo);
    for (const char* hard : {"non-finite-vertices", "bad-edge-indices", "degenerate-edges",
                             "arc-consistency-failures"})
        if (const ReportItem* it = val.find(hard); it && !it->pass)
            throw std::invalid_argument(std::string("bounded_geometry_report: ") + hard + ": " +
                                        it->witness);

    BGReport rep;
    rep.thresholds = th;
    rep.details.kind = "bounded-geometry";
    if (const ReportItem* cr = val.find("crossings"); cr && !cr->pass)
        rep.details.add("forest-valid", cr->value, false, cr->witness);

    const int E = static_cast<int>(f.edges.size());
    std::vector<EdgeGeo> geos;
    geos.reserve(static_cast<std::size_t>(E));
    std::vector<double> lens(static_cast<std::size_t>(E)), diams(static_cast<std::size_t>(E));
    std::vector<Bbox> boxes(static_cast<std::size_t>(E));
    for (int e = 0; e < E; ++e) {
        geos.push_back(f.geo(e));
        lens[static_cast<std::size_t>(e)] = geos.back().length();
        diams[static_cast<std::size_t>(e)] = geos.back().diam();
        boxes[static_cast<std::size_t>(e)] = geos.back().bbox();
    }
    const double scale = std::max(f.bbox().diag(), 1e-300);

    std::vector<int> deg = f.degrees();
    rep.max_degree = 0;
    for (int v = 0; v < static_cast<int>(deg.size()); ++v)
        if (deg[static_cast<std::size_t>(v)] > rep.max_degree) {
            rep.max_degree = deg[static_cast<std::size_t>(v)];
            rep.degree_vertex = v;
        }

    std::vector<std::vector<int>> inc(f.vertices.size());
    for (int e = 0; e < E; ++e) {
        inc[static_cast<std::size_t>(f.edges[static_cast<std::size_t>(e)].a)].push_back(e);
        inc[static_cast<std::size_t>(f.edges[static_cast<std::size_t>(e)].b)].push_back(e);
    }

    // (2) smallest angular gap between edges at a vertex
    rep.min_angle = 2 * pi;
    rep.angle_vertex = -1;
    for (int v = 0; v < static_cast<int>(inc.size()); ++v) {
        const auto& es = inc[static_cast<std::size_t>(v)];
        if (es.size() < 2) continue;
        std::vector<double> angs;
        angs.reserve(es.size());
        for (int e : es) {
            const EdgeGeo& g = geos[static_cast<std::size_t>(e)];
            Point dir = f.edges[static_cast<std::size_t>(e)].a == v ? g.tangent(0.0)
                                                                    : -g.tangent(1.0);
            angs.push_back(std::atan2(dir.imag(), dir.real()));
        }
        std::sort(angs.begin(), angs.end());
        double mn = angs.front() + 2 * pi - angs.back();
        for (std::size_t k = 0; k + 1 < angs.size(); ++k)
            mn = std::min(mn, angs[k + 1] - angs[k]);
        if (mn < rep.min_angle) {
            rep.min_angle = mn;
            rep.angle_vertex = v;
        }
    }

    // (3) adjacent length ratios and quasiconvexity of two-edge unions,
    // brute force over endpoint/midpoint samples
    rep.adjacent_ratio = 1.0;
    rep.quasiconvexity = 1.0;
    const double ts[3] = {0.0, 0.5, 1.0};
    for (int v = 0; v < static_cast<int>(inc.size()); ++v) {
        const auto& es = inc[static_cast<std::size_t>(v)];
        for (std::size_t i = 0; i < es.size(); ++i)
            for (std::size_t j = i + 1; j < es.size(); ++j) {
                int ei = es[i], ej = es[j];
                double li = lens[static_cast<std::size_t>(ei)];
                double lj = lens[static_cast<std::size_t>(ej)];
                double ratio = std::max(li / lj, lj / li);
                if (ratio > rep.adjacent_ratio) {
                    rep.adjacent_ratio = ratio;
                    rep.ratio_edge_a = std::min(ei, ej);
                    rep.ratio_edge_b = std::max(ei, ej);
                }

                Point px[3], py[3];
                double sx[3], sy[3];
                for (int k = 0; k < 3; ++k) {
                    const EdgeGeo& gi = geos[static_cast<std::size_t>(ei)];
                    const EdgeGeo& gj = geos[static_cast<std::size_t>(ej)];
                    px[k] = gi.at(ts[k]);
                    py[k] = gj.at(ts[k]);
                    sx[k] = f.edges[static_cast<std::size_t>(ei)].a == v ? ts[k] * li
                                                                         : (1 - ts[k]) * li;
                    sy[k] = f.edges[static_cast<std::size_t>(ej)].a == v ? ts[k] * lj
                                                                         : (1 - ts[k]) * lj;
                }
                auto consider = [&](double path, double chord) {
                    if (chord <= 1e-13 * scale) return;
                    double q = path / chord;
                    if (q > rep.quasiconvexity) {
                        rep.quasiconvexity = q;
                        rep.qc_edge_a = std::min(ei, ej);
                        rep.qc_edge_b = std::max(ei, ej);
                    }
                };
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b)
                        consider(sx[a] + sy[b], std::abs(px[a] - py[b]));
                for (int a = 0; a < 3; ++a)
                    for (int b = a + 1; b < 3; ++b) {
                        consider(std::abs(ts[a] - ts[b]) * li, std::abs(px[a] - px[b]));
                        consider(std::abs(ts[a] - ts[b]) * lj, std::abs(py[a] - py[b]));
                    }
            }
    }

    // (4) separation of non-adjacent pairs, bbox-pruned exact scan
    rep.separation = std::numeric_limits<double>::infinity();
    for (int i = 0; i < E; ++i)
        for (int j = i + 1; j < E; ++j) {
            const ArcEdge& a = f.edges[static_cast<std::size_t>(i)];
            const ArcEdge& b = f.edges[static_cast<std::size_t>(j)];
            if (a.a == b.a || a.a == b.b || a.b == b.a || a.b == b.b) continue;
            double md = std::min(diams[static_cast<std::size_t>(i)],
                                 diams[static_cast<std::size_t>(j)]);
            if (bbox_gap(boxes[static_cast<std::size_t>(i)],
                         boxes[static_cast<std::size_t>(j)]) /
                    md >=
                rep.separation)
                continue;
            double eps =
                dist(geos[static_cast<std::size_t>(i)], geos[static_cast<std::size_t>(j)]) / md;
            if (eps < rep.separation) {
                rep.separation = eps;
                rep.sep_edge_a = i;
                rep.sep_edge_b = j;
            }
        }
    bool have_sep = rep.sep_edge_a >= 0;
    if (have_sep) {
        SeparationEstimate se =
            separation_estimate(SetGeo::of(geos[static_cast<std::size_t>(rep.sep_edge_a)]),
                                SetGeo::of(geos[static_cast<std::size_t>(rep.sep_edge_b)]));
        rep.sep_modulus_lower = se.modulus_lower;
    }

    rep.details.note("edge smoothness: segments and circular arcs are analytic by construction");
    rep.details.add("adjacent-ratio", rep.adjacent_ratio,
                    rep.adjacent_ratio <= th.max_adjacent_ratio,
                    rep.ratio_edge_a >= 0 ? "edges " + std::to_string(rep.ratio_edge_a) + "," +
                                                std::to_string(rep.ratio_edge_b)
                                          : "no adjacent pairs");
    if (rep.angle_vertex >= 0)
        rep.details.add("min-angle", rep.min_angle, rep.min_angle >= th.min_vertex_angle,
                        "vertex " + std::to_string(rep.angle_vertex));
    else
        rep.details.note("min-angle: no vertex meets two edges");
    rep.details.add("quasiconvexity", rep.quasiconvexity,
                    rep.quasiconvexity <= th.max_quasiconvexity,
                    rep.qc_edge_a >= 0 ? "edges " + std::to_string(rep.qc_edge_a) + "," +
                                             std::to_string(rep.qc_edge_b)
                                       : "no adjacent pairs");
    if (have_sep) {
        rep.details.add("separation", rep.separation, rep.separation >= th.min_separation,
                        "edges " + std::to_string(rep.sep_edge_a) + "," +
                            std::to_string(rep.sep_edge_b));
        rep.details.note("separation-modulus-lower=" + fmt(rep.sep_modulus_lower));
    } else {
        rep.details.note("separation: no non-adjacent pairs");
    }
    rep.details.add("max-degree", rep.max_degree, true,
                    rep.degree_vertex >= 0 ? "vertex " + std::to_string(rep.degree_vertex)
                                           : "empty");
    rep.pass = rep.details.pass;
    return rep;
}

double partition_bg_constant(const BoundaryPartition& p) {
    if (p.intervals.empty())
        throw std::invalid_argument("partition_bg_constant: empty partition");
    double sup = 1.0;
    for (std::size_t k = 0; k + 1 < p.intervals.size(); ++k) {
        double a = p.intervals[k].length, b = p.intervals[k + 1].length;
        if (!(a > 0.0) || !(b > 0.0))
            throw std::invalid_argument("partition_bg_constant: nonpositive interval length");
        sup = std::max({sup, a / b, b / a});
    }
    return sup;
}

namespace {

struct SideModulus {
    double M = 0.0;
    double err = 0.0;
};

double face_auto_h(const std::vector<Point>& poly) {
    const std::size_t n = poly.size();
    double mn = std::numeric_limits<double>::infinity();
    Bbox bb = Bbox::of(poly[0]);
    for (std::size_t i = 0; i < n; ++i) {
        mn = std::min(mn, std::abs(poly[(i + 1) % n] - poly[i]));
        bb.expand(poly[i]);
    }
    double h = mn / 16.0;
    double area = (bb.x1 - bb.x0) * (bb.y1 - bb.y0);
    while (area / (h * h) > 400000.0) h *= 1.25;
    return std::min(h, mn / 8.0);
}

// Validates that [lo, hi] sits strictly inside the complement of the base
// walk, then solves the quadrilateral K | gap | side | gap.
SideModulus face_side_modulus(const FaceSpec& face, int lo, int hi) {
    const int N = static_cast<int>(face.polygon.size());
    int b0 = face.base.first, b1 = face.base.second;
    auto pos = [&](int v) { return (v - b0 + N) % N; };
    if (!(0 < pos(b1) && pos(b1) < pos(lo) && pos(lo) < pos(hi)))
        throw std::invalid_argument(
            "tau_length_lower_bound: side must be disjoint from the base");
    Quadrilateral q;
    q.polygon = face.polygon;
    q.marks = {b0, b1, lo, hi};
    double h = face.h > 0.0 ? face.h : face_auto_h(face.polygon);
    ModulusResult E = quad_connecting_modulus(q, h);
    return {1.0 / E.value, E.error_estimate / (E.value * E.value)};
}

}  // namespace

Report tau_length_lower_bound(const FaceSpec& face) {
    const int N = static_cast<int>(face.polygon.size());
    if (N < 3) throw std::invalid_argument("tau_length_lower_bound: polygon too small");
    if (face.sides.empty()) throw std::invalid_argument("tau_length_lower_bound: no sides");
    if (face.reference < 0 || face.reference >= static_cast<int>(face.sides.size()))
        throw std::invalid_argument("tau_length_lower_bound: reference side missing");
    auto check_range = [&](int lo, int hi) {
        if (lo < 0 || hi < 0 || lo >= N || hi >= N || lo == hi)
            throw std::invalid_argument("tau_length_lower_bound: bad boundary range");
    };
    check_range(face.base.first, face.base.second);
    for (const FaceSide& s : face.sides) check_range(s.lo, s.hi);

    const FaceSide& ref = face.sides[static_cast<std::size_t>(face.reference)];
    auto check_grid_order = [&](const FaceSide& s) {
        int b0 = face.base.first, b1 = face.base.second;
        auto pos = [&](int v) { return (v - b0 + N) % N; };
        if (!(0 < pos(b1) && pos(b1) < pos(s.lo) && pos(s.lo) < pos(s.hi)))
            throw std::invalid_argument(
                "tau_length_lower_bound: side must be disjoint from the base");
    };
    bool other_lacks_tau = false;
    for (std::size_t j = 0; j < face.sides.size(); ++j) {
        if (static_cast<int>(j) == face.reference) continue;
        const FaceSide& s = face.sides[j];
        if (!s.tau_length) other_lacks_tau = true;
        if (!s.tau_length && !s.modulus_upper) check_grid_order(s);
    }
    if (!face.reference_modulus_lower && (!ref.tau_length || other_lacks_tau))
        check_grid_order(ref);

    Report r;
    r.kind = "tau-length-lower-bound";

    std::optional<SideModulus> ref_cache;
    bool ref_item_added = false;
    auto ref_modulus = [&]() -> SideModulus {
        SideModulus sm;
        const char* how;
        if (face.reference_modulus_lower) {
            sm = {*face.reference_modulus_lower, 0.0};
            how = "supplied";
        } else {
            if (!ref_cache) ref_cache = face_side_modulus(face, ref.lo, ref.hi);
            sm = *ref_cache;
            how = "grid";
        }
        if (!ref_item_added) {
            r.add("reference-modulus", sm.M, true, how);
            ref_item_added = true;
        }
        return sm;
    };

    for (std::size_t j = 0; j < face.sides.size(); ++j) {
        const FaceSide& s = face.sides[j];
        std::string name = "side-" + std::to_string(j);
        if (static_cast<int>(j) == face.reference) {
            r.add(name, s.tau_length.value_or(0.0), true, "reference, tau assumed >= pi");
            continue;
        }
        if (s.tau_length) {
            double floor = ref.tau_length.value_or(pi);
            bool ok = *s.tau_length >= floor - 1e-12;
            r.add(name, *s.tau_length,
                  ok, "tau " + fmt(*s.tau_length) + (ok ? " >= " : " < ") + fmt(floor));
            continue;
        }
        if (s.modulus_upper) {
            SideModulus rm = ref_modulus();
            bool ok = *s.modulus_upper <= rm.M + rm.err + 1e-12;
            r.add(name, *s.modulus_upper,
                  ok, "chain " + fmt(*s.modulus_upper) + (ok ? " <= " : " > ") + fmt(rm.M));
            continue;
        }
        SideModulus rm = ref_modulus();
        SideModulus sj = face_side_modulus(face, s.lo, s.hi);
        double slack = sj.err + rm.err;
        bool ok = sj.M <= rm.M + slack;
        r.add(name, sj.M,
              ok, "grid M=" + fmt(sj.M) + (ok ? " <= " : " > ") + "M_ref=" + fmt(rm.M) +
                      " slack=" + fmt(slack));
    }
    return r;
}

}  // namespace tractforge
