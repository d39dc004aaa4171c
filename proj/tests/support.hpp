#pragma once
// Shared helpers for construction and acceptance tests: raster flood fill of
// a forest complement, literal partition predicates, random fixtures, and the
// trapezoid modulus spot check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tractforge/bgcheck.hpp"
#include "tractforge/construct.hpp"
#include "tractforge/modulus.hpp"

namespace tfsupport {

using namespace tractforge;

struct Flood {
    int components = 0;
    std::vector<int> probe_labels;
};

// Rasterizes forest edges as walls (cells whose center is within 0.75h of an
// edge) and flood-fills the rest with 4-connectivity. `inside` restricts the
// traversal domain (empty = whole box); components are counted over that
// domain. Probes on wall cells report label -1.
inline Flood flood_complement(const Forest& f, Bbox box, double h,
                              const std::function<bool(Point)>& inside_fn,
                              const std::vector<Point>& probes) {
    auto inside = [&](Point p) { return !inside_fn || inside_fn(p); };
    int nx = static_cast<int>(std::ceil((box.x1 - box.x0) / h));
    int ny = static_cast<int>(std::ceil((box.y1 - box.y0) / h));
    auto center = [&](int ix, int iy) {
        return Point{box.x0 + (ix + 0.5) * h, box.y0 + (iy + 0.5) * h};
    };
    std::vector<uint8_t> wall(static_cast<std::size_t>(nx) * ny, 0);
    for (std::size_t e = 0; e < f.edges.size(); ++e) {
        EdgeGeo g = f.geo(static_cast<int>(e));
        Bbox b = g.bbox();
        b.pad(h);
        if (!b.overlaps(box)) continue;
        double len = g.length();
        int steps = std::max(2, static_cast<int>(std::ceil(len / (h / 2))));
        for (int s = 0; s <= steps; ++s) {
            Point p = g.at(static_cast<double>(s) / steps);
            int cx = static_cast<int>(std::floor((p.real() - box.x0) / h));
            int cy = static_cast<int>(std::floor((p.imag() - box.y0) / h));
            for (int dy = -2; dy <= 2; ++dy)
                for (int dx = -2; dx <= 2; ++dx) {
                    int ix = cx + dx, iy = cy + dy;
                    if (ix < 0 || iy < 0 || ix >= nx || iy >= ny) continue;
                    std::size_t id = static_cast<std::size_t>(iy) * nx + ix;
                    if (wall[id]) continue;
                    if (dist_point(g, center(ix, iy)) < 0.75 * h) wall[id] = 1;
                }
        }
    }
    std::vector<int32_t> label(static_cast<std::size_t>(nx) * ny, -1);
    int comps = 0;
    std::deque<std::pair<int, int>> queue;
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            std::size_t id = static_cast<std::size_t>(iy) * nx + ix;
            if (wall[id] || label[id] >= 0 || !inside(center(ix, iy))) continue;
            int cur = comps++;
            label[id] = cur;
            queue.push_back({ix, iy});
            while (!queue.empty()) {
                auto [x, y] = queue.front();
                queue.pop_front();
                const int nbr[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
                for (auto& d : nbr) {
                    int qx = x + d[0], qy = y + d[1];
                    if (qx < 0 || qy < 0 || qx >= nx || qy >= ny) continue;
                    std::size_t qid = static_cast<std::size_t>(qy) * nx + qx;
                    if (wall[qid] || label[qid] >= 0 || !inside(center(qx, qy))) continue;
                    label[qid] = cur;
                    queue.push_back({qx, qy});
                }
            }
        }
    Flood out;
    out.components = comps;
    for (Point p : probes) {
        int ix = static_cast<int>(std::floor((p.real() - box.x0) / h));
        int iy = static_cast<int>(std::floor((p.imag() - box.y0) / h));
        if (ix < 0 || iy < 0 || ix >= nx || iy >= ny)
            out.probe_labels.push_back(-1);
        else
            out.probe_labels.push_back(label[static_cast<std::size_t>(iy) * nx + ix]);
    }
    return out;
}

inline std::vector<double> cut_heights(const BoundaryPartition& p) {
    std::vector<double> cuts;
    if (p.intervals.empty()) return cuts;
    cuts.push_back(p.intervals.front().a.imag());
    for (const auto& iv : p.intervals) cuts.push_back(iv.b.imag());
    return cuts;
}

inline bool is_power_of_two(double x) {
    if (!(x > 0)) return false;
    int e = 0;
    return std::frexp(x, &e) == 0.5;
}

// The six output predicates of the symmetric refinement, checked literally.
// Returns an empty string when all hold, else a description of the failure.
inline std::string check_six_conditions(const BoundaryPartition& q, const BoundaryPartition& qp,
                                        double M) {
    std::ostringstream bad;
    double C = partition_bg_constant(q);
    std::vector<double> cuts = cut_heights(qp);
    std::size_t n = cuts.size();
    // (1) middle interval kept
    bool has_mid = false;
    std::size_t mid_idx = 0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (cuts[i] == -1.0 && cuts[i + 1] == 1.0) {
            has_mid = true;
            mid_idx = i;
        }
    if (!has_mid) return "condition 1: middle interval (-1,1) missing";
    // (2) symmetry, exact since all endpoints are dyadic
    for (std::size_t i = 0; i < n; ++i)
        if (cuts[i] != -cuts[n - 1 - i]) {
            bad << "condition 2: cut " << cuts[i] << " unmatched";
            return bad.str();
        }
    // (3) lengths non-increasing away from the center
    for (std::size_t i = mid_idx + 1; i + 2 < n; ++i)
        if (cuts[i + 2] - cuts[i + 1] > cuts[i + 1] - cuts[i] + 0) {
            bad << "condition 3: length increases after " << cuts[i + 1];
            return bad.str();
        }
    // (4) dyadic lengths
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!is_power_of_two(cuts[i + 1] - cuts[i])) {
            bad << "condition 4: length " << (cuts[i + 1] - cuts[i]) << " not a power of two";
            return bad.str();
        }
    // (5) strict refinement against every met input interval
    std::vector<double> qcuts = cut_heights(q);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (i == mid_idx) continue;
        double lo = cuts[i], hi = cuts[i + 1], len = hi - lo;
        for (std::size_t k = 0; k + 1 < qcuts.size(); ++k) {
            if (hi <= qcuts[k] || lo >= qcuts[k + 1]) continue;  // open overlap only
            if (!(len < (qcuts[k + 1] - qcuts[k]) / M)) {
                bad << "condition 5: piece " << len << " vs interval " << (qcuts[k + 1] - qcuts[k]);
                return bad.str();
            }
        }
    }
    // (6) constants controlled by M and C
    double worst_all = partition_bg_constant(qp);
    if (!(worst_all <= 8.0 * M * C + 1e-12)) {
        bad << "condition 6: constant " << worst_all;
        return bad.str();
    }
    for (std::size_t i = 0; i + 2 < n; ++i) {
        if (i == mid_idx || i + 1 == mid_idx) continue;  // pairs not touching the middle
        double r = (cuts[i + 1] - cuts[i]) / (cuts[i + 2] - cuts[i + 1]);
        if (r < 1) r = 1 / r;
        if (!(r <= 2 * C + 1e-12)) {
            bad << "condition 6: off-center ratio " << r << " > 2C";
            return bad.str();
        }
    }
    return {};
}

struct SpotResult {
    double m_hat = 0.0;
    double err = 0.0;
    double lower = 0.0;
    bool pass = false;
};

// Dirichlet-grid spot check for trapezoid k: the thin quadrilateral along the
// connector and the diagonal, jogging through the removed opening to a plate
// on the far vertical segment. Its separating modulus is compared against the
// exact rectangle bound for the base interval.
inline SpotResult tube_spot_check(const CentralTube& t, int k) {
    const TubeConnector* c = nullptr;
    const TubeConnector* cs = nullptr;
    int kstar = k > 0 ? k + 1 : k - 1;
    for (const auto& tc : t.connectors) {
        if (tc.k == k) c = &tc;
        if (tc.k == kstar) cs = &tc;
    }
    if (!c || !cs) throw std::invalid_argument("tube_spot_check: connector missing");
    int ns = cs->n;
    double B = std::abs(cs->y);
    double A = t.a.at(ns - 2);
    double eta = t.a.at(ns - 1) - t.a.at(ns - 2);
    double xk = std::abs(c->x), yk = std::abs(c->y);
    Point u = Point{yk, yk} - Point{0.0, xk};
    u /= std::abs(u);
    Point nH = u * Point{0.0, 1.0};
    Point nd = Point{-1.0, 1.0} / std::sqrt(2.0);
    std::vector<Point> poly(11);
    poly[0] = {0.0, xk};
    poly[1] = poly[0] + eta * u;
    poly[2] = {yk, yk};
    poly[3] = {A, A};
    poly[4] = {B, B};
    poly[5] = {B, B - eta};
    poly[6] = {B, B - 2 * eta};
    poly[7] = Point{(A + B) / 2, (A + B) / 2} - (eta / 4) * nd;
    poly[8] = Point{A, A} + eta * nd;
    poly[9] = poly[2] + eta * nd;
    poly[10] = poly[1] + eta * nH;
    Quadrilateral quad;
    if (k > 0) {
        quad.polygon = poly;
        quad.marks = {0, 1, 5, 6};
    } else {
        quad.polygon.resize(11);
        for (int i = 0; i < 11; ++i) quad.polygon[i] = std::conj(poly[(11 - i) % 11]);
        quad.marks = {10, 0, 5, 6};
    }
    ModulusResult r = quad_connecting_modulus(quad, eta / 8);
    SpotResult out;
    out.m_hat = 1.0 / r.value;
    out.err = r.error_estimate / (r.value * r.value);
    out.lower = 2 * B / eta - 2;
    out.pass = out.m_hat - out.err <= out.lower + 1e-9;
    return out;
}

// Random normalized partition of the imaginary axis: middle interval (-1,1),
// `per_side` intervals each side with lengths in [lo, hi].
inline BoundaryPartition random_normalized_partition(std::mt19937& rng, int per_side, double lo,
                                                     double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> cuts{-1.0, 1.0};
    double up = 1.0;
    for (int i = 0; i < per_side; ++i) {
        up += dist(rng);
        cuts.push_back(up);
    }
    double down = -1.0;
    for (int i = 0; i < per_side; ++i) {
        down -= dist(rng);
        cuts.insert(cuts.begin(), down);
    }
    return line_partition_imaginary(cuts);
}

inline bool forests_identical(const Forest& a, const Forest& b) {
    if (a.vertices.size() != b.vertices.size() || a.edges.size() != b.edges.size()) return false;
    for (std::size_t i = 0; i < a.vertices.size(); ++i)
        if (a.vertices[i] != b.vertices[i]) return false;
    for (std::size_t i = 0; i < a.edges.size(); ++i) {
        const ArcEdge &x = a.edges[i], &y = b.edges[i];
        if (x.a != y.a || x.b != y.b || x.kind != y.kind || x.center != y.center ||
            x.extent != y.extent)
            return false;
    }
    return true;
}

}  // namespace tfsupport
