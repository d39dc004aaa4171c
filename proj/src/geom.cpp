#include "tractforge/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace tractforge {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_2pi(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0) a += kTwoPi;
    return a;
}

// signed smallest difference a-b in (-pi, pi]
double ang_diff(double a, double b) {
    double d = wrap_2pi(a - b);
    if (d > kPi) d -= kTwoPi;
    return d;
}

Point unit(Point v) {
    double n = std::abs(v);
    return n > 0 ? v / n : Point{1.0, 0.0};
}

}  // namespace

double cross(Point a, Point b) { return a.real() * b.imag() - a.imag() * b.real(); }
double dot(Point a, Point b) { return a.real() * b.real() + a.imag() * b.imag(); }

void Bbox::expand(Point p) {
    x0 = std::min(x0, p.real());
    y0 = std::min(y0, p.imag());
    x1 = std::max(x1, p.real());
    y1 = std::max(y1, p.imag());
}
void Bbox::expand(const Bbox& b) {
    x0 = std::min(x0, b.x0);
    y0 = std::min(y0, b.y0);
    x1 = std::max(x1, b.x1);
    y1 = std::max(y1, b.y1);
}
void Bbox::pad(double m) {
    x0 -= m;
    y0 -= m;
    x1 += m;
    y1 += m;
}
bool Bbox::overlaps(const Bbox& b) const {
    return x0 <= b.x1 && b.x0 <= x1 && y0 <= b.y1 && b.y0 <= y1;
}
double Bbox::diag() const { return std::hypot(x1 - x0, y1 - y0); }

EdgeGeo EdgeGeo::segment(Point a, Point b) {
    EdgeGeo e;
    e.is_arc = false;
    e.p0 = a;
    e.p1 = b;
    return e;
}

EdgeGeo EdgeGeo::arc(Point a, Point b, Point center, double extent) {
    EdgeGeo e;
    e.is_arc = true;
    e.p0 = a;
    e.p1 = b;
    e.center = center;
    e.radius = std::abs(a - center);
    e.ang0 = std::atan2(a.imag() - center.imag(), a.real() - center.real());
    e.extent = extent;
    return e;
}

Point EdgeGeo::at(double t) const {
    if (!is_arc) return p0 + t * (p1 - p0);
    double a = ang0 + t * extent;
    return center + radius * Point{std::cos(a), std::sin(a)};
}

Point EdgeGeo::tangent(double t) const {
    if (!is_arc) return unit(p1 - p0);
    double a = ang0 + t * extent;
    Point radial{std::cos(a), std::sin(a)};
    Point ccw{-radial.imag(), radial.real()};
    return extent >= 0 ? ccw : -ccw;
}

double EdgeGeo::length() const {
    if (!is_arc) return std::abs(p1 - p0);
    return radius * std::abs(extent);
}

double EdgeGeo::diam() const {
    if (!is_arc) return std::abs(p1 - p0);
    if (std::abs(extent) >= kPi) return 2.0 * radius;
    return std::abs(p1 - p0);
}

Bbox EdgeGeo::bbox() const {
    Bbox b = Bbox::of(p0);
    b.expand(p1);
    if (is_arc) {
        const double cardinals[4] = {0.0, kPi / 2, kPi, 3 * kPi / 2};
        for (double c : cardinals)
            if (angle_on_arc(c))
                b.expand(center + radius * Point{std::cos(c), std::sin(c)});
    }
    return b;
}

bool EdgeGeo::angle_on_arc(double phi, double tol) const {
    if (!is_arc) return false;
    double tol_ang = radius > 0 ? tol / radius : tol;
    if (extent >= 0) {
        double s = wrap_2pi(phi - ang0);
        return s <= extent + tol_ang || s >= kTwoPi - tol_ang;
    }
    double s = wrap_2pi(ang0 - phi);
    return s <= -extent + tol_ang || s >= kTwoPi - tol_ang;
}

double dist_point(const EdgeGeo& e, Point z) {
    if (!e.is_arc) {
        Point r = e.p1 - e.p0;
        double len2 = dot(r, r);
        if (len2 == 0) return std::abs(z - e.p0);
        double t = std::clamp(dot(z - e.p0, r) / len2, 0.0, 1.0);
        return std::abs(z - (e.p0 + t * r));
    }
    double best = std::min(std::abs(z - e.p0), std::abs(z - e.p1));
    Point d = z - e.center;
    double n = std::abs(d);
    if (n == 0) return std::min(best, e.radius);
    double phi = std::atan2(d.imag(), d.real());
    if (e.angle_on_arc(phi)) best = std::min(best, std::abs(n - e.radius));
    return best;
}

namespace {

// max over points of edge e of |x - z|
double sup_point(const EdgeGeo& e, Point z) {
    double best = std::max(std::abs(z - e.p0), std::abs(z - e.p1));
    if (e.is_arc) {
        Point d = z - e.center;
        double n = std::abs(d);
        double phi = n == 0 ? 0.0 : std::atan2(-d.imag(), -d.real());
        if (n == 0 || e.angle_on_arc(phi)) best = std::max(best, n + e.radius);
    }
    return best;
}

// closest point on the full supporting line of a segment
Point line_foot(Point p0, Point p1, Point z) {
    Point r = p1 - p0;
    double len2 = dot(r, r);
    if (len2 == 0) return p0;
    double t = dot(z - p0, r) / len2;
    return p0 + t * r;
}

bool seg_param_contains(Point p0, Point p1, Point q, double tol) {
    Point r = p1 - p0;
    double len = std::abs(r);
    if (len == 0) return std::abs(q - p0) <= tol;
    double t = dot(q - p0, r) / (len * len);
    return t >= -tol / len && t <= 1 + tol / len;
}

}  // namespace

std::vector<Point> intersect(const EdgeGeo& e, const EdgeGeo& f, double tol) {
    std::vector<Point> out;
    auto push = [&](Point p) {
        for (const Point& q : out)
            if (std::abs(p - q) <= 4 * tol) return;
        out.push_back(p);
    };

    if (!e.is_arc && !f.is_arc) {
        Point r = e.p1 - e.p0, s = f.p1 - f.p0;
        double den = cross(r, s);
        double scale = std::max({std::abs(r), std::abs(s), 1e-300});
        if (std::abs(den) <= tol * scale) {
            // parallel; collinear overlap?
            if (std::abs(cross(f.p0 - e.p0, r)) <= tol * std::max(std::abs(r), 1e-300)) {
                double len2 = dot(r, r);
                if (len2 == 0) return out;
                double t0 = dot(f.p0 - e.p0, r) / len2;
                double t1 = dot(f.p1 - e.p0, r) / len2;
                if (t0 > t1) std::swap(t0, t1);
                double lo = std::max(0.0, t0), hi = std::min(1.0, t1);
                if (hi - lo > tol / std::abs(r)) {
                    push(e.p0 + ((lo + hi) / 2) * r);
                } else if (hi >= lo - tol / std::abs(r)) {
                    push(e.p0 + ((lo + hi) / 2) * r);
                }
            }
            return out;
        }
        double t = cross(f.p0 - e.p0, s) / den;
        double u = cross(f.p0 - e.p0, r) / den;
        double te = tol / std::max(std::abs(r), 1e-300);
        double tu = tol / std::max(std::abs(s), 1e-300);
        if (t >= -te && t <= 1 + te && u >= -tu && u <= 1 + tu) push(e.p0 + t * r);
        return out;
    }

    if (e.is_arc != f.is_arc) {
        const EdgeGeo& seg = e.is_arc ? f : e;
        const EdgeGeo& arc = e.is_arc ? e : f;
        Point r = seg.p1 - seg.p0;
        double a = dot(r, r);
        if (a == 0) return out;
        Point d = seg.p0 - arc.center;
        double b = 2 * dot(r, d);
        double c = dot(d, d) - arc.radius * arc.radius;
        double disc = b * b - 4 * a * c;
        double disc_tol = 4 * a * tol * std::max(arc.radius, 1.0);
        if (disc < -disc_tol) return out;
        disc = std::max(disc, 0.0);
        double sq = std::sqrt(disc);
        for (double t : {(-b - sq) / (2 * a), (-b + sq) / (2 * a)}) {
            double te = tol / std::abs(r);
            if (t < -te || t > 1 + te) continue;
            Point p = seg.p0 + t * r;
            Point dp = p - arc.center;
            if (std::abs(dp) == 0) continue;
            double phi = std::atan2(dp.imag(), dp.real());
            if (arc.angle_on_arc(phi, tol)) push(arc.center + arc.radius * unit(dp));
        }
        return out;
    }

    // arc-arc
    Point cc = f.center - e.center;
    double dcc = std::abs(cc);
    if (dcc <= tol) {
        if (std::abs(e.radius - f.radius) <= tol) {
            // cocircular: report midpoint of angular overlap if substantial
            const int n = 64;
            double lo = 2 * kTwoPi, hi = -2 * kTwoPi;
            bool any = false;
            for (int i = 0; i <= n; i++) {
                double a = e.ang0 + e.extent * i / n;
                if (f.angle_on_arc(a, tol)) {
                    double s = e.extent * i / n;
                    lo = std::min(lo, s);
                    hi = std::max(hi, s);
                    any = true;
                }
            }
            if (any && (hi - lo) * e.radius > tol) {
                double mid = e.ang0 + (lo + hi) / 2;
                push(e.center + e.radius * Point{std::cos(mid), std::sin(mid)});
            } else if (any) {
                double mid = e.ang0 + (lo + hi) / 2;
                push(e.center + e.radius * Point{std::cos(mid), std::sin(mid)});
            }
        }
        return out;
    }
    double a = (dcc * dcc + e.radius * e.radius - f.radius * f.radius) / (2 * dcc);
    double h2 = e.radius * e.radius - a * a;
    double h2_tol = 2 * tol * std::max({e.radius, f.radius, dcc});
    if (h2 < -h2_tol) return out;
    double h = std::sqrt(std::max(h2, 0.0));
    Point u = cc / dcc;
    Point perp{-u.imag(), u.real()};
    for (double sgn : {1.0, -1.0}) {
        Point p = e.center + a * u + sgn * h * perp;
        Point de = p - e.center, df = p - f.center;
        if (std::abs(de) == 0 || std::abs(df) == 0) continue;
        if (e.angle_on_arc(std::atan2(de.imag(), de.real()), tol) &&
            f.angle_on_arc(std::atan2(df.imag(), df.real()), tol))
            push(p);
        if (h == 0) break;
    }
    return out;
}

double dist(const EdgeGeo& e, const EdgeGeo& f) {
    double scale = std::max(e.bbox().diag(), f.bbox().diag());
    if (!intersect(e, f, 1e-14 * std::max(scale, 1e-30)).empty()) return 0.0;

    double best = std::min(std::min(dist_point(f, e.p0), dist_point(f, e.p1)),
                           std::min(dist_point(e, f.p0), dist_point(e, f.p1)));

    auto consider_pair = [&](Point p, Point q) { best = std::min(best, std::abs(p - q)); };

    if (e.is_arc && !f.is_arc) {
        Point foot = line_foot(f.p0, f.p1, e.center);
        if (seg_param_contains(f.p0, f.p1, foot, 0.0)) {
            Point d = foot - e.center;
            if (std::abs(d) > 0) {
                double phi = std::atan2(d.imag(), d.real());
                if (e.angle_on_arc(phi)) consider_pair(e.center + e.radius * unit(d), foot);
            }
        }
    } else if (!e.is_arc && f.is_arc) {
        Point foot = line_foot(e.p0, e.p1, f.center);
        if (seg_param_contains(e.p0, e.p1, foot, 0.0)) {
            Point d = foot - f.center;
            if (std::abs(d) > 0) {
                double phi = std::atan2(d.imag(), d.real());
                if (f.angle_on_arc(phi)) consider_pair(foot, f.center + f.radius * unit(d));
            }
        }
    } else if (e.is_arc && f.is_arc) {
        Point cc = f.center - e.center;
        double dcc = std::abs(cc);
        if (dcc > 0) {
            Point u = cc / dcc;
            for (double s1 : {1.0, -1.0})
                for (double s2 : {1.0, -1.0}) {
                    Point p = e.center + s1 * e.radius * u;
                    Point q = f.center + s2 * f.radius * u;
                    Point de = p - e.center, df = q - f.center;
                    if (e.angle_on_arc(std::atan2(de.imag(), de.real())) &&
                        f.angle_on_arc(std::atan2(df.imag(), df.real())))
                        consider_pair(p, q);
                }
        }
    }
    return best;
}

double sup_dist(const EdgeGeo& e, const EdgeGeo& f) {
    double best = std::max(std::max(sup_point(f, e.p0), sup_point(f, e.p1)),
                           std::max(sup_point(e, f.p0), sup_point(e, f.p1)));
    if (e.is_arc && f.is_arc) {
        Point cc = f.center - e.center;
        double dcc = std::abs(cc);
        if (dcc > 0) {
            Point u = cc / dcc;
            for (double s1 : {1.0, -1.0})
                for (double s2 : {1.0, -1.0}) {
                    Point p = e.center + s1 * e.radius * u;
                    Point q = f.center + s2 * f.radius * u;
                    Point de = p - e.center, df = q - f.center;
                    if (e.angle_on_arc(std::atan2(de.imag(), de.real())) &&
                        f.angle_on_arc(std::atan2(df.imag(), df.real())))
                        best = std::max(best, std::abs(p - q));
                }
        }
    }
    return best;
}

int Forest::add_vertex(Point p) {
    vertices.push_back(p);
    return static_cast<int>(vertices.size()) - 1;
}

int Forest::add_edge(int a, int b) {
    edges.push_back({a, b, ArcEdge::Kind::segment, {0, 0}, 0});
    return static_cast<int>(edges.size()) - 1;
}

int Forest::add_arc(int a, int b, Point center, double extent) {
    edges.push_back({a, b, ArcEdge::Kind::arc, center, extent});
    return static_cast<int>(edges.size()) - 1;
}

EdgeGeo Forest::geo(const ArcEdge& e) const {
    if (e.kind == ArcEdge::Kind::segment)
        return EdgeGeo::segment(vertices[e.a], vertices[e.b]);
    return EdgeGeo::arc(vertices[e.a], vertices[e.b], e.center, e.extent);
}

EdgeGeo Forest::geo(int e) const { return geo(edges[e]); }

std::vector<int> Forest::degrees() const {
    std::vector<int> d(vertices.size(), 0);
    for (const auto& e : edges) {
        if (e.a >= 0 && e.a < (int)vertices.size()) d[e.a]++;
        if (e.b >= 0 && e.b < (int)vertices.size()) d[e.b]++;
    }
    return d;
}

int Forest::max_degree() const {
    int m = 0;
    for (int d : degrees()) m = std::max(m, d);
    return m;
}

std::vector<std::vector<int>> Forest::rotation_order() const {
    std::vector<std::vector<std::pair<double, int>>> ang(vertices.size());
    for (int i = 0; i < (int)edges.size(); i++) {
        EdgeGeo g = geo(i);
        Point t0 = g.tangent(0.0), t1 = -g.tangent(1.0);
        ang[edges[i].a].push_back({std::atan2(t0.imag(), t0.real()), i});
        ang[edges[i].b].push_back({std::atan2(t1.imag(), t1.real()), i});
    }
    std::vector<std::vector<int>> out(vertices.size());
    for (size_t v = 0; v < vertices.size(); v++) {
        std::sort(ang[v].begin(), ang[v].end());
        for (auto& [a, id] : ang[v]) out[v].push_back(id);
    }
    return out;
}

namespace {
struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(size_t n) : parent(n) {
        for (size_t i = 0; i < n; i++) parent[i] = (int)i;
    }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    // returns false if already joined (cycle)
    bool join(int a, int b) {
        int ra = find(a), rb = find(b);
        if (ra == rb) return false;
        parent[std::max(ra, rb)] = std::min(ra, rb);
        return true;
    }
};
}  // namespace

std::vector<int> Forest::component_labels() const {
    UnionFind uf(vertices.size());
    for (const auto& e : edges) uf.join(e.a, e.b);
    std::vector<int> label(vertices.size(), -1);
    int next = 0;
    for (size_t v = 0; v < vertices.size(); v++) {
        int r = uf.find((int)v);
        if (label[r] < 0) label[r] = next++;
        label[v] = label[r];
    }
    return label;
}

int Forest::component_count() const {
    auto l = component_labels();
    int m = 0;
    for (int x : l) m = std::max(m, x + 1);
    return m;
}

Bbox Forest::bbox() const {
    if (vertices.empty()) return {};
    Bbox b = Bbox::of(vertices[0]);
    for (const auto& v : vertices) b.expand(v);
    for (int i = 0; i < (int)edges.size(); i++) b.expand(geo(i).bbox());
    return b;
}

SetGeo SetGeo::of(const Forest& f) {
    SetGeo s;
    for (int i = 0; i < (int)f.edges.size(); i++) s.edges.push_back(f.geo(i));
    s.points = f.vertices;
    return s;
}

namespace {
double set_sup_dist(const SetGeo& a, const SetGeo& b) {
    double m = 0;
    for (const auto& e : a.edges) {
        for (const auto& f : b.edges) m = std::max(m, sup_dist(e, f));
        for (const auto& p : b.points) m = std::max(m, sup_point(e, p));
    }
    for (const auto& p : a.points) {
        for (const auto& f : b.edges) m = std::max(m, sup_point(f, p));
        for (const auto& q : b.points) m = std::max(m, std::abs(p - q));
    }
    return m;
}

double set_inf_dist(const SetGeo& a, const SetGeo& b) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& e : a.edges) {
        for (const auto& f : b.edges) m = std::min(m, dist(e, f));
        for (const auto& p : b.points) m = std::min(m, dist_point(e, p));
    }
    for (const auto& p : a.points) {
        for (const auto& f : b.edges) m = std::min(m, dist_point(f, p));
        for (const auto& q : b.points) m = std::min(m, std::abs(p - q));
    }
    return m;
}
}  // namespace

Metrics metrics(const SetGeo& a) {
    if (a.empty()) throw std::invalid_argument("metrics: empty set");
    Metrics m;
    for (const auto& e : a.edges) {
        m.length += e.length();
        m.diam = std::max(m.diam, e.diam());
    }
    m.diam = std::max(m.diam, set_sup_dist(a, a));
    return m;
}

Metrics metrics(const SetGeo& a, const SetGeo& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("metrics: empty set");
    SetGeo u = a;
    u.edges.insert(u.edges.end(), b.edges.begin(), b.edges.end());
    u.points.insert(u.points.end(), b.points.begin(), b.points.end());
    Metrics m = metrics(u);
    m.dist = set_inf_dist(a, b);
    return m;
}

double three_point_constant(const std::vector<Point>& polyline) {
    if (polyline.size() < 3) throw std::invalid_argument("three_point_constant: need >= 3 points");

    // simplicity: non-adjacent segments must not meet; adjacent ones only at
    // the shared vertex
    double scale = 0;
    for (size_t i = 0; i + 1 < polyline.size(); i++)
        scale = std::max(scale, std::abs(polyline[i + 1] - polyline[i]));
    double tol = 1e-12 * std::max(scale, 1e-30);
    for (size_t i = 0; i + 1 < polyline.size(); i++) {
        EdgeGeo ei = EdgeGeo::segment(polyline[i], polyline[i + 1]);
        for (size_t j = i + 1; j + 1 < polyline.size(); j++) {
            EdgeGeo ej = EdgeGeo::segment(polyline[j], polyline[j + 1]);
            auto hits = intersect(ei, ej, tol);
            if (hits.empty()) continue;
            if (j == i + 1) {
                for (const Point& h : hits)
                    if (std::abs(h - polyline[j]) > 16 * tol)
                        throw std::invalid_argument("three_point_constant: self-intersecting polyline");
            } else {
                throw std::invalid_argument("three_point_constant: self-intersecting polyline");
            }
        }
    }

    std::vector<Point> s;
    s.reserve(polyline.size() * 2);
    for (size_t i = 0; i + 1 < polyline.size(); i++) {
        s.push_back(polyline[i]);
        s.push_back((polyline[i] + polyline[i + 1]) / 2.0);
    }
    s.push_back(polyline.back());
    if (s.size() > 2048) throw std::invalid_argument("three_point_constant: polyline too large");

    double best = 1.0;
    const size_t n = s.size();
    for (size_t i = 0; i < n; i++)
        for (size_t j = i + 2; j < n; j++) {
            double chord = std::abs(s[j] - s[i]);
            if (chord <= 0) continue;
            for (size_t k = i + 1; k < j; k++) {
                double detour = std::abs(s[k] - s[i]) + std::abs(s[j] - s[k]);
                best = std::max(best, detour / chord);
            }
        }
    return best;
}

bool EdgeNeighborhood::contains(Point z) const { return signed_margin(z) < 0; }

double EdgeNeighborhood::signed_margin(Point z) const {
    double m = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < edges.size(); i++)
        m = std::min(m, dist_point(edges[i], z) - r * diams[i]);
    return m;
}

EdgeNeighborhood neighborhood(const Forest& f, double r) {
    if (!(r > 0)) throw std::invalid_argument("neighborhood: r must be > 0");
    EdgeNeighborhood n;
    n.r = r;
    for (int i = 0; i < (int)f.edges.size(); i++) {
        n.edges.push_back(f.geo(i));
        n.diams.push_back(n.edges.back().diam());
    }
    return n;
}

void SpatialHash::insert(int32_t id, const Bbox& b) {
    int64_t ix0 = (int64_t)std::floor(b.x0 / cell), ix1 = (int64_t)std::floor(b.x1 / cell);
    int64_t iy0 = (int64_t)std::floor(b.y0 / cell), iy1 = (int64_t)std::floor(b.y1 / cell);
    for (int64_t ix = ix0; ix <= ix1; ix++)
        for (int64_t iy = iy0; iy <= iy1; iy++) {
            uint64_t key = (uint64_t)(uint32_t)ix << 32 | (uint32_t)iy;
            buckets[key].push_back(id);
        }
}

void SpatialHash::query(const Bbox& b, std::vector<int32_t>& out) const {
    int64_t ix0 = (int64_t)std::floor(b.x0 / cell), ix1 = (int64_t)std::floor(b.x1 / cell);
    int64_t iy0 = (int64_t)std::floor(b.y0 / cell), iy1 = (int64_t)std::floor(b.y1 / cell);
    for (int64_t ix = ix0; ix <= ix1; ix++)
        for (int64_t iy = iy0; iy <= iy1; iy++) {
            uint64_t key = (uint64_t)(uint32_t)ix << 32 | (uint32_t)iy;
            auto it = buckets.find(key);
            if (it != buckets.end()) out.insert(out.end(), it->second.begin(), it->second.end());
        }
}

void for_each_close_pair(const std::vector<Bbox>& boxes, double pad,
                         const std::function<void(int, int)>& fn) {
    if (boxes.empty()) return;
    std::vector<double> sizes;
    sizes.reserve(boxes.size());
    for (const auto& b : boxes) sizes.push_back(std::max(b.x1 - b.x0, b.y1 - b.y0));
    std::nth_element(sizes.begin(), sizes.begin() + sizes.size() / 2, sizes.end());
    double cell = std::max(sizes[sizes.size() / 2] + 2 * pad, 1e-12);
    SpatialHash h(cell);
    for (int i = 0; i < (int)boxes.size(); i++) {
        Bbox b = boxes[i];
        b.pad(pad);
        h.insert(i, b);
    }
    std::vector<int32_t> cand;
    std::vector<char> seen(boxes.size(), 0);
    for (int i = 0; i < (int)boxes.size(); i++) {
        cand.clear();
        Bbox b = boxes[i];
        b.pad(pad);
        h.query(b, cand);
        for (int32_t j : cand) {
            if (j <= i || seen[j]) continue;
            seen[j] = 1;
            Bbox bj = boxes[j];
            bj.pad(pad);
            if (b.overlaps(bj)) fn(i, j);
        }
        for (int32_t j : cand) seen[j] = 0;
    }
}

Report validate_forest(const Forest& f, const ValidateOptions& opt) {
    Report rep;
    rep.kind = "validate-forest";

    double scale = std::max(f.bbox().diag(), 1e-30);
    double tol = opt.tol_scale * scale;

    int bad_index = 0, degenerate = 0, bad_arc = 0, nonfinite = 0;
    std::string w_index, w_degenerate, w_arc, w_finite;
    const int nv = (int)f.vertices.size();

    for (const auto& v : f.vertices)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            nonfinite++;
            if (w_finite.empty()) w_finite = "vertex with non-finite coordinate";
        }

    std::vector<EdgeGeo> geos;
    geos.reserve(f.edges.size());
    std::vector<Bbox> boxes;
    boxes.reserve(f.edges.size());
    for (int i = 0; i < (int)f.edges.size(); i++) {
        const ArcEdge& e = f.edges[i];
        if (e.a < 0 || e.a >= nv || e.b < 0 || e.b >= nv || e.a == e.b) {
            bad_index++;
            if (w_index.empty()) w_index = "edge " + std::to_string(i);
            geos.push_back(EdgeGeo::segment({0, 0}, {0, 0}));
            boxes.push_back({});
            continue;
        }
        EdgeGeo g = f.geo(i);
        geos.push_back(g);
        boxes.push_back(g.bbox());
        if (g.length() <= tol) {
            degenerate++;
            if (w_degenerate.empty()) w_degenerate = "edge " + std::to_string(i);
        }
        if (e.kind == ArcEdge::Kind::arc) {
            double ae = std::abs(e.extent);
            bool ok = ae > 0 && ae < kTwoPi;
            double r1 = std::abs(f.vertices[e.b] - e.center);
            ok = ok && std::abs(r1 - g.radius) <= 1e-9 * std::max(g.radius, scale * 1e-3);
            if (ok) {
                double a1 = std::atan2((f.vertices[e.b] - e.center).imag(),
                                       (f.vertices[e.b] - e.center).real());
                ok = std::abs(ang_diff(a1, g.ang0 + g.extent)) <=
                     1e-9 + 1e-9 * std::abs(g.extent);
            }
            if (!ok) {
                bad_arc++;
                if (w_arc.empty()) w_arc = "edge " + std::to_string(i);
            }
        }
    }

    rep.add("non-finite-vertices", nonfinite, nonfinite == 0, w_finite);
    rep.add("bad-edge-indices", bad_index, bad_index == 0, w_index);
    rep.add("degenerate-edges", degenerate, degenerate == 0, w_degenerate);
    rep.add("arc-consistency-failures", bad_arc, bad_arc == 0, w_arc);
    if (bad_index > 0) return rep;  // remaining scans assume valid indices

    // crossings
    int crossings = 0;
    std::string w_cross;
    for_each_close_pair(boxes, tol, [&](int i, int j) {
        if (crossings >= opt.max_violations) return;
        const ArcEdge &ei = f.edges[i], &ej = f.edges[j];
        auto hits = intersect(geos[i], geos[j], tol);
        if (hits.empty()) return;
        std::vector<Point> shared;
        if (ei.a == ej.a || ei.a == ej.b) shared.push_back(f.vertices[ei.a]);
        if (ei.b == ej.a || ei.b == ej.b) shared.push_back(f.vertices[ei.b]);
        for (const Point& h : hits) {
            bool at_shared = false;
            for (const Point& s : shared)
                if (std::abs(h - s) <= 64 * tol) at_shared = true;
            if (!at_shared) {
                crossings++;
                if (w_cross.empty())
                    w_cross = "edges " + std::to_string(i) + "," + std::to_string(j) + " at (" +
                              std::to_string(h.real()) + "," + std::to_string(h.imag()) + ")";
                break;
            }
        }
    });
    rep.add("crossings", crossings, crossings == 0, w_cross);

    // cycles
    int cycles = 0;
    std::string w_cycle;
    {
        UnionFind uf(f.vertices.size());
        for (int i = 0; i < (int)f.edges.size(); i++)
            if (!uf.join(f.edges[i].a, f.edges[i].b)) {
                cycles++;
                if (w_cycle.empty()) w_cycle = "edge " + std::to_string(i);
            }
    }
    if (opt.require_acyclic)
        rep.add("cycles", cycles, cycles == 0, w_cycle);
    else
        rep.add("cycles-informational", cycles, true, w_cycle);

    // degrees
    auto deg = f.degrees();
    int isolated = 0;
    std::string w_iso;
    for (int v = 0; v < nv; v++)
        if (deg[v] == 0) {
            isolated++;
            if (w_iso.empty()) w_iso = "vertex " + std::to_string(v);
        }
    rep.add("isolated-vertices", isolated, isolated == 0, w_iso);

    // rotation order degeneracy: two edges leaving a vertex along the same
    // direction make the embedding's cyclic order ill-defined
    int coincident = 0;
    std::string w_rot;
    {
        std::vector<std::vector<double>> ang(f.vertices.size());
        for (int i = 0; i < (int)f.edges.size(); i++) {
            Point t0 = geos[i].tangent(0.0), t1 = -geos[i].tangent(1.0);
            ang[f.edges[i].a].push_back(std::atan2(t0.imag(), t0.real()));
            ang[f.edges[i].b].push_back(std::atan2(t1.imag(), t1.real()));
        }
        for (int v = 0; v < nv; v++) {
            auto& a = ang[v];
            if (a.size() < 2) continue;
            std::sort(a.begin(), a.end());
            for (size_t k = 0; k < a.size(); k++) {
                double gap = (k + 1 < a.size()) ? a[k + 1] - a[k]
                                                : a[0] + kTwoPi - a[k];
                if (std::abs(gap) < 1e-9) {
                    coincident++;
                    if (w_rot.empty()) w_rot = "vertex " + std::to_string(v);
                    break;
                }
            }
        }
    }
    rep.add("coincident-tangents", coincident, coincident == 0, w_rot);

    return rep;
}

}  // namespace tractforge
