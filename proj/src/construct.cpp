#include "tractforge/construct.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tractforge/modulus.hpp"

namespace tractforge {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string num(int k) { return std::to_string(k); }

// Junction dedup keyed on exact coordinates; shared junctions are always
// computed from identical expressions so the keys collide bit-for-bit.
struct VertexPool {
    Forest* f = nullptr;
    std::map<std::pair<double, double>, int> ids;

    explicit VertexPool(Forest& forest) : f(&forest) {}
    int get(Point p) {
        auto key = std::make_pair(p.real(), p.imag());
        auto it = ids.find(key);
        if (it != ids.end()) return it->second;
        int id = f->add_vertex(p);
        ids.emplace(key, id);
        return id;
    }
};

// Piece lengths doubling away from both ends, capped: the profile is
// min(s0*2^i, s1*2^(n-1-i), cap) for the smallest n whose sum reaches
// `total`, then scaled down (factor <= 1) so the pieces tile exactly.
std::vector<double> graded_lengths(double total, double s0, double s1, double cap) {
    if (!(total > 0)) return {};
    s0 = std::min(std::max(s0, 1e-12), cap);
    s1 = std::min(std::max(s1, 1e-12), cap);
    for (int n = 1;; ++n) {
        double sum = 0;
        for (int i = 0; i < n; ++i)
            sum += std::min({s0 * std::ldexp(1.0, i), s1 * std::ldexp(1.0, n - 1 - i), cap});
        if (sum >= total || n > 200000) {
            std::vector<double> out(static_cast<std::size_t>(n));
            double scale = total / sum;
            for (int i = 0; i < n; ++i)
                out[static_cast<std::size_t>(i)] =
                    scale *
                    std::min({s0 * std::ldexp(1.0, i), s1 * std::ldexp(1.0, n - 1 - i), cap});
            return out;
        }
    }
}

// Straight polyline with prescribed piece lengths; the far endpoint is used
// exactly so downstream junction keys match.
void emit_polyline(Forest& f, VertexPool& pool, Point from, Point to,
                   const std::vector<double>& lens) {
    if (lens.empty()) return;
    Point d = to - from;
    double L = std::abs(d);
    int prev = pool.get(from);
    double run = 0;
    for (std::size_t i = 0; i + 1 < lens.size(); ++i) {
        run += lens[i];
        int v = pool.get(from + d * (run / L));
        f.add_edge(prev, v);
        prev = v;
    }
    f.add_edge(prev, pool.get(to));
}

void emit_uniform(Forest& f, VertexPool& pool, Point from, Point to, double target) {
    double len = std::abs(to - from);
    int count = std::max(1, static_cast<int>(std::ceil(len / target - 1e-9)));
    emit_polyline(f, pool, from, to, std::vector<double>(static_cast<std::size_t>(count),
                                                         len / count));
}

}  // namespace

// ---------------------------------------------------------------------------
// Whitney scaffold

int WhitneyGraph::sectors(int generation) { return 1 << (generation + 2); }

double WhitneyGraph::radius(int circle) {
    return circle == 1 ? 0.25 : 1.0 - std::ldexp(1.0, 1 - circle);
}

int WhitneyGraph::vertex_id(int circle, int index) const {
    int n = sectors(circle);
    index %= n;
    if (index < 0) index += n;
    return circle_vertex_base.at(static_cast<std::size_t>(circle - 1)) + index;
}

const WhitneyBox& WhitneyGraph::box_at(int generation, int sector) const {
    // generation-major block layout: generations 1..g-1 hold 2^(g+2)-8 boxes
    std::size_t base = static_cast<std::size_t>((1 << (generation + 2)) - 8);
    return boxes.at(base + static_cast<std::size_t>(sector));
}

WhitneyGraph whitney_graph(int depth) {
    if (depth < 1) throw std::invalid_argument("whitney_graph: depth must be at least 1");
    WhitneyGraph g;
    g.depth = depth;
    for (int m = 1; m <= depth + 1; ++m) {
        g.circle_vertex_base.push_back(static_cast<int>(g.forest.vertices.size()));
        int n = WhitneyGraph::sectors(m);
        double r = WhitneyGraph::radius(m);
        for (int j = 0; j < n; ++j)
            g.forest.add_vertex(r * std::polar(1.0, 2.0 * kPi * j / n));
    }
    std::vector<std::vector<int>> arcs(static_cast<std::size_t>(depth) + 2);
    for (int m = 1; m <= depth + 1; ++m) {
        int n = WhitneyGraph::sectors(m);
        auto& row = arcs[static_cast<std::size_t>(m)];
        row.reserve(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j)
            row.push_back(g.forest.add_arc(g.vertex_id(m, j), g.vertex_id(m, j + 1), {0.0, 0.0},
                                           2.0 * kPi / n));
    }
    for (int gen = 1; gen <= depth; ++gen) {
        int n = WhitneyGraph::sectors(gen);
        std::vector<int> radial(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j)
            radial[static_cast<std::size_t>(j)] =
                g.forest.add_edge(g.vertex_id(gen, j), g.vertex_id(gen + 1, 2 * j));
        for (int j = 0; j < n; ++j) {
            WhitneyBox b;
            b.generation = gen;
            b.sector = j;
            b.r_in = WhitneyGraph::radius(gen);
            b.r_out = WhitneyGraph::radius(gen + 1);
            b.dtheta = 2.0 * kPi / n;
            b.theta0 = j * b.dtheta;
            b.side_cw = radial[static_cast<std::size_t>(j)];
            b.side_ccw = radial[static_cast<std::size_t>((j + 1) % n)];
            b.top = arcs[static_cast<std::size_t>(gen)][static_cast<std::size_t>(j)];
            b.bottom_left =
                arcs[static_cast<std::size_t>(gen) + 1][static_cast<std::size_t>(2 * j)];
            b.bottom_right =
                arcs[static_cast<std::size_t>(gen) + 1][static_cast<std::size_t>(2 * j + 1)];
            g.boxes.push_back(b);
        }
    }
    return g;
}

namespace {

// Shared descend loop: even index -> radial inward, odd -> one ccw arc.
std::vector<int> descend_walk(const WhitneyGraph& g, int circle, int index) {
    std::vector<int> path;
    int m = circle, idx = index;
    while (m > 1) {
        if (idx % 2 == 1) {
            int id = (m <= g.depth) ? g.box_at(m, idx).top
                                    : g.box_at(m - 1, idx / 2).bottom_right;
            path.push_back(id);
            idx = (idx + 1) % WhitneyGraph::sectors(m);
        } else {
            path.push_back(g.box_at(m - 1, idx / 2).side_cw);
            idx /= 2;
            --m;
        }
    }
    return path;
}

int nearest_sector_index(int n, double theta) {
    double t = theta * n / (2.0 * kPi);
    long long j = static_cast<long long>(std::floor(t + 0.5));  // ties go ccw
    long long r = j % n;
    if (r < 0) r += n;
    return static_cast<int>(r);
}

}  // namespace

std::vector<int> route_path(const WhitneyGraph& g, double theta) {
    int circle = g.depth + 1;
    return descend_walk(g, circle, nearest_sector_index(WhitneyGraph::sectors(circle), theta));
}

// ---------------------------------------------------------------------------
// Disk tree

Forest build_disk_tree(const DiskTreeInput& in) {
    const std::size_t n = in.marked.size();
    if (n == 0) throw std::invalid_argument("build_disk_tree: no marked angles");
    for (std::size_t j = 0; j < n; ++j) {
        if (!(in.marked[j] >= 0.0) || in.marked[j] >= 2.0 * kPi)
            throw std::invalid_argument("build_disk_tree: marked angle outside [0, 2pi)");
        if (j > 0 && !(in.marked[j] > in.marked[j - 1]))
            throw std::invalid_argument("build_disk_tree: marked angles must increase");
    }
    if (in.arcs.size() != n)
        throw std::invalid_argument("build_disk_tree: need one arc partition per marked angle");

    struct Join {
        double v = 0.0;
        int mstar = 1;
    };
    std::vector<Join> joins;
    joins.reserve(n);
    int deepest = 1;
    for (std::size_t j = 0; j < n; ++j) {
        double lo = in.marked[j];
        double hi = (j + 1 < n) ? in.marked[j + 1] : in.marked[0] + 2.0 * kPi;
        const auto& ivs = in.arcs[j].partition.intervals;
        if (ivs.empty())
            throw std::invalid_argument("build_disk_tree: empty arc partition");
        std::vector<double> ang{lo};
        for (const auto& iv : ivs) ang.push_back(ang.back() + iv.length);
        if (std::abs(ang.back() - hi) > 1e-9)
            throw std::invalid_argument("build_disk_tree: arc partition does not cover its arc");

        double mid = 0.5 * (lo + hi);
        std::size_t seg = ivs.size() - 1;
        for (std::size_t i = 0; i + 1 < ang.size(); ++i)
            if (ang[i] <= mid && mid <= ang[i + 1]) {
                seg = i;
                break;
            }
        double va = ang[seg], vb = ang[seg + 1];
        double v;
        if (in.arcs[j].center) {
            double c = *in.arcs[j].center;
            if (std::abs(c - va) < 1e-9)
                v = va;
            else if (std::abs(c - vb) < 1e-9)
                v = vb;
            else
                throw std::invalid_argument(
                    "build_disk_tree: center must be an endpoint of the middle interval");
        } else {
            v = (mid - va < vb - mid) ? va : vb;  // tie lands counterclockwise
        }

        double r = 4.0 * kPi;
        std::size_t vi = (v == va) ? seg : seg + 1;
        if (vi > 0) r = std::min(r, ang[vi] - ang[vi - 1]);
        if (vi + 1 < ang.size()) r = std::min(r, ang[vi + 1] - ang[vi]);

        auto dist = [](int m) { return m == 1 ? 0.75 : std::ldexp(1.0, 1 - m); };
        int mstar = 1;
        while (dist(mstar + 1) >= r / 2.0) ++mstar;
        deepest = std::max(deepest, mstar);
        joins.push_back({v, mstar});
    }

    int depth = std::max(1, deepest - 1);
    if (in.depth > 0) {
        if (in.depth < depth)
            throw std::invalid_argument("build_disk_tree: requested depth too shallow");
        depth = in.depth;
    }

    WhitneyGraph g = whitney_graph(depth);
    Forest f;
    std::map<int, int> vid;
    std::set<int> edone;
    auto copy_vertex = [&](int wv) {
        auto it = vid.find(wv);
        if (it != vid.end()) return it->second;
        int id = f.add_vertex(g.forest.vertices[static_cast<std::size_t>(wv)]);
        vid.emplace(wv, id);
        return id;
    };
    auto copy_edge = [&](int we) {
        if (!edone.insert(we).second) return;
        const ArcEdge& e = g.forest.edges[static_cast<std::size_t>(we)];
        int a = copy_vertex(e.a), b = copy_vertex(e.b);
        if (e.kind == ArcEdge::Kind::arc)
            f.add_arc(a, b, e.center, e.extent);
        else
            f.add_edge(a, b);
    };

    // central ring minus the arc that starts at angle 0
    for (int j = 1; j < WhitneyGraph::sectors(1); ++j) copy_edge(g.box_at(1, j).top);

    for (const Join& jn : joins) {
        int idx = nearest_sector_index(WhitneyGraph::sectors(jn.mstar), jn.v);
        int w = copy_vertex(g.vertex_id(jn.mstar, idx));
        int vb = f.add_vertex(std::polar(1.0, jn.v));
        f.add_edge(vb, w);
        for (int e : descend_walk(g, jn.mstar, idx)) copy_edge(e);
    }
    return f;
}

// ---------------------------------------------------------------------------
// Dyadic covers

DyadicCover dyadic_sweep(const std::vector<double>& cuts, double M) {
    if (cuts.size() < 2) throw std::invalid_argument("dyadic_sweep: need at least two cuts");
    if (!(M > 0)) throw std::invalid_argument("dyadic_sweep: M must be positive");
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j)
        if (!(cuts[j] < cuts[j + 1]))
            throw std::invalid_argument("dyadic_sweep: cuts must be strictly increasing");

    // unique power of two in [len/8M, len/4M)
    auto request = [&](double len) {
        int e = 0;
        double m = std::frexp(len / (8.0 * M), &e);
        return m == 0.5 ? std::ldexp(1.0, e - 1) : std::ldexp(1.0, e);
    };

    DyadicCover out;
    auto emit = [&](double lo, double len, int src) {
        out.pieces.push_back({lo, lo + len, src});
    };

    double prev_len = 0;
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
        double len = request(cuts[j + 1] - cuts[j]);
        double g0;
        if (out.pieces.empty()) {
            g0 = std::floor(cuts[j] / len) * len;
        } else {
            if (len > prev_len) len = prev_len;  // lengths never increase
            DyadicCover::Piece last = out.pieces.back();
            if (len < last.length() && last.lo < cuts[j] && cuts[j] < last.hi) {
                // re-split the straddling piece on the finer grid
                out.pieces.pop_back();
                double gb = std::floor(cuts[j] / len) * len;
                for (double x = last.lo; x < gb; x += len) emit(x, len, last.source);
                g0 = gb;
            } else {
                g0 = last.hi;
            }
        }
        while (g0 < cuts[j + 1]) {
            emit(g0, len, static_cast<int>(j));
            g0 += len;
        }
        prev_len = len;
    }
    return out;
}

BoundaryPartition symmetric_partition(const BoundaryPartition& q, double M) {
    std::vector<double> cuts;
    if (!q.intervals.empty()) {
        cuts.push_back(q.intervals.front().a.imag());
        for (const auto& iv : q.intervals) cuts.push_back(iv.b.imag());
    }
    std::size_t i0 = cuts.size();
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        if (cuts[i] == -1.0 && cuts[i + 1] == 1.0) {
            i0 = i;
            break;
        }
    if (i0 == cuts.size())
        throw std::invalid_argument(
            "symmetric_partition: middle interval must be normalized to (-i, i)");
    if (i0 == 0 || i0 + 2 >= cuts.size())
        throw std::invalid_argument(
            "symmetric_partition: normalized middle needs an interval on each side");

    std::vector<double> up{1.0}, down{1.0};
    for (std::size_t i = i0 + 2; i < cuts.size(); ++i) up.push_back(cuts[i]);
    for (std::size_t i = i0; i-- > 0;) down.push_back(-cuts[i]);

    DyadicCover cp = dyadic_sweep(up, M);
    DyadicCover cn = dyadic_sweep(down, M);
    double W = std::min(up.back(), down.back());

    // pointwise-shorter merge; the covers sit on nested dyadic grids, so the
    // piece containing x on each side begins at or before x and the shorter
    // one ends first. A final piece that would straddle W is dropped.
    std::vector<double> ends{1.0};
    std::size_t ip = 0, in = 0;
    double x = 1.0;
    while (x < W) {
        while (ip < cp.pieces.size() && cp.pieces[ip].hi <= x) ++ip;
        while (in < cn.pieces.size() && cn.pieces[in].hi <= x) ++in;
        if (ip >= cp.pieces.size() || in >= cn.pieces.size()) break;
        double l = std::min(cp.pieces[ip].length(), cn.pieces[in].length());
        if (x + l > W) break;
        x += l;
        ends.push_back(x);
    }

    BoundaryPartition out;
    out.carrier = q.carrier;
    auto push = [&](double lo, double hi) {
        PartitionInterval iv;
        iv.a = Point{0.0, lo};
        iv.b = Point{0.0, hi};
        iv.length = hi - lo;
        iv.diam = hi - lo;
        out.intervals.push_back(iv);
    };
    for (std::size_t i = ends.size(); i-- > 1;) push(-ends[i], -ends[i - 1]);
    push(-1.0, 1.0);
    for (std::size_t i = 1; i < ends.size(); ++i) push(ends[i - 1], ends[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Ray fill

Forest rays_forest(const BoundaryPartition& q, const RaysOptions& opt) {
    if (q.intervals.empty()) throw std::invalid_argument("rays_forest: empty partition");
    std::vector<double> cuts;
    cuts.push_back(q.intervals.front().a.imag());
    for (const auto& iv : q.intervals) cuts.push_back(iv.b.imag());

    double span = cuts.back() - cuts.front();
    double window = opt.window > 0 ? opt.window : 4.0 * span;

    Forest f;
    std::vector<int> base;
    base.reserve(cuts.size());
    for (double c : cuts) base.push_back(f.add_vertex(Point{0.0, c}));
    if (opt.include_axis)
        for (std::size_t i = 0; i + 1 < base.size(); ++i)
            f.add_edge(base[i], base[i + 1]);

    for (std::size_t i = 0; i < cuts.size(); ++i) {
        double sp;
        if (i == 0)
            sp = cuts[1] - cuts[0];
        else if (i + 1 == cuts.size())
            sp = cuts[i] - cuts[i - 1];
        else
            sp = std::min(cuts[i] - cuts[i - 1], cuts[i + 1] - cuts[i]);
        int prev = base[i];
        double x = 0.0;
        while (window - x > 1e-12) {
            double nx = std::min(x + sp, window);
            int v = f.add_vertex(Point{nx, cuts[i]});
            f.add_edge(prev, v);
            prev = v;
            x = nx;
        }
    }
    return f;
}

// ---------------------------------------------------------------------------
// Central tube

CentralTube central_tube(const BoundaryPartition& q, double C, const CentralTubeOptions& opt) {
    if (opt.window > 0 && opt.window < 1.0)
        throw std::invalid_argument("central_tube: window must reach past the base corner");

    CentralTube t;
    t.C = std::max(1.0, C);
    t.M = 8.0 * t.C;
    t.report.kind = "central-tube";
    t.sym = symmetric_partition(q, t.M);

    std::vector<double> qc;
    qc.push_back(q.intervals.front().a.imag());
    for (const auto& iv : q.intervals) qc.push_back(iv.b.imag());
    std::size_t i0 = 0;
    while (!(qc[i0] == -1.0 && qc[i0 + 1] == 1.0)) ++i0;

    double extent = t.sym.intervals.back().b.imag();
    double window = opt.window > 0 ? opt.window : extent;

    // a-schedule: symmetric endpoints in [1, window]; when the window runs
    // past the partition, keep stepping on the final grid length (the merged
    // step obeys both sides' constraints, so feasibility is preserved)
    t.a.push_back(1.0);
    for (const auto& iv : t.sym.intervals) {
        double hi = iv.b.imag();
        if (hi > 1.0 && hi <= window) t.a.push_back(hi);
    }
    if (extent < window && t.a.size() >= 2) {
        double step = t.a[t.a.size() - 1] - t.a[t.a.size() - 2];
        while (t.a.back() + step <= window) t.a.push_back(t.a.back() + step);
    }
    for (std::size_t i = 1; i < t.a.size(); ++i) t.eta.push_back(t.a[i] - t.a[i - 1]);

    // connectors: nearest parity-matching schedule index, ties to smaller n
    const int npos = static_cast<int>(qc.size() - 2 - i0);
    const int nneg = static_cast<int>(i0);
    auto interval_len = [&](int k) {
        std::size_t lo = static_cast<std::size_t>(static_cast<int>(i0) + k + (k > 0 ? 0 : 1));
        return qc[lo + 1] - qc[lo];
    };
    auto facing = [&](int k) {
        return k > 0 ? qc[static_cast<std::size_t>(static_cast<int>(i0) + k)]
                     : qc[static_cast<std::size_t>(static_cast<int>(i0) + k + 1)];
    };
    for (int k = -nneg; k <= npos; ++k) {
        if (k == 0) continue;
        double x = facing(k);
        double len = interval_len(k);
        if (std::abs(x) > window) {
            t.report.note("connector k=" + num(k) + " outside the window, skipped");
            continue;
        }
        bool want_odd = k > 0;
        int bestn = -1;
        double bestd = 0;
        for (int nidx = 1; nidx <= static_cast<int>(t.a.size()); ++nidx) {
            if ((nidx % 2 == 1) != want_odd) continue;
            double d = std::abs(t.a[static_cast<std::size_t>(nidx - 1)] - std::abs(x));
            if (bestn < 0 || d < bestd) {
                bestd = d;
                bestn = nidx;
            }
        }
        if (bestn < 0 || !(bestd < len / t.M)) {
            t.report.add("parity-k" + num(k), bestd, false,
                         "no feasible schedule index for connector k=" + num(k));
            continue;
        }
        double an = t.a[static_cast<std::size_t>(bestn - 1)];
        t.connectors.push_back({k, x, k > 0 ? an : -an, bestn});
        t.report.add("parity-k" + num(k), bestd, true,
                     "n=" + num(bestn) + " for connector k=" + num(k));
    }

    auto connector = [&](int k) -> const TubeConnector* {
        for (const auto& c : t.connectors)
            if (c.k == k) return &c;
        return nullptr;
    };

    // rooms: a complete trapezoid needs both its near and far connector; one
    // diagonal piece opens just inside the far one, and the chain estimates
    // bound the opening's room count
    std::set<std::size_t> skip_pos, skip_neg;
    for (int side : {-1, +1}) {
        for (int j = 1;; ++j) {
            const TubeConnector* near = connector(side * j);
            const TubeConnector* far = connector(side * (j + 1));
            if (!near || !far) break;
            int ns = far->n;
            double ystar = t.a[static_cast<std::size_t>(ns - 1)];
            double etastar = t.eta[static_cast<std::size_t>(ns - 2)];
            double lenk = interval_len(side * j);
            double upper = (lenk + ystar) / etastar;
            double mid = 2.0 * ystar / etastar - t.M / (4.0 * t.C);
            double lower = 2.0 * ystar / etastar - 2.0;
            std::string tag = "k" + num(side * j);
            t.report.add("chain-upper-" + tag, upper, upper <= mid + 1e-9,
                         "trapezoid " + tag + ", far n=" + num(ns));
            t.report.add("chain-mid-" + tag, mid, mid <= lower + 1e-9,
                         "trapezoid " + tag + ", far n=" + num(ns));
            t.report.add("chain-lower-" + tag, lower, true, "trapezoid " + tag);
            double A = t.a[static_cast<std::size_t>(ns - 2)];
            double B = ystar;
            double sgn = side;
            t.openings.push_back({Point{A, sgn * A}, Point{B, sgn * B}});
            (side > 0 ? skip_pos : skip_neg).insert(static_cast<std::size_t>(ns - 2));
            (side > 0 ? t.rooms_pos : t.rooms_neg) += 1;
        }
    }

    // drawing
    Forest& f = t.forest;
    VertexPool pool(f);
    double eta0 = t.eta.empty() ? 0.5 : t.eta.front();

    if (opt.include_base_edge) f.add_edge(pool.get(Point{0.0, -1.0}), pool.get(Point{0.0, 1.0}));

    auto base_scale = [&](int k) {
        const auto& v = k > 0 ? opt.base_scale_pos : opt.base_scale_neg;
        std::size_t idx = static_cast<std::size_t>(std::abs(k) - 1);
        double fallback = interval_len(k) / 2.0;
        if (idx < v.size() && v[idx] > 0) return v[idx];
        return fallback;
    };

    // lid of the base rectangle, graded toward the corner grid
    {
        double s0 = std::min(0.5, npos >= 1 && connector(1) ? base_scale(1) : 0.5);
        emit_polyline(f, pool, Point{0.0, 1.0}, Point{1.0, 1.0},
                      graded_lengths(1.0, s0, eta0, 0.5));
    }

    // floor of the base rectangle; with a feasible k=-1 connector the piece
    // schedule shrinks toward the diagonal and the last stretch before the
    // axis is left out entirely
    {
        const TubeConnector* cm1 = connector(-1);
        if (cm1) {
            double am = std::abs(cm1->y);
            double slope = (am - 1.0) / am;
            double x = 1.0;
            double ell = eta0;
            int prev = pool.get(Point{1.0, -1.0});
            while (true) {
                double nx = x - ell;
                if (nx < 0.5) break;
                int v = pool.get(Point{nx, -1.0});
                f.add_edge(prev, v);
                prev = v;
                x = nx;
                ell = std::min({2.0 * ell, 4.0 * slope * x, 0.5});
            }
        } else {
            double s0 = std::min(0.5, base_scale(-1));
            emit_polyline(f, pool, Point{0.0, -1.0}, Point{1.0, -1.0},
                          graded_lengths(1.0, s0, eta0, 0.5));
        }
    }

    // diagonals, minus the room openings
    for (std::size_t j = 0; j + 1 < t.a.size(); ++j) {
        if (!skip_pos.count(j))
            f.add_edge(pool.get(Point{t.a[j], t.a[j]}), pool.get(Point{t.a[j + 1], t.a[j + 1]}));
        if (!skip_neg.count(j))
            f.add_edge(pool.get(Point{t.a[j], -t.a[j]}),
                       pool.get(Point{t.a[j + 1], -t.a[j + 1]}));
    }

    // cross-sections with an eta gap alternating top/bottom
    for (std::size_t j1 = 1; j1 <= t.eta.size(); ++j1) {
        double aj = t.a[j1 - 1];
        double ej = t.eta[j1 - 1];
        Point lo, hi;
        if (j1 % 2 == 1) {
            lo = Point{aj, -aj};
            hi = Point{aj, aj - ej};
        } else {
            lo = Point{aj, -aj + ej};
            hi = Point{aj, aj};
        }
        t.v_segments.push_back({lo, hi});
        emit_uniform(f, pool, lo, hi, ej);
    }

    // connectors with |k| >= 2 run from the axis to their schedule vertex;
    // k = +/-1 coincide with the rectangle lid and floor
    for (const auto& c : t.connectors) {
        if (std::abs(c.k) < 2) continue;
        Point tip{0.0, c.x};
        double an = t.a[static_cast<std::size_t>(c.n - 1)];
        double sgn = c.k > 0 ? 1.0 : -1.0;
        Point w{an, sgn * an};
        double cap = interval_len(c.k) / 2.0;
        double s1 = c.n >= 2 ? t.eta[static_cast<std::size_t>(c.n - 2)] : eta0;
        emit_polyline(f, pool, tip, w,
                      graded_lengths(std::abs(w - tip), std::min(base_scale(c.k), cap), s1, cap));
    }

    t.report.add("max-degree", f.max_degree(), f.max_degree() <= 3);
    int comps = f.component_count();
    int excess = static_cast<int>(f.vertices.size()) - static_cast<int>(f.edges.size());
    t.report.add("acyclic-components", comps, comps == excess);
    return t;
}

// ---------------------------------------------------------------------------
// Glue

namespace {

struct FitContext {
    Forest* f = nullptr;
    double tol = 1e-9;
};

double samples_diam(const std::vector<Point>& s, std::size_t lo, std::size_t hi) {
    double d = 0;
    for (std::size_t i = lo; i <= hi; ++i)
        for (std::size_t j = i + 1; j <= hi; ++j) d = std::max(d, std::abs(s[i] - s[j]));
    return d;
}

double wrap_ccw(double ang) {
    double twopi = 2.0 * kPi;
    double r = std::fmod(ang, twopi);
    if (r < 0) r += twopi;
    return r;
}

// Fit samples [lo..hi] between existing vertices va, vb as one segment or
// arc; split at the middle sample when neither stays inside the tolerance.
void fit_chain(FitContext& ctx, const std::vector<Point>& s, std::size_t lo, std::size_t hi,
               int va, int vb, int depth) {
    Forest& f = *ctx.f;
    Point pa = f.vertices[static_cast<std::size_t>(va)];
    Point pb = f.vertices[static_cast<std::size_t>(vb)];
    double diam = std::max(samples_diam(s, lo, hi), std::abs(pb - pa));
    double tol = std::max(ctx.tol * diam, 1e-300);

    bool seg_ok = true;
    Point dir = pb - pa;
    double L2 = std::norm(dir);
    for (std::size_t i = lo; i <= hi && seg_ok; ++i) {
        Point rel = s[i] - pa;
        double t = L2 > 0 ? std::clamp((rel.real() * dir.real() + rel.imag() * dir.imag()) / L2,
                                       0.0, 1.0)
                          : 0.0;
        if (std::abs(rel - dir * t) > tol) seg_ok = false;
    }
    if (seg_ok) {
        f.add_edge(va, vb);
        return;
    }

    std::size_t mi = (lo + hi) / 2;
    Point pm = s[mi];
    // circumcenter of (pa, pm, pb)
    double ax = pa.real(), ay = pa.imag();
    double bx = pm.real(), by = pm.imag();
    double cx = pb.real(), cy = pb.imag();
    double d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
    bool arc_ok = std::abs(d) > 1e-30 && depth < 12 && hi - lo >= 2;
    Point cen;
    double rad = 0;
    if (arc_ok) {
        double a2 = ax * ax + ay * ay, b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
        cen = Point{(a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d,
                    (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d};
        rad = std::abs(pa - cen);
        for (std::size_t i = lo; i <= hi && arc_ok; ++i)
            if (std::abs(std::abs(s[i] - cen) - rad) > tol) arc_ok = false;
    }
    if (arc_ok) {
        double ang_a = std::arg(pa - cen);
        double sweep_b = wrap_ccw(std::arg(pb - cen) - ang_a);
        double sweep_m = wrap_ccw(std::arg(pm - cen) - ang_a);
        double extent = (sweep_m <= sweep_b) ? sweep_b : sweep_b - 2.0 * kPi;
        if (extent != 0.0) {
            f.add_arc(va, vb, cen, extent);
            return;
        }
    }
    if (depth >= 12 || hi - lo < 2) {
        f.add_edge(va, vb);  // give up at sample resolution
        return;
    }
    int vm = f.add_vertex(pm);
    fit_chain(ctx, s, lo, mi, va, vm, depth + 1);
    fit_chain(ctx, s, mi, hi, vm, vb, depth + 1);
}

}  // namespace

GlueResult glue(const Forest& outer, int face, const Forest& inner, const MapSpec& tau,
                const GlueOptions& opt) {
    GlueResult res;
    res.report.kind = "glue";
    const std::string fw = "face " + num(face);
    const std::size_t NS = 17;

    auto pull = [&](Point w) { return map_eval(tau, w, true); };
    auto on_boundary = [&](Point w) {
        double defect = opt.model_is_disk ? 1.0 - std::abs(w) : w.real();
        return std::abs(defect) <= opt.land_tol * (1.0 + std::abs(w));
    };
    auto density = [&](Point w) {
        if (opt.model_is_disk) {
            double d = std::max(1.0 - std::norm(w), 1e-300);
            return 2.0 / d;
        }
        return 1.0 / std::max(w.real(), 1e-300);
    };

    const std::size_t nv = inner.vertices.size();
    std::vector<char> bnd(nv, 0);
    std::vector<int> land(nv, -1);
    auto odeg = outer.degrees();
    bool all_ok = true;

    for (std::size_t i = 0; i < nv; ++i) {
        Point w = inner.vertices[i];
        if (!on_boundary(w)) continue;
        bnd[i] = 1;
        Point z = pull(w);
        int best = -1;
        double bd = 0;
        for (std::size_t u = 0; u < outer.vertices.size(); ++u) {
            double d = std::abs(z - outer.vertices[u]);
            if (best < 0 || d < bd) {
                bd = d;
                best = static_cast<int>(u);
            }
        }
        if (best < 0 || bd > opt.land_tol * (1.0 + std::abs(z))) {
            res.report.add("landing-" + num(static_cast<int>(i)), bd, false,
                           fw + ": no boundary landing near mapped vertex");
            all_ok = false;
            continue;
        }
        land[i] = best;
    }

    // landing degree budget: each inner edge at a landed vertex adds one
    std::map<int, int> extra;
    for (const auto& e : inner.edges) {
        for (int v : {e.a, e.b})
            if (bnd[static_cast<std::size_t>(v)] && land[static_cast<std::size_t>(v)] >= 0)
                extra[land[static_cast<std::size_t>(v)]] += 1;
    }
    for (const auto& [u, add] : extra)
        if (odeg[static_cast<std::size_t>(u)] + add > 3) {
            res.report.add("landing-degree-" + num(u),
                           odeg[static_cast<std::size_t>(u)] + add, false,
                           fw + ": landing would push vertex " + num(u) + " past degree 3");
            all_ok = false;
        }

    // outer-edge sample cloud per vertex for the diameter sandwich
    std::vector<std::vector<Point>> around(outer.vertices.size());
    for (std::size_t e = 0; e < outer.edges.size(); ++e) {
        EdgeGeo g = outer.geo(static_cast<int>(e));
        std::vector<Point> pts;
        for (int s = 0; s <= 4; ++s) pts.push_back(g.at(s / 4.0));
        for (int v : {outer.edges[e].a, outer.edges[e].b}) {
            auto& bag = around[static_cast<std::size_t>(v)];
            bag.insert(bag.end(), pts.begin(), pts.end());
        }
    }

    std::vector<std::vector<Point>> plane(inner.edges.size());
    double worst_sandwich = 1.0, worst_hyp = 0.0;
    int n_land = 0, n_internal = 0;
    for (std::size_t e = 0; e < inner.edges.size(); ++e) {
        EdgeGeo g = inner.geo(static_cast<int>(e));
        std::vector<Point>& ps = plane[e];
        ps.resize(NS);
        for (std::size_t s = 0; s < NS; ++s)
            ps[s] = pull(g.at(static_cast<double>(s) / (NS - 1)));

        int ea = inner.edges[e].a, eb = inner.edges[e].b;
        bool landing = bnd[static_cast<std::size_t>(ea)] || bnd[static_cast<std::size_t>(eb)];
        if (landing) {
            ++n_land;
            double dimg = samples_diam(ps, 0, NS - 1);
            for (int v : {ea, eb}) {
                if (!bnd[static_cast<std::size_t>(v)]) continue;
                int u = land[static_cast<std::size_t>(v)];
                if (u < 0) continue;
                const auto& bag = around[static_cast<std::size_t>(u)];
                double dout = 0;
                for (std::size_t i = 0; i < bag.size(); ++i)
                    for (std::size_t j = i + 1; j < bag.size(); ++j)
                        dout = std::max(dout, std::abs(bag[i] - bag[j]));
                if (dout <= 0) continue;
                double ratio = dimg / dout;
                worst_sandwich = std::max(worst_sandwich,
                                          std::max(ratio, 1.0 / std::max(ratio, 1e-300)));
                if (ratio < 1.0 / opt.diameter_ratio || ratio > opt.diameter_ratio) {
                    res.report.add("sandwich-" + num(static_cast<int>(e)), ratio, false,
                                   fw + ": landing edge diameter out of range at vertex " +
                                       num(u));
                    all_ok = false;
                }
            }
        } else {
            ++n_internal;
            double hyp = 0;
            for (std::size_t s = 0; s + 1 < NS; ++s) {
                Point wa = g.at(static_cast<double>(s) / (NS - 1));
                Point wb = g.at(static_cast<double>(s + 1) / (NS - 1));
                hyp += std::abs(wb - wa) * density((wa + wb) / 2.0);
            }
            worst_hyp = std::max(worst_hyp, hyp);
            if (hyp > opt.hyperbolic_bound) {
                res.report.add("internal-" + num(static_cast<int>(e)), hyp, false,
                               fw + ": internal edge too long hyperbolically");
                all_ok = false;
            }
        }
    }

    res.report.add("landing-edges", n_land, true);
    res.report.add("internal-edges", n_internal, true);
    res.report.add("sandwich-max", worst_sandwich, worst_sandwich <= opt.diameter_ratio);
    res.report.add("hyperbolic-max", worst_hyp, worst_hyp <= opt.hyperbolic_bound);

    if (!all_ok || !res.report.pass) {
        res.forest = outer;  // reject: leave the plane untouched
        res.report.pass = false;
        return res;
    }

    res.forest = outer;
    std::vector<int> vid(nv, -1);
    for (std::size_t i = 0; i < nv; ++i)
        vid[i] = bnd[i] ? land[i] : res.forest.add_vertex(pull(inner.vertices[i]));

    FitContext ctx{&res.forest, opt.hausdorff_rel_tol};
    for (std::size_t e = 0; e < inner.edges.size(); ++e)
        fit_chain(ctx, plane[e], 0, NS - 1, vid[static_cast<std::size_t>(inner.edges[e].a)],
                  vid[static_cast<std::size_t>(inner.edges[e].b)], 0);
    return res;
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

Report tau_floor_cert() {
    Report r;
    r.kind = "face-certificate";
    r.add("tau-floor", kPi, true, "normalized so the reference boundary length is pi");
    return r;
}

// growth certificate with honest per-interval separating moduli from the
// one-dimensional quadrature, so no grid solves are needed
Report growth_cert(double k_end, const std::function<double(int)>& endpoint, int count) {
    std::vector<Interval> J;
    std::vector<double> M;
    for (int j = 1; j <= count; ++j) {
        Interval iv{endpoint(j), endpoint(j + 1)};
        J.push_back(iv);
        M.push_back(ray_interval_separating_sc(k_end, iv));
    }
    TubeGrowthOptions o;
    o.supplied_per_interval = M;
    Report sub = tube_growth_check(k_end, J, o);
    Report cert = tau_floor_cert();
    for (const auto& it : sub.items) cert.add(it.name, it.value, it.pass, it.witness);
    for (const auto& s : sub.notes) cert.note(s);
    if (!sub.pass) cert.pass = false;
    return cert;
}

Report copy_cert(const Report& proto, const std::string& note) {
    Report r = proto;
    r.note(note);
    return r;
}

// window giving every in-range connector a feasible schedule index plus a
// margin of four grid steps
double tube_default_window(const BoundaryPartition& q_u, double C) {
    double M = 8.0 * std::max(1.0, C);
    BoundaryPartition sym = symmetric_partition(q_u, M);
    std::vector<double> a{1.0};
    for (const auto& iv : sym.intervals) {
        double hi = iv.b.imag();
        if (hi > 1.0) a.push_back(hi);
    }
    std::vector<double> qc;
    qc.push_back(q_u.intervals.front().a.imag());
    for (const auto& iv : q_u.intervals) qc.push_back(iv.b.imag());
    std::size_t i0 = 0;
    while (!(qc[i0] == -1.0 && qc[i0 + 1] == 1.0)) ++i0;

    double window = a.size() >= 2 ? a[1] : 1.0;
    auto consider = [&](double x, bool want_odd) {
        int bestn = -1;
        double bestd = 0;
        for (int nidx = 1; nidx <= static_cast<int>(a.size()); ++nidx) {
            if ((nidx % 2 == 1) != want_odd) continue;
            double d = std::abs(a[static_cast<std::size_t>(nidx - 1)] - x);
            if (bestn < 0 || d < bestd) {
                bestd = d;
                bestn = nidx;
            }
        }
        if (bestn < 0) return;
        std::size_t gi = bestn >= 2 ? static_cast<std::size_t>(bestn - 2) : 0;
        double eta = a.size() >= 2 ? a[gi + 1] - a[gi] : 0.0;
        window = std::max(window, std::max(a[static_cast<std::size_t>(bestn - 1)], x) + 4 * eta);
    };
    for (int k = 2; static_cast<std::size_t>(i0) + k + 1 < qc.size(); ++k)
        consider(qc[static_cast<std::size_t>(i0) + k], true);
    for (int k = 2; static_cast<int>(i0) - k >= 0; ++k)
        consider(-qc[static_cast<std::size_t>(static_cast<int>(i0) - k + 1)], false);
    return window;
}

void add_bg_items(Report& rep, const Forest& f, const BGThresholds& th) {
    rep.add("max-degree", f.max_degree(), f.max_degree() <= 3);
    BGReport bg = bounded_geometry_report(f, th);
    std::string w;
    for (const auto& it : bg.details.items)
        if (!it.pass) {
            w = it.name + ": " + it.witness;
            break;
        }
    rep.add("bounded-geometry", bg.adjacent_ratio, bg.pass, w);
}

PipelineResult pipeline_halfplane(const TractDescriptor& tract, double rho, FillMode mode,
                                  const PipelineOptions& opt) {
    PipelineResult res;
    res.report.kind = "pipeline";
    const int n = opt.n_max;

    TauPartition tp = tau_partition(tract, rho, n);
    Forest outer;
    for (const Point& z : tp.vertices) outer.add_vertex(z);
    for (int i = 0; i + 1 < static_cast<int>(tp.vertices.size()); ++i) outer.add_edge(i, i + 1);

    // u = (rho - tau(z)) / pi sends the filled side onto the model half-plane
    // with the partition vertices at the integer heights
    Point rot = std::polar(1.0, -tract.pose.angle);
    MapSpec tau_u = MapSpec::mobius(-rot / kPi, (rho + rot * tract.pose.shift) / kPi,
                                    Point{0.0, 0.0}, Point{1.0, 0.0});

    if (mode == FillMode::many) {
        std::vector<double> cuts;
        for (int c = -n; c <= n; ++c) cuts.push_back(static_cast<double>(c));
        BoundaryPartition q_u = line_partition_imaginary(cuts);
        RaysOptions ro;
        ro.window = opt.fill_window;
        ro.include_axis = false;
        Forest fill = rays_forest(q_u, ro);
        GlueResult g = glue(outer, 1, fill, tau_u, GlueOptions{});
        res.forest = g.forest;
        if (!g.report.pass) {
            for (const auto& it : g.report.items)
                if (!it.pass) res.report.add(it.name, it.value, false, it.witness);
        }

        double window = opt.fill_window > 0 ? opt.fill_window : 4.0 * (2.0 * n);
        int blocks = std::max(1, static_cast<int>(std::floor(window + 1e-9)) - 1);
        Report strip =
            growth_cert(-std::cosh(kPi), [](int j) { return std::cosh(j * kPi); }, blocks);
        Report corner =
            growth_cert(-kPi * kPi, [](int j) { return (j * kPi) * (j * kPi); }, blocks);

        PipelineFace tf;
        tf.id = 0;
        tf.is_tract = true;
        tf.surrogate = tract;
        tf.certificate = tau_floor_cert();
        res.faces.push_back(tf);
        int id = 1;
        for (int c = -n; c < n; ++c) {
            PipelineFace pf;
            pf.id = id++;
            pf.surrogate = TractDescriptor::halfstrip(1.0);
            pf.certificate =
                copy_cert(strip, "congruent strip face between heights " + num(c) + " and " +
                                     num(c + 1));
            res.faces.push_back(pf);
        }
        for (int corner_side : {-1, +1}) {
            PipelineFace pf;
            pf.id = id++;
            pf.surrogate = TractDescriptor::sector(kPi / 4.0);
            pf.certificate = copy_cert(corner, corner_side < 0 ? "lower corner face"
                                                               : "upper corner face");
            res.faces.push_back(pf);
        }
    } else {
        std::vector<double> cuts;
        for (int c = -n; c <= n; ++c)
            if (c != 0) cuts.push_back(static_cast<double>(c));
        BoundaryPartition q_u = line_partition_imaginary(cuts);
        double C = partition_bg_constant(q_u);
        CentralTubeOptions co;
        co.window = opt.fill_window > 0 ? opt.fill_window : tube_default_window(q_u, C);
        co.include_base_edge = false;
        CentralTube tube = central_tube(q_u, C, co);
        GlueResult g = glue(outer, 1, tube.forest, tau_u, GlueOptions{});
        res.forest = g.forest;
        if (!g.report.pass) {
            for (const auto& it : g.report.items)
                if (!it.pass) res.report.add(it.name, it.value, false, it.witness);
        }

        PipelineFace tf;
        tf.id = 0;
        tf.is_tract = true;
        tf.surrogate = tract;
        tf.certificate = tau_floor_cert();
        res.faces.push_back(tf);

        PipelineFace pf;
        pf.id = 1;
        pf.surrogate = TractDescriptor::halfplane();
        pf.certificate = tau_floor_cert();
        for (const auto& it : tube.report.items)
            pf.certificate.add(it.name, it.value, it.pass, it.witness);
        for (const auto& s : tube.report.notes) pf.certificate.note(s);
        if (!tube.report.pass) pf.certificate.pass = false;
        res.faces.push_back(pf);
    }

    res.face_count = static_cast<int>(res.faces.size());
    res.report.add("face-count", res.face_count, true);
    add_bg_items(res.report, res.forest, opt.thresholds);
    for (const auto& fc : res.faces)
        res.report.add("face-" + num(fc.id) + "-certified", fc.id, fc.certificate.pass);
    return res;
}

PipelineResult pipeline_two_strips(const TractDescriptor& t0, const TractDescriptor& t1,
                                   double rho, const PipelineOptions& opt) {
    if (std::abs(t0.width - t1.width) > 1e-12 * std::max(1.0, t0.width))
        throw std::invalid_argument("pipeline: no atlas for unequal strip widths");
    Point d0 = std::polar(1.0, t0.pose.angle);
    Point d1 = std::polar(1.0, t1.pose.angle);
    if (std::abs(d0 + d1) > 1e-9)
        throw std::invalid_argument("pipeline: no atlas unless the strips face each other");
    Point gapv = t1.pose.shift - t0.pose.shift;
    double along = (gapv * std::conj(d1)).real();
    double across = (gapv * std::conj(d1)).imag();
    if (std::abs(across) > 1e-9 || std::abs(along) <= 0)
        throw std::invalid_argument("pipeline: no atlas for offset strip axes");
    double gap = std::abs(along);
    double eps = gap / t0.width;
    if (eps < opt.min_separation)
        throw std::invalid_argument("pipeline: mouth separation below the minimum");

    // R opens along +along from its shift; its tau-partition vertex 1 anchors
    // the model frame
    const TractDescriptor& tr = along > 0 ? t1 : t0;
    const TractDescriptor& tl = along > 0 ? t0 : t1;
    TauPartition tpr = tau_partition(tr, rho, opt.n_max);
    TauPartition tpl = tau_partition(tl, rho, opt.n_max);

    PipelineResult res;
    res.report.kind = "pipeline";
    Forest& f = res.forest;
    std::map<std::pair<int, int>, int> gid;  // (side, tau index) -> vertex id
    for (int m = -opt.n_max; m <= opt.n_max; ++m) {
        gid[{0, m}] = f.add_vertex(tpr.vertex(m));
        gid[{1, m}] = f.add_vertex(tpl.vertex(m));
    }
    for (int s : {0, 1})
        for (int m = -opt.n_max; m < opt.n_max; ++m) f.add_edge(gid[{s, m}], gid[{s, m + 1}]);
    f.add_edge(gid[{0, 0}], gid[{1, 0}]);  // bridge between the level curves

    // the upper arm of L is whichever of its tau indices sits near R's
    int orient = std::abs(tpl.vertex(-1) - tpr.vertex(1)) <
                         std::abs(tpl.vertex(1) - tpr.vertex(1))
                     ? -1
                     : 1;
    Point zr1 = tpr.vertex(1);
    Point zl1 = tpl.vertex(orient);
    Point p = (zr1 + zl1) / 2.0;
    Point qdir = zr1 - p;
    auto to_u = [&](Point z) { return Point{0.0, -1.0} * ((z - p) / qdir); };
    auto from_u = [&](Point u) { return p + qdir * (Point{0.0, 1.0} * u); };

    // cut heights: geometric blocks of tau indices, one literal per sign so
    // the middle is exactly normalized
    std::vector<int> blocks{1};
    while (blocks.back() * 6 <= opt.n_max) blocks.push_back(blocks.back() * 6);
    if (blocks.size() < 2)
        throw std::invalid_argument("pipeline: no atlas for so short a strip window");
    std::vector<double> heights{1.0};
    for (std::size_t b = 1; b < blocks.size(); ++b)
        heights.push_back(std::abs(to_u(tpr.vertex(blocks[b])).imag()));
    std::vector<double> cuts;
    for (std::size_t b = heights.size(); b-- > 0;) cuts.push_back(-heights[b]);
    for (double h : heights) cuts.push_back(h);
    BoundaryPartition q_u = line_partition_imaginary(cuts);

    double C = partition_bg_constant(q_u);
    CentralTubeOptions co;
    co.include_base_edge = false;
    co.window = opt.fill_window > 0 ? opt.fill_window : tube_default_window(q_u, C);
    for (std::size_t b = 0; b + 1 < blocks.size(); ++b) {
        int nk = blocks[b];
        co.base_scale_pos.push_back(
            std::abs(to_u(tpl.vertex(orient * (nk + 1))) - to_u(tpl.vertex(orient * nk))));
        co.base_scale_neg.push_back(std::abs(to_u(tpr.vertex(nk + 1)) - to_u(tpr.vertex(nk))));
    }
    CentralTube tube = central_tube(q_u, C, co);

    // direct assembly: boundary vertices take the true curve ids, and each
    // connector's first stretch is re-anchored so its pieces keep running
    // outward from the landing vertex
    std::map<int, int> tube_vid;
    auto land_id = [&](double h) -> int {
        for (std::size_t b = 0; b < heights.size(); ++b) {
            if (std::abs(h - heights[b]) < 1e-9) return gid[{1, orient * blocks[b]}];
            if (std::abs(h + heights[b]) < 1e-9) return gid[{0, blocks[b]}];
        }
        return -1;
    };
    for (std::size_t i = 0; i < tube.forest.vertices.size(); ++i) {
        Point u = tube.forest.vertices[i];
        if (u.real() == 0.0) {
            int id = land_id(u.imag());
            if (id >= 0) {
                tube_vid[static_cast<int>(i)] = id;
                continue;
            }
        }
    }
    for (const auto& c : tube.connectors) {
        if (std::abs(c.k) < 2) continue;
        Point tip{0.0, c.x};
        double an = tube.a[static_cast<std::size_t>(c.n - 1)];
        Point w{an, c.k > 0 ? an : -an};
        int lid = land_id(c.x);
        if (lid < 0) continue;
        Point ut = to_u(f.vertices[static_cast<std::size_t>(lid)]);
        double thresh =
            ut.real() + (c.k > 0 ? co.base_scale_pos : co.base_scale_neg)[std::abs(c.k) - 1];
        Point dir = (w - tip) / std::abs(w - tip);
        for (std::size_t i = 0; i < tube.forest.vertices.size(); ++i) {
            Point u = tube.forest.vertices[i];
            if (u.real() <= 0.0 || u.real() >= thresh) continue;
            Point rel = u - tip;
            double off = std::abs(rel - dir * (rel.real() * dir.real() + rel.imag() * dir.imag()));
            if (off < 1e-9) tube_vid[static_cast<int>(i)] = lid;
        }
    }
    for (std::size_t i = 0; i < tube.forest.vertices.size(); ++i)
        if (!tube_vid.count(static_cast<int>(i)))
            tube_vid[static_cast<int>(i)] = f.add_vertex(from_u(tube.forest.vertices[i]));
    for (const auto& e : tube.forest.edges) {
        int a = tube_vid[e.a], b = tube_vid[e.b];
        if (a != b) f.add_edge(a, b);
    }

    for (int i : {0, 1}) {
        PipelineFace tf;
        tf.id = i;
        tf.is_tract = true;
        tf.surrogate = i == 0 ? t0 : t1;
        tf.certificate = tau_floor_cert();
        res.faces.push_back(tf);
    }
    PipelineFace mid;
    mid.id = 2;
    mid.surrogate = TractDescriptor::halfplane();
    mid.certificate = tau_floor_cert();
    for (const auto& it : tube.report.items)
        mid.certificate.add(it.name, it.value, it.pass, it.witness);
    for (const auto& s : tube.report.notes) mid.certificate.note(s);
    if (!tube.report.pass) mid.certificate.pass = false;
    res.faces.push_back(mid);

    PipelineFace out;
    out.id = 3;
    out.surrogate = TractDescriptor::halfplane();
    double lo = kPi * blocks[blocks.size() - 2], hi = kPi * blocks.back();
    out.certificate = growth_cert(
        kPi, [&](int j) { return j == 1 ? lo : hi; }, 1);
    res.faces.push_back(out);

    res.face_count = static_cast<int>(res.faces.size());
    res.report.add("face-count", res.face_count, true);
    res.report.add("separation", eps, eps >= opt.min_separation);
    add_bg_items(res.report, res.forest, opt.thresholds);
    for (const auto& fc : res.faces)
        res.report.add("face-" + num(fc.id) + "-certified", fc.id, fc.certificate.pass);
    return res;
}

}  // namespace

PipelineResult pipeline(const std::vector<TractDescriptor>& model, double rho, FillMode mode,
                        const PipelineOptions& opt) {
    if (model.size() == 1 && model[0].kind == TractDescriptor::Kind::halfplane)
        return pipeline_halfplane(model[0], rho, mode, opt);
    if (model.size() == 2 && model[0].kind == TractDescriptor::Kind::halfstrip &&
        model[1].kind == TractDescriptor::Kind::halfstrip)
        return pipeline_two_strips(model[0], model[1], rho, opt);
    throw std::invalid_argument("pipeline: no atlas for this model's complement faces");
}

// ---------------------------------------------------------------------------
// Lattice companions

TwoExtraResult twoextra(LatticeVariant variant, int window) {
    if (window < 2) throw std::invalid_argument("twoextra: window too small");

    TwoExtraResult res;
    res.report.kind = "twoextra";
    Forest& f = res.forest;
    VertexPool pool(f);

    auto ray = [&](double y) {
        for (int x = 0; x < window; ++x)
            f.add_edge(pool.get(Point{static_cast<double>(x), y}),
                       pool.get(Point{static_cast<double>(x + 1), y}));
    };
    auto mouth = [&](int ylo, int yhi) {
        for (int y = ylo; y < yhi; ++y)
            f.add_edge(pool.get(Point{0.0, static_cast<double>(y)}),
                       pool.get(Point{0.0, static_cast<double>(y + 1)}));
    };

    int strips = 0;
    std::vector<std::pair<int, int>> walls;  // wall y-levels bounding each strip
    if (variant == LatticeVariant::two) {
        ray(1.0);
        ray(-1.0);
        mouth(-1, 1);
        strips = 1;
        walls = {{-1, 1}};
    } else if (variant == LatticeVariant::three) {
        ray(-1.0);
        ray(1.0);
        ray(3.0);
        mouth(-1, 3);
        strips = 2;
        walls = {{-1, 1}, {1, 3}};
    } else {
        int top = window + 1;
        for (int y = -top; y <= top; y += 2) ray(static_cast<double>(y));
        mouth(-top, top);
        for (int y = -top; y < top; y += 2) walls.push_back({y, y + 2});
        strips = static_cast<int>(walls.size());
    }
    res.tract_count = strips + 1;

    // every half-strip companion is congruent: one growth certificate serves
    // them all, with per-interval moduli along the wall blocks
    Report strip_cert = growth_cert(
        -std::cosh(kPi / 2.0), [](int j) { return std::cosh(j * kPi / 2.0); },
        std::max(1, window - 1));
    for (int t = 0; t < strips; ++t) {
        Report c = t == 0 ? strip_cert
                          : copy_cert(strip_cert, "congruent to the first companion strip");
        res.report.add("tract-" + num(t) + "-certificate", t, c.pass,
                       "strip between y=" + num(walls[static_cast<std::size_t>(t)].first) +
                           " and y=" + num(walls[static_cast<std::size_t>(t)].second));
        if (!c.pass) res.report.pass = false;
    }

    // surrounding tract: wall blocks certified against the mouth inside a
    // boxed window with the strips notched out
    {
        int ybot = walls.front().first, ytop = walls.back().second;
        int R = std::max(6, std::max(std::abs(ybot), std::abs(ytop)) + 3);
        FaceSpec spec;
        auto P = [&](double x, double y) { spec.polygon.push_back(Point{x, y}); };
        P(-R, -R);
        P(R, -R);
        P(R, ybot);
        int lower_blocks_from = static_cast<int>(spec.polygon.size()) - 1;
        for (int x = R - 1; x >= 0; --x) P(x, ybot);
        int mouth_from = static_cast<int>(spec.polygon.size()) - 1;
        for (int y = ybot + 1; y <= ytop; ++y) P(0, y);
        for (int x = 1; x <= R; ++x) P(x, ytop);
        P(R, R);
        P(-R, R);
        spec.base = {static_cast<int>(spec.polygon.size()) - 1, 0};
        spec.h = 0.25;
        int span = ytop - ybot;
        int ref_lo = mouth_from, ref_hi = mouth_from + span;
        if (variant == LatticeVariant::infinite) {
            // a tall mouth hugs the box corners; its middle block already
            // dominates every wall block
            ref_lo = mouth_from + span / 2 - 1;
            ref_hi = mouth_from + span / 2 + 1;
        }
        spec.sides.push_back({ref_lo, ref_hi, {}, {}});
        spec.reference = 0;
        spec.sides.push_back({lower_blocks_from + R - 2, lower_blocks_from + R - 1, {}, {}});
        spec.sides.push_back({mouth_from + span + 1, mouth_from + span + 2, {}, {}});
        spec.sides.push_back({lower_blocks_from + R - 4, lower_blocks_from + R - 3, {}, {}});
        Report wall = tau_length_lower_bound(spec);
        res.report.add("tract-" + num(strips) + "-certificate", strips, wall.pass,
                       "surrounding tract wall blocks against the mouth");
        for (const auto& s : wall.notes) res.report.note(s);
        if (!wall.pass) res.report.pass = false;
    }

    add_bg_items(res.report, f, BGThresholds{});
    res.report.add("tract-count", res.tract_count, true);
    return res;
}

}  // namespace tractforge
