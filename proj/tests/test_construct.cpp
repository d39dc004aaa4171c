#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tractforge/construct.hpp"
#include "support.hpp"

using namespace tractforge;
using namespace tfsupport;

namespace {

constexpr double pi = std::numbers::pi;

bool throws_with(const std::function<void()>& fn, const std::string& needle) {
    try {
        fn();
    } catch (const std::exception& e) {
        return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
}

bool same_pair(const ArcEdge& e, int u, int v) {
    return (e.a == u && e.b == v) || (e.a == v && e.b == u);
}

int find_vertex(const Forest& f, Point p, double tol = 1e-9) {
    for (int i = 0; i < (int)f.vertices.size(); ++i)
        if (std::abs(f.vertices[i] - p) <= tol) return i;
    return -1;
}

bool has_edge_between(const Forest& f, Point p, Point q, double tol = 1e-9) {
    int u = find_vertex(f, p, tol), v = find_vertex(f, q, tol);
    if (u < 0 || v < 0) return false;
    for (const auto& e : f.edges)
        if (same_pair(e, u, v)) return true;
    return false;
}

BoundaryPartition circle_partition(const std::vector<double>& angles) {
    BoundaryPartition p;
    p.carrier = BoundaryPartition::Carrier::circle;
    for (std::size_t i = 0; i + 1 < angles.size(); ++i) {
        PartitionInterval iv;
        iv.a = std::polar(1.0, angles[i]);
        iv.b = std::polar(1.0, angles[i + 1]);
        iv.length = angles[i + 1] - angles[i];
        iv.diam = std::abs(iv.b - iv.a);
        p.intervals.push_back(iv);
    }
    return p;
}

BoundaryPartition uniform_arc_partition(double lo, double hi, int n) {
    std::vector<double> angs;
    for (int i = 0; i <= n; ++i) angs.push_back(lo + (hi - lo) * i / n);
    return circle_partition(angs);
}

}  // namespace

// ---------------------------------------------------------------------------
// Whitney scaffold

TEST_CASE("whitney graph: counts, radii, wiring") {
    CHECK(WhitneyGraph::sectors(1) == 8);
    CHECK(WhitneyGraph::sectors(3) == 32);
    CHECK(WhitneyGraph::radius(1) == doctest::Approx(0.25));
    CHECK(WhitneyGraph::radius(2) == doctest::Approx(0.5));
    CHECK(WhitneyGraph::radius(3) == doctest::Approx(0.75));
    CHECK(WhitneyGraph::radius(4) == doctest::Approx(0.875));

    WhitneyGraph g1 = whitney_graph(1);
    CHECK(g1.boxes.size() == 8);
    CHECK(g1.forest.vertices.size() == 24);
    CHECK(g1.forest.edges.size() == 32);

    WhitneyGraph g2 = whitney_graph(2);
    CHECK(g2.boxes.size() == 24);
    CHECK(g2.forest.vertices.size() == 56);
    CHECK(g2.forest.edges.size() == 80);

    WhitneyGraph g3 = whitney_graph(3);
    const WhitneyBox& b = g3.box_at(3, 5);
    CHECK(b.generation == 3);
    CHECK(b.sector == 5);
    CHECK(b.r_in == doctest::Approx(0.75));
    CHECK(b.r_out == doctest::Approx(0.875));
    CHECK(b.dtheta == doctest::Approx(2 * pi / 32));
    CHECK(b.theta0 == doctest::Approx(5 * 2 * pi / 32));

    // corners: inner circle 3 vertices 5,6; outer circle 4 vertices 10..12
    const Forest& f = g3.forest;
    CHECK(same_pair(f.edges[b.top], g3.vertex_id(3, 5), g3.vertex_id(3, 6)));
    CHECK(same_pair(f.edges[b.side_cw], g3.vertex_id(3, 5), g3.vertex_id(4, 10)));
    CHECK(same_pair(f.edges[b.side_ccw], g3.vertex_id(3, 6), g3.vertex_id(4, 12)));
    CHECK(same_pair(f.edges[b.bottom_left], g3.vertex_id(4, 10), g3.vertex_id(4, 11)));
    CHECK(same_pair(f.edges[b.bottom_right], g3.vertex_id(4, 11), g3.vertex_id(4, 12)));
    CHECK(f.edges[b.top].kind == ArcEdge::Kind::arc);
    CHECK(f.edges[b.side_cw].kind == ArcEdge::Kind::segment);

    Point p = f.vertices[g3.vertex_id(3, 5)];
    CHECK(std::abs(p - 0.75 * std::polar(1.0, 2 * pi * 5 / 32)) < 1e-12);

    EdgeGeo top = f.geo(b.top);
    CHECK(top.is_arc);
    CHECK(top.radius == doctest::Approx(0.75));
    CHECK(top.extent == doctest::Approx(2 * pi / 32));

    CHECK(forests_identical(whitney_graph(3).forest, g3.forest));
}

TEST_CASE("route path: radial and mixed walks") {
    WhitneyGraph g = whitney_graph(3);

    auto p0 = route_path(g, 0.0);
    REQUIRE(p0.size() == 3);
    for (int e : p0) CHECK(g.forest.edges[e].kind == ArcEdge::Kind::segment);
    EdgeGeo last = g.forest.geo(p0.back());
    double rend = std::min(std::abs(last.p0), std::abs(last.p1));
    CHECK(rend == doctest::Approx(0.25));

    auto p1 = route_path(g, 2 * pi / 32);
    int arcs_r075 = 0, arcs = 0, segs = 0;
    for (int e : p1) {
        EdgeGeo ge = g.forest.geo(e);
        if (ge.is_arc) {
            ++arcs;
            if (ge.radius == doctest::Approx(0.75)) ++arcs_r075;
        } else {
            ++segs;
        }
    }
    CHECK(arcs_r075 == 1);
    CHECK(arcs == 2);
    CHECK(segs == 3);
}

TEST_CASE("route path: never uses a bottom-left arc") {
    WhitneyGraph g = whitney_graph(8);
    std::set<int> bl;
    for (const auto& b : g.boxes) bl.insert(b.bottom_left);
    int n = g.circle_vertices(9);
    REQUIRE(n == 2048);
    for (int j = 0; j < n; ++j) {
        double theta = 2 * pi * j / n;
        bool ok = true;
        for (int e : route_path(g, theta)) ok = ok && bl.count(e) == 0;
        CHECK(ok);
    }
}

// ---------------------------------------------------------------------------
// Disk tree

TEST_CASE("disk tree: two antipodal marked points") {
    DiskTreeInput in;
    in.marked = {0.0, pi};
    in.arcs.push_back({uniform_arc_partition(0.0, pi, 4), {}});
    in.arcs.push_back({uniform_arc_partition(pi, 2 * pi, 4), {}});
    Forest f = build_disk_tree(in);

    CHECK(f.vertices.size() == 12);
    CHECK(f.edges.size() == 11);
    CHECK(validate_forest(f).pass);
    CHECK(f.component_count() == 1);

    CHECK(find_vertex(f, {0.0, 1.0}) >= 0);
    CHECK(has_edge_between(f, {0.0, 1.0}, {0.0, 0.5}));
    CHECK(find_vertex(f, {0.0, -1.0}) >= 0);
    CHECK(has_edge_between(f, {0.0, -1.0}, {0.0, -0.5}));

    Flood res = flood_complement(
        f, Bbox{-1.05, -1.05, 1.05, 1.05}, 0.01,
        [](Point z) { return std::abs(z) <= 0.998; },
        {Point{0.97, 0.0}, Point{-0.97, 0.0}});
    CHECK(res.components == 2);
    REQUIRE(res.probe_labels.size() == 2);
    CHECK(res.probe_labels[0] >= 0);
    CHECK(res.probe_labels[1] >= 0);
    CHECK(res.probe_labels[0] != res.probe_labels[1]);

    CHECK(forests_identical(build_disk_tree(in), f));
}

TEST_CASE("disk tree: single marked point with truncation radius 2^-5") {
    double r = std::ldexp(1.0, -5);
    DiskTreeInput in;
    in.marked = {0.0};
    in.arcs.push_back({circle_partition({0.0, 1.0, 2.0, pi - r, pi, pi + r, 4.5, 5.5, 2 * pi}), {}});
    Forest f = build_disk_tree(in);

    CHECK(f.vertices.size() == 15);
    CHECK(f.edges.size() == 14);
    CHECK(validate_forest(f).pass);

    int v = find_vertex(f, {-1.0, 0.0});
    REQUIRE(v >= 0);
    CHECK(f.degrees()[v] == 1);
    int w = find_vertex(f, {-(1.0 - std::ldexp(1.0, -6)), 0.0});
    REQUIRE(w >= 0);
    double d = std::abs(f.vertices[v] - f.vertices[w]);
    CHECK(d >= r / 2 - 1e-12);
    CHECK(d <= r + 1e-12);
    CHECK(has_edge_between(f, {-1.0, 0.0}, {-0.984375, 0.0}));

    Flood res = flood_complement(
        f, Bbox{-1.05, -1.05, 1.05, 1.05}, 0.004,
        [](Point z) { return std::abs(z) <= 0.999; }, {Point{0.99, 0.01}});
    CHECK(res.components == 1);
    CHECK(res.probe_labels[0] >= 0);
}

TEST_CASE("disk tree: five marked points") {
    std::vector<double> marked{0.3, 1.4, 2.8, 4.0, 5.2};
    DiskTreeInput in;
    in.marked = marked;
    for (std::size_t j = 0; j < marked.size(); ++j) {
        double lo = marked[j];
        double hi = j + 1 < marked.size() ? marked[j + 1] : marked[0] + 2 * pi;
        in.arcs.push_back({uniform_arc_partition(lo, hi, 6), {}});
    }
    Forest f = build_disk_tree(in);
    CHECK(validate_forest(f).pass);
    CHECK(f.component_count() == 1);

    auto deg = f.degrees();
    int tips = 0;
    for (int i = 0; i < (int)f.vertices.size(); ++i) {
        if (std::abs(std::abs(f.vertices[i]) - 1.0) < 1e-12) {
            CHECK(deg[i] == 1);
            ++tips;
        }
    }
    CHECK(tips == 5);

    std::vector<Point> probes;
    for (double t : marked) probes.push_back(0.96 * std::polar(1.0, t));
    Flood res = flood_complement(
        f, Bbox{-1.05, -1.05, 1.05, 1.05}, 0.008,
        [](Point z) { return std::abs(z) <= 0.9975; }, probes);
    CHECK(res.components == 5);
    std::set<int> labels(res.probe_labels.begin(), res.probe_labels.end());
    CHECK(labels.size() == 5);
    CHECK(*labels.begin() >= 0);
}

TEST_CASE("disk tree: input validation") {
    DiskTreeInput missing;
    missing.marked = {0.0, pi};
    missing.arcs.push_back({uniform_arc_partition(0.0, pi, 4), {}});
    CHECK(throws_with([&] { build_disk_tree(missing); }, "partition"));

    DiskTreeInput badc;
    badc.marked = {0.0, pi};
    badc.arcs.push_back({uniform_arc_partition(0.0, pi, 4), 0.3});
    badc.arcs.push_back({uniform_arc_partition(pi, 2 * pi, 4), {}});
    CHECK(throws_with([&] { build_disk_tree(badc); }, "center"));

    double r = std::ldexp(1.0, -5);
    DiskTreeInput shallow;
    shallow.marked = {0.0};
    shallow.arcs.push_back(
        {circle_partition({0.0, 1.0, 2.0, pi - r, pi, pi + r, 4.5, 5.5, 2 * pi}), {}});
    shallow.depth = 3;
    CHECK(throws_with([&] { build_disk_tree(shallow); }, "depth"));
}

// ---------------------------------------------------------------------------
// Dyadic sweep

namespace {

void check_sweep_invariants(const std::vector<double>& cuts, double M, const DyadicCover& c) {
    REQUIRE(!c.pieces.empty());
    CHECK(c.pieces.front().lo == doctest::Approx(cuts.front()));
    CHECK(c.pieces.back().hi >= cuts.back() - 1e-12);
    CHECK(c.pieces.back().hi - cuts.back() < c.pieces.back().length() + 1e-12);
    for (std::size_t i = 0; i < c.pieces.size(); ++i) {
        const auto& p = c.pieces[i];
        CHECK(p.hi > p.lo);
        CHECK(is_power_of_two(p.length()));
        double q = p.lo / p.length();
        CHECK(std::abs(q - std::round(q)) < 1e-9);
        if (i + 1 < c.pieces.size()) {
            CHECK(c.pieces[i + 1].lo == p.hi);
            CHECK(c.pieces[i + 1].length() <= p.length());
        }
        for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
            double lo = std::max(p.lo, cuts[j]), hi = std::min(p.hi, cuts[j + 1]);
            if (hi - lo > 1e-15) CHECK(p.length() < (cuts[j + 1] - cuts[j]) / (4 * M));
        }
        CHECK(p.source >= 0);
        CHECK(p.source + 2 <= (int)cuts.size());
    }
}

}  // namespace

TEST_CASE("dyadic sweep: re-split at a finer interval") {
    std::vector<double> cuts{1.0, 9.3, 9.8};
    DyadicCover c = dyadic_sweep(cuts, 8.0);
    REQUIRE(c.pieces.size() == 104);
    CHECK(c.pieces[0].lo == 1.0);
    CHECK(c.pieces[0].hi == 1.25);
    CHECK(c.pieces[32].hi == 9.25);
    CHECK(c.pieces[32].source == 0);
    for (int i = 33; i <= 38; ++i) {
        CHECK(c.pieces[i].length() == 0.0078125);
        CHECK(c.pieces[i].source == 0);
    }
    CHECK(c.pieces[38].hi == 9.296875);
    CHECK(c.pieces[39].lo == 9.296875);
    CHECK(c.pieces[39].hi == 9.3046875);
    CHECK(c.pieces[39].source == 1);
    CHECK(c.pieces.back().hi == 9.8046875);
    check_sweep_invariants(cuts, 8.0, c);
}

TEST_CASE("dyadic sweep: clamp at a coarser interval") {
    std::vector<double> cuts{1.0, 1.5, 9.5};
    DyadicCover c = dyadic_sweep(cuts, 8.0);
    REQUIRE(c.pieces.size() == 64 + 1024);
    for (const auto& p : c.pieces) CHECK(p.length() == 0.0078125);
    CHECK(c.pieces.back().hi == 9.5);
    CHECK(c.pieces[63].source == 0);
    CHECK(c.pieces[64].source == 1);
    check_sweep_invariants(cuts, 8.0, c);
}

TEST_CASE("dyadic sweep: randomized invariants and determinism") {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> len(0.3, 3.0);
    for (double M : {2.0, 5.0, 16.0}) {
        for (int rep = 0; rep < 8; ++rep) {
            std::vector<double> cuts{1.0};
            for (int j = 0; j < 8; ++j) cuts.push_back(cuts.back() + len(rng));
            DyadicCover c = dyadic_sweep(cuts, M);
            check_sweep_invariants(cuts, M, c);
            DyadicCover d = dyadic_sweep(cuts, M);
            REQUIRE(c.pieces.size() == d.pieces.size());
            bool same = true;
            for (std::size_t i = 0; i < c.pieces.size(); ++i)
                same = same && c.pieces[i].lo == d.pieces[i].lo &&
                       c.pieces[i].hi == d.pieces[i].hi && c.pieces[i].source == d.pieces[i].source;
            CHECK(same);
        }
    }
}

// ---------------------------------------------------------------------------
// Symmetric partition

TEST_CASE("symmetric partition: uniform cuts") {
    BoundaryPartition q = line_partition_imaginary({-9, -7, -5, -3, -1, 1, 3, 5, 7, 9});
    CHECK(partition_bg_constant(q) == doctest::Approx(1.0));
    BoundaryPartition s = symmetric_partition(q, 8.0);
    REQUIRE(s.intervals.size() == 513);
    CHECK(s.intervals[256].a.imag() == -1.0);
    CHECK(s.intervals[256].b.imag() == 1.0);
    CHECK(s.intervals[257].length == 0.03125);
    CHECK(s.intervals.front().a.imag() == -9.0);
    CHECK(s.intervals.back().b.imag() == 9.0);
    int non_small = 0;
    for (const auto& iv : s.intervals)
        if (iv.length != 0.03125) ++non_small;
    CHECK(non_small == 1);
    CHECK(check_six_conditions(q, s, 8.0) == "");
}

TEST_CASE("symmetric partition: asymmetric cuts merge to the shorter side") {
    BoundaryPartition q = line_partition_imaginary({-5, -1, 1, 3});
    double C = partition_bg_constant(q);
    CHECK(C == doctest::Approx(2.0));
    double M = 8 * C;
    BoundaryPartition s = symmetric_partition(q, M);
    REQUIRE(s.intervals.size() == 257);
    CHECK(s.intervals.front().a.imag() == -3.0);
    CHECK(s.intervals.back().b.imag() == 3.0);
    for (const auto& iv : s.intervals)
        if (!(iv.a.imag() == -1.0 && iv.b.imag() == 1.0)) CHECK(iv.length == 0.015625);
    CHECK(check_six_conditions(q, s, M) == "");
}

TEST_CASE("symmetric partition: truncation keeps the min extent") {
    BoundaryPartition q = line_partition_imaginary({-3, -1, 1, 3, 5});
    BoundaryPartition s = symmetric_partition(q, 8.0);
    REQUIRE(s.intervals.size() == 129);
    CHECK(s.intervals.front().a.imag() == -3.0);
    CHECK(s.intervals.back().b.imag() == 3.0);
    CHECK(check_six_conditions(q, s, 8.0) == "");
}

TEST_CASE("symmetric partition: requires the normalized middle interval") {
    BoundaryPartition q = line_partition_imaginary({-2, -0.5, 0.5, 2});
    CHECK(throws_with([&] { (void)symmetric_partition(q, 8.0); }, "normalized"));
}

TEST_CASE("symmetric partition: randomized six conditions") {
    std::mt19937 rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        BoundaryPartition q = random_normalized_partition(rng, 3, 0.5, 2.5);
        double C = partition_bg_constant(q);
        double M = 8 * C;
        BoundaryPartition s = symmetric_partition(q, M);
        std::string msg = check_six_conditions(q, s, M);
        INFO("rep " << rep << ": " << msg);
        CHECK(msg == "");
    }
}

// ---------------------------------------------------------------------------
// Rays

TEST_CASE("rays: uniform partition, axis included") {
    BoundaryPartition q = line_partition_imaginary({-2, -1, 0, 1, 2});
    RaysOptions opt;
    opt.window = 4.0;
    Forest f = rays_forest(q, opt);
    CHECK(f.vertices.size() == 25);
    CHECK(f.edges.size() == 24);
    CHECK(validate_forest(f).pass);
    CHECK(f.component_count() == 1);
    CHECK(f.max_degree() == 3);
    auto deg = f.degrees();
    CHECK(std::count(deg.begin(), deg.end(), 3) == 3);
    CHECK(find_vertex(f, {4.0, 2.0}) >= 0);

    RaysOptions noaxis = opt;
    noaxis.include_axis = false;
    Forest g = rays_forest(q, noaxis);
    CHECK(g.edges.size() == 20);
    CHECK(g.vertices.size() == 25);
    CHECK(g.component_count() == 5);
}

TEST_CASE("rays: spacing follows the shorter adjacent interval") {
    BoundaryPartition q = line_partition_imaginary({0, 1, 3});
    RaysOptions opt;
    opt.window = 4.0;
    Forest f = rays_forest(q, opt);
    CHECK(f.vertices.size() == 13);
    CHECK(f.edges.size() == 12);
    CHECK(find_vertex(f, {2.0, 3.0}) >= 0);
    CHECK(find_vertex(f, {4.0, 3.0}) >= 0);
    CHECK(find_vertex(f, {1.0, 3.0}) < 0);
    CHECK(find_vertex(f, {1.0, 1.0}) >= 0);
    CHECK(find_vertex(f, {3.0, 0.0}) >= 0);
    CHECK(validate_forest(f).pass);
}

TEST_CASE("rays: window truncation emits a short last piece") {
    BoundaryPartition q = line_partition_imaginary({0, 1});
    RaysOptions opt;
    opt.window = 2.5;
    Forest f = rays_forest(q, opt);
    CHECK(find_vertex(f, {2.5, 0.0}) >= 0);
    CHECK(find_vertex(f, {2.5, 1.0}) >= 0);
    CHECK(validate_forest(f).pass);
}

// ---------------------------------------------------------------------------
// Central tube

namespace {

BoundaryPartition uniform_tube_q() {
    return line_partition_imaginary({-9, -7, -5, -3, -1, 1, 3, 5, 7, 9});
}

const TubeConnector* connector_of(const CentralTube& t, int k) {
    for (const auto& c : t.connectors)
        if (c.k == k) return &c;
    return nullptr;
}

}  // namespace

TEST_CASE("central tube: uniform fixture schedule and connectors") {
    CentralTubeOptions opt;
    opt.window = 7.5;
    CentralTube t = central_tube(uniform_tube_q(), 1.0, opt);

    CHECK(t.C == doctest::Approx(1.0));
    CHECK(t.M == doctest::Approx(8.0));
    REQUIRE(t.a.size() == 209);
    CHECK(t.a[0] == 1.0);
    CHECK(t.a[1] == 1.03125);
    CHECK(t.a.back() == 7.5);
    REQUIRE(t.eta.size() == 208);
    for (double e : t.eta) CHECK(e == 0.03125);

    const std::vector<std::pair<int, int>> want{
        {1, 1}, {-1, 2}, {2, 65}, {-2, 64}, {3, 129}, {-3, 128}, {4, 193}, {-4, 192}};
    for (auto [k, n] : want) {
        const TubeConnector* c = connector_of(t, k);
        REQUIRE(c != nullptr);
        CHECK(c->n == n);
        CHECK(c->x == doctest::Approx(k > 0 ? 2.0 * k - 1.0 : 2.0 * k + 1.0));
        double a = t.a[c->n - 1];
        CHECK(std::abs(std::abs(c->x) - a) < 2.0 / t.M);
        CHECK(c->y == doctest::Approx((k > 0 ? 1.0 : -1.0) * a));
        CHECK((c->n % 2 == 1) == (k > 0));
    }
    CHECK(t.connectors.size() == 8);

    REQUIRE(!t.v_segments.empty());
    CHECK(t.v_segments[0].first == Point{1.0, -1.0});
    CHECK(t.v_segments[0].second == Point{1.0, 0.96875});

    bool found_opening = false;
    for (const auto& o : t.openings)
        if (std::abs(o.first - Point{2.96875, 2.96875}) < 1e-12 &&
            std::abs(o.second - Point{3.0, 3.0}) < 1e-12)
            found_opening = true;
    CHECK(found_opening);
    CHECK(t.openings.size() == 6);
    CHECK(t.rooms_pos == 3);
    CHECK(t.rooms_neg == 3);
}

TEST_CASE("central tube: uniform fixture report and chains") {
    CentralTubeOptions opt;
    opt.window = 7.5;
    CentralTube t = central_tube(uniform_tube_q(), 1.0, opt);

    CHECK(t.report.pass);
    const std::vector<std::pair<std::string, double>> want{
        {"chain-upper-k1", 160.0},  {"chain-lower-k1", 190.0},
        {"chain-upper-k2", 224.0},  {"chain-lower-k2", 318.0},
        {"chain-upper-k3", 288.0},  {"chain-lower-k3", 446.0},
        {"chain-upper-k-1", 159.0}, {"chain-lower-k-1", 188.0},
        {"chain-upper-k-2", 223.0}, {"chain-lower-k-2", 316.0},
        {"chain-upper-k-3", 287.0}, {"chain-lower-k-3", 444.0}};
    for (const auto& [name, value] : want) {
        const ReportItem* it = t.report.find(name);
        INFO("item " << name);
        REQUIRE(it != nullptr);
        CHECK(it->value == value);
        CHECK(it->pass);
    }
}

TEST_CASE("central tube: uniform fixture forest topology") {
    CentralTubeOptions opt;
    opt.window = 7.5;
    CentralTube t = central_tube(uniform_tube_q(), 1.0, opt);

    CHECK(validate_forest(t.forest).pass);
    CHECK(t.forest.max_degree() <= 3);
    int V = (int)t.forest.vertices.size();
    int E = (int)t.forest.edges.size();
    CHECK(t.forest.component_count() == V - E);

    CentralTubeOptions nob = opt;
    nob.include_base_edge = false;
    CentralTube t2 = central_tube(uniform_tube_q(), 1.0, nob);
    CHECK(t2.forest.edges.size() == t.forest.edges.size() - 1);

    CentralTube t3 = central_tube(uniform_tube_q(), 1.0, opt);
    CHECK(forests_identical(t3.forest, t.forest));
}

TEST_CASE("central tube: complement stays connected near the base") {
    CentralTubeOptions opt;
    opt.window = 7.5;
    CentralTube t = central_tube(uniform_tube_q(), 1.0, opt);
    std::vector<Point> probes{{0.5, 0.0},           {0.5, 2.0},      {0.5, -2.0},
                              {0.45, -1.0068359375}, {1.015625, 0.0}, {3.109375, 0.0}};
    Flood res = flood_complement(t.forest, Bbox{-0.1, -3.2, 3.2, 3.2}, std::ldexp(1.0, -9), {},
                                 probes);
    std::set<int> labels(res.probe_labels.begin(), res.probe_labels.end());
    CHECK(labels.size() == 1);
    CHECK(*labels.begin() >= 0);
}

TEST_CASE("central tube: modulus spot checks against chain lower bounds") {
    CentralTubeOptions opt;
    opt.window = 7.5;
    CentralTube t = central_tube(uniform_tube_q(), 1.0, opt);
    for (int k : {1, -1, 2, -2, 3}) {
        SpotResult r = tube_spot_check(t, k);
        INFO("k=" << k << " m_hat=" << r.m_hat << " err=" << r.err << " lower=" << r.lower);
        CHECK(r.pass);
    }
}

TEST_CASE("central tube: window truncation breaks parity feasibility") {
    CentralTubeOptions opt;
    opt.window = 1.01;
    CentralTube t = central_tube(uniform_tube_q(), 1.0, opt);
    CHECK(!t.report.pass);
    const ReportItem* par = t.report.find("parity-k-1");
    REQUIRE(par != nullptr);
    CHECK(!par->pass);
    CHECK(par->witness.find("-1") != std::string::npos);
    CHECK(validate_forest(t.forest).pass);
    CHECK(t.forest.component_count() ==
          (int)t.forest.vertices.size() - (int)t.forest.edges.size());

    CentralTubeOptions bad;
    bad.window = 0.9;
    CHECK(throws_with([&] { (void)central_tube(uniform_tube_q(), 1.0, bad); }, "window"));
}

TEST_CASE("central tube: randomized partitions stay within bounds") {
    std::mt19937 rng(19);
    for (int rep = 0; rep < 12; ++rep) {
        BoundaryPartition q = random_normalized_partition(rng, 2, 0.9, 2.2);
        double C = partition_bg_constant(q);
        double x_pos = q.intervals[q.intervals.size() - 2].b.imag();
        double x_neg = -q.intervals[1].a.imag();
        CentralTubeOptions opt;
        opt.window = std::max(x_pos, x_neg) + 0.1;
        CentralTube t = central_tube(q, C, opt);
        INFO("rep " << rep << " C=" << C << " window=" << opt.window);
        CHECK(t.report.pass);
        CHECK(t.forest.max_degree() <= 3);
        CHECK(validate_forest(t.forest).pass);
        CHECK(check_six_conditions(q, t.sym, t.M) == "");
        CHECK(t.rooms_pos >= 1);
        CHECK(t.rooms_neg >= 1);
    }
}

TEST_CASE("central tube: alternating stress partition") {
    BoundaryPartition q = line_partition_imaginary({-6, -2, -1, 1, 2, 6});
    double C = partition_bg_constant(q);
    CHECK(C == doctest::Approx(4.0));
    CentralTubeOptions opt;
    opt.window = 1.2;
    CentralTube t = central_tube(q, C, opt);
    CHECK(t.M == doctest::Approx(32.0));
    CHECK(t.report.pass);
    CHECK(t.forest.max_degree() <= 3);
    CHECK(validate_forest(t.forest).pass);
    CHECK(check_six_conditions(q, t.sym, t.M) == "");
}

// ---------------------------------------------------------------------------
// Glue

TEST_CASE("glue: identity transfer of rays onto an axis forest") {
    Forest outer;
    std::vector<int> ids;
    for (int c = -2; c <= 2; ++c) ids.push_back(outer.add_vertex({0.0, double(c)}));
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) outer.add_edge(ids[i], ids[i + 1]);

    BoundaryPartition q = line_partition_imaginary({-2, -1, 0, 1, 2});
    RaysOptions ro;
    ro.window = 4.0;
    ro.include_axis = false;
    Forest inner = rays_forest(q, ro);

    GlueResult res = glue(outer, 0, inner, MapSpec::affine_stretch(1.0, 0.0));
    CHECK(res.report.pass);
    CHECK(res.forest.vertices.size() == 25);
    CHECK(res.forest.edges.size() == 24);
    CHECK(validate_forest(res.forest).pass);
    CHECK(res.forest.max_degree() == 3);
}

TEST_CASE("glue: mobius transfer from the disk model") {
    std::vector<double> phis{0.4, 0.6, 0.8, 1.2, 2.0};
    Forest outer;
    std::vector<int> ids;
    for (double phi : phis) ids.push_back(outer.add_vertex({0.0, 1.0 / std::tan(phi / 2)}));
    std::sort(ids.begin(), ids.end(),
              [&](int u, int v) { return outer.vertices[u].imag() < outer.vertices[v].imag(); });
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) outer.add_edge(ids[i], ids[i + 1]);

    Forest inner;
    int v = inner.add_vertex(std::polar(1.0, 0.8));
    int w = inner.add_vertex(0.8 * std::polar(1.0, 0.8));
    int w2 = inner.add_vertex(0.7 * std::polar(1.0, 1.0));
    inner.add_edge(v, w);
    inner.add_edge(w, w2);

    GlueOptions go;
    go.model_is_disk = true;
    MapSpec tau = MapSpec::mobius({1, 0}, {-1, 0}, {1, 0}, {1, 0});
    GlueResult res = glue(outer, 0, inner, tau, go);
    CHECK(res.report.pass);
    CHECK(res.forest.vertices.size() == 7);
    CHECK(res.forest.edges.size() == 6);
    CHECK(validate_forest(res.forest).pass);

    int land = find_vertex(res.forest, {0.0, 1.0 / std::tan(0.4)}, 1e-7);
    REQUIRE(land >= 0);
    CHECK(res.forest.degrees()[land] == 3);
    int arcs = 0;
    for (const auto& e : res.forest.edges)
        if (e.kind == ArcEdge::Kind::arc) ++arcs;
    CHECK(arcs >= 2);
}

TEST_CASE("glue: rejects an edge of large hyperbolic diameter") {
    Forest outer;
    std::vector<int> ids;
    for (int c = -2; c <= 2; ++c) ids.push_back(outer.add_vertex({0.0, double(c)}));
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) outer.add_edge(ids[i], ids[i + 1]);

    Forest inner;
    int u = inner.add_vertex({0.1, 0.0});
    int v2 = inner.add_vertex({0.1, 50.0});
    inner.add_edge(u, v2);

    GlueResult res = glue(outer, 0, inner, MapSpec::affine_stretch(1.0, 0.0));
    CHECK(!res.report.pass);
    CHECK(forests_identical(res.forest, outer));
    bool any_fail = false;
    for (const auto& it : res.report.items) any_fail = any_fail || !it.pass;
    CHECK(any_fail);
}

// ---------------------------------------------------------------------------
// Pipeline

TEST_CASE("pipeline: half-plane model, many mode") {
    std::vector<TractDescriptor> model{TractDescriptor::halfplane()};
    PipelineOptions opt;
    opt.n_max = 3;
    PipelineResult r = pipeline(model, 2.0, FillMode::many, opt);
    CHECK(r.face_count == 9);
    CHECK(r.faces.size() == 9);
    CHECK(r.report.pass);
    int tracts = 0;
    for (const auto& f : r.faces) {
        INFO("face " << f.id << " kind " << f.certificate.kind);
        CHECK(f.certificate.pass);
        if (f.is_tract) ++tracts;
    }
    CHECK(tracts == 1);
    CHECK(r.forest.max_degree() <= 3);
    CHECK(validate_forest(r.forest).pass);

    PipelineResult r2 = pipeline(model, 2.0, FillMode::many, opt);
    CHECK(forests_identical(r2.forest, r.forest));
}

TEST_CASE("pipeline: half-plane model, single mode") {
    std::vector<TractDescriptor> model{TractDescriptor::halfplane()};
    PipelineOptions opt;
    opt.n_max = 3;
    opt.fill_window = 2.05;
    PipelineResult r = pipeline(model, 2.0, FillMode::single, opt);
    CHECK(r.face_count == 2);
    CHECK(r.faces.size() == 2);
    CHECK(r.report.pass);
    for (const auto& f : r.faces) CHECK(f.certificate.pass);
    const ReportItem* fc = r.report.find("face-count");
    REQUIRE(fc != nullptr);
    CHECK(fc->value == 2.0);
    CHECK(fc->pass);
    CHECK(r.forest.max_degree() <= 3);
    CHECK(validate_forest(r.forest).pass);
}

TEST_CASE("pipeline: two facing half-strips, single mode") {
    std::vector<TractDescriptor> model{
        TractDescriptor::halfstrip(2.0, Pose{pi, {-0.125, 0.0}}),
        TractDescriptor::halfstrip(2.0, Pose{0.0, {0.125, 0.0}})};
    PipelineOptions opt;
    opt.n_max = 36;
    PipelineResult r = pipeline(model, 1.0, FillMode::single, opt);
    CHECK(r.face_count == 4);
    CHECK(r.faces.size() == 4);
    CHECK(r.report.pass);
    int tracts = 0;
    for (const auto& f : r.faces) {
        INFO("face " << f.id);
        CHECK(f.certificate.pass);
        if (f.is_tract) ++tracts;
    }
    CHECK(tracts == 2);
    CHECK(r.forest.max_degree() <= 3);
    CHECK(validate_forest(r.forest).pass);
    const ReportItem* bg = r.report.find("bounded-geometry");
    REQUIRE(bg != nullptr);
    CHECK(bg->pass);

    PipelineResult r2 = pipeline(model, 1.0, FillMode::single, opt);
    CHECK(forests_identical(r2.forest, r.forest));
}

TEST_CASE("pipeline: input validation") {
    CHECK(throws_with(
        [] {
            std::vector<TractDescriptor> m{TractDescriptor::sector(pi / 4)};
            (void)pipeline(m, 1.0, FillMode::many);
        },
        "atlas"));
    CHECK(throws_with(
        [] {
            std::vector<TractDescriptor> m{
                TractDescriptor::halfstrip(2.0, Pose{pi, {-0.025, 0.0}}),
                TractDescriptor::halfstrip(2.0, Pose{0.0, {0.025, 0.0}})};
            (void)pipeline(m, 1.0, FillMode::single);
        },
        "separation"));
}

// ---------------------------------------------------------------------------
// Lattice companions

TEST_CASE("lattice companions: two tracts") {
    TwoExtraResult r = twoextra(LatticeVariant::two);
    CHECK(r.tract_count == 2);
    CHECK(r.report.pass);
    CHECK(r.forest.max_degree() <= 3);
    CHECK(validate_forest(r.forest).pass);
    CHECK(forests_identical(twoextra(LatticeVariant::two).forest, r.forest));
}

TEST_CASE("lattice companions: three tracts") {
    TwoExtraResult r = twoextra(LatticeVariant::three);
    CHECK(r.tract_count == 3);
    CHECK(r.report.pass);
    CHECK(r.forest.max_degree() <= 3);
    int v = find_vertex(r.forest, {0.0, 1.0});
    REQUIRE(v >= 0);
    CHECK(r.forest.degrees()[v] == 3);
}

TEST_CASE("lattice companions: truncated infinite family") {
    TwoExtraResult r = twoextra(LatticeVariant::infinite, 12);
    CHECK(r.tract_count == 14);
    CHECK(r.report.pass);
    CHECK(r.forest.max_degree() <= 3);
    CHECK(validate_forest(r.forest).pass);
}
