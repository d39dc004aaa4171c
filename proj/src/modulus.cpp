#include "tractforge/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace tractforge {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

bool Interval::unbounded_left() const { return std::isinf(lo) && lo < 0; }

ModulusResult rectangle_modulus(double a, double b) {
    if (!(a > 0) || !(b > 0)) throw std::domain_error("rectangle_modulus: sides must be positive");
    ModulusResult r;
    r.value = a / b;
    r.method = "exact";
    r.family = Family::connecting;
    return r;
}

ModulusResult annulus_modulus(double r, double R) {
    if (!(r > 0) || !(R > r)) throw std::domain_error("annulus_modulus: need 0 < r < R");
    ModulusResult m;
    m.value = std::log(R / r) / (2 * kPi);
    m.method = "exact";
    m.family = Family::separating;
    return m;
}

ModulusResult exact_modulus(const ModulusQuery& q) {
    switch (q.kind) {
        case ModulusQuery::Kind::rectangle:
            return rectangle_modulus(q.a, q.b);
        case ModulusQuery::Kind::annulus:
            return annulus_modulus(q.r, q.R);
        default:
            throw std::invalid_argument("exact_modulus: query has no closed form");
    }
}

// ---------------------------------------------------------------------------
// Gauss-Legendre quadrature with endpoint-singularity substitution
// ---------------------------------------------------------------------------

namespace {

struct GLRule {
    std::vector<double> x, w;  // nodes and weights on [-1, 1]
};

GLRule make_gl(int n) {
    GLRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; i++) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; it++) {
            // evaluate P_n and P_n' by recurrence
            double p0 = 1, p1 = x;
            for (int k = 2; k <= n; k++) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.x[i] = x;
        r.w[i] = 2.0 / ((1 - x * x) * dp * dp);
    }
    return r;
}

const GLRule& gl16() {
    static const GLRule r = make_gl(16);
    return r;
}
const GLRule& gl32() {
    static const GLRule r = make_gl(32);
    return r;
}

template <class F>
double gl_panel(const GLRule& g, double a, double b, F&& f) {
    double c = (a + b) / 2, s = (b - a) / 2, acc = 0;
    for (size_t i = 0; i < g.x.size(); i++) acc += g.w[i] * f(c + s * g.x[i]);
    return acc * s;
}

// integral over [0, U] of a smooth function with geometric panels refined
// toward 0; returns the fine value, accumulates |fine - coarse| into err
template <class F>
double geometric_panels(double U, F&& f, double& err) {
    const int K = 14;
    double total = 0, total_c = 0;
    double hi = U;
    for (int k = 0; k < K; k++) {
        double lo = (k + 1 < K) ? U * std::ldexp(1.0, -(k + 1)) : 0.0;
        total += gl_panel(gl32(), lo, hi, f);
        total_c += gl_panel(gl16(), lo, hi, f);
        hi = lo;
    }
    err += std::abs(total - total_c);
    return total;
}

// integral over [lo, hi] of prod_{s in sings} |t - s|^(-1/2); lo and hi are
// themselves singular points, removed by t = lo + u^2 / t = hi - u^2
double sc_integral(double lo, double hi, const std::vector<double>& sings, double& err) {
    double mid = (lo + hi) / 2;
    auto rest = [&](double t, double skip) {
        double p = 1;
        for (double s : sings) {
            if (s == skip) continue;
            p *= std::sqrt(std::abs(t - s));
        }
        return 2.0 / p;
    };
    double left = geometric_panels(std::sqrt(mid - lo),
                                   [&](double u) { return rest(lo + u * u, lo); }, err);
    double right = geometric_panels(std::sqrt(hi - mid),
                                    [&](double u) { return rest(hi - u * u, hi); }, err);
    return left + right;
}

}  // namespace

ModulusResult two_interval_modulus(Interval I, Interval J) {
    if (!(I.length() > 0) || !(J.length() > 0))
        throw std::invalid_argument("two_interval_modulus: degenerate interval");
    if (std::max(I.lo, J.lo) < std::min(I.hi, J.hi))
        throw std::invalid_argument("two_interval_modulus: intervals overlap");
    std::vector<double> p = {I.lo, I.hi, J.lo, J.hi};
    for (double v : p)
        if (!std::isfinite(v)) throw std::invalid_argument("two_interval_modulus: unbounded input");
    std::sort(p.begin(), p.end());
    double err_a = 0, err_b = 0;
    double a = sc_integral(p[0], p[1], p, err_a);  // image of the left interval
    double b = sc_integral(p[1], p[2], p, err_b);  // image of the gap
    ModulusResult m;
    m.value = b / a;
    m.method = "sc-quadrature";
    m.family = Family::separating;
    m.error_estimate = (err_b + m.value * err_a) / a;
    return m;
}

double ray_interval_separating_sc(double k, Interval J, double* err) {
    if (!(J.length() > 0) || !(J.lo > k))
        throw std::invalid_argument("ray_interval_separating_sc: need k < J");
    std::vector<double> sings = {k, J.lo, J.hi};
    double e1 = 0, e2 = 0;
    double gap = sc_integral(k, J.lo, sings, e1);
    double side = sc_integral(J.lo, J.hi, sings, e2);
    double v = gap / side;
    if (err) *err = (e1 + v * e2) / side;
    return v;
}

// ---------------------------------------------------------------------------
// masked cell grid Dirichlet solver
// ---------------------------------------------------------------------------

namespace {

double seg_dist(Point a, Point b, Point z) {
    Point r = b - a;
    double len2 = dot(r, r);
    if (len2 == 0) return std::abs(z - a);
    double t = std::clamp(dot(z - a, r) / len2, 0.0, 1.0);
    return std::abs(z - (a + t * r));
}

struct Assembled {
    long long nx = 0, ny = 0;
    std::vector<int32_t> nbr;   // 4 per cell, -1 when absent
    std::vector<double> diag;   // degree + 2 * (#dirichlet stubs)
    std::vector<double> rhs;    // 2 * sum of stub potentials
    std::vector<double> stub_n, stub_g, stub_g2;  // per cell aggregates
    long long n = 0;
    double snap_max = 0;
};

}  // namespace

GridSolution solve_grid(const GridDomain& dom, double h) {
    if (!(h > 0) || !std::isfinite(h)) throw std::invalid_argument("solve_grid: bad h");
    if (dom.polygon.size() < 3) throw std::invalid_argument("solve_grid: degenerate polygon");
    if (dom.roles.empty()) throw std::invalid_argument("solve_grid: no boundary roles");

    Bbox bb = Bbox::of(dom.polygon[0]);
    for (const Point& p : dom.polygon) bb.expand(p);
    const double ox = bb.x0, oy = bb.y0;
    double snap_max = 0;
    auto snap = [&](Point p) {
        Point s{ox + std::round((p.real() - ox) / h) * h, oy + std::round((p.imag() - oy) / h) * h};
        snap_max = std::max(snap_max, std::abs(s - p));
        return s;
    };
    std::vector<Point> poly;
    poly.reserve(dom.polygon.size());
    for (const Point& p : dom.polygon) poly.push_back(snap(p));
    std::vector<BdrySegment> roles;
    roles.reserve(dom.roles.size());
    for (const BdrySegment& s : dom.roles) roles.push_back({snap(s.a), snap(s.b), s.role});

    Bbox sb = Bbox::of(poly[0]);
    for (const Point& p : poly) sb.expand(p);
    const long long nx = std::llround((sb.x1 - sb.x0) / h);
    const long long ny = std::llround((sb.y1 - sb.y0) / h);
    if (nx < 1 || ny < 1) throw std::invalid_argument("solve_grid: domain unresolved at this h");
    if (nx * ny > 40000000LL) throw std::invalid_argument("solve_grid: grid too large");

    auto cx = [&](long long i) { return sb.x0 + (i + 0.5) * h; };
    auto cy = [&](long long j) { return sb.y0 + (j + 0.5) * h; };
    auto inside = [&](double x, double y) {
        bool in = false;
        for (size_t k = 0; k < poly.size(); k++) {
            Point a = poly[k], b = poly[(k + 1) % poly.size()];
            if ((a.imag() > y) != (b.imag() > y)) {
                double xx =
                    a.real() + (y - a.imag()) / (b.imag() - a.imag()) * (b.real() - a.real());
                if (xx > x) in = !in;
            }
        }
        return in;
    };

    std::vector<int32_t> idx(static_cast<size_t>(nx * ny), -1);
    long long n = 0;
    for (long long j = 0; j < ny; j++)
        for (long long i = 0; i < nx; i++)
            if (inside(cx(i), cy(j))) idx[j * nx + i] = static_cast<int32_t>(n++);
    if (n == 0) throw std::invalid_argument("solve_grid: empty mask");

    Assembled A;
    A.nx = nx;
    A.ny = ny;
    A.n = n;
    A.snap_max = snap_max;
    A.nbr.assign(4 * n, -1);
    A.diag.assign(n, 0.0);
    A.rhs.assign(n, 0.0);
    A.stub_n.assign(n, 0.0);
    A.stub_g.assign(n, 0.0);
    A.stub_g2.assign(n, 0.0);

    auto classify = [&](Point m) -> const BdrySegment* {
        const BdrySegment* best = nullptr;
        double bd = kInf;
        for (const BdrySegment& s : roles) {
            double d = seg_dist(s.a, s.b, m);
            if (d < bd) {
                bd = d;
                best = &s;
            }
        }
        return best;
    };

    long long n_d0 = 0, n_d1 = 0;
    const long long di[4] = {-1, 1, 0, 0};
    const long long dj[4] = {0, 0, -1, 1};
    for (long long j = 0; j < ny; j++)
        for (long long i = 0; i < nx; i++) {
            int32_t id = idx[j * nx + i];
            if (id < 0) continue;
            for (int d = 0; d < 4; d++) {
                long long ii = i + di[d], jj = j + dj[d];
                int32_t nb = (ii >= 0 && ii < nx && jj >= 0 && jj < ny)
                                 ? idx[jj * nx + ii]
                                 : static_cast<int32_t>(-1);
                if (nb >= 0) {
                    A.nbr[4 * id + d] = nb;
                    A.diag[id] += 1.0;
                } else {
                    Point mid{cx(i) + di[d] * h / 2, cy(j) + dj[d] * h / 2};
                    const BdrySegment* s = classify(mid);
                    if (!s || s->role == BdryRole::neumann) continue;
                    double g = (s->role == BdryRole::dirichlet1) ? 1.0 : 0.0;
                    (s->role == BdryRole::dirichlet1 ? n_d1 : n_d0)++;
                    A.diag[id] += 2.0;
                    A.rhs[id] += 2.0 * g;
                    A.stub_n[id] += 1.0;
                    A.stub_g[id] += g;
                    A.stub_g2[id] += g * g;
                }
            }
        }
    if (n_d0 == 0 || n_d1 == 0)
        throw std::invalid_argument("solve_grid: a plate is unresolved at this h");

    // SSOR(omega)-preconditioned conjugate gradients
    const double omega = 1.9;
    std::vector<double> x(n, 0.0), r = A.rhs, z(n), p(n), Ap(n), y(n);
    auto apply_A = [&](const std::vector<double>& v, std::vector<double>& out) {
        for (long long k = 0; k < n; k++) {
            double acc = A.diag[k] * v[k];
            for (int d = 0; d < 4; d++) {
                int32_t nb = A.nbr[4 * k + d];
                if (nb >= 0) acc -= v[nb];
            }
            out[k] = acc;
        }
    };
    auto precond = [&](const std::vector<double>& rin, std::vector<double>& zout) {
        for (long long k = 0; k < n; k++) {
            double acc = rin[k];
            for (int d = 0; d < 4; d++) {
                int32_t nb = A.nbr[4 * k + d];
                if (nb >= 0 && nb < k) acc += omega * y[nb];
            }
            y[k] = acc / A.diag[k];
        }
        for (long long k = 0; k < n; k++) y[k] *= A.diag[k];
        for (long long k = n - 1; k >= 0; k--) {
            double acc = y[k];
            for (int d = 0; d < 4; d++) {
                int32_t nb = A.nbr[4 * k + d];
                if (nb >= 0 && nb > k) acc += omega * zout[nb];
            }
            zout[k] = acc / A.diag[k];
        }
    };

    double bnorm = 0;
    for (double v : A.rhs) bnorm += v * v;
    bnorm = std::sqrt(bnorm);
    if (bnorm == 0) throw std::invalid_argument("solve_grid: zero right-hand side");

    precond(r, z);
    p = z;
    double rz = 0;
    for (long long k = 0; k < n; k++) rz += r[k] * z[k];
    int iters = 0;
    const int max_iters = 60000;
    for (; iters < max_iters; iters++) {
        double rn = 0;
        for (double v : r) rn += v * v;
        if (std::sqrt(rn) <= 1e-10 * bnorm) break;
        apply_A(p, Ap);
        double pAp = 0;
        for (long long k = 0; k < n; k++) pAp += p[k] * Ap[k];
        double alpha = rz / pAp;
        for (long long k = 0; k < n; k++) {
            x[k] += alpha * p[k];
            r[k] -= alpha * Ap[k];
        }
        precond(r, z);
        double rz2 = 0;
        for (long long k = 0; k < n; k++) rz2 += r[k] * z[k];
        double beta = rz2 / rz;
        rz = rz2;
        for (long long k = 0; k < n; k++) p[k] = z[k] + beta * p[k];
    }
    if (iters >= max_iters) throw std::runtime_error("solve_grid: no convergence");

    double energy = 0;
    for (long long j = 0; j < ny; j++)
        for (long long i = 0; i < nx; i++) {
            int32_t id = idx[j * nx + i];
            if (id < 0) continue;
            int32_t east = A.nbr[4 * id + 1], north = A.nbr[4 * id + 3];
            if (east >= 0) energy += (x[id] - x[east]) * (x[id] - x[east]);
            if (north >= 0) energy += (x[id] - x[north]) * (x[id] - x[north]);
            // sum over stubs of 2*(u-g)^2 with per-cell aggregates
            energy += 2.0 * (A.stub_n[id] * x[id] * x[id] - 2.0 * x[id] * A.stub_g[id] +
                             A.stub_g2[id]);
        }

    GridSolution out;
    out.energy = energy;
    out.h = h;
    out.cells = n;
    out.iterations = iters;
    out.snap_max_rel = snap_max / h;
    return out;
}

// ---------------------------------------------------------------------------
// quadrilateral and half-plane wrappers
// ---------------------------------------------------------------------------

namespace {

void require_simple(const std::vector<Point>& poly) {
    const size_t n = poly.size();
    Bbox bb = Bbox::of(poly[0]);
    for (const Point& p : poly) bb.expand(p);
    double tol = 1e-12 * std::max(bb.diag(), 1e-30);
    for (size_t i = 0; i < n; i++) {
        EdgeGeo ei = EdgeGeo::segment(poly[i], poly[(i + 1) % n]);
        for (size_t j = i + 1; j < n; j++) {
            bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            EdgeGeo ej = EdgeGeo::segment(poly[j], poly[(j + 1) % n]);
            auto hits = intersect(ei, ej, tol);
            if (hits.empty()) continue;
            if (!adjacent) throw std::invalid_argument("non-simple polygon");
            Point shared = (j == i + 1) ? poly[j] : poly[0];
            for (const Point& hpt : hits)
                if (std::abs(hpt - shared) > 64 * tol)
                    throw std::invalid_argument("non-simple polygon");
        }
    }
}

GridDomain quad_domain(const Quadrilateral& q) {
    const int n = static_cast<int>(q.polygon.size());
    if (n < 4) throw std::invalid_argument("quadrilateral: need >= 4 vertices");
    for (int m : q.marks)
        if (m < 0 || m >= n) throw std::invalid_argument("quadrilateral: mark out of range");
    // marks must be distinct and in cyclic order along the vertex loop
    int descents = 0;
    for (int k = 0; k < 4; k++) {
        int a = q.marks[k], b = q.marks[(k + 1) % 4];
        if (a == b) throw std::invalid_argument("quadrilateral: repeated mark");
        if (b < a) descents++;
    }
    if (descents != 1) throw std::invalid_argument("quadrilateral: marks out of cyclic order");
    require_simple(q.polygon);

    const BdryRole role_of_arc[4] = {BdryRole::dirichlet0, BdryRole::neumann,
                                     BdryRole::dirichlet1, BdryRole::neumann};
    GridDomain dom;
    dom.polygon = q.polygon;
    for (int k = 0; k < 4; k++) {
        int v = q.marks[k], end = q.marks[(k + 1) % 4];
        while (v != end) {
            int w = (v + 1) % n;
            dom.roles.push_back({q.polygon[v], q.polygon[w], role_of_arc[k]});
            v = w;
        }
    }
    return dom;
}

double min_side(const std::vector<Point>& poly) {
    double m = kInf;
    for (size_t i = 0; i < poly.size(); i++)
        m = std::min(m, std::abs(poly[(i + 1) % poly.size()] - poly[i]));
    return m;
}

}  // namespace

ModulusResult quad_connecting_modulus(const Quadrilateral& q, double h) {
    GridDomain dom = quad_domain(q);
    if (min_side(q.polygon) / h < 8 - 1e-9)
        throw std::invalid_argument("quad_connecting_modulus: h does not resolve shortest side by 8");
    GridSolution fine = solve_grid(dom, h);
    GridSolution coarse = solve_grid(dom, 2 * h);
    ModulusResult m;
    m.value = fine.energy;
    m.method = "dirichlet-grid";
    m.family = Family::connecting;
    m.error_estimate = std::abs(fine.energy - coarse.energy);
    m.h = h;
    m.notes.push_back("snap=" + std::to_string(fine.snap_max_rel));
    m.notes.push_back("cells=" + std::to_string(fine.cells));
    return m;
}

namespace {

struct BottomPiece {
    double x0, x1;
    BdryRole role;
};

GridDomain window_domain(double wx0, double wx1, double H, const std::vector<BottomPiece>& pieces) {
    GridDomain dom;
    dom.polygon = {{wx0, 0}, {wx1, 0}, {wx1, H}, {wx0, H}};
    for (const BottomPiece& p : pieces)
        if (p.x1 > p.x0) dom.roles.push_back({{p.x0, 0}, {p.x1, 0}, p.role});
    dom.roles.push_back({{wx1, 0}, {wx1, H}, BdryRole::neumann});
    dom.roles.push_back({{wx1, H}, {wx0, H}, BdryRole::neumann});
    dom.roles.push_back({{wx0, H}, {wx0, 0}, BdryRole::neumann});
    return dom;
}

struct HalfplaneLayout {
    // marked-set endpoints in solve coordinates, left to right:
    // [p0,p1] left set, [p1,p2] inner gap, [p2,p3] right set; the outer arc
    // covers the remaining axis. wrap_outer: the 0-potential arc is the outer
    // one (ray configurations after the Mobius transplant wrap the gap
    // through infinity).
    double p0, p1, p2, p3;
    bool wrap;  // true when the far bottom pieces carry the gap's potential
    BdryRole left_role, right_role, inner_role, far_role;
};

GridDomain layout_window(const HalfplaneLayout& L, double margin) {
    std::vector<BottomPiece> pieces = {{L.p0 - margin, L.p0, L.far_role},
                                       {L.p0, L.p1, L.left_role},
                                       {L.p1, L.p2, L.inner_role},
                                       {L.p2, L.p3, L.right_role},
                                       {L.p3, L.p3 + margin, L.far_role}};
    return window_domain(L.p0 - margin, L.p3 + margin, margin, pieces);
}

}  // namespace

ModulusResult halfplane_pair_modulus(Interval P, Interval Q, Family family, double h,
                                     double margin_factor, long long max_cells) {
    if (Q.unbounded_left() || std::isinf(Q.hi) || std::isinf(P.hi))
        throw std::invalid_argument("halfplane_pair_modulus: only the left set may be a ray");
    if (std::isfinite(P.lo) && Q.hi < P.lo) std::swap(P, Q);
    if (!(P.hi < Q.lo))
        throw std::invalid_argument("halfplane_pair_modulus: marked sets must be disjoint");
    if (!(Q.length() > 0) || (!P.unbounded_left() && !(P.length() > 0)))
        throw std::invalid_argument("halfplane_pair_modulus: degenerate marked set");

    const bool sep = family == Family::separating;
    HalfplaneLayout L;
    std::string note;
    if (P.unbounded_left()) {
        if (h != 0.0)
            throw std::invalid_argument(
                "halfplane_pair_modulus: ray configurations choose h automatically");
        // w = 1/(c - z), c the gap midpoint: the gap wraps through infinity,
        // the ray becomes the bounded piece (0, 2/gap]
        double c = (P.hi + Q.lo) / 2;
        L.p0 = -1.0 / (Q.lo - c);  // w(Q.lo)
        L.p1 = -1.0 / (Q.hi - c);  // w(Q.hi)
        L.p2 = 0.0;                // w(infinity): junction of outer arc and ray image
        L.p3 = 1.0 / (c - P.hi);   // w(P.hi)
        // pieces left to right: Q-image, outer arc, P-image; far pieces = gap
        L.left_role = sep ? BdryRole::neumann : BdryRole::dirichlet1;
        L.inner_role = sep ? BdryRole::dirichlet1 : BdryRole::neumann;
        L.right_role = sep ? BdryRole::neumann : BdryRole::dirichlet0;
        L.far_role = sep ? BdryRole::dirichlet0 : BdryRole::neumann;
        note = "mobius-transplant c=" + std::to_string(c);
    } else {
        L.p0 = P.lo;
        L.p1 = P.hi;
        L.p2 = Q.lo;
        L.p3 = Q.hi;
        L.left_role = sep ? BdryRole::neumann : BdryRole::dirichlet0;
        L.inner_role = sep ? BdryRole::dirichlet0 : BdryRole::neumann;
        L.right_role = sep ? BdryRole::neumann : BdryRole::dirichlet1;
        L.far_role = sep ? BdryRole::dirichlet1 : BdryRole::neumann;
    }

    double min_feature = std::min({L.p1 - L.p0, L.p2 - L.p1, L.p3 - L.p2});
    double D = L.p3 - L.p0;
    double margin = margin_factor * D;
    if (h == 0.0) {
        h = min_feature / 16;
        double W = D + 2 * margin, Ht = margin;
        if (W * Ht / (h * h) > static_cast<double>(max_cells))
            h = std::sqrt(W * Ht / static_cast<double>(max_cells));
        h = std::min(h, min_feature / 8);
    }
    if (min_feature / h < 8 - 1e-9)
        throw std::invalid_argument("halfplane_pair_modulus: h does not resolve features by 8");

    GridSolution fine = solve_grid(layout_window(L, margin), h);
    GridSolution coarse = solve_grid(layout_window(L, margin), 2 * h);
    GridSolution wide = solve_grid(layout_window(L, 2 * margin), 2 * h);

    ModulusResult m;
    m.value = fine.energy;
    m.method = "dirichlet-grid";
    m.family = family;
    m.h = h;
    m.error_estimate = std::abs(fine.energy - coarse.energy) +
                       std::abs(wide.energy - coarse.energy);
    if (!note.empty()) m.notes.push_back(note);
    m.notes.push_back("window-margin=" + std::to_string(margin));
    m.notes.push_back("cells=" + std::to_string(fine.cells));
    m.notes.push_back("snap=" + std::to_string(fine.snap_max_rel));
    return m;
}

ModulusResult discrete_quad_modulus(const ModulusQuery& q, double h) {
    switch (q.kind) {
        case ModulusQuery::Kind::quadrilateral:
            return quad_connecting_modulus(q.quad, h);
        case ModulusQuery::Kind::halfplane_quadrilateral:
            return halfplane_pair_modulus(q.I, q.J, q.family, h);
        default:
            throw std::invalid_argument("discrete_quad_modulus: unsupported query kind");
    }
}

SeparationEstimate separation_estimate(const SetGeo& e, const SetGeo& f) {
    Metrics me = metrics(e), mf = metrics(f);
    if (!(me.diam > 0) || !(mf.diam > 0))
        throw std::invalid_argument("separation_estimate: sets need positive diameter");
    Metrics mm = metrics(e, f);
    double d = mm.dist.value_or(0.0);
    SeparationEstimate s;
    s.epsilon = d / std::min(me.diam, mf.diam);
    if (s.epsilon <= 0) return s;  // touching: zeros
    s.modulus_lower = 1.0 / (kPi * (1 + 1 / (s.epsilon * s.epsilon)));
    s.modulus_upper = s.epsilon < 2 ? 1.0 / std::log(2 / s.epsilon) : kInf;
    return s;
}

Report tube_growth_check(double k_end, const std::vector<Interval>& J,
                         const TubeGrowthOptions& opt) {
    Report rep;
    rep.kind = "tube-growth";
    if (J.empty()) throw std::invalid_argument("tube_growth_check: no intervals");
    for (size_t j = 0; j < J.size(); j++) {
        if (!(J[j].length() > 0))
            throw std::invalid_argument("tube_growth_check: degenerate interval");
        if (j > 0 && !(J[j].lo >= J[j - 1].hi - 1e-12))
            throw std::invalid_argument("tube_growth_check: intervals unordered or overlapping");
    }
    if (!(J[0].lo > k_end))
        throw std::invalid_argument("tube_growth_check: intervals must sit right of the ray");
    if (opt.supplied_per_interval && opt.supplied_per_interval->size() != J.size())
        throw std::invalid_argument("tube_growth_check: supplied moduli count mismatch");

    std::vector<double> M(J.size());
    for (size_t j = 0; j < J.size(); j++) {
        if (opt.supplied_per_interval) {
            M[j] = (*opt.supplied_per_interval)[j];
        } else if (opt.supplied_M) {
            M[j] = *opt.supplied_M;
        } else {
            ModulusResult r = halfplane_pair_modulus({-kInf, k_end}, J[j], Family::separating,
                                                     opt.h, 2.0, opt.max_cells);
            M[j] = r.value;
            rep.note("interval " + std::to_string(j + 1) + ": modulus " + std::to_string(r.value) +
                     " (err " + std::to_string(r.error_estimate) + ", h " + std::to_string(r.h) +
                     ")");
        }
    }

    double M_sup = *std::max_element(M.begin(), M.end());
    double eps = std::exp(-2 * kPi * M_sup);
    rep.add("modulus-sup", M_sup, true);
    rep.add("epsilon", eps, true);
    for (size_t j = 0; j < J.size(); j++) {
        double required = eps * std::pow(1 + eps, static_cast<double>(j));
        bool ok = J[j].length() >= required * (1 - 1e-12);
        rep.add("growth-bound-" + std::to_string(j + 1), J[j].length(), ok,
                "required >= " + std::to_string(required));
    }
    return rep;
}

AddRoomsResult add_rooms_compare(Interval I, Interval J, Interval K, double h) {
    if (!(std::isfinite(K.lo) && K.length() > 0 && I.length() > 0 && J.length() > 0))
        throw std::invalid_argument("add_rooms_compare: degenerate interval");
    if (!(K.hi <= I.lo && I.lo < J.lo && I.hi <= J.lo))
        throw std::invalid_argument("add_rooms_compare: need K left of I left of J");
    if (!(I.lo > K.hi) || !(J.lo > I.hi))
        throw std::invalid_argument("add_rooms_compare: touching intervals are unresolvable");

    ModulusResult mi = halfplane_pair_modulus(K, I, Family::separating, h);
    ModulusResult mj = halfplane_pair_modulus(K, J, Family::separating, h);
    AddRoomsResult r;
    r.M_IK = mi.value;
    r.M_JK = mj.value;
    r.err_IK = mi.error_estimate;
    r.err_JK = mj.error_estimate;
    r.comparable = mj.value <= mi.value;
    r.certified = r.comparable && I.length() <= J.length() * (1 + 1e-12);
    return r;
}

double parallel_lower_bound(const std::vector<ModulusResult>& parts) {
    double s = 0;
    for (const ModulusResult& p : parts) s += p.value;
    return s;
}

}  // namespace tractforge
