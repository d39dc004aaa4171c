#include "tractforge/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tractforge {
namespace {

constexpr double pi = std::numbers::pi;

// Principal asinh with explicit handling of the boundary Re w == 0, where the
// branch cuts (+-i[1, inf)) live. The side is taken from the sign of Im w, and
// slit images keep exact signed-zero imaginary parts.
Point asinh_branch(Point w) {
    if (w.real() != 0.0) return std::asinh(w);
    double t = w.imag();
    if (t >= -1.0 && t <= 1.0) return {0.0, std::asin(t)};
    if (t > 1.0) return {std::acosh(t), pi / 2};
    return {std::acosh(-t), -pi / 2};
}

bool near_int(double p) { return std::nearbyint(p) == p; }

}  // namespace

TractDescriptor TractDescriptor::halfplane(Pose pose) {
    TractDescriptor t;
    t.kind = Kind::halfplane;
    t.pose = pose;
    return t;
}

TractDescriptor TractDescriptor::halfstrip(double width, Pose pose) {
    if (!(width > 0.0)) throw std::invalid_argument("halfstrip: width must be positive");
    TractDescriptor t;
    t.kind = Kind::halfstrip;
    t.width = width;
    t.pose = pose;
    return t;
}

TractDescriptor TractDescriptor::sector(double theta, Pose pose) {
    if (!(theta > 0.0) || !(theta < pi))
        throw std::invalid_argument("sector: half-angle must lie in (0, pi)");
    TractDescriptor t;
    t.kind = Kind::sector;
    t.theta = theta;
    t.pose = pose;
    return t;
}

TractDescriptor TractDescriptor::disk_exterior(double R, Pose pose) {
    if (!(R > 0.0)) throw std::invalid_argument("disk_exterior: radius must be positive");
    TractDescriptor t;
    t.kind = Kind::disk_exterior;
    t.radius = R;
    t.pose = pose;
    return t;
}

Point TractDescriptor::tau(Point z) const {
    Point zeta = pose.invert(z);
    switch (kind) {
        case Kind::halfplane:
            return zeta;
        case Kind::halfstrip:
            return std::sinh((pi / width) * zeta);
        case Kind::sector: {
            if (zeta == Point{0.0, 0.0}) return {0.0, 0.0};
            double p = pi / (2.0 * theta);
            return std::exp(p * std::log(zeta));
        }
        case Kind::disk_exterior:
            return std::sinh(0.5 * std::log(zeta / radius));
    }
    throw std::logic_error("unreachable");
}

Point TractDescriptor::tau_inv(Point w) const {
    switch (kind) {
        case Kind::halfplane:
            return pose.apply(w);
        case Kind::halfstrip:
            return pose.apply((width / pi) * asinh_branch(w));
        case Kind::sector: {
            if (w == Point{0.0, 0.0}) return pose.apply({0.0, 0.0});
            double p = pi / (2.0 * theta);
            return pose.apply(std::exp(std::log(w) / p));
        }
        case Kind::disk_exterior: {
            if (w.real() == 0.0) {
                double t = w.imag();
                if (t >= -1.0 && t <= 1.0) {
                    double phi = 2.0 * std::asin(t);
                    return pose.apply({radius * std::cos(phi), radius * std::sin(phi)});
                }
                // slit point, side tagged by a signed zero
                double at = std::abs(t);
                double mag = radius * std::pow(at + std::sqrt(at * at - 1.0), 2.0);
                return pose.apply({-mag, std::copysign(0.0, t)});
            }
            return pose.apply(radius * std::exp(2.0 * asinh_branch(w)));
        }
    }
    throw std::logic_error("unreachable");
}

bool TractDescriptor::contains(Point z) const {
    Point zeta = pose.invert(z);
    switch (kind) {
        case Kind::halfplane:
            return zeta.real() > 0.0;
        case Kind::halfstrip:
            return zeta.real() > 0.0 && std::abs(zeta.imag()) < width / 2.0;
        case Kind::sector:
            return std::abs(zeta) > 0.0 && std::abs(std::arg(zeta)) < theta;
        case Kind::disk_exterior:
            if (std::abs(zeta) <= radius) return false;
            return !(zeta.imag() == 0.0 && zeta.real() < 0.0);
    }
    return false;
}

namespace {

TauPartition build_partition(const TractDescriptor& t, double rho, double lambda, int n_max) {
    TauPartition p;
    p.tract = t;
    p.rho = rho;
    p.lambda = lambda;
    p.n_max = n_max;
    p.vertices.reserve(static_cast<std::size_t>(2 * n_max + 1));
    for (int n = -n_max; n <= n_max; ++n)
        p.vertices.push_back(t.tau_inv(Point{rho, pi * n} / lambda));

    // Arc metadata by sampling the tau-preimage of each pi-long boundary
    // step. At rho = 0 the level curve runs along the boundary, whose corners
    // sit at tau' = +-i; arcs are split there and nodes cluster at piece ends
    // so square-root parametric blowups are resolved.
    const int K = 512;  // nodes per smooth piece
    const int D = 8;    // diameter scan uses every D-th sample
    std::vector<Point> zs;
    p.arc_length.reserve(static_cast<std::size_t>(2 * n_max));
    p.arc_diam.reserve(static_cast<std::size_t>(2 * n_max));
    for (int n = -n_max; n < n_max; ++n) {
        double t_lo = pi * n, t_hi = pi * (n + 1);
        std::vector<double> brk{t_lo};
        if (rho == 0.0)
            for (double c : {-lambda, lambda})
                if (c > t_lo + 1e-12 && c < t_hi - 1e-12) brk.push_back(c);
        brk.push_back(t_hi);

        zs.clear();
        zs.push_back(p.vertices[static_cast<std::size_t>(n + n_max)]);
        for (std::size_t piece = 0; piece + 1 < brk.size(); ++piece) {
            double a = brk[piece], b = brk[piece + 1];
            for (int j = 1; j <= K; ++j) {
                double s = std::sin(pi * j / (2.0 * K));
                double tt = a + (b - a) * s * s;
                if (piece + 2 == brk.size() && j == K)
                    zs.push_back(p.vertices[static_cast<std::size_t>(n + n_max + 1)]);
                else
                    zs.push_back(t.tau_inv(Point{rho, tt} / lambda));
            }
        }
        double len = 0.0;
        for (std::size_t k = 0; k + 1 < zs.size(); ++k) len += std::abs(zs[k + 1] - zs[k]);
        double diam = 0.0;
        std::size_t last = zs.size() - 1;
        for (std::size_t i = 0; i <= last; i += D)
            for (std::size_t j = i + D; j <= last + D; j += D) {
                std::size_t jj = std::min(j, last);
                diam = std::max(diam, std::abs(zs[jj] - zs[i]));
            }
        p.arc_length.push_back(len);
        p.arc_diam.push_back(diam);
    }
    return p;
}

}  // namespace

TauPartition tau_partition(const TractDescriptor& t, double rho, int n_max) {
    if (!(rho >= 0.0)) throw std::invalid_argument("tau_partition: rho must be >= 0");
    if (n_max < 0 || n_max > 5000000)
        throw std::invalid_argument("tau_partition: n_max out of range");
    return build_partition(t, rho, 1.0, n_max);
}

BoundaryPartition as_boundary_partition(const TauPartition& p) {
    BoundaryPartition bp;
    bp.carrier = BoundaryPartition::Carrier::tract_boundary;
    for (std::size_t i = 0; i + 1 < p.vertices.size(); ++i) {
        PartitionInterval iv;
        iv.a = p.vertices[i];
        iv.b = p.vertices[i + 1];
        iv.length = p.arc_length[i];
        iv.diam = p.arc_diam[i];
        iv.tau_length = pi;
        bp.intervals.push_back(iv);
    }
    return bp;
}

TauPartition rescale_tau(const TauPartition& p, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("rescale_tau: lambda must be positive");
    int n_new = std::max(1, static_cast<int>(std::ceil(p.n_max * lambda - 1e-9)));
    return build_partition(p.tract, p.rho * lambda, p.lambda * lambda, n_new);
}

BoundaryPartition rescale_tau(const BoundaryPartition& p, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("rescale_tau: lambda must be positive");
    BoundaryPartition out = p;
    for (auto& iv : out.intervals)
        if (iv.tau_length) iv.tau_length = *iv.tau_length * lambda;
    return out;
}

MapSpec MapSpec::mobius(Point a, Point b, Point c, Point d) {
    if (std::abs(a * d - b * c) <= 1e-14 * std::max(1.0, std::abs(a * d) + std::abs(b * c)))
        throw std::invalid_argument("mobius: degenerate coefficients");
    MapSpec m;
    m.kind = Kind::mobius;
    m.ma = a;
    m.mb = b;
    m.mc = c;
    m.md = d;
    return m;
}

MapSpec MapSpec::sinh_map() {
    MapSpec m;
    m.kind = Kind::sinh_map;
    return m;
}

MapSpec MapSpec::power(double p) {
    if (p == 0.0) throw std::invalid_argument("power: zero exponent");
    MapSpec m;
    m.kind = Kind::power;
    m.p = p;
    return m;
}

MapSpec MapSpec::exp_map() {
    MapSpec m;
    m.kind = Kind::exp_map;
    return m;
}

MapSpec MapSpec::joukowski(Branch branch) {
    MapSpec m;
    m.kind = Kind::joukowski;
    m.branch = branch;
    return m;
}

MapSpec MapSpec::affine_stretch(double a, double b, double rho) {
    if (a == 0.0) throw std::invalid_argument("affine_stretch: a must be nonzero");
    MapSpec m;
    m.kind = Kind::affine_stretch;
    m.a = a;
    m.b = b;
    m.rho = rho;
    return m;
}

MapSpec MapSpec::stretch_interval(double rho, double A) {
    if (!(rho > 0.0)) throw std::invalid_argument("stretch_interval: rho must be positive");
    // fixes x = rho, sends x = 2 rho to A rho
    return affine_stretch(A - 1.0, (2.0 - A) * rho, rho);
}

Point map_eval(const MapSpec& m, Point z, bool inverse) {
    switch (m.kind) {
        case MapSpec::Kind::mobius: {
            Point num = inverse ? m.md * z - m.mb : m.ma * z + m.mb;
            Point den = inverse ? -m.mc * z + m.ma : m.mc * z + m.md;
            if (den == Point{0.0, 0.0}) throw std::domain_error("mobius: pole");
            return num / den;
        }
        case MapSpec::Kind::sinh_map:
            return inverse ? asinh_branch(z) : std::sinh(z);
        case MapSpec::Kind::power: {
            double p = inverse ? 1.0 / m.p : m.p;
            if (z == Point{0.0, 0.0}) {
                if (p > 0.0) return {0.0, 0.0};
                throw std::domain_error("power: zero with negative exponent");
            }
            if (!near_int(p) && z.imag() == 0.0 && z.real() < 0.0)
                throw std::domain_error("power: branch cut on the negative real axis");
            return std::exp(p * std::log(z));
        }
        case MapSpec::Kind::exp_map:
            if (inverse) {
                if (z == Point{0.0, 0.0}) throw std::domain_error("log: zero");
                return std::log(z);
            }
            return std::exp(z);
        case MapSpec::Kind::joukowski: {
            if (!inverse) {
                if (z == Point{0.0, 0.0}) throw std::domain_error("joukowski: pole at 0");
                return 0.5 * (z + 1.0 / z);
            }
            if (m.branch == MapSpec::Branch::principal)
                throw std::invalid_argument("joukowski inverse needs a branch tag");
            Point s = std::sqrt(z * z - 1.0);
            Point r1 = z + s, r2 = z - s;
            bool want_ext = m.branch == MapSpec::Branch::joukowski_exterior;
            if (std::abs(r1) >= std::abs(r2)) return want_ext ? r1 : r2;
            return want_ext ? r2 : r1;
        }
        case MapSpec::Kind::affine_stretch:
            if (m.a == 0.0) throw std::invalid_argument("affine_stretch: a must be nonzero");
            if (inverse) return {(z.real() - m.b) / m.a, z.imag()};
            return {m.a * z.real() + m.b, z.imag()};
    }
    throw std::logic_error("unreachable");
}

Point map_deriv(const MapSpec& m, Point z) {
    switch (m.kind) {
        case MapSpec::Kind::mobius: {
            Point den = m.mc * z + m.md;
            if (den == Point{0.0, 0.0}) throw std::domain_error("mobius: pole");
            return (m.ma * m.md - m.mb * m.mc) / (den * den);
        }
        case MapSpec::Kind::sinh_map:
            return std::cosh(z);
        case MapSpec::Kind::power:
            if (z == Point{0.0, 0.0}) {
                if (m.p == 1.0) return {1.0, 0.0};
                throw std::domain_error("power: derivative singular at 0");
            }
            return m.p * std::exp((m.p - 1.0) * std::log(z));
        case MapSpec::Kind::exp_map:
            return std::exp(z);
        case MapSpec::Kind::joukowski:
            if (z == Point{0.0, 0.0}) throw std::domain_error("joukowski: pole at 0");
            return 0.5 * (1.0 - 1.0 / (z * z));
        case MapSpec::Kind::affine_stretch:
            if (m.a != 1.0)
                throw std::invalid_argument("affine_stretch with a != 1 is not conformal");
            return {1.0, 0.0};
    }
    throw std::logic_error("unreachable");
}

namespace {

// Distance to the image of the unit circle under a mobius map: a circle or a
// line through three boundary images.
std::function<double(Point)> mobius_boundary_dist(const MapSpec& m) {
    std::vector<Point> pts;
    for (int k = 0; k < 16 && pts.size() < 3; ++k) {
        Point z = std::polar(1.0, 2.0 * pi * k / 16.0 + 0.05);
        if (std::abs(m.mc * z + m.md) < 1e-6) continue;
        pts.push_back(map_eval(m, z, false));
    }
    if (pts.size() < 3) throw std::invalid_argument("koebe_check: boundary image degenerate");
    Point u = pts[1] - pts[0], v = pts[2] - pts[0];
    double cross = u.real() * v.imag() - u.imag() * v.real();
    double scale = std::max({std::abs(u), std::abs(v), 1.0});
    if (std::abs(cross) <= 1e-9 * scale * scale) {
        Point p0 = pts[0], dir = u / std::abs(u);
        return [p0, dir](Point w) {
            Point d = w - p0;
            return std::abs(d.real() * dir.imag() - d.imag() * dir.real());
        };
    }
    // circumcenter of the three points
    double b2 = std::norm(u), c2 = std::norm(v);
    double cx = (v.imag() * b2 - u.imag() * c2) / (2.0 * cross);
    double cy = (u.real() * c2 - v.real() * b2) / (2.0 * cross);
    Point center = pts[0] + Point{cx, cy};
    double r0 = std::abs(pts[0] - center);
    return [center, r0](Point w) { return std::abs(r0 - std::abs(w - center)); };
}

}  // namespace

Report koebe_check(const MapSpec& m, const std::vector<Point>& samples,
                   const std::function<double(Point)>& boundary_dist) {
    std::function<double(Point)> bd = boundary_dist;
    if (!bd) {
        if (m.kind != MapSpec::Kind::mobius)
            throw std::invalid_argument("koebe_check: boundary_dist required for this map");
        bd = mobius_boundary_dist(m);
    }
    Report r;
    r.kind = "koebe";
    double worst_lo = std::numeric_limits<double>::infinity();
    double worst_hi = std::numeric_limits<double>::infinity();
    Point wit_lo{0, 0}, wit_hi{0, 0};
    for (Point z : samples) {
        if (!(std::abs(z) < 1.0)) throw std::domain_error("koebe_check: sample outside the disk");
        Point f = map_eval(m, z, false);
        double band = std::abs(map_deriv(m, z)) * (1.0 - std::norm(z));
        double d = bd(f);
        double lo = d / (0.25 * band);
        double hi = band / d;
        if (lo < worst_lo) worst_lo = lo, wit_lo = z;
        if (hi < worst_hi) worst_hi = hi, wit_hi = z;
    }
    r.note("samples=" + std::to_string(samples.size()));
    if (samples.empty()) return r;
    auto fmt = [](Point z) {
        return "z=(" + std::to_string(z.real()) + "," + std::to_string(z.imag()) + ")";
    };
    r.add("koebe-lower", worst_lo, worst_lo >= 1.0 - 1e-9, fmt(wit_lo));
    r.add("koebe-upper", worst_hi, worst_hi >= 1.0 - 1e-9, fmt(wit_hi));
    return r;
}

}  // namespace tractforge
