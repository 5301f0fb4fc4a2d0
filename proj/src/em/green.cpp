// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <map>
#include <mutex>

#include "vsie/em.hpp"

namespace vsie::em {

Frequency::Frequency(double hz) : hz_(hz) {
    if (!(hz > 0.0) || !std::isfinite(hz)) throw ArgumentError("frequency must be positive");
    omega_ = 2.0 * kPi * hz;
    k0_ = omega_ * std::sqrt(kMu0 * kEps0);
}

cplx green_scalar(const Vec3& r, const Vec3& rp, double k0) {
    const double R = (r - rp).norm();
    if (R == 0.0) throw SingularityError("green_scalar: coincident points");
    return std::exp(cplx(0.0, -k0 * R)) / (4.0 * kPi * R);
}

Dyad green_hessian(const Vec3& d, double k0) {
    const double R = d.norm();
    if (R == 0.0) throw SingularityError("green_hessian: coincident points");
    const cplx g = std::exp(cplx(0.0, -k0 * R)) / (4.0 * kPi * R);
    const cplx ik(0.0, k0);
    const cplx diag = -(ik / R + 1.0 / (R * R));
    const cplx rr = -k0 * k0 + 3.0 * ik / R + 3.0 / (R * R);
    const Vec3 rh = d / R;
    Dyad h = rr * (rh * rh.transpose()).cast<cplx>();
    h.diagonal().array() += diag;
    return g * h;
}

Dyad green_dyad(const Vec3& d, double k0) {
    Dyad h = green_hessian(d, k0);
    const cplx g = std::exp(cplx(0.0, -k0 * d.norm())) / (4.0 * kPi * d.norm());
    h.diagonal().array() += k0 * k0 * g;
    return h;
}

Rect rect_of(const Patch& p) { return {p.center, p.t, p.b, 0.5 * p.length, 0.5 * p.width}; }

namespace {

// x * ln(y + sqrt(x^2 + y^2 + h^2)) with the 0 * ln 0 limit and a
// cancellation-free form for negative y.
double xlog(double x, double y, double rr, double R) {
    if (x == 0.0) return 0.0;
    double arg;
    if (y >= 0.0) {
        arg = y + R;
    } else {
        const double s = rr - y * y;  // x^2 + h^2
        if (s <= 0.0) return 0.0;
        arg = s / (R - y);
    }
    if (arg <= 0.0) return 0.0;
    return x * std::log(arg);
}

double corner(double u, double v, double h) {
    const double rr = u * u + v * v + h * h;
    const double R = std::sqrt(rr);
    if (R == 0.0) return 0.0;
    double f = xlog(u, v, rr, R) + xlog(v, u, rr, R);
    if (h != 0.0) f -= h * std::atan(u * v / (h * R));
    return f;
}

}  // namespace

double rect_static_potential(const Vec3& p, const Rect& r) {
    const Vec3 d = p - r.center;
    const double u0 = d.dot(r.eu);
    const double v0 = d.dot(r.ev);
    const double h = std::abs(d.dot(r.eu.cross(r.ev)));
    const double u1 = -r.hu - u0;
    const double u2 = r.hu - u0;
    const double v1 = -r.hv - v0;
    const double v2 = r.hv - v0;
    const double i = corner(u2, v2, h) - corner(u1, v2, h) - corner(u2, v1, h) + corner(u1, v1, h);
    return i / (4.0 * kPi);
}

cplx rect_mean_green(const Vec3& p, const Rect& r, double k0, int order) {
    const double area = r.area();
    cplx smooth = 0.0;
    if (k0 != 0.0) {
        const Rule1D q = gauss_legendre(order);
        for (std::size_t a = 0; a < q.x.size(); ++a)
            for (std::size_t b = 0; b < q.x.size(); ++b) {
                const Vec3 s = r.center + q.x[a] * r.hu * r.eu + q.x[b] * r.hv * r.ev;
                const double R = (p - s).norm();
                // (e^{-ikR} - 1) / R, smooth at R = 0
                const cplx f = R < 1e-12 / k0 ? cplx(0.0, -k0) : (std::exp(cplx(0.0, -k0 * R)) - 1.0) / R;
                smooth += q.w[a] * q.w[b] * f;
            }
        smooth *= 0.25 / (4.0 * kPi);  // weights integrate to 4 on the reference square
    }
    return rect_static_potential(p, r) / area + smooth;
}

Rule1D gauss_legendre(int n) {
    if (n < 1) throw ArgumentError("gauss_legendre: order must be >= 1");
    static std::mutex mu;
    static std::map<int, Rule1D> cache;
    {
        std::lock_guard lock(mu);
        if (auto it = cache.find(n); it != cache.end()) return it->second;
    }
    Rule1D rule;
    rule.x.resize(static_cast<std::size_t>(n));
    rule.w.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.x[static_cast<std::size_t>(i)] = x;
        rule.w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    std::lock_guard lock(mu);
    cache.emplace(n, rule);
    return rule;
}

std::vector<WeightedPoint> patch_points(const Patch& p, PatchRule rule) {
    if (rule == PatchRule::Centroid) return {{p.center, 1.0}};
    // Degree-3 five-point rule on the square: centre plus (+-c, +-c), c^2 = 3/5.
    const double c = std::sqrt(0.6);
    const Vec3 du = 0.5 * p.length * p.t;
    const Vec3 dv = 0.5 * p.width * p.b;
    std::vector<WeightedPoint> pts;
    pts.reserve(5);
    pts.push_back({p.center, 4.0 / 9.0});
    for (int su : {-1, 1})
        for (int sv : {-1, 1}) pts.push_back({p.center + c * (su * du + sv * dv), 5.0 / 36.0});
    return pts;
}

std::vector<WeightedPoint> voxel_points(const Vec3& center, double spacing, VoxelRule rule) {
    if (rule == VoxelRule::Center) return {{center, 1.0}};
    const double a = 0.5 * spacing / std::sqrt(3.0);
    std::vector<WeightedPoint> pts;
    pts.reserve(8);
    for (int sz : {-1, 1})
        for (int sy : {-1, 1})
            for (int sx : {-1, 1}) pts.push_back({center + a * Vec3(sx, sy, sz), 0.125});
    return pts;
}

}  // namespace vsie::em
