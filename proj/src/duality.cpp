#include "heiskak/duality.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "heiskak/rng.hpp"

namespace heiskak {

double Line3::distance_to(const Vec3& p) const {
    const Vec3 rel = p - anchor;
    const Vec3 perp = rel - direction * rel.dot(direction);
    return perp.norm();
}

Vec3 light_ray(double y) { return {1.0, -y, 0.5 * y * y}; }

Vec3 cone_normal(double y) {
    // gradient of eta_2^2 - 2 eta_1 eta_3 at light_ray(y), up to sign
    return Vec3{y * y, 2.0 * y, 2.0}.normalized();
}

HorizontalLine HorizontalLine::from_abc(double a, double b, double c) {
    // direction in the z-plane is (a, 1); the point at s = 0 is (b, 0, c)
    const Angle theta(std::atan2(1.0, a));
    const auto [mu, s] = project_to_chart(theta, HPoint{b, 0.0, c});
    return HorizontalLine(theta, PlaneCoord{mu, s});
}

HorizontalLine HorizontalLine::from_theta_w(const Angle& theta, const PlaneCoord& w) {
    return HorizontalLine(theta, w);
}

std::optional<Vec3> HorizontalLine::abc() const {
    const double sn = theta_.sin();
    if (sn == 0.0) return std::nullopt;
    const double cs = theta_.cos();
    // walk along the line to its y = 0 crossing
    const double lambda = -w_.mu * cs / sn;
    const HPoint at_y0 = point_at(lambda);
    return Vec3{cs / sn, at_y0.x, at_y0.t};
}

HPoint HorizontalLine::point_at(double lambda) const {
    const HPoint w = w_point();
    return {w.x + lambda * theta_.cos(), w.y + lambda * theta_.sin(),
            w.t - 0.5 * lambda * w_.mu};
}

Vec3 HorizontalLine::tangent() const { return {theta_.cos(), theta_.sin(), -0.5 * w_.mu}; }

Line3 HorizontalLine::as_line3() const {
    return Line3{as_vec(w_point()), tangent().normalized()};
}

double HorizontalLine::koranyi_length_ratio() const {
    return 1.0 / std::sqrt(1.0 + 0.25 * w_.mu * w_.mu);
}

HorizontalLine HorizontalLine::left_translated(const HPoint& g) const {
    const HPoint moved = group_mul(g, w_point());
    const auto [mu, s] = project_to_chart(theta_, moved);
    return HorizontalLine(theta_, PlaneCoord{mu, s});
}

HorizontalLine HorizontalLine::mapped(const HomogeneousMap& m) const {
    const HPoint moved = m.apply(w_point());
    const auto [mu, s] = project_to_chart(theta_, moved);
    return HorizontalLine(theta_, PlaneCoord{mu, s});
}

Line3 dual_line(const HPoint& p) {
    return Line3{Vec3{0.0, p.x, p.t - 0.5 * p.x * p.y}, light_ray(p.y).normalized()};
}

HorizontalLine dual_point_line(const Vec3& p) { return HorizontalLine::from_abc(p.x, p.y, p.z); }

double distance_to_dual_line(const Vec3& p, const HPoint& q) {
    // ell(a, b, c) passes through (b, 0, c) with direction (a, 1, b/2)
    const Line3 line{Vec3{p.y, 0.0, p.z}, Vec3{p.x, 1.0, 0.5 * p.y}.normalized()};
    return line.distance_to(as_vec(q));
}

IncidencePair incidence_check(const Vec3& p, const HPoint& p_star, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("incidence tolerance must be positive");
    return {dual_line(p_star).distance_to(p) <= tol, distance_to_dual_line(p, p_star) <= tol};
}

bool dual_tube_membership(const Vec3& x, const Ball& ball) {
    if (!(ball.radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
    if (x.dot(x) > 1.0) return false;
    return distance_to_dual_line(x, ball.center) <= ball.radius;
}

double dual_tube_radius_bound(const HPoint& c, double r) {
    const double ax = std::abs(c.x);
    const double ay = std::abs(c.y);
    const double eta2 = 2.0 * r;
    const double eta3 = r * (1.0 + 0.5 * (ay + r + ax) + 0.5 * (2.0 * ay + r));
    return std::sqrt(eta2 * eta2 + eta3 * eta3);
}

TubeConstants tube_constant_probe(const HPoint& p_star, double delta, int n_samples,
                                  std::uint64_t seed) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    if (n_samples < 1) throw std::invalid_argument("n_samples must be positive");

    Rng rng(seed);
    const Line3 axis = dual_line(p_star);
    const Vec3 ray = light_ray(p_star.y);
    TubeConstants out;

    // The smallest radius R with x in ell*(B_E(p*, R)) is dist(p*, ell(x)),
    // and the supremum over N_delta is approached on its boundary sphere.
    for (int i = 0; i < n_samples; ++i) {
        const double lambda = rng.uniform(-100.0, 100.0);
        const Vec3 x = axis.anchor + ray * lambda + rng.on_unit_sphere() * delta;
        out.c1 = std::max(out.c1, distance_to_dual_line(x, p_star) / delta);
    }

    for (int i = 0; i < n_samples; ++i) {
        const HPoint q = as_hpoint(as_vec(p_star) + rng.on_unit_sphere() * delta);
        const Line3 ray_q = dual_line(q);
        Vec3 x;
        do {
            // eta_1 = lambda along the unnormalized ray, so |lambda| <= 100 is necessary
            const double lambda = rng.uniform(-100.0, 100.0);
            x = ray_q.anchor + light_ray(q.y) * lambda;
        } while (x.dot(x) > 100.0 * 100.0);
        out.c2 = std::max(out.c2, axis.distance_to(x) / delta);
    }
    return out;
}

}  // namespace heiskak
