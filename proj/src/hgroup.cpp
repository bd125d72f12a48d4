#include "heiskak/hgroup.hpp"

#include <stdexcept>
#include <string>

namespace heiskak {

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string("non-finite coordinate: ") + what);
    }
}

}  // namespace

HPoint HPoint::make(double x, double y, double t) {
    require_finite(x, "x");
    require_finite(y, "y");
    require_finite(t, "t");
    return {x, y, t};
}

Vec3 Vec3::normalized() const {
    const double n = norm();
    if (n == 0.0) {
        throw std::invalid_argument("cannot normalize the zero vector");
    }
    return {x / n, y / n, z / n};
}

double euclidean_dist(const HPoint& p, const HPoint& q) {
    return (as_vec(p) - as_vec(q)).norm();
}

Angle::Angle(double radians) {
    require_finite(radians, "theta");
    constexpr double pi = std::numbers::pi;
    double th = std::fmod(radians, pi);
    if (th < 0.0) th += pi;
    if (th >= pi) th = 0.0;  // fmod rounding at the top end
    theta_ = th;
    cos_ = std::cos(th);
    sin_ = std::sin(th);
}

HPoint group_mul(const HPoint& p, const HPoint& q) {
    return {p.x + q.x, p.y + q.y, p.t + q.t + 0.5 * (p.x * q.y - p.y * q.x)};
}

HPoint group_inv(const HPoint& p) { return {-p.x, -p.y, -p.t}; }

double koranyi_norm(const HPoint& p) {
    const double z2 = p.x * p.x + p.y * p.y;
    return std::sqrt(std::sqrt(z2 * z2 + 16.0 * p.t * p.t));
}

double koranyi_dist(const HPoint& p, const HPoint& q) {
    return koranyi_norm(group_mul(group_inv(q), p));
}

HPoint dilate(double lambda, const HPoint& p) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("dilation factor must be positive and finite");
    }
    return {lambda * p.x, lambda * p.y, lambda * lambda * p.t};
}

VerticalSplit vertical_decompose(const Angle& theta, const HPoint& p) {
    const double c = theta.cos();
    const double s = theta.sin();
    const double lambda = p.x * c + p.y * s;
    const double mu = -p.x * s + p.y * c;
    return {
        HPoint{-mu * s, mu * c, p.t + 0.5 * lambda * mu},
        HPoint{lambda * c, lambda * s, 0.0},
    };
}

std::pair<double, double> project_to_chart(const Angle& theta, const HPoint& p) {
    const double lambda = p.x * theta.cos() + p.y * theta.sin();
    const double mu = -p.x * theta.sin() + p.y * theta.cos();
    return {mu, p.t + 0.5 * lambda * mu};
}

PlaneCoord plane_chart(const Angle& theta, const HPoint& w) {
    const double along = w.x * theta.cos() + w.y * theta.sin();
    if (std::abs(along) > 1e-9) {
        throw std::invalid_argument("point is not on the vertical plane V_theta^perp");
    }
    return {-w.x * theta.sin() + w.y * theta.cos(), w.t};
}

HPoint plane_chart_inverse(const Angle& theta, const PlaneCoord& c) {
    return {-c.mu * theta.sin(), c.mu * theta.cos(), c.s};
}

HPoint HomogeneousMap::apply(const HPoint& p) const {
    const HPoint moved = group_mul(shift, p);
    return {scale * moved.x, scale * moved.y, scale * scale * moved.t};
}

HPoint HomogeneousMap::apply_inverse(const HPoint& p) const {
    const double inv = 1.0 / scale;
    const HPoint undilated{inv * p.x, inv * p.y, inv * inv * p.t};
    return group_mul(group_inv(shift), undilated);
}

HomogeneousMap HomogeneousMap::after(const HomogeneousMap& inner) const {
    // D_s(g * D_s'(h * p)) = D_{s s'}((D_{1/s'}(g) * h) * p)
    const double inv = 1.0 / inner.scale;
    const HPoint g_pulled{inv * shift.x, inv * shift.y, inv * inv * shift.t};
    return {group_mul(g_pulled, inner.shift), scale * inner.scale};
}

bool HomogeneousMap::is_identity() const {
    return scale == 1.0 && shift.x == 0.0 && shift.y == 0.0 && shift.t == 0.0;
}

HomogeneousMap HomogeneousMap::dilation(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("dilation factor must be positive and finite");
    }
    return {HPoint{}, lambda};
}

}  // namespace heiskak
