#include "heiskak/xray.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "heiskak/parallel.hpp"

namespace heiskak {

namespace {

constexpr double kPi = std::numbers::pi;

// Everything needed to evaluate a placed family through its source balls.
struct Placed {
    HomogeneousMap inverse;
    double jacobian = 1.0;  // X_H(T# nu)(L) = jacobian * X_H nu(T^-1 L)
    double enclose = 1.0;   // T(B_E(c, r)) lies in B_E(T c, enclose * r)
    bool identity = true;
};

Placed placed_of(const WeightedBallFamily& nu) {
    const HomogeneousMap& m = nu.placement();
    Placed p;
    p.identity = m.is_identity();
    const double s = m.scale;
    p.inverse = HomogeneousMap{dilate(s, group_inv(m.shift)), 1.0 / s};
    p.jacobian = 1.0 / (s * s * s);
    // linear part of p -> D_s(g * p) is diag(s, s, s^2) (I + shear)
    p.enclose = std::max(s, s * s) * (1.0 + 0.5 * std::hypot(m.shift.x, m.shift.y));
    return p;
}

double ball_volume(double r) { return 4.0 / 3.0 * kPi * r * r * r; }

Line3 abc_line(double a, double b, double c) {
    return Line3{Vec3{b, 0.0, c}, Vec3{a, 1.0, 0.5 * b}.normalized()};
}

// X_H contribution of source ball i to the placed line whose source image is
// `src` (already mapped through the inverse placement).
double h_contribution(const WeightedBallFamily& nu, const Placed& pl, std::size_t i,
                      const HorizontalLine& src, const Line3& src3) {
    const double r = nu.radius();
    const double chord = chord_length(src3, Ball{nu.source_centers()[i], r});
    if (chord == 0.0) return 0.0;
    return nu.weights()[i] / ball_volume(r) * chord * src.koranyi_length_ratio() * pl.jacobian;
}

struct IndexRect {
    long i_lo, i_hi, j_lo, j_hi;
};

// Grid cells of V_theta^perp whose line can meet the Euclidean ball (c, R).
IndexRect chart_footprint(const Angle& theta, const HPoint& c, double R, const GridSpec& g) {
    const auto [mu, s] = project_to_chart(theta, c);
    const double lambda = c.x * theta.cos() + c.y * theta.sin();
    const double ds = R + 0.5 * (std::abs(lambda) + std::abs(mu)) * R + R * R;
    return {static_cast<long>(std::floor((mu - R) / g.cell_mu)),
            static_cast<long>(std::floor((mu + R) / g.cell_mu)),
            static_cast<long>(std::floor((s - ds) / g.cell_s)),
            static_cast<long>(std::floor((s + ds) / g.cell_s))};
}

// (b, c) cells of ell(a, ., .) that can meet the Euclidean ball (p, R).
IndexRect abc_footprint(double a, const HPoint& p, double R, double step) {
    const double k = std::sqrt(1.0 + a * a);
    const double b = p.x - a * p.y;
    const double c = p.t - 0.5 * b * p.y;
    const double db = R * k;
    const double dc = R + 0.5 * (std::abs(b) * R + std::abs(p.y) * R * k + R * R * k);
    return {static_cast<long>(std::floor((b - db) / step)),
            static_cast<long>(std::floor((b + db) / step)),
            static_cast<long>(std::floor((c - dc) / step)),
            static_cast<long>(std::floor((c + dc) / step))};
}

IndexRect merge(const std::vector<IndexRect>& rects) {
    IndexRect all{std::numeric_limits<long>::max(), std::numeric_limits<long>::min(),
                  std::numeric_limits<long>::max(), std::numeric_limits<long>::min()};
    for (const auto& r : rects) {
        all.i_lo = std::min(all.i_lo, r.i_lo);
        all.i_hi = std::max(all.i_hi, r.i_hi);
        all.j_lo = std::min(all.j_lo, r.j_lo);
        all.j_hi = std::max(all.j_hi, r.j_hi);
    }
    return all;
}

std::vector<IndexRect> chart_footprints(const WeightedBallFamily& nu, const Placed& pl,
                                        const Angle& theta, const GridSpec& g) {
    std::vector<IndexRect> rects;
    rects.reserve(nu.size());
    const double R = nu.radius() * pl.enclose;
    for (std::size_t i = 0; i < nu.size(); ++i) {
        rects.push_back(chart_footprint(theta, nu.center(i), R, g));
    }
    return rects;
}

// Dense grid of X_E(ell(a, b, c)) at (b, c) cell centres for one value of a.
struct AbcSlice {
    IndexRect box{};
    long n_c = 0;
    std::vector<double> value;
};

AbcSlice abc_slice(const WeightedBallFamily& nu, const Placed& pl, double a, double step) {
    const double R = nu.radius() * pl.enclose;
    std::vector<IndexRect> rects;
    rects.reserve(nu.size());
    for (std::size_t i = 0; i < nu.size(); ++i) {
        rects.push_back(abc_footprint(a, nu.center(i), R, step));
    }
    AbcSlice slice;
    slice.box = merge(rects);
    slice.n_c = slice.box.j_hi - slice.box.j_lo + 1;
    slice.value.assign(
        static_cast<std::size_t>((slice.box.i_hi - slice.box.i_lo + 1) * slice.n_c), 0.0);
    const double r = nu.radius();
    const double inv_vol = 1.0 / ball_volume(r);
    for (std::size_t k = 0; k < nu.size(); ++k) {
        const IndexRect& fr = rects[k];
        for (long i = fr.i_lo; i <= fr.i_hi; ++i) {
            const double b = (static_cast<double>(i) + 0.5) * step;
            for (long j = fr.j_lo; j <= fr.j_hi; ++j) {
                const double c = (static_cast<double>(j) + 0.5) * step;
                double v = 0.0;
                if (pl.identity) {
                    v = nu.weights()[k] * inv_vol *
                        chord_length(abc_line(a, b, c), Ball{nu.source_centers()[k], r});
                } else {
                    const HorizontalLine line = HorizontalLine::from_abc(a, b, c);
                    const HorizontalLine src = line.mapped(pl.inverse);
                    v = h_contribution(nu, pl, k, src, src.as_line3()) /
                        line.koranyi_length_ratio();
                }
                if (v == 0.0) continue;
                slice.value[static_cast<std::size_t>((i - slice.box.i_lo) * slice.n_c +
                                                     (j - slice.box.j_lo))] += v;
            }
        }
    }
    return slice;
}

struct ASlices {
    std::vector<double> nodes;
    double da = 0.0;
};

ASlices a_slices(double eps, double step) {
    if (!(eps > 0.0 && eps < 0.5 * kPi)) throw std::invalid_argument("eps must lie in (0, pi/2)");
    if (!(step > 0.0)) throw std::invalid_argument("abc step must be positive");
    const double a_max = 1.0 / std::tan(eps);
    const long n = std::max(1L, static_cast<long>(std::ceil(2.0 * a_max / step)));
    ASlices s;
    s.da = 2.0 * a_max / static_cast<double>(n);
    for (long k = 0; k < n; ++k) s.nodes.push_back(-a_max + (static_cast<double>(k) + 0.5) * s.da);
    return s;
}

}  // namespace

double chord_length(const Line3& line, const Ball& ball) {
    if (!(ball.radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
    const double d = line.distance_to(as_vec(ball.center));
    if (d >= ball.radius) return 0.0;
    return 2.0 * std::sqrt(ball.radius * ball.radius - d * d);
}

double chord_length(const HorizontalLine& line, const Ball& ball) {
    return chord_length(line.as_line3(), ball);
}

double xray_transform_h(const WeightedBallFamily& nu, const HorizontalLine& line) {
    const Placed pl = placed_of(nu);
    const HorizontalLine src = pl.identity ? line : line.mapped(pl.inverse);
    const Line3 src3 = src.as_line3();
    double total = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) total += h_contribution(nu, pl, i, src, src3);
    return total;
}

double xray_transform(const WeightedBallFamily& nu, const HorizontalLine& line) {
    return xray_transform_h(nu, line) / line.koranyi_length_ratio();
}

PlaneDensity xray_density(const WeightedBallFamily& nu, const Angle& theta, const GridSpec& grid,
                          int subsamples) {
    if (!(grid.cell_mu > 0.0 && grid.cell_s > 0.0)) {
        throw std::invalid_argument("grid cells must be positive");
    }
    if (subsamples < 1) throw std::invalid_argument("subsamples must be at least 1");
    PlaneDensity d;
    d.theta = theta;
    d.cell = grid;
    if (nu.empty()) return d;

    const Placed pl = placed_of(nu);
    const std::vector<IndexRect> rects = chart_footprints(nu, pl, theta, grid);
    const IndexRect box = merge(rects);
    d.i0 = box.i_lo;
    d.j0 = box.j_lo;
    d.n_mu = box.i_hi - box.i_lo + 1;
    d.n_s = box.j_hi - box.j_lo + 1;
    d.density.assign(static_cast<std::size_t>(d.n_mu * d.n_s), 0.0);

    const double m = static_cast<double>(subsamples);
    const double share = 1.0 / (m * m);
    for (std::size_t k = 0; k < nu.size(); ++k) {
        const IndexRect& fr = rects[k];
        for (long i = fr.i_lo; i <= fr.i_hi; ++i) {
            for (long j = fr.j_lo; j <= fr.j_hi; ++j) {
                double acc = 0.0;
                for (int a = 0; a < subsamples; ++a) {
                    const double mu = (static_cast<double>(i) + (a + 0.5) / m) * grid.cell_mu;
                    for (int b = 0; b < subsamples; ++b) {
                        const double s = (static_cast<double>(j) + (b + 0.5) / m) * grid.cell_s;
                        const HorizontalLine line = HorizontalLine::from_theta_w(theta, PlaneCoord{mu, s});
                        const HorizontalLine src = pl.identity ? line : line.mapped(pl.inverse);
                        acc += h_contribution(nu, pl, k, src, src.as_line3());
                    }
                }
                if (acc == 0.0) continue;
                d.density[static_cast<std::size_t>((i - d.i0) * d.n_s + (j - d.j0))] += acc * share;
            }
        }
    }
    return d;
}

XrayComparison xray_identity_check(const WeightedBallFamily& nu, double q,
                                   const EnergyOptions& opts) {
    if (!(q >= 1.0)) throw std::invalid_argument("q must be at least 1");
    XrayComparison out;
    if (nu.empty()) return out;
    out.lhs = sector_energy(nu, q, 0.0, kPi, opts);

    const ThetaRule rule = theta_rule(0.0, kPi, opts.n_theta);
    const GridSpec grid = opts.grid_for(nu);
    std::vector<double> per_theta(rule.nodes.size(), 0.0);
    parallel_for(rule.nodes.size(), [&](std::size_t k) {
        per_theta[k] = lq_norm(xray_density(nu, Angle(rule.nodes[k]), grid, opts.xray_subsamples), q);
    });
    for (std::size_t k = 0; k < per_theta.size(); ++k) out.rhs += rule.weights[k] * per_theta[k];
    return out;
}

XrayComparison xray_L3_comparison(const WeightedBallFamily& nu, double q, double eps,
                                  const EnergyOptions& opts, std::optional<double> abc_step) {
    if (!(q >= 1.0)) throw std::invalid_argument("q must be at least 1");
    XrayComparison out;
    if (nu.empty()) {
        a_slices(eps, 1.0);  // still reject a bad eps
        return out;
    }
    const double step = abc_step ? *abc_step : 0.5 * nu.delta() * nu.delta();
    const ASlices slices = a_slices(eps, step);
    out.lhs = sector_energy(nu, q, eps, kPi - eps, opts);

    const Placed pl = placed_of(nu);
    std::vector<double> per_slice(slices.nodes.size(), 0.0);
    parallel_for(slices.nodes.size(), [&](std::size_t k) {
        const AbcSlice s = abc_slice(nu, pl, slices.nodes[k], step);
        double acc = 0.0;
        for (double v : s.value) {
            if (v > 0.0) acc += std::pow(v, q);
        }
        per_slice[k] = acc;
    });
    const double cell = slices.da * step * step;
    for (double v : per_slice) out.rhs += v * cell;
    return out;
}

TranslationComparison translation_invariance_check(const WeightedBallFamily& nu, const HPoint& p,
                                                   double q, const EnergyOptions& opts) {
    TranslationComparison out;
    out.e1 = sector_energy(nu, q, 0.0, kPi, opts);
    out.e2 = sector_energy(nu.left_translated(p), q, 0.0, kPi, opts);
    return out;
}

EnergyOptions refined(const EnergyOptions& opts, const WeightedBallFamily& nu) {
    EnergyOptions r = opts;
    r.n_theta = opts.n_theta * 2;
    const GridSpec g = opts.grid_for(nu);
    r.grid = GridSpec{0.5 * g.cell_mu, 0.5 * g.cell_s};
    r.cell.reset();
    r.n_mc = opts.n_mc * 8;
    return r;
}

LineSampler LineSampler::h_measure(const WeightedBallFamily& nu, int n_theta,
                                   const GridSpec& grid) {
    LineSampler ls;
    ls.mode_ = Mode::HMeasure;
    if (nu.empty()) return ls;
    const ThetaRule rule = theta_rule(0.0, kPi, n_theta);
    const Placed pl = placed_of(nu);
    const double area = grid.cell_mu * grid.cell_s;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const Angle theta(rule.nodes[k]);
        const IndexRect box = merge(chart_footprints(nu, pl, theta, grid));
        for (long i = box.i_lo; i <= box.i_hi; ++i) {
            for (long j = box.j_lo; j <= box.j_hi; ++j) {
                const PlaneCoord w{(static_cast<double>(i) + 0.5) * grid.cell_mu,
                                   (static_cast<double>(j) + 0.5) * grid.cell_s};
                ls.samples_.push_back({HorizontalLine::from_theta_w(theta, w),
                                       rule.weights[k] * area});
            }
        }
    }
    return ls;
}

LineSampler LineSampler::abc(const WeightedBallFamily& nu, double eps, double step) {
    LineSampler ls;
    ls.mode_ = Mode::Abc;
    ls.eps_ = eps;
    const ASlices slices = a_slices(eps, step);
    if (nu.empty()) return ls;
    const Placed pl = placed_of(nu);
    const double R = nu.radius() * pl.enclose;
    const double weight = slices.da * step * step;
    for (double a : slices.nodes) {
        std::vector<IndexRect> rects;
        for (std::size_t i = 0; i < nu.size(); ++i) {
            rects.push_back(abc_footprint(a, nu.center(i), R, step));
        }
        const IndexRect box = merge(rects);
        for (long i = box.i_lo; i <= box.i_hi; ++i) {
            for (long j = box.j_lo; j <= box.j_hi; ++j) {
                ls.samples_.push_back({HorizontalLine::from_abc(a, (static_cast<double>(i) + 0.5) * step,
                                                                (static_cast<double>(j) + 0.5) * step),
                                       weight});
            }
        }
    }
    return ls;
}

void LineSampler::write_csv(std::ostream& out, const WeightedBallFamily& nu) const {
    std::ostringstream buf;
    buf << std::setprecision(17);
    if (mode_ == Mode::HMeasure) {
        buf << "theta,w_mu,w_s,xray_value\n";
        for (const auto& s : samples_) {
            buf << s.line.theta().radians() << ',' << s.line.w().mu << ',' << s.line.w().s << ','
                << xray_transform_h(nu, s.line) << '\n';
        }
    } else {
        buf << "a,b,c,xray_value\n";
        for (const auto& s : samples_) {
            const Vec3 p = *s.line.abc();
            buf << p.x << ',' << p.y << ',' << p.z << ',' << xray_transform(nu, s.line) << '\n';
        }
    }
    out << buf.str();
}

}  // namespace heiskak
