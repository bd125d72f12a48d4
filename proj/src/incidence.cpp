#include "heiskak/incidence.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "heiskak/parallel.hpp"

namespace heiskak {

namespace {

// witness planes from the arrangement sit exactly on |n . u| = band
constexpr double kBandSlack = 1e-12;
// a plane holding exactly half the weight makes x narrow; equal weights that
// sum to half must not turn broad through rounding
constexpr double kHalfSlack = 1e-12;

// Members merged by direction; sorted by (y, index) so results do not depend
// on member order.
struct DirGroup {
    double y = 0.0;
    double weight = 0.0;
    Vec3 u;
};

std::vector<DirGroup> group_directions(const IncidenceSet& s) {
    std::vector<IncidenceMember> m = s.members;
    std::sort(m.begin(), m.end(), [](const IncidenceMember& a, const IncidenceMember& b) {
        return a.y != b.y ? a.y < b.y : a.index < b.index;
    });
    std::vector<DirGroup> out;
    for (const auto& mem : m) {
        if (!out.empty() && out.back().y == mem.y) {
            out.back().weight += mem.weight;
        } else {
            out.push_back({mem.y, mem.weight, light_ray(mem.y).normalized()});
        }
    }
    return out;
}

double group_total(const std::vector<DirGroup>& g) {
    double w = 0.0;
    for (const auto& d : g) w += d.weight;
    return w;
}

double captured(const std::vector<DirGroup>& g, const Vec3& n, double band) {
    double w = 0.0;
    for (const auto& d : g) {
        if (std::abs(n.dot(d.u)) <= band) w += d.weight;
    }
    return w;
}

Vec3 any_orthogonal(const Vec3& u) {
    const Vec3 pick = std::abs(u.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    return u.cross(pick).normalized();
}


}  // namespace

bool ConeCap::contains(double y) const { return std::abs(y - y_center) <= y_halfwidth; }

std::vector<ConeCap> cone_cap_cover(double rho, double y_lo, double y_hi) {
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in (0, 1)");
    if (!(y_lo < y_hi)) throw std::invalid_argument("empty y range");
    const auto n = static_cast<long>(std::ceil((y_hi - y_lo) / rho - 1e-12));
    std::vector<ConeCap> caps;
    for (long k = 0; k < n; ++k) {
        const double yc = y_lo + (static_cast<double>(k) + 0.5) * rho;
        caps.push_back({yc, 0.5 * rho, light_ray(yc).normalized()});
    }
    return caps;
}

std::size_t cap_of(const std::vector<ConeCap>& caps, double y) {
    if (caps.empty()) throw std::invalid_argument("no caps");
    const double rho = 2.0 * caps.front().y_halfwidth;
    const double lo = caps.front().y_center - caps.front().y_halfwidth;
    const long k = static_cast<long>(std::floor((y - lo) / rho));
    return static_cast<std::size_t>(std::clamp(k, 0L, static_cast<long>(caps.size()) - 1));
}

double IncidenceSet::total_weight() const {
    double w = 0.0;
    for (double c : by_cap) w += c;
    return w;
}

IncidenceSet make_incidence_set(const Vec3& x, std::vector<IncidenceMember> members,
                                const std::vector<ConeCap>& caps) {
    IncidenceSet s;
    s.x = x;
    s.members = std::move(members);
    s.by_cap.assign(caps.size(), 0.0);
    for (const auto& c : caps) s.cap_centers.push_back(c.y_center);
    for (const auto& m : s.members) s.by_cap[cap_of(caps, m.y)] += m.weight;
    return s;
}

IncidenceSet incidence_set(const Vec3& x, const WeightedBallFamily& nu,
                           const std::vector<ConeCap>& caps) {
    if (x.dot(x) > 1.0) throw std::invalid_argument("sample point outside B_E(0, 1)");
    if (!nu.placement().is_identity()) {
        throw std::invalid_argument("incidence sets need an unplaced family");
    }
    const double r2 = 2.0 * nu.radius();
    std::vector<IncidenceMember> members;
    for (std::size_t i = 0; i < nu.size(); ++i) {
        const HPoint& c = nu.source_centers()[i];
        if (distance_to_dual_line(x, c) <= r2) members.push_back({i, nu.weights()[i], c.y});
    }
    return make_incidence_set(x, std::move(members), caps);
}

double captured_weight(const IncidenceSet& s, const Vec3& normal, double band) {
    double w = 0.0;
    for (const auto& m : s.members) {
        if (std::abs(normal.dot(light_ray(m.y).normalized())) <= band + kBandSlack) w += m.weight;
    }
    return w;
}

Classification classify_broad_narrow(const IncidenceSet& s, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
    const std::vector<DirGroup> g = group_directions(s);
    const double total = group_total(g);
    if (g.empty() || total <= 0.0) return Narrow{{0.0, 0.0, 1.0}, 0.0};
    const double half = 0.5 * total * (1.0 - kHalfSlack);
    const double band = rho * rho;
    const double test_band = band + kBandSlack;

    Vec3 best_n = any_orthogonal(g.front().u);
    double best = captured(g, best_n, test_band);
    auto consider = [&](const Vec3& n) {
        const double w = captured(g, n, test_band);
        if (w > best) {
            best = w;
            best_n = n;
        }
    };

    // quick exit: the plane through the two heaviest directions
    if (g.size() >= 2) {
        std::vector<std::size_t> order(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) order[i] = i;
        std::partial_sort(order.begin(), order.begin() + 2, order.end(),
                          [&](std::size_t a, std::size_t b) { return g[a].weight > g[b].weight; });
        consider(g[order[0]].u.cross(g[order[1]].u).normalized());
    }
    if (best >= half) return Narrow{best_n, best};

    // planes from occupied caps: pairs of cap directions and cone tangent planes
    std::vector<double> cap_y;
    for (std::size_t k = 0; k < s.by_cap.size() && k < s.cap_centers.size(); ++k) {
        if (s.by_cap[k] > 0.0) cap_y.push_back(s.cap_centers[k]);
    }
    for (std::size_t a = 0; a < cap_y.size(); ++a) {
        consider(cone_normal(cap_y[a]));
        for (std::size_t b = a + 1; b < cap_y.size(); ++b) {
            consider(light_ray(cap_y[a]).cross(light_ray(cap_y[b])).normalized());
        }
    }

    for (std::size_t a = 0; a < g.size(); ++a) {
        const Vec3& ua = g[a].u;
        consider(cone_normal(g[a].y));
        // a point of the circle n . u_a = band
        consider(ua * band + any_orthogonal(ua) * std::sqrt(std::max(0.0, 1.0 - band * band)));
        for (std::size_t b = a + 1; b < g.size(); ++b) {
            const Vec3& ub = g[b].u;
            const Vec3 cr = ua.cross(ub);
            const double cr2 = cr.dot(cr);
            if (cr2 < 1e-24) continue;
            consider(cr * (1.0 / std::sqrt(cr2)));
            const double c = ua.dot(ub);
            const double det = 1.0 - c * c;
            for (double sa : {-1.0, 1.0}) {
                for (double sb : {-1.0, 1.0}) {
                    // n = alpha u_a + beta u_b + gamma (u_a x u_b)
                    const double ra = sa * band, rb = sb * band;
                    const double alpha = (ra - c * rb) / det;
                    const double beta = (rb - c * ra) / det;
                    const double n0 = alpha * ra + beta * rb;
                    if (n0 > 1.0) continue;
                    const double gamma = std::sqrt((1.0 - n0) / cr2);
                    const Vec3 base = ua * alpha + ub * beta;
                    consider(base + cr * gamma);
                    consider(base - cr * gamma);
                }
            }
        }
    }
    if (best >= half) return Narrow{best_n, best};
    return Broad{best};
}

OracleVerdict sphere_grid_oracle(const IncidenceSet& s, double rho, int k, int max_depth) {
    if (k < 1) throw std::invalid_argument("grid size must be positive");
    const std::vector<DirGroup> g = group_directions(s);
    const double total = group_total(g);
    if (g.empty() || total <= 0.0) return OracleVerdict::Narrow;
    const double half = 0.5 * total * (1.0 - kHalfSlack);
    const double band = rho * rho;

    auto face_point = [](int face, double u, double v) {
        switch (face) {
            case 0: return Vec3{1.0, u, v}.normalized();
            case 1: return Vec3{u, 1.0, v}.normalized();
            default: return Vec3{u, v, 1.0}.normalized();
        }
    };
    struct Cell {
        int face;
        double u0, v0, size;
        int depth;
    };
    // normals n and -n give the same plane, so three faces cover all planes
    std::vector<Cell> stack;
    const double step = 2.0 / k;
    for (int face = 0; face < 3; ++face) {
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) stack.push_back({face, -1.0 + i * step, -1.0 + j * step, step, 0});
        }
    }
    bool undetermined = false;
    while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        const Vec3 n = face_point(c.face, c.u0 + 0.5 * c.size, c.v0 + 0.5 * c.size);
        if (captured(g, n, band) >= half) return OracleVerdict::Narrow;
        // geodesic cells: the farthest point from the centre is a corner
        double h = 0.0;
        for (double du : {0.0, c.size}) {
            for (double dv : {0.0, c.size}) {
                h = std::max(h, (face_point(c.face, c.u0 + du, c.v0 + dv) - n).norm());
            }
        }
        if (captured(g, n, band + h) < half) continue;
        if (c.depth >= max_depth) {
            undetermined = true;
            continue;
        }
        const double hs = 0.5 * c.size;
        for (double du : {0.0, hs}) {
            for (double dv : {0.0, hs}) stack.push_back({c.face, c.u0 + du, c.v0 + dv, hs, c.depth + 1});
        }
    }
    return undetermined ? OracleVerdict::Undetermined : OracleVerdict::Broad;
}

double trilinear_wedge_sum(const IncidenceSet& s) {
    const std::vector<DirGroup> g = group_directions(s);
    double sum = 0.0;
    for (std::size_t a = 0; a < g.size(); ++a) {
        for (std::size_t b = a + 1; b < g.size(); ++b) {
            const Vec3 cr = g[a].u.cross(g[b].u);
            const double wab = g[a].weight * g[b].weight;
            for (std::size_t c = b + 1; c < g.size(); ++c) {
                sum += wab * g[c].weight * std::abs(cr.dot(g[c].u));
            }
        }
    }
    // each unordered triple of distinct directions appears 3! times
    return 6.0 * sum;
}

BoundCheck broad_bound_check(const IncidenceSet& s, double rho) {
    if (is_narrow(classify_broad_narrow(s, rho))) {
        throw std::invalid_argument("broad bound requested at a narrow point");
    }
    return {s.total_weight(), std::pow(rho, -4.0) * std::cbrt(trilinear_wedge_sum(s))};
}

BoundCheck narrow_decomposition_check(const IncidenceSet& s, double rho, double q) {
    if (!(q >= 1.0)) throw std::invalid_argument("q must be at least 1");
    if (!is_narrow(classify_broad_narrow(s, rho))) {
        throw std::invalid_argument("narrow bound requested at a broad point");
    }
    double acc = 0.0;
    for (double w : s.by_cap) {
        if (w > 0.0) acc += std::pow(w, q);
    }
    return {s.total_weight(), std::pow(acc, 1.0 / q)};
}

bool Plank::contains(const Vec3& p, double margin) const {
    const Vec3 d = p - center;
    return std::abs(d.dot(e1)) <= h1 - margin && std::abs(d.dot(e2)) <= h2 - margin &&
           std::abs(d.dot(e3)) <= h3 - margin;
}

bool Plank::contains_tube(const HPoint& c, double r) const {
    const Line3 axis = dual_line(c);
    const Vec3 ray = light_ray(c.y);
    const double R = dual_tube_radius_bound(c, r);
    return contains(axis.anchor + ray, R) && contains(axis.anchor - ray, R);
}

namespace {

struct CapFrame {
    Vec3 e1, e2, e3;
};

CapFrame cap_frame(const ConeCap& cap) {
    const Vec3 e1 = cap.direction;
    const Vec3 e3 = cone_normal(cap.y_center);
    return {e1, e3.cross(e1).normalized(), e3};
}

// max over |y - yc| <= hw of |light_ray(y) . e|, a quadratic in y
double max_ray_component(const ConeCap& cap, const Vec3& e) {
    auto f = [&](double y) { return std::abs(light_ray(y).dot(e)); };
    const double lo = cap.y_center - cap.y_halfwidth, hi = cap.y_center + cap.y_halfwidth;
    double m = std::max(f(lo), f(hi));
    if (e.z != 0.0) {
        const double v = e.y / e.z;
        if (v > lo && v < hi) m = std::max(m, f(v));
    }
    return m;
}

}  // namespace

PlankWidths plank_widths(const ConeCap& cap, double r) {
    const CapFrame f = cap_frame(cap);
    // tube thickness for a centre with |x|, |y| <= 1
    const double R = dual_tube_radius_bound(HPoint{1.0, 1.0, 0.0}, r);
    return {2.0 * max_ray_component(cap, f.e2) + 2.0 * R,
            2.0 * max_ray_component(cap, f.e3) + 2.0 * R};
}

std::vector<PlankAssignment> plank_cover_and_assign(const WeightedBallFamily& nu,
                                                    const std::vector<ConeCap>& caps,
                                                    std::size_t cap_index) {
    if (cap_index >= caps.size()) throw std::out_of_range("cap index out of range");
    if (!nu.placement().is_identity()) {
        throw std::invalid_argument("plank assignment needs an unplaced family");
    }
    const ConeCap& cap = caps[cap_index];
    const CapFrame f = cap_frame(cap);
    const double r2 = 2.0 * nu.radius();
    const PlankWidths w = plank_widths(cap, r2);
    const double R_max = dual_tube_radius_bound(HPoint{1.0, 1.0, 0.0}, r2);
    const double h1 = 3.0 + R_max;

    std::map<std::pair<long, long>, std::vector<std::size_t>> bins;
    for (std::size_t i = 0; i < nu.size(); ++i) {
        const HPoint& c = nu.source_centers()[i];
        if (!cap.contains(c.y)) continue;
        const Line3 axis = dual_line(c);
        const Vec3 ray = light_ray(c.y);
        const Vec3 p = axis.anchor + ray, m = axis.anchor - ray;
        const double R = dual_tube_radius_bound(c, r2);
        auto range = [&](const Vec3& e, double width) {
            const double a = p.dot(e), b = m.dot(e);
            const double lo = std::min(a, b) - R, hi = std::max(a, b) + R;
            // windows [k W - W, k W + W] containing [lo, hi]
            return std::pair<long, long>{static_cast<long>(std::ceil((hi - width) / width)),
                                         static_cast<long>(std::floor((lo + width) / width))};
        };
        const auto [a2, b2] = range(f.e2, w.w2);
        const auto [a3, b3] = range(f.e3, w.w3);
        for (long k2 = a2; k2 <= b2; ++k2) {
            for (long k3 = a3; k3 <= b3; ++k3) bins[{k2, k3}].push_back(i);
        }
    }

    std::vector<PlankAssignment> out;
    for (auto& [key, members] : bins) {
        Plank pl;
        pl.cap = cap_index;
        pl.e1 = f.e1;
        pl.e2 = f.e2;
        pl.e3 = f.e3;
        pl.center = f.e2 * (static_cast<double>(key.first) * w.w2) +
                    f.e3 * (static_cast<double>(key.second) * w.w3);
        pl.h1 = h1;
        pl.h2 = w.w2;
        pl.h3 = w.w3;
        std::vector<std::size_t> kept;
        for (std::size_t i : members) {
            if (pl.contains_tube(nu.source_centers()[i], r2)) kept.push_back(i);
        }
        if (!kept.empty()) out.push_back({pl, std::move(kept)});
    }
    return out;
}

CellMeasure cell_measure(const WeightedBallFamily& nu, const PlankAssignment& assignment) {
    const auto& idx = assignment.members;
    if (idx.empty()) throw std::invalid_argument("empty plank assignment");
    CellMeasure cell;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i : idx) {
        double far = 0.0;
        for (std::size_t j : idx) far = std::max(far, koranyi_dist(nu.center(j), nu.center(i)));
        if (far < best) {
            best = far;
            cell.representative = i;
        }
    }
    cell.center = nu.center(cell.representative);
    cell.koranyi_radius = best;
    cell.family = nu.subfamily(idx, 2.0);
    return cell;
}

WeightedBallFamily rescale_cell(const CellMeasure& cell, double rho) {
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in (0, 1)");
    return cell.family.left_translated(group_inv(cell.center)).dilated(1.0 / rho);
}

bool DecompositionReport::broad_gate() const {
    return broad_part <= std::pow(10.0, q) * std::pow(rho, -4.0 * q) * wedge_integral * (1 + 1e-9);
}

bool DecompositionReport::narrow_gate() const {
    return narrow_part <= std::pow(4.0, q) * std::pow(8.0, q - 1.0) * plank_sum * (1 + 1e-9);
}

DecompositionReport energy_decomposition_check(const WeightedBallFamily& nu, double rho,
                                               const DecompositionOptions& opts) {
    if (!(opts.q >= 1.0)) throw std::invalid_argument("q must be at least 1");
    const std::vector<ConeCap> caps = cone_cap_cover(rho, opts.y_lo, opts.y_hi);
    const double h = opts.spacing ? *opts.spacing : 0.5 * nu.delta() * nu.delta();
    if (!(h > 0.0)) throw std::invalid_argument("grid spacing must be positive");

    // planks of every cap, and for each ball the planks it was assigned to
    std::vector<Plank> planks;
    std::vector<std::vector<std::size_t>> planks_of_ball(nu.size());
    std::vector<std::vector<std::size_t>> planks_of_cap(caps.size());
    for (std::size_t k = 0; k < caps.size(); ++k) {
        for (auto& a : plank_cover_and_assign(nu, caps, k)) {
            const std::size_t id = planks.size();
            planks.push_back(a.plank);
            planks_of_cap[k].push_back(id);
            for (std::size_t i : a.members) planks_of_ball[i].push_back(id);
        }
    }

    DecompositionReport rep;
    rep.rho = rho;
    rep.q = opts.q;
    rep.spacing = h;
    rep.n_planks = planks.size();
    const double q = opts.q;
    const double cell = h * h * h;
    const long n = static_cast<long>(std::floor(1.0 / h));

    struct Partial {
        std::size_t n_points = 0, n_broad = 0, n_narrow = 0, max_mult = 0;
        double total = 0, broad = 0, narrow = 0, wedge = 0, tube = 0, cap_sum = 0,
               plank_sum = 0, broad_c = 0, narrow_c = 0;
        std::vector<PointRecord> points;
    };
    const std::size_t n_slices = static_cast<std::size_t>(2 * n + 1);
    std::vector<Partial> parts(n_slices);
    parallel_for(n_slices, [&](std::size_t slice) {
        Partial& p = parts[slice];
        const double x1 = static_cast<double>(static_cast<long>(slice) - n) * h;
        std::vector<double> plank_weight(planks.size(), 0.0);
        std::vector<std::size_t> touched;
        for (long j = -n; j <= n; ++j) {
            for (long k = -n; k <= n; ++k) {
                const Vec3 x{x1, static_cast<double>(j) * h, static_cast<double>(k) * h};
                if (x.dot(x) > 1.0) continue;
                ++p.n_points;
                const IncidenceSet s = incidence_set(x, nu, caps);
                const double F = s.total_weight();
                for (const auto& pl_ids : planks_of_cap) {
                    std::size_t mult = 0;
                    for (std::size_t id : pl_ids) mult += planks[id].contains(x) ? 1 : 0;
                    p.max_mult = std::max(p.max_mult, mult);
                }
                PointRecord rec{x, false, F, 0.0};
                if (F > 0.0) {
                    const double Fq = std::pow(F, q);
                    p.total += Fq * cell;
                    p.tube += F * cell;
                    for (double w : s.by_cap) {
                        if (w > 0.0) p.cap_sum += std::pow(w, q) * cell;
                    }
                    for (const auto& m : s.members) {
                        for (std::size_t id : planks_of_ball[m.index]) {
                            if (plank_weight[id] == 0.0) touched.push_back(id);
                            plank_weight[id] += m.weight;
                        }
                    }
                    for (std::size_t id : touched) {
                        p.plank_sum += std::pow(plank_weight[id], q) * cell;
                        plank_weight[id] = 0.0;
                    }
                    touched.clear();

                    rec.wedge_sum = trilinear_wedge_sum(s);
                    if (is_narrow(classify_broad_narrow(s, rho))) {
                        p.narrow += Fq * cell;
                        const BoundCheck b = narrow_decomposition_check(s, rho, q);
                        p.narrow_c = std::max(p.narrow_c, b.ratio());
                    } else {
                        rec.broad = true;
                        p.broad += Fq * cell;
                        p.wedge += std::pow(rec.wedge_sum, q / 3.0) * cell;
                        const BoundCheck b{F, std::pow(rho, -4.0) * std::cbrt(rec.wedge_sum)};
                        p.broad_c = std::max(p.broad_c, b.ratio());
                    }
                }
                if (rec.broad) {
                    ++p.n_broad;
                } else {
                    ++p.n_narrow;
                }
                if (opts.keep_points) p.points.push_back(rec);
            }
        }
    });

    for (auto& p : parts) {
        rep.n_points += p.n_points;
        rep.n_broad += p.n_broad;
        rep.n_narrow += p.n_narrow;
        rep.max_plank_multiplicity = std::max(rep.max_plank_multiplicity, p.max_mult);
        rep.total += p.total;
        rep.broad_part += p.broad;
        rep.narrow_part += p.narrow;
        rep.wedge_integral += p.wedge;
        rep.tube_mass += p.tube;
        rep.cap_sum += p.cap_sum;
        rep.plank_sum += p.plank_sum;
        rep.broad_constant = std::max(rep.broad_constant, p.broad_c);
        rep.narrow_constant = std::max(rep.narrow_constant, p.narrow_c);
        if (opts.keep_points) {
            rep.points.insert(rep.points.end(), p.points.begin(), p.points.end());
        }
    }
    if (rep.tube_mass > 0.0) rep.kakeya_constant = rep.wedge_integral / std::pow(rep.tube_mass, q);
    return rep;
}

}  // namespace heiskak
