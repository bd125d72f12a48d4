#include "heiskak/measures.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "heiskak/parallel.hpp"
#include "heiskak/rng.hpp"

namespace heiskak {

OverlapError::OverlapError(std::size_t first, std::size_t second)
    : std::invalid_argument("balls " + std::to_string(first) + " and " + std::to_string(second) +
                            " overlap"),
      first_(first),
      second_(second) {}

std::vector<HPoint> WeightedBallFamily::centers() const {
    std::vector<HPoint> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(center(i));
    return out;
}

double WeightedBallFamily::total_mass() const {
    double m = 0.0;
    for (double w : weights_) m += w;
    return m;
}

WeightedBallFamily WeightedBallFamily::left_translated(const HPoint& g) const {
    return derived(source_centers_, weights_, delta_, radius_,
                   HomogeneousMap::translation(g).after(placement_));
}

WeightedBallFamily WeightedBallFamily::dilated(double lambda) const {
    return derived(source_centers_, weights_, delta_ * lambda, radius_,
                   HomogeneousMap::dilation(lambda).after(placement_));
}

WeightedBallFamily WeightedBallFamily::subfamily(const std::vector<std::size_t>& indices,
                                                 double radius_factor) const {
    std::vector<HPoint> c;
    std::vector<double> w;
    c.reserve(indices.size());
    w.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= size()) throw std::out_of_range("subfamily index out of range");
        c.push_back(source_centers_[i]);
        w.push_back(weights_[i]);
    }
    return derived(std::move(c), std::move(w), delta_, radius_ * radius_factor, placement_);
}

WeightedBallFamily WeightedBallFamily::derived(std::vector<HPoint> source_centers,
                                               std::vector<double> weights, double delta,
                                               double radius, HomogeneousMap placement) {
    if (source_centers.size() != weights.size()) {
        throw std::invalid_argument("centers and weights differ in length");
    }
    WeightedBallFamily f;
    f.delta_ = delta;
    f.radius_ = radius;
    f.source_centers_ = std::move(source_centers);
    f.weights_ = std::move(weights);
    f.placement_ = placement;
    f.base_ = false;
    return f;
}

namespace {

struct CellKey {
    long x, y, t;
    bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const {
        std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9e3779b97f4a7c15ULL;
        h ^= static_cast<std::uint64_t>(k.y) * 0xc2b2ae3d27d4eb4fULL + (h << 6) + (h >> 2);
        h ^= static_cast<std::uint64_t>(k.t) * 0x165667b19e3779f9ULL + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

void check_disjoint(const std::vector<HPoint>& centers, double radius) {
    const double cell = 2.0 * radius;
    std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> grid;
    grid.reserve(centers.size() * 2);
    auto key_of = [&](const HPoint& p) {
        return CellKey{static_cast<long>(std::floor(p.x / cell)),
                       static_cast<long>(std::floor(p.y / cell)),
                       static_cast<long>(std::floor(p.t / cell))};
    };
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const CellKey k = key_of(centers[i]);
        for (long dx = -1; dx <= 1; ++dx) {
            for (long dy = -1; dy <= 1; ++dy) {
                for (long dt = -1; dt <= 1; ++dt) {
                    const auto it = grid.find(CellKey{k.x + dx, k.y + dy, k.t + dt});
                    if (it == grid.end()) continue;
                    for (std::size_t j : it->second) {
                        // tangent balls share a single point and count as disjoint
                        if (euclidean_dist(centers[i], centers[j]) < cell * (1.0 - 1e-12)) {
                            throw OverlapError(j, i);
                        }
                    }
                }
            }
        }
        grid[k].push_back(i);
    }
}

}  // namespace

WeightedBallFamily make_family(std::vector<HPoint> centers, std::vector<double> weights,
                               double delta) {
    if (centers.size() != weights.size()) {
        throw std::invalid_argument("centers and weights differ in length");
    }
    if (centers.empty()) throw std::invalid_argument("a family needs at least one ball");
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw std::invalid_argument("delta must be positive and finite");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
            throw std::invalid_argument("weight of ball " + std::to_string(i) +
                                        " is not positive");
        }
        total += weights[i];
    }
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const HPoint& c = centers[i];
        centers[i] = HPoint::make(c.x, c.y, c.t);
        if (koranyi_norm(c) > 1.0 + 1e-12) {
            throw std::invalid_argument("center of ball " + std::to_string(i) +
                                        " lies outside B_H(0, 1)");
        }
    }
    const double radius = delta * delta;
    check_disjoint(centers, radius);

    for (double& w : weights) w /= total;
    WeightedBallFamily f =
        WeightedBallFamily::derived(std::move(centers), std::move(weights), delta, radius, {});
    f.base_ = true;
    return f;
}

void write_family(std::ostream& out, const WeightedBallFamily& family) {
    std::ostringstream buf;
    buf << std::setprecision(17);
    buf << "delta=" << family.delta() << '\n';
    for (std::size_t i = 0; i < family.size(); ++i) {
        const HPoint c = family.center(i);
        buf << c.x << ' ' << c.y << ' ' << c.t << ' ' << family.weights()[i] << '\n';
    }
    out << buf.str();
}

WeightedBallFamily read_family(std::istream& in) {
    std::string line;
    std::optional<double> delta;
    std::vector<HPoint> centers;
    std::vector<double> weights;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        if (!delta) {
            const std::string head = line.substr(first);
            if (head.rfind("delta=", 0) != 0) {
                throw std::invalid_argument("line " + std::to_string(line_no) +
                                            ": expected header delta=<value>");
            }
            std::istringstream value(head.substr(6));
            double d = 0.0;
            if (!(value >> d)) {
                throw std::invalid_argument("line " + std::to_string(line_no) +
                                            ": malformed delta");
            }
            delta = d;
            continue;
        }
        std::istringstream row(line);
        double x = 0.0, y = 0.0, t = 0.0, w = 0.0;
        std::string rest;
        if (!(row >> x >> y >> t >> w) || (row >> rest)) {
            throw std::invalid_argument("line " + std::to_string(line_no) +
                                        ": expected 'x y t weight'");
        }
        centers.push_back(HPoint{x, y, t});
        weights.push_back(w);
    }
    if (!delta) throw std::invalid_argument("missing delta= header");
    return make_family(std::move(centers), std::move(weights), *delta);
}

void save_family(const std::string& path, const WeightedBallFamily& family) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_family(out, family);
}

WeightedBallFamily load_family(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open measure file " + path);
    return read_family(in);
}

namespace {

// Centres bucketed on a square grid in the (x, y) plane for radius queries.
class PlanarBuckets {
public:
    PlanarBuckets(const std::vector<HPoint>& pts, double cell) : pts_(pts), cell_(cell) {
        double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
        double xmax = -xmin, ymax = -xmin;
        for (const auto& p : pts) {
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
        x0_ = xmin;
        y0_ = ymin;
        nx_ = static_cast<long>((xmax - xmin) / cell) + 1;
        ny_ = static_cast<long>((ymax - ymin) / cell) + 1;
        start_.assign(static_cast<std::size_t>(nx_ * ny_) + 1, 0);
        std::vector<long> idx(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            idx[i] = bucket(pts[i]);
            ++start_[static_cast<std::size_t>(idx[i]) + 1];
        }
        for (std::size_t b = 1; b < start_.size(); ++b) start_[b] += start_[b - 1];
        order_.resize(pts.size());
        std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            order_[fill[static_cast<std::size_t>(idx[i])]++] = i;
        }
    }

    template <typename Fn>
    void visit_near(const HPoint& p, double radius, Fn&& fn) const {
        const long ix = static_cast<long>(std::floor((p.x - x0_) / cell_));
        const long iy = static_cast<long>(std::floor((p.y - y0_) / cell_));
        const long reach = static_cast<long>(std::ceil(radius / cell_));
        for (long bx = std::max(0L, ix - reach); bx <= std::min(nx_ - 1, ix + reach); ++bx) {
            for (long by = std::max(0L, iy - reach); by <= std::min(ny_ - 1, iy + reach); ++by) {
                const std::size_t b = static_cast<std::size_t>(bx * ny_ + by);
                for (std::size_t k = start_[b]; k < start_[b + 1]; ++k) fn(order_[k]);
            }
        }
    }

private:
    long bucket(const HPoint& p) const {
        const long ix = std::clamp(static_cast<long>((p.x - x0_) / cell_), 0L, nx_ - 1);
        const long iy = std::clamp(static_cast<long>((p.y - y0_) / cell_), 0L, ny_ - 1);
        return ix * ny_ + iy;
    }

    const std::vector<HPoint>& pts_;
    double cell_;
    double x0_ = 0.0, y0_ = 0.0;
    long nx_ = 1, ny_ = 1;
    std::vector<std::size_t> start_;
    std::vector<std::size_t> order_;
};

}  // namespace

FrostmanReport frostman_const(const WeightedBallFamily& nu, double t, double r_floor) {
    if (!(t > 0.0)) throw std::invalid_argument("Frostman exponent must be positive");
    if (!(r_floor > 0.0 && r_floor <= 1.0)) {
        throw std::invalid_argument("radius floor must lie in (0, 1]");
    }
    FrostmanReport rep;
    rep.t_exponent = t;
    rep.delta_floor = r_floor;
    if (nu.empty()) return rep;

    const std::vector<HPoint> pts = nu.centers();
    const std::vector<double>& w = nu.weights();
    const double total = nu.total_mass();

    std::vector<double> radii;
    for (double r = r_floor; r <= 2.0 * (1.0 + 1e-12); r *= 2.0) radii.push_back(r);

    const std::size_t n = pts.size();
    const std::size_t n_chunks = std::min<std::size_t>(n, 64);
    for (double r : radii) {
        const double r_t = std::pow(r, t);
        // no ball of this radius can beat the running maximum
        if (total / r_t <= rep.value) continue;
        const PlanarBuckets buckets(pts, r);
        struct Best {
            double ratio = -1.0;
            std::size_t at = 0;
        };
        const Best best = parallel_map_reduce(
            n_chunks, Best{},
            [&](std::size_t chunk) {
                Best b;
                const auto [begin, end] = chunk_range(n, n_chunks, chunk);
                for (std::size_t i = begin; i < end; ++i) {
                    double mass = 0.0;
                    buckets.visit_near(pts[i], r, [&](std::size_t j) {
                        if (koranyi_dist(pts[j], pts[i]) <= r) mass += w[j];
                    });
                    if (mass / r_t > b.ratio) b = Best{mass / r_t, i};
                }
                return b;
            },
            [](Best& acc, const Best& b) {
                if (b.ratio > acc.ratio) acc = b;
            });
        if (best.ratio > rep.value) {
            rep.value = best.ratio;
            rep.argmax_center = pts[best.at];
            rep.argmax_radius = r;
        }
    }
    return rep;
}

SampleCloud sample_family(const WeightedBallFamily& nu, int n_per_ball, std::uint64_t seed) {
    if (n_per_ball < 1) throw std::invalid_argument("n_mc must be at least 1");
    SampleCloud cloud;
    cloud.n_per_ball = n_per_ball;
    cloud.seed = seed;
    const std::size_t n = nu.size();
    const std::size_t per = static_cast<std::size_t>(n_per_ball);
    cloud.points.resize(n * per);
    cloud.sample_mass.resize(n);
    const std::size_t n_chunks = std::min<std::size_t>(std::max<std::size_t>(n, 1), 256);
    parallel_for(n_chunks, [&](std::size_t chunk) {
        const auto [begin, end] = chunk_range(n, n_chunks, chunk);
        for (std::size_t b = begin; b < end; ++b) {
            Rng rng = Rng::stream(seed, b);
            const Vec3 c = as_vec(nu.source_centers()[b]);
            for (std::size_t k = 0; k < per; ++k) {
                const HPoint p = as_hpoint(c + rng.in_unit_ball() * nu.radius());
                cloud.points[b * per + k] = nu.placement().apply(p);
            }
            cloud.sample_mass[b] = nu.weights()[b] / static_cast<double>(per);
        }
    });
    return cloud;
}

double PlaneDensity::total_mass() const {
    double m = 0.0;
    for (double d : density) m += d;
    return m * cell_area();
}

void PlaneDensity::write_csv(std::ostream& out) const {
    std::ostringstream buf;
    buf << std::setprecision(17);
    buf << "# theta=" << theta.radians() << " cell_mu=" << cell.cell_mu
        << " cell_s=" << cell.cell_s << '\n';
    buf << "mu,s,density\n";
    for (long i = 0; i < n_mu; ++i) {
        for (long j = 0; j < n_s; ++j) {
            const double d = at(i, j);
            if (d == 0.0) continue;
            buf << (static_cast<double>(i0 + i) + 0.5) * cell.cell_mu << ','
                << (static_cast<double>(j0 + j) + 0.5) * cell.cell_s << ',' << d << '\n';
        }
    }
    out << buf.str();
}

PlaneDensity pushforward_density(const SampleCloud& cloud, const Angle& theta,
                                 const GridSpec& cell) {
    if (!(cell.cell_mu > 0.0 && cell.cell_s > 0.0)) {
        throw std::invalid_argument("grid cells must be positive");
    }
    PlaneDensity d;
    d.theta = theta;
    d.cell = cell;
    if (cloud.points.empty()) return d;

    const std::size_t m = cloud.points.size();
    std::vector<long> ci(m), cj(m);
    long imin = std::numeric_limits<long>::max(), imax = std::numeric_limits<long>::min();
    long jmin = imin, jmax = imax;
    for (std::size_t k = 0; k < m; ++k) {
        const auto [mu, s] = project_to_chart(theta, cloud.points[k]);
        ci[k] = static_cast<long>(std::floor(mu / cell.cell_mu));
        cj[k] = static_cast<long>(std::floor(s / cell.cell_s));
        imin = std::min(imin, ci[k]);
        imax = std::max(imax, ci[k]);
        jmin = std::min(jmin, cj[k]);
        jmax = std::max(jmax, cj[k]);
    }
    d.i0 = imin;
    d.j0 = jmin;
    d.n_mu = imax - imin + 1;
    d.n_s = jmax - jmin + 1;
    d.density.assign(static_cast<std::size_t>(d.n_mu * d.n_s), 0.0);
    const std::size_t per = static_cast<std::size_t>(cloud.n_per_ball);
    const double inv_area = 1.0 / d.cell_area();
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t idx = static_cast<std::size_t>((ci[k] - imin) * d.n_s + (cj[k] - jmin));
        d.density[idx] += cloud.sample_mass[k / per] * inv_area;
    }
    return d;
}

PlaneDensity pushforward_density(const WeightedBallFamily& nu, const Angle& theta, double cell,
                                 int n_mc, std::uint64_t seed) {
    return pushforward_density(sample_family(nu, n_mc, seed), theta, GridSpec::square(cell));
}

double lq_norm(const PlaneDensity& d, double q) {
    if (!(q >= 1.0)) throw std::invalid_argument("q must be at least 1");
    double acc = 0.0;
    if (q == 1.0) {
        for (double v : d.density) acc += v;
    } else {
        for (double v : d.density) {
            if (v > 0.0) acc += std::pow(v, q);
        }
    }
    return acc * d.cell_area();
}

GridSpec EnergyOptions::grid_for(const WeightedBallFamily& nu) const {
    if (grid) return *grid;
    return GridSpec::square(cell ? *cell : 0.5 * nu.delta() * nu.delta());
}

ThetaRule theta_rule(double theta_lo, double theta_hi, int n_theta) {
    constexpr double pi = std::numbers::pi;
    if (!(theta_lo < theta_hi)) throw std::invalid_argument("empty theta range");
    if (n_theta < 2) throw std::invalid_argument("n_theta must be at least 2");
    ThetaRule rule;
    const double span = theta_hi - theta_lo;
    if (span >= pi - 1e-12) {
        // integrand is pi-periodic: rectangle rule on [lo, lo + pi)
        const double h = pi / n_theta;
        for (int k = 0; k < n_theta; ++k) {
            rule.nodes.push_back(theta_lo + k * h);
            rule.weights.push_back(h);
        }
    } else {
        const double h = span / (n_theta - 1);
        for (int k = 0; k < n_theta; ++k) {
            rule.nodes.push_back(theta_lo + k * h);
            rule.weights.push_back((k == 0 || k == n_theta - 1) ? 0.5 * h : h);
        }
    }
    return rule;
}

namespace {

// Riemann sums of density^q for the pushforward of a cloud. Small bounding
// boxes go through the dense PlaneDensity; sparse supports (fine grids over
// wide fractal families) sum the occupied cells after sorting their keys.
std::vector<double> cloud_lq_norms(const SampleCloud& cloud, const Angle& theta,
                                   const GridSpec& grid, const std::vector<double>& qs) {
    const std::size_t m = cloud.points.size();
    std::vector<std::pair<std::int64_t, std::int64_t>> cells(m);
    std::int64_t imin = std::numeric_limits<std::int64_t>::max(), imax = -imin;
    std::int64_t jmin = imin, jmax = -imin;
    for (std::size_t k = 0; k < m; ++k) {
        const auto [mu, s] = project_to_chart(theta, cloud.points[k]);
        const auto i = static_cast<std::int64_t>(std::floor(mu / grid.cell_mu));
        const auto j = static_cast<std::int64_t>(std::floor(s / grid.cell_s));
        cells[k] = {i, j};
        imin = std::min(imin, i);
        imax = std::max(imax, i);
        jmin = std::min(jmin, j);
        jmax = std::max(jmax, j);
    }
    std::vector<double> out;
    if (m == 0) return std::vector<double>(qs.size(), 0.0);
    const double box = static_cast<double>(imax - imin + 1) * static_cast<double>(jmax - jmin + 1);
    if (box <= std::max(4.0 * static_cast<double>(m), 1e6)) {
        const PlaneDensity d = pushforward_density(cloud, theta, grid);
        for (double q : qs) out.push_back(lq_norm(d, q));
        return out;
    }
    const auto n_s = jmax - jmin + 1;
    std::vector<std::pair<std::int64_t, std::uint32_t>> keyed(m);
    for (std::size_t k = 0; k < m; ++k) {
        keyed[k] = {(cells[k].first - imin) * n_s + (cells[k].second - jmin),
                    static_cast<std::uint32_t>(k / static_cast<std::size_t>(cloud.n_per_ball))};
    }
    cells.clear();
    cells.shrink_to_fit();
    std::sort(keyed.begin(), keyed.end());
    const double area = grid.cell_mu * grid.cell_s;
    out.assign(qs.size(), 0.0);
    for (std::size_t a = 0; a < m;) {
        std::size_t b = a;
        double mass = 0.0;
        while (b < m && keyed[b].first == keyed[a].first) mass += cloud.sample_mass[keyed[b++].second];
        const double density = mass / area;
        for (std::size_t i = 0; i < qs.size(); ++i) {
            out[i] += (qs[i] == 1.0 ? density : std::pow(density, qs[i])) * area;
        }
        a = b;
    }
    return out;
}

}  // namespace

std::vector<double> sector_energies(const WeightedBallFamily& nu, const std::vector<double>& qs,
                                    double theta_lo, double theta_hi, const EnergyOptions& opts) {
    for (double q : qs) {
        if (!(q >= 1.0)) throw std::invalid_argument("q must be at least 1");
    }
    const ThetaRule rule = theta_rule(theta_lo, theta_hi, opts.n_theta);
    std::vector<double> out(qs.size(), 0.0);
    if (nu.empty()) return out;

    const SampleCloud cloud = sample_family(nu, opts.n_mc, opts.seed);
    const GridSpec grid = opts.grid_for(nu);
    const std::size_t n = rule.nodes.size();
    std::vector<std::vector<double>> per_theta(n);
    parallel_for(n, [&](std::size_t k) { per_theta[k] = cloud_lq_norms(cloud, Angle(rule.nodes[k]), grid, qs); });
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < qs.size(); ++i) out[i] += rule.weights[k] * per_theta[k][i];
    }
    return out;
}

double sector_energy(const WeightedBallFamily& nu, double q, double theta_lo, double theta_hi,
                     const EnergyOptions& opts) {
    return sector_energies(nu, {q}, theta_lo, theta_hi, opts).front();
}

}  // namespace heiskak
