#include "heiskak/generators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "heiskak/rng.hpp"

namespace heiskak {

double IFSSpec::similarity_dimension() const {
    if (translates.size() <= 1) return 0.0;
    return std::log(static_cast<double>(translates.size())) / std::log(1.0 / r);
}

double IFSSpec::separation() const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < translates.size(); ++i) {
        for (std::size_t j = i + 1; j < translates.size(); ++j) {
            best = std::min(best, koranyi_dist(translates[i], translates[j]));
        }
    }
    return best;
}

namespace {

double outer_scale_for(double r, const std::vector<HPoint>& translates) {
    // d(0, q1 * D_r(q2 * ...)) <= max|q| (1 + r + r^2 + ...)
    double reach = 0.0;
    for (const auto& q : translates) reach = std::max(reach, koranyi_norm(q));
    if (reach == 0.0) return 1.0;
    return std::min(1.0, (1.0 - r) / reach);
}

}  // namespace

IFSSpec make_ifs(double r, std::vector<HPoint> translates, int depth) {
    if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("contraction ratio must lie in (0, 1)");
    if (depth < 0) throw std::invalid_argument("depth must be non-negative");
    if (translates.empty()) throw std::invalid_argument("an IFS needs at least one translate");
    for (std::size_t i = 0; i < translates.size(); ++i) {
        for (std::size_t j = i + 1; j < translates.size(); ++j) {
            if (koranyi_dist(translates[i], translates[j]) < 2.0 * r) {
                throw std::invalid_argument("translates " + std::to_string(i) + " and " +
                                            std::to_string(j) + " violate the separation 2r");
            }
        }
    }
    IFSSpec spec;
    spec.r = r;
    spec.translates = std::move(translates);
    spec.depth = depth;
    if (spec.similarity_dimension() > 4.0 + 1e-12) {
        throw std::invalid_argument("similarity dimension exceeds 4");
    }
    spec.outer_scale = outer_scale_for(r, spec.translates);
    return spec;
}

IFSSpec greedy_ifs(double r, int n, int depth, std::uint64_t seed, int n_candidates) {
    if (n < 1) throw std::invalid_argument("an IFS needs at least one translate");
    if (n_candidates < n) throw std::invalid_argument("fewer candidates than translates");
    Rng rng(seed);
    std::vector<HPoint> unit;
    unit.reserve(static_cast<std::size_t>(n_candidates));
    for (int i = 0; i < n_candidates; ++i) unit.push_back(rng.in_koranyi_ball());

    for (double radius = 1.0; radius < 64.0; radius *= 1.05) {
        std::vector<HPoint> cand;
        cand.reserve(unit.size());
        for (const auto& p : unit) cand.push_back(dilate(radius, p));
        // farthest-point insertion starting from the origin
        std::vector<HPoint> chosen{HPoint{}};
        std::vector<double> gap(cand.size());
        for (std::size_t k = 0; k < cand.size(); ++k) gap[k] = koranyi_norm(cand[k]);
        while (static_cast<int>(chosen.size()) < n) {
            const auto it = std::max_element(gap.begin(), gap.end());
            const HPoint next = cand[static_cast<std::size_t>(it - gap.begin())];
            chosen.push_back(next);
            for (std::size_t k = 0; k < cand.size(); ++k) {
                gap[k] = std::min(gap[k], koranyi_dist(cand[k], next));
            }
        }
        IFSSpec probe;
        probe.translates = chosen;
        if (n == 1 || probe.separation() >= 2.0 * r) return make_ifs(r, std::move(chosen), depth);
    }
    throw std::invalid_argument("greedy packing failed to reach separation 2r");
}

double cantor_delta(const IFSSpec& spec) {
    return 0.5 * spec.outer_scale * std::pow(spec.r, spec.depth);
}

WeightedBallFamily heisenberg_cantor(const IFSSpec& spec) {
    if (spec.translates.empty()) throw std::invalid_argument("an IFS needs at least one translate");
    std::vector<HPoint> level{HPoint{}};
    for (int k = 0; k < spec.depth; ++k) {
        std::vector<HPoint> next;
        next.reserve(level.size() * spec.translates.size());
        for (const auto& q : spec.translates) {
            for (const auto& c : level) next.push_back(group_mul(q, dilate(spec.r, c)));
        }
        level = std::move(next);
    }
    for (auto& c : level) c = dilate(spec.outer_scale, c);
    std::vector<double> weights(level.size(), 1.0);
    return make_family(std::move(level), std::move(weights), cantor_delta(spec));
}

WeightedBallFamily vertical_plane_sample(int n, double delta, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("n must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    const double r = delta * delta;
    // coarse grid of cell 2r on the (y, t) plane for rejection
    const double cell = 2.0 * r;
    const long ny = static_cast<long>(std::ceil(2.0 / cell)) + 2;
    const long nt = static_cast<long>(std::ceil(0.5 / cell)) + 2;
    std::vector<std::vector<std::size_t>> grid(static_cast<std::size_t>(ny * nt));
    auto cell_of = [&](double y, double t) {
        return std::pair<long, long>{static_cast<long>(std::floor((y + 1.0) / cell)) + 1,
                                     static_cast<long>(std::floor((t + 0.25) / cell)) + 1};
    };

    Rng rng(seed);
    std::vector<HPoint> centers;
    centers.reserve(static_cast<std::size_t>(n));
    const long max_attempts = 1000L * n;
    for (long attempt = 0; attempt < max_attempts && static_cast<int>(centers.size()) < n;
         ++attempt) {
        const double y = rng.uniform(-1.0, 1.0);
        const double t = rng.uniform(-0.25, 0.25);
        const HPoint p{0.0, y, t};
        if (koranyi_norm(p) > 1.0) continue;
        const auto [cy, ct] = cell_of(y, t);
        bool clear = true;
        for (long dy = -1; dy <= 1 && clear; ++dy) {
            for (long dt = -1; dt <= 1 && clear; ++dt) {
                const long gy = cy + dy, gt = ct + dt;
                if (gy < 0 || gt < 0 || gy >= ny || gt >= nt) continue;
                for (std::size_t j : grid[static_cast<std::size_t>(gy * nt + gt)]) {
                    if (euclidean_dist(p, centers[j]) < cell) {
                        clear = false;
                        break;
                    }
                }
            }
        }
        if (!clear) continue;
        grid[static_cast<std::size_t>(cy * nt + ct)].push_back(centers.size());
        centers.push_back(p);
    }
    if (static_cast<int>(centers.size()) < n) {
        throw std::invalid_argument("cannot place " + std::to_string(n) +
                                    " disjoint balls on the vertical plane");
    }
    std::vector<double> weights(centers.size(), 1.0);
    return make_family(std::move(centers), std::move(weights), delta);
}

int vertical_plane_count(double delta) {
    return std::max(1, static_cast<int>(std::lround(0.25 / (delta * delta * delta))));
}

WeightedBallFamily uniform_solid(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    const double hz = 2.0 * delta;
    const double ht = 2.0 * delta * delta;
    const long nz = static_cast<long>(std::floor(1.0 / hz));
    const long nt = static_cast<long>(std::floor(0.25 / ht));
    std::vector<HPoint> centers;
    for (long i = -nz; i <= nz; ++i) {
        for (long j = -nz; j <= nz; ++j) {
            for (long k = -nt; k <= nt; ++k) {
                const HPoint p{static_cast<double>(i) * hz, static_cast<double>(j) * hz,
                               static_cast<double>(k) * ht};
                if (koranyi_norm(p) <= 1.0) centers.push_back(p);
            }
        }
    }
    std::vector<double> weights(centers.size(), 1.0);
    return make_family(std::move(centers), std::move(weights), delta);
}

WeightedBallFamily random_family(int n, double delta, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("n must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    Rng rng(seed);
    const double gap = 2.0 * delta * delta;
    std::vector<HPoint> centers;
    std::vector<double> weights;
    for (long attempt = 0; static_cast<int>(centers.size()) < n; ++attempt) {
        if (attempt > 1000L * n) {
            throw std::invalid_argument("cannot place " + std::to_string(n) + " disjoint balls");
        }
        const HPoint p = rng.in_koranyi_ball(0.9);
        bool clear = true;
        for (const auto& c : centers) {
            if (euclidean_dist(p, c) < gap) {
                clear = false;
                break;
            }
        }
        if (!clear) continue;
        centers.push_back(p);
        weights.push_back(rng.uniform(0.5, 1.5));
    }
    return make_family(std::move(centers), std::move(weights), delta);
}

WeightedBallFamily direction_clusters(double delta, const std::vector<double>& ys,
                                      const std::vector<Vec3>& lines) {
    std::vector<HPoint> centers;
    for (const Vec3& l : lines) {
        for (double s : ys) centers.push_back({l.x * s + l.y, s, l.z + 0.5 * l.y * s});
    }
    std::vector<double> weights(centers.size(), 1.0);
    return make_family(std::move(centers), std::move(weights), delta);
}

WeightedBallFamily three_cluster_family(double delta) {
    const std::vector<double> ys{-0.65, -0.5, -0.35, -0.15, 0.0, 0.15, 0.35, 0.5, 0.65};
    std::vector<Vec3> lines;
    for (double b : {-0.3, 0.0, 0.3}) {
        for (double c : {-0.05, 0.05}) lines.push_back({0.0, b, c});
    }
    return direction_clusters(delta, ys, lines);
}

}  // namespace heiskak
