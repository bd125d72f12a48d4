#include "heiskak/cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "heiskak/duality.hpp"
#include "heiskak/generators.hpp"
#include "heiskak/hgroup.hpp"
#include "heiskak/incidence.hpp"
#include "heiskak/measures.hpp"
#include "heiskak/rng.hpp"
#include "heiskak/xray.hpp"

namespace heiskak {

namespace fs = std::filesystem;

std::string git_blob_sha1(std::string_view bytes) {
    const std::string header = "blob " + std::to_string(bytes.size()) + std::string(1, '\0');
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr) throw std::runtime_error("EVP_MD_CTX_new failed");
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                    EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 &&
                    EVP_DigestFinal_ex(ctx, digest, &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok) throw std::runtime_error("SHA-1 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void Report::section(const std::string& name) { sections_.push_back({name, {}}); }

void Report::add(const std::string& key, const std::string& value) {
    if (sections_.empty()) section("report");
    sections_.back().second.push_back({key, value});
}

void Report::add(const std::string& key, double value) { add(key, format_double(value)); }
void Report::add(const std::string& key, long long value) { add(key, std::to_string(value)); }

void Report::write(std::ostream& out) const {
    bool first = true;
    for (const auto& [name, rows] : sections_) {
        if (!first) out << '\n';
        first = false;
        out << '[' << name << "]\n";
        for (const auto& [k, v] : rows) out << k << " = " << v << '\n';
    }
}

void Report::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write(out);
}

namespace {

std::string out_path(const RunConfig& c, const std::string& name) {
    fs::create_directories(c.out_dir);
    return (fs::path(c.out_dir) / name).string();
}

void add_config(Report& r, const RunConfig& c) {
    r.section("config");
    r.add("subcommand", c.subcommand);
    r.add("seed", std::to_string(c.seed));
    r.add("rho", c.rho);
    r.add("q", c.q);
    r.add("t", c.t);
    r.add("delta", c.delta ? format_double(*c.delta) : std::string("from input"));
    r.add("n_theta", c.n_theta);
    r.add("cell", c.cell ? format_double(*c.cell) : std::string("delta^2/2"));
    r.add("n_mc", c.n_mc);
    r.add("spacing", c.spacing ? format_double(*c.spacing) : std::string("delta^2/2"));
    r.add("tol_scale", c.tol_scale);
}

struct LoadedMeasure {
    WeightedBallFamily family;
    std::string hash;
};

LoadedMeasure load_measure(const RunConfig& c) {
    if (c.measure_path.empty()) throw std::invalid_argument("a measure file is required");
    std::ifstream in(c.measure_path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open measure file " + c.measure_path);
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::istringstream parse(bytes);
    return {read_family(parse), git_blob_sha1(bytes)};
}

void add_input(Report& r, const RunConfig& c, const LoadedMeasure& m) {
    r.section("input");
    r.add("path", fs::path(c.measure_path).filename().string());
    r.add("sha1", m.hash);
    r.add("balls", m.family.size());
    r.add("delta", m.family.delta());
    r.add("mass", m.family.total_mass());
}

EnergyOptions energy_options(const RunConfig& c) {
    EnergyOptions o;
    o.n_theta = c.n_theta;
    o.cell = c.cell;
    o.n_mc = c.n_mc;
    o.seed = c.seed;
    return o;
}

void check_rho(double rho) {
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in (0, 1)");
}

}  // namespace

std::vector<LemmaCheck> run_lemma_suites(const RunConfig& c) {
    std::vector<LemmaCheck> out;
    auto record = [&](const std::string& suite, const std::string& name, double value,
                      double limit) {
        out.push_back({suite, name, value, limit, value < limit * c.tol_scale});
    };

    {
        Rng rng = Rng::stream(c.seed, 1);
        long failures = 0;
        for (int i = 0; i < 2000; ++i) {
            const HPoint ps = rng.in_koranyi_ball();
            const Vec3 p = dual_line(ps).point_at(rng.uniform(-2.0, 2.0));
            const auto r = incidence_check(p, ps, 1e-9);
            if (!r.p_on_dual_line || !r.p_star_on_line) ++failures;
        }
        for (int i = 0; i < 2000; ++i) {
            const HPoint ps = rng.in_koranyi_ball();
            const Vec3 p{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
            const auto r = incidence_check(p, ps, 1e-9);
            if (r.p_on_dual_line != r.p_star_on_line) ++failures;
        }
        record("duality", "incidence_disagreements", static_cast<double>(failures), 0.5);
    }

    {
        Rng rng = Rng::stream(c.seed, 2);
        double c1 = 0.0, c2 = 0.0;
        for (int i = 0; i < 10; ++i) {
            const HPoint ps = rng.in_koranyi_ball();
            for (double d : {1e-1, 1e-2, 1e-3}) {
                const auto k = tube_constant_probe(ps, d, 500, c.seed + static_cast<std::uint64_t>(i));
                c1 = std::max(c1, k.c1);
                c2 = std::max(c2, k.c2);
            }
        }
        record("tubes", "c1_max", c1, 100.0);
        record("tubes", "c2_max", c2, 200.0);
    }

    EnergyOptions opts = energy_options(c);
    const auto single = make_family({HPoint{}}, {1.0}, 0.25);
    const auto scattered = random_family(10, 0.25, c.seed);

    {
        double worst = 0.0;
        for (const auto* nu : {&single, &scattered}) {
            for (double q : {1.0, 1.5, 2.0}) {
                worst = std::max(worst, std::abs(xray_identity_check(*nu, q, opts).ratio() - 1.0));
            }
        }
        record("xray", "identity_max_deviation", worst, 0.1);
        const double r = xray_L3_comparison(single, c.q, std::numbers::pi / 4.0, opts).ratio();
        const double spread = r > 0.0 ? std::max(r, 1.0 / r) : std::numeric_limits<double>::infinity();
        record("xray", "L3_ratio_spread", spread, 8.0);
    }

    {
        Rng rng = Rng::stream(c.seed, 3);
        double worst = 0.0;
        for (int i = 0; i < 2; ++i) {
            const HPoint p = rng.in_koranyi_ball(0.5);
            worst = std::max(worst, translation_invariance_check(scattered, p, c.q, opts).relative_gap());
        }
        record("translation", "relative_gap_max", worst, 0.02);
    }

    {
        Rng rng = Rng::stream(c.seed, 4);
        const double rho = 0.5;
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const HPoint p{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
            const Angle th(rng.uniform(0.0, std::numbers::pi));
            const HPoint direct = vertical_decompose(th, p).w;
            const HPoint conj = dilate(rho, vertical_decompose(th, dilate(1.0 / rho, p)).w);
            worst = std::max(worst, euclidean_dist(direct, conj));
        }
        record("conjugation", "pointwise_max_error", worst, 1e-12);

        const GridSpec g = opts.grid_for(scattered);
        EnergyOptions o1 = opts;
        o1.grid = g;
        EnergyOptions o2 = opts;
        o2.grid = GridSpec{g.cell_mu / rho, g.cell_s / (rho * rho)};
        const double e = sector_energy(scattered, c.q, 0.0, std::numbers::pi, o1);
        const double e_up = sector_energy(scattered.dilated(1.0 / rho), c.q, 0.0, std::numbers::pi, o2);
        const double factor = std::pow(rho, -3.0 * (c.q - 1.0));
        record("conjugation", "energy_factor_deviation", std::abs(factor * e_up / e - 1.0), 0.05);
    }
    return out;
}

int cmd_verify_lemmas(const RunConfig& c, std::ostream& log) {
    const auto checks = run_lemma_suites(c);
    {
        std::ofstream csv(out_path(c, "lemmas.csv"), std::ios::binary);
        csv << "suite,check,value,limit,pass\n";
        for (const auto& k : checks) {
            csv << k.suite << ',' << k.name << ',' << format_double(k.value) << ','
                << format_double(k.limit * c.tol_scale) << ',' << (k.pass ? 1 : 0) << '\n';
        }
    }
    Report r;
    add_config(r, c);
    r.section("results");
    std::string first_failure;
    for (const auto& k : checks) {
        r.add(k.suite + "." + k.name, k.value);
        if (!k.pass && first_failure.empty()) first_failure = k.suite;
    }
    r.add("status", first_failure.empty() ? std::string("pass") : "fail:" + first_failure);
    r.save(out_path(c, "verify_lemmas_report.txt"));
    if (!first_failure.empty()) {
        log << "verify-lemmas: suite '" << first_failure << "' failed\n";
        return kExitTolerance;
    }
    log << "verify-lemmas: all suites pass\n";
    return kExitOk;
}

int cmd_energy(const RunConfig& c, std::ostream& log) {
    const auto m = load_measure(c);
    const auto& nu = m.family;
    const double e = sector_energy(nu, c.q, 0.0, std::numbers::pi, energy_options(c));
    const double mass = nu.total_mass();
    const auto fr = frostman_const(nu, c.t, std::min(1.0, c.delta.value_or(nu.delta())));
    const double ratio = e / (mass * std::sqrt(fr.value));

    Report r;
    add_config(r, c);
    add_input(r, c, m);
    r.section("results");
    r.add("energy", e);
    r.add("mass", mass);
    r.add("frostman_const", fr.value);
    r.add("frostman_radius", fr.argmax_radius);
    r.add("ratio", ratio);
    r.save(out_path(c, "energy_report.txt"));
    log << "energy = " << format_double(e) << "  ratio = " << format_double(ratio) << '\n';
    return kExitOk;
}

namespace {

// white -> dark blue ramp
std::string ramp(double f) {
    f = std::clamp(f, 0.0, 1.0);
    const int r = static_cast<int>(std::lround(255.0 * (1.0 - 0.9 * f)));
    const int g = static_cast<int>(std::lround(255.0 * (1.0 - 0.75 * f)));
    const int b = static_cast<int>(std::lround(255.0 * (1.0 - 0.4 * f)));
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

void write_slices_svg(std::ostream& out, const DecompositionReport& rep) {
    const double h = rep.spacing;
    const std::vector<double> targets{-0.5, 0.0, 0.5};
    const double panel = 320.0, pad = 20.0;
    double fmax = 0.0;
    for (const auto& p : rep.points) fmax = std::max(fmax, p.total_weight);
    if (fmax == 0.0) fmax = 1.0;
    const double px = panel / 2.0;  // pixels per unit
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
        << format_double(targets.size() * (panel + pad) + pad) << "\" height=\""
        << format_double(panel + 2 * pad + 20) << "\">\n";
    for (std::size_t k = 0; k < targets.size(); ++k) {
        const double x1 = std::round(targets[k] / h) * h;
        const double ox = pad + static_cast<double>(k) * (panel + pad);
        const double oy = pad + 20;
        out << "<text x=\"" << format_double(ox) << "\" y=\"" << format_double(pad + 8)
            << "\" font-family=\"monospace\" font-size=\"12\">x1 = " << format_double(x1)
            << "</text>\n";
        out << "<rect x=\"" << format_double(ox) << "\" y=\"" << format_double(oy)
            << "\" width=\"" << format_double(panel) << "\" height=\"" << format_double(panel)
            << "\" fill=\"none\" stroke=\"#888\"/>\n";
        std::vector<const PointRecord*> broad;
        for (const auto& p : rep.points) {
            if (std::abs(p.x.x - x1) > 0.5 * h) continue;
            const double sx = ox + (p.x.y + 1.0 - 0.5 * h) * px;
            const double sy = oy + (1.0 - p.x.z - 0.5 * h) * px;
            if (p.total_weight > 0.0) {
                out << "<rect x=\"" << format_double(sx) << "\" y=\"" << format_double(sy)
                    << "\" width=\"" << format_double(h * px) << "\" height=\""
                    << format_double(h * px) << "\" fill=\"" << ramp(p.total_weight / fmax)
                    << "\"/>\n";
            }
            if (p.broad) broad.push_back(&p);
        }
        for (const auto* p : broad) {
            out << "<circle cx=\"" << format_double(ox + (p->x.y + 1.0) * px) << "\" cy=\""
                << format_double(oy + (1.0 - p->x.z) * px) << "\" r=\""
                << format_double(std::max(1.5, 0.5 * h * px)) << "\" fill=\"none\" stroke=\"#d62728\"/>\n";
        }
    }
    out << "</svg>\n";
}

}  // namespace

int cmd_broad_narrow(const RunConfig& c, std::ostream& log) {
    check_rho(c.rho);
    const auto m = load_measure(c);
    DecompositionOptions opts;
    opts.spacing = c.spacing;
    opts.q = c.q;
    opts.keep_points = true;
    const auto rep = energy_decomposition_check(m.family, c.rho, opts);

    {
        std::ofstream csv(out_path(c, "broad_narrow_points.csv"), std::ios::binary);
        csv << "x1,x2,x3,class,total_weight,wedge_sum\n";
        for (const auto& p : rep.points) {
            csv << format_double(p.x.x) << ',' << format_double(p.x.y) << ','
                << format_double(p.x.z) << ',' << (p.broad ? "broad" : "narrow") << ','
                << format_double(p.total_weight) << ',' << format_double(p.wedge_sum) << '\n';
        }
    }
    {
        std::ofstream svg(out_path(c, "broad_narrow_slices.svg"), std::ios::binary);
        write_slices_svg(svg, rep);
    }

    const bool partition = rep.n_broad + rep.n_narrow == rep.n_points;
    const bool broad_ok = rep.broad_constant <= 10.0;
    const bool narrow_ok = rep.narrow_constant <= 4.0;
    Report r;
    add_config(r, c);
    add_input(r, c, m);
    r.section("results");
    r.add("spacing", rep.spacing);
    r.add("grid_points", rep.n_points);
    r.add("broad_points", rep.n_broad);
    r.add("narrow_points", rep.n_narrow);
    r.add("partition_complete", partition);
    r.add("total", rep.total);
    r.add("broad_part", rep.broad_part);
    r.add("narrow_part", rep.narrow_part);
    r.add("wedge_integral", rep.wedge_integral);
    r.add("tube_mass", rep.tube_mass);
    r.add("cap_sum", rep.cap_sum);
    r.add("plank_sum", rep.plank_sum);
    r.add("planks", rep.n_planks);
    r.add("max_plank_multiplicity", rep.max_plank_multiplicity);
    r.add("broad_constant", rep.broad_constant);
    r.add("narrow_constant", rep.narrow_constant);
    r.add("kakeya_constant", rep.kakeya_constant);
    r.add("broad_gate", rep.broad_gate());
    r.add("narrow_gate", rep.narrow_gate());
    r.save(out_path(c, "broad_narrow_report.txt"));
    log << "broad-narrow: " << rep.n_broad << " broad / " << rep.n_points << " points\n";
    if (!(partition && broad_ok && narrow_ok && rep.broad_gate() && rep.narrow_gate())) {
        log << "broad-narrow: bound check failed\n";
        return kExitTolerance;
    }
    return kExitOk;
}

int cmd_rescale_demo(const RunConfig& c, std::ostream& log) {
    check_rho(c.rho);
    const auto m = load_measure(c);
    const auto& nu = m.family;
    const double rho = c.rho;
    const auto caps = cone_cap_cover(rho);
    const double base = frostman_const(nu, c.t, nu.delta()).value;
    const double floor_up = std::min(1.0, nu.delta() / rho);

    std::ofstream csv(out_path(c, "rescale_cells.csv"), std::ios::binary);
    csv << "cap,plank,members,mass,koranyi_radius_over_rho,frostman_ratio,roundtrip_error\n";
    double mass_total = 0.0, worst_frostman = 0.0, worst_roundtrip = 0.0, best_mass = -1.0;
    std::size_t n_cells = 0;
    std::optional<CellMeasure> largest;
    for (std::size_t k = 0; k < caps.size(); ++k) {
        const auto planks = plank_cover_and_assign(nu, caps, k);
        for (std::size_t j = 0; j < planks.size(); ++j) {
            auto cell = cell_measure(nu, planks[j]);
            const auto up = rescale_cell(cell, rho);
            const double fr = frostman_const(up, c.t, floor_up).value;
            const double ratio = fr / (std::pow(rho, c.t) * base);
            double rt = 0.0;
            for (std::size_t i = 0; i < up.size(); ++i) {
                const HPoint back = group_mul(cell.center, dilate(rho, up.center(i)));
                rt = std::max(rt, euclidean_dist(back, cell.family.center(i)));
            }
            const double mass = cell.family.total_mass();
            csv << k << ',' << j << ',' << cell.family.size() << ',' << format_double(mass) << ','
                << format_double(cell.koranyi_radius / rho) << ',' << format_double(ratio) << ','
                << format_double(rt) << '\n';
            mass_total += mass;
            worst_frostman = std::max(worst_frostman, ratio);
            worst_roundtrip = std::max(worst_roundtrip, rt);
            ++n_cells;
            if (mass > best_mass) {
                best_mass = mass;
                largest = std::move(cell);
            }
        }
    }

    // energy(L nu_T) = rho^(-3(q-1)) energy(D_{1/rho} L nu_T) on conjugate grids
    double conj_error = 0.0;
    if (largest) {
        EnergyOptions o1 = energy_options(c);
        const GridSpec g = o1.grid_for(nu);
        o1.grid = g;
        EnergyOptions o2 = o1;
        o2.grid = GridSpec{g.cell_mu / rho, g.cell_s / (rho * rho)};
        const double e_cell = sector_energy(largest->family.left_translated(group_inv(largest->center)),
                                            c.q, 0.0, std::numbers::pi, o1);
        const double e_up = sector_energy(rescale_cell(*largest, rho), c.q, 0.0, std::numbers::pi, o2);
        conj_error = std::abs(std::pow(rho, -3.0 * (c.q - 1.0)) * e_up / e_cell - 1.0);
    }

    const double mass_ratio = mass_total / nu.total_mass();
    const bool ok = worst_frostman <= 4.0 && mass_ratio <= 8.0 && worst_roundtrip <= 1e-10 &&
                    conj_error <= 0.05;
    Report r;
    add_config(r, c);
    add_input(r, c, m);
    r.section("results");
    r.add("caps", caps.size());
    r.add("cells", n_cells);
    r.add("frostman_base", base);
    r.add("frostman_floor_rescaled", floor_up);
    r.add("frostman_ratio_max", worst_frostman);
    r.add("cell_mass_total", mass_ratio);
    r.add("largest_cell_mass", best_mass);
    r.add("roundtrip_error_max", worst_roundtrip);
    r.add("energy_conjugation_error", conj_error);
    r.add("status", std::string(ok ? "pass" : "fail"));
    r.save(out_path(c, "rescale_report.txt"));
    log << "rescale-demo: " << n_cells << " cells, worst Frostman ratio "
        << format_double(worst_frostman) << '\n';
    return ok ? kExitOk : kExitTolerance;
}

int cmd_generate(const RunConfig& c, std::ostream& log) {
    WeightedBallFamily nu;
    Report r;
    add_config(r, c);
    r.section("generator");
    r.add("kind", c.kind);
    if (c.kind == "cantor") {
        const auto spec = greedy_ifs(c.ratio, c.n, c.depth, c.seed);
        nu = heisenberg_cantor(spec);
        r.add("ratio", spec.r);
        r.add("translates", spec.translates.size());
        r.add("depth", spec.depth);
        r.add("similarity_dimension", spec.similarity_dimension());
        r.add("outer_scale", spec.outer_scale);
    } else if (c.kind == "solid") {
        nu = uniform_solid(c.delta.value_or(0.125));
    } else if (c.kind == "plane") {
        const double d = c.delta.value_or(0.125);
        nu = vertical_plane_sample(vertical_plane_count(d), d, c.seed);
    } else if (c.kind == "clusters") {
        nu = three_cluster_family(c.delta.value_or(0.2));
    } else if (c.kind == "random") {
        nu = random_family(c.n, c.delta.value_or(0.25), c.seed);
    } else if (c.kind == "single") {
        nu = make_family({HPoint{}}, {1.0}, c.delta.value_or(0.25));
    } else {
        throw std::invalid_argument("unknown generator kind '" + c.kind + "'");
    }
    const std::string path = out_path(c, "measure.txt");
    save_family(path, nu);
    std::ifstream in(path, std::ios::binary);
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    r.section("output");
    r.add("path", std::string("measure.txt"));
    r.add("sha1", git_blob_sha1(bytes));
    r.add("balls", nu.size());
    r.add("delta", nu.delta());
    r.save(out_path(c, "generate_report.txt"));
    log << "generate: " << nu.size() << " balls at delta " << format_double(nu.delta()) << '\n';
    return kExitOk;
}

int run_command(const RunConfig& c, std::ostream& log) {
    try {
        if (c.subcommand == "verify-lemmas") return cmd_verify_lemmas(c, log);
        if (c.subcommand == "energy") return cmd_energy(c, log);
        if (c.subcommand == "broad-narrow") return cmd_broad_narrow(c, log);
        if (c.subcommand == "rescale-demo") return cmd_rescale_demo(c, log);
        if (c.subcommand == "generate") return cmd_generate(c, log);
        log << "unknown subcommand '" << c.subcommand << "'\n";
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        log << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::out_of_range& e) {
        log << "input error: " << e.what() << '\n';
        return kExitInput;
    }
}

}  // namespace heiskak
