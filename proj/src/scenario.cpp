#include "annulus/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "annulus/brickwork.hpp"
#include "annulus/dichotomy.hpp"
#include "annulus/errors.hpp"
#include "annulus/families.hpp"
#include "annulus/fixed_index.hpp"
#include "annulus/flowgraph.hpp"
#include "annulus/parallel.hpp"
#include "annulus/rotation.hpp"

namespace fs = std::filesystem;

namespace annulus {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
    std::istringstream in(v);
    T out{};
    in >> out;
    if (!in || !(in >> std::ws).eof()) throw ConfigError("bad value '" + v + "' for " + key);
    return out;
}

}  // namespace

const std::vector<std::string>& pipeline_names() {
    static const std::vector<std::string> names{"fixed-points", "bricks", "reach", "dichotomy", "rotation",
                                                "verify-all"};
    return names;
}

ScenarioConfig parse_config(std::istream& in) {
    ScenarioConfig cfg;
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            static const std::vector<std::string> known{"map", "fixed_points", "bricks", "rotation", "dichotomy"};
            if (std::find(known.begin(), known.end(), section) == known.end())
                throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        const std::string full = section.empty() ? key : section + "." + key;

        if (full == "pipeline") {
            if (std::find(pipeline_names().begin(), pipeline_names().end(), value) == pipeline_names().end())
                throw ConfigError("unknown pipeline '" + value + "'");
            cfg.pipeline = value;
        } else if (full == "seed") {
            cfg.seed = parse_number<std::uint64_t>(full, value);
        } else if (full == "out") {
            cfg.out = value;
        } else if (full == "workers") {
            cfg.workers = parse_number<unsigned>(full, value);
        } else if (full == "map.family") {
            cfg.family = value;
        } else if (section == "map") {
            cfg.family_params[key] = value;
        } else if (full == "fixed_points.grid_n") {
            cfg.fixed_point_grid = parse_number<int>(full, value);
        } else if (full == "fixed_points.tol") {
            cfg.fixed_point_tol = parse_number<double>(full, value);
        } else if (full == "bricks.grid_n") {
            cfg.grid_n = parse_number<int>(full, value);
        } else if (full == "bricks.max_depth") {
            cfg.max_depth = parse_number<int>(full, value);
        } else if (full == "bricks.window") {
            cfg.window = parse_number<int>(full, value);
        } else if (full == "bricks.max_window") {
            cfg.max_window = parse_number<int>(full, value);
        } else if (full == "bricks.seed_bricks") {
            cfg.seed_bricks = parse_number<int>(full, value);
        } else if (full == "rotation.samples") {
            cfg.rotation_samples = parse_number<int>(full, value);
        } else if (full == "rotation.horizon") {
            cfg.horizon = parse_number<long>(full, value);
        } else if (full == "rotation.resolution") {
            cfg.resolution = parse_number<int>(full, value);
        } else if (full == "rotation.threshold") {
            cfg.threshold = parse_number<double>(full, value);
        } else if (full == "dichotomy.neighbourhood_radius") {
            cfg.neighbourhood_radius = parse_number<double>(full, value);
        } else if (full == "dichotomy.mc_samples") {
            cfg.mc_samples = parse_number<std::size_t>(full, value);
        } else if (full == "dichotomy.fixed_point_grid") {
            cfg.dichotomy_fixed_point_grid = parse_number<int>(full, value);
        } else {
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + full + "'");
        }
    }
    // Family parameters are checked by the registry.
    make_family(cfg.family, cfg.family_params);
    return cfg;
}

ScenarioConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    return parse_config(in);
}

std::string format_config(const ScenarioConfig& c, bool runtime_keys) {
    std::ostringstream o;
    o << std::setprecision(17);
    o << "pipeline = " << c.pipeline << "\nseed = " << c.seed << "\n";
    if (runtime_keys) o << "out = " << c.out << "\nworkers = " << c.workers << "\n";
    o << "[map]\nfamily = " << c.family << "\n";
    for (const auto& [k, v] : c.family_params) o << k << " = " << v << "\n";
    o << "[fixed_points]\ngrid_n = " << c.fixed_point_grid << "\ntol = " << c.fixed_point_tol << "\n";
    o << "[bricks]\ngrid_n = " << c.grid_n << "\nmax_depth = " << c.max_depth << "\nwindow = " << c.window
      << "\nmax_window = " << c.max_window << "\nseed_bricks = " << c.seed_bricks << "\n";
    o << "[rotation]\nsamples = " << c.rotation_samples << "\nhorizon = " << c.horizon
      << "\nresolution = " << c.resolution << "\nthreshold = " << c.threshold << "\n";
    o << "[dichotomy]\nneighbourhood_radius = " << c.neighbourhood_radius << "\nmc_samples = " << c.mc_samples
      << "\nfixed_point_grid = " << c.dichotomy_fixed_point_grid << "\n";
    return o.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<ManifestEntry> build_manifest(const fs::path& dir) {
    std::vector<ManifestEntry> out;
    if (!fs::exists(dir)) return out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const std::string rel = fs::relative(e.path(), dir).generic_string();
        if (rel == "manifest.txt") continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        const std::string bytes = buf.str();
        out.push_back({rel, bytes.size(), fnv1a64(bytes)});
    }
    std::sort(out.begin(), out.end(), [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
    return out;
}

void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& m) {
    out << "# path bytes fnv1a64\n";
    for (const auto& e : m)
        out << e.path << " " << e.bytes << " " << std::hex << std::setw(16) << std::setfill('0') << e.hash << std::dec
            << std::setfill(' ') << "\n";
}

namespace {

struct Context {
    const ScenarioConfig& cfg;
    fs::path dir;
    RunReport& report;
};

std::ofstream open_out(const fs::path& p) {
    fs::create_directories(p.parent_path());
    std::ofstream f(p);
    f << std::setprecision(12);
    return f;
}

// Runs one stage, recording its time and mapping stage errors to exit codes.
int stage(Context& ctx, const std::string& name, const std::function<int()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    int code = 0;
    try {
        code = body();
    } catch (const ConfigError&) {
        throw;
    } catch (const NonIsolatedFixedSet& e) {
        ctx.report.verdicts.push_back(name + ": hypotheses fail: " + e.what());
        code = 2;
    } catch (const IndexHalvingError& e) {
        ctx.report.verdicts.push_back(name + ": hypotheses fail: " + e.what());
        code = 2;
    } catch (const Error& e) {
        ctx.report.verdicts.push_back(name + ": " + e.what());
        code = 3;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ctx.report.timings.push_back({name, secs});
    if (code != 0) {
        auto f = open_out(ctx.dir / (name + ".error.txt"));
        f << "stage = " << name << "\nexit_code = " << code << "\nmessage = " << ctx.report.verdicts.back() << "\n";
    }
    return code;
}

std::vector<StripPoint> fixed_point_list(const LiftedMap& h) {
    FixedPointOptions o;
    o.grid_n = 256;
    o.compute_indices = false;
    std::vector<StripPoint> pts;
    for (const auto& f : find_fixed_points(h, o)) pts.push_back(f.lifted());
    return pts;
}

int run_fixed_points(Context& ctx, const LiftedMap& h) {
    FixedPointOptions o;
    o.grid_n = ctx.cfg.fixed_point_grid;
    o.tol = ctx.cfg.fixed_point_tol;
    const NielsenClassTable t = nielsen_partition(h, find_fixed_points(h, o));
    auto f = open_out(ctx.dir / "fixed_points.txt");
    write_fixed_point_report(f, t);
    f << "[summary]\ncount = " << t.total() << "\nclass_code = " << fixed_point_exit_code(t) << "\n";
    ctx.report.verdicts.push_back("fixed-points: " + std::to_string(t.total()) + " fixed points in " +
                                  std::to_string(t.classes.size()) + " classes");
    return 0;
}

BrickDecomposition make_bricks(const ScenarioConfig& cfg, const LiftedMap& h) {
    return build_brick_decomposition(h, BrickOptions{cfg.grid_n, cfg.max_depth, 0.0}, fixed_point_list(h));
}

int run_bricks(Context& ctx, const LiftedMap& h) {
    const BrickDecomposition d = make_bricks(ctx.cfg, h);
    const DecompositionCheck c = check_decomposition(h, d);
    {
        auto f = open_out(ctx.dir / "bricks.txt");
        write_decomposition(f, d);
    }
    auto f = open_out(ctx.dir / "bricks_check.txt");
    f << "bricks = " << d.bricks.size() << "\nboundary_rectangles = " << d.boundary_chain.size()
      << "\nepsilon = " << d.epsilon << "\nequivariant = " << c.equivariant
      << "\nmargins_positive = " << c.margins_positive << "\nboundary_rectangles_ok = " << c.boundary_rectangles
      << "\nchain = " << c.chain << "\ndisjoint_interiors = " << c.disjoint_interiors << "\ncovers = " << c.covers
      << "\nok = " << c.ok() << "\n";
    ctx.report.verdicts.push_back(std::string("bricks: ") + std::to_string(d.bricks.size()) + " per period, " +
                                  (c.ok() ? "invariants hold" : "invariants FAIL"));
    return c.ok() ? 0 : 3;
}

int run_reach(Context& ctx, const LiftedMap& h) {
    const ScenarioConfig& cfg = ctx.cfg;
    const BrickDecomposition d = make_bricks(cfg, h);
    const BrickGraph g = build_brick_graph(h, d);
    const int b0 = d.boundary_chain.front();
    const BrickSet a = attractor_auto(g, d, b0, cfg.window, cfg.max_window);
    const BrickSet r = repeller_auto(g, d, b0, cfg.window, cfg.max_window);
    const BrickSet a2 = attractor(g, d, b0, 2 * a.window);
    const bool stable = a.bounded_left == a2.bounded_left && a.bounded_right == a2.bounded_right &&
                        a.meets_upper_boundary == a2.meets_upper_boundary;
    {
        auto f = open_out(ctx.dir / "graph.txt");
        write_graph(f, g);
    }
    {
        auto f = open_out(ctx.dir / "attractor.txt");
        write_brick_set(f, a);
    }
    {
        auto f = open_out(ctx.dir / "repeller.txt");
        write_brick_set(f, r);
    }
    auto f = open_out(ctx.dir / "reach.txt");
    const ProbeCase probe = boundedness_probe(a, r);
    f << "probe = " << to_string(probe) << "\nwindow = " << a.window << "\nwindow_stable = " << stable << "\n";
    bool all_pass = true;
    const int n = static_cast<int>(d.bricks.size());
    const int seeds = std::max(1, std::min(cfg.seed_bricks, n));
    for (int s = 0; s < seeds; ++s) {
        const int id = static_cast<int>(static_cast<long long>(s) * n / seeds);
        const P1Report p = check_p1(g, id, a.window);
        all_pass = all_pass && p.pass();
        f << "p1 = " << id << " " << (p.pass() ? "pass" : "fail") << "\n";
    }
    ctx.report.verdicts.push_back("reach: probe " + to_string(probe) + (all_pass ? ", P1 holds" : ", P1 FAILS"));
    return all_pass && stable ? 0 : 3;
}

int run_dichotomy(Context& ctx, const LiftedMap& h) {
    const ScenarioConfig& cfg = ctx.cfg;
    ClassifyOptions o;
    o.grid_n = cfg.grid_n;
    o.window = cfg.window;
    o.max_window = cfg.max_window;
    o.fixed_point_grid = cfg.dichotomy_fixed_point_grid;
    o.fixed_point_tol = cfg.fixed_point_tol;
    o.construction.neighbourhood_radius = cfg.neighbourhood_radius;
    o.construction.mc_samples = cfg.mc_samples;
    o.construction.seed = cfg.seed;
    const Verdict v = classify(h, o);
    {
        auto f = open_out(ctx.dir / "verdict.txt");
        write_verdict(f, v);
    }
    if (v.result && v.result->alternative != Alternative::NoneFound) {
        auto f = open_out(ctx.dir / "witness.csv");
        write_curve_csv(f, v.result->witness);
    }
    std::string what = v.message;
    if (v.result) what = to_string(v.result->alternative) + " (" + v.result->branch + ")";
    ctx.report.verdicts.push_back("dichotomy: " + what);
    return v.exit_code;
}

int run_rotation(Context& ctx, const LiftedMap& h) {
    const ScenarioConfig& cfg = ctx.cfg;
    const RotationReport rr = rotation_set_estimate(h, cfg.rotation_samples, cfg.horizon, cfg.seed);
    const MeanDisplacement mean = mean_displacement(h, Quadrature::Grid, cfg.resolution);
    const double area = signed_area_between(h, vertical_arc(0.25));
    const std::vector<StripPoint> starts{{0.0, 0.8}, {0.0, -0.8}};
    const std::vector<OrbitProbe> probes = unbounded_orbit_probe(h, starts, cfg.horizon, cfg.threshold);
    auto f = open_out(ctx.dir / "rotation.txt");
    f << "[rotation_set]\na = " << rr.a << "\nb = " << rr.b << "\nwidening = " << rr.widening
      << "\norbits = " << rr.orbits.size() << "\nhorizon = " << cfg.horizon << "\n";
    f << "[mean_displacement]\nvalue = " << mean.value << "\nerror = " << mean.error << "\nmass = 2\n";
    f << "[area]\narc_theta = 0.25\nsigned_area = " << area << "\ndifference = " << mean.value - area << "\n";
    f << "[probes]\nthreshold = " << cfg.threshold << "\n";
    for (const auto& p : probes)
        f << "probe = " << p.start.x() << " " << p.start.y() << " right " << p.max_right_excursion << " left "
          << p.max_left_excursion << " " << (p.unbounded_right ? "R" : "-") << (p.unbounded_left ? "L" : "-")
          << "\n";
    f << "twist_evidence = " << twist_evidence(probes) << "\n";
    for (std::size_t i = 0; i < starts.size(); ++i) {
        auto o = open_out(ctx.dir / ("orbit_" + std::to_string(i) + ".csv"));
        write_orbit_csv(o, h, starts[i], cfg.horizon);
    }
    ctx.report.verdicts.push_back("rotation: interval [" + std::to_string(rr.a) + ", " + std::to_string(rr.b) + "]");
    return 0;
}

int run_pipeline(Context& ctx, const std::string& pipeline, const LiftedMap& h) {
    if (pipeline == "fixed-points") return stage(ctx, "fixed-points", [&] { return run_fixed_points(ctx, h); });
    if (pipeline == "bricks") return stage(ctx, "bricks", [&] { return run_bricks(ctx, h); });
    if (pipeline == "reach") return stage(ctx, "reach", [&] { return run_reach(ctx, h); });
    if (pipeline == "dichotomy") return stage(ctx, "dichotomy", [&] { return run_dichotomy(ctx, h); });
    if (pipeline == "rotation") return stage(ctx, "rotation", [&] { return run_rotation(ctx, h); });
    throw ConfigError("unknown pipeline '" + pipeline + "'");
}

struct SuiteEntry {
    std::string name;
    std::string family;
    std::map<std::string, std::string> params;
    std::vector<std::pair<std::string, int>> expected;  // pipeline, exit code
};

const std::vector<SuiteEntry>& shipped_suite() {
    static const std::vector<SuiteEntry> suite{
        {"rigid", "rigid", {{"c", "0.3"}},
         {{"fixed-points", 0}, {"bricks", 0}, {"reach", 0}, {"dichotomy", 0}, {"rotation", 0}}},
        {"drift", "drift", {}, {{"fixed-points", 0}, {"bricks", 0}, {"reach", 0}, {"dichotomy", 0}, {"rotation", 0}}},
        {"bump", "bump", {}, {{"fixed-points", 0}, {"dichotomy", 2}, {"rotation", 0}}},
        {"twist", "twist", {}, {{"fixed-points", 2}, {"dichotomy", 2}, {"rotation", 0}}},
    };
    return suite;
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& cfg) {
    RunReport report;
    report.pipeline = cfg.pipeline;
    set_worker_count(cfg.workers);
    const fs::path out(cfg.out);
    fs::create_directories(out);
    {
        std::ofstream f(out / "config.txt");
        f << format_config(cfg, false);
    }

    if (cfg.pipeline != "verify-all") {
        const LiftedMap h = make_family(cfg.family, cfg.family_params);
        Context ctx{cfg, out, report};
        report.exit_code = run_pipeline(ctx, cfg.pipeline, h);
    } else {
        std::ofstream summary(out / "suite.txt");
        bool green = true;
        for (const SuiteEntry& e : shipped_suite()) {
            ScenarioConfig sub = cfg;
            sub.family = e.family;
            sub.family_params = e.params;
            const LiftedMap h = make_family(sub.family, sub.family_params);
            for (const auto& [pipeline, expected] : e.expected) {
                Context ctx{sub, out / e.name / pipeline, report};
                const int code = run_pipeline(ctx, pipeline, h);
                const bool ok = code == expected;
                green = green && ok;
                summary << (ok ? "PASS " : "FAIL ") << e.name << " " << pipeline << " exit " << code << " expected "
                        << expected << "\n";
            }
        }
        summary.close();
        report.exit_code = green ? 0 : 3;
    }
    report.manifest = build_manifest(out);
    std::ofstream m(out / "manifest.txt");
    write_manifest(m, report.manifest);
    return report;
}

}  // namespace annulus
