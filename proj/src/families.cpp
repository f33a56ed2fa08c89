#include "annulus/families.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "annulus/errors.hpp"

namespace annulus {

namespace {

constexpr double kPi = std::numbers::pi;

double param(const std::map<std::string, std::string>& params, const std::string& key, double fallback,
             std::set<std::string>& used) {
    used.insert(key);
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("parameter '" + key + "' is not a number: " + it->second);
    }
}

// Two-stage Gauss-Legendre step for z' = X(z), stages solved by fixed-point
// iteration to 1e-15 (cap 100).
template <typename Field>
StripPoint gauss_legendre_step(const Field& field, const StripPoint& z, double h) {
    static const double s3 = std::sqrt(3.0);
    const double a11 = 0.25, a12 = 0.25 - s3 / 6.0;
    const double a21 = 0.25 + s3 / 6.0, a22 = 0.25;
    StripPoint k1 = field(z);
    StripPoint k2 = k1;
    for (int it = 0; it < 100; ++it) {
        const StripPoint n1 = field(z + h * (a11 * k1 + a12 * k2));
        const StripPoint n2 = field(z + h * (a21 * k1 + a22 * k2));
        const double change = (n1 - k1).lpNorm<Eigen::Infinity>() + (n2 - k2).lpNorm<Eigen::Infinity>();
        k1 = n1;
        k2 = n2;
        if (change < 1e-15) break;
    }
    StripPoint out = z + 0.5 * h * (k1 + k2);
    // The field is tangent to the boundary lines; keep r exactly there.
    if (z.y() == 1.0 || z.y() == -1.0) out.y() = z.y();
    return out;
}

double bilinear_lipschitz(const GridSamples& g, bool inverse) {
    // The partials of a bilinear interpolant on a cell lie between its two
    // parallel edge differences. Forward: spectral norm of the entrywise
    // absolute bound (sound). Inverse: worst case over the 16 edge choices.
    const double dx = 1.0 / g.n_theta;
    const double dy = 2.0 / (g.n_r - 1);
    auto at = [&](const std::vector<double>& v, int i, int j) {
        return v[static_cast<std::size_t>(j) * g.n_theta + (i % g.n_theta)];
    };
    double worst = 0.0;
    for (int j = 0; j + 1 < g.n_r; ++j) {
        for (int i = 0; i < g.n_theta; ++i) {
            double cand[4][2];
            for (int e = 0; e < 2; ++e) {
                cand[0][e] = 1.0 + (at(g.d_theta, i + 1, j + e) - at(g.d_theta, i, j + e)) / dx;
                cand[1][e] = (at(g.d_theta, i + e, j + 1) - at(g.d_theta, i + e, j)) / dy;
                cand[2][e] = (at(g.d_r, i + 1, j + e) - at(g.d_r, i, j + e)) / dx;
                cand[3][e] = 1.0 + (at(g.d_r, i + e, j + 1) - at(g.d_r, i + e, j)) / dy;
            }
            if (!inverse) {
                Eigen::Matrix2d m;
                m << std::max(std::abs(cand[0][0]), std::abs(cand[0][1])),
                    std::max(std::abs(cand[1][0]), std::abs(cand[1][1])),
                    std::max(std::abs(cand[2][0]), std::abs(cand[2][1])),
                    std::max(std::abs(cand[3][0]), std::abs(cand[3][1]));
                worst = std::max(worst, Eigen::JacobiSVD<Eigen::Matrix2d>(m).singularValues()(0));
                continue;
            }
            for (int mask = 0; mask < 16; ++mask) {
                Eigen::Matrix2d m;
                m << cand[0][mask & 1], cand[1][(mask >> 1) & 1], cand[2][(mask >> 2) & 1],
                    cand[3][(mask >> 3) & 1];
                const auto sv = Eigen::JacobiSVD<Eigen::Matrix2d>(m).singularValues();
                worst = std::max(worst, sv(1) > 0 ? 1.0 / sv(1) : 1e12);
            }
        }
    }
    return worst;
}

}  // namespace

LiftedMap rigid_rotation(double c) {
    LiftedMap m;
    m.forward = [c](const StripPoint& p) { return StripPoint{p.x() + c, p.y()}; };
    m.inverse = [c](const StripPoint& p) { return StripPoint{p.x() - c, p.y()}; };
    m.lipschitz_bound = m.inverse_lipschitz_bound = 1.0;
    m.displacement_bound = std::abs(c);
    m.label = "rigid(" + std::to_string(c) + ")";
    m.preserves_area = true;
    return m;
}

LiftedMap linear_twist(double k, double offset) {
    LiftedMap m;
    m.forward = [k, offset](const StripPoint& p) { return StripPoint{p.x() + offset + k * p.y(), p.y()}; };
    m.inverse = [k, offset](const StripPoint& p) { return StripPoint{p.x() - offset - k * p.y(), p.y()}; };
    // Largest singular value of [[1, k], [0, 1]].
    m.lipschitz_bound = m.inverse_lipschitz_bound = (std::abs(k) + std::sqrt(k * k + 4.0)) / 2.0;
    m.displacement_bound = std::abs(offset) + std::abs(k);
    m.label = "twist(" + std::to_string(k) + "," + std::to_string(offset) + ")";
    m.preserves_area = true;
    return m;
}

LiftedMap drift_contraction(double c, double s) {
    if (!(s > 0.0 && s < 0.5)) throw ConfigError("drift contraction requires 0 < s < 1/2");
    LiftedMap m;
    m.forward = [c, s](const StripPoint& p) {
        const double r = p.y();
        return StripPoint{p.x() + c, r - s * (1.0 - r * r)};
    };
    m.inverse = [c, s](const StripPoint& p) {
        // Root in [-1, 1] of s r^2 + r - s - y = 0.
        const double y = p.y();
        double r = (-1.0 + std::sqrt(1.0 + 4.0 * s * (s + y))) / (2.0 * s);
        if (y == 1.0 || y == -1.0) r = y;
        return StripPoint{p.x() - c, std::clamp(r, -1.0, 1.0)};
    };
    m.lipschitz_bound = 1.0 + 2.0 * s;
    m.inverse_lipschitz_bound = 1.0 / (1.0 - 2.0 * s);
    m.displacement_bound = std::abs(c);
    m.label = "drift(" + std::to_string(c) + "," + std::to_string(s) + ")";
    m.preserves_area = false;
    return m;
}

LiftedMap hamiltonian_bump(double c, double b, int steps) {
    if (!(c > b / kPi) || b <= 0.0) throw ConfigError("hamiltonian bump requires b > 0 and c > b / pi");
    if (steps < 1) throw ConfigError("hamiltonian bump requires steps >= 1");
    auto field = [c, b](const StripPoint& z) {
        const double t = 2.0 * kPi * z.x();
        const double r = z.y();
        return StripPoint{r * (c - (b / kPi) * std::cos(t)), b * std::sin(t) * (1.0 - r * r)};
    };
    auto flow = [field, steps](const StripPoint& z, double time) {
        const double h = time / steps;
        StripPoint p = z;
        for (int i = 0; i < steps; ++i) p = gauss_legendre_step(field, p, h);
        return p;
    };
    LiftedMap m;
    m.forward = [flow](const StripPoint& p) { return flow(p, 1.0); };
    m.inverse = [flow](const StripPoint& p) { return flow(p, -1.0); };
    const double a = c + b / kPi;
    const double lip_field = std::sqrt(a * a + 8.0 * b * b + 4.0 * kPi * kPi * b * b);
    m.lipschitz_bound = m.inverse_lipschitz_bound = 1.05 * std::exp(lip_field);
    m.displacement_bound = a;
    m.label = "bump(" + std::to_string(c) + "," + std::to_string(b) + ")";
    m.preserves_area = true;
    return m;
}

GridSamples load_grid_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open grid file " + path.string());
    struct Row { double ti, ri, to, ro; };
    std::vector<Row> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        Row r{};
        std::string extra;
        if (ss >> r.ti >> r.ri >> r.to >> r.ro && !(ss >> extra)) rows.push_back(r);
    }
    std::set<double> thetas, radii;
    for (const auto& r : rows) {
        thetas.insert(r.ti);
        radii.insert(r.ri);
    }
    GridSamples g;
    g.n_theta = static_cast<int>(thetas.size());
    g.n_r = static_cast<int>(radii.size());
    if (g.n_theta < 2 || g.n_r < 2 || rows.size() != thetas.size() * radii.size())
        throw ConfigError("grid file does not describe a full regular grid: " + path.string());
    g.d_theta.assign(rows.size(), 0.0);
    g.d_r.assign(rows.size(), 0.0);
    for (const auto& r : rows) {
        const int i = static_cast<int>(std::lround(r.ti * g.n_theta));
        const int j = static_cast<int>(std::lround((r.ri + 1.0) * (g.n_r - 1) / 2.0));
        if (i < 0 || i >= g.n_theta || j < 0 || j >= g.n_r ||
            std::abs(r.ti - static_cast<double>(i) / g.n_theta) > 1e-9 ||
            std::abs(r.ri - (-1.0 + 2.0 * j / (g.n_r - 1))) > 1e-9)
            throw ConfigError("grid row off the regular lattice in " + path.string());
        const std::size_t k = static_cast<std::size_t>(j) * g.n_theta + i;
        g.d_theta[k] = r.to - r.ti;
        g.d_r[k] = r.ro - r.ri;
    }
    return g;
}

GridSamples sample_grid(const LiftedMap& map, int n_theta, int n_r) {
    GridSamples g;
    g.n_theta = n_theta;
    g.n_r = n_r;
    g.d_theta.resize(static_cast<std::size_t>(n_theta) * n_r);
    g.d_r.resize(g.d_theta.size());
    for (int j = 0; j < n_r; ++j) {
        for (int i = 0; i < n_theta; ++i) {
            const StripPoint p{static_cast<double>(i) / n_theta, -1.0 + 2.0 * j / (n_r - 1)};
            const StripPoint q = map(p);
            const std::size_t k = static_cast<std::size_t>(j) * n_theta + i;
            g.d_theta[k] = q.x() - p.x();
            g.d_r[k] = q.y() - p.y();
        }
    }
    return g;
}

LiftedMap grid_map(GridSamples g, std::string label) {
    for (int i = 0; i < g.n_theta; ++i) {
        if (g.d_r[i] != 0.0 || g.d_r[static_cast<std::size_t>(g.n_r - 1) * g.n_theta + i] != 0.0)
            throw MapRegistrationError("grid map moves a boundary circle off itself");
    }
    auto shared = std::make_shared<const GridSamples>(std::move(g));
    auto disp = [shared](const StripPoint& p) {
        const GridSamples& s = *shared;
        const double u = (p.x() - std::floor(p.x())) * s.n_theta;
        const double v = (std::clamp(p.y(), -1.0, 1.0) + 1.0) * (s.n_r - 1) / 2.0;
        int i = std::min(static_cast<int>(u), s.n_theta - 1);
        int j = std::min(static_cast<int>(v), s.n_r - 2);
        const double fu = u - i, fv = v - j;
        const int i1 = (i + 1) % s.n_theta;
        auto at = [&](const std::vector<double>& a, int ii, int jj) {
            return a[static_cast<std::size_t>(jj) * s.n_theta + ii];
        };
        auto lerp = [&](const std::vector<double>& a) {
            return (1 - fu) * (1 - fv) * at(a, i, j) + fu * (1 - fv) * at(a, i1, j) +
                   (1 - fu) * fv * at(a, i, j + 1) + fu * fv * at(a, i1, j + 1);
        };
        return StripPoint{lerp(s.d_theta), lerp(s.d_r)};
    };
    LiftedMap m;
    m.forward = [disp](const StripPoint& p) {
        StripPoint q = p + disp(p);
        if (p.y() == 1.0 || p.y() == -1.0) q.y() = p.y();
        return q;
    };
    m.inverse = [disp, fwd = m.forward](const StripPoint& target) {
        // Damped fixed-point iteration q <- target - d(q), Newton on stall.
        StripPoint q = target - disp(target);
        q.y() = std::clamp(q.y(), -1.0, 1.0);
        for (int it = 0; it < 100; ++it) {
            const StripPoint res = fwd(q) - target;
            if (res.lpNorm<Eigen::Infinity>() < 1e-12) break;
            const double h = 1e-7;
            Eigen::Matrix2d jac;
            jac.col(0) = (fwd(q + StripPoint{h, 0}) - fwd(q - StripPoint{h, 0})) / (2 * h);
            const double ylo = std::max(-1.0, q.y() - h), yhi = std::min(1.0, q.y() + h);
            jac.col(1) = (fwd({q.x(), yhi}) - fwd({q.x(), ylo})) / (yhi - ylo);
            StripPoint step = jac.fullPivLu().solve(res);
            if (!step.allFinite()) step = res;
            q -= step;
            q.y() = std::clamp(q.y(), -1.0, 1.0);
        }
        if (target.y() == 1.0 || target.y() == -1.0) q.y() = target.y();
        return q;
    };
    m.lipschitz_bound = 1.25 * bilinear_lipschitz(*shared, false);
    m.inverse_lipschitz_bound = 1.25 * bilinear_lipschitz(*shared, true);
    double bound = 0.0;
    for (double d : shared->d_theta) bound = std::max(bound, std::abs(d));
    m.displacement_bound = bound;
    m.label = std::move(label);
    m.preserves_area = false;
    return m;
}

ValidationReport validate_map(const LiftedMap& map, int samples, std::uint64_t seed) {
    ValidationReport rep;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> th(-3.0, 3.0), rr(-1.0, 1.0), step(1e-4, 1e-1), ang(0.0, 2 * kPi);
    for (int i = 0; i < samples; ++i) {
        StripPoint p{th(rng), rr(rng)};
        if (i % 10 == 0) p.y() = (i % 20 == 0) ? 1.0 : -1.0;
        const StripPoint hp = map(p);
        rep.equivariance_residual =
            std::max(rep.equivariance_residual, (map(deck(p, 1)) - deck(hp, 1)).norm());
        if (p.y() == 1.0 || p.y() == -1.0)
            rep.boundary_residual = std::max(rep.boundary_residual, std::abs(hp.y() - p.y()));
        rep.inverse_residual = std::max(rep.inverse_residual, (map.inverse(hp) - p).norm());
        const double d = step(rng), a = ang(rng);
        StripPoint q = p + d * StripPoint{std::cos(a), std::sin(a)};
        q.y() = std::clamp(q.y(), -1.0, 1.0);
        const double pq = (q - p).norm();
        if (pq > 0) rep.worst_lipschitz_ratio = std::max(rep.worst_lipschitz_ratio, (map(q) - hp).norm() / pq);
        if (map.preserves_area && i % 10 == 5) {
            const double h = 1e-5;
            const StripPoint c{p.x(), std::clamp(p.y(), -1.0 + 2 * h, 1.0 - 2 * h)};
            Eigen::Matrix2d jac;
            jac.col(0) = (map(c + StripPoint{h, 0}) - map(c - StripPoint{h, 0})) / (2 * h);
            jac.col(1) = (map(c + StripPoint{0, h}) - map(c - StripPoint{0, h})) / (2 * h);
            if (std::abs(jac.determinant() - 1.0) > 1e-5) rep.area_check_warning = true;
        }
    }
    if (rep.equivariance_residual >= 1e-12)
        throw MapRegistrationError(map.label + ": equivariance residual " + std::to_string(rep.equivariance_residual));
    if (rep.boundary_residual >= 1e-12)
        throw MapRegistrationError(map.label + ": boundary circles not preserved");
    if (rep.inverse_residual >= 1e-9)
        throw MapRegistrationError(map.label + ": inverse residual " + std::to_string(rep.inverse_residual));
    if (rep.worst_lipschitz_ratio > map.lipschitz_bound * (1.0 + 1e-9))
        throw MapRegistrationError(map.label + ": declared Lipschitz bound violated");
    return rep;
}

std::vector<std::string> family_names() { return {"rigid", "twist", "drift", "bump", "grid"}; }

LiftedMap make_family(const std::string& family, const std::map<std::string, std::string>& params) {
    std::set<std::string> used;
    LiftedMap m;
    if (family == "rigid") {
        m = rigid_rotation(param(params, "c", 0.3, used));
    } else if (family == "twist") {
        m = linear_twist(param(params, "k", 0.5, used), param(params, "offset", 0.0, used));
    } else if (family == "drift") {
        m = drift_contraction(param(params, "c", 0.4, used), param(params, "s", 0.25, used));
    } else if (family == "bump") {
        const double steps = param(params, "steps", 16, used);
        m = hamiltonian_bump(param(params, "c", 0.2, used), param(params, "b", 0.05, used),
                             static_cast<int>(steps));
    } else if (family == "grid") {
        used.insert("file");
        auto it = params.find("file");
        if (it == params.end()) throw ConfigError("grid family requires 'file'");
        m = grid_map(load_grid_csv(it->second), "grid(" + it->second + ")");
    } else {
        throw ConfigError("unknown map family '" + family + "'");
    }
    for (const auto& [k, v] : params)
        if (!used.count(k)) throw ConfigError("unknown parameter '" + k + "' for family " + family);
    validate_map(m);
    return m;
}

}  // namespace annulus
