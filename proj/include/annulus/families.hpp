#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "annulus/core.hpp"

namespace annulus {

/// (theta, r) -> (theta + c, r).
LiftedMap rigid_rotation(double c);

/// (theta, r) -> (theta + offset + k r, r). The circle r = -offset/k is fixed.
LiftedMap linear_twist(double k = 0.5, double offset = 0.0);

/// (theta, r) -> (theta + c, r - s (1 - r^2)): every interior circle is pushed
/// towards the lower boundary. Requires 0 < s < 1/2.
LiftedMap drift_contraction(double c = 0.4, double s = 0.25);

/// Time-one map of the Hamiltonian
///   K(theta, r) = c r^2 / 2 + (b / 2 pi) cos(2 pi theta) (1 - r^2),
/// integrated with the two-stage Gauss-Legendre scheme (symplectic, order 4,
/// symmetric). Rest points (0, 0) (saddle) and (1/2, 0) (centre); the lift
/// has zero mean horizontal displacement. Requires c > b / pi.
LiftedMap hamiltonian_bump(double c = 0.2, double b = 0.05, int steps = 16);

/// Samples of a strip map over one period on a regular grid.
struct GridSamples {
    int n_theta = 0;  ///< columns at theta = i / n_theta
    int n_r = 0;      ///< rows at r = -1 + 2 j / (n_r - 1)
    std::vector<double> d_theta;  ///< displacement, row-major [j * n_theta + i]
    std::vector<double> d_r;
};

/// Reads rows `theta_in, r_in, theta_out, r_out`; lines that do not parse as
/// four numbers are skipped. The rows must cover a regular grid.
GridSamples load_grid_csv(const std::filesystem::path& path);

/// Bilinear interpolation of the sampled displacement, periodic in theta.
LiftedMap grid_map(GridSamples samples, std::string label = "grid");

/// Samples `map` on an n_theta x n_r grid (used by tests and by the CLI to
/// export families).
GridSamples sample_grid(const LiftedMap& map, int n_theta, int n_r);

struct ValidationReport {
    double equivariance_residual = 0.0;
    double boundary_residual = 0.0;
    double inverse_residual = 0.0;
    double worst_lipschitz_ratio = 0.0;  ///< max |H(p)-H(q)| / |p-q| seen
    bool area_check_warning = false;
};

/// Sampled registration checks; throws MapRegistrationError when a declared
/// property is violated.
ValidationReport validate_map(const LiftedMap& map, int samples = 1000, std::uint64_t seed = 7);

/// Builds a registered family from its name and parameters. Unknown names or
/// parameters raise ConfigError. The result passed validate_map.
LiftedMap make_family(const std::string& family, const std::map<std::string, std::string>& params);

std::vector<std::string> family_names();

}  // namespace annulus
