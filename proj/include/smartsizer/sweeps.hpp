#pragma once

// Power over parameter grids. Every grid point uses the same seed, so the
// critical-value and power draws are common random numbers across the grid.

#include "smartsizer/power.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace smartsizer {

struct SweepAxis {
    std::string name;
    double lower = 0.0;
    double upper = 0.0;
    std::size_t steps = 2;

    /// steps evenly spaced values from lower to upper, both included.
    std::vector<double> values() const;
};

enum class SweepTemplate {
    exchangeable,        // sigma2, rho
    block_exchangeable,  // sigma1w2, sigma2w2, rho1, rho2, singleton (1-based)
    two_pair,            // [[1,r1,0,0],[r1,1,0,0],[0,0,1,r2 s],[0,0,r2 s,s^2]], sigma2 = s^2
    hub,                 // [[1,0,0,0],[0,1,0,r1],[0,0,1,r2],[0,r1,r2,1]]
    matrix,              // fixed matrix
};

struct SweepSpec {
    SweepTemplate shape = SweepTemplate::exchangeable;
    std::size_t dim = 4;
    std::map<std::string, double> params;
    Matrix matrix;  // matrix template only
    std::vector<SweepAxis> axes;

    /// Effects: either a full vector (delta or theta) or a uniform value.
    EffectConfig effects;
    bool uniform = false;
    double uniform_delta = 0.0;
    bool delta_min_given = false;

    double alpha = 0.05;
    std::uint64_t n = 100;
    MonteCarloConfig mc;
};

/// Reads the JSON sweep description (see README). Relative "sigma_file" paths
/// resolve against base_dir. Errors: parse_error, invalid_argument.
SweepSpec parse_sweep_spec(std::string_view json_text, const std::string& base_dir = ".");

/// Parameter names accepted by a template (axes may also be n, delta, delta_min).
std::vector<std::string> template_parameters(SweepTemplate shape);
SweepTemplate parse_template(const std::string& name);
const char* template_name(SweepTemplate shape);

/// Builds the template matrix for the given parameter values.
Matrix template_matrix(const SweepSpec& spec, const std::map<std::string, double>& params);

struct SweepRow {
    std::vector<double> point;  // one value per axis
    MonteCarloEstimate estimate;
    bool feasible = true;
};

struct SweepTable {
    std::vector<std::string> axes;
    std::vector<SweepRow> rows;
};

/// Cartesian grid, last axis varying fastest. Points whose matrix is not
/// positive definite are marked infeasible. Errors (for the spec itself):
/// invalid_argument when there are more than 3 axes, fewer than 2 steps or an
/// unknown axis name.
SweepTable run_sweep(const SweepSpec& spec);

/// Power as a function of delta_min; the exclusion set is recomputed per point.
SweepTable sweep_delta_min(const CovarianceSpec& sigma, const EffectConfig& effects,
                           const std::vector<double>& grid, double alpha, std::uint64_t n,
                           const MonteCarloConfig& cfg);

/// Power with every non-best effect equal to delta and delta_min = delta.
SweepTable sweep_uniform_delta(const CovarianceSpec& sigma, const std::vector<double>& grid, double alpha,
                               std::uint64_t n, const MonteCarloConfig& cfg, std::size_t best_index);

/// Columns: axis values, power, mc_se, feasible.
std::string sweep_csv(const SweepTable& table);

}  // namespace smartsizer
