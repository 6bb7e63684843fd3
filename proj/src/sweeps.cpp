#include "smartsizer/sweeps.hpp"

#include "smartsizer/covproject.hpp"
#include "smartsizer/error.hpp"
#include "smartsizer/matrix_io.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

namespace smartsizer {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxAxes = 3;

bool is_effect_axis(const std::string& name) { return name == "n" || name == "delta" || name == "delta_min"; }

double param(const std::map<std::string, double>& params, const char* name) {
    const auto it = params.find(name);
    if (it == params.end()) fail(Errc::invalid_argument, std::string("missing template parameter '") + name + "'");
    return it->second;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

Vector json_vector(const json& j, const char* what) {
    if (!j.is_array() || j.empty()) fail(Errc::invalid_argument, std::string(what) + " must be a non-empty array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

EffectConfig uniform_effects(std::size_t dim, std::size_t best, double delta, double delta_min) {
    EffectConfig e;
    e.delta = Vector::Constant(static_cast<Eigen::Index>(dim), delta);
    e.delta(static_cast<Eigen::Index>(best)) = 0.0;
    e.best_index = best;
    e.delta_min = delta_min;
    return e;
}

struct PointResult {
    MonteCarloEstimate estimate;
    bool feasible = true;
};

// A point is feasible when the matrix validates; parametric templates must
// also be strictly positive definite.
bool build_spec(const Matrix& m, bool strict, CovarianceSpec& out) {
    try {
        out = validate_covariance(m);
        if (strict && out.semidefinite()) return false;
        diff_scales(out);
        return true;
    } catch (const Error& e) {
        if (e.code() == Errc::not_positive_definite || e.code() == Errc::degenerate_pair ||
            e.code() == Errc::invalid_argument) {
            return false;
        }
        throw;
    }
}

PointResult evaluate(const CovarianceSpec& sigma, const CriticalValues& cv, const EffectConfig& effects,
                     std::uint64_t n, const MonteCarloConfig& cfg) {
    const PowerEvaluator power(sigma, effects, cv, cfg);
    return PointResult{power.at(n), true};
}

std::vector<std::vector<double>> cartesian(const std::vector<SweepAxis>& axes) {
    std::vector<std::vector<double>> points{{}};
    for (const auto& axis : axes) {
        std::vector<std::vector<double>> next;
        for (const auto& prefix : points) {
            for (const double v : axis.values()) {
                auto p = prefix;
                p.push_back(v);
                next.push_back(std::move(p));
            }
        }
        points = std::move(next);
    }
    return points;
}

}  // namespace

std::vector<double> SweepAxis::values() const {
    if (steps < 2) fail(Errc::invalid_argument, "axis '" + name + "' needs at least 2 steps");
    std::vector<double> v(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        v[i] = i + 1 == steps ? upper
                              : lower + (upper - lower) * static_cast<double>(i) / static_cast<double>(steps - 1);
    }
    return v;
}

const char* template_name(SweepTemplate shape) {
    switch (shape) {
        case SweepTemplate::exchangeable: return "exchangeable";
        case SweepTemplate::block_exchangeable: return "block_exchangeable";
        case SweepTemplate::two_pair: return "two_pair";
        case SweepTemplate::hub: return "hub";
        case SweepTemplate::matrix: return "matrix";
    }
    return "?";
}

SweepTemplate parse_template(const std::string& name) {
    for (const auto t : {SweepTemplate::exchangeable, SweepTemplate::block_exchangeable, SweepTemplate::two_pair,
                         SweepTemplate::hub, SweepTemplate::matrix}) {
        if (name == template_name(t)) return t;
    }
    fail(Errc::invalid_argument, "unknown template '" + name + "'");
}

std::vector<std::string> template_parameters(SweepTemplate shape) {
    switch (shape) {
        case SweepTemplate::exchangeable: return {"sigma2", "rho"};
        case SweepTemplate::block_exchangeable: return {"sigma1w2", "sigma2w2", "rho1", "rho2", "singleton"};
        case SweepTemplate::two_pair: return {"rho1", "rho2", "sigma2"};
        case SweepTemplate::hub: return {"rho1", "rho2"};
        case SweepTemplate::matrix: return {};
    }
    return {};
}

Matrix template_matrix(const SweepSpec& spec, const std::map<std::string, double>& p) {
    switch (spec.shape) {
        case SweepTemplate::exchangeable:
            return exchangeable_matrix(spec.dim, param(p, "sigma2"), param(p, "rho"));
        case SweepTemplate::block_exchangeable: {
            const double s = param(p, "singleton");
            if (s < 1 || s > static_cast<double>(spec.dim) || s != std::floor(s)) {
                fail(Errc::invalid_argument, "singleton must be an arm index in 1..dim");
            }
            return block_exchangeable_matrix(spec.dim, static_cast<std::size_t>(s) - 1, param(p, "sigma1w2"),
                                             param(p, "sigma2w2"), param(p, "rho1"), param(p, "rho2"));
        }
        case SweepTemplate::two_pair: {
            const double r1 = param(p, "rho1");
            const double r2 = param(p, "rho2");
            const double s2 = param(p, "sigma2");
            const double s = std::sqrt(s2);
            Matrix m = Matrix::Identity(4, 4);
            m(0, 1) = m(1, 0) = r1;
            m(2, 3) = m(3, 2) = r2 * s;
            m(3, 3) = s2;
            return m;
        }
        case SweepTemplate::hub: {
            Matrix m = Matrix::Identity(4, 4);
            m(1, 3) = m(3, 1) = param(p, "rho1");
            m(2, 3) = m(3, 2) = param(p, "rho2");
            return m;
        }
        case SweepTemplate::matrix: return spec.matrix;
    }
    fail(Errc::invalid_argument, "unknown template");
}

SweepSpec parse_sweep_spec(std::string_view json_text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(Errc::parse_error, std::string("sweep spec: ") + e.what());
    }
    if (!j.is_object()) fail(Errc::parse_error, "sweep spec must be a JSON object");

    SweepSpec s;
    try {
        s.shape = parse_template(j.at("template").get<std::string>());
        switch (s.shape) {
            case SweepTemplate::two_pair:
            case SweepTemplate::hub: s.dim = 4; break;
            case SweepTemplate::block_exchangeable: s.dim = get_or<std::size_t>(j, "dim", 5); break;
            case SweepTemplate::exchangeable: s.dim = get_or<std::size_t>(j, "dim", 4); break;
            case SweepTemplate::matrix: {
                if (j.contains("matrix")) {
                    s.matrix = parse_matrix_json(json{{"rows", j.at("matrix")}}.dump());
                } else if (j.contains("sigma_file")) {
                    std::filesystem::path path = j.at("sigma_file").get<std::string>();
                    if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
                    s.matrix = read_matrix_file(path);
                } else {
                    fail(Errc::invalid_argument, "matrix template needs \"matrix\" or \"sigma_file\"");
                }
                s.dim = static_cast<std::size_t>(s.matrix.rows());
                break;
            }
        }
        if (s.dim < 2) fail(Errc::invalid_argument, "dim must be at least 2");

        // Template defaults, then user values.
        if (s.shape == SweepTemplate::exchangeable) s.params = {{"sigma2", 1.0}, {"rho", 0.0}};
        if (s.shape == SweepTemplate::block_exchangeable) {
            s.params = {{"sigma1w2", 1.0}, {"sigma2w2", 1.0}, {"rho1", 0.0}, {"rho2", 0.0}, {"singleton", 1.0}};
        }
        if (s.shape == SweepTemplate::two_pair) s.params = {{"rho1", 0.0}, {"rho2", 0.0}, {"sigma2", 1.0}};
        if (s.shape == SweepTemplate::hub) s.params = {{"rho1", 0.0}, {"rho2", 0.0}};
        const auto allowed = template_parameters(s.shape);
        const std::set<std::string> allowed_set(allowed.begin(), allowed.end());
        if (j.contains("params")) {
            for (const auto& [key, value] : j.at("params").items()) {
                if (!allowed_set.count(key)) fail(Errc::invalid_argument, "unknown template parameter '" + key + "'");
                s.params[key] = value.get<double>();
            }
        }

        for (const auto& a : j.at("axes")) {
            SweepAxis axis;
            axis.name = a.at("name").get<std::string>();
            axis.lower = a.at("lower").get<double>();
            axis.upper = a.at("upper").get<double>();
            axis.steps = a.at("steps").get<std::size_t>();
            if (!allowed_set.count(axis.name) && !is_effect_axis(axis.name)) {
                fail(Errc::invalid_argument, "unknown axis '" + axis.name + "'");
            }
            s.axes.push_back(axis);
        }

        const json& e = j.at("effects");
        s.effects.standardized = get_or<bool>(j, "standardized", false);
        if (e.contains("uniform")) {
            s.uniform = true;
            s.uniform_delta = e.at("uniform").get<double>();
            const auto best = e.at("best").get<std::size_t>();
            if (best < 1 || best > s.dim) fail(Errc::invalid_argument, "best must be an arm index in 1..dim");
            s.effects.best_index = best - 1;
            s.effects.delta = Vector::Constant(static_cast<Eigen::Index>(s.dim), s.uniform_delta);
            s.effects.delta(static_cast<Eigen::Index>(best - 1)) = 0.0;
        } else if (e.contains("theta")) {
            const std::string dir = get_or<std::string>(e, "direction", "higher");
            if (dir != "higher" && dir != "lower") fail(Errc::invalid_argument, "direction must be higher or lower");
            const EffectConfig from = effects_from_theta(json_vector(e.at("theta"), "theta"),
                                                         dir == "lower" ? Direction::lower_is_better
                                                                        : Direction::higher_is_better,
                                                         1.0);
            s.effects.delta = from.delta;
            s.effects.best_index = from.best_index;
        } else if (e.contains("delta")) {
            s.effects.delta = json_vector(e.at("delta"), "delta");
            if (e.contains("best")) {
                s.effects.best_index = e.at("best").get<std::size_t>() - 1;
            } else {
                Eigen::Index best = 0;
                s.effects.delta.minCoeff(&best);
                s.effects.best_index = static_cast<std::size_t>(best);
            }
        } else {
            fail(Errc::invalid_argument, "effects need \"uniform\", \"delta\" or \"theta\"");
        }
        if (static_cast<std::size_t>(s.effects.delta.size()) != s.dim) {
            fail(Errc::dimension_mismatch, "effect vector length does not match the matrix dimension");
        }

        s.delta_min_given = j.contains("delta_min");
        if (s.delta_min_given) {
            s.effects.delta_min = j.at("delta_min").get<double>();
        } else if (s.uniform) {
            s.effects.delta_min = s.uniform_delta;
        } else {
            fail(Errc::invalid_argument, "delta_min is required unless effects are uniform");
        }
        s.alpha = get_or<double>(j, "alpha", 0.05);
        s.n = get_or<std::uint64_t>(j, "n", 100);
        s.mc.reps = get_or<std::uint64_t>(j, "reps", kDefaultReps);
        s.mc.seed = get_or<std::uint64_t>(j, "seed", kDefaultSeed);
    } catch (const json::exception& e) {
        fail(Errc::parse_error, std::string("sweep spec: ") + e.what());
    }
    return s;
}

SweepTable run_sweep(const SweepSpec& spec) {
    if (spec.axes.empty() || spec.axes.size() > kMaxAxes) fail(Errc::invalid_argument, "a sweep needs 1 to 3 axes");
    std::set<std::string> names;
    bool matrix_axis = false;
    const auto allowed = template_parameters(spec.shape);
    for (const auto& a : spec.axes) {
        a.values();
        if (!names.insert(a.name).second) fail(Errc::invalid_argument, "duplicate axis '" + a.name + "'");
        if (!is_effect_axis(a.name)) {
            if (std::find(allowed.begin(), allowed.end(), a.name) == allowed.end()) {
                fail(Errc::invalid_argument, "unknown axis '" + a.name + "'");
            }
            matrix_axis = true;
        }
        if (a.name == "delta" && !spec.uniform) fail(Errc::invalid_argument, "a delta axis needs uniform effects");
    }
    spec.mc.validate();
    if (!(spec.alpha > 0.0 && spec.alpha <= 0.5)) fail(Errc::alpha_out_of_range, "alpha must lie in (0, 0.5]");

    const bool strict = spec.shape != SweepTemplate::matrix;
    SweepTable table;
    for (const auto& a : spec.axes) table.axes.push_back(a.name);
    const auto points = cartesian(spec.axes);
    table.rows.resize(points.size());

    // Without covariance axes one matrix and one set of critical values serve
    // the whole grid.
    CovarianceSpec fixed;
    CriticalValues fixed_cv;
    bool fixed_ok = false;
    if (!matrix_axis) {
        fixed_ok = build_spec(template_matrix(spec, spec.params), strict, fixed);
        if (fixed_ok) fixed_cv = critical_values(fixed, spec.alpha, spec.mc);
    }

    parallel_for(points.size(), [&](std::size_t idx) {
        const auto& point = points[idx];
        auto params = spec.params;
        EffectConfig effects = spec.effects;
        std::uint64_t n = spec.n;
        for (std::size_t a = 0; a < point.size(); ++a) {
            const std::string& name = spec.axes[a].name;
            const double v = point[a];
            if (name == "n") {
                if (v < 1) fail(Errc::invalid_argument, "n axis values must be at least 1");
                n = static_cast<std::uint64_t>(std::llround(v));
            } else if (name == "delta") {
                effects = uniform_effects(spec.dim, spec.effects.best_index, v,
                                          spec.delta_min_given ? spec.effects.delta_min : v);
                effects.standardized = spec.effects.standardized;
            } else if (name == "delta_min") {
                effects.delta_min = v;
            } else {
                params[name] = v;
            }
        }
        // A delta axis may overwrite delta_min; an explicit delta_min axis wins.
        for (std::size_t a = 0; a < point.size(); ++a) {
            if (spec.axes[a].name == "delta_min") effects.delta_min = point[a];
        }

        SweepRow& row = table.rows[idx];
        row.point = point;
        if (!matrix_axis) {
            row.feasible = fixed_ok;
            if (fixed_ok) row.estimate = evaluate(fixed, fixed_cv, effects, n, spec.mc).estimate;
            return;
        }
        CovarianceSpec sigma;
        row.feasible = build_spec(template_matrix(spec, params), strict, sigma);
        if (!row.feasible) return;
        const CriticalValues cv = critical_values(sigma, spec.alpha, spec.mc);
        row.estimate = evaluate(sigma, cv, effects, n, spec.mc).estimate;
    });
    return table;
}

SweepTable sweep_delta_min(const CovarianceSpec& sigma, const EffectConfig& effects,
                           const std::vector<double>& grid, double alpha, std::uint64_t n,
                           const MonteCarloConfig& cfg) {
    if (grid.empty()) fail(Errc::empty_input, "empty delta_min grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) fail(Errc::invalid_argument, "delta_min values must be positive");
        if (i && grid[i] < grid[i - 1]) fail(Errc::invalid_argument, "delta_min grid must be ascending");
    }
    effects.validate(sigma.dim());
    const CriticalValues cv = critical_values(sigma, alpha, cfg);
    SweepTable table{{"delta_min"}, std::vector<SweepRow>(grid.size())};
    parallel_for(grid.size(), [&](std::size_t i) {
        EffectConfig e = effects;
        e.delta_min = grid[i];
        table.rows[i] = SweepRow{{grid[i]}, evaluate(sigma, cv, e, n, cfg).estimate, true};
    });
    return table;
}

SweepTable sweep_uniform_delta(const CovarianceSpec& sigma, const std::vector<double>& grid, double alpha,
                               std::uint64_t n, const MonteCarloConfig& cfg, std::size_t best_index) {
    if (grid.empty()) fail(Errc::empty_input, "empty effect-size grid");
    if (best_index >= sigma.dim()) fail(Errc::invalid_argument, "best index out of range");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) fail(Errc::invalid_argument, "effect sizes must be positive");
        if (i && grid[i] < grid[i - 1]) fail(Errc::invalid_argument, "effect-size grid must be ascending");
    }
    const CriticalValues cv = critical_values(sigma, alpha, cfg);
    SweepTable table{{"delta"}, std::vector<SweepRow>(grid.size())};
    parallel_for(grid.size(), [&](std::size_t i) {
        const EffectConfig e = uniform_effects(sigma.dim(), best_index, grid[i], grid[i]);
        table.rows[i] = SweepRow{{grid[i]}, evaluate(sigma, cv, e, n, cfg).estimate, true};
    });
    return table;
}

std::string sweep_csv(const SweepTable& table) {
    std::string out;
    for (const auto& a : table.axes) out += a + ",";
    out += "power,mc_se,feasible\n";
    char buf[64];
    for (const auto& row : table.rows) {
        for (const double v : row.point) {
            std::snprintf(buf, sizeof buf, "%.17g,", v);
            out += buf;
        }
        if (row.feasible) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,1\n", row.estimate.value, row.estimate.mc_se);
        } else {
            std::snprintf(buf, sizeof buf, "NA,NA,0\n");
        }
        out += buf;
    }
    return out;
}

}  // namespace smartsizer
