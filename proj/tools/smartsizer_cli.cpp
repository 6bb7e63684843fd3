// smartsizer command-line tool. Talks to the library only through the C API.
//
// Exit codes: 0 success, 2 validation error, 3 undefined computation,
// 4 numerical or internal failure. Errors are printed as one line:
//   error: code=<name> exit=<k> message="<text>"

#include "smartsizer/smartsizer.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr int kSchemaVersion = 1;

struct CliError {
    int exit_code;
    std::string code;
    std::string message;
};

int exit_code_for(ss_status s) {
    switch (s) {
        case SS_ERR_EMPTY_EXCLUSION_SET:
        case SS_ERR_NOT_REACHED: return 3;
        case SS_ERR_NUMERICAL:
        case SS_ERR_INTERNAL: return 4;
        default: return 2;
    }
}

void check(ss_status s) {
    if (s != SS_OK) throw CliError{exit_code_for(s), ss_status_name(s), ss_last_error()};
}

[[noreturn]] void usage_error(const std::string& message) { throw CliError{2, "invalid_argument", message}; }

struct CovDeleter {
    void operator()(ss_covariance* c) const { ss_covariance_destroy(c); }
};
struct EffDeleter {
    void operator()(ss_effects* e) const { ss_effects_destroy(e); }
};
using CovPtr = std::unique_ptr<ss_covariance, CovDeleter>;
using EffPtr = std::unique_ptr<ss_effects, EffDeleter>;

CovPtr load_cov(const std::string& path) {
    ss_covariance* c = nullptr;
    check(ss_covariance_load(path.c_str(), &c));
    return CovPtr(c);
}

std::vector<double> read_vector(const std::string& arg) {
    std::size_t len = 0;
    check(ss_read_vector(arg.c_str(), nullptr, 0, &len));
    std::vector<double> v(len);
    check(ss_read_vector(arg.c_str(), v.data(), v.size(), &len));
    return v;
}

std::vector<std::string> warning_list(unsigned w) {
    std::vector<std::string> out;
    if (w & SS_WARN_NOTHING_TO_EXCLUDE) out.emplace_back("nothing_to_exclude");
    if (w & SS_WARN_ALREADY_POWERED) out.emplace_back("already_powered");
    if (w & SS_WARN_COVARIANCE_SEMIDEFINITE) out.emplace_back("covariance_semidefinite");
    if (w & SS_WARN_VERIFICATION_RERUN) out.emplace_back("verification_rerun");
    return out;
}

json one_based(const std::vector<std::size_t>& idx) {
    json a = json::array();
    for (const auto i : idx) a.push_back(i + 1);
    return a;
}

json manifest(const std::string& command, const json& params, std::uint64_t seed, Clock::time_point start) {
    return json{{"command", command},
                {"params", params},
                {"seed", seed},
                {"generator", ss_generator_name()},
                {"version", ss_version()},
                {"wall_time_seconds", std::chrono::duration<double>(Clock::now() - start).count()}};
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream os(path);
    if (!os) throw CliError{2, "io_error", "cannot open " + path};
    os << text;
    if (!os) throw CliError{2, "io_error", "write failed: " + path};
}

void emit_json(const std::string& path, const json& report) { write_text(path, report.dump(2) + "\n"); }

// CSV goes to path (or stdout); the manifest goes next to it, or to stderr.
void emit_csv(const std::string& path, const std::string& csv, const json& mf) {
    write_text(path, csv);
    if (path.empty() || path == "-") {
        std::cerr << json{{"schema_version", kSchemaVersion}, {"manifest", mf}}.dump() << "\n";
    } else {
        emit_json(path + ".manifest.json", json{{"schema_version", kSchemaVersion}, {"manifest", mf}});
    }
}

std::string fmt(double v) {
    if (std::isnan(v)) return "NA";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Shared by power and size.
struct EffectArgs {
    std::string sigma;
    std::string delta;
    std::string theta;
    std::string direction = "higher";
    std::size_t best = 0;  // 1-based; 0 = infer from the zero effect
    double delta_min = 0.0;
    bool standardized = false;
    double alpha = 0.05;
    std::uint64_t reps = 1000000;
    std::uint64_t seed = 20190527;
    std::string out;

    void add(CLI::App* cmd) {
        cmd->add_option("--sigma", sigma, "Covariance matrix file (CSV or JSON)")->required();
        auto* d = cmd->add_option("--delta", delta, "Effect sizes: file or inline list");
        auto* t = cmd->add_option("--theta", theta, "Regime means: file or inline list");
        d->excludes(t);
        cmd->add_option("--direction", direction, "With --theta: higher or lower is better")
            ->check(CLI::IsMember({"higher", "lower"}));
        cmd->add_option("--best", best, "With --delta: 1-based index of the best regime");
        cmd->add_option("--delta-min", delta_min, "Minimum detectable effect")->required();
        cmd->add_flag("--standardized", standardized, "Effects are in units of sd(theta_i - theta_best)");
        cmd->add_option("--alpha", alpha, "Familywise error rate")->capture_default_str();
        cmd->add_option("--reps", reps, "Monte Carlo repetitions")->capture_default_str();
        cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
        cmd->add_option("--out", out, "Report file (default stdout)");
    }

    json params() const {
        json p{{"sigma", sigma},
               {"delta_min", delta_min},
               {"standardized", standardized},
               {"alpha", alpha},
               {"reps", reps},
               {"seed", seed}};
        if (!delta.empty()) {
            p["delta"] = delta;
            p["best"] = best;
        } else {
            p["theta"] = theta;
            p["direction"] = direction;
        }
        return p;
    }

    EffPtr effects(std::size_t dim) const {
        ss_effects* e = nullptr;
        if (!delta.empty()) {
            const auto d = read_vector(delta);
            if (d.size() != dim) usage_error("--delta has " + std::to_string(d.size()) + " entries, sigma is " +
                                             std::to_string(dim) + "x" + std::to_string(dim));
            std::size_t b = best;
            if (b == 0) {
                for (std::size_t i = 0; i < d.size(); ++i) {
                    if (d[i] == 0.0) {
                        b = i + 1;
                        break;
                    }
                }
                if (b == 0) usage_error("--delta has no zero entry; pass --best");
            }
            if (b > dim) usage_error("--best out of range");
            check(ss_effects_from_delta(d.data(), d.size(), b - 1, delta_min, standardized ? 1 : 0, &e));
        } else if (!theta.empty()) {
            if (standardized) usage_error("--standardized applies to --delta only");
            const auto t = read_vector(theta);
            if (t.size() != dim) usage_error("--theta has " + std::to_string(t.size()) + " entries, sigma is " +
                                             std::to_string(dim) + "x" + std::to_string(dim));
            check(ss_effects_from_theta(t.data(), t.size(), direction == "lower" ? 1 : 0, delta_min, &e));
        } else {
            usage_error("one of --delta or --theta is required");
        }
        return EffPtr(e);
    }
};

std::vector<std::size_t> take(const std::vector<std::size_t>& v, std::size_t n) {
    return std::vector<std::size_t>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n));
}

void run_power(const EffectArgs& a, std::uint64_t n) {
    const auto start = Clock::now();
    const CovPtr cov = load_cov(a.sigma);
    const std::size_t dim = ss_covariance_dim(cov.get());
    const EffPtr eff = a.effects(dim);
    ss_power_report rep{};
    std::vector<double> crit(dim);
    std::vector<std::size_t> excl(dim);
    check(ss_power(cov.get(), eff.get(), n, a.alpha, ss_mc_config{a.reps, a.seed}, &rep, crit.data(), excl.data()));
    json params = a.params();
    params["n"] = n;
    const json report{{"schema_version", kSchemaVersion},
                      {"power", rep.estimate.value},
                      {"mc_se", rep.estimate.mc_se},
                      {"critical_values", crit},
                      {"exclusion_indices", one_based(take(excl, rep.exclusion_count))},
                      {"best_index", ss_effects_best_index(eff.get()) + 1},
                      {"warnings", warning_list(rep.warnings)},
                      {"manifest", manifest("power", params, a.seed, start)}};
    emit_json(a.out, report);
}

void run_size(const EffectArgs& a, double beta, std::uint64_t bisection_max) {
    const auto start = Clock::now();
    const CovPtr cov = load_cov(a.sigma);
    const std::size_t dim = ss_covariance_dim(cov.get());
    const EffPtr eff = a.effects(dim);
    ss_size_report rep{};
    std::vector<double> crit(dim);
    std::vector<std::size_t> excl(dim);
    check(ss_sample_size(cov.get(), eff.get(), a.alpha, beta, ss_mc_config{a.reps, a.seed}, &rep, crit.data(),
                         excl.data()));
    json params = a.params();
    params["beta"] = beta;
    json report{{"schema_version", kSchemaVersion},
                {"n", rep.n},
                {"c_star", rep.c_star},
                {"verified_power", rep.verified_power.value},
                {"verified_mc_se", rep.verified_power.mc_se},
                {"reps_used", rep.reps_used},
                {"critical_values", crit},
                {"exclusion_indices", one_based(take(excl, rep.exclusion_count))},
                {"best_index", ss_effects_best_index(eff.get()) + 1},
                {"warnings", warning_list(rep.warnings)}};
    if (bisection_max > 0) {
        params["bisection_max"] = bisection_max;
        ss_size_report bis{};
        check(ss_sample_size_bisection(cov.get(), eff.get(), a.alpha, beta, ss_mc_config{a.reps, a.seed},
                                       bisection_max, &bis));
        report["bisection"] = json{{"n", bis.n}, {"power", bis.verified_power.value}};
    }
    report["manifest"] = manifest("size", params, a.seed, start);
    emit_json(a.out, report);
}

void run_project(const std::string& sigma, const std::string& structure, std::size_t block_start,
                 const std::string& out, const std::string& report_path) {
    const auto start = Clock::now();
    const CovPtr cov = load_cov(sigma);
    const std::size_t dim = ss_covariance_dim(cov.get());
    ss_projection p{};
    std::vector<double> m(dim * dim);
    json params{{"sigma", sigma}, {"structure", structure}, {"out", out}};
    json report{{"schema_version", kSchemaVersion}};
    if (structure == "exchangeable") {
        check(ss_project(cov.get(), SS_EXCHANGEABLE, 0, &p, m.data()));
        report["params"] = json{{"sigma2", p.sigma2}, {"rho", p.rho}};
    } else {
        if (block_start < 1 || block_start > dim) usage_error("--block-start must lie in 1.." + std::to_string(dim));
        // The block runs cyclically from block_start; the arm just before it is the singleton.
        const std::size_t singleton = (block_start - 1 + dim - 1) % dim;
        params["block_start"] = block_start;
        check(ss_project(cov.get(), SS_BLOCK_EXCHANGEABLE, singleton, &p, m.data()));
        report["params"] = json{{"sigma1w2", p.sigma1w2}, {"sigma2w2", p.sigma2w2}, {"rho1", p.rho1},
                                {"rho2", p.rho2},         {"singleton", p.singleton + 1}};
    }
    if (!out.empty()) check(ss_matrix_save(m.data(), dim, out.c_str()));
    json rows = json::array();
    for (std::size_t i = 0; i < dim; ++i) rows.push_back(std::vector<double>(m.begin() + i * dim, m.begin() + (i + 1) * dim));
    report["matrix"] = rows;
    report["positive_definite"] = p.positive_definite != 0;
    report["frobenius_distance"] = p.distance;
    report["manifest"] = manifest("project", params, 0, start);
    emit_json(report_path, report);
}

// "100,200,300" or "50..500" or "50..500:25" (default step 50).
std::vector<std::uint64_t> parse_grid(const std::string& text) {
    std::vector<std::uint64_t> out;
    const auto dots = text.find("..");
    try {
        if (dots != std::string::npos) {
            const std::uint64_t lo = std::stoull(text.substr(0, dots));
            std::string rest = text.substr(dots + 2);
            std::uint64_t step = 50;
            const auto colon = rest.find(':');
            if (colon != std::string::npos) {
                step = std::stoull(rest.substr(colon + 1));
                rest = rest.substr(0, colon);
            }
            const std::uint64_t hi = std::stoull(rest);
            if (step == 0 || lo == 0 || hi < lo) usage_error("bad --n-grid range '" + text + "'");
            for (std::uint64_t n = lo; n <= hi; n += step) out.push_back(n);
        } else {
            std::stringstream ss(text);
            std::string item;
            while (std::getline(ss, item, ',')) {
                if (item.find_first_not_of(" \t") == std::string::npos) continue;
                out.push_back(std::stoull(item));
            }
        }
    } catch (const std::logic_error&) {
        usage_error("bad --n-grid '" + text + "'");
    }
    if (out.empty()) usage_error("empty --n-grid");
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i] == 0 || (i && out[i] <= out[i - 1])) usage_error("--n-grid must be ascending positive integers");
    }
    return out;
}

// Curve over an n grid, all points on the same draws, with a normal 95% MC band.
void run_power_curve(const EffectArgs& a, const std::string& n_grid) {
    const auto start = Clock::now();
    const auto grid = parse_grid(n_grid);
    const CovPtr cov = load_cov(a.sigma);
    const EffPtr eff = a.effects(ss_covariance_dim(cov.get()));
    std::vector<ss_estimate> est(grid.size());
    check(ss_power_curve(cov.get(), eff.get(), grid.data(), grid.size(), a.alpha, ss_mc_config{a.reps, a.seed},
                         est.data()));
    std::string csv = "n,power,mc_se,band_lower,band_upper\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double lo = std::max(0.0, est[i].value - 1.96 * est[i].mc_se);
        const double hi = std::min(1.0, est[i].value + 1.96 * est[i].mc_se);
        csv += std::to_string(grid[i]) + "," + fmt(est[i].value) + "," + fmt(est[i].mc_se) + "," + fmt(lo) + "," +
               fmt(hi) + "\n";
    }
    json params = a.params();
    params["n_grid"] = n_grid;
    emit_csv(a.out, csv, manifest("power", params, a.seed, start));
}

struct SimulateArgs {
    int design = 1;
    std::string n_grid;
    std::uint64_t n = 0;
    std::uint64_t reps = 1000;
    std::string method = "aipw";
    double alpha = 0.05;
    double delta_min = 0.5;
    double delta = -1.0;
    std::uint64_t seed = 20190527;
    std::uint64_t critical_reps = 20000;
    std::string out;
    std::string predict_sigma;
    std::uint64_t predict_reps = 1000000;
    bool estimate_sigma = false;
    std::string sigma_out;
    std::string export_data;
    std::string report;

    json params() const {
        return json{{"design", design},           {"n_grid", n_grid},   {"n", n},
                    {"reps", reps},               {"method", method},   {"alpha", alpha},
                    {"delta_min", delta_min},     {"delta", delta},     {"seed", seed},
                    {"critical_reps", critical_reps}, {"predict_sigma", predict_sigma},
                    {"predict_reps", predict_reps}, {"estimate_sigma", estimate_sigma},
                    // IPW sandwich uses the Jacobian of the weighted equation.
                    {"ipw_jacobian", "weighted"}};
    }
};

void run_simulate(const SimulateArgs& a) {
    const auto start = Clock::now();
    if (a.design != 1 && a.design != 2) usage_error("--design must be 1 or 2");
    const ss_method method = a.method == "ipw" ? SS_IPW : SS_AIPW;
    std::size_t dim = 0;
    check(ss_design_dim(a.design, &dim));

    if (!a.export_data.empty()) {
        if (a.n == 0) usage_error("--export-data needs --n");
        check(ss_trial_export_csv(a.design, a.n, a.delta, a.seed, a.export_data.c_str()));
    }

    if (a.estimate_sigma) {
        if (a.n == 0) usage_error("--estimate-sigma needs --n");
        if (a.sigma_out.empty()) usage_error("--estimate-sigma needs --sigma-out");
        std::vector<double> sigma(dim * dim);
        std::vector<double> theta(dim);
        std::uint64_t used = 0;
        check(ss_estimate_sigma(a.design, a.n, a.reps, method, a.delta, a.seed, sigma.data(), theta.data(), dim,
                                &used));
        check(ss_matrix_save(sigma.data(), dim, a.sigma_out.c_str()));
        const json report{{"schema_version", kSchemaVersion},
                          {"sigma_file", a.sigma_out},
                          {"theta_mean", theta},
                          {"replicates_used", used},
                          {"manifest", manifest("simulate", a.params(), a.seed, start)}};
        emit_json(a.report, report);
        return;
    }
    if (a.n_grid.empty()) {
        if (!a.export_data.empty()) return;
        usage_error("--n-grid is required (or --estimate-sigma / --export-data)");
    }
    const auto grid = parse_grid(a.n_grid);

    // Optional prediction from a posited covariance at the design's true effects.
    std::vector<ss_estimate> predicted;
    if (!a.predict_sigma.empty()) {
        const CovPtr cov = load_cov(a.predict_sigma);
        if (ss_covariance_dim(cov.get()) != dim) usage_error("--predict-sigma dimension does not match the design");
        std::vector<double> theta(dim);
        check(ss_design_theta(a.design, a.delta, theta.data(), dim));
        ss_effects* e = nullptr;
        check(ss_effects_from_theta(theta.data(), dim, 0, a.delta_min, &e));
        const EffPtr eff(e);
        predicted.resize(grid.size());
        check(ss_power_curve(cov.get(), eff.get(), grid.data(), grid.size(), a.alpha,
                             ss_mc_config{a.predict_reps, a.seed}, predicted.data()));
    }

    std::string csv = "n,power,mc_se,usable,singular,not_psd,bound_rate,predicted,predicted_mc_se\n";
    for (std::size_t g = 0; g < grid.size(); ++g) {
        ss_trial_config cfg = ss_trial_default(a.design);
        cfg.n = grid[g];
        cfg.reps = a.reps;
        cfg.alpha = a.alpha;
        cfg.delta_min = a.delta_min;
        cfg.delta = a.delta;
        cfg.method = method;
        cfg.seed = a.seed;
        cfg.critical_reps = a.critical_reps;
        ss_empirical_report rep{};
        check(ss_empirical_power(&cfg, &rep, nullptr));
        csv += std::to_string(grid[g]) + "," + fmt(rep.estimate.value) + "," + fmt(rep.estimate.mc_se) + "," +
               std::to_string(rep.usable) + "," + std::to_string(rep.singular) + "," +
               std::to_string(rep.not_psd) + "," + fmt(rep.bound_rate) + ",";
        csv += predicted.empty() ? "NA,NA\n"
                                 : fmt(predicted[g].value) + "," + fmt(predicted[g].mc_se) + "\n";
    }
    emit_csv(a.out, csv, manifest("simulate", a.params(), a.seed, start));
}

std::string read_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw CliError{2, "io_error", "cannot open " + path};
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void run_sweep(const std::string& spec_path, const std::string& out) {
    const auto start = Clock::now();
    const std::string text = read_file(spec_path);
    std::string base = ".";
    const auto slash = spec_path.find_last_of('/');
    if (slash != std::string::npos) base = spec_path.substr(0, slash);
    char* csv = nullptr;
    check(ss_sweep_run(text.c_str(), base.c_str(), &csv));
    const std::string table(csv);
    ss_string_free(csv);
    json params{{"spec", spec_path}};
    std::uint64_t seed = 20190527;
    try {
        const json j = json::parse(text);
        params["spec_content"] = j;
        if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
    } catch (const json::exception&) {
    }
    emit_csv(out, table, manifest("sweep", params, seed, start));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Power and sample size for SMART designs under multiple comparisons with the best"};
    app.set_version_flag("--version", std::string(ss_version()));
    app.require_subcommand(1);

    EffectArgs power_args;
    std::uint64_t power_n = 0;
    std::string power_grid;
    auto* power = app.add_subcommand("power", "Power to exclude every regime delta_min worse than the best");
    power_args.add(power);
    auto* pn = power->add_option("--n", power_n, "Total sample size")->check(CLI::PositiveNumber);
    auto* pg = power->add_option("--n-grid", power_grid, "Power curve CSV over a,b,c or lo..hi[:step]");
    pn->excludes(pg);

    EffectArgs size_args;
    double beta = 0.2;
    std::uint64_t bisection_max = 0;
    auto* size = app.add_subcommand("size", "Minimum sample size for power 1 - beta");
    size_args.add(size);
    size->add_option("--beta", beta, "Type-II error rate")->capture_default_str();
    size->add_option("--bisection-max", bisection_max, "Also cross-check by bisection on [1, N]");

    std::string proj_sigma;
    std::string proj_structure = "exchangeable";
    std::size_t block_start = 2;
    std::string proj_out;
    std::string proj_report;
    auto* project = app.add_subcommand("project", "Nearest exchangeable or block-exchangeable covariance");
    project->add_option("--sigma", proj_sigma, "Covariance matrix file")->required();
    project->add_option("--structure", proj_structure, "exchangeable or block")
        ->check(CLI::IsMember({"exchangeable", "block"}))
        ->capture_default_str();
    project->add_option("--block-start", block_start, "1-based first arm of the exchangeable block")
        ->capture_default_str();
    project->add_option("--out", proj_out, "Projected matrix file (.json for JSON, CSV otherwise)");
    project->add_option("--report", proj_report, "Report file (default stdout)");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Empirical power from simulated trials");
    simulate->add_option("--design", sim.design, "1 or 2")->required();
    simulate->add_option("--n-grid", sim.n_grid, "Sample sizes: a,b,c or lo..hi[:step]");
    simulate->add_option("--n", sim.n, "Trial size for --estimate-sigma / --export-data");
    simulate->add_option("--reps", sim.reps, "Simulated trials per grid point")->capture_default_str();
    simulate->add_option("--method", sim.method, "ipw or aipw")
        ->check(CLI::IsMember({"ipw", "aipw"}))
        ->capture_default_str();
    simulate->add_option("--alpha", sim.alpha)->capture_default_str();
    simulate->add_option("--delta-min", sim.delta_min)->capture_default_str();
    simulate->add_option("--delta", sim.delta, "Treatment effect (default: design value)");
    simulate->add_option("--seed", sim.seed)->capture_default_str();
    simulate->add_option("--critical-reps", sim.critical_reps, "Repetitions for per-trial critical values")
        ->capture_default_str();
    simulate->add_option("--predict-sigma", sim.predict_sigma, "Add predicted power under this covariance");
    simulate->add_option("--predict-reps", sim.predict_reps)->capture_default_str();
    simulate->add_flag("--estimate-sigma", sim.estimate_sigma, "Average the sandwich covariance instead");
    simulate->add_option("--sigma-out", sim.sigma_out, "Where --estimate-sigma writes the matrix");
    simulate->add_option("--export-data", sim.export_data, "Write one simulated dataset (needs --n)");
    simulate->add_option("--out", sim.out, "CSV output (default stdout)");
    simulate->add_option("--report", sim.report, "JSON report for --estimate-sigma (default stdout)");

    std::string sweep_spec;
    std::string sweep_out;
    auto* sweep = app.add_subcommand("sweep", "Power over a parameter grid");
    sweep->add_option("--spec", sweep_spec, "Sweep description (JSON)")->required();
    sweep->add_option("--out", sweep_out, "CSV output (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::string msg = e.what();
        for (auto& ch : msg) {
            if (ch == '\n' || ch == '"') ch = ' ';
        }
        std::cerr << "error: code=usage exit=2 message=\"" << msg << "\"\n";
        return 2;
    }

    try {
        if (power->parsed()) {
            if (!power_grid.empty()) {
                run_power_curve(power_args, power_grid);
            } else if (power_n > 0) {
                run_power(power_args, power_n);
            } else {
                usage_error("power needs --n or --n-grid");
            }
        }
        if (size->parsed()) run_size(size_args, beta, bisection_max);
        if (project->parsed()) run_project(proj_sigma, proj_structure, block_start, proj_out, proj_report);
        if (simulate->parsed()) run_simulate(sim);
        if (sweep->parsed()) run_sweep(sweep_spec, sweep_out);
    } catch (const CliError& e) {
        std::string msg = e.message;
        for (auto& ch : msg) {
            if (ch == '\n' || ch == '"') ch = ' ';
        }
        std::cerr << "error: code=" << e.code << " exit=" << e.exit_code << " message=\"" << msg << "\"\n";
        return e.exit_code;
    }
    return 0;
}
