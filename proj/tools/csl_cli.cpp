// Command-line front end: parameter sweeps, steady-state dumps, collapse-rate
// geometry, hybrid-probe and squeezing studies, all emitting CSV.
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "csl/collapse.hpp"
#include "csl/dynamics.hpp"
#include "csl/errors.hpp"
#include "csl/sweep.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    int jobs = 0;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "configuration file")->required();
    cmd->add_option("--out", args.out_path, "output CSV path (default: stdout)");
    cmd->add_option("--jobs", args.jobs, "worker threads (default: hardware)");
    cmd->add_option("--override", args.overrides, "config override key=value")
        ->take_all();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw csl::IoError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw csl::IoError("cannot read config file: " + path);
    return ss.str();
}

std::map<std::string, std::string> override_map(const std::vector<std::string>& kvs) {
    std::map<std::string, std::string> m;
    for (const std::string& kv : kvs) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw csl::ValidationError(kv, "override must be key=value");
        m[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    return m;
}

void write_out(const std::string& out_path, const std::string& payload) {
    if (out_path.empty()) {
        std::cout << payload;
        if (!std::cout) throw csl::IoError("stdout write failed");
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw csl::IoError("cannot open output file: " + out_path);
    out << payload;
    if (!out) throw csl::IoError("cannot write output file: " + out_path);
}

// All value columns of a row failed (ERR cells); the Lambda column is exempt.
bool row_errored(const csl::SweepResult& table, std::size_t i, std::size_t first_value_col) {
    if (table.rows[i].size() <= first_value_col) return false;
    for (std::size_t j = first_value_col; j < table.rows[i].size(); ++j)
        if (table.rows[i][j].ok) return false;
    return true;
}

int emit_table(const csl::SweepResult& table, const std::string& out_path,
               std::size_t first_value_col) {
    std::ostringstream ss;
    csl::emit_csv(table, ss);
    write_out(out_path, ss.str());
    bool all_bad = !table.rows.empty();
    for (std::size_t i = 0; i < table.rows.size(); ++i)
        if (!row_errored(table, i, first_value_col)) {
            all_bad = false;
            break;
        }
    return all_bad ? 3 : 0;
}

int run_sweep_like(const CommonArgs& args, const char* forced_axis,
                   const char* default_outputs) {
    std::string text = read_file(args.config_path);
    auto ov = override_map(args.overrides);
    if (forced_axis) ov["axis"] = forced_axis;
    csl::SweepConfig cfg = csl::parse_config(text, ov);
    if (cfg.outputs.empty() && default_outputs &&
        cfg.axis != csl::SweepAxis::squeeze_delta) {
        auto ov2 = ov;
        ov2["outputs"] = default_outputs;
        cfg = csl::parse_config(text, ov2);
    }
    const csl::SweepResult table = csl::run_sweep(cfg, args.jobs);
    const std::size_t first_value_col =
        cfg.axis == csl::SweepAxis::squeeze_delta ? 0 : 1; // skip Lambda column
    return emit_table(table, args.out_path, first_value_col);
}

int run_steady_state(const CommonArgs& args) {
    const std::string text = read_file(args.config_path);
    const csl::SweepConfig cfg = csl::parse_config(text, override_map(args.overrides));
    const csl::SystemParams& p = cfg.base;
    const double lambda = cfg.lambda_override >= 0.0
                              ? cfg.lambda_override
                              : csl::lambda_from_gamma(p, cfg.gamma);
    csl::Mat sigma;
    try {
        sigma = csl::steady_state(csl::drift_matrix(p), csl::noise_matrix(p, lambda));
    } catch (const csl::UnstableDrift& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    std::ostringstream ss;
    ss << "q,p,X,Y\n";
    char buf[64];
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", sigma(i, j));
            ss << (j ? "," : "") << buf;
        }
        ss << '\n';
    }
    write_out(args.out_path, ss.str());
    return 0;
}

int run_eta(const CommonArgs& args) {
    const std::string text = read_file(args.config_path);
    const csl::SweepConfig cfg = csl::parse_config(text, override_map(args.overrides));
    const csl::SystemParams& p = cfg.base;
    const csl::SphereGeometry geom = csl::sphere_from_mass(p.mass, p.material_density);
    const double eta = csl::eta_sphere(geom, p.r_c, cfg.gamma);
    const double lambda = cfg.lambda_override >= 0.0
                              ? cfg.lambda_override
                              : csl::lambda_from_gamma(p, cfg.gamma);
    const double nbar = csl::thermal_occupation(p.omega_m, p.temperature);
    std::ostringstream ss;
    ss << "gamma (m^3/s),radius (m),eta (1/(m^2 s)),lambda (1/s),n_bar (1),"
          "crossover_gamma (m^3/s)\n";
    const double vals[] = {cfg.gamma, geom.radius, eta, lambda, nbar,
                           csl::crossover_gamma(p)};
    char buf[64];
    for (int i = 0; i < 6; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", vals[i]);
        ss << (i ? "," : "") << buf;
    }
    ss << '\n';
    write_out(args.out_path, ss.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CSL optomechanics estimation toolkit"};
    app.require_subcommand(1);

    CommonArgs sweep_args, ss_args, eta_args, hybrid_args, squeeze_args;
    CLI::App* sweep = app.add_subcommand("sweep", "run a configured parameter sweep");
    add_common(sweep, sweep_args);
    CLI::App* steady = app.add_subcommand("steady-state", "dump the steady covariance");
    add_common(steady, ss_args);
    CLI::App* eta = app.add_subcommand("eta", "collapse-rate geometry summary");
    add_common(eta, eta_args);
    CLI::App* hybrid = app.add_subcommand("hybrid", "qubit-probe sweep over tau");
    add_common(hybrid, hybrid_args);
    CLI::App* squeeze = app.add_subcommand("squeeze", "squeezed-state study");
    add_common(squeeze, squeeze_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sweep->parsed()) return run_sweep_like(sweep_args, nullptr, nullptr);
        if (steady->parsed()) return run_steady_state(ss_args);
        if (eta->parsed()) return run_eta(eta_args);
        if (hybrid->parsed())
            return run_sweep_like(hybrid_args, "tau", "hybrid_fi,hybrid_qfi,tau_opt");
        if (squeeze->parsed()) return run_sweep_like(squeeze_args, "squeeze_delta", nullptr);
    } catch (const csl::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const csl::ParseError& e) {
        std::cerr << "error: line " << e.line << ": " << e.what() << "\n";
        return 1;
    } catch (const csl::ValidationError& e) {
        std::cerr << "error: key '" << e.key << "': " << e.what() << "\n";
        return 1;
    } catch (const csl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
