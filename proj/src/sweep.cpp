// Sweep engine implementation: config parsing, row evaluation, CSV output.
#include "csl/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "csl/collapse.hpp"
#include "csl/dynamics.hpp"
#include "csl/fisher.hpp"
#include "csl/qubit_probe.hpp"
#include "csl/squeezing.hpp"

namespace csl {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == nullptr || *end != '\0' || v.empty())
        throw ValidationError(key, "not a number: '" + v + "'");
    return x;
}

int parse_int(const std::string& key, const std::string& value) {
    const double x = parse_double(key, value);
    const int i = static_cast<int>(x);
    if (static_cast<double>(i) != x) throw ValidationError(key, "not an integer");
    return i;
}

SweepAxis parse_axis(const std::string& v) {
    if (v == "gamma") return SweepAxis::gamma;
    if (v == "delta_detuning") return SweepAxis::delta_detuning;
    if (v == "mass") return SweepAxis::mass;
    if (v == "omega_m") return SweepAxis::omega_m;
    if (v == "temperature") return SweepAxis::temperature;
    if (v == "tau") return SweepAxis::tau;
    if (v == "squeeze_delta") return SweepAxis::squeeze_delta;
    throw ValidationError("axis", "unknown axis '" + v + "'");
}

OutputKind parse_output(const std::string& v) {
    if (v == "qfi_mech") return OutputKind::qfi_mech;
    if (v == "qfi_opt") return OutputKind::qfi_opt;
    if (v == "fi_homodyne") return OutputKind::fi_homodyne;
    if (v == "fi_heterodyne") return OutputKind::fi_heterodyne;
    if (v == "snr_mech") return OutputKind::snr_mech;
    if (v == "snr_opt") return OutputKind::snr_opt;
    if (v == "snr_homodyne") return OutputKind::snr_homodyne;
    if (v == "hybrid_fi") return OutputKind::hybrid_fi;
    if (v == "hybrid_qfi") return OutputKind::hybrid_qfi;
    if (v == "tau_opt") return OutputKind::tau_opt;
    throw ValidationError("outputs", "unknown output '" + v + "'");
}

std::string output_label(OutputKind kind) {
    switch (kind) {
        case OutputKind::qfi_mech: return "qfi_mech (s^2)";
        case OutputKind::qfi_opt: return "qfi_opt (s^2)";
        case OutputKind::fi_homodyne: return "fi_homodyne (s^2)";
        case OutputKind::fi_heterodyne: return "fi_heterodyne (s^2)";
        case OutputKind::snr_mech: return "snr_mech (1)";
        case OutputKind::snr_opt: return "snr_opt (1)";
        case OutputKind::snr_homodyne: return "snr_homodyne (1)";
        case OutputKind::hybrid_fi: return "hybrid_fi (s^2)";
        case OutputKind::hybrid_qfi: return "hybrid_qfi (s^2)";
        case OutputKind::tau_opt: return "tau_opt (1)";
    }
    return "?";
}

std::string axis_label(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::gamma: return "gamma (m^3/s)";
        case SweepAxis::delta_detuning: return "delta_detuning (rad/s)";
        case SweepAxis::mass: return "mass (kg)";
        case SweepAxis::omega_m: return "omega_m (rad/s)";
        case SweepAxis::temperature: return "temperature (K)";
        case SweepAxis::tau: return "tau (1)";
        case SweepAxis::squeeze_delta: return "delta (quanta)";
    }
    return "?";
}

bool needs_steady_state(OutputKind k) {
    switch (k) {
        case OutputKind::qfi_mech:
        case OutputKind::qfi_opt:
        case OutputKind::fi_homodyne:
        case OutputKind::fi_heterodyne:
        case OutputKind::snr_mech:
        case OutputKind::snr_opt:
        case OutputKind::snr_homodyne: return true;
        default: return false;
    }
}

std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

SweepConfig parse_config(const std::string& text,
                         const std::map<std::string, std::string>& overrides) {
    std::map<std::string, std::string> kv;
    std::map<std::string, int> first_line;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ParseError(lineno, "expected 'key = value'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) throw ParseError(lineno, "empty key");
        if (kv.count(key)) throw ParseError(lineno, "duplicate key '" + key + "'");
        kv[key] = value;
        first_line[key] = lineno;
    }
    for (const auto& [key, value] : overrides) kv[trim(key)] = trim(value);

    SweepConfig cfg;
    bool saw_omega_m = false, saw_gamma_m = false;
    for (const auto& [key, value] : kv) {
        if (key == "axis") {
            cfg.axis = parse_axis(value);
        } else if (key == "scale") {
            if (value == "linear") cfg.scale = SweepScale::linear;
            else if (value == "log") cfg.scale = SweepScale::log10;
            else throw ValidationError("scale", "expected 'linear' or 'log'");
        } else if (key == "min") {
            cfg.min = parse_double(key, value);
        } else if (key == "max") {
            cfg.max = parse_double(key, value);
        } else if (key == "points") {
            cfg.points = parse_int(key, value);
        } else if (key == "outputs") {
            cfg.outputs.clear();
            std::stringstream ss(value);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                tok = trim(tok);
                if (!tok.empty()) cfg.outputs.push_back(parse_output(tok));
            }
            if (cfg.outputs.empty())
                throw ValidationError("outputs", "no outputs listed");
        } else if (key == "homodyne_theta") {
            cfg.homodyne_theta = parse_double(key, value);
            cfg.has_homodyne_theta = true;
        } else if (key == "gamma") {
            cfg.gamma = parse_double(key, value);
            if (cfg.gamma < 0.0) throw ValidationError(key, "must be nonnegative");
        } else if (key == "lambda") {
            cfg.lambda_override = parse_double(key, value);
            if (cfg.lambda_override < 0.0)
                throw ValidationError(key, "must be nonnegative");
        } else if (key == "tau") {
            cfg.tau = parse_double(key, value);
            if (cfg.tau < 0.0) throw ValidationError(key, "must be nonnegative");
        } else if (key == "vartheta") {
            cfg.vartheta = parse_double(key, value);
        } else if (key == "varphi") {
            cfg.varphi = parse_double(key, value);
        } else if (key == "squeeze_n_th") {
            cfg.squeeze_n_th = parse_double(key, value);
            if (cfg.squeeze_n_th < 0.0) throw ValidationError(key, "must be nonnegative");
        } else if (key == "squeeze_s") {
            cfg.squeeze_s = parse_double(key, value);
        } else if (key == "mass") {
            cfg.base.mass = parse_double(key, value);
        } else if (key == "omega_m") {
            cfg.base.omega_m = parse_double(key, value);
            saw_omega_m = true;
        } else if (key == "gamma_m") {
            cfg.base.gamma_m = parse_double(key, value);
            saw_gamma_m = true;
        } else if (key == "kappa") {
            cfg.base.kappa = parse_double(key, value);
        } else if (key == "delta") {
            cfg.base.delta = parse_double(key, value);
        } else if (key == "cavity_length") {
            cfg.base.cavity_length = parse_double(key, value);
        } else if (key == "laser_power") {
            cfg.base.laser_power = parse_double(key, value);
        } else if (key == "laser_wavelength") {
            cfg.base.laser_wavelength = parse_double(key, value);
        } else if (key == "temperature") {
            cfg.base.temperature = parse_double(key, value);
        } else if (key == "r_c") {
            cfg.base.r_c = parse_double(key, value);
        } else if (key == "material_density") {
            cfg.base.material_density = parse_double(key, value);
        } else {
            throw ValidationError(key, "unknown key");
        }
    }
    // A lone mechanical-frequency change keeps the quality factor fixed.
    if (saw_omega_m && !saw_gamma_m) cfg.base.gamma_m = cfg.base.omega_m / 1e5;

    validate(cfg.base);
    if (cfg.points < 1) throw ValidationError("points", "must be >= 1");
    if (!std::isfinite(cfg.min) || !std::isfinite(cfg.max))
        throw ValidationError("min", "grid bounds must be finite");
    if (cfg.points > 1 && !(cfg.max > cfg.min))
        throw ValidationError("max", "must exceed min");
    if (cfg.scale == SweepScale::log10 && !(cfg.min > 0.0))
        throw ValidationError("min", "log scale requires positive bounds");
    const bool axis_nonneg = cfg.axis == SweepAxis::gamma ||
                             cfg.axis == SweepAxis::temperature ||
                             cfg.axis == SweepAxis::tau ||
                             cfg.axis == SweepAxis::squeeze_delta;
    const bool axis_pos = cfg.axis == SweepAxis::mass || cfg.axis == SweepAxis::omega_m;
    if (axis_nonneg && cfg.min < 0.0)
        throw ValidationError("min", "axis values must be nonnegative");
    if (axis_pos && !(cfg.min > 0.0))
        throw ValidationError("min", "axis values must be positive");
    for (OutputKind k : cfg.outputs)
        if ((k == OutputKind::fi_homodyne || k == OutputKind::snr_homodyne) &&
            !cfg.has_homodyne_theta)
            throw ValidationError("homodyne_theta",
                                  "required when homodyne outputs are requested");
    return cfg;
}

namespace {

std::vector<double> make_grid(const SweepConfig& cfg) {
    std::vector<double> grid;
    grid.reserve(cfg.points);
    if (cfg.points == 1) {
        grid.push_back(cfg.min);
        return grid;
    }
    if (cfg.scale == SweepScale::linear) {
        for (int i = 0; i < cfg.points; ++i)
            grid.push_back(cfg.min + (cfg.max - cfg.min) * i / (cfg.points - 1));
    } else {
        const double l0 = std::log10(cfg.min), l1 = std::log10(cfg.max);
        for (int i = 0; i < cfg.points; ++i)
            grid.push_back(std::pow(10.0, l0 + (l1 - l0) * i / (cfg.points - 1)));
    }
    return grid;
}

// One row of a physical-axis sweep: Lambda first, then the requested outputs.
std::vector<SweepCell> evaluate_row(const SweepConfig& cfg, double v) {
    SystemParams p = cfg.base;
    double gamma = cfg.gamma;
    double tau = cfg.tau;
    switch (cfg.axis) {
        case SweepAxis::gamma: gamma = v; break;
        case SweepAxis::delta_detuning: p.delta = v; break;
        case SweepAxis::mass: p.mass = v; break;
        case SweepAxis::omega_m:
            p.gamma_m = cfg.base.gamma_m * (v / cfg.base.omega_m);
            p.omega_m = v;
            break;
        case SweepAxis::temperature: p.temperature = v; break;
        case SweepAxis::tau: tau = v; break;
        case SweepAxis::squeeze_delta: break; // handled elsewhere
    }

    const double lambda = cfg.lambda_override >= 0.0 ? cfg.lambda_override
                                                     : lambda_from_gamma(p, gamma);
    std::vector<SweepCell> row;
    row.reserve(cfg.outputs.size() + 1);
    row.push_back({lambda, true});

    const Mat a = drift_matrix(p);
    const bool stable = stability_check(a);
    bool have_ss = false;
    CovarianceBlocks sig{}, dsig{};
    bool have_mc = false;
    MechCoefficients mc{};
    for (OutputKind k : cfg.outputs) {
        if (!stable) {
            row.push_back({0.0, false});
            continue;
        }
        if (needs_steady_state(k) && !have_ss) {
            const Mat s0 = steady_state(a, noise_matrix(p, 0.0));
            const Mat ds = dsigma_dLambda(p);
            sig = blocks(s0 + lambda * ds);
            dsig = blocks(ds);
            have_ss = true;
        }
        if (!needs_steady_state(k) && !have_mc) {
            mc = mech_coefficients(p);
            have_mc = true;
        }
        double value = 0.0;
        switch (k) {
            case OutputKind::qfi_mech:
                value = qfi_single_mode(sig.sigma_M, dsig.sigma_M).value;
                break;
            case OutputKind::qfi_opt:
                value = qfi_single_mode(sig.sigma_L, dsig.sigma_L).value;
                break;
            case OutputKind::fi_homodyne:
                value = fisher_gaussian(sig.sigma_L, dsig.sigma_L,
                                        MeasurementSpec::homodyne_at(cfg.homodyne_theta))
                            .value;
                break;
            case OutputKind::fi_heterodyne:
                value = fisher_gaussian(sig.sigma_L, dsig.sigma_L,
                                        MeasurementSpec::heterodyne())
                            .value;
                break;
            case OutputKind::snr_mech:
                value = snr(lambda, qfi_single_mode(sig.sigma_M, dsig.sigma_M));
                break;
            case OutputKind::snr_opt:
                value = snr(lambda, qfi_single_mode(sig.sigma_L, dsig.sigma_L));
                break;
            case OutputKind::snr_homodyne:
                value = snr(lambda,
                            fisher_gaussian(sig.sigma_L, dsig.sigma_L,
                                            MeasurementSpec::homodyne_at(cfg.homodyne_theta)));
                break;
            case OutputKind::hybrid_fi:
                value = fi_population({cfg.vartheta, cfg.varphi}, tau, mc.alpha1,
                                      mc.beta1, lambda)
                            .value;
                break;
            case OutputKind::hybrid_qfi:
                value = qfi_qubit(QubitPrep{cfg.vartheta, cfg.varphi}, tau, mc.alpha1,
                                  mc.beta1, lambda)
                            .value;
                break;
            case OutputKind::tau_opt:
                value = optimal_time(mc.alpha1, mc.beta1, lambda);
                break;
        }
        row.push_back({value, true});
    }
    return row;
}

} // namespace

SweepResult run_sweep(const SweepConfig& cfg, int jobs) {
    const std::vector<double> grid = make_grid(cfg);
    if (cfg.axis == SweepAxis::squeeze_delta) {
        SqueezeParams base{cfg.squeeze_n_th, cfg.squeeze_s, 0.0};
        return sweep_delta(base, grid);
    }
    if (cfg.outputs.empty())
        throw ValidationError("outputs", "no outputs requested");

    SweepResult result;
    result.axis_label = axis_label(cfg.axis);
    result.columns.push_back("Lambda (1/s)");
    for (OutputKind k : cfg.outputs) result.columns.push_back(output_label(k));
    result.axis = grid;
    result.rows.resize(grid.size());

    int n_jobs = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
    if (n_jobs < 1) n_jobs = 1;
    n_jobs = std::min<int>(n_jobs, static_cast<int>(grid.size()));

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_jobs));
    auto work = [&](int slot) {
        try {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= grid.size()) return;
                result.rows[i] = evaluate_row(cfg, grid[i]);
            }
        } catch (...) {
            errors[static_cast<std::size_t>(slot)] = std::current_exception();
        }
    };
    if (n_jobs == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_jobs));
        for (int t = 0; t < n_jobs; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);
    return result;
}

void emit_csv(const SweepResult& result, std::ostream& out) {
    out << result.axis_label;
    for (const auto& col : result.columns) out << ',' << col;
    out << '\n';
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        out << fmt17(result.axis[i]);
        for (const SweepCell& cell : result.rows[i]) {
            out << ',';
            if (cell.ok) out << fmt17(cell.value);
            else out << "ERR:unstable";
        }
        out << '\n';
    }
    if (!out) throw IoError("emit_csv: stream write failed");
}

} // namespace csl
