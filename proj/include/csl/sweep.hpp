// Parameter sweep engine: config parsing, multithreaded row evaluation, and
// deterministic CSV emission.
#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "csl/constants.hpp"
#include "csl/params.hpp"

namespace csl {

enum class SweepAxis {
    gamma,           // collapse strength (m^3/s)
    delta_detuning,  // cavity detuning (rad/s)
    mass,            // sphere mass (kg), geometry recomputed per row
    omega_m,         // mechanical frequency (rad/s), damping scaled to keep Q
    temperature,     // bath temperature (K)
    tau,             // qubit interrogation time (dimensionless)
    squeeze_delta,   // added occupation of the squeezed single-mode study
};

enum class SweepScale { linear, log10 };

enum class OutputKind {
    qfi_mech,
    qfi_opt,
    fi_homodyne,
    fi_heterodyne,
    snr_mech,
    snr_opt,
    snr_homodyne,
    hybrid_fi,
    hybrid_qfi,
    tau_opt,
};

struct SweepConfig {
    SystemParams base = SystemParams::defaults();
    SweepAxis axis = SweepAxis::gamma;
    SweepScale scale = SweepScale::log10;
    double min = 1e-36;
    double max = 1e-24;
    int points = 61;
    std::vector<OutputKind> outputs;
    // Required whenever fi_homodyne or snr_homodyne is requested.
    double homodyne_theta = 0.0;
    bool has_homodyne_theta = false;
    // Collapse strength used when gamma is not the axis.
    double gamma = gamma_adler;
    // Direct collapse-rate override (1/s); negative means "derive from gamma
    // and the sphere geometry".
    double lambda_override = -1.0;
    // Hybrid-probe settings.
    double tau = 0.5;
    double vartheta = 0.0;
    double varphi = 0.0;
    // Squeezing-study settings (squeeze_delta axis).
    double squeeze_n_th = 0.0;
    double squeeze_s = 0.0;
};

struct SweepCell {
    double value = 0.0;
    bool ok = true;
};

// Generic result table: one axis column plus named value columns; cells that
// could not be evaluated (unstable drift) carry ok = false.
struct SweepResult {
    std::string axis_label; // includes units, e.g. "gamma (m^3/s)"
    std::vector<std::string> columns;
    std::vector<double> axis;
    std::vector<std::vector<SweepCell>> rows;
};

// Parses "key = value" lines ('#' comments, blank lines allowed). Unknown keys
// raise ValidationError with the key; malformed lines and duplicate keys raise
// ParseError carrying the line number. Overrides are applied on top of the
// parsed keys (replacing them) and validated the same way.
SweepConfig parse_config(const std::string& text,
                         const std::map<std::string, std::string>& overrides = {});

// Evaluates the table with a bounded worker pool (jobs <= 0 selects the
// hardware concurrency). Output is independent of the job count.
SweepResult run_sweep(const SweepConfig& config, int jobs = 0);

// Writes the table as CSV: header with units, 17 significant digits,
// ERR:unstable for failed cells, '\n' line ends, no trailing separator.
void emit_csv(const SweepResult& result, std::ostream& out);

} // namespace csl
