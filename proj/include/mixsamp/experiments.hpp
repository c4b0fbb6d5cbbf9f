#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mixsamp/sampling.hpp"

namespace mixsamp {

/// Sample size given either as an absolute count (value >= 1) or as a
/// fraction of the Hilbert space dimension (value < 1).
struct KSpec {
    double raw = 0.1;

    bool is_fraction() const { return raw < 1.0; }
    int resolve(int dim) const;
};

/// One spin-chain preset for the spectral-density comparison.
struct SpectrumPreset {
    double coupling_j = 1.0;
    double field_hz = 0.002;
};

/// Full description of a sweep; together with the master seed it determines
/// every number the harness produces.
struct SweepConfig {
    ChainParams chain;
    PulseSpec pulse = PulseSpec::standard(170.0, 512);
    std::vector<double> purity_grid;
    std::vector<KSpec> k_values = {{0.05}, {0.10}, {0.20}};
    int n_observables = 50;
    bool traceless_observables = true;
    std::vector<EstimatorKind> estimators;
    std::uint64_t master_seed = 1;
    std::string output_dir = "results";
    int threads = 1;
    bool full_scale = false;
    bool record_intermediate = false;

    // polarization study
    std::vector<double> emax_grid = {1.0, 0.1, 0.01, 0.001};
    // spectrum comparison
    std::vector<SpectrumPreset> presets = {{1.0, 0.002}, {1.0, 0.5}, {0.25, 1.0}};
    std::vector<double> residuum_purities = {1e-2, 5e-2, 1e-1};

    void validate() const;
};

/// Desk-scale defaults (6 spins, 50 trials, 512 steps); the full-scale
/// variant (10 spins, 200 trials, 1024 steps) runs for hours on a single
/// node.
SweepConfig default_config(bool full_scale = false);

struct TrialRecord {
    std::string group;  // sub-sweep label (preset, e_max); empty for plain sweeps
    int purity_index = 0;
    int trial_id = 0;
    double purity = 0.0;
    std::string estimator;
    int k = 0;
    double exact = 0.0;
    double estimate = 0.0;
    double abs_err = 0.0;
    /// Analytic worst-case bound, scaled to be directly comparable with
    /// abs_err (ensemble-side bounds are multiplied by ||A||_HS; the
    /// observable-side bound already carries the observable's scale).
    double bound = 0.0;
    std::uint64_t seed = 0;
    bool failed = false;
};

struct AggregateRow {
    double purity = 0.0;
    std::string estimator;
    int k = 0;
    double mean_err = 0.0;
    double p10 = 0.0;
    double p90 = 0.0;
    double bound = 0.0;
    int n_failed = 0;
};

/// Aggregated sweep output; one CSV with the fixed header
/// purity,estimator,k,mean_err,p10,p90,bound.
struct Table {
    std::string name;
    std::vector<AggregateRow> rows;
};

/// Free-form numeric side table (spectra, residua, per-trial dumps, ...).
struct AuxTable {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

struct SweepResult {
    std::vector<Table> tables;
    std::vector<AuxTable> aux;
    std::vector<TrialRecord> trials;
};

/// Error of every configured estimator on a grid of ensemble purities,
/// averaged over randomized observables and pulses.
SweepResult run_purity_sweep(const SweepConfig& config);

/// Same protocol grouped by sample size: one table per k value.
SweepResult run_sample_size_sweep(const SweepConfig& config);

/// Purity sweep per spin-chain preset plus the sorted spectrum of H(0) and
/// the population-residuum curves at the configured purities.
SweepResult run_spectrum_comparison(const SweepConfig& config);

/// Total polarization under fields of varying peak amplitude; records the
/// Heisenberg-picture diagonal fraction of every trial.
SweepResult run_polarization_study(const SweepConfig& config);

/// Worst-case bound table (purity, k -> plain and reduced bound) for the
/// configured chain; needs no propagation.
AuxTable compute_bound_table(const SweepConfig& config);

/// Field samples for the configured pulse spec and master seed.
AuxTable make_pulse_table(const SweepConfig& config);

/// Writes one CSV per table (fixed header), one CSV per aux table, a
/// manifest that reproduces the run bit-for-bit, and a gnuplot script per
/// main table. Floats are written with 17 significant digits.
void emit_outputs(const SweepResult& result, const SweepConfig& config,
                  const std::string& command, const std::string& out_dir);

/// Nearest-rank percentile of the sorted values (p in [0, 100]).
double nearest_rank_percentile(std::vector<double> values, double p);

// --- flat key-value config format ------------------------------------------

/// Parses `key = value` lines; '#' starts a comment, unknown keys are
/// errors. Values listed with commas; presets as J:h_z pairs.
SweepConfig parse_config_text(const std::string& text, const SweepConfig& base);
SweepConfig load_config_file(const std::string& path, const SweepConfig& base);

/// Serialises the full configuration (manifest form); the result parses
/// back into an identical configuration.
std::string config_to_text(const SweepConfig& config, const std::string& command);

/// Command recorded in a manifest file, if any.
std::optional<std::string> manifest_command(const std::string& text);

std::string format_double(double v);  // 17 significant digits, round-trip exact

}  // namespace mixsamp
