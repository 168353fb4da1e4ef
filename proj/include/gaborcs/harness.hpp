#pragma once

#include <optional>
#include <string>

#include "gaborcs/bounds.hpp"
#include "gaborcs/bp_solver.hpp"
#include "gaborcs/gram_analysis.hpp"

namespace gaborcs {

enum class ExperimentKind { PhaseTransition, RandomPhase, Conditioning, BoundsTable, Identify, Coherence };
enum class OutputFormat { Csv, Json };
enum class MagnitudeModel { Unit, Gaussian };

/// Complete description of an experiment run.  Every output is a pure
/// function of this struct; in particular master_seed fixes all randomness
/// regardless of thread count.
struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::PhaseTransition;
    int n = 0;
    WindowKind window_kind = WindowKind::Steinhaus;
    std::vector<int> sparsity_grid;
    int trials = 1;
    std::uint64_t master_seed = 0;
    BPConfig solver;
    std::string output_path;  // empty: stdout only, no manifest
    OutputFormat format = OutputFormat::Csv;
    MagnitudeModel magnitudes = MagnitudeModel::Unit;
    std::optional<SupportSet> fixed_support;  // random-phase runs may pin the support
    double delta = 0.5;  // conditioning threshold
    double sigma = 9.0;  // random-phase bound parameter

    void validate() const;
};

struct TrialRecord {
    int trial_index = 0;
    std::uint64_t seed_used = 0;
    int s = 0;
    bool success = false;
    double relative_error = 0.0;
    double residual = 0.0;
    int iterations = 0;
    std::optional<double> certificate_max;
};

struct PhaseRow {
    int s = 0;
    int trials = 0;
    int successes = 0;
    double rate = 0.0;
    WilsonInterval wilson;
};

/// Sparse random operator Gamma = sum_lambda x_lambda pi(lambda); applying it
/// to a probe h is synthesis with h as the window.
struct ChannelOperator {
    SparseCoeffs coeffs;

    cvec apply(const cvec& probe) const;
    CMatrix dense(int max_n = 32) const;
};

/// One recovery-rate row per sparsity value in spec.sparsity_grid.
std::vector<PhaseRow> run_phase_transition(const ExperimentSpec& spec);

struct RandomPhaseResult {
    std::vector<TrialRecord> records;
    long long failures = 0;
    double failure_rate = 0.0;
    WilsonInterval wilson;
    BoundReport bound;  // closed-form failure bound, reported side by side
};

/// Fresh Steinhaus window and fresh uniform coefficient phases per trial over
/// a fixed or per-trial-sampled support; magnitudes pinned at 1.
RandomPhaseResult run_random_phase(const ExperimentSpec& spec);

struct ConditioningResult {
    FailureRateReport rate;
    BoundReport bound;  // operator-norm tail value at the same (n, S, delta)
};

ConditioningResult run_conditioning(const ExperimentSpec& spec);

/// One seeded draw-and-solve under the experiments' instance model; the
/// spec's single sparsity value and (master_seed, trial) identify the draw.
TrialRecord run_recovery_instance(const ExperimentSpec& spec, int trial, bool want_certificate);

/// The instance model's coefficient draw by itself: uniform support of size s
/// plus seeded values for (s, trial) under a master seed.
SparseCoeffs draw_instance_coeffs(int n, int s, MagnitudeModel magnitudes,
                                  std::uint64_t master_seed, int trial);

struct IdentifyResult {
    SparseCoeffs coeffs;  // thresholded sparse reading of the solve
    BPResult solve;       // full solver output, including the converged flag
};

/// Recover the spreading coefficients of gamma from its action on a single
/// probe window.  Non-convergence is flagged through solve.converged rather
/// than thrown: the thresholded coefficients are then a partial result.
IdentifyResult identify_channel(const ChannelOperator& gamma, WindowKind window_kind,
                                std::uint64_t seed, const BPConfig& config);

struct BoundsRow {
    int n = 0;
    int s = 0;
    double delta = 0.0;
    double sigma = 0.0;
    bool coherence_guarantee = false;  // S below the 1/sqrt(n)-coherence threshold
    double sparsity_threshold = 0.0;   // NaN when n is odd
    double random_phase_bound = 0.0;   // NaN when n is odd
    double conditioning_bound = 0.0;
    double markov_min = 0.0;
    double chaining_min = 0.0;
    double c1 = 0.0, c2 = 0.0, c3 = 0.0;
};

/// One row per sparsity value, evaluating every closed-form bound at
/// (spec.n, S, spec.delta, spec.sigma).
std::vector<BoundsRow> tabulate_bounds(const ExperimentSpec& spec);

// --- serialization -------------------------------------------------------

/// Fixed-format float for CSV cells: 12 significant digits, locale-free.
std::string format_csv_double(double v);

std::string phase_rows_to_csv(const ExperimentSpec& spec, const std::vector<PhaseRow>& rows);
std::vector<PhaseRow> parse_phase_rows_csv(const std::string& text);

std::string trial_records_to_csv(const ExperimentSpec& spec, const std::vector<TrialRecord>& records);
std::vector<TrialRecord> parse_trial_records_csv(const std::string& text);

std::string conditioning_to_csv(const ExperimentSpec& spec, const ConditioningResult& result);

std::string bounds_rows_to_csv(const std::vector<BoundsRow>& rows);

std::string phase_rows_to_json(const ExperimentSpec& spec, const std::vector<PhaseRow>& rows);
std::string random_phase_to_json(const ExperimentSpec& spec, const RandomPhaseResult& result);
std::string conditioning_to_json(const ExperimentSpec& spec, const ConditioningResult& result);
std::string bounds_rows_to_json(const std::vector<BoundsRow>& rows);

/// Write contents to path, throwing IoError with path context on failure.
void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

/// Run manifest written beside every file output: command, full parameter
/// echo, master seed, artifact version, start timestamp and duration.
void write_manifest(const std::string& output_path, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>& params,
                    std::uint64_t seed, const std::string& started_at, double duration_s);

/// CLI entry point (exit code 0 = success, 1 = domain/usage error, 2 = I/O).
int cli_main(int argc, char** argv);

}  // namespace gaborcs
