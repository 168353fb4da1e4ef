#include "gaborcs/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "gaborcs/parallel.hpp"
#include "gaborcs/rng.hpp"

namespace gaborcs {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Per-trial solver settings: fall back to the step sizes dictated by the
/// operator norm when the caller left them unset.
BPConfig effective_solver(const BPConfig& solver, int n) {
    BPConfig config = solver;
    if (config.primal_step <= 0.0 || config.dual_step <= 0.0) {
        const BPConfig defaults = BPConfig::defaults_for(n);
        if (config.primal_step <= 0.0) config.primal_step = defaults.primal_step;
        if (config.dual_step <= 0.0) config.dual_step = defaults.dual_step;
    }
    return config;
}

SparseCoeffs draw_coeffs(const SupportSet& support, MagnitudeModel magnitudes,
                         std::uint64_t master, std::uint64_t key) {
    SplitMix64 phase_rng(derive_seed(master, key, SeedRole::CoeffPhase));
    SplitMix64 mag_rng(derive_seed(master, key, SeedRole::CoeffMagnitude));
    cvec values(support.size());
    for (std::size_t i = 0; i < support.size(); ++i) {
        const double theta = 2.0 * std::numbers::pi * phase_rng.next_double();
        double magnitude = 1.0;
        if (magnitudes == MagnitudeModel::Gaussian) {
            // Modulus of a standard complex Gaussian (Rayleigh, E|z|^2 = 1).
            magnitude = std::sqrt(-std::log1p(-mag_rng.next_double()));
        }
        values[i] = magnitude * cxd(std::cos(theta), std::sin(theta));
    }
    return SparseCoeffs(support, values);
}

TrialRecord run_recovery_trial(const ExperimentSpec& spec, int s, int trial,
                               bool want_certificate) {
    const std::uint64_t key = trial_key(s, trial);
    const std::uint64_t window_seed = derive_seed(spec.master_seed, key, SeedRole::Window);
    const Window window = spec.window_kind == WindowKind::Alltop
                              ? alltop_window(spec.n)
                              : steinhaus_window(spec.n, window_seed);
    const GaborOperator op(window);
    const SupportSet support =
        spec.fixed_support ? *spec.fixed_support
                           : sample_uniform_support(
                                 spec.n, s, derive_seed(spec.master_seed, key, SeedRole::Support));
    const SparseCoeffs truth = draw_coeffs(support, spec.magnitudes, spec.master_seed, key);
    const cvec y = op.synthesize(truth);
    const BPConfig solver = effective_solver(spec.solver, spec.n);
    const BPResult result = basis_pursuit(op, y, solver);

    TrialRecord record;
    record.trial_index = trial;
    record.seed_used = window_seed;
    record.s = s;
    record.relative_error = relative_error(truth, result);
    record.success = record.relative_error <= solver.recovery_tol;
    record.residual = result.residual;
    record.iterations = result.iterations;
    if (want_certificate && truth.size() > 0) {
        try {
            const CertificateReport cert = dual_certificate(op, truth.support(), truth.signs());
            record.certificate_max = cert.max_offsupport_magnitude;
        } catch (const std::runtime_error&) {
            // Singular Gram: no certificate for this draw; leave the field empty.
        }
    }
    return record;
}

}  // namespace

TrialRecord run_recovery_instance(const ExperimentSpec& spec, int trial, bool want_certificate) {
    spec.validate();
    if (spec.sparsity_grid.size() != 1)
        throw std::invalid_argument("run_recovery_instance: exactly one sparsity value expected");
    if (trial < 0) throw std::invalid_argument("run_recovery_instance: trial must be >= 0");
    return run_recovery_trial(spec, spec.sparsity_grid.front(), trial, want_certificate);
}

SparseCoeffs draw_instance_coeffs(int n, int s, MagnitudeModel magnitudes,
                                  std::uint64_t master_seed, int trial) {
    const std::uint64_t key = trial_key(s, trial);
    const SupportSet support =
        sample_uniform_support(n, s, derive_seed(master_seed, key, SeedRole::Support));
    return draw_coeffs(support, magnitudes, master_seed, key);
}

void ExperimentSpec::validate() const {
    if (n < 1) throw std::domain_error("ExperimentSpec: n must be positive");
    if (trials < 1) throw std::domain_error("ExperimentSpec: trials must be >= 1");
    for (int s : sparsity_grid)
        if (s < 0 || static_cast<long long>(s) > static_cast<long long>(n) * n)
            throw std::domain_error("ExperimentSpec: sparsity " + std::to_string(s) +
                                    " outside [0, n^2]");
    if (kind == ExperimentKind::RandomPhase && n % 2 != 0)
        throw std::domain_error("ExperimentSpec: random-phase model requires even n");
}

cvec ChannelOperator::apply(const cvec& probe) const {
    const int n = coeffs.n();
    if (static_cast<int>(probe.size()) != n)
        throw std::invalid_argument("ChannelOperator::apply: probe length must equal n");
    cvec out(static_cast<std::size_t>(n), cxd(0.0, 0.0));
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        const cvec shifted = tf_shift(probe, coeffs.support()[i]);
        const cxd value = coeffs.values()[i];
        for (int q = 0; q < n; ++q) out[static_cast<std::size_t>(q)] += value * shifted[static_cast<std::size_t>(q)];
    }
    return out;
}

CMatrix ChannelOperator::dense(int max_n) const {
    const int n = coeffs.n();
    if (n > max_n)
        throw std::invalid_argument("ChannelOperator::dense: n exceeds cap " + std::to_string(max_n));
    CMatrix m(n, n);
    cvec basis(static_cast<std::size_t>(n), cxd(0.0, 0.0));
    for (int j = 0; j < n; ++j) {
        basis[static_cast<std::size_t>(j)] = cxd(1.0, 0.0);
        const cvec col = apply(basis);
        for (int q = 0; q < n; ++q) m.at(q, j) = col[static_cast<std::size_t>(q)];
        basis[static_cast<std::size_t>(j)] = cxd(0.0, 0.0);
    }
    return m;
}

std::vector<PhaseRow> run_phase_transition(const ExperimentSpec& spec) {
    if (spec.kind != ExperimentKind::PhaseTransition)
        throw std::invalid_argument("run_phase_transition: wrong experiment kind");
    spec.validate();
    if (spec.sparsity_grid.empty())
        throw std::invalid_argument("run_phase_transition: empty sparsity grid");

    const std::size_t rows = spec.sparsity_grid.size();
    const std::size_t per_row = static_cast<std::size_t>(spec.trials);
    std::vector<char> success(rows * per_row, 0);
    parallel_for_index(rows * per_row, [&](std::size_t task) {
        const std::size_t row = task / per_row;
        const int trial = static_cast<int>(task % per_row);
        const TrialRecord record =
            run_recovery_trial(spec, spec.sparsity_grid[row], trial, false);
        success[task] = record.success ? 1 : 0;
    });

    std::vector<PhaseRow> out(rows);
    for (std::size_t row = 0; row < rows; ++row) {
        PhaseRow& r = out[row];
        r.s = spec.sparsity_grid[row];
        r.trials = spec.trials;
        for (std::size_t t = 0; t < per_row; ++t) r.successes += success[row * per_row + t];
        r.rate = static_cast<double>(r.successes) / static_cast<double>(r.trials);
        r.wilson = wilson_interval(r.successes, r.trials);
    }
    return out;
}

RandomPhaseResult run_random_phase(const ExperimentSpec& spec) {
    if (spec.kind != ExperimentKind::RandomPhase)
        throw std::invalid_argument("run_random_phase: wrong experiment kind");
    spec.validate();
    if (spec.window_kind != WindowKind::Steinhaus)
        throw std::domain_error("run_random_phase: the model draws a fresh Steinhaus window per trial");
    if (spec.sparsity_grid.size() != 1)
        throw std::invalid_argument("run_random_phase: exactly one sparsity value expected");
    const int s = spec.sparsity_grid.front();
    if (spec.fixed_support && static_cast<int>(spec.fixed_support->size()) != s)
        throw std::invalid_argument("run_random_phase: fixed support size disagrees with sparsity");

    // The model pins magnitudes at 1; only the phases are random.
    ExperimentSpec trial_spec = spec;
    trial_spec.magnitudes = MagnitudeModel::Unit;

    RandomPhaseResult result;
    result.records.resize(static_cast<std::size_t>(spec.trials));
    parallel_for_index(static_cast<std::size_t>(spec.trials), [&](std::size_t t) {
        result.records[t] = run_recovery_trial(trial_spec, s, static_cast<int>(t), true);
    });
    for (const TrialRecord& record : result.records)
        if (!record.success) ++result.failures;
    result.failure_rate = static_cast<double>(result.failures) / static_cast<double>(spec.trials);
    result.wilson = wilson_interval(result.failures, spec.trials);
    result.bound = thm21_failure_probability(spec.n, s, spec.sigma);
    return result;
}

ConditioningResult run_conditioning(const ExperimentSpec& spec) {
    if (spec.kind != ExperimentKind::Conditioning)
        throw std::invalid_argument("run_conditioning: wrong experiment kind");
    spec.validate();
    if (spec.window_kind != WindowKind::Steinhaus)
        throw std::domain_error("run_conditioning: the tail bound concerns Steinhaus windows");
    if (spec.sparsity_grid.size() != 1)
        throw std::invalid_argument("run_conditioning: exactly one sparsity value expected");
    const int s = spec.sparsity_grid.front();
    ConditioningResult result;
    result.rate = conditioning_failure_rate(spec.n, s, spec.delta, spec.trials, spec.master_seed);
    const StirlingTable table = stirling_table(40);
    result.bound = thm31_probability(spec.n, s, spec.delta, table);
    return result;
}

IdentifyResult identify_channel(const ChannelOperator& gamma, WindowKind window_kind,
                                std::uint64_t seed, const BPConfig& config) {
    const int n = gamma.coeffs.n();
    const Window probe =
        window_kind == WindowKind::Alltop ? alltop_window(n) : steinhaus_window(n, seed);
    const GaborOperator op(probe);
    const cvec y = gamma.apply(probe.values);
    const BPConfig solver = effective_solver(config, n);
    IdentifyResult result{SparseCoeffs::zero(n), basis_pursuit(op, y, solver)};

    // Sparse reading: keep entries above recovery_tol * ||x||_2 -- genuine
    // coefficients sit far above this line whenever the solve succeeded.
    const double threshold = solver.recovery_tol * l2_norm(result.solve.coefficients);
    const SupportSet support = identified_support(result.solve, n, threshold);
    cvec values(support.size());
    for (std::size_t i = 0; i < support.size(); ++i)
        values[i] = result.solve.coefficients[static_cast<std::size_t>(support.column(i))];
    result.coeffs = SparseCoeffs(support, values);
    return result;
}

std::vector<BoundsRow> tabulate_bounds(const ExperimentSpec& spec) {
    if (spec.kind != ExperimentKind::BoundsTable)
        throw std::invalid_argument("tabulate_bounds: wrong experiment kind");
    spec.validate();
    if (spec.sparsity_grid.empty())
        throw std::invalid_argument("tabulate_bounds: empty sparsity grid");

    const StirlingTable table = stirling_table(280);
    const RecoveryConstants constants = thm22_constants();
    const double mu = 1.0 / std::sqrt(static_cast<double>(spec.n));

    std::vector<BoundsRow> rows;
    rows.reserve(spec.sparsity_grid.size());
    for (int s : spec.sparsity_grid) {
        BoundsRow row;
        row.n = spec.n;
        row.s = s;
        row.delta = spec.delta;
        row.sigma = spec.sigma;
        row.c1 = constants.c1;
        row.c2 = constants.c2;
        row.c3 = constants.c3;
        row.coherence_guarantee = thm11_coherence_guarantee(spec.n, s, mu);
        row.sparsity_threshold = spec.n % 2 == 0 ? thm12b_sparsity_threshold(spec.n, 1.0) : kNaN;
        if (s >= 1) {
            row.random_phase_bound =
                (spec.n % 2 == 0 && static_cast<long long>(s) < static_cast<long long>(spec.n) * spec.n)
                    ? thm21_failure_probability(spec.n, s, spec.sigma).value
                    : kNaN;
            const BoundReport op_tail = thm31_probability(spec.n, s, spec.delta, table);
            row.conditioning_bound = op_tail.value;
            row.markov_min = op_tail.terms.size() > 1 ? op_tail.terms[1].second : kNaN;
            row.chaining_min = lemma51_minimize(spec.n, s, 0.47, 100, table).value;
        } else {
            row.random_phase_bound = kNaN;
            row.conditioning_bound = kNaN;
            row.markov_min = kNaN;
            row.chaining_min = kNaN;
        }
        rows.push_back(row);
    }
    return rows;
}

// --- serialization -------------------------------------------------------

std::string format_csv_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.12g", v);
    return buffer;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::string current;
    for (char ch : line) {
        if (ch == sep) {
            fields.push_back(current);
            current.clear();
        } else {
            current.push_back(ch);
        }
    }
    fields.push_back(current);
    return fields;
}

std::vector<std::string> csv_lines(const std::string& text, const std::string& expected_header,
                                   const char* who) {
    std::vector<std::string> lines;
    std::stringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line.front() != '#') lines.push_back(line);
    }
    if (lines.empty() || lines.front() != expected_header)
        throw std::invalid_argument(std::string(who) + ": missing or unexpected header");
    lines.erase(lines.begin());
    return lines;
}

constexpr const char* kPhaseHeader = "n,window,S,trials,successes,rate,wilson_lo,wilson_hi,seed";
constexpr const char* kTrialHeader =
    "n,window,S,trial,seed,success,relative_error,residual,iterations,certificate_max";
constexpr const char* kConditioningHeader =
    "n,S,delta,trials,failures,rate,wilson_lo,wilson_hi,bound,seed";
constexpr const char* kBoundsHeader =
    "n,S,delta,sigma,coherence_guarantee,sparsity_threshold,random_phase_bound,"
    "conditioning_bound,markov_min,chaining_min,C1,C2,C3";

}  // namespace

std::string phase_rows_to_csv(const ExperimentSpec& spec, const std::vector<PhaseRow>& rows) {
    std::string out = std::string(kPhaseHeader) + "\n";
    for (const PhaseRow& row : rows) {
        out += std::to_string(spec.n);
        out += ',';
        out += window_kind_name(spec.window_kind);
        out += ',';
        out += std::to_string(row.s);
        out += ',';
        out += std::to_string(row.trials);
        out += ',';
        out += std::to_string(row.successes);
        out += ',';
        out += format_csv_double(row.rate);
        out += ',';
        out += format_csv_double(row.wilson.lo);
        out += ',';
        out += format_csv_double(row.wilson.hi);
        out += ',';
        out += std::to_string(spec.master_seed);
        out += '\n';
    }
    return out;
}

std::vector<PhaseRow> parse_phase_rows_csv(const std::string& text) {
    std::vector<PhaseRow> rows;
    for (const std::string& line : csv_lines(text, kPhaseHeader, "parse_phase_rows_csv")) {
        const std::vector<std::string> fields = split(line, ',');
        if (fields.size() != 9)
            throw std::invalid_argument("parse_phase_rows_csv: expected 9 fields, got " +
                                        std::to_string(fields.size()));
        PhaseRow row;
        row.s = std::stoi(fields[2]);
        row.trials = std::stoi(fields[3]);
        row.successes = std::stoi(fields[4]);
        row.rate = std::stod(fields[5]);
        row.wilson.lo = std::stod(fields[6]);
        row.wilson.hi = std::stod(fields[7]);
        rows.push_back(row);
    }
    return rows;
}

std::string trial_records_to_csv(const ExperimentSpec& spec, const std::vector<TrialRecord>& records) {
    std::string out = std::string(kTrialHeader) + "\n";
    for (const TrialRecord& record : records) {
        out += std::to_string(spec.n);
        out += ',';
        out += window_kind_name(spec.window_kind);
        out += ',';
        out += std::to_string(record.s);
        out += ',';
        out += std::to_string(record.trial_index);
        out += ',';
        out += std::to_string(record.seed_used);
        out += ',';
        out += record.success ? '1' : '0';
        out += ',';
        out += format_csv_double(record.relative_error);
        out += ',';
        out += format_csv_double(record.residual);
        out += ',';
        out += std::to_string(record.iterations);
        out += ',';
        if (record.certificate_max) out += format_csv_double(*record.certificate_max);
        out += '\n';
    }
    return out;
}

std::vector<TrialRecord> parse_trial_records_csv(const std::string& text) {
    std::vector<TrialRecord> records;
    for (const std::string& line : csv_lines(text, kTrialHeader, "parse_trial_records_csv")) {
        const std::vector<std::string> fields = split(line, ',');
        if (fields.size() != 10)
            throw std::invalid_argument("parse_trial_records_csv: expected 10 fields, got " +
                                        std::to_string(fields.size()));
        TrialRecord record;
        record.s = std::stoi(fields[2]);
        record.trial_index = std::stoi(fields[3]);
        record.seed_used = std::stoull(fields[4]);
        record.success = fields[5] == "1";
        record.relative_error = std::stod(fields[6]);
        record.residual = std::stod(fields[7]);
        record.iterations = std::stoi(fields[8]);
        if (!fields[9].empty()) record.certificate_max = std::stod(fields[9]);
        records.push_back(record);
    }
    return records;
}

std::string conditioning_to_csv(const ExperimentSpec& spec, const ConditioningResult& result) {
    std::string out = std::string(kConditioningHeader) + "\n";
    out += std::to_string(spec.n);
    out += ',';
    out += std::to_string(spec.sparsity_grid.front());
    out += ',';
    out += format_csv_double(spec.delta);
    out += ',';
    out += std::to_string(result.rate.trials);
    out += ',';
    out += std::to_string(result.rate.events);
    out += ',';
    out += format_csv_double(result.rate.rate);
    out += ',';
    out += format_csv_double(result.rate.wilson.lo);
    out += ',';
    out += format_csv_double(result.rate.wilson.hi);
    out += ',';
    out += format_csv_double(result.bound.value);
    out += ',';
    out += std::to_string(spec.master_seed);
    out += '\n';
    return out;
}

std::string bounds_rows_to_csv(const std::vector<BoundsRow>& rows) {
    std::string out = std::string(kBoundsHeader) + "\n";
    for (const BoundsRow& row : rows) {
        out += std::to_string(row.n);
        out += ',';
        out += std::to_string(row.s);
        out += ',';
        out += format_csv_double(row.delta);
        out += ',';
        out += format_csv_double(row.sigma);
        out += ',';
        out += row.coherence_guarantee ? '1' : '0';
        out += ',';
        out += format_csv_double(row.sparsity_threshold);
        out += ',';
        out += format_csv_double(row.random_phase_bound);
        out += ',';
        out += format_csv_double(row.conditioning_bound);
        out += ',';
        out += format_csv_double(row.markov_min);
        out += ',';
        out += format_csv_double(row.chaining_min);
        out += ',';
        out += format_csv_double(row.c1);
        out += ',';
        out += format_csv_double(row.c2);
        out += ',';
        out += format_csv_double(row.c3);
        out += '\n';
    }
    return out;
}

namespace {

nlohmann::json trial_record_json(const TrialRecord& record) {
    nlohmann::json j{{"trial", record.trial_index},
                     {"seed", record.seed_used},
                     {"S", record.s},
                     {"success", record.success},
                     {"relative_error", record.relative_error},
                     {"residual", record.residual},
                     {"iterations", record.iterations}};
    if (record.certificate_max)
        j["certificate_max"] = *record.certificate_max;
    else
        j["certificate_max"] = nullptr;
    return j;
}

nlohmann::json bound_report_json(const BoundReport& report) {
    nlohmann::json terms = nlohmann::json::object();
    for (const auto& [name, value] : report.terms) terms[name] = value;
    return nlohmann::json{{"value", report.value},
                          {"clamped", report.clamped()},
                          {"feasible", report.feasible},
                          {"terms", terms}};
}

}  // namespace

std::string phase_rows_to_json(const ExperimentSpec& spec, const std::vector<PhaseRow>& rows) {
    nlohmann::json j;
    j["n"] = spec.n;
    j["window"] = window_kind_name(spec.window_kind);
    j["seed"] = spec.master_seed;
    j["rows"] = nlohmann::json::array();
    for (const PhaseRow& row : rows)
        j["rows"].push_back({{"S", row.s},
                             {"trials", row.trials},
                             {"successes", row.successes},
                             {"rate", row.rate},
                             {"wilson_lo", row.wilson.lo},
                             {"wilson_hi", row.wilson.hi}});
    return j.dump(2) + "\n";
}

std::string random_phase_to_json(const ExperimentSpec& spec, const RandomPhaseResult& result) {
    nlohmann::json j;
    j["n"] = spec.n;
    j["window"] = window_kind_name(spec.window_kind);
    j["S"] = spec.sparsity_grid.front();
    j["seed"] = spec.master_seed;
    j["trials"] = spec.trials;
    j["failures"] = result.failures;
    j["failure_rate"] = result.failure_rate;
    j["wilson_lo"] = result.wilson.lo;
    j["wilson_hi"] = result.wilson.hi;
    j["closed_form_bound"] = bound_report_json(result.bound);
    j["records"] = nlohmann::json::array();
    for (const TrialRecord& record : result.records) j["records"].push_back(trial_record_json(record));
    return j.dump(2) + "\n";
}

std::string conditioning_to_json(const ExperimentSpec& spec, const ConditioningResult& result) {
    nlohmann::json j;
    j["n"] = spec.n;
    j["S"] = spec.sparsity_grid.front();
    j["delta"] = spec.delta;
    j["seed"] = spec.master_seed;
    j["trials"] = result.rate.trials;
    j["failures"] = result.rate.events;
    j["rate"] = result.rate.rate;
    j["wilson_lo"] = result.rate.wilson.lo;
    j["wilson_hi"] = result.rate.wilson.hi;
    j["bound"] = bound_report_json(result.bound);
    return j.dump(2) + "\n";
}

std::string bounds_rows_to_json(const std::vector<BoundsRow>& rows) {
    nlohmann::json j = nlohmann::json::array();
    for (const BoundsRow& row : rows)
        j.push_back({{"n", row.n},
                     {"S", row.s},
                     {"delta", row.delta},
                     {"sigma", row.sigma},
                     {"coherence_guarantee", row.coherence_guarantee},
                     {"sparsity_threshold", row.sparsity_threshold},
                     {"random_phase_bound", row.random_phase_bound},
                     {"conditioning_bound", row.conditioning_bound},
                     {"markov_min", row.markov_min},
                     {"chaining_min", row.chaining_min},
                     {"C1", row.c1},
                     {"C2", row.c2},
                     {"C3", row.c3}});
    return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw IoError("failed while writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw IoError("failed while reading '" + path + "'");
    return buffer.str();
}

void write_manifest(const std::string& output_path, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>& params,
                    std::uint64_t seed, const std::string& started_at, double duration_s) {
    nlohmann::json j;
    j["command"] = command;
    nlohmann::json p = nlohmann::json::object();
    for (const auto& [key, value] : params) p[key] = value;
    j["params"] = p;
    j["seed"] = seed;
    j["version"] = kVersion;
    j["started_at"] = started_at;
    j["duration_s"] = duration_s;
    write_text_file(output_path + ".manifest.json", j.dump(2) + "\n");
}

}  // namespace gaborcs
