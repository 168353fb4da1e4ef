#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <map>
#include <sstream>

#include "gaborcs/harness.hpp"
#include "gaborcs/rng.hpp"

namespace gaborcs {

namespace {

std::string utc_timestamp_now() {
    const std::time_t tt = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

const std::map<std::string, WindowKind> kWindowNames{{"alltop", WindowKind::Alltop},
                                                     {"steinhaus", WindowKind::Steinhaus}};
const std::map<std::string, OutputFormat> kFormatNames{{"csv", OutputFormat::Csv},
                                                       {"json", OutputFormat::Json}};
const std::map<std::string, MagnitudeModel> kMagnitudeNames{{"unit", MagnitudeModel::Unit},
                                                            {"gaussian", MagnitudeModel::Gaussian}};

/// Flags shared across subcommands; each command registers the subset it uses.
struct CommonOpts {
    int n = 0;
    WindowKind window = WindowKind::Steinhaus;
    std::uint64_t seed = 1;
    std::string out;
    OutputFormat format = OutputFormat::Csv;
    int trials = 100;
    double tol = 0.0;     // 0: keep solver default
    int max_iters = 0;    // 0: keep solver default
};

BPConfig solver_from(const CommonOpts& opts) {
    BPConfig config;  // step sizes stay 0 and are filled per-n by the harness
    if (opts.tol > 0.0) config.recovery_tol = opts.tol;
    if (opts.max_iters > 0) config.max_iterations = opts.max_iters;
    return config;
}

void add_n(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--n", opts.n, "grid order n (signals live in C^n)")->required();
}

void add_window(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--window", opts.window, "window family")
        ->transform(CLI::CheckedTransformer(kWindowNames, CLI::ignore_case))
        ->default_str("steinhaus");
}

void add_seed(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--seed", opts.seed, "master seed (all randomness derives from it)")
        ->default_val(std::uint64_t{1});
}

void add_output(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--out", opts.out, "output file (stdout when omitted)");
    cmd->add_option("--format", opts.format, "output format")
        ->transform(CLI::CheckedTransformer(kFormatNames, CLI::ignore_case))
        ->default_str("csv");
}

void add_solver(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--tol", opts.tol, "relative error declaring recovery (default 1e-5)");
    cmd->add_option("--max-iters", opts.max_iters, "solver iteration cap (default 20000)");
}

/// Print to stdout or write to --out plus a run manifest beside it.
struct Emitter {
    std::string command;
    std::vector<std::pair<std::string, std::string>> params;
    std::string started_at = utc_timestamp_now();
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    void param(const std::string& key, const std::string& value) { params.emplace_back(key, value); }

    void deliver(const CommonOpts& opts, const std::string& text) const {
        if (opts.out.empty()) {
            std::cout << text;
            return;
        }
        write_text_file(opts.out, text);
        const double duration =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_manifest(opts.out, command, params, opts.seed, started_at, duration);
    }
};

std::string window_param(const CommonOpts& opts) { return window_kind_name(opts.window); }

Window make_window(const CommonOpts& opts) {
    return opts.window == WindowKind::Alltop ? alltop_window(opts.n)
                                             : steinhaus_window(opts.n, opts.seed);
}

SupportSet parse_support(const std::string& text, int n) {
    std::vector<TFIndex> indices;
    std::string pair;
    std::stringstream stream(text);
    while (std::getline(stream, pair, ';')) {
        const std::size_t colon = pair.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("--support expects 'k:l;k:l;...' pairs");
        indices.push_back(
            tf_index(std::stoll(pair.substr(0, colon)), std::stoll(pair.substr(colon + 1)), n));
    }
    if (indices.empty()) throw std::invalid_argument("--support parsed to an empty set");
    return SupportSet(n, std::move(indices));
}

std::string trial_record_row_json(const ExperimentSpec& spec, const TrialRecord& record);

// --- subcommand bodies ---------------------------------------------------

void cmd_window(const CommonOpts& opts) {
    Emitter emit{"window"};
    const Window w = make_window(opts);
    emit.param("n", std::to_string(opts.n));
    emit.param("window", window_param(opts));
    std::string text;
    if (opts.format == OutputFormat::Csv) {
        text = "q,re,im\n";
        for (int q = 0; q < opts.n; ++q) {
            text += std::to_string(q);
            text += ',';
            text += format_csv_double(w.values[static_cast<std::size_t>(q)].real());
            text += ',';
            text += format_csv_double(w.values[static_cast<std::size_t>(q)].imag());
            text += '\n';
        }
    } else {
        std::string rows;
        for (int q = 0; q < opts.n; ++q) {
            if (q) rows += ",\n";
            rows += "  {\"q\": " + std::to_string(q) +
                    ", \"re\": " + format_csv_double(w.values[static_cast<std::size_t>(q)].real()) +
                    ", \"im\": " + format_csv_double(w.values[static_cast<std::size_t>(q)].imag()) + "}";
        }
        text = "[\n" + rows + "\n]\n";
    }
    emit.deliver(opts, text);
}

void cmd_coherence(const CommonOpts& opts) {
    Emitter emit{"coherence"};
    const GaborOperator op(make_window(opts));
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.10f\n", coherence(op));
    emit.param("n", std::to_string(opts.n));
    emit.param("window", window_param(opts));
    emit.deliver(opts, buffer);
}

void cmd_gram(const CommonOpts& opts, int s, const std::string& support_text) {
    Emitter emit{"gram"};
    const std::uint64_t key = trial_key(s, 0);
    const Window w = opts.window == WindowKind::Alltop
                         ? alltop_window(opts.n)
                         : steinhaus_window(opts.n, derive_seed(opts.seed, key, SeedRole::Window));
    const GaborOperator op(w);
    const SupportSet support =
        support_text.empty()
            ? sample_uniform_support(opts.n, s, derive_seed(opts.seed, key, SeedRole::Support))
            : parse_support(support_text, opts.n);
    const ConditioningReport report = extremal_eigenvalues(gram_submatrix(op, support));

    emit.param("n", std::to_string(opts.n));
    emit.param("window", window_param(opts));
    emit.param("S", std::to_string(support.size()));
    std::string text;
    if (opts.format == OutputFormat::Csv) {
        text = "n,window,S,lambda_min,lambda_max,op_norm_h,frobenius_h,seed\n";
        text += std::to_string(opts.n);
        text += ',';
        text += window_param(opts);
        text += ',';
        text += std::to_string(support.size());
        text += ',';
        text += format_csv_double(report.lambda_min);
        text += ',';
        text += format_csv_double(report.lambda_max);
        text += ',';
        text += format_csv_double(report.op_norm_h);
        text += ',';
        text += format_csv_double(report.frobenius_h);
        text += ',';
        text += std::to_string(opts.seed);
        text += '\n';
    } else {
        text = "{\"n\": " + std::to_string(opts.n) + ", \"window\": \"" + window_param(opts) +
               "\", \"S\": " + std::to_string(support.size()) +
               ", \"lambda_min\": " + format_csv_double(report.lambda_min) +
               ", \"lambda_max\": " + format_csv_double(report.lambda_max) +
               ", \"op_norm_h\": " + format_csv_double(report.op_norm_h) +
               ", \"frobenius_h\": " + format_csv_double(report.frobenius_h) +
               ", \"seed\": " + std::to_string(opts.seed) + "}\n";
    }
    emit.deliver(opts, text);
}

ExperimentSpec recovery_spec(const CommonOpts& opts, ExperimentKind kind, std::vector<int> grid,
                             MagnitudeModel magnitudes) {
    ExperimentSpec spec;
    spec.kind = kind;
    spec.n = opts.n;
    spec.window_kind = opts.window;
    spec.sparsity_grid = std::move(grid);
    spec.trials = opts.trials;
    spec.master_seed = opts.seed;
    spec.solver = solver_from(opts);
    spec.output_path = opts.out;
    spec.format = opts.format;
    spec.magnitudes = magnitudes;
    return spec;
}

void cmd_recover(const CommonOpts& opts, int s, MagnitudeModel magnitudes) {
    Emitter emit{"recover"};
    ExperimentSpec spec = recovery_spec(opts, ExperimentKind::PhaseTransition, {s}, magnitudes);
    spec.trials = 1;
    const TrialRecord record = run_recovery_instance(spec, 0, true);
    emit.param("n", std::to_string(opts.n));
    emit.param("window", window_param(opts));
    emit.param("S", std::to_string(s));
    const std::string text = opts.format == OutputFormat::Csv
                                 ? trial_records_to_csv(spec, {record})
                                 : trial_record_row_json(spec, record);
    emit.deliver(opts, text);
}

void cmd_identify(const CommonOpts& opts, int s, MagnitudeModel magnitudes) {
    Emitter emit{"identify"};
    const std::uint64_t key = trial_key(s, 0);
    const SparseCoeffs truth = draw_instance_coeffs(opts.n, s, magnitudes, opts.seed, 0);
    const ChannelOperator gamma{truth};
    const std::uint64_t probe_seed = derive_seed(opts.seed, key, SeedRole::Probe);
    const IdentifyResult result = identify_channel(gamma, opts.window, probe_seed, solver_from(opts));

    const double error = relative_error(truth, result.solve);
    bool support_match = truth.support().size() == result.coeffs.support().size();
    if (support_match)
        for (std::size_t i = 0; i < truth.support().size(); ++i)
            support_match = support_match && result.coeffs.support().contains(truth.support()[i]);

    emit.param("n", std::to_string(opts.n));
    emit.param("window", window_param(opts));
    emit.param("S", std::to_string(s));
    std::string text;
    if (opts.format == OutputFormat::Csv) {
        text = "n,window,S,seed,converged,iterations,residual,relative_error,support_match\n";
        text += std::to_string(opts.n);
        text += ',';
        text += window_param(opts);
        text += ',';
        text += std::to_string(s);
        text += ',';
        text += std::to_string(opts.seed);
        text += ',';
        text += result.solve.converged ? '1' : '0';
        text += ',';
        text += std::to_string(result.solve.iterations);
        text += ',';
        text += format_csv_double(result.solve.residual);
        text += ',';
        text += format_csv_double(error);
        text += ',';
        text += support_match ? '1' : '0';
        text += '\n';
    } else {
        text = std::string("{\"n\": ") + std::to_string(opts.n) + ", \"window\": \"" +
               window_param(opts) + "\", \"S\": " + std::to_string(s) +
               ", \"seed\": " + std::to_string(opts.seed) +
               ", \"converged\": " + (result.solve.converged ? "true" : "false") +
               ", \"iterations\": " + std::to_string(result.solve.iterations) +
               ", \"residual\": " + format_csv_double(result.solve.residual) +
               ", \"relative_error\": " + format_csv_double(error) +
               ", \"support_match\": " + (support_match ? "true" : "false") + "}\n";
    }
    emit.deliver(opts, text);
}

void cmd_phase(const CommonOpts& opts, int s_min, int s_max, int s_step,
               MagnitudeModel magnitudes) {
    Emitter emit{"phase"};
    if (s_step < 1) throw std::domain_error("--s-step must be >= 1");
    if (s_max < s_min) throw std::domain_error("--s-max must be >= --s-min");
    std::vector<int> grid;
    for (int s = s_min; s <= s_max; s += s_step) grid.push_back(s);
    const ExperimentSpec spec =
        recovery_spec(opts, ExperimentKind::PhaseTransition, std::move(grid), magnitudes);
    const std::vector<PhaseRow> rows = run_phase_transition(spec);
    emit.param("n", std::to_string(opts.n));
    emit.param("window", window_param(opts));
    emit.param("s_min", std::to_string(s_min));
    emit.param("s_max", std::to_string(s_max));
    emit.param("s_step", std::to_string(s_step));
    emit.param("trials", std::to_string(opts.trials));
    emit.deliver(opts, opts.format == OutputFormat::Csv ? phase_rows_to_csv(spec, rows)
                                                        : phase_rows_to_json(spec, rows));
}

void cmd_random_phase(const CommonOpts& opts, int s, double sigma, const std::string& support_text) {
    Emitter emit{"random-phase"};
    ExperimentSpec spec =
        recovery_spec(opts, ExperimentKind::RandomPhase, {s}, MagnitudeModel::Unit);
    spec.sigma = sigma;
    if (!support_text.empty()) spec.fixed_support = parse_support(support_text, opts.n);
    const RandomPhaseResult result = run_random_phase(spec);
    emit.param("n", std::to_string(opts.n));
    emit.param("window", window_param(opts));
    emit.param("S", std::to_string(s));
    emit.param("trials", std::to_string(opts.trials));
    emit.param("sigma", format_csv_double(sigma));
    if (opts.format == OutputFormat::Csv) {
        emit.deliver(opts, trial_records_to_csv(spec, result.records));
        // Aggregate summary always goes to stdout; when the records land in a
        // file it doubles as a progress line, and '#' keeps it out of parsers.
        char buffer[256];
        std::snprintf(buffer, sizeof(buffer),
                      "# failure_rate %.12g (wilson %.12g..%.12g), closed-form bound %.12g%s\n",
                      result.failure_rate, result.wilson.lo, result.wilson.hi, result.bound.value,
                      result.bound.value > 1.0 ? " (vacuous at this scale)" : "");
        std::cout << buffer;
    } else {
        emit.deliver(opts, random_phase_to_json(spec, result));
    }
}

void cmd_conditioning(const CommonOpts& opts, int s, double delta) {
    Emitter emit{"conditioning"};
    ExperimentSpec spec =
        recovery_spec(opts, ExperimentKind::Conditioning, {s}, MagnitudeModel::Unit);
    spec.delta = delta;
    const ConditioningResult result = run_conditioning(spec);
    emit.param("n", std::to_string(opts.n));
    emit.param("S", std::to_string(s));
    emit.param("delta", format_csv_double(delta));
    emit.param("trials", std::to_string(opts.trials));
    emit.deliver(opts, opts.format == OutputFormat::Csv ? conditioning_to_csv(spec, result)
                                                        : conditioning_to_json(spec, result));
}

void cmd_bounds(const CommonOpts& opts, const std::vector<int>& sparsities, double delta,
                double sigma, const std::string& preset) {
    Emitter emit{"bounds"};
    if (!preset.empty()) {
        if (preset != "remark22")
            throw std::invalid_argument("unknown preset '" + preset + "' (available: remark22)");
        const RecoveryConstants constants = thm22_constants();
        char buffer[128];
        std::snprintf(buffer, sizeof(buffer), "C1 = %.12g\nC2 = %.12g\nC3 = %.12g\n", constants.c1,
                      constants.c2, constants.c3);
        emit.param("preset", preset);
        emit.deliver(opts, buffer);
        return;
    }
    if (opts.n < 1) throw std::domain_error("bounds: --n required unless --preset is given");
    ExperimentSpec spec;
    spec.kind = ExperimentKind::BoundsTable;
    spec.n = opts.n;
    spec.sparsity_grid = sparsities.empty() ? std::vector<int>{1} : sparsities;
    spec.master_seed = opts.seed;
    spec.delta = delta;
    spec.sigma = sigma;
    const std::vector<BoundsRow> rows = tabulate_bounds(spec);
    emit.param("n", std::to_string(opts.n));
    emit.param("delta", format_csv_double(delta));
    emit.param("sigma", format_csv_double(sigma));
    emit.deliver(opts, opts.format == OutputFormat::Csv ? bounds_rows_to_csv(rows)
                                                        : bounds_rows_to_json(rows));
}

std::string trial_record_row_json(const ExperimentSpec& spec, const TrialRecord& record) {
    std::string cert = record.certificate_max ? format_csv_double(*record.certificate_max) : "null";
    return std::string("{\"n\": ") + std::to_string(spec.n) + ", \"window\": \"" +
           window_kind_name(spec.window_kind) + "\", \"S\": " + std::to_string(record.s) +
           ", \"trial\": " + std::to_string(record.trial_index) +
           ", \"seed\": " + std::to_string(record.seed_used) +
           ", \"success\": " + (record.success ? "true" : "false") +
           ", \"relative_error\": " + format_csv_double(record.relative_error) +
           ", \"residual\": " + format_csv_double(record.residual) +
           ", \"iterations\": " + std::to_string(record.iterations) +
           ", \"certificate_max\": " + cert + "}\n";
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"Sparse time-frequency recovery toolkit: Gabor dictionaries from Alltop and "
                 "random unimodular windows, Basis Pursuit experiments, and bound evaluation"};
    app.require_subcommand(1);

    CommonOpts opts;
    int s = 1;
    int s_min = 1, s_max = 1, s_step = 1;
    double delta = 0.5, sigma = 9.0;
    MagnitudeModel magnitudes = MagnitudeModel::Unit;
    std::string support_text;
    std::vector<int> sparsities;
    std::string preset;

    auto add_magnitudes = [&](CLI::App* cmd) {
        cmd->add_option("--magnitudes", magnitudes, "nonzero magnitude model")
            ->transform(CLI::CheckedTransformer(kMagnitudeNames, CLI::ignore_case))
            ->default_str("unit");
    };

    CLI::App* window_cmd = app.add_subcommand("window", "print a window's entries");
    add_n(window_cmd, opts);
    add_window(window_cmd, opts);
    add_seed(window_cmd, opts);
    add_output(window_cmd, opts);
    window_cmd->callback([&] { cmd_window(opts); });

    CLI::App* coherence_cmd = app.add_subcommand("coherence", "maximum inner product between distinct dictionary columns");
    add_n(coherence_cmd, opts);
    add_window(coherence_cmd, opts);
    add_seed(coherence_cmd, opts);
    add_output(coherence_cmd, opts);
    coherence_cmd->callback([&] { cmd_coherence(opts); });

    CLI::App* gram_cmd = app.add_subcommand("gram", "conditioning of a Gram submatrix on a support");
    add_n(gram_cmd, opts);
    add_window(gram_cmd, opts);
    add_seed(gram_cmd, opts);
    add_output(gram_cmd, opts);
    gram_cmd->add_option("--s", s, "support size when sampling randomly")->default_val(1);
    gram_cmd->add_option("--support", support_text, "explicit support as 'k:l;k:l;...'");
    gram_cmd->callback([&] { cmd_gram(opts, s, support_text); });

    CLI::App* recover_cmd = app.add_subcommand("recover", "one seeded sparse-recovery instance");
    add_n(recover_cmd, opts);
    add_window(recover_cmd, opts);
    add_seed(recover_cmd, opts);
    add_output(recover_cmd, opts);
    add_solver(recover_cmd, opts);
    add_magnitudes(recover_cmd);
    recover_cmd->add_option("--s", s, "sparsity of the planted vector")->default_val(1);
    recover_cmd->callback([&] { cmd_recover(opts, s, magnitudes); });

    CLI::App* identify_cmd = app.add_subcommand("identify", "channel identification from one probe");
    add_n(identify_cmd, opts);
    add_window(identify_cmd, opts);
    add_seed(identify_cmd, opts);
    add_output(identify_cmd, opts);
    add_solver(identify_cmd, opts);
    add_magnitudes(identify_cmd);
    identify_cmd->add_option("--s", s, "sparsity of the spreading coefficients")->default_val(1);
    identify_cmd->callback([&] { cmd_identify(opts, s, magnitudes); });

    CLI::App* phase_cmd = app.add_subcommand("phase", "empirical phase transition over a sparsity range");
    add_n(phase_cmd, opts);
    add_window(phase_cmd, opts);
    add_seed(phase_cmd, opts);
    add_output(phase_cmd, opts);
    add_solver(phase_cmd, opts);
    add_magnitudes(phase_cmd);
    phase_cmd->add_option("--s-min", s_min, "smallest sparsity")->required();
    phase_cmd->add_option("--s-max", s_max, "largest sparsity")->required();
    phase_cmd->add_option("--s-step", s_step, "sparsity stride")->default_val(1);
    phase_cmd->add_option("--trials", opts.trials, "trials per sparsity")->default_val(100);
    phase_cmd->callback([&] { cmd_phase(opts, s_min, s_max, s_step, magnitudes); });

    CLI::App* random_phase_cmd =
        app.add_subcommand("random-phase", "random-phase trials on a fixed or sampled support");
    add_n(random_phase_cmd, opts);
    add_seed(random_phase_cmd, opts);
    add_output(random_phase_cmd, opts);
    add_solver(random_phase_cmd, opts);
    random_phase_cmd->add_option("--s", s, "sparsity")->default_val(1);
    random_phase_cmd->add_option("--trials", opts.trials, "trial count")->default_val(100);
    random_phase_cmd->add_option("--sigma", sigma, "bound parameter sigma > 8")->default_val(9.0);
    random_phase_cmd->add_option("--support", support_text, "fixed support as 'k:l;k:l;...'");
    random_phase_cmd->callback([&] { cmd_random_phase(opts, s, sigma, support_text); });

    CLI::App* conditioning_cmd =
        app.add_subcommand("conditioning", "Monte-Carlo Gram conditioning failure rate");
    add_n(conditioning_cmd, opts);
    add_seed(conditioning_cmd, opts);
    add_output(conditioning_cmd, opts);
    conditioning_cmd->add_option("--s", s, "support size")->default_val(1);
    conditioning_cmd->add_option("--delta", delta, "operator-norm deviation threshold")->default_val(0.5);
    conditioning_cmd->add_option("--trials", opts.trials, "trial count")->default_val(100);
    conditioning_cmd->callback([&] { cmd_conditioning(opts, s, delta); });

    CLI::App* bounds_cmd = app.add_subcommand("bounds", "closed-form bound table or constant presets");
    bounds_cmd->add_option("--n", opts.n, "grid order n");
    add_seed(bounds_cmd, opts);
    add_output(bounds_cmd, opts);
    bounds_cmd->add_option("--s", sparsities, "sparsity values (repeatable)");
    bounds_cmd->add_option("--delta", delta, "conditioning threshold")->default_val(0.5);
    bounds_cmd->add_option("--sigma", sigma, "random-phase bound parameter")->default_val(9.0);
    bounds_cmd->add_option("--preset", preset,
                           "print a named constant set instead of a table (available: remark22)");
    bounds_cmd->callback([&] { cmd_bounds(opts, sparsities, delta, sigma, preset); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace gaborcs
