// kboost: kernel boosting with spectrum-derived early stopping.
//
// Subcommands:
//   spectrum    eigenvalues of the normalized kernel matrix (CSV)
//   radius      critical radius, statistical dimension, theory stopping time
//   boost       a single boosting path with per-iteration errors (CSV)
//   experiment  the full stopping-rule sweep from a config file
//   replicate   canned experiment presets (figures 1a/1b/3a/3b)
//
// Machine output goes to stdout or --out; human-readable summaries go to
// stderr so pipelines stay clean.

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kboost/boosting.hpp"
#include "kboost/config.hpp"
#include "kboost/csv.hpp"
#include "kboost/experiments.hpp"
#include "kboost/kernels.hpp"
#include "kboost/losses.hpp"
#include "kboost/spectrum.hpp"

#ifndef KBOOST_DEFAULT_PRESET_DIR
#define KBOOST_DEFAULT_PRESET_DIR ""
#endif

namespace {

using namespace kboost;

struct KernelFlags {
    std::string kernel = "sobolev1";
    double bandwidth = 0.0;
    std::string table;
    bool raw_kernel = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--kernel", kernel,
                        "kernel family: sobolev1, gaussian, tabulated")
            ->default_val(kernel);
        cmd->add_option("--bandwidth", bandwidth, "gaussian bandwidth (required for gaussian)");
        cmd->add_option("--table", table, "tabulated kernel file (n, then n*n entries)");
        cmd->add_flag("--raw-kernel", raw_kernel,
                      "skip the sup K(x,x) <= 1 rescaling");
    }

    KernelSpec build() const {
        if (kernel == "sobolev1") return KernelSpec::sobolev1(!raw_kernel);
        if (kernel == "gaussian") return KernelSpec::gaussian(bandwidth, !raw_kernel);
        if (kernel == "tabulated") {
            if (table.empty()) {
                throw std::invalid_argument("tabulated kernel requires --table");
            }
            return KernelSpec::tabulated_from_file(table, !raw_kernel);
        }
        throw std::invalid_argument("unknown kernel '" + kernel + "'");
    }

    DesignPoints design(int n, const KernelSpec& spec) const {
        if (spec.family == KernelFamily::tabulated) {
            const int rows = static_cast<int>(spec.table.rows());
            if (n > 0 && n != rows) {
                throw std::invalid_argument("--n disagrees with the kernel table size");
            }
            return index_design(rows);
        }
        if (n < 1) throw std::invalid_argument("--n is required and must be >= 1");
        return equidistant_design(n);
    }
};

std::ostream& open_output(const std::string& path, std::ofstream& file) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open output file: " + path);
    return file;
}

std::uint64_t env_seed_default() {
    if (const char* env = std::getenv("KBOOST_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw std::invalid_argument("KBOOST_SEED is not a nonnegative integer");
        }
    }
    return 42;
}

int run_spectrum(const KernelFlags& kf, int n, const std::string& out) {
    const KernelSpec spec = kf.build();
    const DesignPoints design = kf.design(n, spec);
    const Spectrum s = eigenvalues(build_kernel_matrix(spec, design));
    std::ofstream file;
    std::ostream& os = open_output(out, file);
    os << "j,eigenvalue\n";
    for (int j = 0; j < s.n(); ++j) {
        os << (j + 1) << ',' << format_double(s.values[j]) << '\n';
    }
    return 0;
}

int run_radius(const KernelFlags& kf, int n, double sigma, const std::string& loss_name,
               double fstar_norm, double regular_c, const std::string& out) {
    const KernelSpec spec = kf.build();
    const DesignPoints design = kf.design(n, spec);
    const Spectrum s = eigenvalues(build_kernel_matrix(spec, design));
    const CriticalRadius cr = critical_radius(s, sigma);
    const RegularityReport reg = regularity_check(s, cr.delta_n, regular_c);

    double m = 1.0, M = 1.0;
    const LossKind loss = parse_loss(loss_name);
    if (loss != LossKind::least_squares) {
        const LossConstantChain chain = resolve_classification_constants(loss, fstar_norm);
        m = chain.m;
        M = chain.M;
    }
    const long T = stopping_time_theory(cr.delta_n, m, M, StoppingRule::recommended);

    std::ofstream file;
    std::ostream& os = open_output(out, file);
    os << "delta_n,delta_n_sq,d_n,is_regular,T_theory\n";
    os << format_double(cr.delta_n) << ',' << format_double(cr.delta_n * cr.delta_n) << ','
       << reg.d_n << ',' << (reg.is_regular ? 1 : 0) << ',' << T << '\n';

    std::cerr << "critical radius delta_n = " << format_double(cr.delta_n)
              << " (delta_n^2 = " << format_double(cr.delta_n * cr.delta_n)
              << ", sigma = " << format_double(sigma) << ")\n"
              << "statistical dimension d_n = " << reg.d_n << ", tail sum = "
              << format_double(reg.tail_sum) << ", regular(c=" << format_double(regular_c)
              << ") = " << (reg.is_regular ? "yes" : "no") << '\n'
              << "theory stopping time T = " << T << '\n';
    return 0;
}

int run_trace(const RunConfig& run) {
    const ExperimentConfig& cfg = run.experiment;
    const KernelSpec& spec = cfg.kernel;
    if (spec.family == KernelFamily::tabulated) {
        throw std::invalid_argument("trace mode needs covariates on [0,1]");
    }
    if (run.iterations < 1) {
        throw std::invalid_argument("trace mode needs iterations >= 1");
    }
    const DesignPoints design = equidistant_design(run.trace_n);
    const KernelMatrix K = build_kernel_matrix(spec, design);
    const Eigen::VectorXd fs = fstar_values(design);

    Eigen::VectorXd y;
    LossModel model;
    if (cfg.loss == LossKind::least_squares) {
        model = LossModel::make(LossKind::least_squares);
        y = gen_regression_data(design, cfg.noise_sd, cfg.seed);
    } else {
        const LossConstantChain chain =
            resolve_classification_constants(cfg.loss, cfg.fstar_norm);
        model = LossModel::make(cfg.loss, chain.D, cfg.rescale_loss);
        y = gen_logit_labels(fs, cfg.reps, cfg.seed).rowwise().mean();
    }
    if (!step_size_in_theory_range(cfg.alpha, model)) {
        std::cerr << "warning: step size alpha=" << format_double(cfg.alpha)
                  << " lies outside the averaged-iterate range (0, "
                  << format_double(std::min(1.0 / model.M, model.M)) << "]\n";
    }

    BoostConfig bc;
    bc.alpha = cfg.alpha;
    bc.max_iterations = run.iterations;
    bc.record_every = std::max<long>(1, run.iterations);  // errors only
    const BoostTrace trace = run_boosting(K, y, model, bc, &fs);

    std::ofstream file;
    std::ostream& os = open_output(run.out, file);
    os << "t,err_iterate,err_average\n";
    for (long t = 1; t <= trace.T_final; ++t) {
        os << t << ',' << format_double(trace.per_iterate_error[t - 1]) << ','
           << format_double(trace.per_average_error[t - 1]) << '\n';
    }

    const GoldStandard gold = gold_standard(trace.per_iterate_error);
    std::cerr << "trace of " << trace.T_final << " iterations, n = " << run.trace_n
              << ": min |f^t - f*|_n^2 = " << format_double(gold.error) << " at t = "
              << gold.t_star << ", terminal = "
              << format_double(trace.per_iterate_error.back()) << '\n';
    return 0;
}

int run_experiment_config(RunConfig run, bool allow_failures) {
    if (run.mode == RunMode::trace) return run_trace(run);

    const ExperimentResult result = run_experiment(run.experiment);
    for (const std::string& w : result.warnings) std::cerr << "warning: " << w << '\n';

    std::string base = run.out;
    if (base.size() > 4 && base.substr(base.size() - 4) == ".csv") {
        base = base.substr(0, base.size() - 4);
    }
    if (base.empty()) {
        write_raw_csv(std::cout, result.records);
    } else {
        std::ofstream raw(base + "_raw.csv");
        if (!raw) throw std::runtime_error("cannot open output file: " + base + "_raw.csv");
        write_raw_csv(raw, result.records);
        std::ofstream agg(base + "_agg.csv");
        if (!agg) throw std::runtime_error("cannot open output file: " + base + "_agg.csv");
        write_agg_csv(agg, result.aggregates);
        std::cerr << "wrote " << base << "_raw.csv (" << result.records.size()
                  << " rows) and " << base << "_agg.csv\n";
    }

    std::cerr << "n        rule          kappa   mean_mse      se            mean_T\n";
    for (const AggregateRecord& a : result.aggregates) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-8d %-13s %-7s %-13.6g %-13.6g %.1f",
                      a.n, a.rule.c_str(),
                      std::isnan(a.kappa) ? "-" : format_double(a.kappa).c_str(),
                      a.mean_mse_emp, a.se_mse_emp, a.mean_T);
        std::cerr << buf << '\n';
    }

    if (result.failed_trials > 0) {
        std::cerr << result.failed_trials << " trial(s) diverged\n";
        if (!allow_failures) return 1;
    }
    return 0;
}

RunConfig assemble_run_config(const std::string& config_path,
                              const std::map<std::string, std::string>& flag_overrides,
                              const std::vector<std::string>& overrides) {
    ConfigFile file;
    if (!config_path.empty()) file = ConfigFile::parse_file(config_path);
    bool seed_given = false;
    for (const ConfigEntry& e : file.entries) seed_given |= e.key == "seed";
    for (const auto& [key, value] : flag_overrides) {
        file.set(key, value);
        seed_given |= key == "seed";
    }
    for (const std::string& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("override '" + ov + "' is not of the form key=value");
        }
        const std::string key = ov.substr(0, eq);
        file.set(key, ov.substr(eq + 1));
        seed_given |= key == "seed";
    }
    if (!seed_given) file.set("seed", std::to_string(env_seed_default()));
    return build_run_config(file);
}

std::string preset_path(const std::string& figure, const std::string& preset_dir) {
    static const std::map<std::string, std::string> files = {
        {"1a", "fig1a.conf"}, {"1b", "fig1b.conf"},
        {"2a", "fig3a.conf"}, {"2b", "fig3b.conf"},   // figure 2 plots the same sweeps
        {"3a", "fig3a.conf"}, {"3b", "fig3b.conf"},
    };
    const auto it = files.find(figure);
    if (it == files.end()) {
        throw std::invalid_argument("unknown figure '" + figure +
                                    "' (expected 1a, 1b, 2a, 2b, 3a, or 3b)");
    }
    std::string dir = preset_dir;
    if (dir.empty()) {
        if (const char* env = std::getenv("KBOOST_PRESET_DIR")) dir = env;
    }
    if (dir.empty()) dir = KBOOST_DEFAULT_PRESET_DIR;
    if (dir.empty()) {
        throw std::runtime_error("no preset directory (use --preset-dir or KBOOST_PRESET_DIR)");
    }
    return dir + "/" + it->second;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kernel boosting with spectrum-derived early stopping"};
    app.require_subcommand(1);

    // spectrum
    auto* sp = app.add_subcommand("spectrum", "eigenvalues of the normalized kernel matrix");
    KernelFlags sp_kernel;
    sp_kernel.attach(sp);
    int sp_n = 0;
    std::string sp_out;
    sp->add_option("--n", sp_n, "number of design points");
    sp->add_option("--out", sp_out, "output CSV path (default stdout)");

    // radius
    auto* rad = app.add_subcommand("radius", "critical radius and theory stopping time");
    KernelFlags rad_kernel;
    rad_kernel.attach(rad);
    int rad_n = 0;
    double rad_sigma = 1.0, rad_fstar_norm = 1.0, rad_c = 10.0;
    std::string rad_loss = "least_squares", rad_out;
    rad->add_option("--n", rad_n, "number of design points");
    rad->add_option("--sigma", rad_sigma, "effective noise level")->default_val(1.0);
    rad->add_option("--loss", rad_loss, "loss for the stopping-time constants")
        ->default_val(rad_loss);
    rad->add_option("--fstar-norm", rad_fstar_norm, "|f*|_H for the loss constants")
        ->default_val(1.0);
    rad->add_option("--regular-c", rad_c, "constant in the regularity tail test")
        ->default_val(10.0);
    rad->add_option("--out", rad_out, "output CSV path (default stdout)");

    // boost (single trace)
    auto* bo = app.add_subcommand("boost", "run one boosting path, emit per-iteration errors");
    KernelFlags bo_kernel;
    bo_kernel.attach(bo);
    int bo_n = 100;
    long bo_iters = 1000;
    double bo_alpha = 0.75, bo_sd = 0.70710678118654752;
    int bo_reps = 5;
    std::string bo_loss = "logistic", bo_out;
    std::optional<std::uint64_t> bo_seed;
    bo->add_option("--n", bo_n, "number of design points")->default_val(100);
    bo->add_option("--iterations", bo_iters, "iterations to run")->default_val(1000);
    bo->add_option("--loss", bo_loss, "least_squares, logistic, or exponential")
        ->default_val(bo_loss);
    bo->add_option("--alpha", bo_alpha, "step size")->default_val(0.75);
    bo->add_option("--sd", bo_sd, "observation noise sd (least squares)");
    bo->add_option("--reps", bo_reps, "replicated labels per point (classification)")
        ->default_val(5);
    bo->add_option("--seed", bo_seed, "RNG seed (default KBOOST_SEED or 42)");
    bo->add_option("--out", bo_out, "output CSV path (default stdout)");

    // experiment
    auto* ex = app.add_subcommand("experiment", "stopping-rule sweep from a config file");
    std::string ex_config, ex_out, ex_rules, ex_loss;
    std::optional<std::uint64_t> ex_seed;
    std::optional<int> ex_jobs, ex_trials;
    std::optional<double> ex_alpha, ex_sigma;
    std::vector<std::string> ex_overrides;
    bool ex_allow_failures = false;
    ex->add_option("--config", ex_config, "config file (key = value lines)");
    ex->add_option("--out", ex_out, "output base path; writes <base>_raw.csv and <base>_agg.csv");
    ex->add_option("--seed", ex_seed, "RNG seed (default KBOOST_SEED or 42)");
    ex->add_option("--jobs", ex_jobs, "parallel trial workers (output is identical for any value)");
    ex->add_option("--trials", ex_trials, "trials per sample size");
    ex->add_option("--rules", ex_rules, "comma list: gold, theory, power(kappa[,c])");
    ex->add_option("--loss", ex_loss, "least_squares, logistic, or exponential");
    ex->add_option("--alpha", ex_alpha, "step size");
    ex->add_option("--sigma", ex_sigma, "explicit effective noise level");
    ex->add_flag("--allow-failures", ex_allow_failures,
                 "exit 0 even when some trials diverge");
    ex->add_option("overrides", ex_overrides, "inline key=value overrides");

    // replicate
    auto* rep = app.add_subcommand("replicate", "run a committed figure preset");
    std::string rep_figure, rep_out, rep_preset_dir;
    std::optional<std::uint64_t> rep_seed;
    std::optional<int> rep_jobs;
    std::vector<std::string> rep_overrides;
    bool rep_allow_failures = false;
    rep->add_option("--figure", rep_figure, "1a, 1b, 2a, 2b, 3a, or 3b")->required();
    rep->add_option("--preset-dir", rep_preset_dir, "directory holding the preset configs");
    rep->add_option("--out", rep_out, "output base path");
    rep->add_option("--seed", rep_seed, "RNG seed");
    rep->add_option("--jobs", rep_jobs, "parallel trial workers");
    rep->add_flag("--allow-failures", rep_allow_failures,
                  "exit 0 even when some trials diverge");
    rep->add_option("overrides", rep_overrides, "inline key=value overrides");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sp->parsed()) return run_spectrum(sp_kernel, sp_n, sp_out);
        if (rad->parsed()) {
            return run_radius(rad_kernel, rad_n, rad_sigma, rad_loss, rad_fstar_norm,
                              rad_c, rad_out);
        }
        if (bo->parsed()) {
            RunConfig run;
            run.mode = RunMode::trace;
            run.trace_n = bo_n;
            run.iterations = bo_iters;
            run.out = bo_out;
            run.experiment.kernel = bo_kernel.build();
            run.experiment.loss = parse_loss(bo_loss);
            run.experiment.alpha = bo_alpha;
            run.experiment.noise_sd = bo_sd;
            run.experiment.reps = bo_reps;
            run.experiment.seed = bo_seed ? *bo_seed : env_seed_default();
            return run_trace(run);
        }
        if (ex->parsed() || rep->parsed()) {
            const bool is_rep = rep->parsed();
            std::map<std::string, std::string> flags;
            if (is_rep) {
                if (rep_seed) flags["seed"] = std::to_string(*rep_seed);
                if (rep_jobs) flags["jobs"] = std::to_string(*rep_jobs);
                if (!rep_out.empty()) flags["out"] = rep_out;
            } else {
                if (ex_seed) flags["seed"] = std::to_string(*ex_seed);
                if (ex_jobs) flags["jobs"] = std::to_string(*ex_jobs);
                if (ex_trials) flags["trials"] = std::to_string(*ex_trials);
                if (!ex_rules.empty()) flags["rules"] = ex_rules;
                if (!ex_loss.empty()) flags["loss"] = ex_loss;
                if (ex_alpha) flags["alpha"] = format_double(*ex_alpha);
                if (ex_sigma) flags["sigma"] = format_double(*ex_sigma);
                if (!ex_out.empty()) flags["out"] = ex_out;
            }
            const std::string config_path =
                is_rep ? preset_path(rep_figure, rep_preset_dir) : ex_config;
            const RunConfig run = assemble_run_config(
                config_path, flags, is_rep ? rep_overrides : ex_overrides);
            return run_experiment_config(run,
                                         is_rep ? rep_allow_failures : ex_allow_failures);
        }
    } catch (const std::exception& ex_err) {
        std::cerr << "kboost: error: " << ex_err.what() << '\n';
        return 1;
    }
    return 0;
}
