#include "kboost/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "kboost/csv.hpp"
#include "kboost/rng.hpp"
#include "kboost/spectrum.hpp"

namespace kboost {

namespace {

constexpr std::uint64_t kTagRegression = 0x524547;
constexpr std::uint64_t kTagLabels = 0x4c4f47;
constexpr std::uint64_t kTagPopulation = 0x504f50;
constexpr std::uint64_t kTagExcess = 0x455843;

const double kNaN = std::numeric_limits<double>::quiet_NaN();

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

double fstar_piecewise(double x) {
    if (x < -1e-12 || x > 1.0 + 1e-12) {
        throw std::invalid_argument("f* is defined on [0,1], got " + std::to_string(x));
    }
    return std::abs(x - 0.5) - 0.25;
}

Eigen::VectorXd fstar_values(const DesignPoints& design) {
    Eigen::VectorXd v(design.n());
    for (int i = 0; i < design.n(); ++i) v(i) = fstar_piecewise(design.points[i]);
    return v;
}

Eigen::VectorXd gen_regression_data(const DesignPoints& design, double sd,
                                    std::uint64_t seed) {
    if (sd < 0.0) throw std::invalid_argument("noise sd must be >= 0");
    Eigen::VectorXd y(design.n());
    for (int i = 0; i < design.n(); ++i) {
        Rng rng(derive_seed(seed, {kTagRegression, static_cast<std::uint64_t>(i)}));
        y(i) = fstar_piecewise(design.points[i]) + sd * rng.normal();
    }
    return y;
}

Eigen::MatrixXd gen_logit_labels(const Eigen::VectorXd& fstar_vals, int reps,
                                 std::uint64_t seed) {
    if (reps < 1) throw std::invalid_argument("reps must be >= 1");
    const auto n = fstar_vals.size();
    Eigen::MatrixXd labels(n, reps);
    for (Eigen::Index i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, {kTagLabels, static_cast<std::uint64_t>(i)}));
        const double p = sigmoid(fstar_vals(i));
        for (int k = 0; k < reps; ++k) labels(i, k) = rng.bernoulli(p) ? 1.0 : -1.0;
    }
    return labels;
}

double population_error_mc(const KernelSpec& spec, const DesignPoints& design,
                           const Eigen::VectorXd& omega,
                           const std::function<double(double)>& reference,
                           long n_mc, std::uint64_t seed) {
    if (n_mc < 1) throw std::invalid_argument("population_error_mc: n_mc must be >= 1");
    if (omega.size() != design.n()) {
        throw std::invalid_argument("population_error_mc: coefficient length mismatch");
    }
    if (spec.family == KernelFamily::tabulated) {
        throw std::invalid_argument(
            "population_error_mc: tabulated kernels have no off-design covariates");
    }
    const int n = design.n();
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    Rng rng(derive_seed(seed, {kTagPopulation}));
    double acc = 0.0;
    for (long j = 0; j < n_mc; ++j) {
        const double x = rng.uniform01();
        double fx = 0.0;
        for (int i = 0; i < n; ++i) {
            fx += omega(i) * eval_kernel(spec, x, design.points[i]);
        }
        fx *= inv_sqrt_n;
        const double d = fx - reference(x);
        acc += d * d;
    }
    return acc / static_cast<double>(n_mc);
}

std::string RuleSpec::name() const {
    switch (kind) {
        case Kind::gold: return "gold";
        case Kind::theory: return "theory";
        case Kind::power: return "power";
    }
    return "?";
}

RuleSpec parse_rule(const std::string& text) {
    std::string s = text;
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }),
            s.end());
    if (s == "gold") return RuleSpec::gold();
    if (s == "theory") return RuleSpec::theory();
    if (s.rfind("power(", 0) == 0 && s.back() == ')') {
        const std::string args = s.substr(6, s.size() - 7);
        const auto comma = args.find(',');
        try {
            if (comma == std::string::npos) {
                return RuleSpec::power(std::stod(args));
            }
            return RuleSpec::power(std::stod(args.substr(0, comma)),
                                   std::stod(args.substr(comma + 1)));
        } catch (const std::exception&) {
            // fall through to the error below
        }
    }
    throw std::invalid_argument("unrecognized rule '" + text +
                                "' (expected gold, theory, or power(kappa[,c]))");
}

namespace {

struct RuleTimes {
    std::vector<long> fixed;  // per rule; -1 for gold
    long base = 1;            // largest fixed rule time
};

struct TrialOutput {
    std::vector<TrialRecord> rows;
    long wall_ms = 0;
};

struct SweepContext {
    const ExperimentConfig& cfg;
    const KernelMatrix& K;
    const DesignPoints& design;
    const Eigen::VectorXd& fs;
    const LossModel& model;
    const RuleTimes& times;
    long T_run;
    int n;
};

TrialOutput run_trial(const SweepContext& ctx, int trial) {
    const auto start = std::chrono::steady_clock::now();
    const ExperimentConfig& cfg = ctx.cfg;
    const int n = ctx.n;
    const std::uint64_t trial_seed =
        derive_seed(cfg.seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(trial)});

    Eigen::VectorXd y;
    if (cfg.loss == LossKind::least_squares) {
        y = gen_regression_data(ctx.design, cfg.noise_sd, trial_seed);
    } else {
        const Eigen::MatrixXd labels = gen_logit_labels(ctx.fs, cfg.reps, trial_seed);
        y = labels.rowwise().mean();  // replicate-averaged labels in [-1, 1]
    }

    const bool want_mc = cfg.mc_samples > 0;
    const double sqrt_n = std::sqrt(static_cast<double>(n));

    // Snapshot the stopped iterate (and its expansion coefficients) at
    // the rule times known in advance; the gold time needs a second,
    // shorter pass once the error sequence is known.
    std::map<long, std::pair<Eigen::VectorXd, Eigen::VectorXd>> snapshots;
    for (std::size_t r = 0; r < cfg.rules.size(); ++r) {
        if (ctx.times.fixed[r] > 0) {
            snapshots.emplace(std::min(ctx.times.fixed[r], ctx.T_run),
                              std::pair<Eigen::VectorXd, Eigen::VectorXd>());
        }
    }

    std::vector<double> e_raw;
    e_raw.reserve(ctx.T_run);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd omega = Eigen::VectorXd::Zero(n);
    long failed_at = 0;
    for (long t = 1; t <= ctx.T_run; ++t) {
        if (want_mc) {
            omega -= cfg.alpha * sqrt_n * empirical_gradient(ctx.model, y, f);
        }
        f = boost_step(ctx.K, y, f, ctx.model, cfg.alpha);
        if (!f.allFinite()) {
            failed_at = t;
            break;
        }
        e_raw.push_back(empirical_error(f, ctx.fs));
        auto it = snapshots.find(t);
        if (it != snapshots.end()) it->second = {f, omega};
    }

    TrialOutput out;
    const auto emit = [&](std::size_t rule_idx, long T_used, double mse,
                          const Eigen::VectorXd* f_T, const Eigen::VectorXd* omega_T,
                          bool failed) {
        const RuleSpec& rule = cfg.rules[rule_idx];
        TrialRecord rec;
        rec.n = n;
        rec.trial = trial;
        rec.rule = rule.name();
        rec.kappa = rule.kind == RuleSpec::Kind::power ? rule.kappa : kNaN;
        rec.T_used = T_used;
        rec.failed = failed;
        rec.mse_emp = failed ? kNaN : mse;
        rec.mse_pop = kNaN;
        rec.excess_risk = kNaN;
        if (!failed && want_mc && f_T && omega_T) {
            rec.mse_pop = population_error_mc(
                cfg.kernel, ctx.design, *omega_T, fstar_piecewise, cfg.mc_samples,
                derive_seed(trial_seed, {kTagPopulation, static_cast<std::uint64_t>(rule_idx)}));
            const NoiseSpec mc_noise =
                cfg.loss == LossKind::least_squares
                    ? NoiseSpec::gaussian(std::max(cfg.noise_sd, 1e-300))
                    : NoiseSpec::bounded(0.0);
            rec.excess_risk = excess_risk_mc(
                ctx.model, *f_T, ctx.fs, mc_noise, cfg.mc_samples,
                derive_seed(trial_seed, {kTagExcess, static_cast<std::uint64_t>(rule_idx)}));
        }
        out.rows.push_back(std::move(rec));
    };

    if (failed_at > 0) {
        for (std::size_t r = 0; r < cfg.rules.size(); ++r) {
            emit(r, failed_at, kNaN, nullptr, nullptr, true);
        }
    } else {
        GoldStandard gold{};
        bool have_gold = false;
        for (const RuleSpec& rule : cfg.rules) {
            if (rule.kind == RuleSpec::Kind::gold) {
                gold = gold_standard(e_raw);
                have_gold = true;
                break;
            }
        }
        // Second pass up to the gold time when its snapshot is missing.
        if (have_gold && want_mc && snapshots.find(gold.t_star) == snapshots.end()) {
            Eigen::VectorXd fg = Eigen::VectorXd::Zero(n);
            Eigen::VectorXd og = Eigen::VectorXd::Zero(n);
            for (long t = 1; t <= gold.t_star; ++t) {
                og -= cfg.alpha * sqrt_n * empirical_gradient(ctx.model, y, fg);
                fg = boost_step(ctx.K, y, fg, ctx.model, cfg.alpha);
            }
            snapshots.emplace(gold.t_star, std::make_pair(std::move(fg), std::move(og)));
        }
        for (std::size_t r = 0; r < cfg.rules.size(); ++r) {
            const long T_used = cfg.rules[r].kind == RuleSpec::Kind::gold
                                    ? gold.t_star
                                    : std::min(ctx.times.fixed[r], ctx.T_run);
            const double mse = e_raw[T_used - 1];
            const Eigen::VectorXd* f_T = nullptr;
            const Eigen::VectorXd* omega_T = nullptr;
            auto it = snapshots.find(T_used);
            if (it != snapshots.end()) {
                f_T = &it->second.first;
                omega_T = &it->second.second;
            }
            emit(r, T_used, mse, f_T, omega_T, false);
        }
    }

    out.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    if (cfg.n_grid.empty()) throw std::invalid_argument("n_grid must be nonempty");
    if (!std::is_sorted(cfg.n_grid.begin(), cfg.n_grid.end())) {
        throw std::invalid_argument("n_grid must be ascending");
    }
    if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (cfg.rules.empty()) throw std::invalid_argument("at least one rule is required");
    if (cfg.kernel.family == KernelFamily::tabulated) {
        throw std::invalid_argument(
            "the simulation protocol needs covariates on [0,1]; tabulated kernels are "
            "supported by the spectrum/radius paths only");
    }
    if (!(cfg.alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");

    ExperimentResult result;

    LossModel model;
    double C_H = 0.0;
    if (cfg.loss == LossKind::least_squares) {
        model = LossModel::make(LossKind::least_squares);
    } else {
        const LossConstantChain chain =
            resolve_classification_constants(cfg.loss, cfg.fstar_norm);
        C_H = chain.C_H;
        model = LossModel::make(cfg.loss, chain.D, cfg.rescale_loss);
    }

    double sigma_eff = cfg.sigma_override;
    if (!(sigma_eff > 0.0)) {
        sigma_eff = cfg.loss == LossKind::least_squares
                        ? 2.0 * cfg.noise_sd
                        : bounded_noise_level(model.M, C_H);
    }

    if (!step_size_in_theory_range(cfg.alpha, model)) {
        std::ostringstream msg;
        msg << "step size alpha=" << cfg.alpha
            << " lies outside the averaged-iterate range (0, "
            << std::min(1.0 / model.M, model.M) << "]; proceeding anyway";
        result.warnings.push_back(msg.str());
    }

    bool has_gold = false;
    bool has_theory = false;
    for (const RuleSpec& r : cfg.rules) {
        has_gold |= r.kind == RuleSpec::Kind::gold;
        has_theory |= r.kind == RuleSpec::Kind::theory;
    }

    const std::size_t n_rules = cfg.rules.size();
    result.records.resize(cfg.n_grid.size() * cfg.trials * n_rules);

    for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
        const int n = cfg.n_grid[ni];
        const DesignPoints design = equidistant_design(n);
        const KernelMatrix K = build_kernel_matrix(cfg.kernel, design);
        const Eigen::VectorXd fs = fstar_values(design);

        RuleTimes times;
        times.fixed.assign(n_rules, -1);
        long theory_T = 0;
        if (has_theory) {
            const Spectrum spect = eigenvalues(K);
            const CriticalRadius cr = critical_radius(spect, sigma_eff);
            theory_T = stopping_time_theory(cr.delta_n, model.m, model.M,
                                            StoppingRule::recommended);
        }
        long base = 0;
        for (std::size_t r = 0; r < n_rules; ++r) {
            switch (cfg.rules[r].kind) {
                case RuleSpec::Kind::gold:
                    break;
                case RuleSpec::Kind::theory:
                    times.fixed[r] = theory_T;
                    break;
                case RuleSpec::Kind::power:
                    times.fixed[r] = stopping_time_power(n, cfg.rules[r].kappa,
                                                         cfg.rules[r].c);
                    break;
            }
            base = std::max(base, times.fixed[r]);
        }
        if (base <= 0) {
            // Only the gold rule: give it a trace on the theory-suggested scale.
            base = stopping_time_power(n, 2.0 / 3.0, 7.0);
        }
        times.base = base;
        long T_run = has_gold ? 4 * base : base;
        if (cfg.max_iter_cap > 0) T_run = std::min(T_run, cfg.max_iter_cap);
        T_run = std::max(T_run, 1L);

        SweepContext ctx{cfg, K, design, fs, model, times, T_run, n};

        const int jobs = std::max(1, cfg.jobs);
        std::atomic<int> next_trial{0};
        std::atomic<int> failures{0};
        std::vector<TrialOutput> outputs(cfg.trials);
        auto worker = [&]() {
            for (;;) {
                const int trial = next_trial.fetch_add(1);
                if (trial >= cfg.trials) break;
                outputs[trial] = run_trial(ctx, trial);
                for (const TrialRecord& rec : outputs[trial].rows) {
                    if (rec.failed) {
                        failures.fetch_add(1);
                        break;
                    }
                }
            }
        };
        if (jobs == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(jobs);
            for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }
        result.failed_trials += failures.load();

        for (int trial = 0; trial < cfg.trials; ++trial) {
            for (std::size_t r = 0; r < n_rules; ++r) {
                TrialRecord rec = outputs[trial].rows[r];
                rec.wall_ms = cfg.timing ? outputs[trial].wall_ms : 0;
                result.records[(ni * cfg.trials + trial) * n_rules + r] = std::move(rec);
            }
        }
    }

    // Aggregate over non-failed trials, per (n, rule) in sweep order.
    for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
        for (std::size_t r = 0; r < n_rules; ++r) {
            AggregateRecord agg;
            agg.n = cfg.n_grid[ni];
            agg.rule = cfg.rules[r].name();
            agg.kappa = cfg.rules[r].kind == RuleSpec::Kind::power ? cfg.rules[r].kappa : kNaN;
            double sum = 0.0, sum2 = 0.0, sumT = 0.0;
            long count = 0;
            for (int trial = 0; trial < cfg.trials; ++trial) {
                const TrialRecord& rec =
                    result.records[(ni * cfg.trials + trial) * n_rules + r];
                if (rec.failed) continue;
                sum += rec.mse_emp;
                sum2 += rec.mse_emp * rec.mse_emp;
                sumT += static_cast<double>(rec.T_used);
                ++count;
            }
            if (count > 0) {
                agg.mean_mse_emp = sum / count;
                agg.mean_T = sumT / count;
                if (count > 1) {
                    const double var =
                        std::max(0.0, (sum2 - sum * sum / count) / (count - 1));
                    agg.se_mse_emp = std::sqrt(var / count);
                }
            } else {
                agg.mean_mse_emp = kNaN;
                agg.se_mse_emp = kNaN;
                agg.mean_T = kNaN;
            }
            result.aggregates.push_back(std::move(agg));
        }
    }
    return result;
}

namespace {

std::string kappa_field(double kappa) {
    return std::isnan(kappa) ? std::string() : format_double(kappa);
}

}  // namespace

void write_raw_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
    os << "n,trial,rule,kappa,T,mse_emp,mse_pop,excess_risk,wall_ms,failed\n";
    for (const TrialRecord& r : records) {
        os << r.n << ',' << r.trial << ',' << r.rule << ',' << kappa_field(r.kappa) << ','
           << r.T_used << ',' << format_double(r.mse_emp) << ',' << format_double(r.mse_pop)
           << ',' << format_double(r.excess_risk) << ',' << r.wall_ms << ','
           << (r.failed ? 1 : 0) << '\n';
    }
}

void write_agg_csv(std::ostream& os, const std::vector<AggregateRecord>& aggregates) {
    os << "n,rule,kappa,mean_mse_emp,se_mse_emp,mean_T\n";
    for (const AggregateRecord& a : aggregates) {
        os << a.n << ',' << a.rule << ',' << kappa_field(a.kappa) << ','
           << format_double(a.mean_mse_emp) << ',' << format_double(a.se_mse_emp) << ','
           << format_double(a.mean_T) << '\n';
    }
}

}  // namespace kboost
