// blockq: mean transaction-confirmation times for a batch-service
// priority queue, with simulation, mining-race and chain-data front ends.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blockq/batch_queue.hpp"
#include "blockq/chain_stats.hpp"
#include "blockq/errors.hpp"
#include "blockq/mining_race.hpp"
#include "blockq/priority.hpp"
#include "blockq/service.hpp"
#include "blockq/simulator.hpp"
#include "blockq/sweep.hpp"

namespace {

using namespace blockq;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitUnstable = 3;
constexpr int kExitNumerical = 4;

// Values measured over the two-year chain export.
constexpr double kPresetMu = 1.8379e-3;
constexpr double kPresetZeta = 13.288;
constexpr int kPresetB = 1750;
constexpr double kPresetLambda = 0.97275;
constexpr double kPresetLambdaH = 0.90466;
constexpr double kPresetLambdaL = 0.068082;

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

struct ServiceFlags {
    std::string kind = "exponential";
    double mu = kPresetMu;
    double duration = 0.0;
    int shape = 2;

    void attach(CLI::App *cmd) {
        cmd->add_option("--service", kind, "Block-generation law")
            ->check(CLI::IsMember({"exponential", "deterministic", "erlang"}));
        cmd->add_option("--mu", mu, "Block-generation rate, 1/s (exponential, erlang phase rate)");
        cmd->add_option("--duration", duration, "Deterministic block time, s");
        cmd->add_option("--erlang-shape", shape, "Erlang phase count");
    }

    ServiceDistribution build() const {
        if (kind == "deterministic") return ServiceDistribution::deterministic(duration > 0.0 ? duration : 1.0 / mu);
        if (kind == "erlang") return ServiceDistribution::erlang(shape, mu);
        return ServiceDistribution::exponential(mu);
    }
};

struct SolverFlags {
    std::string method = "auto";
    bool extended = false;

    void attach(CLI::App *cmd) {
        cmd->add_option("--alpha-method", method, "Boundary-rate solver")
            ->check(CLI::IsMember({"auto", "dense", "root-product"}));
        cmd->add_flag("--extended-precision", extended, "Solve the boundary system with 113-bit significands");
    }

    SolverOptions build() const {
        SolverOptions opts;
        opts.extended_precision = extended;
        if (method == "dense") opts.alpha_method = AlphaMethod::kDenseLU;
        if (method == "root-product") opts.alpha_method = AlphaMethod::kRootProduct;
        return opts;
    }
};

void write_file(const std::string &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw parse_error("cannot write " + path);
    out << content;
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeFlags {
    int b = kPresetB;
    double lambda = 0.0;
    std::vector<double> rates;
    bool preset = false;
    std::string csv;
    ServiceFlags service;
    SolverFlags solver;
};

int cmd_analyze(const AnalyzeFlags &f) {
    const ServiceDistribution service = f.service.build();
    const SolverOptions opts = f.solver.build();
    std::vector<double> rates = f.rates;
    double lambda = f.lambda;
    if (rates.empty() && lambda <= 0.0) {
        if (!f.preset) throw CLI::ValidationError("analyze", "give --lambda or --rates (or --preset paper)");
        lambda = kPresetLambda;
        rates = {kPresetLambdaH, kPresetLambdaL};
    }
    if (!rates.empty() && lambda <= 0.0)
        for (double r : rates) lambda += r;

    const QueueConfig cfg{f.b, lambda, service};
    const auto load = stability_check(cfg);
    std::cout << "b: " << f.b << "\nlambda: " << num(lambda) << "\nE[S]: " << num(service.mean())
              << "\noffered_load: " << num(load.offered_load) << '\n';
    if (!load.stable) {
        // Names the first class whose cumulative load saturates.
        if (!rates.empty()) class_confirmation_times({rates, service, f.b}, opts);
        throw unstable_error("unstable: lambda * E[S] = " + num(load.offered_load) + " >= b");
    }

    const AnalyticSolution sol = solve(cfg, opts);
    std::cout << "p0: " << num(sol.p0) << "\nE[N]: " << num(sol.mean_queue) << "\nE[T]: " << num(sol.mean_sojourn)
              << " s\nroot_residual: " << num(sol.residual) << "\nsystem_residual: " << num(sol.system_residual) << '\n';

    std::ostringstream csv;
    csv << "class,arrival_rate,mean_tct_s\nall," << num(lambda) << ',' << num(sol.mean_sojourn) << '\n';
    if (!rates.empty()) {
        const auto times = class_confirmation_times({rates, service, f.b}, opts);
        std::cout << "per-class (" << kDecompositionLabel << "):\n";
        for (std::size_t i = 0; i < times.size(); ++i) {
            std::cout << "  class " << i + 1 << ": lambda " << num(rates[i]) << ", E[T] " << num(times[i]) << " s\n";
            csv << i + 1 << ',' << num(rates[i]) << ',' << num(times[i]) << '\n';
        }
    }
    if (!f.csv.empty()) write_file(f.csv, csv.str());
    return kExitOk;
}

// ---- sweep -----------------------------------------------------------------

struct SweepFlags {
    std::vector<int> b{1000, 2000, 3000, 4000, 5000};
    std::string mode = "classless";
    double start = 0.01;
    double stop = 10.0;
    int points = 100;
    double zeta = kPresetZeta;
    double lambda_h = kPresetLambdaH;
    std::string out;
    ServiceFlags service;
    SolverFlags solver;
};

int cmd_sweep(const SweepFlags &f) {
    SweepSpec spec{f.start, f.stop, f.points, f.b, SweepMode::kClassless, f.zeta, f.lambda_h, f.service.build()};
    if (f.mode == "zeta") spec.mode = SweepMode::kFixedZeta;
    if (f.mode == "fixed-high") spec.mode = SweepMode::kFixedHigh;
    spec.validate();
    const auto rows = run_sweep(spec, f.solver.build());
    std::ostringstream csv;
    write_sweep_csv(csv, rows);
    if (f.out.empty())
        std::cout << csv.str();
    else
        write_file(f.out, csv.str());
    return kExitOk;
}

// ---- estimate --------------------------------------------------------------

struct EstimateFlags {
    int b = 10;
    std::vector<double> rates;
    std::uint64_t seed = 1;
    int replications = 50;
    std::uint64_t warmup = 10'000;
    std::uint64_t horizon = 100'000;
    std::string samples_csv;
    AccretionPolicy accretion = AccretionPolicy::kImmutable;
    ServiceFlags service;
};

int cmd_estimate(const EstimateFlags &f) {
    SimConfig cfg{{f.rates, f.service.build(), f.b}, f.seed, f.replications, f.warmup, f.horizon};
    cfg.accretion = f.accretion;
    cfg.validate();
    const SimEstimate est = estimate(cfg);
    std::cout << "replications: " << est.replications << "\nseed: " << f.seed << '\n';
    for (std::size_t c = 0; c < est.class_mean.size(); ++c)
        std::cout << "class " << c + 1 << ": E[T] " << num(est.class_mean[c]) << " +/- "
                  << num(est.class_half_width[c]) << " s (95% CI)\n";
    std::cout << "overall: E[T] " << num(est.overall_mean) << " +/- " << num(est.overall_half_width)
              << " s\nidle_fraction: " << num(est.idle_fraction) << "\nmean_in_system: " << num(est.mean_in_system)
              << '\n';
    if (est.unstable) std::cout << "warning: queue exceeded the instability limit in some replication\n";
    if (!f.samples_csv.empty()) {
        std::ostringstream csv;
        write_replication_csv(csv, est);
        write_file(f.samples_csv, csv.str());
    }
    return est.unstable ? kExitUnstable : kExitOk;
}

// ---- validate --------------------------------------------------------------

struct ValidateFlags {
    bool quick = false;
    std::uint64_t seed = 1;
    int replications = 50;
    std::string csv;
    AccretionPolicy accretion = AccretionPolicy::kImmutable;
};

int cmd_validate(const ValidateFlags &f) {
    const ServiceDistribution fitted = ServiceDistribution::exponential(kPresetMu);
    std::ostringstream csv;
    csv << "check,b,lambda,class,analytic_s,reference_s,half_width_s,pass\n";
    bool ok = true;

    if (!f.quick) {
        const auto t0 = std::chrono::steady_clock::now();
        const double classless = mean_confirmation_time({kPresetB, kPresetLambda, fitted});
        const auto [th, tl] = two_class_times(kPresetLambdaH, kPresetLambdaL, fitted, kPresetB);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const struct {
            const char *cls;
            double lambda, value, expected;
        } table[] = {{"all", kPresetLambda, classless, 568.10},
                     {"H", kPresetLambdaH, th, 562.16},
                     {"L", kPresetLambdaL, tl, 647.05}};
        for (const auto &row : table) {
            const bool pass = std::abs(row.value - row.expected) <= 0.005 * row.expected;
            ok = ok && pass;
            std::cout << (pass ? "PASS" : "FAIL") << "  measured " << row.cls << ": " << num(row.value)
                      << " s vs reference " << num(row.expected) << " s (0.5%)\n";
            csv << "measured," << kPresetB << ',' << num(row.lambda) << ',' << row.cls << ',' << num(row.value) << ','
                << num(row.expected) << ",0," << (pass ? "true" : "false") << '\n';
        }
        std::cout << "      analysis time " << num(secs) << " s\n";
    }

    const std::vector<int> bs = f.quick ? std::vector<int>{10} : std::vector<int>{10, 50};
    int cells = 0, inside = 0;
    for (int b : bs) {
        for (double frac : {0.30, 0.60, 0.85}) {
            const double lambda = frac * b * kPresetMu;
            const auto [lh, ll] = split_by_ratio(lambda, kPresetZeta);
            SimConfig cfg{{{lh, ll}, fitted, b}, f.seed, f.replications};
            cfg.accretion = f.accretion;
            const ValidationReport rep = verify_against_analysis(cfg);
            const double f_all = mean_confirmation_time({b, lambda, fitted});
            const auto &sim = rep.simulation;
            const bool all_inside = std::abs(f_all - sim.overall_mean) <= sim.overall_half_width;
            const struct {
                const char *cls;
                double analytic, mean, hw;
                bool in;
            } cellv[] = {{"H", rep.classes[0].analytic, rep.classes[0].simulated, rep.classes[0].half_width,
                          rep.classes[0].analytic_inside_ci},
                         {"L", rep.classes[1].analytic, rep.classes[1].simulated, rep.classes[1].half_width,
                          rep.classes[1].analytic_inside_ci},
                         {"all", f_all, sim.overall_mean, sim.overall_half_width, all_inside}};
            for (const auto &c : cellv) {
                ++cells;
                inside += c.in ? 1 : 0;
                std::cout << (c.in ? "in  " : "out ") << " grid b=" << b << " lambda=" << num(lambda) << " "
                          << c.cls << ": analytic " << num(c.analytic) << " s, simulated " << num(c.mean) << " +/- "
                          << num(c.hw) << " s\n";
                csv << "grid," << b << ',' << num(lambda) << ',' << c.cls << ',' << num(c.analytic) << ','
                    << num(c.mean) << ',' << num(c.hw) << ',' << (c.in ? "true" : "false") << '\n';
            }
            if (!rep.little_ok) {
                ok = false;
                std::cout << "FAIL  little's law b=" << b << " lambda=" << num(lambda) << ": relative error "
                          << num(rep.little_relative_error) << '\n';
            }
        }
    }
    // 95% intervals alone miss about one cell in twenty.
    const bool sim_pass = inside >= cells - 1;
    ok = ok && sim_pass;
    std::cout << (sim_pass ? "PASS" : "FAIL") << "  analysis inside simulation CI for " << inside << " of " << cells
              << " cells (" << kDecompositionLabel << ")\n";
    if (!f.csv.empty()) write_file(f.csv, csv.str());
    return ok ? kExitOk : kExitValidation;
}

// ---- stats -----------------------------------------------------------------

struct StatsFlags {
    std::string blocks;
    std::string txs;
    std::string threshold = "0.0001";
    double span = 0.0;
    std::int64_t bucket = 86'400;
    std::string out_dir;
    double bin_width = 60.0;
    double bin_upper = 6600.0;
};

int cmd_stats(const StatsFlags &f) {
    const ChainData data = load(f.blocks, f.txs);
    for (const auto &e : data.blocks.errors) std::cerr << f.blocks << ':' << e.line << ": " << e.message << '\n';
    for (const auto &e : data.txs.errors) std::cerr << f.txs << ':' << e.line << ": " << e.message << '\n';
    const auto &txs = data.txs.records;
    const ClassRule rule = ClassRule::from_btc(f.threshold);

    double span = f.span;
    if (span <= 0.0 && !txs.empty()) {
        std::int64_t lo = txs.front().first_seen, hi = lo;
        for (const auto &t : txs) {
            lo = std::min(lo, t.first_seen);
            hi = std::max(hi, t.first_seen);
        }
        span = static_cast<double>(hi - lo);
    }
    if (span <= 0.0) span = 1.0;

    std::ostringstream summary, classes, fees, series, fit;
    write_summary_csv(summary, summarize_chain(data.blocks.records, txs));
    const ClassBreakdown breakdown = classify_and_rates(txs, rule, span);
    write_classes_csv(classes, breakdown);
    write_fee_frequency_csv(fees, breakdown);
    const auto buckets = time_series(txs, rule, f.bucket);
    write_time_series_csv(series, buckets);

    const auto gaps = block_generation_times(data.blocks.records);
    bool have_fit = false;
    double sum = 0.0;
    for (double g : gaps) sum += g;
    if (!gaps.empty() && sum > 0.0) {
        const ExponentialFit ef = fit_exponential(gaps, {f.bin_width, f.bin_upper});
        fit << "bin_lower_s,bin_upper_s,relative_frequency,empirical_density,model_density\n";
        for (const auto &bin : ef.bins)
            fit << num(bin.lower) << ',' << num(bin.upper) << ',' << num(bin.relative_frequency) << ','
                << num(bin.empirical_density) << ',' << num(bin.model_density) << '\n';
        have_fit = true;
        std::cerr << "fitted block-generation rate: " << num(1.0 / ef.sample_mean) << " 1/s\n";
    }

    if (f.out_dir.empty()) {
        std::cout << summary.str() << '\n' << classes.str();
    } else {
        std::filesystem::create_directories(f.out_dir);
        const std::filesystem::path dir(f.out_dir);
        write_file((dir / "summary.csv").string(), summary.str());
        write_file((dir / "classes.csv").string(), classes.str());
        write_file((dir / "fee_frequency.csv").string(), fees.str());
        write_file((dir / "time_series.csv").string(), series.str());
        if (have_fit) write_file((dir / "block_time_fit.csv").string(), fit.str());
    }
    return kExitOk;
}

// ---- mining ----------------------------------------------------------------

struct MiningFlags {
    int n = 5700;
    double m = 1e7;
    std::size_t samples = 10'000;
    std::uint64_t seed = 1;
    std::string csv;
};

int cmd_mining(const MiningFlags &f) {
    const MiningRaceConfig cfg{f.n, f.m, f.samples, f.seed};
    cfg.validate();
    const auto sample = simulate_race(cfg);
    const double ks = ks_statistic(sample, [&](double x) { return race_exponential_cdf(x, f.n, f.m); });
    const double ks_exact = ks_statistic(sample, [&](double x) { return race_exact_cdf(x, f.n, f.m); });
    const double sup = exact_exponential_sup_distance(f.n, f.m);
    std::cout << "n: " << f.n << "\nM: " << num(f.m) << "\nsamples: " << f.samples << "\nks_vs_exponential: "
              << num(ks) << "\nks_vs_exact: " << num(ks_exact) << "\nks_critical_95: "
              << num(ks_critical_value(f.samples)) << "\nexact_sup_distance: " << num(sup) << '\n';
    if (!f.csv.empty()) {
        std::ostringstream csv;
        write_race_cdf_csv(csv, sample, f.n, f.m);
        write_file(f.csv, csv.str());
    }
    return kExitOk;
}

// `--config FILE` holds key=value lines (blank lines and # comments
// ignored). Each key becomes `--key=value` right after the subcommand unless
// the command line already sets it, so flags override the file.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    if (args.empty() || args[0].starts_with('-')) return args;
    std::string path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].starts_with("--config=")) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw CLI::FileError::Missing(path);

    auto trim = [](std::string t) {
        const auto b = t.find_first_not_of(" \t\r");
        const auto e = t.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
    };
    auto given = [&](const std::string &flag) {
        for (const auto &a : args)
            if (a == flag || a.starts_with(flag + "=")) return true;
        return false;
    };
    std::vector<std::string> extra;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        std::string key = eq == std::string::npos ? "" : trim(line.substr(0, eq));
        if (key.starts_with("--")) key.erase(0, 2);
        if (key.empty()) throw CLI::ConversionError(path + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string flag = "--" + key;
        if (!given(flag)) extra.push_back(flag + "=" + trim(line.substr(eq + 1)));
    }
    args.insert(args.begin() + 1, extra.begin(), extra.end());
    return args;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Batch-service priority queue model of blockchain transaction confirmation", "blockq"};
    app.require_subcommand(1);

    AnalyzeFlags af;
    auto *analyze = app.add_subcommand("analyze", "Mean confirmation time from the analytic model");
    std::string config;  // consumed by expand_config
    analyze->add_option("--config", config, "key=value file; flags override");
    analyze->add_option("--b", af.b, "Maximum transactions per block")->check(CLI::PositiveNumber);
    analyze->add_option("--lambda", af.lambda, "Aggregate arrival rate, 1/s");
    analyze->add_option("--rates", af.rates, "Per-class rates, highest priority first")->delimiter(',');
    analyze->add_option("--csv", af.csv, "Write results as CSV");
    std::string analyze_preset;
    analyze->add_option("--preset", analyze_preset)->check(CLI::IsMember({"paper"}));
    af.service.attach(analyze);
    af.solver.attach(analyze);

    SweepFlags sf;
    auto *sweep = app.add_subcommand("sweep", "E[T] over a grid of arrival rates");
    sweep->add_option("--config", config, "key=value file; flags override");
    sweep->add_option("--b", sf.b, "Block capacities")->delimiter(',');
    sweep->add_option("--mode", sf.mode)->check(CLI::IsMember({"classless", "zeta", "fixed-high"}));
    sweep->add_option("--lambda-start", sf.start);
    sweep->add_option("--lambda-stop", sf.stop);
    sweep->add_option("--points", sf.points);
    sweep->add_option("--zeta", sf.zeta, "lambda_H / lambda_L in zeta mode");
    sweep->add_option("--lambda-h", sf.lambda_h, "Fixed lambda_H in fixed-high mode (grid is lambda_L)");
    sweep->add_option("--out", sf.out, "CSV path (default stdout)");
    std::string sweep_preset;
    sweep->add_option("--preset", sweep_preset)->check(CLI::IsMember({"paper"}));
    sf.service.attach(sweep);
    sf.solver.attach(sweep);

    const std::map<std::string, AccretionPolicy> accretion{{"immutable", AccretionPolicy::kImmutable},
                                                           {"displacement", AccretionPolicy::kPriorityDisplacement}};

    EstimateFlags ef;
    auto *est = app.add_subcommand("estimate", "Discrete-event simulation estimate with 95% CIs");
    est->add_option("--config", config, "key=value file; flags override");
    est->add_option("--b", ef.b)->check(CLI::PositiveNumber);
    est->add_option("--rates", ef.rates, "Per-class rates, highest priority first")->delimiter(',')->required();
    est->add_option("--seed", ef.seed);
    est->add_option("--replications", ef.replications);
    est->add_option("--warmup", ef.warmup);
    est->add_option("--horizon", ef.horizon);
    est->add_option("--samples-csv", ef.samples_csv, "Per-replication means as CSV");
    est->add_option("--accretion", ef.accretion, "Arrival to a full block: displace a lower class or wait")
        ->transform(CLI::CheckedTransformer(accretion, CLI::ignore_case));
    ef.service.attach(est);

    ValidateFlags vf;
    auto *val = app.add_subcommand("validate", "Measured-rate reproduction and analysis-vs-simulation checks");
    val->add_option("--config", config, "key=value file; flags override");
    val->add_flag("--quick", vf.quick, "b = 10 simulation cross-check only");
    val->add_option("--seed", vf.seed);
    val->add_option("--replications", vf.replications);
    val->add_option("--csv", vf.csv);
    val->add_option("--accretion", vf.accretion, "Simulated discipline for an arrival to a full block")
        ->transform(CLI::CheckedTransformer(accretion, CLI::ignore_case));

    StatsFlags stf;
    auto *stats = app.add_subcommand("stats", "Chain-data statistics from CSV exports");
    stats->add_option("--config", config, "key=value file; flags override");
    stats->add_option("--blocks", stf.blocks)->required();
    stats->add_option("--txs", stf.txs)->required();
    stats->add_option("--threshold", stf.threshold, "H/L fee threshold in BTC");
    stats->add_option("--span", stf.span, "Observation span in seconds (default: first_seen range)");
    stats->add_option("--bucket", stf.bucket, "Time-series bucket width in seconds");
    stats->add_option("--bin-width", stf.bin_width, "Block-time histogram bin width, s");
    stats->add_option("--bin-upper", stf.bin_upper, "Block-time histogram upper edge, s");
    stats->add_option("--out-dir", stf.out_dir, "Directory for CSV outputs (default: stdout)");

    MiningFlags mf;
    auto *mining = app.add_subcommand("mining", "Mining-race minimum vs exponential law");
    mining->add_option("--config", config, "key=value file; flags override");
    mining->add_option("--n", mf.n, "Miner count")->check(CLI::PositiveNumber);
    mining->add_option("--m", mf.m, "Nonce-space size");
    mining->add_option("--samples", mf.samples);
    mining->add_option("--seed", mf.seed);
    mining->add_option("--csv", mf.csv, "CDF comparison CSV");

    try {
        auto args = expand_config({argv + 1, argv + argc});
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*analyze) {
            af.preset = !analyze_preset.empty();
            return cmd_analyze(af);
        }
        if (*sweep) return cmd_sweep(sf);
        if (*est) return cmd_estimate(ef);
        if (*val) return cmd_validate(vf);
        if (*stats) return cmd_stats(stf);
        if (*mining) return cmd_mining(mf);
    } catch (const CLI::ValidationError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const unstable_error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUnstable;
    } catch (const numerical_error &e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const parse_error &e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitUsage;
}
