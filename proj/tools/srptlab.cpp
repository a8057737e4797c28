// srptlab: SRPT heavy-traffic simulation laboratory.
//
// Subcommands: simulate, couple, intertwine, limit, collapse, converge,
// verify. Exit code 0 iff every requested check passed.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "srptlab/config.hpp"
#include "srptlab/csv.hpp"
#include "srptlab/experiment.hpp"
#include "srptlab/limit_field.hpp"
#include "srptlab/scaled_measures.hpp"
#include "srptlab/srpt_queue.hpp"
#include "srptlab/verify.hpp"

using namespace srptlab;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_given = false;
    int jobs = 1;
};

ExperimentConfig load_config(const CommonOpts& opts) {
    ExperimentConfig cfg;
    if (!opts.config_path.empty()) cfg = ExperimentConfig::load(opts.config_path);
    if (opts.seed_given) cfg.master_seed = opts.seed;
    cfg.out_dir = opts.out_dir;
    cfg.jobs = opts.jobs;
    std::filesystem::create_directories(cfg.out_dir);
    return cfg;
}

std::string joined(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON experiment config")->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "master seed")->each([&](const std::string&) { opts.seed_given = true; });
    cmd->add_option("--jobs", opts.jobs, "worker count")->check(CLI::PositiveNumber);
}

int cmd_simulate(const CommonOpts& opts) {
    const ExperimentConfig cfg = load_config(opts);
    const double r = cfg.r_list.front();
    const HeavyTrafficParams ht(cfg.service, r, cfg.kappa);
    const auto initial = generate_initial(cfg.initial, r, ht.c_r, derive_stream_seed(cfg.master_seed, 0xA11CE));
    const Trajectory traj = simulate_srpt(cfg.arrivals, cfg.service, ht.lambda_r, initial,
                                          r * r * cfg.horizon_T, cfg.master_seed);
    const std::string path = joined(cfg.out_dir, "trajectory.csv");
    write_file(path, trajectory_csv(traj));
    std::printf("r=%g lambda_r=%.6f c_r=%.6f events=%zu -> %s\n", r, ht.lambda_r, ht.c_r, traj.events.size(),
                path.c_str());
    for (double t : cfg.snapshot_times) {
        const auto snap = scaled_state(state_at(traj, t * r * r), r, ht.c_r);
        const std::string spath = joined(cfg.out_dir, "snapshot_t" + fmt_g17(t) + ".csv");
        write_file(spath, snapshot_csv(snap));
    }
    return 0;
}

int cmd_couple(const CommonOpts& opts) {
    const ExperimentConfig cfg = load_config(opts);
    const double r = cfg.r_list.front();
    const HeavyTrafficParams ht(cfg.service, r, cfg.kappa);
    const double horizon = r * r * cfg.horizon_T;
    const double slack = 1e-9;

    long violations = 0, checks = 0;
    for (int seed_i = 0; seed_i < cfg.replications; ++seed_i) {
        CounterRng rng(derive_stream_seed(cfg.master_seed, static_cast<std::uint64_t>(seed_i)));
        const auto initial =
            generate_initial(cfg.initial, r, ht.c_r, derive_stream_seed(cfg.master_seed, 0xA11CE + static_cast<std::uint64_t>(seed_i)));
        const ArrivalStream stream = ArrivalStream::generate(cfg.arrivals, ht.lambda_r, cfg.service, horizon, rng);
        std::vector<double> thresholds;
        for (double a : cfg.levels)
            if (a > 0.0) thresholds.push_back(a * ht.c_r);
        thresholds.push_back(std::numeric_limits<double>::infinity());
        const auto runs = coupled_truncated_runs(initial, stream, thresholds, horizon);

        std::vector<double> grid;
        for (const auto& run : runs)
            for (const auto& e : run.events) grid.push_back(e.time / (r * r));
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

        std::vector<double> finite_levels;
        for (double a : cfg.levels)
            if (a > 0.0) finite_levels.push_back(a);
        for (std::size_t ai = 0; ai < finite_levels.size(); ++ai) {
            const double a = finite_levels[ai];
            const auto ref = netput_and_reflection(runs[ai], r, ht.c_r, a, grid);
            for (std::size_t yi = ai; yi < runs.size(); ++yi) {
                const auto bundle = netput_and_reflection(runs[yi], r, ht.c_r, a, grid);
                if (seed_i == 0 && yi + 1 == runs.size())
                    write_file(joined(cfg.out_dir, "bundle_a" + fmt_g17(a) + ".csv"), bundle_csv(bundle));
                for (std::size_t i = 0; i < bundle.times.size(); ++i) {
                    // skip instants with a job within float slack of
                    // completion; coupled runs round those apart by an ulp
                    if (bundle.min_atom[i] <= 1e-9 || ref.min_atom[i] <= 1e-9) continue;
                    checks += 2;
                    if (!(bundle.Y[i] - slack <= bundle.W[i] &&
                          bundle.W[i] <= bundle.Y[i] + a * ht.c_r / r + slack))
                        ++violations;
                    if (!(ref.Z[i] - slack <= bundle.Z[i] && bundle.Z[i] <= ref.Z[i] + ht.c_r / r + slack))
                        ++violations;
                }
            }
        }
    }
    std::printf("comp sandwiches: r=%g seeds=%d checks=%ld violations=%ld\n", r, cfg.replications, checks,
                violations);
    return violations == 0 ? 0 : 1;
}

int cmd_intertwine(const CommonOpts& opts) {
    const ExperimentConfig cfg = load_config(opts);
    long violations = 0, checks = 0;
    for (int s = 0; s < cfg.replications; ++s) {
        CounterRng rng(derive_stream_seed(cfg.master_seed, 7177 + static_cast<std::uint64_t>(s)));
        auto [init1, init2] = random_intertwined_pair(rng);
        const double lambda = 1.0 / cfg.service.mean();
        const auto paired = intertwined_pair_sim(cfg.arrivals, cfg.service, lambda, init1, init2, 300.0,
                                                 derive_stream_seed(cfg.master_seed, 9999 + static_cast<std::uint64_t>(s)));
        for (std::size_t i = 0; i < paired.times.size(); ++i) {
            ++checks;
            if (!(paired.q1[i] <= paired.q2[i] && paired.q2[i] <= paired.q1[i] + 1)) ++violations;
        }
    }
    std::printf("intertwined pairs: seeds=%d event-time checks=%ld violations=%ld\n", cfg.replications, checks,
                violations);
    return violations == 0 ? 0 : 1;
}

int cmd_limit(const CommonOpts& opts) {
    const ExperimentConfig cfg = load_config(opts);
    const double lambda = 1.0 / cfg.service.mean();
    const double sigma = std::sqrt(diffusion_variance(cfg.service, cfg.arrivals.sigma_A(lambda)));
    const double p = cfg.service.kind() == ServiceDist::Kind::Empirical ? 2.0 : cfg.service.tail_index_p();
    const LimitSpec spec(cfg.kappa, lambda, sigma, p, limit_profile_for(cfg.initial));
    const RandomField field = sample_field(spec, cfg.horizon_T, cfg.limit_dt, default_level_grid(), cfg.master_seed);
    write_file(joined(cfg.out_dir, "field.csv"), field_csv(field));

    std::string qcsv = "t,Q_lower,Q_estimate,Q_upper,W_inf\n";
    for (std::size_t i = 0; i < field.times.size(); i += 10) {
        const auto q = limit_queue_length(field, field.times[i]);
        qcsv += fmt_g17(field.times[i]) + "," + fmt_g17(q.lower) + "," + fmt_g17(q.estimate) + "," +
                fmt_g17(q.upper) + "," + fmt_g17(field.W.back()[i]) + "\n";
    }
    write_file(joined(cfg.out_dir, "qlen.csv"), qcsv);

    std::string tails = "a,work_tail_ratio,mass_tail_ratio,w_prime\n";
    if (spec.xi.has_decaying_tail()) {
        for (double a : {2.0, 4.0, 8.0, 16.0, 32.0}) {
            const auto tr = tail_ratios(field, cfg.horizon_T, a);
            tails += fmt_g17(a) + "," + fmt_g17(tr.work_tail_ratio) + "," + fmt_g17(tr.mass_tail_ratio) + "," +
                     fmt_g17(tr.w_prime) + "\n";
        }
    }
    write_file(joined(cfg.out_dir, "tails.csv"), tails);
    std::printf("field: %zu levels x %zu times -> %s\n", field.levels.size() + 1, field.times.size(),
                joined(cfg.out_dir, "field.csv").c_str());
    return 0;
}

int cmd_collapse(const CommonOpts& opts) {
    const ExperimentConfig cfg = load_config(opts);
    const std::vector<double> p_list = {2.0, 4.0, 8.0, 16.0};
    const double lambda = 1.0 / cfg.service.mean();
    const double sigma_A = cfg.arrivals.sigma_A(lambda);
    std::vector<double> sigmas;
    for (double p : p_list)
        sigmas.push_back(std::sqrt(lambda * ((p + 1.0) / ((p - 1.0) * lambda * lambda)) + lambda * sigma_A * sigma_A));

    std::vector<std::vector<double>> gaps(p_list.size());
    for (int seed_i = 0; seed_i < cfg.replications; ++seed_i) {
        const auto g = collapse_gap(p_list, sigmas, cfg.kappa, lambda, LimitInitialProfile::zero(),
                                    cfg.horizon_T, cfg.limit_dt, default_level_grid(),
                                    derive_stream_seed(cfg.master_seed, static_cast<std::uint64_t>(seed_i)));
        for (std::size_t k = 0; k < g.size(); ++k) gaps[k].push_back(g[k]);
    }
    std::string csv = "p,sigma_p,median_gap\n";
    bool decreasing = true;
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < p_list.size(); ++k) {
        const double med = median_of(gaps[k]);
        csv += fmt_g17(p_list[k]) + "," + fmt_g17(sigmas[k]) + "," + fmt_g17(med) + "\n";
        std::printf("p=%g median sup|Q - W_inf| = %.6f\n", p_list[k], med);
        if (!(med < prev)) decreasing = false;
        prev = med;
    }
    write_file(joined(cfg.out_dir, "collapse.csv"), csv);
    return decreasing ? 0 : 1;
}

int cmd_converge(const CommonOpts& opts) {
    const ExperimentConfig cfg = load_config(opts);
    const ComparisonReport report = run_convergence_study(cfg);
    write_file(joined(cfg.out_dir, "report.csv"), report.csv());
    write_file(joined(cfg.out_dir, "summary.json"), report.summary().dump(2) + "\n");
    std::printf("convergence study: %zu rows, %s -> %s\n", report.rows.size(),
                report.all_pass ? "trends hold" : "trend violations", joined(cfg.out_dir, "report.csv").c_str());
    return report.all_pass ? 0 : 1;
}

int cmd_verify(const CommonOpts& opts, bool inject) {
    const ExperimentConfig cfg = load_config(opts);
    const VerifyLedger ledger = verify_suite({cfg.master_seed, inject});
    const std::string path = joined(cfg.out_dir, "verify_ledger.txt");
    write_file(path, ledger.text());
    std::printf("%s", ledger.text().c_str());
    std::printf("ledger -> %s\n", path.c_str());
    return ledger.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SRPT heavy-traffic simulation laboratory"};
    app.require_subcommand(1);

    CommonOpts opts;
    bool inject = false;

    auto* simulate = app.add_subcommand("simulate", "one SRPT trajectory to CSV");
    add_common(simulate, opts);
    auto* couple = app.add_subcommand("couple", "coupled truncation sandwich check");
    add_common(couple, opts);
    auto* intertwine = app.add_subcommand("intertwine", "intertwined queue-length comparison");
    add_common(intertwine, opts);
    auto* limit = app.add_subcommand("limit", "limit random field, queue length, tails");
    add_common(limit, opts);
    auto* collapse = app.add_subcommand("collapse", "state-space-collapse sweep in p");
    add_common(collapse, opts);
    auto* converge = app.add_subcommand("converge", "prelimit-to-limit convergence study");
    add_common(converge, opts);
    auto* verify = app.add_subcommand("verify", "pathwise invariant ledger");
    add_common(verify, opts);
    verify->add_flag("--inject-violation", inject, "negative control: corrupt W before checking");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(opts);
        if (couple->parsed()) return cmd_couple(opts);
        if (intertwine->parsed()) return cmd_intertwine(opts);
        if (limit->parsed()) return cmd_limit(opts);
        if (collapse->parsed()) return cmd_collapse(opts);
        if (converge->parsed()) return cmd_converge(opts);
        if (verify->parsed()) return cmd_verify(opts, inject);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
