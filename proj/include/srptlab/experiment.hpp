#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "srptlab/config.hpp"
#include "srptlab/csv.hpp"
#include "srptlab/limit_field.hpp"
#include "srptlab/scaled_measures.hpp"
#include "srptlab/srpt_queue.hpp"
#include "srptlab/stats.hpp"

namespace srptlab {

// Run fn(i) for i in [0, n) on up to `jobs` workers. Work is indexed, every
// worker writes only its own slots, so results are identical for any worker
// count.
template <class Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(jobs));
    std::atomic<int> next{0};
    for (int w = 0; w < jobs; ++w)
        workers.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : workers) th.join();
}

struct ReportRow {
    double r = 0.0;      // scale parameter; 0 marks a limit-only row
    double t = 0.0;      // scaled snapshot time
    double level = 0.0;  // truncation level a; infinity for the full workload
    int n = 0;
    double mean_W = 0.0, sd_W = 0.0;
    double mean_Z = 0.0, sd_Z = 0.0;
    double ks = 0.0;  // distance between W marginal and the limit reference
    bool pass = true;
};

struct ComparisonReport {
    std::vector<ReportRow> rows;
    bool all_pass = true;

    std::string csv() const {
        std::ostringstream os;
        os << "r,t,level,n,mean_W,sd_W,mean_Z,sd_Z,ks,pass\n";
        for (const auto& row : rows)
            os << fmt_g17(row.r) << ',' << fmt_g17(row.t) << ',' << fmt_g17(row.level) << ',' << row.n << ','
               << fmt_g17(row.mean_W) << ',' << fmt_g17(row.sd_W) << ',' << fmt_g17(row.mean_Z) << ','
               << fmt_g17(row.sd_Z) << ',' << fmt_g17(row.ks) << ',' << (row.pass ? 1 : 0) << '\n';
        return os.str();
    }

    json summary() const {
        json j;
        j["schema_version"] = 1;
        j["all_pass"] = all_pass;
        j["rows"] = json::array();
        for (const auto& row : rows)
            j["rows"].push_back({{"r", row.r},
                                 {"t", row.t},
                                 {"level", row.level},
                                 {"n", row.n},
                                 {"mean_W", row.mean_W},
                                 {"sd_W", row.sd_W},
                                 {"mean_Z", row.mean_Z},
                                 {"sd_Z", row.sd_Z},
                                 {"ks", row.ks},
                                 {"pass", row.pass}});
        return j;
    }
};

inline LimitInitialProfile limit_profile_for(const InitialConditionSpec& ic) {
    if (ic.kind == InitialConditionSpec::Kind::Empty) return LimitInitialProfile::zero();
    if (ic.size_law) return LimitInitialProfile::scaled(ic.q_star, *ic.size_law);
    // constant scaled size c: xi(a) = q* c 1{a >= c}, realized as a steep ramp
    const double c = ic.constant_size;
    return LimitInitialProfile::piecewise_linear({c * (1.0 - 1e-9), c}, {0.0, ic.q_star * c});
}

// n draws of the limit marginal W_a(t) (a = infinity when level_index == K)
// from single-level field samples sharing nothing across draws.
inline std::vector<double> limit_marginal_draws(const LimitSpec& spec, double a_level, double t, double dt,
                                                int n, std::uint64_t seed, int jobs = 1) {
    std::vector<double> draws(static_cast<std::size_t>(n));
    const bool is_inf = std::isinf(a_level);
    std::vector<double> levels = is_inf ? std::vector<double>{1.0} : std::vector<double>{a_level};
    parallel_for(n, jobs, [&](int i) {
        LimitSpec s = spec;
        RandomField f = sample_field(s, t, dt, levels, derive_stream_seed(seed, static_cast<std::uint64_t>(i)));
        const auto& w = is_inf ? f.W.back() : f.W.front();
        draws[static_cast<std::size_t>(i)] = w.back();
    });
    return draws;
}

// Marginals of one prelimit system at the snapshot times: per (t, level)
// pair one (W, Z) observation.
struct PrelimitMarginals {
    std::vector<std::vector<std::pair<double, double>>> by_time;  // [t_idx][level_idx] -> (W, Z)
};

inline PrelimitMarginals prelimit_marginals(const ExperimentConfig& cfg, const HeavyTrafficParams& ht,
                                            std::uint64_t rep_seed) {
    const double r = ht.r, c_r = ht.c_r;
    const double horizon = r * r * cfg.horizon_T;
    CounterRng rng(rep_seed);
    const std::vector<Job> initial =
        generate_initial(cfg.initial, r, c_r, derive_stream_seed(rep_seed, 0xA11CE));
    const ArrivalStream stream = ArrivalStream::generate(cfg.arrivals, ht.lambda_r, cfg.service, horizon, rng);
    const Trajectory traj = run_srpt(initial, stream, horizon);

    PrelimitMarginals out;
    out.by_time.resize(cfg.snapshot_times.size());
    std::vector<double> query(cfg.snapshot_times.size());
    for (std::size_t i = 0; i < query.size(); ++i) query[i] = std::min(cfg.snapshot_times[i] * r * r, horizon);
    const double mass = c_r / r;
    std::size_t ti = 0;
    scan_states(traj, query, [&](double, std::span<const JobAtom> atoms) {
        auto& per_level = out.by_time[ti];
        per_level.assign(cfg.levels.size() + 1, {0.0, 0.0});
        for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
            const double cap = cfg.levels[li] * c_r;
            double w = 0.0, z = 0.0;
            for (const auto& [rem, id] : atoms) {
                if (rem > cap) break;
                w += (rem / c_r) * mass;
                z += mass;
            }
            per_level[li] = {w, z};
        }
        double w = 0.0, z = 0.0;
        for (const auto& [rem, id] : atoms) {
            w += (rem / c_r) * mass;
            z += mass;
        }
        per_level[cfg.levels.size()] = {w, z};
        ++ti;
    });
    return out;
}

// Monte Carlo convergence study: N prelimit replications per r, marginals at
// the snapshot times and levels, KS against the limit reference, trend flags
// across r (nonincreasing KS with one inversion <= 0.02 allowed, final KS
// <= 0.15). Fully reproducible from (config, master seed).
inline ComparisonReport run_convergence_study(const ExperimentConfig& cfg, bool force_draw_reference = false) {
    ExperimentConfig::validate(cfg);
    const double lambda = 1.0 / cfg.service.mean();
    const double sigma_A = cfg.arrivals.sigma_A(lambda);
    const double sigma = std::sqrt(diffusion_variance(cfg.service, sigma_A));
    const LimitInitialProfile xi = limit_profile_for(cfg.initial);
    const bool closed_form = !force_draw_reference && xi.kind == LimitInitialProfile::Kind::Zero;
    const double p = cfg.service.kind() == ServiceDist::Kind::Empirical ? 2.0 : cfg.service.tail_index_p();

    ComparisonReport report;
    // (t, level) -> per-r KS history for the trend flags
    std::vector<std::vector<double>> ks_history(cfg.snapshot_times.size() * (cfg.levels.size() + 1));

    for (std::size_t ri = 0; ri < cfg.r_list.size(); ++ri) {
        const HeavyTrafficParams ht(cfg.service, cfg.r_list[ri], cfg.kappa);
        std::vector<PrelimitMarginals> reps(static_cast<std::size_t>(cfg.replications));
        parallel_for(cfg.replications, cfg.jobs, [&](int i) {
            const std::uint64_t rep_seed =
                derive_stream_seed(cfg.master_seed, (static_cast<std::uint64_t>(ri) << 32) | static_cast<std::uint64_t>(i));
            reps[static_cast<std::size_t>(i)] = prelimit_marginals(cfg, ht, rep_seed);
        });

        for (std::size_t ti = 0; ti < cfg.snapshot_times.size(); ++ti) {
            const double t = cfg.snapshot_times[ti];
            for (std::size_t li = 0; li <= cfg.levels.size(); ++li) {
                const bool is_inf = li == cfg.levels.size();
                const double a = is_inf ? std::numeric_limits<double>::infinity() : cfg.levels[li];
                std::vector<double> w_samples, z_samples;
                w_samples.reserve(reps.size());
                z_samples.reserve(reps.size());
                for (const auto& rep : reps) {
                    w_samples.push_back(rep.by_time[ti][li].first);
                    z_samples.push_back(rep.by_time[ti][li].second);
                }
                ReportRow row;
                row.r = ht.r;
                row.t = t;
                row.level = a;
                row.n = static_cast<int>(w_samples.size());
                row.mean_W = mean_of(w_samples);
                row.sd_W = stddev_of(w_samples);
                row.mean_Z = mean_of(z_samples);
                row.sd_Z = stddev_of(z_samples);

                if (a == 0.0 || t == 0.0) {
                    row.ks = 0.0;
                } else if (closed_form) {
                    const double mu = is_inf ? cfg.kappa : cfg.kappa - lambda / std::pow(a, p);
                    row.ks = ks_statistic(
                        w_samples, [&](double w) { return reflected_bm_marginal_cdf(std::max(w, 0.0), t, mu, sigma); });
                } else {
                    LimitSpec lspec(cfg.kappa, lambda, sigma, p, xi);
                    const auto ref =
                        limit_marginal_draws(lspec, a, t, cfg.limit_dt, cfg.limit_draws,
                                             derive_stream_seed(cfg.master_seed, 0xF1E1D + li + 131 * ti), cfg.jobs);
                    row.ks = ks_statistic(w_samples, ref);
                }

                ks_history[ti * (cfg.levels.size() + 1) + li].push_back(row.ks);
                report.rows.push_back(row);
            }
        }
    }

    // trend flag per (t, level) series: KS nonincreasing in r, with at most
    // one inversion of magnitude <= 0.02, and final KS <= 0.15
    const std::size_t series_count = cfg.snapshot_times.size() * (cfg.levels.size() + 1);
    std::vector<bool> series_pass(series_count, true);
    for (std::size_t s = 0; s < series_count; ++s) {
        const auto& hist = ks_history[s];
        int inversions = 0;
        bool ok = true;
        for (std::size_t i = 1; i < hist.size(); ++i) {
            if (hist[i] > hist[i - 1]) {
                ++inversions;
                if (hist[i] - hist[i - 1] > 0.02) ok = false;
            }
        }
        if (inversions > 1) ok = false;
        if (!hist.empty() && hist.back() > 0.15) ok = false;
        series_pass[s] = ok;
    }
    for (auto& row : report.rows) {
        std::size_t ti = 0, li = 0;
        for (; ti < cfg.snapshot_times.size(); ++ti)
            if (cfg.snapshot_times[ti] == row.t) break;
        for (; li < cfg.levels.size(); ++li)
            if (cfg.levels[li] == row.level) break;
        row.pass = series_pass[ti * (cfg.levels.size() + 1) + li];
        report.all_pass = report.all_pass && row.pass;
    }
    return report;
}

}  // namespace srptlab
