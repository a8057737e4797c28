#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "srptlab/distributions.hpp"
#include "srptlab/limit_field.hpp"
#include "srptlab/scaled_measures.hpp"
#include "srptlab/skorohod.hpp"
#include "srptlab/srpt_queue.hpp"

namespace srptlab {

struct VerifyOptions {
    std::uint64_t seed = 0;
    // negative control: shifts every checked W value by +c^r so the
    // comparison family must report failures
    bool inject_comp_violation = false;
};

struct LedgerRow {
    std::string family;
    std::string case_id;
    bool pass = true;
    std::string detail;
};

struct VerifyLedger {
    std::vector<LedgerRow> rows;

    void add(const std::string& family, const std::string& case_id, bool pass, const std::string& detail = "") {
        rows.push_back({family, case_id, pass, detail});
    }

    bool all_pass() const {
        for (const auto& r : rows)
            if (!r.pass) return false;
        return true;
    }

    std::string text() const {
        std::ostringstream os;
        for (const auto& r : rows) {
            os << "family=" << r.family << " case=" << r.case_id << " result=" << (r.pass ? "pass" : "fail");
            if (!r.detail.empty()) os << " detail=" << r.detail;
            os << '\n';
        }
        os << "all=" << (all_pass() ? "pass" : "fail") << '\n';
        return os.str();
    }
};

namespace detail {

inline SampledPath random_walk_path(CounterRng& rng, int knots, double dt, double scale, double start) {
    std::vector<double> ts(static_cast<std::size_t>(knots) + 1), vs(static_cast<std::size_t>(knots) + 1);
    ts[0] = 0.0;
    vs[0] = start;
    for (int i = 1; i <= knots; ++i) {
        ts[static_cast<std::size_t>(i)] = dt * i;
        vs[static_cast<std::size_t>(i)] = vs[static_cast<std::size_t>(i) - 1] + scale * rng.next_normal();
    }
    return SampledPath(std::move(ts), std::move(vs), SampledPath::Interp::Linear);
}

}  // namespace detail

// Integration-by-parts identity on randomized snapshots and polynomials.
inline void verify_parts_identity(VerifyLedger& ledger, CounterRng& rng, int cases) {
    int failures = 0;
    double worst = 0.0;
    for (int c = 0; c < cases; ++c) {
        MeasureSnapshot snap;
        snap.r = 10.0;
        snap.c_r = 2.0;
        const int atoms = 1 + static_cast<int>(rng.next_below(200));
        for (int i = 0; i < atoms; ++i) snap.atoms.push_back({0.01 + 5.0 * rng.next_open(), 0.2});
        std::sort(snap.atoms.begin(), snap.atoms.end());
        double coef[5];
        for (double& ci : coef) ci = 2.0 * rng.next_open() - 1.0;
        C1Fn fn;
        fn.f = [coef](double x) {
            return coef[0] + x * (coef[1] + x * (coef[2] + x * (coef[3] + x * coef[4])));
        };
        const double delta = 0.005 + 2.0 * rng.next_open();
        const double M = delta + 0.5 + 3.0 * rng.next_open();
        const auto [lhs, rhs] = integration_by_parts(snap, fn, delta, M);
        const double err = std::fabs(lhs - rhs);
        worst = std::max(worst, err / (1.0 + std::fabs(lhs)));
        if (err > 1e-9 * (1.0 + std::fabs(lhs))) ++failures;
    }
    std::ostringstream det;
    det << "cases=" << cases << " worst_rel=" << worst;
    ledger.add("parts_identity", "random_snapshots", failures == 0, det.str());
}

// Proposition-comp sandwiches on coupled truncated runs.
inline void verify_comp_sandwich(VerifyLedger& ledger, CounterRng& rng, int seeds, double r,
                                 bool inject_violation) {
    const ServiceDist service = ServiceDist::pareto(1.0, 2.0);
    const HeavyTrafficParams ht(service, r, 0.0);
    const std::vector<double> levels = {0.25, 0.5, 1.0, 2.0};
    const double slack = 1e-9;
    const double offset = inject_violation ? ht.c_r : 0.0;
    int violations = 0;
    long checks = 0;
    for (int s = 0; s < seeds; ++s) {
        const std::uint64_t seed = derive_stream_seed(rng.seed(), 883 + static_cast<std::uint64_t>(s));
        const double horizon = r * r;
        CounterRng stream_rng(seed);
        const ArrivalStream stream =
            ArrivalStream::generate(ArrivalSpec::poisson(), ht.lambda_r, service, horizon, stream_rng);
        std::vector<double> thresholds;
        for (double a : levels) thresholds.push_back(a * ht.c_r);
        thresholds.push_back(std::numeric_limits<double>::infinity());
        const auto runs = coupled_truncated_runs({}, stream, thresholds, horizon);
        const Trajectory& full = runs.back();

        std::vector<double> grid;
        for (const auto& e : full.events) grid.push_back(e.time / (r * r));
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
        for (std::size_t li = 0; li < levels.size(); ++li) {
            const double a = levels[li];
            const auto bundle_full = netput_and_reflection(full, r, ht.c_r, a, grid);
            const auto bundle_trunc = netput_and_reflection(runs[li], r, ht.c_r, a, grid);
            if (bundle_full.times.size() != bundle_trunc.times.size())
                throw std::logic_error("verify_comp_sandwich: bundle grid misaligned");
            for (std::size_t i = 0; i < bundle_full.times.size(); ++i) {
                // skip instants where a job sits within float slack of
                // completion: coupled runs round those differently
                if (bundle_full.min_atom[i] <= 1e-9 || bundle_trunc.min_atom[i] <= 1e-9) continue;
                const double Y = bundle_full.Y[i];
                const double W = bundle_full.W[i] + offset;
                const double Z = bundle_full.Z[i] + offset;
                const double Q = bundle_trunc.Z[i];
                checks += 2;
                if (!(Y - slack <= W && W <= Y + a * ht.c_r / r + slack)) ++violations;
                if (!(Q - slack <= Z && Z <= Q + ht.c_r / r + slack)) ++violations;
            }
        }
    }
    std::ostringstream det;
    det << "checks=" << checks << " violations=" << violations;
    ledger.add("comp_sandwich", inject_violation ? "coupled_runs_injected" : "coupled_runs", violations == 0,
               det.str());
}

// Intertwined pair with Q2(0) = Q1(0) + 1: system 2 holds the same jobs as
// system 1 plus one extra, which interleaves the ordered cumulative sums at
// the insertion point and everywhere after it.
inline std::pair<std::vector<Job>, std::vector<Job>> random_intertwined_pair(CounterRng& rng, int max_jobs = 5) {
    const int n1 = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_jobs) + 1));
    std::vector<Job> init1, init2;
    for (int j = 0; j < n1; ++j) {
        const double v = 0.3 + 4.0 * rng.next_open();
        init1.push_back({j, 0.0, v, Job::Origin::Initial});
        init2.push_back({100 + j, 0.0, v, Job::Origin::Initial});
    }
    init2.push_back({100 + n1, 0.0, 0.3 + 4.0 * rng.next_open(), Job::Origin::Initial});
    return {std::move(init1), std::move(init2)};
}

// Queue-length comparison for intertwined pairs.
inline void verify_intqlc(VerifyLedger& ledger, CounterRng& rng, int seeds) {
    const ServiceDist service = ServiceDist::pareto(1.0, 2.0);
    int violations = 0;
    for (int s = 0; s < seeds; ++s) {
        CounterRng local(derive_stream_seed(rng.seed(), 7177 + static_cast<std::uint64_t>(s)));
        auto [init1, init2] = random_intertwined_pair(local);
        const auto paired = intertwined_pair_sim(ArrivalSpec::poisson(), service, 2.0 / 3.0, init1, init2,
                                                 60.0, derive_stream_seed(rng.seed(), 9999 + static_cast<std::uint64_t>(s)));
        for (std::size_t i = 0; i < paired.times.size(); ++i)
            if (!(paired.q1[i] <= paired.q2[i] && paired.q2[i] <= paired.q1[i] + 1)) ++violations;
    }
    ledger.add("intqlc", "paired_runs", violations == 0, "seeds=" + std::to_string(seeds));
}

// Queue-length comparison across truncation levels.
inline void verify_qlxy(VerifyLedger& ledger, CounterRng& rng, int seeds, double r) {
    const ServiceDist service = ServiceDist::pareto(1.0, 2.0);
    const HeavyTrafficParams ht(service, r, 0.0);
    const std::vector<double> levels = {0.25, 0.5, 1.0, 2.0};
    const double slack = 1e-9;
    int violations = 0;
    for (int s = 0; s < seeds; ++s) {
        const double horizon = r * r;
        CounterRng stream_rng(derive_stream_seed(rng.seed(), 5511 + static_cast<std::uint64_t>(s)));
        const ArrivalStream stream =
            ArrivalStream::generate(ArrivalSpec::poisson(), ht.lambda_r, service, horizon, stream_rng);
        std::vector<double> thresholds;
        for (double a : levels) thresholds.push_back(a * ht.c_r);
        thresholds.push_back(std::numeric_limits<double>::infinity());
        const auto runs = coupled_truncated_runs({}, stream, thresholds, horizon);
        std::vector<double> grid;
        for (const auto& e : runs.back().events) grid.push_back(e.time / (r * r));
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
        std::vector<ScaledPathBundle> bundles;
        for (std::size_t li = 0; li < runs.size(); ++li) {
            const double a = li < levels.size() ? levels[li] : std::numeric_limits<double>::infinity();
            bundles.push_back(netput_and_reflection(runs[li], r, ht.c_r, a, grid));
            if (bundles.back().times.size() != grid.size())
                throw std::logic_error("verify_qlxy: bundle grid misaligned");
        }
        for (std::size_t xi = 0; xi < levels.size(); ++xi) {
            for (std::size_t yi = xi + 1; yi < bundles.size(); ++yi) {
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    if (bundles[xi].min_atom[i] <= 1e-9 || bundles[yi].min_atom[i] <= 1e-9) continue;
                    const double qx = bundles[xi].Z[i], qy = bundles[yi].Z[i];
                    const double bound = ht.c_r / r + bundles[yi].Y[i] / levels[xi];
                    if (!(qy - qx >= -slack && qy - qx <= bound + slack)) ++violations;
                }
            }
        }
    }
    ledger.add("qlxy", "coupled_truncations", violations == 0, "seeds=" + std::to_string(seeds));
}

// Skorohod map properties on random piecewise-linear paths.
inline void verify_skorohod(VerifyLedger& ledger, CounterRng& rng) {
    int comp_fail = 0, lip_fail = 0, osc_fail = 0, mono_fail = 0;
    for (int c = 0; c < 1000; ++c) {
        auto f1 = detail::random_walk_path(rng, 80, 0.05, 0.4, rng.next_open());
        auto f2 = detail::random_walk_path(rng, 80, 0.05, 0.4, rng.next_open());
        const auto g1 = reflect(f1), g2 = reflect(f2);
        // nonnegativity + complementarity: pushing increases only at zeros
        double push_prev = g1.values[0] - f1.values[0];
        for (std::size_t i = 0; i < g1.values.size(); ++i) {
            if (g1.values[i] < 0.0) ++comp_fail;
            const double push = g1.values[i] - f1.values[i];
            if (push > push_prev + 1e-12 && g1.values[i] > 1e-12) ++comp_fail;
            push_prev = push;
        }
        double dsup = 0.0, fsup = 0.0, osc_sup = 0.0;
        for (std::size_t i = 0; i < g1.values.size(); ++i) {
            dsup = std::max(dsup, std::fabs(g1.values[i] - g2.values[i]));
            fsup = std::max(fsup, std::fabs(f1.values[i] - f2.values[i]));
            osc_sup = std::max(osc_sup, std::fabs(f1.values[i] - f1.values[0]));
            if (std::fabs(g1.values[i] - g1.values[0]) > 2.0 * osc_sup + 1e-12) ++osc_fail;
        }
        if (dsup > 2.0 * fsup + 1e-12) ++lip_fail;
        // monotonicity with f2m = f1 + nondecreasing g
        SampledPath f2m = f1;
        double add = 0.0;
        for (std::size_t i = 0; i < f2m.values.size(); ++i) {
            f2m.values[i] += add;
            add += 0.05 * rng.next_open();
        }
        const auto g2m = reflect(f2m);
        for (std::size_t i = 0; i < g2m.values.size(); ++i)
            if (g1.values[i] > g2m.values[i] + 1e-12) ++mono_fail;
    }
    ledger.add("skorohod", "complementarity", comp_fail == 0);
    ledger.add("skorohod", "lipschitz_factor_2", lip_fail == 0);
    ledger.add("skorohod", "oscillation_bound", osc_fail == 0);
    ledger.add("skorohod", "monotonicity", mono_fail == 0);
}

// Karamata exactness and the scale-parameter closed forms.
inline void verify_karamata(VerifyLedger& ledger) {
    const ServiceDist pareto = ServiceDist::pareto(1.0, 2.0);
    bool ratio_ok = true, cr_ok = true, lomax_ok = true;
    for (double r : {10.0, 100.0, 1000.0, 10000.0}) {
        const double cr = scale_parameter(pareto, r);
        const double cp = 1.5;
        if (std::fabs(cr - std::pow(cp * r, 0.5)) > 1e-12 * cr) cr_ok = false;
        for (double a : {0.5, 1.0, 2.0, 4.0}) {
            if (a * cr < 1.0) continue;
            const double ratio = truncated_first_moment(pareto, a * cr) / truncated_first_moment(pareto, cr);
            if (std::fabs(ratio - std::pow(a, -2.0)) > 1e-12) ratio_ok = false;
        }
    }
    const ServiceDist lomax = ServiceDist::lomax(1.0, 3.0);
    for (double r : {5.0, 50.0, 500.0}) {
        const double cr = scale_parameter(lomax, r);
        if (std::fabs(scaling_function(lomax, cr) - r) > 1e-9 * r) lomax_ok = false;
    }
    ledger.add("karamata", "pareto_ratio_1e-12", ratio_ok);
    ledger.add("karamata", "pareto_cr_closed_form", cr_ok);
    ledger.add("karamata", "lomax_cr_roundtrip_1e-9", lomax_ok);
}

inline VerifyLedger verify_suite(const VerifyOptions& opt) {
    VerifyLedger ledger;
    CounterRng rng(opt.seed);
    verify_parts_identity(ledger, rng, 1000);
    verify_comp_sandwich(ledger, rng, 5, 25.0, opt.inject_comp_violation);
    verify_intqlc(ledger, rng, 20);
    verify_qlxy(ledger, rng, 5, 25.0);
    verify_skorohod(ledger, rng);
    verify_karamata(ledger);
    return ledger;
}

}  // namespace srptlab
