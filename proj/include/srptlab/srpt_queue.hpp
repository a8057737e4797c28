#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "srptlab/distributions.hpp"
#include "srptlab/rng.hpp"

namespace srptlab {

struct Job {
    enum class Origin { Initial, External };
    long id = 0;
    double arrival_time = 0.0;
    double initial_size = 0.0;
    Origin origin = Origin::External;
};

// (gap, size) pairs realized as absolute arrival times; one stream is shared
// verbatim by every member of a coupled family of runs.
struct ArrivalStream {
    std::vector<double> times;
    std::vector<double> sizes;

    static ArrivalStream generate(const ArrivalSpec& arrivals, double lambda_r, const ServiceDist& service,
                                  double horizon, CounterRng& rng) {
        ArrivalStream s;
        double t = arrivals.initial_delay.draw(rng, lambda_r);
        while (t <= horizon) {
            s.times.push_back(t);
            s.sizes.push_back(draw_service(service, rng));
            t += arrivals.gap.draw(rng, lambda_r);
        }
        return s;
    }

    // keep only jobs with size <= threshold (raw units)
    ArrivalStream thinned(double threshold, std::vector<long>* kept_indices = nullptr) const {
        ArrivalStream out;
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (sizes[i] <= threshold) {
                out.times.push_back(times[i]);
                out.sizes.push_back(sizes[i]);
                if (kept_indices) kept_indices->push_back(static_cast<long>(i));
            }
        }
        return out;
    }
};

enum class EventKind { Arrival, Preemption, Completion, IdleStart };

inline const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::Arrival: return "arrival";
        case EventKind::Preemption: return "preemption";
        case EventKind::Completion: return "completion";
        case EventKind::IdleStart: return "idle_start";
    }
    return "?";
}

struct QueueEvent {
    double time = 0.0;
    EventKind kind = EventKind::Arrival;
    long job_id = -1;
    double size_delta = 0.0;
    long queue_len = 0;      // right after the event
    double workload = 0.0;   // right after the event
};

// ordered first by remaining size, ties by lower id
using JobAtom = std::pair<double, long>;  // (remaining, id)

struct QueueState {
    double time = 0.0;
    std::vector<JobAtom> remaining;  // sorted ascending

    long count() const { return static_cast<long>(remaining.size()); }
    double workload() const {
        double w = 0.0;
        for (const auto& [rem, id] : remaining) w += rem;
        return w;
    }
};

// Event-exact record of one SRPT run. The event list plus the initial jobs
// reconstruct the state at any time in [0, horizon].
struct Trajectory {
    std::uint64_t seed = 0;
    double horizon = 0.0;
    std::vector<Job> initial_jobs;
    std::vector<QueueEvent> events;

    long queue_len_at(double t) const {
        check_time(t);
        auto idx = last_event_before(t);
        return idx < 0 ? static_cast<long>(initial_jobs.size()) : events[static_cast<std::size_t>(idx)].queue_len;
    }

    // exact: piecewise slope -1 while busy, flat at zero while idle
    double workload_at(double t) const {
        check_time(t);
        auto idx = last_event_before(t);
        double w0, t0;
        if (idx < 0) {
            w0 = 0.0;
            for (const auto& j : initial_jobs) w0 += j.initial_size;
            t0 = 0.0;
        } else {
            w0 = events[static_cast<std::size_t>(idx)].workload;
            t0 = events[static_cast<std::size_t>(idx)].time;
        }
        return w0 > 0.0 ? w0 - (t - t0) : 0.0;
    }

    std::vector<double> event_times() const {
        std::vector<double> ts;
        ts.reserve(events.size());
        for (const auto& e : events) ts.push_back(e.time);
        return ts;
    }

  private:
    void check_time(double t) const {
        if (t < 0.0 || t > horizon) throw std::out_of_range("Trajectory: t outside [0, horizon]");
    }
    long last_event_before(double t) const {
        long lo = -1, hi = static_cast<long>(events.size());
        while (hi - lo > 1) {
            const long mid = (lo + hi) / 2;
            if (events[static_cast<std::size_t>(mid)].time <= t)
                lo = mid;
            else
                hi = mid;
        }
        return lo;
    }
};

namespace detail {

// Advance the served (minimum) job by dt. Remaining sizes change only here
// and only by subtraction, so replays reproduce the run bit for bit.
inline void drain_min(std::set<JobAtom>& jobs, double dt) {
    if (jobs.empty() || dt <= 0.0) return;
    JobAtom m = *jobs.begin();
    jobs.erase(jobs.begin());
    m.first -= dt;
    jobs.insert(m);
}

}  // namespace detail

// Exact SRPT run over a fixed arrival stream. Completions beat arrivals at
// equal times; size ties go to the lower job id. External job l of the
// stream gets id first_external_id + l.
inline Trajectory run_srpt(const std::vector<Job>& initial, const ArrivalStream& stream, double horizon,
                           long first_external_id = -1) {
    if (!(horizon > 0.0)) throw std::invalid_argument("run_srpt: horizon must be > 0");
    Trajectory traj;
    traj.horizon = horizon;
    traj.initial_jobs = initial;

    long next_id = 0;
    std::set<JobAtom> jobs;
    double workload = 0.0;
    for (const auto& j : initial) {
        if (!(j.initial_size > 0.0)) throw std::invalid_argument("run_srpt: initial sizes must be > 0");
        jobs.insert({j.initial_size, j.id});
        workload += j.initial_size;
        next_id = std::max(next_id, j.id + 1);
    }
    if (first_external_id < 0) first_external_id = next_id;

    double now = 0.0;
    std::size_t arr = 0;
    const std::size_t n_arr = stream.times.size();
    traj.events.reserve(3 * n_arr + jobs.size() + 4);

    auto log = [&](double t, EventKind k, long id, double delta) {
        traj.events.push_back({t, k, id, delta, static_cast<long>(jobs.size()), workload});
    };

    while (true) {
        const double next_arrival = arr < n_arr ? stream.times[arr] : std::numeric_limits<double>::infinity();
        if (jobs.empty()) {
            if (next_arrival > horizon) break;
            now = next_arrival;
            const double v = stream.sizes[arr];
            jobs.insert({v, first_external_id + static_cast<long>(arr)});
            workload += v;
            log(now, EventKind::Arrival, first_external_id + static_cast<long>(arr), v);
            ++arr;
            continue;
        }
        const JobAtom served = *jobs.begin();
        const double completion_at = now + served.first;
        if (completion_at <= next_arrival && completion_at <= horizon) {
            now = completion_at;
            jobs.erase(jobs.begin());
            workload -= served.first;
            log(now, EventKind::Completion, served.second, 0.0);
            if (jobs.empty()) {
                workload = 0.0;  // clear accumulated rounding at idle starts
                log(now, EventKind::IdleStart, -1, 0.0);
            }
            continue;
        }
        if (next_arrival > horizon) break;
        const double dt = next_arrival - now;
        detail::drain_min(jobs, dt);
        workload -= dt;
        now = next_arrival;
        const double v = stream.sizes[arr];
        const long id = first_external_id + static_cast<long>(arr);
        const JobAtom inservice = *jobs.begin();
        jobs.insert({v, id});
        workload += v;
        log(now, EventKind::Arrival, id, v);
        if (JobAtom{v, id} < inservice) log(now, EventKind::Preemption, inservice.second, 0.0);
        ++arr;
    }
    return traj;
}

// One SRPT trajectory from a seeded (gap, size) stream.
inline Trajectory simulate_srpt(const ArrivalSpec& arrivals, const ServiceDist& service, double lambda_r,
                                const std::vector<Job>& initial, double horizon, std::uint64_t seed) {
    CounterRng rng(seed);
    const ArrivalStream stream = ArrivalStream::generate(arrivals, lambda_r, service, horizon, rng);
    Trajectory traj = run_srpt(initial, stream, horizon);
    traj.seed = seed;
    return traj;
}

// Replay-based state reconstruction at time t+ (right-continuous).
inline QueueState state_at(const Trajectory& traj, double t) {
    if (t < 0.0 || t > traj.horizon) throw std::out_of_range("state_at: t outside [0, horizon]");
    std::set<JobAtom> jobs;
    for (const auto& j : traj.initial_jobs) jobs.insert({j.initial_size, j.id});
    double now = 0.0;
    for (const auto& e : traj.events) {
        if (e.time > t) break;
        switch (e.kind) {
            case EventKind::Completion:
                jobs.erase(jobs.begin());
                break;
            case EventKind::Arrival:
                detail::drain_min(jobs, e.time - now);
                jobs.insert({e.size_delta, e.job_id});
                break;
            case EventKind::Preemption:
            case EventKind::IdleStart:
                break;
        }
        now = e.time;
    }
    detail::drain_min(jobs, t - now);
    QueueState st;
    st.time = t;
    st.remaining.assign(jobs.begin(), jobs.end());
    return st;
}

// Walk the trajectory once, reporting the exact job multiset at each query
// time (sorted ascending). The callback sees (time, sorted atoms).
template <class F>
void scan_states(const Trajectory& traj, std::span<const double> query_times, F&& f) {
    std::set<JobAtom> jobs;
    for (const auto& j : traj.initial_jobs) jobs.insert({j.initial_size, j.id});
    double now = 0.0;
    std::size_t e = 0;
    std::vector<JobAtom> snapshot;
    for (double t : query_times) {
        if (t < 0.0 || t > traj.horizon) throw std::out_of_range("scan_states: query outside [0, horizon]");
        for (; e < traj.events.size() && traj.events[e].time <= t; ++e) {
            const auto& ev = traj.events[e];
            switch (ev.kind) {
                case EventKind::Completion:
                    jobs.erase(jobs.begin());
                    break;
                case EventKind::Arrival:
                    detail::drain_min(jobs, ev.time - now);
                    jobs.insert({ev.size_delta, ev.job_id});
                    break;
                case EventKind::Preemption:
                case EventKind::IdleStart:
                    break;
            }
            now = ev.time;
        }
        snapshot.assign(jobs.begin(), jobs.end());
        if (!snapshot.empty()) {
            // virtual drain of the served job up to t, without committing it
            snapshot.front().first -= (t - now);
            if (snapshot.front().first <= 0.0) snapshot.erase(snapshot.begin());
        }
        f(t, std::span<const JobAtom>(snapshot));
    }
}

// Initial-condition generators: Empty, or i.i.d. scaled sizes with the job
// count tracking q* r / c^r.
struct InitialConditionSpec {
    enum class Kind { Empty, IID };
    enum class CountMode { Floor, Poisson };

    Kind kind = Kind::Empty;
    CountMode count_mode = CountMode::Floor;
    double q_star = 0.0;
    // law of the scaled size v*; Constant means every job has scaled size c
    std::optional<ServiceDist> size_law;
    double constant_size = 1.0;

    // asymptotic-condition metadata, recorded with experiment output
    double eta_star = 0.5;
    double alpha_star = 1.0;
    double a_star = 1.0;

    static InitialConditionSpec empty() { return {}; }
    static InitialConditionSpec iid_constant(double q_star, double scaled_size,
                                             CountMode mode = CountMode::Floor) {
        InitialConditionSpec s;
        s.kind = Kind::IID;
        s.count_mode = mode;
        s.q_star = q_star;
        s.constant_size = scaled_size;
        return s;
    }
    static InitialConditionSpec iid(double q_star, ServiceDist law, CountMode mode = CountMode::Floor) {
        InitialConditionSpec s;
        s.kind = Kind::IID;
        s.count_mode = mode;
        s.q_star = q_star;
        s.size_law = std::move(law);
        return s;
    }
};

inline std::vector<Job> generate_initial(const InitialConditionSpec& spec, double r, double c_r,
                                         std::uint64_t seed) {
    std::vector<Job> out;
    if (spec.kind == InitialConditionSpec::Kind::Empty) return out;
    CounterRng rng(seed);
    const double target = spec.q_star * r / c_r;
    long count = 0;
    if (spec.count_mode == InitialConditionSpec::CountMode::Floor)
        count = static_cast<long>(std::floor(target));
    else
        count = rng.next_poisson(target);
    out.reserve(static_cast<std::size_t>(count));
    for (long l = 0; l < count; ++l) {
        const double scaled = spec.size_law ? draw_service(*spec.size_law, rng) : spec.constant_size;
        out.push_back({l, 0.0, c_r * scaled, Job::Origin::Initial});
    }
    return out;
}

// Coupled truncated family: every run consumes the same realized stream; the
// run for threshold y admits only jobs of size <= y. Infinite threshold
// reproduces the full run event for event.
inline std::vector<Trajectory> coupled_truncated_runs(const std::vector<Job>& initial,
                                                      const ArrivalStream& stream,
                                                      std::span<const double> thresholds, double horizon) {
    std::vector<Trajectory> out;
    out.reserve(thresholds.size());
    long first_external = 0;
    for (const auto& j : initial) first_external = std::max(first_external, j.id + 1);
    for (double y : thresholds) {
        std::vector<Job> init_y;
        for (const auto& j : initial)
            if (j.initial_size <= y) init_y.push_back(j);
        std::vector<long> kept;
        const ArrivalStream thin = stream.thinned(y, &kept);
        // run with contiguous ids, then restore stream indices so the
        // admitted-job sets of nested thresholds stay nested by id
        Trajectory t = run_srpt(init_y, thin, horizon, first_external);
        for (auto& e : t.events) {
            if (e.job_id >= first_external)
                e.job_id = first_external + kept[static_cast<std::size_t>(e.job_id - first_external)];
        }
        out.push_back(std::move(t));
    }
    return out;
}

inline std::vector<Trajectory> coupled_truncated_runs(const ArrivalSpec& arrivals, const ServiceDist& service,
                                                      double lambda_r, const std::vector<Job>& initial,
                                                      std::span<const double> thresholds, double horizon,
                                                      std::uint64_t seed) {
    CounterRng rng(seed);
    const ArrivalStream stream = ArrivalStream::generate(arrivals, lambda_r, service, horizon, rng);
    auto runs = coupled_truncated_runs(initial, stream, thresholds, horizon);
    for (auto& t : runs) t.seed = seed;
    return runs;
}

// "s2 intertwined in s1": with cumulative ordered sums V^i_j, the first k
// sums agree and the next l sums of s2 strictly interleave those of s1
// (V^1_{k+l} = infinity when s1 has k+l-1 jobs). Returns (k, l) or nullopt.
inline std::optional<std::pair<long, long>> is_intertwined(const QueueState& s1, const QueueState& s2) {
    const std::size_t n1 = s1.remaining.size(), n2 = s2.remaining.size();
    if (n2 == 0 || (n1 + 1 != n2 && n1 != n2)) return std::nullopt;
    std::vector<double> v1(n1 + 1, 0.0), v2(n2 + 1, 0.0);
    for (std::size_t j = 0; j < n1; ++j) v1[j + 1] = v1[j] + s1.remaining[j].first;
    for (std::size_t j = 0; j < n2; ++j) v2[j + 1] = v2[j] + s2.remaining[j].first;
    std::size_t k = 0;
    while (k < n1 && k < n2 && v1[k + 1] == v2[k + 1]) ++k;
    const long l = static_cast<long>(n2 - k);
    if (l < 1) return std::nullopt;
    for (std::size_t lp = 1; lp <= static_cast<std::size_t>(l); ++lp) {
        const double lower = v1[k + lp - 1];
        const double mid = v2[k + lp];
        const double upper = (k + lp <= n1) ? v1[k + lp] : std::numeric_limits<double>::infinity();
        if (!(lower < mid && mid < upper)) return std::nullopt;
    }
    return std::make_pair(static_cast<long>(k), l);
}

struct PairedQueueLengths {
    std::vector<double> times;  // union of both event-time sets
    std::vector<long> q1, q2;
    Trajectory run1, run2;
};

// Two systems fed the identical stream, started from intertwined states with
// Q2(0) = Q1(0) + 1.
inline PairedQueueLengths intertwined_pair_sim(const ArrivalSpec& arrivals, const ServiceDist& service,
                                               double lambda_r, const std::vector<Job>& init1,
                                               const std::vector<Job>& init2, double horizon,
                                               std::uint64_t seed) {
    QueueState st1, st2;
    for (const auto& j : init1) st1.remaining.push_back({j.initial_size, j.id});
    for (const auto& j : init2) st2.remaining.push_back({j.initial_size, j.id});
    std::sort(st1.remaining.begin(), st1.remaining.end());
    std::sort(st2.remaining.begin(), st2.remaining.end());
    if (!is_intertwined(st1, st2) || st2.count() != st1.count() + 1)
        throw std::invalid_argument("intertwined_pair_sim: initial states not intertwined with Q2 = Q1 + 1");

    CounterRng rng(seed);
    long first_ext = 0;
    for (const auto& j : init1) first_ext = std::max(first_ext, j.id + 1);
    for (const auto& j : init2) first_ext = std::max(first_ext, j.id + 1);
    const ArrivalStream stream = ArrivalStream::generate(arrivals, lambda_r, service, horizon, rng);

    PairedQueueLengths out;
    out.run1 = run_srpt(init1, stream, horizon, first_ext);
    out.run2 = run_srpt(init2, stream, horizon, first_ext);
    std::vector<double> ts = out.run1.event_times();
    const std::vector<double> t2 = out.run2.event_times();
    ts.insert(ts.end(), t2.begin(), t2.end());
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    out.times = std::move(ts);
    out.q1.reserve(out.times.size());
    out.q2.reserve(out.times.size());
    for (double t : out.times) {
        out.q1.push_back(out.run1.queue_len_at(t));
        out.q2.push_back(out.run2.queue_len_at(t));
    }
    return out;
}

}  // namespace srptlab
