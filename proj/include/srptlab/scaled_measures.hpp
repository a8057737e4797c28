#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "srptlab/srpt_queue.hpp"

namespace srptlab {

// Scaled measure-valued state at one instant: one atom of mass c_r/r at
// location (remaining size)/c_r for every job in system, zeros dropped.
struct MeasureSnapshot {
    double time = 0.0;  // scaled time (unscaled / r^2)
    std::vector<std::pair<double, double>> atoms;  // (location, mass), sorted by location
    double r = 0.0;
    double c_r = 0.0;

    double total_mass() const {
        double m = 0.0;
        for (const auto& [loc, mass] : atoms) m += mass;
        return m;
    }
};

inline MeasureSnapshot scaled_state(const QueueState& raw, double r, double c_r) {
    if (!(c_r > 0.0)) throw std::invalid_argument("scaled_state: c_r must be > 0");
    MeasureSnapshot snap;
    snap.time = raw.time / (r * r);
    snap.r = r;
    snap.c_r = c_r;
    const double mass = c_r / r;
    snap.atoms.reserve(raw.remaining.size());
    for (const auto& [rem, id] : raw.remaining) {
        if (rem > 0.0) snap.atoms.push_back({rem / c_r, mass});
    }
    std::sort(snap.atoms.begin(), snap.atoms.end());
    return snap;
}

// (W_a, Z_a): truncated work and mass of atoms at locations <= a.
inline std::pair<double, double> workload_and_mass(const MeasureSnapshot& snap, double a) {
    double w = 0.0, z = 0.0;
    for (const auto& [loc, mass] : snap.atoms) {
        if (loc > a) break;
        w += loc * mass;
        z += mass;
    }
    return {w, z};
}

// Netput and its reflection for one truncation level, together with the
// snapshot functionals of the trajectory, all on a common scaled time grid.
struct ScaledPathBundle {
    double level = 0.0;  // a, in scaled units; infinity for the full netput
    std::vector<double> times;  // scaled
    std::vector<double> X;  // netput
    std::vector<double> Y;  // Gamma[X]
    std::vector<double> W;  // <chi 1_{[0,a]}, scaled measure of traj>
    std::vector<double> Z;  // <1_{[0,a]}, scaled measure of traj>
    // smallest remaining size in system (raw units; infinity when empty).
    // Coupled runs round completion instants differently, so one run can
    // hold a job within an ulp of finishing while its partner already
    // dropped it; comparisons skip instants where this is below their
    // float slack.
    std::vector<double> min_atom;
};

// X_a^r(t) = (1/r) sum of admitted initial sizes + (1/r) V_a^r(r^2 t) - r t,
// evaluated at the requested grid plus every admitted arrival time so the
// running infimum behind Y = Gamma[X] is exact. W and Z are read from the
// trajectory's own scaled state at the same instants.
inline ScaledPathBundle netput_and_reflection(const Trajectory& traj, double r, double c_r, double a,
                                              std::span<const double> grid) {
    const double y_raw = a * c_r;  // admits sizes <= a c^r (infinity stays infinity)
    const double r2 = r * r;

    double x0 = 0.0;
    for (const auto& j : traj.initial_jobs)
        if (j.initial_size <= y_raw) x0 += j.initial_size / r;

    // merge the grid with admitted-arrival jump times; carry the exact
    // unscaled instant alongside so snapshots align with events bit-exactly
    std::vector<std::pair<double, double>> pts;  // (scaled, unscaled)
    for (double g : grid) {
        if (g < 0.0 || g * r2 > traj.horizon * (1.0 + 1e-12))
            throw std::out_of_range("netput_and_reflection: grid outside horizon/r^2");
        pts.push_back({g, std::min(g * r2, traj.horizon)});
    }
    for (const auto& e : traj.events)
        if (e.kind == EventKind::Arrival && e.size_delta <= y_raw) pts.push_back({e.time / r2, e.time});
    // on scaled-time collisions keep the later unscaled instant, so the
    // snapshot at that point includes the colliding arrival
    std::sort(pts.begin(), pts.end(),
              [](const auto& u, const auto& v) { return u.first != v.first ? u.first < v.first : u.second > v.second; });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const auto& u, const auto& v) { return u.first == v.first; }),
              pts.end());

    ScaledPathBundle out;
    out.level = a;
    out.times.reserve(pts.size());
    out.X.reserve(pts.size());
    out.Y.reserve(pts.size());

    std::vector<std::pair<double, double>> jumps;  // (scaled time, scaled jump v/r)
    for (const auto& e : traj.events)
        if (e.kind == EventKind::Arrival && e.size_delta <= y_raw)
            jumps.push_back({e.time / r2, e.size_delta / r});

    std::size_t j = 0;
    double v_acc = 0.0;   // (1/r) V_a^r(r^2 t)
    double runmin = x0;   // infimum over the jump-resolved path
    for (const auto& [t, tu] : pts) {
        // left limit at t: all jumps strictly before t, drained to t
        while (j < jumps.size() && jumps[j].first < t) {
            v_acc += jumps[j].second;
            ++j;
        }
        const double x_left = x0 + v_acc - r * t;
        runmin = std::min(runmin, x_left);
        while (j < jumps.size() && jumps[j].first == t) {
            v_acc += jumps[j].second;
            ++j;
        }
        const double x = x0 + v_acc - r * t;
        runmin = std::min(runmin, x);  // no-op unless a jump landed at t
        out.times.push_back(t);
        out.X.push_back(x);
        out.Y.push_back(x - std::min(0.0, runmin));
    }

    // trajectory snapshot functionals at the same instants
    std::vector<double> unscaled(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) unscaled[i] = pts[i].second;
    out.W.resize(pts.size());
    out.Z.resize(pts.size());
    out.min_atom.resize(pts.size());
    const double mass = c_r / r;
    std::size_t idx = 0;
    scan_states(traj, unscaled, [&](double, std::span<const JobAtom> atoms) {
        double w = 0.0, z = 0.0;
        for (const auto& [rem, id] : atoms) {
            if (rem > y_raw) break;
            w += (rem / c_r) * mass;
            z += mass;
        }
        out.W[idx] = w;
        out.Z[idx] = z;
        out.min_atom[idx] = atoms.empty() ? std::numeric_limits<double>::infinity() : atoms.front().first;
        ++idx;
    });
    return out;
}

// C^1 integrand handle for measure functionals.
struct C1Fn {
    std::function<double(double)> f;
    std::function<double(double)> df;   // optional unless a consumer needs it
    double limit_at_infinity = 0.0;     // lim f(x)/x, used by limit-field functionals
};

// Both sides of the integration-by-parts identity on (delta, M]:
//   lhs = integral of f against the snapshot,
//   rhs = -int g' W_x dx + g(M) W_M - g(delta+) W_delta,  g = f/x.
// W_x is a step function of the level, so the integral is the exact finite
// sum of W * (g jump) over inter-atom intervals.
inline std::pair<double, double> integration_by_parts(const MeasureSnapshot& snap, const C1Fn& fn,
                                                      double delta, double M) {
    if (!(delta > 0.0) || !(M > delta)) throw std::invalid_argument("integration_by_parts: need 0 < delta < M");
    const auto g = [&](double x) { return fn.f(x) / x; };

    double lhs = 0.0;
    for (const auto& [loc, mass] : snap.atoms)
        if (loc > delta && loc <= M) lhs += fn.f(loc) * mass;

    // breakpoints of W_x inside (delta, M]
    std::vector<double> cuts;
    cuts.push_back(delta);
    for (const auto& [loc, mass] : snap.atoms)
        if (loc > delta && loc < M) cuts.push_back(loc);
    cuts.push_back(M);
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double w_delta = 0.0, w_at = 0.0;
    std::size_t i = 0;
    for (; i < snap.atoms.size() && snap.atoms[i].first <= delta; ++i)
        w_delta += snap.atoms[i].first * snap.atoms[i].second;
    w_at = w_delta;

    // int_delta^M g'(x) W_x dx = sum over segments of W * (g(right) - g(left))
    double integral = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        // W is constant on (cuts[s], cuts[s+1]]... value includes atoms <= cuts[s+1]
        // except the one exactly at the right endpoint; advance first to
        // include atoms at the left endpoint (W right-continuous in x).
        for (; i < snap.atoms.size() && snap.atoms[i].first <= cuts[s]; ++i)
            w_at += snap.atoms[i].first * snap.atoms[i].second;
        integral += w_at * (g(cuts[s + 1]) - g(cuts[s]));
    }
    for (; i < snap.atoms.size() && snap.atoms[i].first <= M; ++i)
        w_at += snap.atoms[i].first * snap.atoms[i].second;  // now w_at = W_M

    const double rhs = -integral + g(M) * w_at - g(delta) * w_delta;
    return {lhs, rhs};
}

}  // namespace srptlab
