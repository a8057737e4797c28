#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "srptlab/limit_field.hpp"
#include "srptlab/scaled_measures.hpp"
#include "srptlab/srpt_queue.hpp"

namespace srptlab {

// All floats serialized with 17 significant digits so files round-trip
// bit-exactly and identical runs produce identical bytes.
inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << contents;
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream os;
    os << "time,kind,job_id,size_delta,queue_len,workload\n";
    for (const auto& j : traj.initial_jobs)
        os << "0,initial," << j.id << ',' << fmt_g17(j.initial_size) << ",,\n";
    for (const auto& e : traj.events)
        os << fmt_g17(e.time) << ',' << event_kind_name(e.kind) << ',' << e.job_id << ','
           << fmt_g17(e.size_delta) << ',' << e.queue_len << ',' << fmt_g17(e.workload) << '\n';
    return os.str();
}

inline Trajectory trajectory_from_csv(const std::string& csv, double horizon) {
    Trajectory traj;
    traj.horizon = horizon;
    std::istringstream is(csv);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("trajectory_from_csv: empty input");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string time_s, kind_s, id_s, delta_s, qlen_s, w_s;
        std::getline(ls, time_s, ',');
        std::getline(ls, kind_s, ',');
        std::getline(ls, id_s, ',');
        std::getline(ls, delta_s, ',');
        std::getline(ls, qlen_s, ',');
        std::getline(ls, w_s, ',');
        if (kind_s == "initial") {
            traj.initial_jobs.push_back({std::stol(id_s), 0.0, std::stod(delta_s), Job::Origin::Initial});
            continue;
        }
        QueueEvent e;
        e.time = std::stod(time_s);
        if (kind_s == "arrival")
            e.kind = EventKind::Arrival;
        else if (kind_s == "preemption")
            e.kind = EventKind::Preemption;
        else if (kind_s == "completion")
            e.kind = EventKind::Completion;
        else if (kind_s == "idle_start")
            e.kind = EventKind::IdleStart;
        else
            throw std::runtime_error("trajectory_from_csv: unknown kind " + kind_s);
        e.job_id = std::stol(id_s);
        e.size_delta = std::stod(delta_s);
        e.queue_len = std::stol(qlen_s);
        e.workload = std::stod(w_s);
        traj.events.push_back(e);
    }
    return traj;
}

inline std::string snapshot_csv(const MeasureSnapshot& snap) {
    std::ostringstream os;
    os << "location,mass\n";
    for (const auto& [loc, mass] : snap.atoms) os << fmt_g17(loc) << ',' << fmt_g17(mass) << '\n';
    return os.str();
}

inline std::string bundle_csv(const ScaledPathBundle& b) {
    std::ostringstream os;
    os << "t,X,Y,W,Z\n";
    for (std::size_t i = 0; i < b.times.size(); ++i)
        os << fmt_g17(b.times[i]) << ',' << fmt_g17(b.X[i]) << ',' << fmt_g17(b.Y[i]) << ','
           << fmt_g17(b.W[i]) << ',' << fmt_g17(b.Z[i]) << '\n';
    return os.str();
}

// t rows by level columns; last column is the infinity level
inline std::string field_csv(const RandomField& field) {
    std::ostringstream os;
    os << "t";
    for (double a : field.levels) os << ",W_" << fmt_g17(a);
    os << ",W_inf\n";
    for (std::size_t i = 0; i < field.times.size(); ++i) {
        os << fmt_g17(field.times[i]);
        for (const auto& row : field.W) os << ',' << fmt_g17(row[i]);
        os << '\n';
    }
    return os.str();
}

}  // namespace srptlab
