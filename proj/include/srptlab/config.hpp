#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "srptlab/distributions.hpp"
#include "srptlab/srpt_queue.hpp"

namespace srptlab {

using json = nlohmann::json;

inline json to_json(const ServiceDist& d) {
    switch (d.kind()) {
        case ServiceDist::Kind::ParetoTypeI:
            return {{"kind", "pareto"}, {"m", d.scale_m()}, {"p", d.tail_index_p()}};
        case ServiceDist::Kind::Lomax:
            return {{"kind", "lomax"}, {"lambda", d.scale_m()}, {"p", d.tail_index_p()}};
        case ServiceDist::Kind::Empirical:
            return {{"kind", "empirical"}, {"sample", d.sample()}};
    }
    throw std::logic_error("to_json: unknown service dist");
}

inline ServiceDist service_dist_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "pareto") return ServiceDist::pareto(j.at("m").get<double>(), j.at("p").get<double>());
    if (kind == "lomax") return ServiceDist::lomax(j.at("lambda").get<double>(), j.at("p").get<double>());
    if (kind == "empirical") return ServiceDist::empirical(j.at("sample").get<std::vector<double>>());
    throw std::invalid_argument("service dist: unknown kind '" + kind + "'");
}

inline json to_json(const InterArrival& ia) {
    switch (ia.kind) {
        case InterArrival::Kind::Exponential:
            return {{"kind", "exponential"}};
        case InterArrival::Kind::Deterministic:
            return {{"kind", "deterministic"}};
        case InterArrival::Kind::ShiftedUniform:
            return {{"kind", "shifted_uniform"}, {"lo", ia.lo}, {"hi", ia.hi}};
    }
    throw std::logic_error("to_json: unknown inter-arrival");
}

inline InterArrival inter_arrival_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "exponential") return InterArrival::exponential();
    if (kind == "deterministic") return InterArrival::deterministic();
    if (kind == "shifted_uniform")
        return InterArrival::shifted_uniform(j.at("lo").get<double>(), j.at("hi").get<double>());
    throw std::invalid_argument("inter-arrival: unknown kind '" + kind + "'");
}

inline json to_json(const ArrivalSpec& a) {
    return {{"gap", to_json(a.gap)}, {"initial_delay", to_json(a.initial_delay)}};
}

inline ArrivalSpec arrival_spec_from_json(const json& j) {
    ArrivalSpec a;
    a.gap = inter_arrival_from_json(j.at("gap"));
    a.initial_delay = j.contains("initial_delay") ? inter_arrival_from_json(j.at("initial_delay")) : a.gap;
    return a;
}

inline json to_json(const InitialConditionSpec& ic) {
    json j;
    if (ic.kind == InitialConditionSpec::Kind::Empty) {
        j["kind"] = "empty";
        return j;
    }
    j["kind"] = "iid";
    j["count_mode"] = ic.count_mode == InitialConditionSpec::CountMode::Floor ? "floor" : "poisson";
    j["q_star"] = ic.q_star;
    if (ic.size_law)
        j["size_law"] = to_json(*ic.size_law);
    else
        j["constant_size"] = ic.constant_size;
    j["eta_star"] = ic.eta_star;
    j["alpha_star"] = ic.alpha_star;
    j["a_star"] = ic.a_star;
    return j;
}

inline InitialConditionSpec initial_condition_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "empty") return InitialConditionSpec::empty();
    if (kind != "iid") throw std::invalid_argument("initial condition: unknown kind '" + kind + "'");
    InitialConditionSpec ic;
    ic.kind = InitialConditionSpec::Kind::IID;
    ic.count_mode = j.value("count_mode", std::string("floor")) == "poisson"
                        ? InitialConditionSpec::CountMode::Poisson
                        : InitialConditionSpec::CountMode::Floor;
    ic.q_star = j.at("q_star").get<double>();
    if (j.contains("size_law"))
        ic.size_law = service_dist_from_json(j.at("size_law"));
    else
        ic.constant_size = j.value("constant_size", 1.0);
    ic.eta_star = j.value("eta_star", 0.5);
    ic.alpha_star = j.value("alpha_star", 1.0);
    ic.a_star = j.value("a_star", 1.0);
    return ic;
}

// Full experiment description; (config, master seed) determines every output
// byte.
struct ExperimentConfig {
    static constexpr int schema_version = 1;

    ServiceDist service = ServiceDist::pareto(1.0, 2.0);
    ArrivalSpec arrivals = ArrivalSpec::poisson();
    InitialConditionSpec initial = InitialConditionSpec::empty();
    double kappa = 0.0;
    std::vector<double> r_list = {25.0, 50.0, 100.0};
    double horizon_T = 1.0;  // scaled time
    int replications = 100;
    std::vector<double> snapshot_times = {1.0};  // scaled
    std::vector<double> levels = {0.25, 0.5, 1.0, 2.0};  // finite levels; infinity is implicit
    std::uint64_t master_seed = 0;
    int limit_draws = 10000;
    double limit_dt = 1e-3;
    std::string out_dir = ".";
    int jobs = 1;

    json to_json_obj() const {
        json j;
        j["schema_version"] = schema_version;
        j["service"] = srptlab::to_json(service);
        j["arrivals"] = srptlab::to_json(arrivals);
        j["initial"] = srptlab::to_json(initial);
        j["kappa"] = kappa;
        j["r_list"] = r_list;
        j["horizon_T"] = horizon_T;
        j["replications"] = replications;
        j["snapshot_times"] = snapshot_times;
        j["levels"] = levels;
        j["master_seed"] = master_seed;
        j["limit_draws"] = limit_draws;
        j["limit_dt"] = limit_dt;
        return j;
    }

    static ExperimentConfig from_json(const json& j) {
        ExperimentConfig c;
        if (j.contains("schema_version") && j.at("schema_version").get<int>() != schema_version)
            throw std::invalid_argument("config: unsupported schema_version");
        if (j.contains("service")) c.service = service_dist_from_json(j.at("service"));
        if (j.contains("arrivals")) c.arrivals = arrival_spec_from_json(j.at("arrivals"));
        if (j.contains("initial")) c.initial = initial_condition_from_json(j.at("initial"));
        c.kappa = j.value("kappa", 0.0);
        if (j.contains("r_list")) c.r_list = j.at("r_list").get<std::vector<double>>();
        c.horizon_T = j.value("horizon_T", 1.0);
        c.replications = j.value("replications", 100);
        if (j.contains("snapshot_times")) c.snapshot_times = j.at("snapshot_times").get<std::vector<double>>();
        if (j.contains("levels")) c.levels = j.at("levels").get<std::vector<double>>();
        c.master_seed = j.value("master_seed", static_cast<std::uint64_t>(0));
        c.limit_draws = j.value("limit_draws", 10000);
        c.limit_dt = j.value("limit_dt", 1e-3);
        validate(c);
        return c;
    }

    static ExperimentConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config: " + path);
        json j;
        in >> j;
        return from_json(j);
    }

    static void validate(const ExperimentConfig& c) {
        if (c.replications < 1) throw std::invalid_argument("config: replications must be >= 1");
        for (std::size_t i = 1; i < c.r_list.size(); ++i)
            if (!(c.r_list[i] > c.r_list[i - 1])) throw std::invalid_argument("config: r_list must ascend");
        for (double t : c.snapshot_times)
            if (t < 0.0 || t > c.horizon_T)
                throw std::invalid_argument("config: snapshot times must lie in [0, horizon_T]");
    }
};

}  // namespace srptlab
