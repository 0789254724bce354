#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ucadmm/matrix.hpp"
#include "ucadmm/model.hpp"

namespace ucadmm {

/// File- or schema-level problem, with the offending field in the message.
class IoError : public std::runtime_error {
 public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Instance failed validate_instance after parsing.
class ValidationError : public std::runtime_error {
 public:
    explicit ValidationError(const std::string& msg, std::vector<Violation> report)
        : std::runtime_error(msg), report_(std::move(report)) {}
    const std::vector<Violation>& report() const { return report_; }

 private:
    std::vector<Violation> report_;
};

/// One convergence-trace row of the outer loop.
struct TraceRecord {
    int k = 0;
    double rho = 0.0;
    double rd_l1 = 0.0;
    double rd_linf = 0.0;
    double aug_obj = 0.0;
    double true_obj = 0.0;
    double ms = 0.0;
};

namespace io_detail {

using nlohmann::json;

inline const json& require_field(const json& obj, const char* field, const char* where) {
    if (!obj.contains(field))
        throw IoError(std::string("missing field '") + field + "' in " + where);
    return obj.at(field);
}

inline double number(const json& obj, const char* field, const char* where) {
    const json& v = require_field(obj, field, where);
    if (!v.is_number())
        throw IoError(std::string("field '") + field + "' in " + where + " must be a number");
    return v.get<double>();
}

inline double number_or(const json& obj, const char* field, double fallback) {
    if (!obj.contains(field)) return fallback;
    return obj.at(field).get<double>();
}

inline int integer(const json& obj, const char* field, const char* where) {
    const json& v = require_field(obj, field, where);
    if (!v.is_number_integer())
        throw IoError(std::string("field '") + field + "' in " + where + " must be an integer");
    return v.get<int>();
}

inline std::string text(const json& obj, const char* field, const char* where) {
    const json& v = require_field(obj, field, where);
    if (!v.is_string())
        throw IoError(std::string("field '") + field + "' in " + where + " must be a string");
    return v.get<std::string>();
}

inline std::vector<double> number_array(const json& obj, const char* field, const char* where) {
    const json& v = require_field(obj, field, where);
    if (!v.is_array())
        throw IoError(std::string("field '") + field + "' in " + where + " must be an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& x : v) out.push_back(x.get<double>());
    return out;
}

/// Locale-independent shortest round-trip formatting.
inline std::string format_double(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline json matrix_to_json(const Matrix<double>& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json matrix_to_json(const Matrix<std::uint8_t>& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(static_cast<int>(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

template <typename T>
Matrix<T> matrix_from_json(const json& rows, const char* field) {
    if (!rows.is_array()) throw IoError(std::string("field '") + field + "' must be an array");
    const std::size_t R = rows.size();
    const std::size_t C = R == 0 ? 0 : rows.at(0).size();
    Matrix<T> m(R, C);
    for (std::size_t r = 0; r < R; ++r) {
        const auto& row = rows.at(r);
        if (row.size() != C)
            throw IoError(std::string("ragged rows in field '") + field + "'");
        for (std::size_t c = 0; c < C; ++c) m(r, c) = row.at(c).get<T>();
    }
    return m;
}

}  // namespace io_detail

/// Parses the canonical instance JSON and validates it.
inline UcInstance load_instance(std::istream& in) {
    using io_detail::json;
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError(std::string("instance parse error: ") + e.what());
    }

    UcInstance inst;
    inst.horizon = io_detail::integer(doc, "horizon", "instance");
    for (const auto& jn : io_detail::require_field(doc, "nodes", "instance")) {
        NodeSpec n;
        n.id = io_detail::text(jn, "id", "node");
        n.demand = io_detail::number_array(jn, "demand", "node '" + n.id + "'");
        inst.nodes.push_back(std::move(n));
    }
    if (doc.contains("generators")) {
        for (const auto& jg : doc.at("generators")) {
            GeneratorSpec g;
            g.id = io_detail::text(jg, "id", "generator");
            const std::string where = "generator '" + g.id + "'";
            const char* w = where.c_str();
            g.node = io_detail::text(jg, "node", w);
            g.p_min = io_detail::number(jg, "p_min", w);
            g.p_max = io_detail::number(jg, "p_max", w);
            g.a = io_detail::number(jg, "a", w);
            g.b = io_detail::number(jg, "b", w);
            g.c = io_detail::number(jg, "c", w);
            g.start_cost = io_detail::number(jg, "start_cost", w);
            g.ramp_up = io_detail::number(jg, "ramp_up", w);
            g.ramp_down = io_detail::number(jg, "ramp_down", w);
            g.startup_limit = io_detail::number(jg, "startup_limit", w);
            g.shutdown_limit = io_detail::number(jg, "shutdown_limit", w);
            g.min_uptime = io_detail::integer(jg, "min_uptime", w);
            g.min_downtime = io_detail::integer(jg, "min_downtime", w);
            if (jg.contains("initial_status"))
                g.initial_status = jg.at("initial_status").get<int>();
            else
                g.initial_status = -std::max(g.min_uptime, g.min_downtime);  // cold start
            g.p0 = io_detail::number_or(jg, "p0", 0.0);
            inst.generators.push_back(std::move(g));
        }
    }
    if (doc.contains("renewables")) {
        for (const auto& jr : doc.at("renewables")) {
            RenewableSpec r;
            r.id = io_detail::text(jr, "id", "renewable");
            const std::string where = "renewable '" + r.id + "'";
            r.node = io_detail::text(jr, "node", where.c_str());
            r.p_max = io_detail::number(jr, "p_max", where.c_str());
            r.availability = io_detail::number_array(jr, "availability", where.c_str());
            inst.renewables.push_back(std::move(r));
        }
    }
    if (doc.contains("storage")) {
        for (const auto& js : doc.at("storage")) {
            StorageSpec s;
            s.id = io_detail::text(js, "id", "storage");
            const std::string where = "storage '" + s.id + "'";
            const char* w = where.c_str();
            s.node = io_detail::text(js, "node", w);
            s.charge_limit = io_detail::number(js, "charge_limit", w);
            s.discharge_limit = io_detail::number(js, "discharge_limit", w);
            s.energy_min = io_detail::number(js, "energy_min", w);
            s.energy_max = io_detail::number(js, "energy_max", w);
            s.charge_eff = io_detail::number(js, "charge_eff", w);
            s.discharge_eff = io_detail::number(js, "discharge_eff", w);
            s.initial_energy = io_detail::number_or(js, "initial_energy", s.energy_min);
            inst.storage.push_back(std::move(s));
        }
    }
    if (doc.contains("lines")) {
        for (const auto& jl : doc.at("lines")) {
            LineSpec l;
            l.id = io_detail::text(jl, "id", "line");
            const std::string where = "line '" + l.id + "'";
            l.from = io_detail::text(jl, "from", where.c_str());
            l.to = io_detail::text(jl, "to", where.c_str());
            l.f_min = io_detail::number(jl, "f_min", where.c_str());
            l.f_max = io_detail::number(jl, "f_max", where.c_str());
            inst.lines.push_back(std::move(l));
        }
    }

    const auto report = validate_instance(inst);
    if (!report.empty())
        throw ValidationError("instance failed validation:\n" + violation_summary(report),
                              report);
    return inst;
}

inline UcInstance load_instance_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open instance file '" + path + "'");
    return load_instance(in);
}

inline nlohmann::json instance_to_json(const UcInstance& inst) {
    using io_detail::json;
    json doc;
    doc["horizon"] = inst.horizon;
    doc["nodes"] = json::array();
    for (const auto& n : inst.nodes) doc["nodes"].push_back({{"id", n.id}, {"demand", n.demand}});
    doc["generators"] = json::array();
    for (const auto& g : inst.generators)
        doc["generators"].push_back({{"id", g.id},
                                     {"node", g.node},
                                     {"p_min", g.p_min},
                                     {"p_max", g.p_max},
                                     {"a", g.a},
                                     {"b", g.b},
                                     {"c", g.c},
                                     {"start_cost", g.start_cost},
                                     {"ramp_up", g.ramp_up},
                                     {"ramp_down", g.ramp_down},
                                     {"startup_limit", g.startup_limit},
                                     {"shutdown_limit", g.shutdown_limit},
                                     {"min_uptime", g.min_uptime},
                                     {"min_downtime", g.min_downtime},
                                     {"initial_status", g.initial_status},
                                     {"p0", g.p0}});
    doc["renewables"] = json::array();
    for (const auto& r : inst.renewables)
        doc["renewables"].push_back({{"id", r.id},
                                     {"node", r.node},
                                     {"p_max", r.p_max},
                                     {"availability", r.availability}});
    doc["storage"] = json::array();
    for (const auto& s : inst.storage)
        doc["storage"].push_back({{"id", s.id},
                                  {"node", s.node},
                                  {"charge_limit", s.charge_limit},
                                  {"discharge_limit", s.discharge_limit},
                                  {"energy_min", s.energy_min},
                                  {"energy_max", s.energy_max},
                                  {"charge_eff", s.charge_eff},
                                  {"discharge_eff", s.discharge_eff},
                                  {"initial_energy", s.initial_energy}});
    doc["lines"] = json::array();
    for (const auto& l : inst.lines)
        doc["lines"].push_back({{"id", l.id},
                                {"from", l.from},
                                {"to", l.to},
                                {"f_min", l.f_min},
                                {"f_max", l.f_max}});
    return doc;
}

inline void save_instance(const UcInstance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write instance file '" + path + "'");
    out << instance_to_json(inst).dump(2) << "\n";
}

inline nlohmann::json schedule_to_json(const Schedule& s) {
    using io_detail::json;
    json doc;
    doc["horizon"] = s.u.cols();
    doc["u"] = io_detail::matrix_to_json(s.u);
    doc["v"] = io_detail::matrix_to_json(s.v);
    doc["w"] = io_detail::matrix_to_json(s.w);
    doc["p"] = io_detail::matrix_to_json(s.p);
    doc["p_res"] = io_detail::matrix_to_json(s.p_res);
    doc["pc"] = io_detail::matrix_to_json(s.pc);
    doc["pd"] = io_detail::matrix_to_json(s.pd);
    doc["pe"] = io_detail::matrix_to_json(s.pe);
    doc["p_st"] = io_detail::matrix_to_json(s.p_st);
    doc["inj"] = io_detail::matrix_to_json(s.inj);
    doc["f"] = io_detail::matrix_to_json(s.f);
    return doc;
}

inline Schedule load_schedule(std::istream& in) {
    using io_detail::json;
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError(std::string("schedule parse error: ") + e.what());
    }
    Schedule s;
    s.u = io_detail::matrix_from_json<std::uint8_t>(
        io_detail::require_field(doc, "u", "schedule"), "u");
    s.v = io_detail::matrix_from_json<std::uint8_t>(
        io_detail::require_field(doc, "v", "schedule"), "v");
    s.w = io_detail::matrix_from_json<std::uint8_t>(
        io_detail::require_field(doc, "w", "schedule"), "w");
    s.p = io_detail::matrix_from_json<double>(io_detail::require_field(doc, "p", "schedule"),
                                              "p");
    s.p_res = io_detail::matrix_from_json<double>(
        io_detail::require_field(doc, "p_res", "schedule"), "p_res");
    s.pc = io_detail::matrix_from_json<double>(io_detail::require_field(doc, "pc", "schedule"),
                                               "pc");
    s.pd = io_detail::matrix_from_json<double>(io_detail::require_field(doc, "pd", "schedule"),
                                               "pd");
    s.pe = io_detail::matrix_from_json<double>(io_detail::require_field(doc, "pe", "schedule"),
                                               "pe");
    s.p_st = io_detail::matrix_from_json<double>(
        io_detail::require_field(doc, "p_st", "schedule"), "p_st");
    s.inj = io_detail::matrix_from_json<double>(io_detail::require_field(doc, "inj", "schedule"),
                                                "inj");
    s.f = io_detail::matrix_from_json<double>(io_detail::require_field(doc, "f", "schedule"),
                                              "f");
    return s;
}

inline Schedule load_schedule_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open schedule file '" + path + "'");
    return load_schedule(in);
}

inline void write_trace_csv(const std::vector<TraceRecord>& trace, std::ostream& out) {
    out << "k,rho,rd_l1,rd_linf,aug_obj,true_obj,ms\n";
    for (const auto& r : trace) {
        out << r.k << ',' << io_detail::format_double(r.rho) << ','
            << io_detail::format_double(r.rd_l1) << ',' << io_detail::format_double(r.rd_linf)
            << ',' << io_detail::format_double(r.aug_obj) << ','
            << io_detail::format_double(r.true_obj) << ',' << io_detail::format_double(r.ms)
            << '\n';
    }
}

struct SyntheticParams {
    int n_gens = 3;
    int n_nodes = 1;
    int n_lines = 0;
    int n_res = 0;
    int n_storage = 0;
    int horizon = 24;
    std::string profile = "sine";  // flat | sine | two-peak
};

/// Deterministic synthetic instance; parameters are sampled from documented
/// ranges and demand is scaled so installed thermal capacity is at least 1.3x
/// the peak.
inline UcInstance generate_synthetic(const SyntheticParams& params, std::uint64_t seed) {
    if (params.horizon < 1) throw IoError("generate_synthetic: horizon must be >= 1");
    if (params.n_gens < 0 || params.n_nodes < 1 || params.n_lines < 0 || params.n_res < 0 ||
        params.n_storage < 0)
        throw IoError("generate_synthetic: counts must be nonnegative");
    if (params.n_gens == 0) throw IoError("generate_synthetic: no capacity (n_gens must be > 0)");
    if (params.n_lines > 0 && params.n_nodes < 2)
        throw IoError("generate_synthetic: lines need at least 2 nodes");
    if (params.profile != "flat" && params.profile != "sine" && params.profile != "two-peak")
        throw IoError("generate_synthetic: unknown demand profile '" + params.profile + "'");

    Rng rng(seed);
    UcInstance inst;
    inst.horizon = params.horizon;
    const int T = params.horizon;

    for (int n = 0; n < params.n_nodes; ++n)
        inst.nodes.push_back(NodeSpec{"n" + std::to_string(n), std::vector<double>(T, 0.0)});

    double capacity = 0.0;
    for (int i = 0; i < params.n_gens; ++i) {
        GeneratorSpec g;
        g.id = "g" + std::to_string(i);
        g.node = "n" + std::to_string(rng.uniform_int(0, params.n_nodes - 1));
        g.p_max = rng.uniform(50.0, 500.0);
        g.p_min = rng.uniform(0.1, 0.4) * g.p_max;
        g.a = rng.uniform(0.0, 30.0);
        g.b = rng.uniform(10.0, 50.0);
        g.c = rng.uniform(0.0, 0.05);
        g.start_cost = rng.uniform(50.0, 600.0);
        const double range = g.p_max - g.p_min;
        g.ramp_up = rng.uniform(0.3, 1.0) * range;
        g.ramp_down = rng.uniform(0.3, 1.0) * range;
        g.startup_limit = g.p_min + rng.uniform(0.0, 1.0) * g.ramp_up;
        g.shutdown_limit = g.p_min + rng.uniform(0.0, 1.0) * g.ramp_down;
        const int cap = std::max(1, std::min(8, T / 2));
        g.min_uptime = rng.uniform_int(1, cap);
        g.min_downtime = rng.uniform_int(1, cap);
        g.initial_status = -std::max(g.min_uptime, g.min_downtime);
        g.p0 = 0.0;
        capacity += g.p_max;
        inst.generators.push_back(std::move(g));
    }

    for (int i = 0; i < params.n_res; ++i) {
        RenewableSpec r;
        r.id = "r" + std::to_string(i);
        r.node = "n" + std::to_string(rng.uniform_int(0, params.n_nodes - 1));
        r.p_max = rng.uniform(20.0, 200.0);
        const double base = rng.uniform(0.2, 0.7);
        const double amp = rng.uniform(0.1, 0.3);
        const double phase = rng.uniform(0.0, 6.28318530717958647692);
        r.availability.resize(static_cast<std::size_t>(T));
        for (int t = 0; t < T; ++t) {
            const double af =
                base + amp * std::sin(2.0 * 3.14159265358979323846 * t / 24.0 + phase) +
                rng.uniform(-0.05, 0.05);
            r.availability[static_cast<std::size_t>(t)] = std::clamp(af, 0.0, 1.0);
        }
        inst.renewables.push_back(std::move(r));
    }

    for (int i = 0; i < params.n_storage; ++i) {
        StorageSpec s;
        s.id = "s" + std::to_string(i);
        s.node = "n" + std::to_string(rng.uniform_int(0, params.n_nodes - 1));
        s.charge_limit = rng.uniform(10.0, 80.0);
        s.discharge_limit = rng.uniform(10.0, 80.0);
        s.energy_max = rng.uniform(2.0, 6.0) * std::max(s.charge_limit, s.discharge_limit);
        s.energy_min = rng.uniform(0.0, 0.15) * s.energy_max;
        s.initial_energy = s.energy_min;
        s.charge_eff = rng.uniform(0.85, 0.98);
        s.discharge_eff = rng.uniform(0.85, 0.98);
        inst.storage.push_back(std::move(s));
    }

    for (int i = 0; i < params.n_lines; ++i) {
        LineSpec l;
        l.id = "l" + std::to_string(i);
        int from, to;
        if (i < params.n_nodes - 1) {  // chain first so the network can connect
            from = i;
            to = i + 1;
        } else {
            from = rng.uniform_int(0, params.n_nodes - 1);
            to = rng.uniform_int(0, params.n_nodes - 1);
            if (to == from) to = (from + 1) % params.n_nodes;
        }
        l.from = "n" + std::to_string(from);
        l.to = "n" + std::to_string(to);
        const double cap = rng.uniform(50.0, 300.0);
        l.f_min = -cap;
        l.f_max = cap;
        inst.lines.push_back(std::move(l));
    }

    // demand: shaped profile scaled to keep capacity at 1.3x the peak
    const double peak_total = capacity / (1.3 * rng.uniform(1.0, 1.5));
    std::vector<double> shape(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
        const double x = static_cast<double>(t) / 24.0;
        double s = 1.0;
        if (params.profile == "sine")
            s = 0.7 + 0.3 * std::sin(2.0 * 3.14159265358979323846 * x - 1.3);
        else if (params.profile == "two-peak")
            s = 0.6 + 0.25 * std::sin(4.0 * 3.14159265358979323846 * x - 1.0) +
                0.15 * std::sin(2.0 * 3.14159265358979323846 * x);
        shape[static_cast<std::size_t>(t)] = std::max(0.25, s);
    }
    std::vector<double> weight(static_cast<std::size_t>(params.n_nodes));
    double wsum = 0.0;
    for (auto& w : weight) {
        w = rng.uniform(0.5, 1.5);
        wsum += w;
    }
    for (int n = 0; n < params.n_nodes; ++n)
        for (int t = 0; t < T; ++t)
            inst.nodes[static_cast<std::size_t>(n)].demand[static_cast<std::size_t>(t)] =
                peak_total * shape[static_cast<std::size_t>(t)] *
                weight[static_cast<std::size_t>(n)] / wsum;

    const auto report = validate_instance(inst);
    if (!report.empty())
        throw ValidationError("synthetic instance failed validation:\n" +
                                  violation_summary(report),
                              report);
    return inst;
}

/// Truncates every time series to the first `horizon` steps.
inline UcInstance truncate_horizon(UcInstance inst, int horizon) {
    if (horizon < 1 || horizon > inst.horizon)
        throw IoError("horizon must lie in [1, " + std::to_string(inst.horizon) + "]");
    inst.horizon = horizon;
    for (auto& n : inst.nodes) n.demand.resize(static_cast<std::size_t>(horizon));
    for (auto& r : inst.renewables) r.availability.resize(static_cast<std::size_t>(horizon));
    return inst;
}

}  // namespace ucadmm
