#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "vvo/network.hpp"

namespace vvo {

namespace detail {

using nlohmann::json;

inline PhaseMat read_masked_matrix(const json& arr, PhaseMask mask, const char* what) {
    const int n = mask.count();
    if (!arr.is_array() || int(arr.size()) != n * n)
        throw Error(std::string(what) + ": expected " + std::to_string(n * n) +
                    " [re,im] entries over present phases");
    std::array<Phase, 3> idx{};
    int k = 0;
    mask.for_each([&](Phase p) { idx[k++] = p; });
    PhaseMat m;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const auto& e = arr[std::size_t(n * r + c)];
            if (!e.is_array() || e.size() != 2)
                throw Error(std::string(what) + ": each entry must be [re, im]");
            m.at(idx[r], idx[c]) = Complex{e[0].get<double>(), e[1].get<double>()};
        }
    return m;
}

inline json write_masked_matrix(const PhaseMat& m, PhaseMask mask) {
    json arr = json::array();
    mask.for_each([&](Phase r) {
        mask.for_each([&](Phase c) { arr.push_back({m.at(r, c).real(), m.at(r, c).imag()}); });
    });
    return arr;
}

inline std::array<double, 3> read_coeffs(const json& j, const char* key) {
    if (!j.contains(key)) return {0.0, 0.0, 1.0};  // constant-power default
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 3) throw Error(std::string(key) + " must have 3 entries");
    return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

}  // namespace detail

inline FeederNetwork parse_feeder_json(const nlohmann::json& j) {
    using detail::json;
    FeederNetwork net;
    try {
        const auto& base = j.at("base");
        net.base_mva = base.at("mva").get<double>();
        net.base_kv_ll = base.at("kv_ll").get<double>();
        net.per_unit = base.value("per_unit", false);
        if (net.base_mva <= 0.0 || net.base_kv_ll <= 0.0)
            throw Error("per-unit base must be positive");

        for (const auto& bj : j.at("buses")) {
            Bus b;
            b.id = bj.at("id").get<std::string>();
            b.phases = PhaseMask::parse(bj.at("phases").get<std::string>());
            b.kv_ll = bj.value("kv_ll", net.base_kv_ll);
            b.is_root = bj.value("root", false);
            net.buses.push_back(std::move(b));
        }
        if (!net.buses.empty()) {
            bool any_root = false;
            for (const auto& b : net.buses) any_root = any_root || b.is_root;
            if (!any_root) net.buses.front().is_root = true;
        }

        // bus lookup before finalize()
        auto bus_of = [&](const std::string& id) -> int {
            for (std::size_t i = 0; i < net.buses.size(); ++i)
                if (net.buses[i].id == id) return static_cast<int>(i);
            throw Error("unknown bus '" + id + "'");
        };

        for (const auto& bj : j.at("branches")) {
            BranchElement br;
            br.from = bus_of(bj.at("from").get<std::string>());
            br.to = bus_of(bj.at("to").get<std::string>());
            br.kind = branch_kind_parse(bj.at("kind").get<std::string>());
            br.phases = PhaseMask::parse(bj.at("phases").get<std::string>());
            br.length = bj.value("length", 1.0);
            if (bj.contains("z_ohms_per_unit_length"))
                br.z_series = Complex{br.length, 0.0} *
                              detail::read_masked_matrix(bj.at("z_ohms_per_unit_length"),
                                                         br.phases, "z_ohms_per_unit_length");
            if (bj.contains("y_shunt_siemens"))
                br.y_shunt = Complex{br.length, 0.0} *
                             detail::read_masked_matrix(bj.at("y_shunt_siemens"), br.phases,
                                                        "y_shunt_siemens");
            net.branches.push_back(std::move(br));
        }

        for (const auto& lj : j.value("loads", json::array())) {
            ZipLoad ld;
            ld.bus = bus_of(lj.at("bus").get<std::string>());
            ld.phase = phase_from_char(lj.at("phase").get<std::string>().at(0));
            ld.p0 = lj.at("p_kw").get<double>();
            ld.q0 = lj.at("q_kvar").get<double>();
            ld.kp = detail::read_coeffs(lj, "kp");
            ld.kq = detail::read_coeffs(lj, "kq");
            const std::string conn = lj.value("connection", "wye");
            if (conn == "wye") {
                net.loads.push_back(ld);
            } else if (conn == "delta") {
                // Line-to-line load split equally onto its two phases as wye.
                const int first = static_cast<int>(ld.phase);
                ZipLoad half = ld;
                half.p0 *= 0.5;
                half.q0 *= 0.5;
                net.loads.push_back(half);
                half.phase = static_cast<Phase>((first + 1) % 3);
                net.loads.push_back(half);
            } else {
                throw Error("unknown load connection '" + conn + "'");
            }
        }

        for (const auto& cj : j.value("capacitors", json::array())) {
            CapacitorUnit cap;
            cap.bus = bus_of(cj.at("bus").get<std::string>());
            cap.phase = phase_from_char(cj.at("phase").get<std::string>().at(0));
            cap.kvar_nominal = cj.at("kvar_nominal").get<double>();
            if (net.per_unit) cap.susceptance = cj.value("susceptance_pu", 0.0);
            net.capacitors.push_back(cap);
        }

        for (const auto& rj : j.value("regulators", json::array())) {
            RegulatorBank reg;
            const int from = bus_of(rj.at("from").get<std::string>());
            const int to = bus_of(rj.at("to").get<std::string>());
            reg.branch = -1;
            for (std::size_t bi = 0; bi < net.branches.size(); ++bi) {
                const auto& br = net.branches[bi];
                if ((br.from == from && br.to == to) || (br.from == to && br.to == from))
                    reg.branch = static_cast<int>(bi);
            }
            if (reg.branch < 0) throw Error("regulator references a branch that does not exist");
            reg.phases = PhaseMask::parse(rj.at("phases").get<std::string>());
            net.regulators.push_back(reg);
        }

        for (const auto& gj : j.value("dg_units", json::array())) {
            DgUnit dg;
            dg.bus = bus_of(gj.at("bus").get<std::string>());
            dg.phase = phase_from_char(gj.at("phase").get<std::string>().at(0));
            dg.s_rated = gj.at("s_kva").get<double>();
            dg.p_out = gj.at("p_kw").get<double>();
            dg.smart_inverter = gj.value("smart_inverter", true);
            net.dg_units.push_back(dg);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("feeder schema violation: ") + e.what());
    }

    net.finalize();
    return net;
}

inline FeederNetwork parse_feeder(const std::string& file_path) {
    std::ifstream in(file_path);
    if (!in) throw Error("cannot open feeder file '" + file_path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("feeder file '" + file_path + "' is not valid JSON: " + e.what());
    }
    return parse_feeder_json(j);
}

// Canonical serialization of the in-memory network (delta loads already
// expanded, branches oriented). parse(serialize(net)) == net.
inline nlohmann::json serialize_feeder(const FeederNetwork& net) {
    using detail::json;
    json j;
    j["base"] = {{"mva", net.base_mva}, {"kv_ll", net.base_kv_ll}, {"per_unit", net.per_unit}};
    j["buses"] = json::array();
    for (const auto& b : net.buses) {
        json bj = {{"id", b.id}, {"phases", b.phases.str()}, {"kv_ll", b.kv_ll}};
        if (b.is_root) bj["root"] = true;
        j["buses"].push_back(bj);
    }
    j["branches"] = json::array();
    for (const auto& br : net.branches) {
        json bj = {{"from", net.buses[br.from].id},
                   {"to", net.buses[br.to].id},
                   {"kind", branch_kind_name(br.kind)},
                   {"phases", br.phases.str()},
                   {"length", 1.0},
                   {"z_ohms_per_unit_length", detail::write_masked_matrix(br.z_series, br.phases)},
                   {"y_shunt_siemens", detail::write_masked_matrix(br.y_shunt, br.phases)}};
        j["branches"].push_back(bj);
    }
    j["loads"] = json::array();
    for (const auto& ld : net.loads)
        j["loads"].push_back({{"bus", net.buses[ld.bus].id},
                              {"phase", std::string(1, phase_char(ld.phase))},
                              {"connection", "wye"},
                              {"p_kw", ld.p0},
                              {"q_kvar", ld.q0},
                              {"kp", {ld.kp[0], ld.kp[1], ld.kp[2]}},
                              {"kq", {ld.kq[0], ld.kq[1], ld.kq[2]}}});
    j["capacitors"] = json::array();
    for (const auto& cap : net.capacitors) {
        json cj = {{"bus", net.buses[cap.bus].id},
                   {"phase", std::string(1, phase_char(cap.phase))},
                   {"kvar_nominal", cap.kvar_nominal}};
        if (net.per_unit) cj["susceptance_pu"] = cap.susceptance;
        j["capacitors"].push_back(cj);
    }
    j["regulators"] = json::array();
    for (const auto& reg : net.regulators)
        j["regulators"].push_back({{"from", net.buses[net.branches[reg.branch].from].id},
                                   {"to", net.buses[net.branches[reg.branch].to].id},
                                   {"phases", reg.phases.str()}});
    j["dg_units"] = json::array();
    for (const auto& dg : net.dg_units)
        j["dg_units"].push_back({{"bus", net.buses[dg.bus].id},
                                 {"phase", std::string(1, phase_char(dg.phase))},
                                 {"s_kva", dg.s_rated},
                                 {"p_kw", dg.p_out},
                                 {"smart_inverter", dg.smart_inverter}});
    return j;
}

// Stable 64-bit FNV-1a hash of the canonical per-unit serialization; used to
// bind checkpoints to the feeder they were trained on.
inline std::uint64_t feeder_hash(const FeederNetwork& net) {
    const std::string s = serialize_feeder(to_per_unit(net)).dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace vvo
