#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "vvo/linalg3.hpp"
#include "vvo/phase.hpp"

namespace vvo {

enum class BranchKind { line, transformer, sw, regulator };

inline const char* branch_kind_name(BranchKind k) {
    switch (k) {
        case BranchKind::line: return "line";
        case BranchKind::transformer: return "transformer";
        case BranchKind::sw: return "switch";
        case BranchKind::regulator: return "regulator";
    }
    return "?";
}

inline BranchKind branch_kind_parse(const std::string& s) {
    if (s == "line") return BranchKind::line;
    if (s == "transformer") return BranchKind::transformer;
    if (s == "switch") return BranchKind::sw;
    if (s == "regulator") return BranchKind::regulator;
    throw Error("unknown branch kind '" + s + "'");
}

struct Bus {
    std::string id;
    PhaseMask phases;
    double kv_ll = 0.0;  // line-to-line voltage base of this bus's zone
    bool is_root = false;
};

struct BranchElement {
    int from = -1;  // upstream bus index after orientation
    int to = -1;
    BranchKind kind = BranchKind::line;
    PhaseMask phases;
    PhaseMat z_series;  // ohms (or p.u.), total over length
    PhaseMat y_shunt;   // siemens (or p.u.), total over length
    double length = 0.0;

    bool has_impedance() const { return !z_series.is_zero_on(phases); }
};

enum class Connection { wye, delta };

struct ZipLoad {
    int bus = -1;
    Phase phase = Phase::a;
    Connection connection = Connection::wye;  // delta loads are converted at ingestion
    double p0 = 0.0;  // kW before to_per_unit, p.u. after
    double q0 = 0.0;
    std::array<double, 3> kp{0.0, 0.0, 1.0};  // constant-Z, constant-I, constant-P
    std::array<double, 3> kq{0.0, 0.0, 1.0};
};

struct CapacitorUnit {
    int bus = -1;
    Phase phase = Phase::a;
    double kvar_nominal = 0.0;
    double susceptance = 0.0;  // p.u., filled by to_per_unit
};

struct RegulatorBank {
    int branch = -1;  // index into branches
    PhaseMask phases;
};

struct DgUnit {
    int bus = -1;
    Phase phase = Phase::a;
    double s_rated = 0.0;  // kVA before to_per_unit, p.u. after
    double p_out = 0.0;    // kW before to_per_unit, p.u. after
    bool smart_inverter = true;
};

// Immutable radial feeder description. Construction validates the radial
// topology and builds the depth-ordered traversal lists used by the sweeps.
struct FeederNetwork {
    double base_mva = 1.0;
    double base_kv_ll = 1.0;
    bool per_unit = false;

    std::vector<Bus> buses;
    std::vector<BranchElement> branches;
    std::vector<ZipLoad> loads;
    std::vector<CapacitorUnit> capacitors;
    std::vector<RegulatorBank> regulators;
    std::vector<DgUnit> dg_units;

    int root = -1;
    std::vector<int> parent_branch;          // per bus, -1 for root
    std::vector<std::vector<int>> children;  // per bus, child branch indices
    std::vector<int> order_down;             // branch indices, root towards leaves
    std::vector<int> order_up;               // reverse of order_down

    int bus_index(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw Error("unknown bus '" + id + "'");
        return it->second;
    }
    bool has_bus(const std::string& id) const { return index_.count(id) != 0; }

    int regulator_on_branch(int branch) const {
        for (std::size_t i = 0; i < regulators.size(); ++i)
            if (regulators[i].branch == branch) return static_cast<int>(i);
        return -1;
    }

    // Orients branches away from the root, builds traversal orders, and
    // checks every structural invariant.
    void finalize() {
        index_.clear();
        root = -1;
        for (std::size_t i = 0; i < buses.size(); ++i) {
            if (buses[i].phases.empty()) throw Error("bus '" + buses[i].id + "' has no phases");
            if (!index_.emplace(buses[i].id, int(i)).second)
                throw Error("duplicate bus id '" + buses[i].id + "'");
            if (buses[i].is_root) {
                if (root >= 0) throw Error("more than one root bus");
                root = static_cast<int>(i);
            }
        }
        if (buses.empty()) throw Error("feeder has no buses");
        if (root < 0) throw Error("no root bus marked");
        if (branches.size() + 1 != buses.size())
            throw Error("non-radial topology: expected |branches| = |buses| - 1");

        std::vector<std::vector<std::pair<int, int>>> adj(buses.size());  // (other bus, branch)
        for (std::size_t i = 0; i < branches.size(); ++i) {
            auto& br = branches[i];
            if (br.from < 0 || br.to < 0) throw Error("branch references unknown bus");
            if (br.phases.empty()) throw Error("branch has empty phase mask");
            if (!buses[br.from].phases.contains(br.phases) ||
                !buses[br.to].phases.contains(br.phases))
                throw Error("branch phases not contained in endpoint bus masks");
            if (br.kind == BranchKind::sw && br.has_impedance())
                throw Error("switch branch must have zero series impedance");
            adj[br.from].push_back({br.to, int(i)});
            adj[br.to].push_back({br.from, int(i)});
        }

        parent_branch.assign(buses.size(), -1);
        children.assign(buses.size(), {});
        order_down.clear();
        order_up.clear();
        std::vector<char> seen(buses.size(), 0);
        std::vector<int> stack = {root};
        seen[root] = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (auto [v, bi] : adj[u]) {
                if (seen[v]) {
                    if (bi != parent_branch[u])
                        throw Error("non-radial topology: cycle through bus '" + buses[v].id + "'");
                    continue;
                }
                seen[v] = 1;
                // orient from -> to as upstream -> downstream
                if (branches[bi].to != v) std::swap(branches[bi].from, branches[bi].to);
                parent_branch[v] = bi;
                children[u].push_back(bi);
                order_down.push_back(bi);
                stack.push_back(v);
            }
        }
        for (std::size_t i = 0; i < buses.size(); ++i)
            if (!seen[i]) throw Error("non-radial topology: bus '" + buses[i].id + "' unreachable");
        order_up.assign(order_down.rbegin(), order_down.rend());

        for (std::size_t i = 0; i < buses.size(); ++i) {
            if (int(i) == root) continue;
            if (!branches[parent_branch[i]].phases.contains(buses[i].phases))
                throw Error("bus '" + buses[i].id + "' declares phases its supply branch lacks");
        }

        validate_attachments();
    }

    void validate_attachments() const {
        for (const auto& ld : loads) {
            check_phase_on_bus(ld.bus, ld.phase, "load");
            const double sp = ld.kp[0] + ld.kp[1] + ld.kp[2];
            const double sq = ld.kq[0] + ld.kq[1] + ld.kq[2];
            if (std::abs(sp - 1.0) > 1e-12 || std::abs(sq - 1.0) > 1e-12)
                throw Error("ZIP coefficients at bus '" + buses[ld.bus].id + "' do not sum to 1");
        }
        for (const auto& cap : capacitors) {
            check_phase_on_bus(cap.bus, cap.phase, "capacitor");
            if (cap.kvar_nominal < 0) throw Error("capacitor with negative rating");
        }
        for (const auto& dg : dg_units) {
            check_phase_on_bus(dg.bus, dg.phase, "dg unit");
            if (std::abs(dg.p_out) > dg.s_rated + 1e-12)
                throw Error("dg active output exceeds rating at bus '" + buses[dg.bus].id + "'");
        }
        for (const auto& reg : regulators) {
            if (reg.branch < 0 || reg.branch >= int(branches.size()))
                throw Error("regulator references unknown branch");
            if (!branches[reg.branch].phases.contains(reg.phases))
                throw Error("regulator phases not present on its branch");
        }
    }

    // Voltage base (line-to-neutral, kV) of the zone a bus belongs to.
    double zone_kv_ln(int bus) const { return buses[bus].kv_ll / std::sqrt(3.0); }
    double zone_z_base(int bus) const {
        const double kv = buses[bus].kv_ll;
        return kv * kv / base_mva;  // ohms
    }

private:
    std::unordered_map<std::string, int> index_;

    void check_phase_on_bus(int bus, Phase p, const char* what) const {
        if (bus < 0 || bus >= int(buses.size()))
            throw Error(std::string(what) + " references unknown bus");
        if (!buses[bus].phases.has(p))
            throw Error(std::string(what) + " phase " + phase_char(p) + " not in mask of bus '" +
                        buses[bus].id + "'");
    }
};

// Converts every impedance, admittance and power to per-unit on the system
// base. Impedance bases follow the voltage zone of the receiving bus, so
// transformer branches bridge zones transparently. Idempotent.
inline FeederNetwork to_per_unit(FeederNetwork net) {
    if (net.per_unit) return net;
    if (net.base_mva <= 0.0 || net.base_kv_ll <= 0.0) throw Error("per-unit base must be positive");
    const double s_base_kw = net.base_mva * 1000.0;

    for (auto& br : net.branches) {
        const double zb = net.zone_z_base(br.to);
        for (auto& z : br.z_series.m) z /= zb;
        for (auto& y : br.y_shunt.m) y *= zb;
    }
    for (auto& ld : net.loads) {
        ld.p0 /= s_base_kw;
        ld.q0 /= s_base_kw;
    }
    for (auto& cap : net.capacitors) {
        // nameplate kvar at nominal voltage -> susceptance in p.u. (Q = V^2 B, V = 1)
        cap.susceptance = cap.kvar_nominal / s_base_kw;
    }
    for (auto& dg : net.dg_units) {
        dg.s_rated /= s_base_kw;
        dg.p_out /= s_base_kw;
    }
    net.per_unit = true;
    return net;
}

}  // namespace vvo
