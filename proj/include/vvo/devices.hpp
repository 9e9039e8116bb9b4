#pragma once

#include <cmath>
#include <vector>

#include "vvo/network.hpp"

namespace vvo {

constexpr int kRegulatorTaps = 33;       // 32 steps, +-10%
constexpr int kRegulatorNeutralTap = 17; // ratio exactly 1.0
constexpr int kInverterSteps = 21;       // -1.0 .. 1.0 at 0.1
constexpr int kInverterNeutralIndex = 10;

inline double regulator_ratio(int tap) {
    if (tap < 1 || tap > kRegulatorTaps) throw Error("regulator tap out of range");
    return 0.9 + (tap - 1) * 0.00625;
}

inline double inverter_ratio_from_index(int index) {
    if (index < 0 || index >= kInverterSteps) throw Error("inverter action index out of range");
    return -1.0 + 0.1 * index;
}

// Reactive power of a switchable capacitor at the observed voltage.
inline double capacitor_q(int status, double voltage_mag, double susceptance) {
    if (status != 0 && status != 1) throw Error("capacitor status must be 0 or 1");
    return status ? voltage_mag * voltage_mag * susceptance : 0.0;
}

// Reactive output of a smart inverter at a given ratio on the 0.1 grid.
// The box bound is +-sqrt(S^2 - P^2).
inline double inverter_q(double ratio, double s_rated, double p_out) {
    if (std::abs(p_out) > s_rated + 1e-12) throw Error("inverter active power exceeds rating");
    const double q_max = std::sqrt(std::max(s_rated * s_rated - p_out * p_out, 0.0));
    return ratio * q_max;
}

enum class SlotKind { regulator, capacitor, inverter };

struct ControlSlot {
    SlotKind kind;
    int device = -1;  // regulator bank index / capacitor unit index / dg unit index
    Phase phase = Phase::a;
    int cardinality = 0;
};

// One control slot per agent: a regulator phase (33 actions), a capacitor
// phase (2), or an inverter phase (21). Slot order is regulators, then
// capacitors, then inverter-equipped DG phases, each in network order.
struct ActionSpaceDescriptor {
    std::vector<ControlSlot> slots;

    static ActionSpaceDescriptor build(const FeederNetwork& net) {
        ActionSpaceDescriptor d;
        for (std::size_t r = 0; r < net.regulators.size(); ++r) {
            net.regulators[r].phases.for_each([&](Phase p) {
                d.slots.push_back({SlotKind::regulator, int(r), p, kRegulatorTaps});
            });
        }
        for (std::size_t c = 0; c < net.capacitors.size(); ++c)
            d.slots.push_back({SlotKind::capacitor, int(c), net.capacitors[c].phase, 2});
        for (std::size_t g = 0; g < net.dg_units.size(); ++g)
            if (net.dg_units[g].smart_inverter)
                d.slots.push_back({SlotKind::inverter, int(g), net.dg_units[g].phase, kInverterSteps});
        return d;
    }

    int size() const { return static_cast<int>(slots.size()); }

    bool operator==(const ActionSpaceDescriptor& o) const {
        if (slots.size() != o.slots.size()) return false;
        for (std::size_t i = 0; i < slots.size(); ++i) {
            const auto &x = slots[i], &y = o.slots[i];
            if (x.kind != y.kind || x.device != y.device || x.phase != y.phase ||
                x.cardinality != y.cardinality)
                return false;
        }
        return true;
    }
};

// One discrete action index per agent/slot.
using JointAction = std::vector<int>;

// Physical device settings resolved from a joint action, aligned with the
// network's device lists so the solver can look them up directly.
struct DeviceSettings {
    std::vector<std::array<double, 3>> regulator_ratio;  // per bank, per phase; 1.0 when unused
    std::vector<int> regulator_tap;                      // per bank, per phase (0 = no slot)
    std::vector<int> capacitor_status;                   // per capacitor unit
    std::vector<double> inverter_ratio;                  // per dg unit, 0 for fixed units

    static DeviceSettings neutral(const FeederNetwork& net) {
        DeviceSettings s;
        s.regulator_ratio.assign(net.regulators.size(), {1.0, 1.0, 1.0});
        s.regulator_tap.assign(net.regulators.size() * 3, 0);
        for (std::size_t r = 0; r < net.regulators.size(); ++r)
            net.regulators[r].phases.for_each(
                [&](Phase p) { s.regulator_tap[3 * r + int(p)] = kRegulatorNeutralTap; });
        s.capacitor_status.assign(net.capacitors.size(), 0);
        s.inverter_ratio.assign(net.dg_units.size(), 0.0);
        return s;
    }
};

inline DeviceSettings decode_action(const ActionSpaceDescriptor& d, const FeederNetwork& net,
                                    const JointAction& a) {
    if (int(a.size()) != d.size()) throw Error("joint action length does not match descriptor");
    DeviceSettings s = DeviceSettings::neutral(net);
    for (int i = 0; i < d.size(); ++i) {
        const auto& slot = d.slots[i];
        const int idx = a[i];
        if (idx < 0 || idx >= slot.cardinality) throw Error("action index out of range");
        switch (slot.kind) {
            case SlotKind::regulator: {
                const int tap = idx + 1;
                s.regulator_tap[3 * slot.device + int(slot.phase)] = tap;
                s.regulator_ratio[slot.device][int(slot.phase)] = regulator_ratio(tap);
                break;
            }
            case SlotKind::capacitor:
                s.capacitor_status[slot.device] = idx;
                break;
            case SlotKind::inverter:
                s.inverter_ratio[slot.device] = inverter_ratio_from_index(idx);
                break;
        }
    }
    return s;
}

inline JointAction encode_action(const ActionSpaceDescriptor& d, const DeviceSettings& s) {
    JointAction a(d.slots.size(), 0);
    for (int i = 0; i < d.size(); ++i) {
        const auto& slot = d.slots[i];
        switch (slot.kind) {
            case SlotKind::regulator:
                a[i] = s.regulator_tap[3 * slot.device + int(slot.phase)] - 1;
                break;
            case SlotKind::capacitor:
                a[i] = s.capacitor_status[slot.device];
                break;
            case SlotKind::inverter: {
                const double r = s.inverter_ratio[slot.device];
                a[i] = static_cast<int>(std::lround((r + 1.0) / 0.1));
                break;
            }
        }
        if (a[i] < 0 || a[i] >= slot.cardinality) throw Error("settings not encodable");
    }
    return a;
}

inline JointAction neutral_action(const ActionSpaceDescriptor& d, const FeederNetwork& net) {
    return encode_action(d, DeviceSettings::neutral(net));
}

// Voltage and current transforms of a regulator bank (Kersting's A_r/D_r).
// A_r is diagonal on the branch's present phases; phases without a regulator
// winding keep ratio 1.
inline PhaseMat regulator_A(const FeederNetwork& net, int bank, const DeviceSettings& s) {
    const auto& reg = net.regulators[bank];
    return PhaseMat::diagonal_on(net.branches[reg.branch].phases, s.regulator_ratio[bank]);
}

inline PhaseMat regulator_D(const FeederNetwork& net, int bank, const DeviceSettings& s) {
    const auto& reg = net.regulators[bank];
    const auto& r = s.regulator_ratio[bank];
    return PhaseMat::diagonal_on(net.branches[reg.branch].phases,
                                 {1.0 / r[0], 1.0 / r[1], 1.0 / r[2]});
}

}  // namespace vvo
