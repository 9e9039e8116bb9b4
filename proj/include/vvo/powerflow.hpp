#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "vvo/devices.hpp"
#include "vvo/network.hpp"

namespace vvo {

// Generalized line constants of one branch (Kersting's a/b/c/d matrices).
struct BranchConstants {
    PhaseMat a, b, c, d;

    static BranchConstants of(const BranchElement& br) {
        const PhaseMask m = br.phases;
        const PhaseMat id = PhaseMat::identity_on(m);
        const PhaseMat zy = mul(br.z_series, br.y_shunt, m);
        BranchConstants k;
        k.a = id + Complex{0.5, 0.0} * zy;
        k.b = br.z_series;
        k.c = br.y_shunt + Complex{0.25, 0.0} * mul(br.y_shunt, zy, m);
        k.d = id + Complex{0.5, 0.0} * zy;
        return k;
    }
};

inline std::vector<BranchConstants> branch_constants(const FeederNetwork& net) {
    std::vector<BranchConstants> out;
    out.reserve(net.branches.size());
    for (const auto& br : net.branches) out.push_back(BranchConstants::of(br));
    return out;
}

struct SolverConfig {
    double tolerance = 1e-6;  // p.u., on the Eq.-style infinity norm of voltage change
    int max_iterations = 100;
    std::array<double, 3> source_voltage = {1.0, 1.0, 1.0};  // p.u. magnitude per phase
    double collapse_voltage = 0.2;                           // |U| below this is divergence
};

enum class SolveStatus { converged, max_iterations, diverged };

struct PowerFlowSolution {
    SolveStatus status = SolveStatus::max_iterations;
    int iterations = 0;
    std::vector<PhaseVec> voltages;         // per bus
    std::vector<PhaseVec> receiving_current;  // per branch, Eq.-4 current at the to-bus
    std::vector<PhaseVec> sending_current;    // per branch, line-side sending current
    std::vector<PhaseVec> upstream_current;   // per branch, current drawn from the from-bus
    std::vector<double> delta_history;        // per-iteration max voltage change
    double total_loss = 0.0;                  // p.u.
    double total_loss_kw = 0.0;

    bool converged() const { return status == SolveStatus::converged; }
};

// Per-scenario inputs: one scale factor per load, one active output per DG
// unit (p.u.). Empty vectors mean "use the network's base values".
struct OperatingPoint {
    std::vector<double> load_scale;
    std::vector<double> dg_p;
};

inline double zip_power(double p0, const std::array<double, 3>& k, double vmag) {
    return p0 * (k[0] * vmag * vmag + k[1] * vmag + k[2]);
}

inline Complex zip_power(const ZipLoad& ld, double vmag) {
    return {zip_power(ld.p0, ld.kp, vmag), zip_power(ld.q0, ld.kq, vmag)};
}

// Aggregated complex power drawn at each (bus, phase): ZIP load minus DG
// injection minus capacitor reactive support. Load consumption is positive.
inline std::vector<PhaseVec> nodal_powers(const FeederNetwork& net,
                                          const std::vector<PhaseVec>& voltages,
                                          const DeviceSettings& settings,
                                          const OperatingPoint& op) {
    std::vector<PhaseVec> s(net.buses.size());
    for (std::size_t i = 0; i < net.loads.size(); ++i) {
        const auto& ld = net.loads[i];
        const double scale = op.load_scale.empty() ? 1.0 : op.load_scale[i];
        const double vmag = std::abs(voltages[ld.bus][ld.phase]);
        s[ld.bus][ld.phase] += scale * zip_power(ld, vmag);
    }
    for (std::size_t g = 0; g < net.dg_units.size(); ++g) {
        const auto& dg = net.dg_units[g];
        const double p = op.dg_p.empty() ? dg.p_out : op.dg_p[g];
        const double q = inverter_q(settings.inverter_ratio[g], dg.s_rated, p);
        s[dg.bus][dg.phase] -= Complex{p, q};
    }
    for (std::size_t c = 0; c < net.capacitors.size(); ++c) {
        const auto& cap = net.capacitors[c];
        const double vmag = std::abs(voltages[cap.bus][cap.phase]);
        s[cap.bus][cap.phase] -=
            Complex{0.0, capacitor_q(settings.capacitor_status[c], vmag, cap.susceptance)};
    }
    return s;
}

inline std::vector<PhaseVec> injection_currents(const FeederNetwork& net,
                                                const std::vector<PhaseVec>& voltages,
                                                const DeviceSettings& settings,
                                                const OperatingPoint& op) {
    const auto s = nodal_powers(net, voltages, settings, op);
    std::vector<PhaseVec> inj(net.buses.size());
    for (std::size_t k = 0; k < net.buses.size(); ++k) {
        net.buses[k].phases.for_each([&](Phase p) {
            if (s[k][p] == Complex{0.0, 0.0}) return;
            const Complex u = voltages[k][p];
            if (u == Complex{0.0, 0.0}) throw Error("zero voltage on a loaded phase");
            inj[k][p] = std::conj(s[k][p] / u);
        });
    }
    return inj;
}

inline std::vector<PhaseVec> source_voltages(const FeederNetwork& net, const SolverConfig& cfg) {
    constexpr double deg120 = 2.0 * std::numbers::pi / 3.0;
    std::vector<PhaseVec> u(net.buses.size());
    const std::array<double, 3> angle = {0.0, -deg120, deg120};
    for (std::size_t k = 0; k < net.buses.size(); ++k) {
        net.buses[k].phases.for_each([&](Phase p) {
            const int i = static_cast<int>(p);
            u[k][p] = std::polar(cfg.source_voltage[i], angle[i]);
        });
    }
    return u;
}

namespace detail {

inline bool finite(const PhaseVec& v) {
    for (const auto& x : v.v)
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
    return true;
}

}  // namespace detail

// Leaf-to-root current aggregation. `voltages` must be populated for all
// buses; regulator banks transform the line-side sending current back to the
// upstream side (power-conserving ideal transformer, I_line = D_r I_up).
inline void backward_sweep(const FeederNetwork& net, const std::vector<BranchConstants>& consts,
                           const std::vector<PhaseVec>& voltages,
                           const std::vector<PhaseVec>& injections, const DeviceSettings& settings,
                           PowerFlowSolution& sol) {
    sol.receiving_current.assign(net.branches.size(), {});
    sol.sending_current.assign(net.branches.size(), {});
    sol.upstream_current.assign(net.branches.size(), {});
    for (int bi : net.order_up) {
        const auto& br = net.branches[bi];
        PhaseVec i_recv = injections[br.to];
        for (int child : net.children[br.to]) i_recv += sol.upstream_current[child];
        sol.receiving_current[bi] = i_recv;
        PhaseVec i_send = mul(consts[bi].c, voltages[br.to], br.phases);
        i_send += mul(consts[bi].d, i_recv, br.phases);
        sol.sending_current[bi] = i_send;
        const int bank = net.regulator_on_branch(bi);
        sol.upstream_current[bi] =
            bank >= 0 ? mul(regulator_A(net, bank, settings), i_send, br.phases) : i_send;
    }
}

// Root-to-leaf voltage update; regulator banks boost the upstream voltage
// before the line equations are applied. Returns the max voltage change.
inline double forward_sweep(const FeederNetwork& net, const std::vector<BranchConstants>& consts,
                            const std::vector<PhaseVec>& source, const DeviceSettings& settings,
                            PowerFlowSolution& sol, std::vector<PhaseVec>& voltages) {
    double delta = (voltages[net.root] - source[net.root]).inf_norm();
    voltages[net.root] = source[net.root];
    for (int bi : net.order_down) {
        const auto& br = net.branches[bi];
        PhaseVec u_eff = voltages[br.from];
        const int bank = net.regulator_on_branch(bi);
        if (bank >= 0) u_eff = mul(regulator_A(net, bank, settings), u_eff, br.phases);
        PhaseVec u_new = mul(consts[bi].a, u_eff, br.phases);
        u_new -= mul(consts[bi].b, sol.sending_current[bi], br.phases);
        // keep entries outside the branch mask (phases fed by no conductor stay at source init)
        br.phases.for_each([&](Phase p) {
            delta = std::max(delta, std::abs(u_new[p] - voltages[br.to][p]));
            voltages[br.to][p] = u_new[p];
        });
    }
    return delta;
}

// Series power loss of one branch from its terminal voltages: the current
// through the impedance is Z^-1 (U_n_eff - U_m), and the loss is
// Re(dU^T conj(I)) which equals I^H R I. Ideal elements contribute zero.
inline double branch_series_loss(const FeederNetwork& net, int bi,
                                 const std::vector<PhaseVec>& voltages,
                                 const DeviceSettings& settings) {
    const auto& br = net.branches[bi];
    if (!br.has_impedance()) return 0.0;
    PhaseVec u_from = voltages[br.from];
    const int bank = net.regulator_on_branch(bi);
    if (bank >= 0) u_from = mul(regulator_A(net, bank, settings), u_from, br.phases);
    const PhaseVec du = u_from - voltages[br.to];
    const PhaseVec i = mul(inverse_on(br.z_series, br.phases), du, br.phases);
    double loss = 0.0;
    br.phases.for_each([&](Phase p) { loss += (du[p] * std::conj(i[p])).real(); });
    return loss;
}

inline double total_loss(const FeederNetwork& net, const PowerFlowSolution& sol,
                         const DeviceSettings& settings) {
    double loss = 0.0;
    for (std::size_t bi = 0; bi < net.branches.size(); ++bi)
        loss += branch_series_loss(net, int(bi), sol.voltages, settings);
    return loss;
}

inline double to_kw(const FeederNetwork& net, double p_pu) { return p_pu * net.base_mva * 1000.0; }

inline PowerFlowSolution solve(const FeederNetwork& net, const DeviceSettings& settings,
                               const OperatingPoint& op, const SolverConfig& cfg) {
    if (!net.per_unit) throw Error("solve requires a per-unit network");
    if (cfg.tolerance <= 0.0 || cfg.max_iterations < 1) throw Error("invalid solver config");

    const auto consts = branch_constants(net);
    const auto source = source_voltages(net, cfg);

    PowerFlowSolution sol;
    std::vector<PhaseVec> voltages = source;

    for (int it = 1; it <= cfg.max_iterations; ++it) {
        sol.iterations = it;
        std::vector<PhaseVec> inj;
        try {
            inj = injection_currents(net, voltages, settings, op);
        } catch (const Error&) {
            sol.status = SolveStatus::diverged;
            sol.voltages = std::move(voltages);
            return sol;
        }
        backward_sweep(net, consts, voltages, inj, settings, sol);
        const double delta = forward_sweep(net, consts, source, settings, sol, voltages);
        sol.delta_history.push_back(delta);

        bool collapsed = false;
        for (std::size_t k = 0; k < net.buses.size() && !collapsed; ++k) {
            if (!detail::finite(voltages[k])) collapsed = true;
            net.buses[k].phases.for_each([&](Phase p) {
                if (std::abs(voltages[k][p]) < cfg.collapse_voltage) collapsed = true;
            });
        }
        if (collapsed || !std::isfinite(delta)) {
            sol.status = SolveStatus::diverged;
            sol.voltages = std::move(voltages);
            return sol;
        }
        if (delta < cfg.tolerance) {
            sol.status = SolveStatus::converged;
            break;
        }
        if (it == cfg.max_iterations) sol.status = SolveStatus::max_iterations;
    }

    sol.voltages = std::move(voltages);
    sol.total_loss = total_loss(net, sol, settings);
    sol.total_loss_kw = to_kw(net, sol.total_loss);
    return sol;
}

// Active power delivered by the substation, for balance checks.
inline double source_power(const FeederNetwork& net, const PowerFlowSolution& sol) {
    double p = 0.0;
    for (int bi : net.children[net.root]) {
        const auto& br = net.branches[bi];
        br.phases.for_each([&](Phase ph) {
            p += (sol.voltages[net.root][ph] * std::conj(sol.upstream_current[bi][ph])).real();
        });
    }
    return p;
}

}  // namespace vvo
