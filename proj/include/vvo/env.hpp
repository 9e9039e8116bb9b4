#pragma once

#include <utility>
#include <vector>

#include "vvo/powerflow.hpp"
#include "vvo/rng.hpp"

namespace vvo {

struct ScenarioBounds {
    double load_lo = 0.8;
    double load_hi = 1.2;
};

// One operating condition: per-load scale factors and DG active outputs.
struct Scenario {
    std::vector<double> load_scale;
    std::vector<double> dg_p;  // p.u.
    std::uint64_t seed = 0;

    OperatingPoint operating_point() const { return {load_scale, dg_p}; }
};

inline Scenario sample_scenario(const FeederNetwork& net, const ScenarioBounds& bounds, Rng& rng) {
    if (bounds.load_lo <= 0.0 || bounds.load_hi < bounds.load_lo)
        throw Error("invalid scenario bounds");
    Scenario sc;
    sc.load_scale.reserve(net.loads.size());
    for (std::size_t i = 0; i < net.loads.size(); ++i)
        sc.load_scale.push_back(rng.uniform(bounds.load_lo, bounds.load_hi));
    sc.dg_p.reserve(net.dg_units.size());
    for (const auto& dg : net.dg_units) sc.dg_p.push_back(dg.p_out);
    return sc;
}

inline Scenario sample_scenario(const FeederNetwork& net, const ScenarioBounds& bounds,
                                std::uint64_t seed) {
    Rng rng(seed);
    Scenario sc = sample_scenario(net, bounds, rng);
    sc.seed = seed;
    return sc;
}

// Flattened per-bus per-phase voltage magnitudes; absent phases are 0 so the
// dimension is always 3N.
using EnvState = std::vector<double>;

inline EnvState extract_state(const FeederNetwork& net, const PowerFlowSolution& sol) {
    EnvState s(3 * net.buses.size(), 0.0);
    for (std::size_t k = 0; k < net.buses.size(); ++k)
        net.buses[k].phases.for_each(
            [&](Phase p) { s[3 * k + static_cast<int>(p)] = std::abs(sol.voltages[k][p]); });
    return s;
}

struct RewardConfig {
    double penalty = 1000.0;  // per p.u. of aggregate violation
    double v_lo = 0.95;
    double v_hi = 1.05;
};

// Aggregate out-of-band voltage amount over all buses and phases, in p.u.
inline double violation_amount(const FeederNetwork& net, const PowerFlowSolution& sol,
                               const RewardConfig& cfg) {
    double amount = 0.0;
    for (std::size_t k = 0; k < net.buses.size(); ++k)
        net.buses[k].phases.for_each([&](Phase p) {
            const double v = std::abs(sol.voltages[k][p]);
            amount += std::max(v - cfg.v_hi, 0.0) + std::max(cfg.v_lo - v, 0.0);
        });
    return amount;
}

// Two-branch reward: loss improvement when all voltages are in band, a
// penalty proportional to the violation amount otherwise.
inline double reward(double prev_loss_kw, double new_loss_kw, double violation,
                     const RewardConfig& cfg) {
    if (violation == 0.0) return prev_loss_kw - new_loss_kw;
    return -cfg.penalty * violation;
}

struct TransitionTuple {
    EnvState state;
    JointAction action;
    double reward = 0.0;
    EnvState next_state;
    double loss_kw = 0.0;
    double violation = 0.0;
};

struct EnvConfig {
    ScenarioBounds bounds;
    RewardConfig reward;
    SolverConfig solver;
    int steps_per_episode = 1;
};

struct ApplyResult {
    EnvState state;
    double loss_kw = 0.0;
    double violation = 0.0;
};

inline ApplyResult apply(const FeederNetwork& net, const Scenario& sc,
                         const DeviceSettings& settings, const EnvConfig& cfg) {
    PowerFlowSolution sol = solve(net, settings, sc.operating_point(), cfg.solver);
    if (sol.status == SolveStatus::diverged)
        throw Error("power flow diverged while applying an action (seed " +
                    std::to_string(sc.seed) + ")");
    ApplyResult r;
    r.state = extract_state(net, sol);
    r.loss_kw = sol.total_loss_kw;
    r.violation = violation_amount(net, sol, cfg.reward);
    return r;
}

// RL environment around the sweep solver. Each episode draws a fresh
// scenario; the previously applied action is carried over and re-evaluated
// under the new loads so the reward isolates the new action's effect.
class Environment {
public:
    Environment(const FeederNetwork& net, EnvConfig cfg, std::uint64_t seed)
        : net_(&net),
          descriptor_(ActionSpaceDescriptor::build(net)),
          cfg_(std::move(cfg)),
          rng_(seed),
          carried_(DeviceSettings::neutral(net)) {}

    const ActionSpaceDescriptor& descriptor() const { return descriptor_; }
    const EnvState& state() const { return state_; }
    int state_dim() const { return static_cast<int>(3 * net_->buses.size()); }
    const EnvConfig& config() const { return cfg_; }
    const Scenario& scenario() const { return scenario_; }

    // Resamples the scenario and evaluates the carried action under it.
    // Returns the state the agents observe before acting.
    const EnvState& begin_episode() {
        scenario_ = sample_scenario(*net_, cfg_.bounds, rng_);
        auto res = apply(*net_, scenario_, carried_, cfg_);
        state_ = std::move(res.state);
        carried_loss_kw_ = res.loss_kw;
        step_in_episode_ = 0;
        return state_;
    }

    TransitionTuple step(const JointAction& action) {
        if (step_in_episode_ >= cfg_.steps_per_episode) begin_episode();
        const DeviceSettings settings = decode_action(descriptor_, *net_, action);
        auto res = apply(*net_, scenario_, settings, cfg_);

        TransitionTuple tr;
        tr.state = state_;
        tr.action = action;
        tr.next_state = res.state;
        tr.loss_kw = res.loss_kw;
        tr.violation = res.violation;
        tr.reward = reward(carried_loss_kw_, res.loss_kw, res.violation, cfg_.reward);

        carried_ = settings;
        carried_loss_kw_ = res.loss_kw;
        state_ = tr.next_state;
        ++step_in_episode_;
        return tr;
    }

private:
    const FeederNetwork* net_;
    ActionSpaceDescriptor descriptor_;
    EnvConfig cfg_;
    Rng rng_;
    Scenario scenario_;
    DeviceSettings carried_;
    double carried_loss_kw_ = 0.0;
    EnvState state_;
    int step_in_episode_ = 0;
};

}  // namespace vvo
