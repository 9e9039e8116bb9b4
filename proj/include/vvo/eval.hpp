#pragma once

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "vvo/agents.hpp"

namespace vvo {

// Pre-control operating settings: capacitors disconnected, regulator ratios
// 1.0, inverters at unity power factor.
inline JointAction baseline_settings(const FeederNetwork& net) {
    return neutral_action(ActionSpaceDescriptor::build(net), net);
}

struct CaseResult {
    int case_id = 0;
    double p_loss_base_kw = 0.0;
    double p_loss_ctrl_kw = 0.0;
    double delta_p_kw = 0.0;  // base - ctrl, exactly
    double viol_base = 0.0;
    double viol_ctrl = 0.0;
    double latency_ms = 0.0;  // greedy inference + one controlled solve
    bool base_diverged = false;
    bool ctrl_diverged = false;
};

struct EvalReport {
    int n_test = 0;
    int m_v = 0;        // cases with baseline violation
    int n_v = 0;        // of those, cases the policy brings fully in band
    double s_v = 0.0;   // n_v / m_v (0 when m_v == 0)
    double mean_delta_p_kw = 0.0;
    double max_delta_p_kw = 0.0;
    double frac_delta_p_positive = 0.0;
    double mean_latency_ms = 0.0;
    int diverged_cases = 0;
};

struct EvalResult {
    EvalReport report;
    std::vector<CaseResult> cases;
};

inline EvalReport aggregate(const std::vector<CaseResult>& cases) {
    EvalReport r;
    r.n_test = static_cast<int>(cases.size());
    double sum_dp = 0.0, sum_lat = 0.0;
    int positive = 0, valid = 0;
    for (const auto& c : cases) {
        if (c.base_diverged || c.ctrl_diverged) {
            ++r.diverged_cases;
            continue;
        }
        ++valid;
        sum_dp += c.delta_p_kw;
        sum_lat += c.latency_ms;
        if (c.delta_p_kw > 0.0) ++positive;
        r.max_delta_p_kw = std::max(r.max_delta_p_kw, c.delta_p_kw);
        if (c.viol_base > 0.0) {
            ++r.m_v;
            if (c.viol_ctrl == 0.0) ++r.n_v;
        }
    }
    if (valid > 0) {
        r.mean_delta_p_kw = sum_dp / valid;
        r.mean_latency_ms = sum_lat / valid;
        r.frac_delta_p_positive = double(positive) / valid;
    }
    r.s_v = r.m_v > 0 ? double(r.n_v) / r.m_v : 0.0;
    return r;
}

// Runs `n_test` fresh scenarios: baseline solve, greedy policy on the
// baseline state, controlled solve. Scenario stream is deterministic from
// the seed; latency is wall time of inference + controlled solve.
inline EvalResult evaluate(const FeederNetwork& net, const AgentPool& pool, int n_test,
                           std::uint64_t seed, const EnvConfig& cfg) {
    if (!(pool.descriptor == ActionSpaceDescriptor::build(net)))
        throw Error("agent pool is not compatible with this feeder");
    const auto descriptor = pool.descriptor;
    const JointAction base_action = baseline_settings(net);
    const DeviceSettings base_settings = decode_action(descriptor, net, base_action);

    EvalResult out;
    Rng rng(seed);
    for (int i = 0; i < n_test; ++i) {
        Scenario sc = sample_scenario(net, cfg.bounds, rng);
        CaseResult c;
        c.case_id = i;

        PowerFlowSolution base = solve(net, base_settings, sc.operating_point(), cfg.solver);
        if (base.status == SolveStatus::diverged) {
            c.base_diverged = true;
            out.cases.push_back(c);
            continue;
        }
        c.p_loss_base_kw = base.total_loss_kw;
        c.viol_base = violation_amount(net, base, cfg.reward);
        const EnvState state = extract_state(net, base);

        const auto t0 = std::chrono::steady_clock::now();
        const JointAction action = act_greedy(pool, state);
        const DeviceSettings settings = decode_action(descriptor, net, action);
        PowerFlowSolution ctrl = solve(net, settings, sc.operating_point(), cfg.solver);
        const auto t1 = std::chrono::steady_clock::now();
        c.latency_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

        if (ctrl.status == SolveStatus::diverged) {
            c.ctrl_diverged = true;
            out.cases.push_back(c);
            continue;
        }
        c.p_loss_ctrl_kw = ctrl.total_loss_kw;
        c.viol_ctrl = violation_amount(net, ctrl, cfg.reward);
        c.delta_p_kw = c.p_loss_base_kw - c.p_loss_ctrl_kw;
        out.cases.push_back(c);
    }
    out.report = aggregate(out.cases);
    return out;
}

// ---- machine-readable outputs ----

namespace detail {

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace detail

inline std::string cases_csv(const std::vector<CaseResult>& cases) {
    std::string s = "case_id,p_loss_base_kw,p_loss_ctrl_kw,delta_p_kw,viol_base,viol_ctrl,latency_ms\n";
    for (const auto& c : cases) {
        s += std::to_string(c.case_id) + ',' + detail::fmt(c.p_loss_base_kw) + ',' +
             detail::fmt(c.p_loss_ctrl_kw) + ',' + detail::fmt(c.delta_p_kw) + ',' +
             detail::fmt(c.viol_base) + ',' + detail::fmt(c.viol_ctrl) + ',' +
             detail::fmt(c.latency_ms) + '\n';
    }
    return s;
}

inline std::string training_log_csv(const TrainingLog& log) {
    std::string s = "episode,reward,loss_kw,violation,epsilon\n";
    for (const auto& r : log)
        s += std::to_string(r.episode) + ',' + detail::fmt(r.reward) + ',' +
             detail::fmt(r.loss_kw) + ',' + detail::fmt(r.violation) + ',' +
             detail::fmt(r.epsilon) + '\n';
    return s;
}

inline nlohmann::json report_json(const EvalReport& r) {
    return {{"n_test", r.n_test},
            {"m_v", r.m_v},
            {"n_v", r.n_v},
            {"s_v", r.s_v},
            {"mean_delta_p_kw", r.mean_delta_p_kw},
            {"max_delta_p_kw", r.max_delta_p_kw},
            {"frac_delta_p_positive", r.frac_delta_p_positive},
            {"mean_latency_ms", r.mean_latency_ms},
            {"diverged_cases", r.diverged_cases}};
}

}  // namespace vvo
