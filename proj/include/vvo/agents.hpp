#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vvo/env.hpp"
#include "vvo/feeder_json.hpp"
#include "vvo/mlp.hpp"
#include "vvo/replay.hpp"

namespace vvo {

struct TrainerConfig {
    double learning_rate = 1e-4;
    double discount = 0.95;       // gamma
    double decay = 0.999;         // eta, per-episode epsilon decay
    double epsilon0 = 1.0;
    int minibatch = 32;           // N_d
    int episodes = 8000;          // N_ep
    std::size_t buffer_capacity = 2000;  // N_b
    OptimizerKind optimizer = OptimizerKind::sgd;
    int target_sync = 0;          // episodes between target-network syncs; 0 = no target net
    std::vector<int> hidden = {128, 64};
    bool sigmoid_output = false;
    std::uint64_t seed = 0;

    void validate() const {
        if (learning_rate <= 0.0) throw Error("learning rate must be positive");
        if (discount < 0.0 || discount > 1.0) throw Error("discount must be in [0,1]");
        if (decay <= 0.0 || decay > 1.0) throw Error("decay must be in (0,1]");
        if (epsilon0 <= 0.0 || epsilon0 > 1.0) throw Error("epsilon0 must be in (0,1]");
        if (minibatch < 0 || episodes < 0) throw Error("invalid trainer config");
    }
};

inline double decay_epsilon(double eps_prev, double eta) { return eps_prev * eta; }

struct Agent {
    MlpNetwork net;
    Optimizer opt;
    ControlSlot slot;
};

// One DQN per control slot; all agents consume the same shared state.
struct AgentPool {
    std::vector<Agent> agents;
    ActionSpaceDescriptor descriptor;
    std::uint64_t feeder_hash = 0;
    TrainerConfig config;
    double epsilon = 1.0;
    int episodes_trained = 0;

    static AgentPool make(const FeederNetwork& net, const TrainerConfig& cfg) {
        cfg.validate();
        AgentPool pool;
        pool.descriptor = ActionSpaceDescriptor::build(net);
        pool.feeder_hash = ::vvo::feeder_hash(net);
        pool.config = cfg;
        pool.epsilon = cfg.epsilon0;
        Rng rng(cfg.seed);
        const int state_dim = static_cast<int>(3 * net.buses.size());
        for (const auto& slot : pool.descriptor.slots) {
            std::vector<int> dims = {state_dim};
            dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
            dims.push_back(slot.cardinality);
            Agent a{MlpNetwork::make(dims, rng,
                                     cfg.sigmoid_output ? Activation::sigmoid
                                                        : Activation::linear),
                    Optimizer{}, slot};
            a.opt = Optimizer::make(cfg.optimizer, a.net);
            pool.agents.push_back(std::move(a));
        }
        return pool;
    }

    int size() const { return static_cast<int>(agents.size()); }
};

inline int argmax_lowest(const std::vector<double>& q) {
    int best = 0;
    for (int i = 1; i < int(q.size()); ++i)
        if (q[std::size_t(i)] > q[std::size_t(best)]) best = i;
    return best;
}

// Per-agent epsilon-greedy selection over the shared state.
inline JointAction select_actions(const AgentPool& pool, const EnvState& state, double epsilon,
                                  Rng& rng) {
    if (epsilon < 0.0 || epsilon > 1.0) throw Error("epsilon must be in [0,1]");
    JointAction a(pool.agents.size());
    for (std::size_t j = 0; j < pool.agents.size(); ++j) {
        if (rng.uniform() < epsilon)
            a[j] = rng.index(pool.agents[j].slot.cardinality);
        else
            a[j] = argmax_lowest(pool.agents[j].net.forward(state));
    }
    return a;
}

inline JointAction act_greedy(const AgentPool& pool, const EnvState& state) {
    JointAction a(pool.agents.size());
    for (std::size_t j = 0; j < pool.agents.size(); ++j)
        a[j] = argmax_lowest(pool.agents[j].net.forward(state));
    return a;
}

struct EpisodeRecord {
    int episode = 0;
    double reward = 0.0;
    double loss_kw = 0.0;
    double violation = 0.0;
    double epsilon = 0.0;
};

using TrainingLog = std::vector<EpisodeRecord>;

// Offline training loop: epsilon-greedy joint action, environment step,
// replay storage, then one Bellman-target minibatch update per agent.
inline TrainingLog train(AgentPool& pool, Environment& env) {
    const TrainerConfig& cfg = pool.config;
    TrainingLog log;
    if (cfg.episodes == 0) return log;
    log.reserve(std::size_t(cfg.episodes));

    ReplayBuffer buffer(cfg.buffer_capacity);
    Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);

    std::vector<MlpNetwork> target_nets;
    const bool use_target = cfg.target_sync > 0;
    if (use_target)
        for (const auto& a : pool.agents) target_nets.push_back(a.net);

    for (int ep = 1; ep <= cfg.episodes; ++ep) {
        env.begin_episode();
        for (int k = 0; k < env.config().steps_per_episode; ++k) {
            const JointAction action = select_actions(pool, env.state(), pool.epsilon, rng);
            TransitionTuple tr = env.step(action);
            buffer.push(tr);

            for (std::size_t j = 0; j < pool.agents.size(); ++j) {
                auto& agent = pool.agents[j];
                const MlpNetwork& tnet = use_target ? target_nets[j] : agent.net;
                auto batch_ptrs = buffer.sample(std::size_t(cfg.minibatch), rng);
                batch_ptrs.push_back(&tr);  // always include the current transition
                std::vector<TrainSample> batch;
                batch.reserve(batch_ptrs.size());
                for (const auto* t : batch_ptrs) {
                    const auto q_next = tnet.forward(t->next_state);
                    const double target =
                        t->reward + cfg.discount * q_next[std::size_t(argmax_lowest(q_next))];
                    batch.push_back({t->state, t->action[j], target});
                }
                grad_step(agent.net, agent.opt, batch, cfg.learning_rate);
            }

            if (k == 0)
                log.push_back({pool.episodes_trained + ep, tr.reward, tr.loss_kw, tr.violation,
                               pool.epsilon});
        }
        pool.epsilon = decay_epsilon(pool.epsilon, cfg.decay);
        if (use_target && ep % cfg.target_sync == 0)
            for (std::size_t j = 0; j < pool.agents.size(); ++j) target_nets[j] = pool.agents[j].net;
    }
    pool.episodes_trained += cfg.episodes;
    return log;
}

// ---- checkpoint (self-describing JSON, full double precision) ----

namespace detail {

inline nlohmann::json slot_json(const ControlSlot& s) {
    const char* kind = s.kind == SlotKind::regulator ? "regulator"
                       : s.kind == SlotKind::capacitor ? "capacitor"
                                                       : "inverter";
    return {{"kind", kind},
            {"device", s.device},
            {"phase", std::string(1, phase_char(s.phase))},
            {"cardinality", s.cardinality}};
}

inline ControlSlot slot_from_json(const nlohmann::json& j) {
    ControlSlot s;
    const std::string kind = j.at("kind").get<std::string>();
    s.kind = kind == "regulator" ? SlotKind::regulator
             : kind == "capacitor" ? SlotKind::capacitor
                                   : SlotKind::inverter;
    s.device = j.at("device").get<int>();
    s.phase = phase_from_char(j.at("phase").get<std::string>().at(0));
    s.cardinality = j.at("cardinality").get<int>();
    return s;
}

inline nlohmann::json grads_json(const Gradients& g) {
    return {{"w", g.w}, {"b", g.b}};
}

inline Gradients grads_from_json(const nlohmann::json& j) {
    Gradients g;
    g.w = j.at("w").get<std::vector<std::vector<double>>>();
    g.b = j.at("b").get<std::vector<std::vector<double>>>();
    return g;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace detail

inline nlohmann::json checkpoint_json(const AgentPool& pool) {
    using nlohmann::json;
    json j;
    j["format"] = "vvo-agent-pool-v1";
    j["feeder_hash"] = detail::hash_hex(pool.feeder_hash);
    j["epsilon"] = pool.epsilon;
    j["episodes_trained"] = pool.episodes_trained;
    j["config"] = {{"learning_rate", pool.config.learning_rate},
                   {"discount", pool.config.discount},
                   {"decay", pool.config.decay},
                   {"epsilon0", pool.config.epsilon0},
                   {"minibatch", pool.config.minibatch},
                   {"episodes", pool.config.episodes},
                   {"buffer_capacity", pool.config.buffer_capacity},
                   {"optimizer", optimizer_name(pool.config.optimizer)},
                   {"target_sync", pool.config.target_sync},
                   {"hidden", pool.config.hidden},
                   {"sigmoid_output", pool.config.sigmoid_output},
                   {"seed", pool.config.seed}};
    j["slots"] = json::array();
    for (const auto& s : pool.descriptor.slots) j["slots"].push_back(detail::slot_json(s));
    j["agents"] = json::array();
    for (const auto& a : pool.agents) {
        json aj;
        aj["dims"] = a.net.dims();
        aj["output_activation"] =
            a.net.output_activation == Activation::sigmoid ? "sigmoid" : "linear";
        aj["layers"] = json::array();
        for (const auto& l : a.net.layers) aj["layers"].push_back({{"w", l.w}, {"b", l.b}});
        aj["optimizer"] = {{"kind", optimizer_name(a.opt.kind)}, {"t", a.opt.t}};
        if (a.opt.kind == OptimizerKind::adam) {
            aj["optimizer"]["m"] = detail::grads_json(a.opt.m);
            aj["optimizer"]["v"] = detail::grads_json(a.opt.v);
        }
        j["agents"].push_back(std::move(aj));
    }
    return j;
}

inline void save_checkpoint(const AgentPool& pool, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write checkpoint '" + path + "'");
    out << checkpoint_json(pool).dump(2) << "\n";
}

inline AgentPool pool_from_json(const nlohmann::json& j, const FeederNetwork& net) {
    try {
        if (j.at("format").get<std::string>() != "vvo-agent-pool-v1")
            throw Error("unrecognized checkpoint format");
        AgentPool pool;
        pool.feeder_hash = std::stoull(j.at("feeder_hash").get<std::string>(), nullptr, 16);
        const std::uint64_t expected = feeder_hash(net);
        if (pool.feeder_hash != expected)
            throw Error("checkpoint was trained on a different feeder (hash mismatch)");
        pool.epsilon = j.at("epsilon").get<double>();
        pool.episodes_trained = j.at("episodes_trained").get<int>();
        const auto& cj = j.at("config");
        pool.config.learning_rate = cj.at("learning_rate").get<double>();
        pool.config.discount = cj.at("discount").get<double>();
        pool.config.decay = cj.at("decay").get<double>();
        pool.config.epsilon0 = cj.at("epsilon0").get<double>();
        pool.config.minibatch = cj.at("minibatch").get<int>();
        pool.config.episodes = cj.at("episodes").get<int>();
        pool.config.buffer_capacity = cj.at("buffer_capacity").get<std::size_t>();
        pool.config.optimizer = optimizer_parse(cj.at("optimizer").get<std::string>());
        pool.config.target_sync = cj.at("target_sync").get<int>();
        pool.config.hidden = cj.at("hidden").get<std::vector<int>>();
        pool.config.sigmoid_output = cj.at("sigmoid_output").get<bool>();
        pool.config.seed = cj.at("seed").get<std::uint64_t>();

        for (const auto& sj : j.at("slots"))
            pool.descriptor.slots.push_back(detail::slot_from_json(sj));
        if (!(pool.descriptor == ActionSpaceDescriptor::build(net)))
            throw Error("checkpoint action space does not match this feeder's devices");

        for (const auto& aj : j.at("agents")) {
            Agent a;
            a.net.output_activation =
                aj.at("output_activation").get<std::string>() == "sigmoid" ? Activation::sigmoid
                                                                           : Activation::linear;
            const auto dims = aj.at("dims").get<std::vector<int>>();
            std::size_t l = 0;
            for (const auto& lj : aj.at("layers")) {
                DenseLayer layer;
                layer.in = dims.at(l);
                layer.out = dims.at(l + 1);
                layer.w = lj.at("w").get<std::vector<double>>();
                layer.b = lj.at("b").get<std::vector<double>>();
                if (int(layer.w.size()) != layer.in * layer.out ||
                    int(layer.b.size()) != layer.out)
                    throw Error("corrupt checkpoint: layer shape mismatch");
                a.net.layers.push_back(std::move(layer));
                ++l;
            }
            const auto& oj = aj.at("optimizer");
            a.opt.kind = optimizer_parse(oj.at("kind").get<std::string>());
            a.opt.t = oj.at("t").get<std::int64_t>();
            if (a.opt.kind == OptimizerKind::adam) {
                a.opt.m = detail::grads_from_json(oj.at("m"));
                a.opt.v = detail::grads_from_json(oj.at("v"));
            }
            a.slot = pool.descriptor.slots.at(pool.agents.size());
            if (a.net.output_dim() != a.slot.cardinality)
                throw Error("corrupt checkpoint: output dim does not match slot cardinality");
            pool.agents.push_back(std::move(a));
        }
        if (pool.agents.size() != pool.descriptor.slots.size())
            throw Error("corrupt checkpoint: agent count mismatch");
        return pool;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("corrupt checkpoint: ") + e.what());
    }
}

inline AgentPool load_checkpoint(const std::string& path, const FeederNetwork& net) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open checkpoint '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("corrupt checkpoint '" + path + "': " + e.what());
    }
    return pool_from_json(j, net);
}

}  // namespace vvo
