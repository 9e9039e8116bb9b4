#include <doctest.h>

#include <cmath>

#include "support/test_feeders.hpp"
#include "vvo/agents.hpp"

using namespace vvo;

namespace {

TrainerConfig tiny_config() {
    TrainerConfig cfg;
    cfg.episodes = 5;
    cfg.buffer_capacity = 50;
    cfg.minibatch = 4;
    cfg.hidden = {8};
    cfg.seed = 3;
    return cfg;
}

TransitionTuple dummy_transition(int tag) {
    TransitionTuple tr;
    tr.state = {double(tag)};
    tr.reward = tag;
    return tr;
}

}  // namespace

TEST_CASE("replay buffer evicts oldest first") {
    ReplayBuffer buf(3);
    for (int i = 0; i < 5; ++i) buf.push(dummy_transition(i));
    CHECK(buf.size() == 3);
    CHECK(buf.oldest().reward == doctest::Approx(2.0));
    CHECK(buf[2].reward == doctest::Approx(4.0));
    CHECK_THROWS_AS(ReplayBuffer(0), Error);

    Rng rng(1);
    auto sample = buf.sample(10, rng);
    CHECK(sample.size() == 10);
    for (const auto* t : sample) CHECK(t->reward >= 2.0);
}

TEST_CASE("epsilon decay: 0.999^1000 ~ 0.3677") {
    double eps = 1.0;
    for (int i = 0; i < 1000; ++i) eps = decay_epsilon(eps, 0.999);
    CHECK(eps == doctest::Approx(std::exp(1000.0 * std::log(0.999))));
    CHECK(eps == doctest::Approx(0.36770).epsilon(1e-4));
}

TEST_CASE("pool construction matches the action space") {
    const FeederNetwork net = testing::load_ieee13();
    const AgentPool pool = AgentPool::make(net, tiny_config());
    REQUIRE(pool.size() == 8);
    for (const auto& a : pool.agents) {
        CHECK(a.net.input_dim() == int(3 * net.buses.size()));
        CHECK(a.net.output_dim() == a.slot.cardinality);
    }
    CHECK(pool.epsilon == 1.0);
    CHECK(pool.feeder_hash == feeder_hash(net));
}

TEST_CASE("epsilon-greedy explores at the requested frequency") {
    const FeederNetwork net = testing::load_ieee13();
    const AgentPool pool = AgentPool::make(net, tiny_config());
    const EnvState state(std::size_t(3 * net.buses.size()), 1.0);
    const JointAction greedy = act_greedy(pool, state);

    Rng rng(17);
    int explored = 0, total = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        const JointAction a = select_actions(pool, state, 0.5, rng);
        for (std::size_t j = 0; j < a.size(); ++j) {
            // count only slots whose greedy action is distinguishable: a random
            // draw can also hit the greedy index, so compare via cardinality
            const int card = pool.agents[j].slot.cardinality;
            if (card < 16) continue;  // too likely to collide by chance
            ++total;
            if (a[j] != greedy[j]) ++explored;
        }
    }
    // P(differs) = 0.5 * (card-1)/card ~ 0.485 for card in {21, 33}
    const double freq = double(explored) / total;
    CHECK(freq == doctest::Approx(0.485).epsilon(0.03));

    CHECK(select_actions(pool, state, 0.0, rng) == greedy);
    CHECK_THROWS_AS(select_actions(pool, state, 1.5, rng), Error);
}

TEST_CASE("argmax breaks ties towards the lowest index") {
    CHECK(argmax_lowest({1.0, 3.0, 3.0, 2.0}) == 1);
    CHECK(argmax_lowest({5.0}) == 0);
    // invariant under adding a constant
    const std::vector<double> q = {0.3, -0.1, 0.9, 0.9};
    std::vector<double> shifted = q;
    for (auto& x : shifted) x += 123.0;
    CHECK(argmax_lowest(q) == argmax_lowest(shifted));
}

TEST_CASE("training runs, decays epsilon, and logs every episode") {
    const FeederNetwork net = testing::load_ieee13();
    TrainerConfig cfg = tiny_config();
    cfg.episodes = 12;
    AgentPool pool = AgentPool::make(net, cfg);
    Environment env(net, EnvConfig{}, 5);
    const TrainingLog log = train(pool, env);
    REQUIRE(log.size() == 12);
    for (int i = 0; i < 12; ++i) {
        CHECK(log[std::size_t(i)].episode == i + 1);
        CHECK(log[std::size_t(i)].epsilon ==
              doctest::Approx(std::pow(cfg.decay, double(i))));
        CHECK(std::isfinite(log[std::size_t(i)].reward));
    }
    CHECK(pool.episodes_trained == 12);
    CHECK(pool.epsilon == doctest::Approx(std::pow(cfg.decay, 12.0)));
}

TEST_CASE("training is deterministic in the seed") {
    const FeederNetwork net = testing::load_ieee13();
    auto run = [&] {
        AgentPool pool = AgentPool::make(net, tiny_config());
        Environment env(net, EnvConfig{}, 5);
        train(pool, env);
        return pool;
    };
    const AgentPool a = run();
    const AgentPool b = run();
    for (int j = 0; j < a.size(); ++j)
        CHECK(a.agents[std::size_t(j)].net.layers[0].w == b.agents[std::size_t(j)].net.layers[0].w);
}

TEST_CASE("gamma 0 regression drives Q towards the immediate reward") {
    // single-slot environment substitute: one capacitor only
    FeederNetwork net = testing::two_bus_feeder({0.01, 0.03}, 0.5, 0.3);
    net.capacitors.push_back({1, Phase::a, 100.0, 0.1});
    net.finalize();

    TrainerConfig cfg;
    cfg.episodes = 400;
    cfg.buffer_capacity = 200;
    cfg.minibatch = 8;
    cfg.hidden = {16};
    cfg.discount = 0.0;
    cfg.learning_rate = 0.01;
    cfg.decay = 1.0;  // keep exploring so both actions are seen
    cfg.seed = 9;
    AgentPool pool = AgentPool::make(net, cfg);
    Environment env(net, EnvConfig{}, 2);
    train(pool, env);

    // with gamma = 0 the Q values must approximate immediate rewards; the
    // capacitor-on action lowers losses here, so it must dominate
    env.begin_episode();
    const auto q = pool.agents[0].net.forward(env.state());
    REQUIRE(q.size() == 2);
    CHECK(q[1] > q[0]);
}

TEST_CASE("checkpoint round-trip preserves behaviour exactly") {
    const FeederNetwork net = testing::load_ieee13();
    TrainerConfig cfg = tiny_config();
    cfg.optimizer = OptimizerKind::adam;
    AgentPool pool = AgentPool::make(net, cfg);
    Environment env(net, EnvConfig{}, 5);
    train(pool, env);

    const nlohmann::json j = checkpoint_json(pool);
    CHECK(j.at("format") == "vvo-agent-pool-v1");
    const AgentPool restored = pool_from_json(j, net);
    CHECK(restored.epsilon == pool.epsilon);
    CHECK(restored.episodes_trained == pool.episodes_trained);
    CHECK(restored.config.optimizer == OptimizerKind::adam);

    EnvState state(std::size_t(3 * net.buses.size()), 0.97);
    CHECK(act_greedy(restored, state) == act_greedy(pool, state));
    for (int k = 0; k < pool.size(); ++k) {
        CHECK(restored.agents[std::size_t(k)].net.layers == pool.agents[std::size_t(k)].net.layers);
        CHECK(restored.agents[std::size_t(k)].opt.t == pool.agents[std::size_t(k)].opt.t);
    }
}

TEST_CASE("checkpoint refuses a different feeder") {
    const FeederNetwork net13 = testing::load_ieee13();
    const FeederNetwork net123 = testing::load_ieee123();
    const AgentPool pool = AgentPool::make(net13, tiny_config());
    const nlohmann::json j = checkpoint_json(pool);
    CHECK_THROWS_WITH_AS(pool_from_json(j, net123), doctest::Contains("different feeder"), Error);

    nlohmann::json bad = j;
    bad["format"] = "something-else";
    CHECK_THROWS_AS(pool_from_json(bad, net13), Error);
}

TEST_CASE("trainer config validation") {
    TrainerConfig cfg;
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = TrainerConfig{};
    cfg.discount = 1.5;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = TrainerConfig{};
    cfg.decay = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    CHECK_NOTHROW(TrainerConfig{}.validate());
}
