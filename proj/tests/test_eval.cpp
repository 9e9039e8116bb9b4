#include <doctest.h>

#include <algorithm>

#include "support/test_feeders.hpp"
#include "vvo/eval.hpp"

using namespace vvo;

namespace {

AgentPool small_pool(const FeederNetwork& net, std::uint64_t seed = 4) {
    TrainerConfig cfg;
    cfg.hidden = {8};
    cfg.seed = seed;
    return AgentPool::make(net, cfg);
}

}  // namespace

TEST_CASE("baseline settings are the neutral joint action") {
    const FeederNetwork net = testing::load_ieee13();
    const auto d = ActionSpaceDescriptor::build(net);
    const DeviceSettings s = decode_action(d, net, baseline_settings(net));
    for (int c : s.capacitor_status) CHECK(c == 0);
    for (const auto& bank : s.regulator_ratio)
        for (double r : bank) CHECK(r == 1.0);
    for (double r : s.inverter_ratio) CHECK(r == 0.0);
}

TEST_CASE("evaluation report is self-consistent") {
    const FeederNetwork net = testing::load_ieee13();
    const AgentPool pool = small_pool(net);
    const EvalResult res = evaluate(net, pool, 50, 77, EnvConfig{});
    const EvalReport& r = res.report;

    REQUIRE(int(res.cases.size()) == 50);
    CHECK(r.n_test == 50);
    CHECK(r.m_v >= r.n_v);
    if (r.m_v > 0) CHECK(r.s_v == doctest::Approx(double(r.n_v) / r.m_v));
    CHECK(r.frac_delta_p_positive >= 0.0);
    CHECK(r.frac_delta_p_positive <= 1.0);
    CHECK(r.mean_latency_ms >= 0.0);

    int m_v = 0, n_v = 0;
    double max_dp = 0.0;
    for (const auto& c : res.cases) {
        if (c.base_diverged || c.ctrl_diverged) continue;
        CHECK(c.delta_p_kw == doctest::Approx(c.p_loss_base_kw - c.p_loss_ctrl_kw));
        max_dp = std::max(max_dp, c.delta_p_kw);
        if (c.viol_base > 0.0) {
            ++m_v;
            if (c.viol_ctrl == 0.0) ++n_v;
        }
    }
    CHECK(r.m_v == m_v);
    CHECK(r.n_v == n_v);
    CHECK(r.max_delta_p_kw == doctest::Approx(max_dp));
}

TEST_CASE("evaluation scenarios are deterministic in the seed") {
    const FeederNetwork net = testing::load_ieee13();
    const AgentPool pool = small_pool(net);
    const EvalResult a = evaluate(net, pool, 20, 5, EnvConfig{});
    const EvalResult b = evaluate(net, pool, 20, 5, EnvConfig{});
    for (std::size_t i = 0; i < a.cases.size(); ++i) {
        CHECK(a.cases[i].p_loss_base_kw == b.cases[i].p_loss_base_kw);
        CHECK(a.cases[i].p_loss_ctrl_kw == b.cases[i].p_loss_ctrl_kw);
        CHECK(a.cases[i].viol_base == b.cases[i].viol_base);
    }
}

TEST_CASE("evaluation rejects a pool built for another feeder") {
    const FeederNetwork net13 = testing::load_ieee13();
    const FeederNetwork net123 = testing::load_ieee123();
    const AgentPool pool = small_pool(net13);
    CHECK_THROWS_AS(evaluate(net123, pool, 5, 1, EnvConfig{}), Error);
}

TEST_CASE("per-case CSV has the documented schema") {
    const FeederNetwork net = testing::load_ieee13();
    const AgentPool pool = small_pool(net);
    const EvalResult res = evaluate(net, pool, 5, 2, EnvConfig{});
    const std::string csv = cases_csv(res.cases);
    CHECK(csv.rfind("case_id,p_loss_base_kw,p_loss_ctrl_kw,delta_p_kw,viol_base,viol_ctrl,latency_ms\n",
                    0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);  // header + 5 rows
    // identical runs differ at most in the latency column
    const std::string again = cases_csv(evaluate(net, pool, 5, 2, EnvConfig{}).cases);
    auto strip_latency = [](const std::string& s) {
        std::string out;
        std::size_t pos = 0;
        while (pos < s.size()) {
            const std::size_t eol = s.find('\n', pos);
            const std::string line = s.substr(pos, eol - pos);
            out += line.substr(0, line.rfind(','));
            out += '\n';
            pos = eol + 1;
        }
        return out;
    };
    CHECK(strip_latency(csv) == strip_latency(again));
}

TEST_CASE("training log CSV has the documented schema") {
    const FeederNetwork net = testing::load_ieee13();
    TrainerConfig cfg;
    cfg.hidden = {8};
    cfg.episodes = 3;
    cfg.seed = 1;
    AgentPool pool = AgentPool::make(net, cfg);
    Environment env(net, EnvConfig{}, 2);
    const std::string csv = training_log_csv(train(pool, env));
    CHECK(csv.rfind("episode,reward,loss_kw,violation,epsilon\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("report JSON carries every aggregate") {
    EvalReport r;
    r.n_test = 10;
    r.m_v = 4;
    r.n_v = 3;
    r.s_v = 0.75;
    r.mean_delta_p_kw = 1.5;
    const nlohmann::json j = report_json(r);
    CHECK(j.at("n_test") == 10);
    CHECK(j.at("s_v") == doctest::Approx(0.75));
    CHECK(j.contains("mean_latency_ms"));
    CHECK(j.contains("frac_delta_p_positive"));
    CHECK(j.contains("diverged_cases"));
}
