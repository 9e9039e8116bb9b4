// Command-line harness around the vvo library: one-shot power flow, agent
// training, checkpoint evaluation, and baseline statistics.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vvo/vvo.hpp"

namespace fs = std::filesystem;
using namespace vvo;

namespace {

// Feeder paths resolve relative to VVO_FEEDER_DIR when the file is not found
// directly, so `--feeder ieee13.json` works from anywhere.
std::string resolve_feeder(const std::string& path) {
    if (fs::exists(path)) return path;
    if (const char* dir = std::getenv("VVO_FEEDER_DIR")) {
        const fs::path candidate = fs::path(dir) / path;
        if (fs::exists(candidate)) return candidate.string();
    }
    return path;  // let the parser produce the error message
}

std::string resolve_model(const std::string& path) {
    if (fs::is_directory(path)) return (fs::path(path) / "checkpoint.json").string();
    return path;
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
}

struct CommonOpts {
    std::string feeder;
    std::uint64_t seed = 0;
    double tol = 1e-6;
    int max_iter = 100;
    double penalty = 1000.0;

    EnvConfig env_config() const {
        EnvConfig cfg;
        cfg.solver.tolerance = tol;
        cfg.solver.max_iterations = max_iter;
        cfg.reward.penalty = penalty;
        return cfg;
    }
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--feeder", o.feeder, "feeder JSON file (searched in $VVO_FEEDER_DIR)")
        ->required();
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--tol", o.tol, "power flow convergence tolerance (p.u.)");
    cmd->add_option("--max-iter", o.max_iter, "power flow iteration cap");
    cmd->add_option("--penalty", o.penalty, "violation penalty M in the reward");
}

int cmd_solve(const CommonOpts& o) {
    const FeederNetwork net = to_per_unit(parse_feeder(resolve_feeder(o.feeder)));
    const EnvConfig cfg = o.env_config();
    const auto settings =
        decode_action(ActionSpaceDescriptor::build(net), net, baseline_settings(net));
    const auto sol = solve(net, settings, {}, cfg.solver);

    const char* status = sol.status == SolveStatus::converged     ? "converged"
                         : sol.status == SolveStatus::diverged    ? "diverged"
                                                                  : "max-iterations";
    std::printf("status: %s after %d iterations\n", status, sol.iterations);
    std::printf("%-10s %10s %10s %10s\n", "bus", "|Ua|", "|Ub|", "|Uc|");
    for (std::size_t k = 0; k < net.buses.size(); ++k) {
        std::string row[3] = {"-", "-", "-"};
        net.buses[k].phases.for_each([&](Phase p) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.5f", std::abs(sol.voltages[k][p]));
            row[int(p)] = buf;
        });
        std::printf("%-10s %10s %10s %10s\n", net.buses[k].id.c_str(), row[0].c_str(),
                    row[1].c_str(), row[2].c_str());
    }
    std::printf("total loss: %.4f kW (%.6f p.u.)\n", sol.total_loss_kw, sol.total_loss);
    std::printf("violation amount: %.6f p.u.\n", violation_amount(net, sol, cfg.reward));
    return sol.converged() ? 0 : 1;
}

int cmd_train(const CommonOpts& o, const TrainerConfig& tcfg_in, const std::string& out_dir,
              int steps_per_episode) {
    const FeederNetwork net = to_per_unit(parse_feeder(resolve_feeder(o.feeder)));
    TrainerConfig tcfg = tcfg_in;
    tcfg.seed = o.seed;
    tcfg.validate();

    EnvConfig cfg = o.env_config();
    cfg.steps_per_episode = steps_per_episode;

    AgentPool pool = AgentPool::make(net, tcfg);
    Environment env(net, cfg, o.seed + 1);
    const TrainingLog log = train(pool, env);

    const fs::path dir(out_dir);
    fs::create_directories(dir);
    save_checkpoint(pool, (dir / "checkpoint.json").string());
    write_file(dir / "training_log.csv", training_log_csv(log));
    std::printf("trained %d episodes over %d agents; wrote %s\n", tcfg.episodes, pool.size(),
                (dir / "checkpoint.json").string().c_str());
    if (!log.empty()) {
        double tail = 0.0;
        const std::size_t n = std::min<std::size_t>(log.size(), 100);
        for (std::size_t i = log.size() - n; i < log.size(); ++i) tail += log[i].reward;
        std::printf("mean reward over final %zu episodes: %.4f\n", n, tail / double(n));
    }
    return 0;
}

int cmd_eval(const CommonOpts& o, const std::string& model, int cases,
             const std::string& report_dir) {
    const FeederNetwork net = to_per_unit(parse_feeder(resolve_feeder(o.feeder)));
    const AgentPool pool = load_checkpoint(resolve_model(model), net);
    const EvalResult res = evaluate(net, pool, cases, o.seed, o.env_config());

    const nlohmann::json rj = report_json(res.report);
    if (!report_dir.empty()) {
        const fs::path dir(report_dir);
        fs::create_directories(dir);
        write_file(dir / "report.json", rj.dump(2) + "\n");
        write_file(dir / "cases.csv", cases_csv(res.cases));
    }
    std::cout << rj.dump(2) << "\n";
    return 0;
}

int cmd_baseline(const CommonOpts& o, int cases) {
    const FeederNetwork net = to_per_unit(parse_feeder(resolve_feeder(o.feeder)));
    const EnvConfig cfg = o.env_config();
    const auto settings =
        decode_action(ActionSpaceDescriptor::build(net), net, baseline_settings(net));

    Rng rng(o.seed);
    int violating = 0, diverged = 0;
    double sum_loss = 0.0, sum_viol = 0.0;
    for (int i = 0; i < cases; ++i) {
        const Scenario sc = sample_scenario(net, cfg.bounds, rng);
        const auto sol = solve(net, settings, sc.operating_point(), cfg.solver);
        if (sol.status == SolveStatus::diverged) {
            ++diverged;
            continue;
        }
        const double v = violation_amount(net, sol, cfg.reward);
        sum_loss += sol.total_loss_kw;
        sum_viol += v;
        if (v > 0.0) ++violating;
    }
    const int valid = cases - diverged;
    nlohmann::json j = {{"cases", cases},
                        {"diverged", diverged},
                        {"violating", violating},
                        {"violating_fraction", valid > 0 ? double(violating) / valid : 0.0},
                        {"mean_loss_kw", valid > 0 ? sum_loss / valid : 0.0},
                        {"mean_violation", valid > 0 ? sum_viol / valid : 0.0}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Volt-VAR optimization toolkit: three-phase power flow and "
                 "multi-agent Q-learning device control"};
    app.require_subcommand(1);

    CommonOpts solve_o, train_o, eval_o, base_o;
    TrainerConfig tcfg;
    std::string out_dir = "out";
    std::string model, report_dir;
    std::string optimizer = "sgd";
    int cases = 1000, steps_per_episode = 1;

    CLI::App* c_solve = app.add_subcommand("solve", "run one baseline power flow");
    add_common(c_solve, solve_o);

    CLI::App* c_train = app.add_subcommand("train", "train the agent pool");
    add_common(c_train, train_o);
    c_train->add_option("--episodes", tcfg.episodes, "training episodes (N_ep)");
    c_train->add_option("--lr", tcfg.learning_rate, "learning rate");
    c_train->add_option("--gamma", tcfg.discount, "discount factor");
    c_train->add_option("--decay", tcfg.decay, "epsilon decay per episode (eta)");
    c_train->add_option("--epsilon0", tcfg.epsilon0, "initial exploration rate");
    c_train->add_option("--minibatch", tcfg.minibatch, "minibatch size (N_d)");
    c_train->add_option("--buffer", tcfg.buffer_capacity, "replay buffer capacity (N_b)");
    c_train->add_option("--hidden", tcfg.hidden, "hidden layer sizes");
    c_train->add_option("--optimizer", optimizer, "sgd or adam");
    c_train->add_option("--target-sync", tcfg.target_sync,
                        "episodes between target-network syncs (0 = off)");
    c_train->add_flag("--sigmoid-output", tcfg.sigmoid_output, "sigmoid output activation");
    c_train->add_option("--steps", steps_per_episode, "control steps per episode");
    c_train->add_option("--out", out_dir, "output directory for checkpoint + log");

    CLI::App* c_eval = app.add_subcommand("eval", "evaluate a trained checkpoint");
    add_common(c_eval, eval_o);
    c_eval->add_option("--model", model, "checkpoint file or its directory")->required();
    c_eval->add_option("--cases", cases, "number of test cases (N_test)");
    c_eval->add_option("--report", report_dir, "directory for report.json + cases.csv");

    CLI::App* c_base = app.add_subcommand("baseline", "baseline-only statistics");
    add_common(c_base, base_o);
    c_base->add_option("--cases", cases, "number of test cases");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_solve->parsed()) return cmd_solve(solve_o);
        if (c_train->parsed()) {
            tcfg.optimizer = optimizer_parse(optimizer);
            return cmd_train(train_o, tcfg, out_dir, steps_per_episode);
        }
        if (c_eval->parsed()) return cmd_eval(eval_o, model, cases, report_dir);
        if (c_base->parsed()) return cmd_baseline(base_o, cases);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
