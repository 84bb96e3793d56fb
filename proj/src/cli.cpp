#include "qdefense/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "qdefense/io.hpp"
#include "qdefense/mdp.hpp"
#include "qdefense/qrl.hpp"
#include "qdefense/scenario.hpp"
#include "qdefense/vqc.hpp"

namespace qdefense::cli {

namespace {

using nlohmann::json;

// splitmix64 step, used to derive independent per-cell seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Buffers whole documents and writes them in one shot, so a failing run
// leaves no partial file behind; anything already written is removed when a
// later step fails.
class OutputWriter {
public:
    void write(const std::string& path, const std::string& content) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open output file '" + path + "'");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            out.close();
            std::filesystem::remove(path);
            throw std::runtime_error("failed while writing '" + path + "'");
        }
        written_.push_back(path);
    }

    void discard_all() {
        for (const std::string& path : written_) {
            std::error_code ec;
            std::filesystem::remove(path, ec);
        }
        written_.clear();
    }

private:
    std::vector<std::string> written_;
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read config file '" + path + "'");
    }
    return json::parse(in);
}

void reject_unknown_fields(const json& config, const std::set<std::string>& allowed) {
    std::string unknown;
    for (const auto& item : config.items()) {
        if (!allowed.contains(item.key())) {
            if (!unknown.empty()) {
                unknown += ", ";
            }
            unknown += "'" + item.key() + "'";
        }
    }
    if (!unknown.empty()) {
        throw std::invalid_argument("unknown config field(s): " + unknown);
    }
}

template <typename T>
T get_or(const json& config, const std::string& key, T fallback) {
    if (config.contains(key)) {
        return config.at(key).get<T>();
    }
    return fallback;
}

// Flag values win over config values, config values over defaults.
struct GlobalArgs {
    std::string subcommand;
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<std::string> theta_out;
};

struct ResolvedOutput {
    std::uint64_t seed = 0;
    std::string format;  // "csv" or "json"
    std::string out;
};

ResolvedOutput resolve_output(const GlobalArgs& args, const json& config) {
    ResolvedOutput resolved;
    resolved.seed = args.seed.value_or(get_or<std::uint64_t>(config, "seed", 0));
    resolved.format = args.format.value_or(get_or<std::string>(config, "format", "csv"));
    if (resolved.format != "csv" && resolved.format != "json") {
        throw std::invalid_argument("format must be 'csv' or 'json', got '" +
                                    resolved.format + "'");
    }
    resolved.out = args.out.value_or(
        get_or<std::string>(config, "out", args.subcommand + "." + resolved.format));
    return resolved;
}

json command_config(const GlobalArgs& args, const std::set<std::string>& fields) {
    json config = json::object();
    if (args.config_path) {
        config = load_config(*args.config_path);
        if (!config.is_object()) {
            throw std::invalid_argument("config document must be a JSON object");
        }
    }
    std::set<std::string> allowed = fields;
    allowed.insert({"seed", "out", "format"});
    reject_unknown_fields(config, allowed);
    return config;
}

std::string dump_json(const json& doc) { return doc.dump(2) + "\n"; }

// ---- qgrid ---------------------------------------------------------------

int run_qgrid(const GlobalArgs& args, OutputWriter& writer) {
    const json config =
        command_config(args, {"gamma", "grid_step", "episodes", "alpha"});
    const ResolvedOutput resolved = resolve_output(args, config);
    const double gamma = get_or(config, "gamma", 0.9);
    const double grid_step = get_or(config, "grid_step", 0.1);
    const int episodes = get_or(config, "episodes", 0);
    const double alpha = get_or(config, "alpha", 0.05);

    if (!(grid_step > 0.0 && grid_step <= 1.0)) {
        throw std::invalid_argument("grid_step must lie in (0, 1]");
    }
    const int cells = static_cast<int>(std::lround(1.0 / grid_step));
    if (cells < 1 || std::abs(cells * grid_step - 1.0) > 1e-9) {
        throw std::invalid_argument("grid_step must divide 1 evenly");
    }
    if (episodes < 0) {
        throw std::invalid_argument("episodes must be non-negative");
    }

    std::string csv = "p,q,q0,q1,v0,best_action\n";
    json rows = json::array();
    for (int i = 0; i <= cells; ++i) {
        const double p = static_cast<double>(i) / cells;
        for (int j = 0; j <= cells; ++j) {
            const double q = static_cast<double>(j) / cells;
            const Mdp mdp = build_train_mdp(p, q, gamma);
            Eigen::MatrixXd q_values;
            double v0 = 0.0;
            if (episodes == 0) {
                const ValueIterationResult vi = value_iteration(mdp, 1e-10, 1000000);
                q_values = action_values(mdp, vi.values);
                v0 = vi.values(0);
            } else {
                MdpEnvironment env(mdp, 0);
                const std::uint64_t cell_seed = mix_seed(
                    resolved.seed,
                    static_cast<std::uint64_t>(i) * (static_cast<std::uint64_t>(cells) + 1) +
                        static_cast<std::uint64_t>(j));
                q_values = q_learning(env, episodes, alpha, gamma, cell_seed).q.values;
                v0 = q_values.row(0).maxCoeff();
            }
            const double q0 = q_values(0, 0);
            const double q1 = q_values(0, 1);
            const int best_action = q1 > q0 ? 1 : 0;
            csv += format_double(p) + ',' + format_double(q) + ',' + format_double(q0) +
                   ',' + format_double(q1) + ',' + format_double(v0) + ',' +
                   std::to_string(best_action) + '\n';
            rows.push_back({{"p", p},
                            {"q", q},
                            {"q0", q0},
                            {"q1", q1},
                            {"v0", v0},
                            {"best_action", best_action}});
        }
    }
    writer.write(resolved.out, resolved.format == "csv" ? csv : dump_json(rows));
    return 0;
}

// ---- train ---------------------------------------------------------------

int run_train(const GlobalArgs& args, OutputWriter& writer) {
    const json config = command_config(
        args, {"p", "q", "gamma", "alpha", "circuit_lr", "epochs", "inner_steps",
               "num_qubits", "num_layers", "theta_out"});
    const ResolvedOutput resolved = resolve_output(args, config);

    TrainerConfig trainer;
    trainer.alpha = get_or(config, "alpha", trainer.alpha);
    trainer.gamma = get_or(config, "gamma", trainer.gamma);
    trainer.circuit_lr = get_or(config, "circuit_lr", trainer.circuit_lr);
    trainer.epochs = get_or(config, "epochs", trainer.epochs);
    trainer.inner_steps = get_or(config, "inner_steps", trainer.inner_steps);
    trainer.seed = resolved.seed;

    CircuitSpec spec;
    spec.num_qubits = get_or(config, "num_qubits", 1);
    spec.num_layers = get_or(config, "num_layers", 1);
    spec.entangling = spec.num_qubits > 1;

    const double p = get_or(config, "p", 0.9);
    const double q = get_or(config, "q", 0.9);
    TrainEnvironment env(p, q);

    const QrlResult result = qrl_train(env, spec, trainer);

    const std::string theta_path = args.theta_out.value_or(
        get_or<std::string>(config, "theta_out", resolved.out + ".theta.json"));
    writer.write(resolved.out,
                 resolved.format == "csv"
                     ? trace_to_csv(result.trace, env.num_actions())
                     : dump_json(trace_to_json(result.trace, env.num_actions())));
    writer.write(theta_path, dump_json(theta_to_json(spec, result.theta)));
    return 0;
}

// ---- simulate ------------------------------------------------------------

AgentPolicy parse_agent_policy(const std::string& name) {
    if (name == "take_loop") {
        return AgentPolicy::take_loop;
    }
    if (name == "take_bypass") {
        return AgentPolicy::take_bypass;
    }
    if (name == "random") {
        return AgentPolicy::uniform_random;
    }
    throw std::invalid_argument(
        "agent_policy must be 'take_loop', 'take_bypass' or 'random', got '" + name +
        "'");
}

int run_simulate(const GlobalArgs& args, OutputWriter& writer) {
    const json config = command_config(args, {"p", "q", "tau", "epochs", "agent_policy"});
    const ResolvedOutput resolved = resolve_output(args, config);

    TrainWorld world;
    world.p = get_or(config, "p", 0.5);
    world.q = get_or(config, "q", 0.5);
    world.tau = get_or(config, "tau", 1);
    const int epochs = get_or(config, "epochs", 10000);
    const AgentPolicy policy =
        parse_agent_policy(get_or<std::string>(config, "agent_policy", "take_loop"));

    const std::vector<LapRecord> records =
        simulate_laps(world, policy, epochs, resolved.seed);
    writer.write(resolved.out, resolved.format == "csv"
                                   ? laps_to_csv(records)
                                   : dump_json(laps_to_json(records)));
    return 0;
}

// ---- attack-curve ----------------------------------------------------------

AttackCdfModel parse_cdf_model(const json& doc) {
    reject_unknown_fields(doc, {"family", "sigma", "nu", "scenario"});
    AttackCdfModel model;
    const std::string family = get_or<std::string>(doc, "family", "rayleigh");
    if (family == "rayleigh") {
        model.family = AttackCdfModel::Family::rayleigh;
    } else if (family == "rician") {
        model.family = AttackCdfModel::Family::rician;
    } else {
        throw std::invalid_argument("family must be 'rayleigh' or 'rician', got '" +
                                    family + "'");
    }
    model.sigma = get_or(doc, "sigma", 1.0);
    model.nu = get_or(doc, "nu", 0.0);
    const std::string scenario = get_or<std::string>(doc, "scenario", "classical");
    if (scenario == "classical") {
        model.scenario = AdversaryScenario::classical;
    } else if (scenario == "balanced") {
        model.scenario = AdversaryScenario::balanced;
    } else if (scenario == "quantum") {
        model.scenario = AdversaryScenario::quantum;
    } else {
        throw std::invalid_argument(
            "scenario must be 'classical', 'balanced' or 'quantum', got '" + scenario +
            "'");
    }
    model.validate();
    return model;
}

int run_attack_curve(const GlobalArgs& args, OutputWriter& writer) {
    const json config = command_config(args, {"investment_max", "points", "models"});
    const ResolvedOutput resolved = resolve_output(args, config);
    const double investment_max = get_or(config, "investment_max", 10.0);
    const int points = get_or(config, "points", 100);
    if (points < 2) {
        throw std::invalid_argument("points must be at least 2");
    }
    if (!(investment_max > 0.0)) {
        throw std::invalid_argument("investment_max must be positive");
    }

    std::vector<AttackCdfModel> models;
    if (config.contains("models")) {
        if (!config.at("models").is_array()) {
            throw std::invalid_argument("models must be a list");
        }
        for (const auto& entry : config.at("models")) {
            models.push_back(parse_cdf_model(entry));
        }
        if (models.empty()) {
            throw std::invalid_argument("models list must not be empty");
        }
    } else {
        const auto defaults = default_scenario_models();
        models.assign(defaults.begin(), defaults.end());
    }

    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int j = 0; j < points; ++j) {
        grid[static_cast<std::size_t>(j)] =
            investment_max * static_cast<double>(j) / (points - 1);
    }

    std::string csv = "investment,probability,scenario\n";
    json rows = json::array();
    for (const AttackCdfModel& model : models) {
        const char* name = scenario_name(model.scenario);
        for (const CurvePoint& point : attack_success_curve(model, grid)) {
            csv += format_double(point.investment) + ',' +
                   format_double(point.probability) + ',' + name + '\n';
            rows.push_back({{"investment", point.investment},
                            {"probability", point.probability},
                            {"scenario", name}});
        }
    }
    writer.write(resolved.out, resolved.format == "csv" ? csv : dump_json(rows));
    return 0;
}

// ---- velocity --------------------------------------------------------------

int run_velocity(const GlobalArgs& args, OutputWriter& writer) {
    const json config =
        command_config(args, {"velocity", "alpha_v", "beta_v", "launch_time",
                              "initial_gap", "tau", "step", "horizon"});
    const ResolvedOutput resolved = resolve_output(args, config);

    const double velocity = get_or(config, "velocity", 10.0);
    VelocityAttack attack;
    attack.alpha_v = get_or(config, "alpha_v", 0.1);
    attack.beta_v = get_or(config, "beta_v", 0.05);
    attack.launch_time = get_or(config, "launch_time", 0.0);
    const double initial_gap = get_or(config, "initial_gap", 5.0);
    const double tau = get_or(config, "tau", 1.0);
    const double step = get_or(config, "step", 0.01);
    const double horizon = get_or(config, "horizon", 100.0);

    const std::vector<VelocityTracePoint> trace =
        velocity_gap_trace(velocity, attack, initial_gap, tau, step, horizon);

    std::string csv = "time,velocity,gap\n";
    json rows = json::array();
    for (const VelocityTracePoint& point : trace) {
        csv += format_double(point.time) + ',' + format_double(point.velocity) + ',' +
               format_double(point.gap) + '\n';
        rows.push_back({{"time", point.time},
                        {"velocity", point.velocity},
                        {"gap", point.gap}});
    }
    writer.write(resolved.out, resolved.format == "csv" ? csv : dump_json(rows));
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{
        "qdefense: quantum reinforcement-learning defense toolkit for networked "
        "control systems. Emits plot-ready CSV/JSON artifacts; every subcommand is "
        "deterministic for a fixed config and seed."};
    app.require_subcommand(1);

    GlobalArgs args;
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out;
    std::string format;
    std::string theta_out;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path,
                        "JSON parameter document; unknown fields are rejected");
        cmd->add_option("--seed", seed, "RNG seed (default 0)");
        cmd->add_option("--out", out,
                        "output path (default <subcommand>.<format>)");
        cmd->add_option("--format", format, "output format (default csv)")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    CLI::App* qgrid = app.add_subcommand(
        "qgrid",
        "Q-values of the two-train MDP over the full (p, q) grid.\n"
        "Config fields: gamma (0.9), grid_step (0.1), episodes (0 = exact value\n"
        "iteration, otherwise Q-learning episodes per cell), alpha (0.05).\n"
        "Emits one row (p,q,q0,q1,v0,best_action) per grid cell.");
    add_common(qgrid);

    CLI::App* train = app.add_subcommand(
        "train",
        "Quantum RL training of the variational policy circuit on the two-train\n"
        "world. Config fields: p (0.9), q (0.9), gamma (0.9), alpha (0.05),\n"
        "circuit_lr (0.01), epochs (2000), inner_steps (10), num_qubits (1),\n"
        "num_layers (1), theta_out (<out>.theta.json). Emits the training trace\n"
        "and the learned rotation angles.");
    add_common(train);
    train->add_option("--theta-out", theta_out, "path for the learned angles JSON");

    CLI::App* simulate = app.add_subcommand(
        "simulate",
        "Lap-by-lap separation distances under a fixed agent policy.\n"
        "Config fields: p (0.5), q (0.5), tau (1), epochs (10000), agent_policy\n"
        "(take_loop | take_bypass | random). Emits epoch,distance,reward,violation.");
    add_common(simulate);

    CLI::App* attack_curve = app.add_subcommand(
        "attack-curve",
        "Attack-success probability vs. adversary investment for the classical,\n"
        "balanced and quantum scenarios. Config fields: investment_max (10),\n"
        "points (100), models (optional list of {family, sigma, nu, scenario}).");
    add_common(attack_curve);

    CLI::App* velocity = app.add_subcommand(
        "velocity",
        "Separation-gap collapse under a velocity-hijack attack. Config fields:\n"
        "velocity (10), alpha_v (0.1), beta_v (0.05), launch_time (0),\n"
        "initial_gap (5), tau (1), step (0.01), horizon (100). Emits\n"
        "time,velocity,gap rows up to the first violation or the horizon.");
    add_common(velocity);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    CLI::App* picked = app.get_subcommands().front();
    args.subcommand = picked->get_name();
    if (picked->count("--config") > 0) {
        args.config_path = config_path;
    }
    if (picked->count("--seed") > 0) {
        args.seed = seed;
    }
    if (picked->count("--out") > 0) {
        args.out = out;
    }
    if (picked->count("--format") > 0) {
        args.format = format;
    }
    if (picked == train && picked->count("--theta-out") > 0) {
        args.theta_out = theta_out;
    }

    OutputWriter writer;
    try {
        if (picked == qgrid) {
            return run_qgrid(args, writer);
        }
        if (picked == train) {
            return run_train(args, writer);
        }
        if (picked == simulate) {
            return run_simulate(args, writer);
        }
        if (picked == attack_curve) {
            return run_attack_curve(args, writer);
        }
        return run_velocity(args, writer);
    } catch (const std::exception& e) {
        writer.discard_all();
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("qdefense");
    for (const std::string& arg : args) {
        argv.push_back(arg.c_str());
    }
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace qdefense::cli
