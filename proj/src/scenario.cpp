#include "qdefense/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

namespace qdefense {

namespace {

std::vector<std::vector<int>> track_successors(const TrackLayout& track) {
    std::vector<std::vector<int>> next(static_cast<std::size_t>(track.num_sections()));
    auto add_route = [&next](const std::vector<int>& route) {
        for (std::size_t i = 0; i < route.size(); ++i) {
            const int from = route[i];
            const int to = route[(i + 1) % route.size()];
            auto& list = next[static_cast<std::size_t>(from)];
            if (std::find(list.begin(), list.end(), to) == list.end()) {
                list.push_back(to);
            }
        }
    };
    add_route(track.loop_route);
    add_route(track.bypass_route);
    return next;
}

void check_section(const TrackLayout& track, int section) {
    if (section < 0 || section >= track.num_sections()) {
        throw std::out_of_range("track section " + std::to_string(section) +
                                " out of range");
    }
}

TrainAction other(TrainAction action) {
    return action == TrainAction::take_loop ? TrainAction::take_bypass
                                            : TrainAction::take_loop;
}

void check_probability(double value, const char* name) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
    }
}

}  // namespace

int separation_distance(const TrainWorld& world) {
    check_section(world.track, world.train1_pos);
    check_section(world.track, world.train2_pos);
    if (world.train2_pos == world.train1_pos) {
        return 0;
    }
    const auto next = track_successors(world.track);
    std::vector<int> dist(next.size(), -1);
    std::deque<int> frontier{world.train2_pos};
    dist[static_cast<std::size_t>(world.train2_pos)] = 0;
    while (!frontier.empty()) {
        const int section = frontier.front();
        frontier.pop_front();
        for (int successor : next[static_cast<std::size_t>(section)]) {
            if (dist[static_cast<std::size_t>(successor)] >= 0) {
                continue;
            }
            dist[static_cast<std::size_t>(successor)] =
                dist[static_cast<std::size_t>(section)] + 1;
            if (successor == world.train1_pos) {
                return dist[static_cast<std::size_t>(successor)];
            }
            frontier.push_back(successor);
        }
    }
    throw std::logic_error("track graph is not strongly connected");
}

int state_train2_position(int mdp_state) {
    switch (mdp_state) {
        case 0: return 7;
        case 1: return 1;
        case 2: return 5;
        default:
            throw std::out_of_range("train MDP state must be 0, 1 or 2");
    }
}

int state_separation(int mdp_state) {
    TrainWorld world;
    world.train1_pos = 0;
    world.train2_pos = state_train2_position(mdp_state);
    return separation_distance(world);
}

LapOutcome lap_outcome(TrainAction agent, TrainAction adversary) {
    if (agent == adversary) {
        return LapOutcome{0, 0};
    }
    if (agent == TrainAction::take_loop) {
        return LapOutcome{1, 4};  // adversary sits at section 1, gap 5
    }
    return LapOutcome{2, 2};  // adversary sits at section 5, gap 3
}

Mdp build_train_mdp(double p, double q, double gamma) {
    check_probability(p, "p");
    check_probability(q, "q");
    check_probability(gamma, "gamma");
    Mdp mdp = Mdp::empty(3, 2, gamma);
    mdp.add(0, static_cast<int>(TrainAction::take_loop), 0, p, 0.0);
    mdp.add(0, static_cast<int>(TrainAction::take_loop), 1, 1.0 - p, 4.0);
    mdp.add(0, static_cast<int>(TrainAction::take_bypass), 0, q, 0.0);
    mdp.add(0, static_cast<int>(TrainAction::take_bypass), 2, 1.0 - q, 2.0);
    mdp.validate();
    return mdp;
}

TrainEnvironment::TrainEnvironment(double p, double q) : p_(p), q_(q) {
    check_probability(p, "p");
    check_probability(q, "q");
}

StepOutcome TrainEnvironment::step(int state, int action, Rng& rng) {
    if (state != 0) {
        throw std::invalid_argument("no actions available in terminal state " +
                                    std::to_string(state));
    }
    if (action < 0 || action >= num_actions()) {
        throw std::out_of_range("action index out of range");
    }
    const auto agent = static_cast<TrainAction>(action);
    const double mimic_probability = agent == TrainAction::take_loop ? p_ : q_;
    const TrainAction adversary =
        uniform_unit(rng) < mimic_probability ? agent : other(agent);
    const LapOutcome outcome = lap_outcome(agent, adversary);
    return StepOutcome{outcome.mdp_state, static_cast<double>(outcome.reward),
                       outcome.mdp_state != 0};
}

double TrainEnvironment::state_observable(int state) const {
    return static_cast<double>(state_separation(state));
}

std::vector<LapRecord> simulate_laps(const TrainWorld& world, AgentPolicy policy,
                                     int epochs, std::uint64_t seed) {
    if (epochs <= 0) {
        throw std::invalid_argument("epochs must be positive");
    }
    check_probability(world.p, "p");
    check_probability(world.q, "q");

    Rng rng(seed);
    std::vector<LapRecord> records;
    records.reserve(static_cast<std::size_t>(epochs));
    for (int epoch = 0; epoch < epochs; ++epoch) {
        TrainAction agent = TrainAction::take_loop;
        switch (policy) {
            case AgentPolicy::take_loop: break;
            case AgentPolicy::take_bypass: agent = TrainAction::take_bypass; break;
            case AgentPolicy::uniform_random:
                agent = static_cast<TrainAction>(uniform_index(rng, 2));
                break;
        }
        const double mimic_probability =
            agent == TrainAction::take_loop ? world.p : world.q;
        const TrainAction adversary =
            uniform_unit(rng) < mimic_probability ? agent : other(agent);
        const LapOutcome outcome = lap_outcome(agent, adversary);
        const int distance = state_separation(outcome.mdp_state);
        records.push_back(
            LapRecord{epoch, distance, outcome.reward, distance <= world.tau});
    }
    return records;
}

double velocity_attack_speed(double v, const VelocityAttack& attack, double t,
                             double delta) {
    if (delta < 0.0) {
        throw std::invalid_argument("delta must be non-negative");
    }
    if (attack.alpha_v == 0.0) {
        return v;
    }
    const double exponent = attack.beta_v * (t + delta);
    if (exponent > 709.0) {
        throw std::overflow_error("velocity drift exponential overflows at exponent " +
                                  std::to_string(exponent));
    }
    const double result = v + attack.alpha_v * std::exp(exponent);
    if (!std::isfinite(result)) {
        throw std::overflow_error("velocity drift overflows");
    }
    return result;
}

std::vector<VelocityTracePoint> velocity_gap_trace(double nominal_velocity,
                                                   const VelocityAttack& attack,
                                                   double initial_gap, double tau,
                                                   double step, double horizon) {
    if (!(step > 0.0)) {
        throw std::invalid_argument("integration step must be positive");
    }
    if (horizon < 0.0) {
        throw std::invalid_argument("horizon must be non-negative");
    }

    std::vector<VelocityTracePoint> trace;
    double gap = initial_gap;
    double t = 0.0;
    auto pursuer_speed = [&](double time) {
        return time >= attack.launch_time
                   ? velocity_attack_speed(nominal_velocity, attack, time, 0.0)
                   : nominal_velocity;
    };
    trace.push_back(VelocityTracePoint{t, pursuer_speed(t), gap});
    if (gap <= tau) {
        return trace;  // already violated at launch
    }
    while (t < horizon) {
        // relative displacement over [t, t + step); nominal speeds cancel
        gap -= step * (pursuer_speed(t) - nominal_velocity);
        t += step;
        trace.push_back(VelocityTracePoint{t, pursuer_speed(t), gap});
        if (gap <= tau) {
            break;
        }
    }
    return trace;
}

std::optional<double> time_to_violation(double nominal_velocity,
                                        const VelocityAttack& attack,
                                        double initial_gap, double tau, double step,
                                        double horizon) {
    const auto trace =
        velocity_gap_trace(nominal_velocity, attack, initial_gap, tau, step, horizon);
    if (trace.back().gap <= tau) {
        return trace.back().time;
    }
    return std::nullopt;
}

double rayleigh_cdf(double x, double sigma) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("sigma must be positive");
    }
    if (x < 0.0) {
        throw std::domain_error("investment must be non-negative");
    }
    return -std::expm1(-x * x / (2.0 * sigma * sigma));
}

namespace {

// 1 - Q1(sqrt(2 lambda), sqrt(2 y)): the Rician CDF with lambda the Poisson
// parameter nu^2 / (2 sigma^2) and y = x^2 / (2 sigma^2). Integrating the
// modified-Bessel expansion of the density term by term gives
//   sum_k  e^-lambda lambda^k / k!  *  P(k + 1, y)
// with P the regularized lower incomplete gamma, evaluated by downward
// recurrence P(k + 1, y) = P(k, y) - e^-y y^k / k!. Terms are nonnegative,
// so the series is truncated once a term past the Poisson mode drops below
// 1e-12 of the running sum (or once the remaining Poisson tail is exhausted).
double marcum_q1_complement(double lambda, double y) {
    if (y <= 0.0) {
        return 0.0;
    }
    constexpr int kMaxTerms = 100000;
    constexpr double kRelativeCutoff = 1e-12;

    double poisson = std::exp(-lambda);       // e^-lambda lambda^k / k!
    double poisson_mass = poisson;            // cumulative Poisson weight
    double gamma_pmf = std::exp(-y);          // e^-y y^k / k!
    double gamma_cdf = 1.0 - gamma_pmf;       // P(k + 1, y)
    double sum = poisson * gamma_cdf;

    for (int k = 1; k <= kMaxTerms; ++k) {
        poisson *= lambda / k;
        poisson_mass += poisson;
        gamma_pmf *= y / k;
        gamma_cdf = std::max(gamma_cdf - gamma_pmf, 0.0);
        const double term = poisson * gamma_cdf;
        sum += term;
        const bool past_mode = static_cast<double>(k) > lambda;
        if (past_mode && (term < kRelativeCutoff * sum || 1.0 - poisson_mass < 1e-15)) {
            return std::clamp(sum, 0.0, 1.0);
        }
        if (!std::isfinite(term)) {
            break;
        }
    }
    throw std::runtime_error("Marcum Q series did not converge (lambda=" +
                             std::to_string(lambda) + ", y=" + std::to_string(y) + ")");
}

}  // namespace

double marcum_q1(double a, double b) {
    if (a < 0.0 || b < 0.0) {
        throw std::domain_error("Marcum Q arguments must be non-negative");
    }
    return 1.0 - marcum_q1_complement(a * a / 2.0, b * b / 2.0);
}

double rician_cdf(double x, double nu, double sigma) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("sigma must be positive");
    }
    if (nu < 0.0) {
        throw std::invalid_argument("nu must be non-negative");
    }
    if (x < 0.0) {
        throw std::domain_error("investment must be non-negative");
    }
    const double lambda = nu * nu / (2.0 * sigma * sigma);
    const double y = x * x / (2.0 * sigma * sigma);
    return marcum_q1_complement(lambda, y);
}

void AttackCdfModel::validate() const {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("sigma must be positive");
    }
    if (nu < 0.0) {
        throw std::invalid_argument("nu must be non-negative");
    }
    if (family == Family::rayleigh && nu != 0.0) {
        throw std::invalid_argument("Rayleigh model takes no noncentrality");
    }
}

double evaluate_cdf(const AttackCdfModel& model, double x) {
    model.validate();
    if (model.family == AttackCdfModel::Family::rayleigh) {
        return rayleigh_cdf(x, model.sigma);
    }
    return rician_cdf(x, model.nu, model.sigma);
}

std::vector<CurvePoint> attack_success_curve(const AttackCdfModel& model,
                                             const std::vector<double>& investments) {
    model.validate();
    std::vector<CurvePoint> curve;
    curve.reserve(investments.size());
    double previous = -1.0;
    for (double x : investments) {
        if (x < 0.0) {
            throw std::domain_error("investment grid must be non-negative");
        }
        if (x < previous) {
            throw std::invalid_argument("investment grid must be sorted ascending");
        }
        previous = x;
        curve.push_back(CurvePoint{x, evaluate_cdf(model, x)});
    }
    return curve;
}

std::array<AttackCdfModel, 3> default_scenario_models() {
    std::array<AttackCdfModel, 3> models;
    models[0].sigma = 3.0;
    models[0].scenario = AdversaryScenario::classical;
    models[1].sigma = 2.0;
    models[1].scenario = AdversaryScenario::balanced;
    models[2].sigma = 1.2;
    models[2].scenario = AdversaryScenario::quantum;
    return models;
}

const char* scenario_name(AdversaryScenario scenario) {
    switch (scenario) {
        case AdversaryScenario::classical: return "classical";
        case AdversaryScenario::balanced: return "balanced";
        case AdversaryScenario::quantum: return "quantum";
    }
    throw std::invalid_argument("unknown scenario");
}

}  // namespace qdefense
