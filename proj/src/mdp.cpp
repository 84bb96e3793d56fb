#include "qdefense/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qdefense {

namespace {

constexpr double kProbabilitySumTolerance = 1e-9;

void check_state(const Mdp& mdp, int s, const char* what) {
    if (s < 0 || s >= mdp.num_states) {
        throw std::out_of_range(std::string(what) + " state index " +
                                std::to_string(s) + " out of range [0, " +
                                std::to_string(mdp.num_states) + ")");
    }
}

void check_action(const Mdp& mdp, int a) {
    if (a < 0 || a >= mdp.num_actions) {
        throw std::out_of_range("action index " + std::to_string(a) +
                                " out of range [0, " +
                                std::to_string(mdp.num_actions) + ")");
    }
}

}  // namespace

Mdp Mdp::empty(int num_states, int num_actions, double discount) {
    if (num_states <= 0 || num_actions <= 0) {
        throw std::invalid_argument("MDP needs positive state and action counts");
    }
    if (!(discount >= 0.0 && discount <= 1.0)) {
        throw std::invalid_argument("discount must lie in [0, 1]");
    }
    Mdp mdp;
    mdp.num_states = num_states;
    mdp.num_actions = num_actions;
    mdp.discount = discount;
    mdp.transitions.assign(
        static_cast<std::size_t>(num_states),
        std::vector<std::vector<Transition>>(static_cast<std::size_t>(num_actions)));
    return mdp;
}

void Mdp::add(int s, int a, int s_next, double probability, double reward) {
    check_state(*this, s, "source");
    check_action(*this, a);
    check_state(*this, s_next, "successor");
    if (!(probability >= 0.0 && probability <= 1.0)) {
        throw std::invalid_argument("transition probability must lie in [0, 1]");
    }
    if (probability == 0.0) {
        return;
    }
    transitions[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)].push_back(
        Transition{s_next, probability, reward});
}

const std::vector<Transition>& Mdp::at(int s, int a) const {
    check_state(*this, s, "source");
    check_action(*this, a);
    return transitions[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
}

bool Mdp::is_terminal(int s) const {
    check_state(*this, s, "queried");
    for (const auto& list : transitions[static_cast<std::size_t>(s)]) {
        if (!list.empty()) {
            return false;
        }
    }
    return true;
}

void Mdp::validate() const {
    if (num_states <= 0 || num_actions <= 0) {
        throw std::invalid_argument("MDP needs positive state and action counts");
    }
    if (!(discount >= 0.0 && discount <= 1.0)) {
        throw std::invalid_argument("discount must lie in [0, 1]");
    }
    if (transitions.size() != static_cast<std::size_t>(num_states)) {
        throw std::invalid_argument("transition table has wrong state count");
    }
    for (int s = 0; s < num_states; ++s) {
        const auto& per_action = transitions[static_cast<std::size_t>(s)];
        if (per_action.size() != static_cast<std::size_t>(num_actions)) {
            throw std::invalid_argument("transition table has wrong action count at state " +
                                        std::to_string(s));
        }
        for (int a = 0; a < num_actions; ++a) {
            const auto& list = per_action[static_cast<std::size_t>(a)];
            if (list.empty()) {
                continue;
            }
            double sum = 0.0;
            for (const Transition& t : list) {
                if (t.next_state < 0 || t.next_state >= num_states) {
                    throw std::invalid_argument("successor out of range at (" +
                                                std::to_string(s) + ", " +
                                                std::to_string(a) + ")");
                }
                if (!(t.probability >= 0.0 && t.probability <= 1.0)) {
                    throw std::invalid_argument("probability out of [0, 1] at (" +
                                                std::to_string(s) + ", " +
                                                std::to_string(a) + ")");
                }
                sum += t.probability;
            }
            if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
                throw std::invalid_argument(
                    "probabilities at (" + std::to_string(s) + ", " + std::to_string(a) +
                    ") sum to " + std::to_string(sum) + ", expected 1 within 1e-9");
            }
        }
    }
}

QTable QTable::zeros(int num_states, int num_actions, double learning_rate) {
    if (num_states <= 0 || num_actions <= 0) {
        throw std::invalid_argument("QTable needs positive dimensions");
    }
    if (!(learning_rate >= 0.0 && learning_rate <= 1.0)) {
        throw std::invalid_argument("learning rate must lie in [0, 1]");
    }
    QTable q;
    q.values = Eigen::MatrixXd::Zero(num_states, num_actions);
    q.learning_rate = learning_rate;
    return q;
}

namespace {

// One Bellman backup of state s; returns -inf-free value and best action.
std::pair<double, int> bellman_backup(const Mdp& mdp, const Eigen::VectorXd& v, int s) {
    double best = 0.0;
    int best_action = -1;
    for (int a = 0; a < mdp.num_actions; ++a) {
        const auto& list = mdp.at(s, a);
        if (list.empty()) {
            continue;
        }
        double total = 0.0;
        for (const Transition& t : list) {
            total += t.probability * (t.reward + mdp.discount * v(t.next_state));
        }
        if (best_action < 0 || total > best) {
            best = total;
            best_action = a;
        }
    }
    return {best_action < 0 ? 0.0 : best, best_action};
}

}  // namespace

ValueIterationResult value_iteration(const Mdp& mdp, double tolerance,
                                     int max_iterations) {
    if (!(tolerance > 0.0)) {
        throw std::invalid_argument("tolerance must be positive");
    }
    if (max_iterations <= 0) {
        throw std::invalid_argument("max_iterations must be positive");
    }
    mdp.validate();

    ValueIterationResult result;
    result.values = Eigen::VectorXd::Zero(mdp.num_states);
    double residual = std::numeric_limits<double>::infinity();
    for (int iter = 1; iter <= max_iterations; ++iter) {
        Eigen::VectorXd next = result.values;
        for (int s = 0; s < mdp.num_states; ++s) {
            if (mdp.is_terminal(s)) {
                continue;  // terminal value stays 0
            }
            next(s) = bellman_backup(mdp, result.values, s).first;
        }
        residual = (next - result.values).lpNorm<Eigen::Infinity>();
        result.values = std::move(next);
        result.iterations = iter;
        result.residual = residual;
        result.residual_history.push_back(residual);
        if (residual <= tolerance) {
            for (int s = 0; s < mdp.num_states; ++s) {
                if (mdp.is_terminal(s)) {
                    continue;
                }
                result.policy.action_for_state[s] =
                    bellman_backup(mdp, result.values, s).second;
            }
            return result;
        }
    }
    throw ValueIterationError("value iteration did not reach tolerance " +
                                  std::to_string(tolerance) + " within " +
                                  std::to_string(max_iterations) +
                                  " sweeps (residual " + std::to_string(residual) + ")",
                              residual);
}

Eigen::MatrixXd action_values(const Mdp& mdp, const Eigen::VectorXd& state_values) {
    if (state_values.size() != mdp.num_states) {
        throw std::invalid_argument("state value vector size mismatch");
    }
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(mdp.num_states, mdp.num_actions);
    for (int s = 0; s < mdp.num_states; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            for (const Transition& t : mdp.at(s, a)) {
                q(s, a) += t.probability *
                           (t.reward + mdp.discount * state_values(t.next_state));
            }
        }
    }
    return q;
}

QTable q_update(const QTable& q, int s, int a, int s_next, double reward,
                double gamma) {
    if (s < 0 || s >= q.values.rows() || s_next < 0 || s_next >= q.values.rows()) {
        throw std::out_of_range("q_update state index out of range");
    }
    if (a < 0 || a >= q.values.cols()) {
        throw std::out_of_range("q_update action index out of range");
    }
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw std::invalid_argument("gamma must lie in [0, 1]");
    }
    const double v_next = q.values.row(s_next).maxCoeff();
    QTable out = q;
    out.values(s, a) = (1.0 - q.learning_rate) * q.values(s, a) +
                       q.learning_rate * (reward + gamma * v_next);
    return out;
}

int greedy_action(const QTable& q, int s) {
    if (s < 0 || s >= q.values.rows()) {
        throw std::out_of_range("state index out of range");
    }
    int best = 0;
    for (int a = 1; a < q.values.cols(); ++a) {
        if (q.values(s, a) > q.values(s, best)) {
            best = a;  // strict > keeps the lowest index on ties
        }
    }
    return best;
}

Policy greedy_policy(const QTable& q) {
    Policy policy;
    for (int s = 0; s < q.values.rows(); ++s) {
        policy.action_for_state[s] = greedy_action(q, s);
    }
    return policy;
}

Policy greedy_policy(const QTable& q, const Mdp& mdp) {
    if (q.values.rows() != mdp.num_states || q.values.cols() != mdp.num_actions) {
        throw std::invalid_argument("QTable dimensions do not match the MDP");
    }
    Policy policy;
    for (int s = 0; s < mdp.num_states; ++s) {
        if (!mdp.is_terminal(s)) {
            policy.action_for_state[s] = greedy_action(q, s);
        }
    }
    return policy;
}

MdpEnvironment::MdpEnvironment(Mdp mdp, int initial_state)
    : mdp_(std::move(mdp)), initial_state_(initial_state) {
    mdp_.validate();
    if (initial_state_ < 0 || initial_state_ >= mdp_.num_states) {
        throw std::out_of_range("initial state out of range");
    }
    if (mdp_.is_terminal(initial_state_)) {
        throw std::invalid_argument("initial state must be non-terminal");
    }
}

StepOutcome MdpEnvironment::step(int state, int action, Rng& rng) {
    const auto& list = mdp_.at(state, action);
    if (list.empty()) {
        throw std::invalid_argument("no transitions defined for state " +
                                    std::to_string(state) + ", action " +
                                    std::to_string(action));
    }
    const double u = uniform_unit(rng);
    double cumulative = 0.0;
    const Transition* chosen = &list.back();
    for (const Transition& t : list) {
        cumulative += t.probability;
        if (u < cumulative) {
            chosen = &t;
            break;
        }
    }
    return StepOutcome{chosen->next_state, chosen->reward,
                       mdp_.is_terminal(chosen->next_state)};
}

double decayed_learning_rate(double alpha, std::int64_t visits) {
    // Search-then-converge: ~alpha for the first couple hundred visits of a
    // cell, ~alpha*200/k afterwards (sum diverges, sum of squares converges).
    constexpr double kFlatVisits = 200.0;
    return alpha * kFlatVisits / (kFlatVisits + static_cast<double>(visits));
}

QLearningResult q_learning(Environment& env, int episodes, double alpha,
                           double gamma, std::uint64_t rng_seed,
                           int max_steps_per_episode) {
    if (episodes < 0) {
        throw std::invalid_argument("episodes must be non-negative");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("alpha must lie in [0, 1]");
    }
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw std::invalid_argument("gamma must lie in [0, 1]");
    }
    if (max_steps_per_episode <= 0) {
        throw std::invalid_argument("max_steps_per_episode must be positive");
    }

    QLearningResult result;
    result.q = QTable::zeros(env.num_states(), env.num_actions(), alpha);
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> visits =
        Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(
            env.num_states(), env.num_actions());
    Rng rng(rng_seed);

    for (int episode = 0; episode < episodes; ++episode) {
        try {
            int state = env.reset();
            double episode_return = 0.0;
            double discount_power = 1.0;
            for (int step = 0; step < max_steps_per_episode; ++step) {
                const int action = uniform_index(rng, env.num_actions());
                const StepOutcome outcome = env.step(state, action, rng);
                result.q.learning_rate =
                    decayed_learning_rate(alpha, visits(state, action));
                visits(state, action) += 1;
                result.q = q_update(result.q, state, action, outcome.next_state,
                                    outcome.reward, gamma);
                episode_return += discount_power * outcome.reward;
                discount_power *= gamma;
                if (outcome.terminal) {
                    break;
                }
                state = outcome.next_state;
            }
            result.episode_returns.push_back(episode_return);
        } catch (const std::exception& e) {
            throw std::runtime_error("q_learning episode " + std::to_string(episode) +
                                     ": " + e.what());
        }
    }
    result.q.learning_rate = alpha;
    return result;
}

}  // namespace qdefense
