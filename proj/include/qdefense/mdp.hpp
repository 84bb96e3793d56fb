#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdefense/random.hpp"

namespace qdefense {

// One entry of a transition list: taking the owning (state, action) pair
// moves to next_state with the given probability and immediate reward.
struct Transition {
    int next_state = 0;
    double probability = 0.0;
    double reward = 0.0;
};

// Finite Markov decision process. Transition lists are indexed
// [state][action]; rewards ride on the transitions, so R(s, a, s') is the
// reward of the matching list entry. States whose transition lists are all
// empty are terminal.
struct Mdp {
    int num_states = 0;
    int num_actions = 0;
    double discount = 0.9;
    std::vector<std::vector<std::vector<Transition>>> transitions;

    static Mdp empty(int num_states, int num_actions, double discount);

    // Appends a transition entry; zero-probability entries are dropped.
    void add(int s, int a, int s_next, double probability, double reward);

    const std::vector<Transition>& at(int s, int a) const;
    bool is_terminal(int s) const;

    // Throws std::invalid_argument on any invariant breach: per-(s, a)
    // probabilities must sum to 1 within 1e-9, successors must be in range,
    // and every non-terminal state needs at least one nonempty action list.
    void validate() const;
};

// Maps non-terminal states to recommended actions.
struct Policy {
    std::map<int, int> action_for_state;
};

// Per-(state, action) expected discounted return estimates.
struct QTable {
    Eigen::MatrixXd values;  // num_states x num_actions
    double learning_rate = 0.1;

    static QTable zeros(int num_states, int num_actions, double learning_rate);
};

class ValueIterationError : public std::runtime_error {
public:
    ValueIterationError(const std::string& message, double residual)
        : std::runtime_error(message), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

struct ValueIterationResult {
    Eigen::VectorXd values;
    Policy policy;
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> residual_history;  // sup-norm change per sweep
};

// Bellman fixed-point iteration from V = 0. Stops once the sup-norm change
// of a sweep is <= tolerance, which bounds the Bellman residual of the
// returned values by the same tolerance; throws ValueIterationError
// (carrying the last residual) if max_iterations sweeps do not get there.
// Terminal states keep value 0. Policy ties break toward the lowest action
// index.
ValueIterationResult value_iteration(const Mdp& mdp, double tolerance,
                                     int max_iterations);

// Q(s, a) = sum_s' P_a(s, s') * (R_a(s, s') + gamma * V(s')) for the given
// state values; rows of terminal states are zero.
Eigen::MatrixXd action_values(const Mdp& mdp, const Eigen::VectorXd& state_values);

// Single-cell Q-learning update
//   Q(s, a) <- (1 - alpha) Q(s, a) + alpha (reward + gamma max_a' Q(s', a'))
// with alpha = q.learning_rate. Every other cell is returned unchanged.
// Terminal successor states must keep all-zero rows (true under zero
// initialization, since no action is ever taken from them), which makes the
// bootstrap term vanish exactly where it should.
QTable q_update(const QTable& q, int s, int a, int s_next, double reward,
                double gamma);

int greedy_action(const QTable& q, int s);
Policy greedy_policy(const QTable& q);
// Restricts the policy domain to the MDP's non-terminal states.
Policy greedy_policy(const QTable& q, const Mdp& mdp);

struct StepOutcome {
    int next_state = 0;
    double reward = 0.0;
    bool terminal = false;
};

// Minimal episodic environment surface used by the learners.
class Environment {
public:
    virtual ~Environment() = default;
    virtual int num_states() const = 0;
    virtual int num_actions() const = 0;
    virtual int reset() = 0;
    virtual StepOutcome step(int state, int action, Rng& rng) = 0;
    // Scenario-defined per-state observable recorded in training traces
    // (the two-train world reports separation distance here).
    virtual double state_observable(int /*state*/) const { return 0.0; }
};

// Samples transitions of an Mdp; terminal states end the episode.
class MdpEnvironment final : public Environment {
public:
    explicit MdpEnvironment(Mdp mdp, int initial_state = 0);

    int num_states() const override { return mdp_.num_states; }
    int num_actions() const override { return mdp_.num_actions; }
    int reset() override { return initial_state_; }
    StepOutcome step(int state, int action, Rng& rng) override;

    const Mdp& mdp() const { return mdp_; }

private:
    Mdp mdp_;
    int initial_state_;
};

struct QLearningResult {
    QTable q;
    std::vector<double> episode_returns;  // discounted return per episode
};

// Tabular Q-learning with uniform-random exploration. The learning rate of
// cell (s, a) at its k-th visit is alpha * N0 / (N0 + k) with N0 = 200: flat
// near alpha early, ~1/k later, so it satisfies the Robbins-Monro conditions
// and the final table converges instead of hovering in a constant-alpha
// noise band. Episodes are truncated at max_steps_per_episode so that
// MDPs without reachable terminal states (e.g. p = q = 1 in the train
// scenario) still terminate. Deterministic for a fixed seed.
QLearningResult q_learning(Environment& env, int episodes, double alpha,
                           double gamma, std::uint64_t rng_seed,
                           int max_steps_per_episode = 100);

// The visit-indexed learning-rate schedule used by q_learning and the
// circuit trainer.
double decayed_learning_rate(double alpha, std::int64_t visits);

}  // namespace qdefense
