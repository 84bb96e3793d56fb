#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "qdefense/mdp.hpp"
#include "qdefense/vqc.hpp"

namespace qdefense {

struct TrainerConfig {
    double alpha = 0.05;      // Q-learning rate
    double gamma = 0.9;       // discount
    double circuit_lr = 0.01; // gradient-descent rate for the circuit
    int epochs = 2000;        // one epoch = one environment transition
    int inner_steps = 10;     // gradient steps after each Q-update
    std::uint64_t seed = 0;

    void validate() const;
};

struct TraceRecord {
    int epoch = 0;
    int state = 0;
    int action = 0;
    double reward = 0.0;
    double distance = 0.0;  // scenario observable of the successor state
    double v0 = 0.0;        // max_a Q(0, a)
    std::vector<double> action_probabilities;
};

struct TrainingTrace {
    std::vector<TraceRecord> records;
};

// Normalized nonnegative part of Q row s: clamp(Q(s, a), 0) / sum of clamps.
// An all-zero (or all-negative) row falls back to the uniform distribution.
Eigen::VectorXd target_distribution(const QTable& q, int s);

// Circuit output for basis state `state`, restricted to the first
// num_actions outcomes and renormalized.
Eigen::VectorXd action_probabilities(const CircuitSpec& spec, const ThetaStack& theta,
                                     int state, int num_actions);

// Argmax of action_probabilities, lowest index on ties.
int policy_action(const CircuitSpec& spec, const ThetaStack& theta, int state,
                  int num_actions);

struct QrlResult {
    ThetaStack theta;
    QTable q;
    TrainingTrace trace;
};

// Quantum RL loop: per epoch, take a uniformly random action, update the
// Q-table on the observed transition, rebuild the current state's target
// distribution from the Q row, and run inner_steps parameter-shift descent
// steps pulling the circuit output toward it. Episodes restart on terminal
// states. Theta starts at uniformly random angles drawn from the run seed;
// the whole run is deterministic per seed. Environment failures rethrow with
// the epoch index attached, and a non-finite circuit loss aborts likewise.
QrlResult qrl_train(Environment& env, const CircuitSpec& spec,
                    const TrainerConfig& config);

}  // namespace qdefense
