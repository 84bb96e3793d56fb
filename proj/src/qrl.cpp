#include "qdefense/qrl.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qdefense {

void TrainerConfig::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("alpha must lie in [0, 1]");
    }
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw std::invalid_argument("gamma must lie in [0, 1]");
    }
    if (!(circuit_lr > 0.0)) {
        throw std::invalid_argument("circuit_lr must be positive");
    }
    if (epochs < 0) {
        throw std::invalid_argument("epochs must be non-negative");
    }
    if (inner_steps < 0) {
        throw std::invalid_argument("inner_steps must be non-negative");
    }
}

Eigen::VectorXd target_distribution(const QTable& q, int s) {
    if (s < 0 || s >= q.values.rows()) {
        throw std::out_of_range("state index out of range");
    }
    Eigen::VectorXd clamped = q.values.row(s).transpose().cwiseMax(0.0);
    const double total = clamped.sum();
    if (total <= 0.0) {
        return Eigen::VectorXd::Constant(q.values.cols(),
                                         1.0 / static_cast<double>(q.values.cols()));
    }
    return clamped / total;
}

Eigen::VectorXd action_probabilities(const CircuitSpec& spec, const ThetaStack& theta,
                                     int state, int num_actions) {
    if (num_actions < 1) {
        throw std::invalid_argument("need at least one action");
    }
    const Eigen::VectorXd full =
        output_distribution(spec, theta, static_cast<std::uint64_t>(state));
    if (num_actions > full.size()) {
        throw std::invalid_argument("more actions than circuit outcomes");
    }
    Eigen::VectorXd masked = full.head(num_actions);
    const double total = masked.sum();
    if (total <= 0.0) {
        // all mass sits on masked-out outcomes
        return Eigen::VectorXd::Constant(num_actions, 1.0 / num_actions);
    }
    return masked / total;
}

int policy_action(const CircuitSpec& spec, const ThetaStack& theta, int state,
                  int num_actions) {
    const Eigen::VectorXd probs = action_probabilities(spec, theta, state, num_actions);
    int best = 0;
    for (int a = 1; a < probs.size(); ++a) {
        if (probs(a) > probs(best)) {
            best = a;
        }
    }
    return best;
}

QrlResult qrl_train(Environment& env, const CircuitSpec& spec,
                    const TrainerConfig& config) {
    config.validate();
    spec.validate();
    const int num_actions = env.num_actions();
    const Eigen::Index dim = Eigen::Index{1} << spec.num_qubits;
    if (num_actions > dim) {
        throw std::invalid_argument("environment has " + std::to_string(num_actions) +
                                    " actions but the circuit offers only " +
                                    std::to_string(dim) + " outcomes");
    }

    Rng rng(config.seed);
    QrlResult result;
    result.theta = random_theta_stack(spec, rng);
    result.q = QTable::zeros(env.num_states(), num_actions, config.alpha);
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> visits =
        Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(
            env.num_states(), num_actions);

    int state = env.reset();
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        StepOutcome outcome;
        const int action = uniform_index(rng, num_actions);
        try {
            outcome = env.step(state, action, rng);
        } catch (const std::exception& e) {
            throw std::runtime_error("qrl_train epoch " + std::to_string(epoch) + ": " +
                                     e.what());
        }

        result.q.learning_rate = decayed_learning_rate(config.alpha, visits(state, action));
        visits(state, action) += 1;
        result.q = q_update(result.q, state, action, outcome.next_state, outcome.reward,
                            config.gamma);

        // Targets for the decision state, padded with zeros for basis
        // outcomes that carry no action.
        Eigen::VectorXd targets = Eigen::VectorXd::Zero(dim);
        targets.head(num_actions) = target_distribution(result.q, state);

        for (int inner = 0; inner < config.inner_steps; ++inner) {
            const ThetaStack grad =
                gradient(spec, result.theta, static_cast<std::uint64_t>(state), targets);
            result.theta = gradient_step(result.theta, grad, config.circuit_lr);
        }
        const double fit = loss(
            output_distribution(spec, result.theta, static_cast<std::uint64_t>(state)),
            targets);
        if (!std::isfinite(fit)) {
            throw std::runtime_error("qrl_train diverged at epoch " +
                                     std::to_string(epoch));
        }

        TraceRecord record;
        record.epoch = epoch;
        record.state = state;
        record.action = action;
        record.reward = outcome.reward;
        record.distance = env.state_observable(outcome.next_state);
        record.v0 = result.q.values.row(0).maxCoeff();
        const Eigen::VectorXd probs =
            action_probabilities(spec, result.theta, state, num_actions);
        record.action_probabilities.assign(probs.data(), probs.data() + probs.size());
        result.trace.records.push_back(std::move(record));

        state = outcome.terminal ? env.reset() : outcome.next_state;
    }
    result.q.learning_rate = config.alpha;
    return result;
}

}  // namespace qdefense
