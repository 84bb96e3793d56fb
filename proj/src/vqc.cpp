#include "qdefense/vqc.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qdefense {

namespace {

void check_stack(const CircuitSpec& spec, const ThetaStack& theta) {
    spec.validate();
    if (theta.size() != static_cast<std::size_t>(spec.num_layers)) {
        throw std::invalid_argument("theta stack has " + std::to_string(theta.size()) +
                                    " layers, circuit expects " +
                                    std::to_string(spec.num_layers));
    }
    for (const Theta& layer : theta) {
        if (layer.rows() != spec.num_qubits) {
            throw std::invalid_argument("theta layer row count does not match qubit count");
        }
        if (!layer.allFinite()) {
            throw std::invalid_argument("theta contains non-finite angles");
        }
    }
}

}  // namespace

void CircuitSpec::validate() const {
    if (num_qubits < 1 || num_qubits > kMaxQubits) {
        throw std::invalid_argument("circuit qubit count out of range");
    }
    if (num_layers < 1) {
        throw std::invalid_argument("circuit needs at least one layer");
    }
    if (num_qubits == 1 && entangling) {
        throw std::invalid_argument("single-qubit circuit cannot entangle");
    }
    if (num_qubits > 1 && !entangling) {
        throw std::invalid_argument("multi-qubit layers require the CNOT ring");
    }
}

StateVector layer_forward(const Theta& theta, const StateVector& input) {
    const int m = static_cast<int>(theta.rows());
    if (m != input.num_qubits) {
        throw std::invalid_argument("theta rows (" + std::to_string(m) +
                                    ") do not match register size (" +
                                    std::to_string(input.num_qubits) + ")");
    }
    StateVector state = input;
    for (int i = 0; i < m; ++i) {
        state = apply_rot(state, i, theta(i, 0), theta(i, 1), theta(i, 2));
    }
    if (m > 1) {
        for (int i = 0; i < m; ++i) {
            state = apply_cnot(state, i, (i + 1) % m);
        }
    }
    return state;
}

Eigen::Vector2d single_qubit_forward(double theta0, double theta1) {
    StateVector state = ground_state(1);
    state = apply_rx(state, 0, theta0);
    state = apply_ry(state, 0, theta1);
    return probabilities(state);
}

Eigen::VectorXd output_distribution(const CircuitSpec& spec, const ThetaStack& theta,
                                    std::uint64_t state_index) {
    check_stack(spec, theta);
    StateVector state = basis_encode(state_index, spec.num_qubits);
    for (const Theta& layer : theta) {
        state = layer_forward(layer, state);
    }
    return probabilities(state);
}

double loss(const Eigen::VectorXd& probs, const Eigen::VectorXd& targets) {
    if (probs.size() != targets.size()) {
        throw std::invalid_argument("distribution length mismatch");
    }
    if (std::abs(probs.sum() - 1.0) > 1e-6 || std::abs(targets.sum() - 1.0) > 1e-6) {
        throw std::invalid_argument("loss arguments must each sum to 1 within 1e-6");
    }
    return (probs - targets).squaredNorm();
}

ThetaStack gradient(const CircuitSpec& spec, const ThetaStack& theta,
                    std::uint64_t state_index, const Eigen::VectorXd& targets) {
    const Eigen::VectorXd base = output_distribution(spec, theta, state_index);
    if (targets.size() != base.size()) {
        throw std::invalid_argument("target length does not match circuit output");
    }
    const Eigen::VectorXd residual = base - targets;

    constexpr double kShift = std::numbers::pi / 2.0;
    ThetaStack grads(theta.size());
    ThetaStack shifted = theta;
    for (std::size_t layer = 0; layer < theta.size(); ++layer) {
        grads[layer] = Theta::Zero(theta[layer].rows(), 3);
        for (Eigen::Index row = 0; row < theta[layer].rows(); ++row) {
            for (Eigen::Index col = 0; col < 3; ++col) {
                const double original = shifted[layer](row, col);
                shifted[layer](row, col) = original + kShift;
                const Eigen::VectorXd plus =
                    output_distribution(spec, shifted, state_index);
                shifted[layer](row, col) = original - kShift;
                const Eigen::VectorXd minus =
                    output_distribution(spec, shifted, state_index);
                shifted[layer](row, col) = original;
                // dL/dtheta = sum_a 2 (p_a - t_a) * (plus_a - minus_a) / 2
                grads[layer](row, col) =
                    (residual.array() * (plus - minus).array()).sum();
            }
        }
    }
    return grads;
}

ThetaStack finite_difference_gradient(const CircuitSpec& spec, const ThetaStack& theta,
                                      std::uint64_t state_index,
                                      const Eigen::VectorXd& targets, double step) {
    if (!(step > 0.0)) {
        throw std::invalid_argument("finite-difference step must be positive");
    }
    check_stack(spec, theta);

    ThetaStack grads(theta.size());
    ThetaStack shifted = theta;
    for (std::size_t layer = 0; layer < theta.size(); ++layer) {
        grads[layer] = Theta::Zero(theta[layer].rows(), 3);
        for (Eigen::Index row = 0; row < theta[layer].rows(); ++row) {
            for (Eigen::Index col = 0; col < 3; ++col) {
                const double original = shifted[layer](row, col);
                shifted[layer](row, col) = original + step;
                const double plus =
                    loss(output_distribution(spec, shifted, state_index), targets);
                shifted[layer](row, col) = original - step;
                const double minus =
                    loss(output_distribution(spec, shifted, state_index), targets);
                shifted[layer](row, col) = original;
                grads[layer](row, col) = (plus - minus) / (2.0 * step);
            }
        }
    }
    return grads;
}

ThetaStack gradient_step(const ThetaStack& theta, const ThetaStack& gradient,
                         double learning_rate) {
    if (!(learning_rate >= 0.0)) {
        throw std::invalid_argument("learning rate must be non-negative");
    }
    if (theta.size() != gradient.size()) {
        throw std::invalid_argument("gradient stack shape mismatch");
    }
    ThetaStack out = theta;
    for (std::size_t layer = 0; layer < theta.size(); ++layer) {
        if (gradient[layer].rows() != theta[layer].rows()) {
            throw std::invalid_argument("gradient stack shape mismatch");
        }
        out[layer] -= learning_rate * gradient[layer];
    }
    return out;
}

ThetaStack random_theta_stack(const CircuitSpec& spec, Rng& rng) {
    spec.validate();
    ThetaStack stack(static_cast<std::size_t>(spec.num_layers));
    for (Theta& layer : stack) {
        layer = Theta::Zero(spec.num_qubits, 3);
        for (Eigen::Index row = 0; row < layer.rows(); ++row) {
            for (Eigen::Index col = 0; col < 3; ++col) {
                layer(row, col) = uniform_angle(rng);
            }
        }
    }
    return stack;
}

ThetaStack zero_theta_stack(const CircuitSpec& spec) {
    spec.validate();
    return ThetaStack(static_cast<std::size_t>(spec.num_layers),
                      Theta::Zero(spec.num_qubits, 3));
}

}  // namespace qdefense
