#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "qdefense/qsim.hpp"
#include "qdefense/random.hpp"

namespace qdefense {

// Rotation angles of one circuit layer: row i holds the x, y and z angles of
// the Rot gate on qubit i.
using Theta = Eigen::Matrix<double, Eigen::Dynamic, 3>;

// One Theta per layer.
using ThetaStack = std::vector<Theta>;

struct CircuitSpec {
    int num_qubits = 1;
    int num_layers = 1;
    bool entangling = false;  // CNOT ring; required on for multi-qubit circuits

    void validate() const;
};

// Per-qubit Rot gates followed (for 2+ qubits) by the CNOT ring
// control i -> target (i + 1) mod m, applied in ascending i.
StateVector layer_forward(const Theta& theta, const StateVector& input);

// Measurement probabilities of RY(theta1) * RX(theta0) |0>; component 0 is
// action "take loop", component 1 "take bypass".
Eigen::Vector2d single_qubit_forward(double theta0, double theta1);

// Basis-encodes state_index, applies every layer, returns the 2^m basis
// probabilities.
Eigen::VectorXd output_distribution(const CircuitSpec& spec, const ThetaStack& theta,
                                    std::uint64_t state_index);

// Squared-error distance between two distributions of equal length.
double loss(const Eigen::VectorXd& probs, const Eigen::VectorXd& targets);

// Partial derivatives of loss(output_distribution(...), targets) with respect
// to every angle, by the parameter-shift rule: each basis probability is an
// expectation of a projector, so d p / d theta = (p(+pi/2) - p(-pi/2)) / 2,
// chain-ruled through the squared error.
ThetaStack gradient(const CircuitSpec& spec, const ThetaStack& theta,
                    std::uint64_t state_index, const Eigen::VectorXd& targets);

// Central finite differences; the cross-check oracle for `gradient`.
ThetaStack finite_difference_gradient(const CircuitSpec& spec, const ThetaStack& theta,
                                      std::uint64_t state_index,
                                      const Eigen::VectorXd& targets,
                                      double step = 1e-6);

// Elementwise Theta <- Theta - learning_rate * gradient.
ThetaStack gradient_step(const ThetaStack& theta, const ThetaStack& gradient,
                         double learning_rate);

// Fresh stack with every angle uniform in [0, 2*pi), filled layer by layer,
// row-major within each layer.
ThetaStack random_theta_stack(const CircuitSpec& spec, Rng& rng);

ThetaStack zero_theta_stack(const CircuitSpec& spec);

}  // namespace qdefense
