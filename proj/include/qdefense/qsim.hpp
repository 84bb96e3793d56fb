#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>

#include "qdefense/random.hpp"

namespace qdefense {

// Dense statevector of a small qubit register. Basis index bit i is qubit i,
// qubit 0 least significant. Amplitudes of every valid state have unit
// Euclidean norm within 1e-9.
struct StateVector {
    int num_qubits = 1;
    Eigen::VectorXcd amplitudes;
};

// Dense storage caps the register size; the circuits here use 1-3 qubits.
inline constexpr int kMaxQubits = 12;

// Point on the Bloch sphere: colatitude theta in [0, pi], longitude in
// [0, 2*pi).
struct BlochAngles {
    double colatitude = 0.0;
    double longitude = 0.0;
};

StateVector ground_state(int num_qubits);

// |index> as an indicator amplitude vector; index must be < 2^num_qubits.
StateVector basis_encode(std::uint64_t index, int num_qubits);

// Real unit vector (norm within 1e-6 of 1, power-of-two length >= 2) loaded
// directly into the amplitudes.
StateVector amplitude_encode(const Eigen::VectorXd& vec);

// cos(theta/2)|0> + e^{i*longitude} sin(theta/2)|1>.
StateVector bloch_state(const BlochAngles& angles);

// Single-qubit rotation and Hadamard matrices.
Eigen::Matrix2cd rx_matrix(double angle);
Eigen::Matrix2cd ry_matrix(double angle);
Eigen::Matrix2cd rz_matrix(double angle);
Eigen::Matrix2cd hadamard_matrix();

// Gate applications are pure: each returns a new state.
StateVector apply_single_qubit_gate(const StateVector& state, int qubit,
                                    const Eigen::Matrix2cd& gate);
StateVector apply_rx(const StateVector& state, int qubit, double angle);
StateVector apply_ry(const StateVector& state, int qubit, double angle);
StateVector apply_rz(const StateVector& state, int qubit, double angle);

// RZ(theta_z) * RY(theta_y) * RX(theta_x) on the addressed qubit, x first.
StateVector apply_rot(const StateVector& state, int qubit, double theta_x,
                      double theta_y, double theta_z);

StateVector apply_hadamard(const StateVector& state, int qubit);

// Flips the target bit on basis states whose control bit is set.
StateVector apply_cnot(const StateVector& state, int control, int target);

// Squared magnitudes per basis index.
Eigen::VectorXd probabilities(const StateVector& state);

// Draws a basis index from probabilities(state); deterministic per seed.
std::uint64_t measure(const StateVector& state, Rng& rng);

}  // namespace qdefense
