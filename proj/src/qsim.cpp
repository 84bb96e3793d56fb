#include "qdefense/qsim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qdefense {

namespace {

using Complex = std::complex<double>;

void check_register_size(int num_qubits) {
    if (num_qubits < 1 || num_qubits > kMaxQubits) {
        throw std::invalid_argument("register size " + std::to_string(num_qubits) +
                                    " outside [1, " + std::to_string(kMaxQubits) + "]");
    }
}

void check_qubit(const StateVector& state, int qubit) {
    if (qubit < 0 || qubit >= state.num_qubits) {
        throw std::out_of_range("qubit index " + std::to_string(qubit) +
                                " out of range [0, " +
                                std::to_string(state.num_qubits) + ")");
    }
}

}  // namespace

StateVector ground_state(int num_qubits) {
    check_register_size(num_qubits);
    StateVector state;
    state.num_qubits = num_qubits;
    state.amplitudes = Eigen::VectorXcd::Zero(Eigen::Index{1} << num_qubits);
    state.amplitudes(0) = Complex{1.0, 0.0};
    return state;
}

StateVector basis_encode(std::uint64_t index, int num_qubits) {
    check_register_size(num_qubits);
    const std::uint64_t dim = std::uint64_t{1} << num_qubits;
    if (index >= dim) {
        throw std::out_of_range("basis index " + std::to_string(index) +
                                " does not fit in " + std::to_string(num_qubits) +
                                " qubits");
    }
    StateVector state;
    state.num_qubits = num_qubits;
    state.amplitudes = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
    state.amplitudes(static_cast<Eigen::Index>(index)) = Complex{1.0, 0.0};
    return state;
}

StateVector amplitude_encode(const Eigen::VectorXd& vec) {
    const Eigen::Index len = vec.size();
    if (len < 2 || (len & (len - 1)) != 0) {
        throw std::invalid_argument("amplitude vector length must be a power of two >= 2");
    }
    if (std::abs(vec.norm() - 1.0) > 1e-6) {
        throw std::invalid_argument("amplitude vector must have unit norm within 1e-6");
    }
    int num_qubits = 0;
    while ((Eigen::Index{1} << num_qubits) < len) {
        ++num_qubits;
    }
    check_register_size(num_qubits);
    StateVector state;
    state.num_qubits = num_qubits;
    state.amplitudes = vec.cast<Complex>();
    return state;
}

StateVector bloch_state(const BlochAngles& angles) {
    constexpr double kPi = 3.14159265358979323846;
    if (!(angles.colatitude >= 0.0 && angles.colatitude <= kPi)) {
        throw std::invalid_argument("colatitude must lie in [0, pi]");
    }
    if (!(angles.longitude >= 0.0 && angles.longitude < 2.0 * kPi)) {
        throw std::invalid_argument("longitude must lie in [0, 2*pi)");
    }
    StateVector state;
    state.num_qubits = 1;
    state.amplitudes = Eigen::VectorXcd(2);
    state.amplitudes(0) = Complex{std::cos(angles.colatitude / 2.0), 0.0};
    state.amplitudes(1) = std::exp(Complex{0.0, angles.longitude}) *
                          std::sin(angles.colatitude / 2.0);
    return state;
}

Eigen::Matrix2cd rx_matrix(double angle) {
    const double h = 0.5 * angle;
    const Complex mis{0.0, -std::sin(h)};
    Eigen::Matrix2cd u;
    u << Complex{std::cos(h), 0.0}, mis,
         mis, Complex{std::cos(h), 0.0};
    return u;
}

Eigen::Matrix2cd ry_matrix(double angle) {
    const double h = 0.5 * angle;
    Eigen::Matrix2cd u;
    u << Complex{std::cos(h), 0.0}, Complex{-std::sin(h), 0.0},
         Complex{std::sin(h), 0.0}, Complex{std::cos(h), 0.0};
    return u;
}

Eigen::Matrix2cd rz_matrix(double angle) {
    const double h = 0.5 * angle;
    Eigen::Matrix2cd u = Eigen::Matrix2cd::Zero();
    u(0, 0) = std::exp(Complex{0.0, -h});
    u(1, 1) = std::exp(Complex{0.0, h});
    return u;
}

Eigen::Matrix2cd hadamard_matrix() {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Eigen::Matrix2cd u;
    u << Complex{inv_sqrt2, 0.0}, Complex{inv_sqrt2, 0.0},
         Complex{inv_sqrt2, 0.0}, Complex{-inv_sqrt2, 0.0};
    return u;
}

StateVector apply_single_qubit_gate(const StateVector& state, int qubit,
                                    const Eigen::Matrix2cd& gate) {
    check_qubit(state, qubit);
    StateVector out = state;
    const Eigen::Index stride = Eigen::Index{1} << qubit;
    const Eigen::Index dim = state.amplitudes.size();
    for (Eigen::Index base = 0; base < dim; ++base) {
        if (base & stride) {
            continue;
        }
        const Complex a0 = state.amplitudes(base);
        const Complex a1 = state.amplitudes(base | stride);
        out.amplitudes(base) = gate(0, 0) * a0 + gate(0, 1) * a1;
        out.amplitudes(base | stride) = gate(1, 0) * a0 + gate(1, 1) * a1;
    }
    return out;
}

StateVector apply_rx(const StateVector& state, int qubit, double angle) {
    return apply_single_qubit_gate(state, qubit, rx_matrix(angle));
}

StateVector apply_ry(const StateVector& state, int qubit, double angle) {
    return apply_single_qubit_gate(state, qubit, ry_matrix(angle));
}

StateVector apply_rz(const StateVector& state, int qubit, double angle) {
    return apply_single_qubit_gate(state, qubit, rz_matrix(angle));
}

StateVector apply_rot(const StateVector& state, int qubit, double theta_x,
                      double theta_y, double theta_z) {
    return apply_single_qubit_gate(
        state, qubit, rz_matrix(theta_z) * ry_matrix(theta_y) * rx_matrix(theta_x));
}

StateVector apply_hadamard(const StateVector& state, int qubit) {
    return apply_single_qubit_gate(state, qubit, hadamard_matrix());
}

StateVector apply_cnot(const StateVector& state, int control, int target) {
    check_qubit(state, control);
    check_qubit(state, target);
    if (control == target) {
        throw std::invalid_argument("CNOT control and target must differ");
    }
    StateVector out = state;
    const Eigen::Index control_bit = Eigen::Index{1} << control;
    const Eigen::Index target_bit = Eigen::Index{1} << target;
    const Eigen::Index dim = state.amplitudes.size();
    for (Eigen::Index i = 0; i < dim; ++i) {
        if ((i & control_bit) && !(i & target_bit)) {
            out.amplitudes(i) = state.amplitudes(i | target_bit);
            out.amplitudes(i | target_bit) = state.amplitudes(i);
        }
    }
    return out;
}

Eigen::VectorXd probabilities(const StateVector& state) {
    return state.amplitudes.cwiseAbs2();
}

std::uint64_t measure(const StateVector& state, Rng& rng) {
    const Eigen::VectorXd probs = probabilities(state);
    const double u = uniform_unit(rng);
    double cumulative = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        cumulative += probs(i);
        if (u < cumulative) {
            return static_cast<std::uint64_t>(i);
        }
    }
    return static_cast<std::uint64_t>(probs.size() - 1);
}

}  // namespace qdefense
