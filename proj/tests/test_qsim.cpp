#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "qdefense/io.hpp"
#include "qdefense/qsim.hpp"

using namespace qdefense;

namespace {

constexpr double kPi = std::numbers::pi;

double max_amplitude_error(const StateVector& a, const Eigen::VectorXcd& b) {
    return (a.amplitudes - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("rx examples") {
    const StateVector zero = ground_state(1);

    const StateVector half_turn = apply_rx(zero, 0, kPi);
    CHECK(std::abs(half_turn.amplitudes(0)) < 1e-15);
    CHECK(std::abs(half_turn.amplitudes(1) - std::complex<double>{0, -1}) < 1e-15);
    CHECK(probabilities(half_turn)(1) == doctest::Approx(1.0));

    Rng rng(5);
    const StateVector random = oracles::random_state(3, rng);
    CHECK(max_amplitude_error(apply_rx(random, 1, 0.0), random.amplitudes) < 1e-15);

    const Eigen::VectorXd equator = probabilities(apply_rx(zero, 0, kPi / 2));
    CHECK(equator(0) == doctest::Approx(0.5));
    CHECK(equator(1) == doctest::Approx(0.5));

    CHECK_THROWS_AS(apply_rx(zero, 1, 0.1), std::out_of_range);
}

TEST_CASE("ry and rz examples") {
    const StateVector zero = ground_state(1);

    const StateVector flipped = apply_ry(zero, 0, kPi);
    CHECK(probabilities(flipped)(1) == doctest::Approx(1.0));

    const StateVector phased = apply_rz(zero, 0, 1.234);
    const Eigen::VectorXd probs = probabilities(phased);
    CHECK(probs(0) == doctest::Approx(1.0));
    CHECK(probs(1) == doctest::Approx(0.0));

    const Eigen::VectorXd equator = probabilities(apply_ry(zero, 0, kPi / 2));
    CHECK(equator(0) == doctest::Approx(0.5));
    CHECK(equator(1) == doctest::Approx(0.5));
}

TEST_CASE("rot composes x, then y, then z") {
    Rng rng(9);
    const StateVector state = oracles::random_state(2, rng);

    CHECK(max_amplitude_error(apply_rot(state, 1, 0, 0, 0), state.amplitudes) < 1e-15);

    const StateVector via_rot = apply_rot(state, 0, kPi, 0, 0);
    const StateVector via_rx = apply_rx(state, 0, kPi);
    CHECK(max_amplitude_error(via_rot, via_rx.amplitudes) < 1e-15);

    // explicit 2x2 matrix-product oracle
    const StateVector zero = ground_state(1);
    const StateVector rotated = apply_rot(zero, 0, kPi / 3, kPi / 5, kPi / 7);
    const Eigen::Matrix2cd oracle =
        oracles::rz(kPi / 7) * oracles::ry(kPi / 5) * oracles::rx(kPi / 3);
    Eigen::VectorXcd expected(2);
    expected << oracle(0, 0), oracle(1, 0);
    CHECK(max_amplitude_error(rotated, expected) < 1e-12);

    const StateVector chained =
        apply_rz(apply_ry(apply_rx(zero, 0, kPi / 3), 0, kPi / 5), 0, kPi / 7);
    CHECK(max_amplitude_error(rotated, chained.amplitudes) < 1e-12);
}

TEST_CASE("cnot examples") {
    // |10> (qubit 1 set) -> |11>
    const StateVector flipped = apply_cnot(basis_encode(0b10, 2), 1, 0);
    CHECK(probabilities(flipped)(0b11) == doctest::Approx(1.0));

    const StateVector idle = apply_cnot(basis_encode(0b00, 2), 1, 0);
    CHECK(probabilities(idle)(0b00) == doctest::Approx(1.0));

    // (|00> + |10>)/sqrt(2) -> (|00> + |11>)/sqrt(2)
    StateVector superposed = ground_state(2);
    superposed.amplitudes(0b00) = 1.0 / std::sqrt(2.0);
    superposed.amplitudes(0b10) = 1.0 / std::sqrt(2.0);
    const StateVector entangled = apply_cnot(superposed, 1, 0);
    CHECK(std::abs(entangled.amplitudes(0b00) - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(entangled.amplitudes(0b11) - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(entangled.amplitudes(0b10)) < 1e-15);

    CHECK_THROWS_AS(apply_cnot(superposed, 1, 1), std::invalid_argument);
}

TEST_CASE("hadamard examples") {
    const StateVector plus = apply_hadamard(ground_state(1), 0);
    CHECK(std::abs(plus.amplitudes(0) - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(plus.amplitudes(1) - 1.0 / std::sqrt(2.0)) < 1e-15);

    // amplitudes (a, b) map to ((a+b)/sqrt(2), (a-b)/sqrt(2))
    StateVector state = ground_state(1);
    state.amplitudes(0) = 0.6;
    state.amplitudes(1) = 0.8;
    const StateVector mixed = apply_hadamard(state, 0);
    CHECK(mixed.amplitudes(0).real() == doctest::Approx(1.4 / std::sqrt(2.0)));
    CHECK(mixed.amplitudes(1).real() == doctest::Approx(-0.2 / std::sqrt(2.0)));

    Rng rng(13);
    const StateVector random = oracles::random_state(3, rng);
    const StateVector twice = apply_hadamard(apply_hadamard(random, 2), 2);
    CHECK(max_amplitude_error(twice, random.amplitudes) < 1e-12);
}

TEST_CASE("probabilities examples") {
    StateVector state = ground_state(1);
    state.amplitudes(0) = 1.0 / std::sqrt(2.0);
    state.amplitudes(1) = std::complex<double>{0.0, 1.0 / std::sqrt(2.0)};
    const Eigen::VectorXd probs = probabilities(state);
    CHECK(probs(0) == doctest::Approx(0.5));
    CHECK(probs(1) == doctest::Approx(0.5));

    const Eigen::VectorXd indicator = probabilities(basis_encode(5, 3));
    CHECK(indicator(5) == doctest::Approx(1.0));
    CHECK(indicator.sum() == doctest::Approx(1.0));

    // Bloch example: colatitude pi/6, longitude pi/2
    const Eigen::VectorXd bloch =
        probabilities(bloch_state(BlochAngles{kPi / 6, kPi / 2}));
    CHECK(bloch(0) == doctest::Approx((1.0 + std::cos(kPi / 6)) / 2.0).epsilon(1e-12));
    CHECK(bloch(0) == doctest::Approx(0.9330127018922193).epsilon(1e-9));
    CHECK(bloch(1) == doctest::Approx(0.0669872981077807).epsilon(1e-9));
}

TEST_CASE("measure draws from the distribution") {
    Rng rng(1);
    for (int i = 0; i < 20; ++i) {
        CHECK(measure(basis_encode(3, 2), rng) == 3);
    }

    StateVector equal = ground_state(2);
    equal.amplitudes.setConstant(0.5);
    Eigen::Vector4i counts = Eigen::Vector4i::Zero();
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        counts(static_cast<int>(measure(equal, rng))) += 1;
    }
    double chi_square = 0.0;
    for (int outcome = 0; outcome < 4; ++outcome) {
        const double frequency = static_cast<double>(counts(outcome)) / draws;
        CHECK(std::abs(frequency - 0.25) <= 0.01);
        const double expected = draws / 4.0;
        chi_square += (counts(outcome) - expected) * (counts(outcome) - expected) /
                      expected;
    }
    CHECK(chi_square < 16.27);  // chi^2_3 at the 99.9th percentile

    // seeded determinism
    const StateVector rotated = apply_rx(ground_state(1), 0, kPi / 2);
    Rng rng_a(77), rng_b(77);
    for (int i = 0; i < 50; ++i) {
        CHECK(measure(rotated, rng_a) == measure(rotated, rng_b));
    }
}

TEST_CASE("bloch state poles and equator") {
    const StateVector north = bloch_state(BlochAngles{0.0, 0.0});
    CHECK(probabilities(north)(0) == doctest::Approx(1.0));

    const StateVector south = bloch_state(BlochAngles{kPi, 0.0});
    CHECK(probabilities(south)(1) == doctest::Approx(1.0));

    const StateVector equator = bloch_state(BlochAngles{kPi / 2, 0.0});
    CHECK(equator.amplitudes(0).real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(equator.amplitudes(1).real() == doctest::Approx(1.0 / std::sqrt(2.0)));

    CHECK_THROWS_AS(bloch_state(BlochAngles{-0.1, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(bloch_state(BlochAngles{0.1, 7.0}), std::invalid_argument);

    for (int k = 0; k <= 16; ++k) {
        const double theta = kPi * k / 16.0;
        CHECK(probabilities(bloch_state(BlochAngles{theta, 1.0}))(0) ==
              doctest::Approx(std::cos(theta / 2) * std::cos(theta / 2)));
    }
}

TEST_CASE("encodings") {
    CHECK(probabilities(basis_encode(0, 1))(0) == doctest::Approx(1.0));
    CHECK(probabilities(basis_encode(5, 3))(5) == doctest::Approx(1.0));
    CHECK_THROWS_AS(basis_encode(8, 3), std::out_of_range);

    Eigen::VectorXd basis = Eigen::VectorXd::Zero(8);
    basis(0) = 1.0;
    CHECK(probabilities(amplitude_encode(basis))(0) == doctest::Approx(1.0));

    Eigen::VectorXd vec(8);
    vec << 1, 2, 3, 4, 5, 6, 7, 8;
    vec.normalize();
    const StateVector encoded = amplitude_encode(vec);
    CHECK(encoded.num_qubits == 3);
    for (int i = 0; i < 8; ++i) {
        CHECK(encoded.amplitudes(i).real() == doctest::Approx(vec(i)));
        CHECK(encoded.amplitudes(i).imag() == 0.0);
    }

    Eigen::VectorXd unnormalized(2);
    unnormalized << 1, 1;
    CHECK_THROWS_AS(amplitude_encode(unnormalized), std::invalid_argument);
    Eigen::VectorXd odd(3);
    odd << 1, 0, 0;
    CHECK_THROWS_AS(amplitude_encode(odd), std::invalid_argument);
}

TEST_CASE("gates match Kronecker-expanded oracles on random states") {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + uniform_index(rng, 4);
        const StateVector state = oracles::random_state(n, rng);
        const double angle = uniform_angle(rng);
        const int qubit = uniform_index(rng, n);

        const Eigen::MatrixXcd rx_full = oracles::embed_single(oracles::rx(angle), qubit, n);
        CHECK(max_amplitude_error(apply_rx(state, qubit, angle),
                                  rx_full * state.amplitudes) < 1e-10);
        const Eigen::MatrixXcd ry_full = oracles::embed_single(oracles::ry(angle), qubit, n);
        CHECK(max_amplitude_error(apply_ry(state, qubit, angle),
                                  ry_full * state.amplitudes) < 1e-10);
        const Eigen::MatrixXcd rz_full = oracles::embed_single(oracles::rz(angle), qubit, n);
        CHECK(max_amplitude_error(apply_rz(state, qubit, angle),
                                  rz_full * state.amplitudes) < 1e-10);
        const Eigen::MatrixXcd h_full = oracles::embed_single(oracles::hadamard(), qubit, n);
        CHECK(max_amplitude_error(apply_hadamard(state, qubit),
                                  h_full * state.amplitudes) < 1e-10);

        CHECK(std::abs(apply_rx(state, qubit, angle).amplitudes.norm() - 1.0) < 1e-9);

        if (n >= 2) {
            int control = uniform_index(rng, n);
            int target = uniform_index(rng, n - 1);
            if (target >= control) {
                ++target;
            }
            const Eigen::MatrixXcd cnot_full = oracles::cnot_matrix(control, target, n);
            const StateVector applied = apply_cnot(state, control, target);
            CHECK(max_amplitude_error(applied, cnot_full * state.amplitudes) < 1e-10);
            CHECK(std::abs(applied.amplitudes.norm() - 1.0) < 1e-9);
            // self-inverse
            CHECK(max_amplitude_error(apply_cnot(applied, control, target),
                                      state.amplitudes) < 1e-12);
        }
    }
}

TEST_CASE("full-turn rotations negate amplitudes but fix probabilities") {
    Rng rng(31);
    const StateVector state = oracles::random_state(2, rng);
    for (auto gate : {apply_rx, apply_ry, apply_rz}) {
        const StateVector turned = gate(state, 0, 2.0 * kPi);
        CHECK(max_amplitude_error(turned, -state.amplitudes) < 1e-12);
        CHECK((probabilities(turned) - probabilities(state)).cwiseAbs().maxCoeff() <
              1e-12);
    }
}

TEST_CASE("statevector dump uses 17 significant digits") {
    StateVector state = ground_state(1);
    state.amplitudes(0) = std::complex<double>{0.6, 0.0};
    state.amplitudes(1) = std::complex<double>{0.0, -0.8};
    std::ostringstream os;
    write_statevector(os, state);
    CHECK(os.str() ==
          "0 0.59999999999999998 0\n"
          "1 0 -0.80000000000000004\n");
}
