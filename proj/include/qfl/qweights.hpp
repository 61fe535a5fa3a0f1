// Copyright 2026 The qfl-ring Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file
 * Quantum weights: every trainable weight is held as the angle of an
 * RX-encoded qubit. The value fed to the circuit is gamma * <Z> of
 * RX(angle)|0>, so it always lies in [-gamma, gamma].
 */
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qfl/statevec.hpp"
#include "qfl/vqc.hpp"

namespace qfl {

struct QuantumWeightStore {
    ParamTensor angles;
    double gamma = std::numbers::pi;

    void validate() const {
        if (!(gamma > 0.0) || !std::isfinite(gamma)) {
            throw std::invalid_argument("QuantumWeightStore: gamma must be > 0");
        }
        for (double a : angles.flat()) {
            if (!std::isfinite(a)) {
                throw std::invalid_argument(
                    "QuantumWeightStore: non-finite angle");
            }
        }
    }
};

/// RX(angle)|0>.
inline StateVector weight_state(double angle) {
    return apply_gate(zero_state(1), GateOp::rx(0, angle));
}

/// <Z> of RX(angle)|0>, read off the simulated qubit.
inline double weight_expectation(double angle) {
    return expectation(weight_state(angle), ObservableSpec::pauli_z(0));
}

/// Effective circuit parameters gamma * <Z>.
inline ParamTensor materialize(const QuantumWeightStore &store) {
    store.validate();
    ParamTensor out(store.angles.layers(), store.angles.qubits());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = store.gamma * weight_expectation(store.angles[i]);
    }
    return out;
}

/// Chains dLoss/d(effective parameter) back to dLoss/d(angle). The inner
/// derivative d<Z>/d(angle) is itself a parameter-shift difference of two
/// weight-qubit expectations.
inline ParamTensor weight_gradient(const QuantumWeightStore &store,
                                   const ParamTensor &circuit_grad,
                                   const ShiftRule &rule = kPauliShift) {
    store.validate();
    if (!store.angles.same_shape(circuit_grad)) {
        throw std::invalid_argument("weight_gradient: shape mismatch");
    }
    ParamTensor out(store.angles.layers(), store.angles.qubits());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double a = store.angles[i];
        const double inner = rule.coefficient *
                             (weight_expectation(a + rule.shift) -
                              weight_expectation(a - rule.shift));
        out[i] = circuit_grad[i] * store.gamma * inner;
    }
    return out;
}

class ChannelError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kDecodeTolerance = 1e-6;

/// Recovers a from (<Z>, <Y>) of RX(a)|0>, where <Z> = cos a, <Y> = -sin a.
/// Returns a value in (-pi, pi]. Throws ChannelError when the pair cannot
/// come from such a state.
inline double decode_angle(double expect_z, double expect_y) {
    if (!std::isfinite(expect_z) || !std::isfinite(expect_y) ||
        std::abs(expect_z * expect_z + expect_y * expect_y - 1.0) >
            kDecodeTolerance) {
        throw ChannelError("decode_angle: expectation pair is not a pure "
                           "RX(a)|0> state");
    }
    const double a = std::atan2(-expect_y, expect_z);
    // atan2 returns -pi for (-1, +0); fold it onto the half-open interval.
    return a <= -std::numbers::pi ? std::numbers::pi : a;
}

/// Representative of `a` modulo 2*pi in (-pi, pi].
inline double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::remainder(a, two_pi);
    return r <= -std::numbers::pi ? r + two_pi : r;
}

/// Angle carried by a single-qubit state of the form RX(a)|0> (up to phase).
inline double decode_state(const StateVector &state) {
    if (state.num_qubits() != 1) {
        throw std::invalid_argument("decode_state: expects one qubit");
    }
    return decode_angle(expectation(state, ObservableSpec::pauli_z(0)),
                        expectation(state, ObservableSpec::pauli_y(0)));
}

} // namespace qfl
