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
 * Noiseless single-qubit teleportation over a simulated Bell pair.
 *
 * Register layout: qubit 0 carries the message, qubits 1 (sender half) and
 * 2 (receiver half) hold the shared Bell pair (|00> + |11>)/sqrt(2).
 */
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qfl/qweights.hpp"
#include "qfl/statevec.hpp"

namespace qfl {

struct BellOutcome {
    int m1 = 0; ///< message qubit
    int m2 = 0; ///< sender's Bell half
    friend bool operator==(const BellOutcome &, const BellOutcome &) = default;
};

struct TeleportRecord {
    BellOutcome bell_outcome;
    std::optional<double> input_angle;
    StateVector recovered_state = zero_state(1);
    double fidelity = 0.0;
};

namespace detail {

inline constexpr std::size_t kMsg = 0;
inline constexpr std::size_t kSender = 1;
inline constexpr std::size_t kReceiver = 2;

inline StateVector entangle_for_teleport(const StateVector &message) {
    StateVector reg = tensor(message, zero_state(2));
    reg = apply_gate(reg, GateOp::h(kSender));
    reg = apply_gate(reg, GateOp::cnot(kSender, kReceiver));
    reg = apply_gate(reg, GateOp::cnot(kMsg, kSender));
    return apply_gate(reg, GateOp::h(kMsg));
}

inline TeleportRecord finish_teleport(const StateVector &message,
                                      const StateVector &collapsed,
                                      BellOutcome outcome) {
    // After the Bell measurement the register is |m1 m2> (x) |c>.
    const std::size_t base =
        (static_cast<std::size_t>(outcome.m1) << 2) |
        (static_cast<std::size_t>(outcome.m2) << 1);
    StateVector receiver(std::vector<Complex>{collapsed[base], collapsed[base | 1]});
    if (outcome.m2) {
        receiver = apply_gate(receiver, GateOp::x(0));
    }
    if (outcome.m1) {
        receiver = apply_gate(receiver, GateOp::z(0));
    }
    TeleportRecord rec{outcome, std::nullopt, receiver, 0.0};
    rec.fidelity = fidelity(message, receiver);
    return rec;
}

inline void check_message(const StateVector &message) {
    if (message.num_qubits() != 1) {
        throw std::invalid_argument("teleport_state: message must be one qubit");
    }
    if (std::abs(message.norm() - 1.0) > kNormTolerance) {
        throw std::invalid_argument("teleport_state: message is not normalized");
    }
}

} // namespace detail

/// Teleports `message` with a sampled Bell measurement.
inline TeleportRecord teleport_state(const StateVector &message, Rng &rng) {
    detail::check_message(message);
    const StateVector reg = detail::entangle_for_teleport(message);
    const std::array<std::size_t, 2> targets{detail::kMsg, detail::kSender};
    auto [bits, collapsed] = measure_qubits(reg, targets, rng);
    return detail::finish_teleport(message, collapsed, {bits[0], bits[1]});
}

/// Teleports `message` with the Bell measurement forced to `outcome`. All
/// four outcomes have probability 1/4, so this never hits a null branch.
inline TeleportRecord teleport_state_forced(const StateVector &message,
                                            BellOutcome outcome) {
    detail::check_message(message);
    const StateVector reg = detail::entangle_for_teleport(message);
    const std::array<std::size_t, 2> targets{detail::kMsg, detail::kSender};
    const std::array<int, 2> bits{outcome.m1, outcome.m2};
    return detail::finish_teleport(message, project_qubits(reg, targets, bits),
                                   outcome);
}

class TeleportError : public ChannelError {
  public:
    TeleportError(std::size_t weight_index, const std::string &what)
        : ChannelError("teleport_weights: weight " +
                       std::to_string(weight_index) + ": " + what),
          index_(weight_index) {}
    [[nodiscard]] std::size_t weight_index() const noexcept { return index_; }

  private:
    std::size_t index_;
};

/// Sends every angle of `store` through its own teleportation, in
/// (layer, qubit, parameter) order, and rebuilds the store on the receiving
/// side from the recovered states. `records`, if given, receives one entry
/// per weight.
inline QuantumWeightStore
teleport_weights(const QuantumWeightStore &store, Rng &rng,
                 std::vector<TeleportRecord> *records = nullptr) {
    store.validate();
    QuantumWeightStore out = store;
    for (std::size_t i = 0; i < store.angles.size(); ++i) {
        const double angle = store.angles[i];
        TeleportRecord rec = teleport_state(weight_state(angle), rng);
        rec.input_angle = angle;
        try {
            out.angles[i] = decode_state(rec.recovered_state);
        } catch (const ChannelError &e) {
            throw TeleportError(i, e.what());
        }
        if (records) {
            records->push_back(std::move(rec));
        }
    }
    return out;
}

} // namespace qfl
