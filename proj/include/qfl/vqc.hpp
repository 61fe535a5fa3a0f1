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
 * Variational quantum circuit classifier.
 *
 * Circuit: RX(x_q) on every qubit, then per layer a ring of CNOTs
 * (q -> q+1 mod n) followed by ROT(phi, theta, omega) on every qubit.
 * Readout is <Z_q> per qubit. Gradients use the parameter-shift rule.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "qfl/statevec.hpp"

namespace qfl {

/// Dense [layers][qubits][3] array of rotation angles, (phi, theta, omega)
/// innermost.
class ParamTensor {
  public:
    ParamTensor() = default;
    ParamTensor(std::size_t layers, std::size_t qubits, double fill = 0.0)
        : layers_(layers), qubits_(qubits), values_(layers * qubits * 3, fill) {}
    ParamTensor(std::size_t layers, std::size_t qubits,
                std::vector<double> values)
        : layers_(layers), qubits_(qubits), values_(std::move(values)) {
        if (values_.size() != layers_ * qubits_ * 3) {
            throw std::invalid_argument("ParamTensor: size does not match shape");
        }
    }

    [[nodiscard]] std::size_t layers() const noexcept { return layers_; }
    [[nodiscard]] std::size_t qubits() const noexcept { return qubits_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

    [[nodiscard]] static constexpr std::size_t
    flat_index(std::size_t qubits, std::size_t layer, std::size_t qubit,
               std::size_t k) noexcept {
        return (layer * qubits + qubit) * 3 + k;
    }

    double &operator()(std::size_t l, std::size_t q, std::size_t k) {
        return values_[flat_index(qubits_, l, q, k)];
    }
    double operator()(std::size_t l, std::size_t q, std::size_t k) const {
        return values_[flat_index(qubits_, l, q, k)];
    }
    double &operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    [[nodiscard]] std::span<double> flat() noexcept { return values_; }
    [[nodiscard]] std::span<const double> flat() const noexcept { return values_; }
    [[nodiscard]] const std::vector<double> &values() const noexcept {
        return values_;
    }

    [[nodiscard]] bool same_shape(const ParamTensor &o) const noexcept {
        return layers_ == o.layers_ && qubits_ == o.qubits_;
    }

    friend bool operator==(const ParamTensor &, const ParamTensor &) = default;

  private:
    std::size_t layers_ = 0;
    std::size_t qubits_ = 0;
    std::vector<double> values_;
};

/// Parameter-shift rule for gates generated by a Pauli operator:
/// d/dp f(p) = c * (f(p + s) - f(p - s)) exactly.
struct ShiftRule {
    double shift = std::numbers::pi / 2.0;
    double coefficient = 0.5;
};

inline constexpr ShiftRule kPauliShift{};

struct VqcModel {
    std::size_t num_qubits = 2;
    std::size_t num_layers = 2;
    ParamTensor params{2, 2};

    VqcModel() = default;
    VqcModel(std::size_t qubits, std::size_t layers)
        : num_qubits(qubits), num_layers(layers), params(layers, qubits) {
        validate();
    }
    VqcModel(std::size_t qubits, std::size_t layers, ParamTensor p)
        : num_qubits(qubits), num_layers(layers), params(std::move(p)) {
        validate();
    }

    void validate() const {
        if (num_qubits < 1 || num_qubits > kMaxQubits) {
            throw std::invalid_argument("VqcModel: num_qubits must be in [1, 12]");
        }
        if (num_layers < 1) {
            throw std::invalid_argument("VqcModel: num_layers must be >= 1");
        }
        if (params.layers() != num_layers || params.qubits() != num_qubits) {
            throw std::invalid_argument("VqcModel: parameter shape mismatch");
        }
        for (double p : params.flat()) {
            if (!std::isfinite(p)) {
                throw std::invalid_argument("VqcModel: non-finite parameter");
            }
        }
    }
};

inline void check_features(std::size_t num_qubits,
                           std::span<const double> features) {
    if (features.size() != num_qubits) {
        throw std::invalid_argument(
            "encode: feature count must equal the number of qubits");
    }
    for (double f : features) {
        if (!std::isfinite(f)) {
            throw std::invalid_argument("encode: non-finite feature");
        }
    }
}

/// Variational RX encoder: (x) RX(features[q]) |0...0>.
inline StateVector encode(const VqcModel &model, std::span<const double> features) {
    check_features(model.num_qubits, features);
    StateVector state = zero_state(model.num_qubits);
    for (std::size_t q = 0; q < model.num_qubits; ++q) {
        state = apply_gate(state, GateOp::rx(q, features[q]));
    }
    return state;
}

/// Entangling block that opens every variational layer.
inline std::vector<GateOp> entangler(std::size_t num_qubits) {
    std::vector<GateOp> gates;
    if (num_qubits < 2) {
        return gates;
    }
    if (num_qubits == 2) {
        gates.push_back(GateOp::cnot(0, 1));
        gates.push_back(GateOp::cnot(1, 0));
        return gates;
    }
    for (std::size_t q = 0; q < num_qubits; ++q) {
        gates.push_back(GateOp::cnot(q, (q + 1) % num_qubits));
    }
    return gates;
}

/// Gate list for the full circuit, encoder included.
inline std::vector<GateOp> circuit(std::size_t num_qubits,
                                   const ParamTensor &params,
                                   std::span<const double> features) {
    check_features(num_qubits, features);
    std::vector<GateOp> gates;
    for (std::size_t q = 0; q < num_qubits; ++q) {
        gates.push_back(GateOp::rx(q, features[q]));
    }
    const auto ent = entangler(num_qubits);
    for (std::size_t l = 0; l < params.layers(); ++l) {
        gates.insert(gates.end(), ent.begin(), ent.end());
        for (std::size_t q = 0; q < num_qubits; ++q) {
            gates.push_back(
                GateOp::rot(q, params(l, q, 0), params(l, q, 1), params(l, q, 2)));
        }
    }
    return gates;
}

namespace detail {

inline std::vector<double> run_circuit(std::size_t num_qubits,
                                       const ParamTensor &params,
                                       std::span<const double> features) {
    const auto gates = circuit(num_qubits, params, features);
    std::vector<Complex> amps(std::size_t{1} << num_qubits, Complex{0, 0});
    amps[0] = 1.0;
    for (const auto &g : gates) {
        apply_inplace(amps, num_qubits, g);
    }
    const StateVector out = make_unchecked(std::move(amps), num_qubits);
    std::vector<double> z(num_qubits);
    for (std::size_t q = 0; q < num_qubits; ++q) {
        z[q] = expectation(out, ObservableSpec::pauli_z(q));
    }
    return z;
}

} // namespace detail

/// Per-qubit <Z> after encoder and variational layers.
inline std::vector<double> forward(const VqcModel &model,
                                   std::span<const double> features) {
    model.validate();
    return detail::run_circuit(model.num_qubits, model.params, features);
}

/// d(sum_k upstream[k] * <Z_k>) / d(param) for every circuit parameter, each
/// from two shifted forward evaluations.
inline ParamTensor gradient(const VqcModel &model,
                            std::span<const double> features,
                            std::span<const double> upstream,
                            const ShiftRule &rule = kPauliShift) {
    model.validate();
    if (upstream.size() != model.num_qubits) {
        throw std::invalid_argument("gradient: upstream length mismatch");
    }
    for (double u : upstream) {
        if (!std::isfinite(u)) {
            throw std::invalid_argument("gradient: non-finite upstream");
        }
    }
    check_features(model.num_qubits, features);
    ParamTensor grad(model.num_layers, model.num_qubits);
    ParamTensor shifted = model.params;
    for (std::size_t i = 0; i < shifted.size(); ++i) {
        const double p = shifted[i];
        shifted[i] = p + rule.shift;
        const auto plus = detail::run_circuit(model.num_qubits, shifted, features);
        shifted[i] = p - rule.shift;
        const auto minus = detail::run_circuit(model.num_qubits, shifted, features);
        shifted[i] = p;
        double g = 0.0;
        for (std::size_t k = 0; k < upstream.size(); ++k) {
            g += upstream[k] * rule.coefficient * (plus[k] - minus[k]);
        }
        grad[i] = g;
    }
    return grad;
}

} // namespace qfl
