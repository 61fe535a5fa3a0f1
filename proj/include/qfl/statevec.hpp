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
 * Dense statevector simulation for few-qubit registers.
 *
 * Basis labels put qubit 0 in the most significant bit: for n qubits the
 * amplitude of |b_0 b_1 ... b_{n-1}> lives at index sum_q b_q * 2^(n-1-q).
 */
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qfl {

using Complex = std::complex<double>;
using Matrix2 = std::array<std::array<Complex, 2>, 2>;

/// Seeded random source shared by every stochastic routine in the library.
using Rng = std::mt19937_64;

inline constexpr std::size_t kMaxQubits = 12;
inline constexpr double kNormTolerance = 1e-10;

class StateVector {
  public:
    /// Takes ownership of raw amplitudes. Length must be 2^n with 1 <= n <= 12
    /// and the vector must be normalized within kNormTolerance.
    explicit StateVector(std::vector<Complex> amplitudes)
        : amps_(std::move(amplitudes)) {
        const std::size_t len = amps_.size();
        if (len < 2 || (len & (len - 1)) != 0) {
            throw std::invalid_argument(
                "StateVector: amplitude count must be a power of two >= 2");
        }
        while ((std::size_t{1} << num_qubits_) < len) {
            ++num_qubits_;
        }
        if (num_qubits_ > kMaxQubits) {
            throw std::invalid_argument("StateVector: more than 12 qubits");
        }
        for (const auto &a : amps_) {
            if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
                throw std::invalid_argument(
                    "StateVector: non-finite amplitude");
            }
        }
        if (std::abs(norm() - 1.0) > kNormTolerance) {
            throw std::invalid_argument("StateVector: state is not normalized");
        }
    }

    [[nodiscard]] std::size_t num_qubits() const noexcept { return num_qubits_; }
    [[nodiscard]] std::size_t dim() const noexcept { return amps_.size(); }
    [[nodiscard]] std::span<const Complex> amplitudes() const noexcept {
        return amps_;
    }
    [[nodiscard]] const Complex &operator[](std::size_t i) const {
        return amps_[i];
    }

    [[nodiscard]] double norm() const noexcept {
        double s = 0.0;
        for (const auto &a : amps_) {
            s += std::norm(a);
        }
        return std::sqrt(s);
    }

    /// Bit mask selecting `qubit` in a basis index.
    [[nodiscard]] std::size_t mask(std::size_t qubit) const noexcept {
        return std::size_t{1} << (num_qubits_ - 1 - qubit);
    }

  private:
    struct Unchecked {};
    StateVector(Unchecked, std::vector<Complex> amplitudes, std::size_t n)
        : amps_(std::move(amplitudes)), num_qubits_(n) {}

    friend StateVector make_unchecked(std::vector<Complex>, std::size_t);

    std::vector<Complex> amps_;
    std::size_t num_qubits_ = 0;
};

// Skips validation; gate kernels preserve the norm by construction.
inline StateVector make_unchecked(std::vector<Complex> amplitudes,
                                  std::size_t n) {
    return StateVector(StateVector::Unchecked{}, std::move(amplitudes), n);
}

enum class GateKind { RX, RY, RZ, ROT, CNOT, H, X, Y, Z };

struct GateOp {
    GateKind kind = GateKind::X;
    std::size_t target = 0;
    std::optional<std::size_t> control;
    std::vector<double> angles;

    static GateOp rx(std::size_t q, double a) { return {GateKind::RX, q, {}, {a}}; }
    static GateOp ry(std::size_t q, double a) { return {GateKind::RY, q, {}, {a}}; }
    static GateOp rz(std::size_t q, double a) { return {GateKind::RZ, q, {}, {a}}; }
    /// ROT(phi, theta, omega) = RZ(omega) RY(theta) RZ(phi).
    static GateOp rot(std::size_t q, double phi, double theta, double omega) {
        return {GateKind::ROT, q, {}, {phi, theta, omega}};
    }
    static GateOp cnot(std::size_t control, std::size_t target) {
        return {GateKind::CNOT, target, control, {}};
    }
    static GateOp h(std::size_t q) { return {GateKind::H, q, {}, {}}; }
    static GateOp x(std::size_t q) { return {GateKind::X, q, {}, {}}; }
    static GateOp y(std::size_t q) { return {GateKind::Y, q, {}, {}}; }
    static GateOp z(std::size_t q) { return {GateKind::Z, q, {}, {}}; }
};

inline std::size_t expected_angle_count(GateKind kind) {
    switch (kind) {
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
        return 1;
    case GateKind::ROT:
        return 3;
    default:
        return 0;
    }
}

namespace detail {

inline Matrix2 matmul(const Matrix2 &a, const Matrix2 &b) {
    Matrix2 r{};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    return r;
}

inline Matrix2 rx_matrix(double a) {
    const double c = std::cos(a / 2.0);
    const double s = std::sin(a / 2.0);
    return {{{Complex{c, 0}, Complex{0, -s}}, {Complex{0, -s}, Complex{c, 0}}}};
}

inline Matrix2 ry_matrix(double a) {
    const double c = std::cos(a / 2.0);
    const double s = std::sin(a / 2.0);
    return {{{Complex{c, 0}, Complex{-s, 0}}, {Complex{s, 0}, Complex{c, 0}}}};
}

inline Matrix2 rz_matrix(double a) {
    return {{{std::polar(1.0, -a / 2.0), Complex{0, 0}},
             {Complex{0, 0}, std::polar(1.0, a / 2.0)}}};
}

} // namespace detail

/// 2x2 unitary of a single-qubit gate. Throws for CNOT.
inline Matrix2 single_qubit_matrix(const GateOp &gate) {
    if (gate.angles.size() != expected_angle_count(gate.kind)) {
        throw std::invalid_argument("GateOp: wrong number of angles");
    }
    for (double a : gate.angles) {
        if (!std::isfinite(a)) {
            throw std::invalid_argument("GateOp: non-finite angle");
        }
    }
    const Complex o{0, 0};
    const Complex l{1, 0};
    const Complex i{0, 1};
    const double r = 1.0 / std::sqrt(2.0);
    switch (gate.kind) {
    case GateKind::RX:
        return detail::rx_matrix(gate.angles[0]);
    case GateKind::RY:
        return detail::ry_matrix(gate.angles[0]);
    case GateKind::RZ:
        return detail::rz_matrix(gate.angles[0]);
    case GateKind::ROT:
        return detail::matmul(
            detail::rz_matrix(gate.angles[2]),
            detail::matmul(detail::ry_matrix(gate.angles[1]),
                           detail::rz_matrix(gate.angles[0])));
    case GateKind::H:
        return {{{Complex{r, 0}, Complex{r, 0}}, {Complex{r, 0}, Complex{-r, 0}}}};
    case GateKind::X:
        return {{{o, l}, {l, o}}};
    case GateKind::Y:
        return {{{o, -i}, {i, o}}};
    case GateKind::Z:
        return {{{l, o}, {o, -l}}};
    case GateKind::CNOT:
        break;
    }
    throw std::invalid_argument("single_qubit_matrix: CNOT is a two-qubit gate");
}

/// Full 2^n x 2^n matrix of a gate acting on an n-qubit register, row-major.
/// Used by tests and by the unitarity check; simulation never builds it.
inline std::vector<Complex> dense_matrix(const GateOp &gate, std::size_t n) {
    const std::size_t dim = std::size_t{1} << n;
    std::vector<Complex> m(dim * dim, Complex{0, 0});
    auto bit = [n](std::size_t q) { return std::size_t{1} << (n - 1 - q); };
    if (gate.kind == GateKind::CNOT) {
        for (std::size_t col = 0; col < dim; ++col) {
            const std::size_t row =
                (col & bit(*gate.control)) ? (col ^ bit(gate.target)) : col;
            m[row * dim + col] = 1.0;
        }
        return m;
    }
    const Matrix2 u = single_qubit_matrix(gate);
    const std::size_t t = bit(gate.target);
    for (std::size_t col = 0; col < dim; ++col) {
        const std::size_t c = (col & t) ? 1 : 0;
        for (std::size_t r = 0; r < 2; ++r) {
            const std::size_t row = r ? (col | t) : (col & ~t);
            m[row * dim + col] = u[r][c];
        }
    }
    return m;
}

/// |0...0> on `num_qubits` qubits.
inline StateVector zero_state(std::size_t num_qubits) {
    if (num_qubits < 1 || num_qubits > kMaxQubits) {
        throw std::invalid_argument("zero_state: num_qubits must be in [1, 12]");
    }
    std::vector<Complex> amps(std::size_t{1} << num_qubits, Complex{0, 0});
    amps[0] = 1.0;
    return make_unchecked(std::move(amps), num_qubits);
}

inline void validate_gate(const GateOp &gate, std::size_t num_qubits) {
    if (gate.target >= num_qubits) {
        throw std::out_of_range("apply_gate: target qubit out of range");
    }
    if (gate.kind == GateKind::CNOT) {
        if (!gate.control) {
            throw std::invalid_argument("apply_gate: CNOT needs a control");
        }
        if (*gate.control >= num_qubits) {
            throw std::out_of_range("apply_gate: control qubit out of range");
        }
        if (*gate.control == gate.target) {
            throw std::invalid_argument("apply_gate: control equals target");
        }
    } else if (gate.control) {
        throw std::invalid_argument("apply_gate: only CNOT takes a control");
    }
}

namespace detail {

// In-place kernel on a raw amplitude buffer of n qubits; gate must be valid.
inline void apply_inplace(std::vector<Complex> &amps, std::size_t n,
                          const GateOp &gate) {
    const std::size_t t = std::size_t{1} << (n - 1 - gate.target);
    if (gate.kind == GateKind::CNOT) {
        const std::size_t c = std::size_t{1} << (n - 1 - *gate.control);
        for (std::size_t i = 0; i < amps.size(); ++i) {
            if ((i & c) && !(i & t)) {
                std::swap(amps[i], amps[i | t]);
            }
        }
        return;
    }
    const Matrix2 u = single_qubit_matrix(gate);
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if (i & t) {
            continue;
        }
        const Complex a0 = amps[i];
        const Complex a1 = amps[i | t];
        amps[i] = u[0][0] * a0 + u[0][1] * a1;
        amps[i | t] = u[1][0] * a0 + u[1][1] * a1;
    }
}

} // namespace detail

/// Returns U|state>. The input is left untouched.
inline StateVector apply_gate(const StateVector &state, const GateOp &gate) {
    validate_gate(gate, state.num_qubits());
    std::vector<Complex> out(state.amplitudes().begin(),
                             state.amplitudes().end());
    detail::apply_inplace(out, state.num_qubits(), gate);
    return make_unchecked(std::move(out), state.num_qubits());
}

inline StateVector apply_gates(StateVector state, std::span<const GateOp> gates) {
    for (const auto &g : gates) {
        state = apply_gate(state, g);
    }
    return state;
}

enum class PauliKind { Z, Y };

/// Single-qubit Pauli observable. Z is the circuit readout; Y is only used
/// when recovering a rotation angle on the receiving side of a channel.
struct ObservableSpec {
    PauliKind kind = PauliKind::Z;
    std::size_t target = 0;

    static ObservableSpec pauli_z(std::size_t q) { return {PauliKind::Z, q}; }
    static ObservableSpec pauli_y(std::size_t q) { return {PauliKind::Y, q}; }
};

/// <state| P_target |state>.
inline double expectation(const StateVector &state, const ObservableSpec &obs) {
    if (obs.target >= state.num_qubits()) {
        throw std::out_of_range("expectation: target qubit out of range");
    }
    const std::size_t t = state.mask(obs.target);
    const auto amps = state.amplitudes();
    double value = 0.0;
    if (obs.kind == PauliKind::Z) {
        for (std::size_t i = 0; i < amps.size(); ++i) {
            value += (i & t) ? -std::norm(amps[i]) : std::norm(amps[i]);
        }
    } else {
        // <Y> = 2 Im(conj(a0) a1) summed over pairs differing in the target bit
        for (std::size_t i = 0; i < amps.size(); ++i) {
            if (!(i & t)) {
                value += 2.0 * std::imag(std::conj(amps[i]) * amps[i | t]);
            }
        }
    }
    return value;
}

/// Probability that measuring `targets` yields `outcomes`.
inline double outcome_probability(const StateVector &state,
                                  std::span<const std::size_t> targets,
                                  std::span<const int> outcomes) {
    const auto amps = state.amplitudes();
    double p = 0.0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        bool match = true;
        for (std::size_t k = 0; k < targets.size() && match; ++k) {
            match = (((i & state.mask(targets[k])) != 0) == (outcomes[k] != 0));
        }
        if (match) {
            p += std::norm(amps[i]);
        }
    }
    return p;
}

namespace detail {

inline void check_targets(const StateVector &state,
                          std::span<const std::size_t> targets) {
    for (std::size_t k = 0; k < targets.size(); ++k) {
        if (targets[k] >= state.num_qubits()) {
            throw std::out_of_range("measure: target qubit out of range");
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (targets[j] == targets[k]) {
                throw std::invalid_argument("measure: duplicate target qubit");
            }
        }
    }
}

} // namespace detail

inline constexpr double kMinOutcomeProbability = 1e-15;

/// Collapses `state` onto a fixed measurement outcome and renormalizes.
/// Throws if the outcome has probability below 1e-15.
inline StateVector project_qubits(const StateVector &state,
                                  std::span<const std::size_t> targets,
                                  std::span<const int> outcomes) {
    detail::check_targets(state, targets);
    if (outcomes.size() != targets.size()) {
        throw std::invalid_argument("project: one outcome per target required");
    }
    const double p = outcome_probability(state, targets, outcomes);
    if (p < kMinOutcomeProbability) {
        throw std::domain_error("project: outcome has vanishing probability");
    }
    const double scale = 1.0 / std::sqrt(p);
    std::vector<Complex> out(state.dim(), Complex{0, 0});
    const auto amps = state.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        bool match = true;
        for (std::size_t k = 0; k < targets.size() && match; ++k) {
            match = (((i & state.mask(targets[k])) != 0) == (outcomes[k] != 0));
        }
        if (match) {
            out[i] = amps[i] * scale;
        }
    }
    return StateVector(std::move(out));
}

struct MeasurementResult {
    std::vector<int> outcomes;
    StateVector collapsed;
};

/// Measures `targets` one after another in the computational basis. Each
/// outcome is drawn from the Born probability of the partially collapsed
/// state; results are reproducible for a given rng state.
inline MeasurementResult measure_qubits(const StateVector &state,
                                        std::span<const std::size_t> targets,
                                        Rng &rng) {
    detail::check_targets(state, targets);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    StateVector current = state;
    std::vector<int> outcomes;
    outcomes.reserve(targets.size());
    for (std::size_t q : targets) {
        const std::array<std::size_t, 1> tq{q};
        const std::array<int, 1> zero{0};
        const double p0 = outcome_probability(current, tq, zero);
        int bit = uniform(rng) < p0 ? 0 : 1;
        // Never select an outcome whose probability is numerically zero.
        if (bit == 0 && p0 < kMinOutcomeProbability) {
            bit = 1;
        } else if (bit == 1 && 1.0 - p0 < kMinOutcomeProbability) {
            bit = 0;
        }
        const std::array<int, 1> o{bit};
        current = project_qubits(current, tq, o);
        outcomes.push_back(bit);
    }
    return {std::move(outcomes), std::move(current)};
}

/// |<a|b>|^2, insensitive to global phase.
inline double fidelity(const StateVector &a, const StateVector &b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("fidelity: dimension mismatch");
    }
    Complex overlap{0, 0};
    for (std::size_t i = 0; i < a.dim(); ++i) {
        overlap += std::conj(a[i]) * b[i];
    }
    return std::norm(overlap);
}

/// Tensor product a (x) b; the qubits of `a` come first.
inline StateVector tensor(const StateVector &a, const StateVector &b) {
    std::vector<Complex> out;
    out.reserve(a.dim() * b.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) {
        for (std::size_t j = 0; j < b.dim(); ++j) {
            out.push_back(a[i] * b[j]);
        }
    }
    if (a.num_qubits() + b.num_qubits() > kMaxQubits) {
        throw std::invalid_argument("tensor: more than 12 qubits");
    }
    return make_unchecked(std::move(out), a.num_qubits() + b.num_qubits());
}

} // namespace qfl
