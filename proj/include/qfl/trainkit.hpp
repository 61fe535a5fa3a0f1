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
 * Loss, optimizer, metrics and the three trainable model variants:
 * a classical 2-4-2 MLP, a VQC with classical parameters, and a VQC whose
 * parameters are quantum weights.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "qfl/datagen.hpp"
#include "qfl/qweights.hpp"
#include "qfl/vqc.hpp"

namespace qfl {

// ---- loss -----------------------------------------------------------------

struct LossGrad {
    double loss = 0.0;
    std::array<double, 2> dlogits{};
};

/// Softmax cross-entropy on two logits.
inline LossGrad loss_and_grad(std::span<const double> logits, int label) {
    if (logits.size() != 2) {
        throw std::invalid_argument("loss_and_grad: expects two logits");
    }
    if (label != 0 && label != 1) {
        throw std::invalid_argument("loss_and_grad: label must be 0 or 1");
    }
    if (!std::isfinite(logits[0]) || !std::isfinite(logits[1])) {
        throw std::invalid_argument("loss_and_grad: non-finite logit");
    }
    const double m = std::max(logits[0], logits[1]);
    const double e0 = std::exp(logits[0] - m);
    const double e1 = std::exp(logits[1] - m);
    const double z = e0 + e1;
    const auto l = static_cast<std::size_t>(label);
    LossGrad out;
    out.loss = -((logits[l] - m) - std::log(z));
    out.dlogits = {e0 / z, e1 / z};
    out.dlogits[l] -= 1.0;
    return out;
}

// ---- optimizer ------------------------------------------------------------

struct SgdOptimizer {
    double learning_rate = 0.1;

    void step(std::span<double> params, std::span<const double> grad) const {
        if (params.size() != grad.size()) {
            throw std::invalid_argument("SgdOptimizer: size mismatch");
        }
        for (std::size_t i = 0; i < params.size(); ++i) {
            params[i] -= learning_rate * grad[i];
        }
    }
};

// ---- metrics --------------------------------------------------------------

struct RoundMetrics {
    std::size_t round = 0;
    std::size_t client_id = 0;
    double mean_train_loss = 0.0;
    double test_accuracy = 0.0;
    std::int64_t wall_ms = 0;
};

struct BatchResult {
    double loss_sum = 0.0; ///< summed over samples
    std::vector<double> grad; ///< gradient of the mean loss
};

// ---- model variants -------------------------------------------------------

/// What every trainable variant exposes to the training loop.
template <typename M>
concept Classifier = requires(const M &cm, M &m, std::span<const double> x,
                              std::span<const Sample> batch,
                              std::span<const double> g, const SgdOptimizer &opt) {
    { cm.logits(x) } -> std::convertible_to<std::array<double, 2>>;
    { cm.batch_gradient(batch) } -> std::same_as<BatchResult>;
    { cm.parameters() } -> std::convertible_to<std::span<const double>>;
    m.apply_update(opt, g);
};

/// 2 -> 4 -> 2 perceptron with tanh hidden units. Parameters are stored flat:
/// W1 (4x2, row-major), b1 (4), W2 (2x4, row-major), b2 (2).
class ClassicalMlp {
  public:
    static constexpr std::size_t kIn = 2;
    static constexpr std::size_t kHidden = 4;
    static constexpr std::size_t kOut = 2;
    static constexpr std::size_t kW1 = 0;
    static constexpr std::size_t kB1 = kW1 + kHidden * kIn;
    static constexpr std::size_t kW2 = kB1 + kHidden;
    static constexpr std::size_t kB2 = kW2 + kOut * kHidden;
    static constexpr std::size_t kParamCount = kB2 + kOut;

    ClassicalMlp() : p_(kParamCount, 0.0) {}
    explicit ClassicalMlp(std::vector<double> params) : p_(std::move(params)) {
        if (p_.size() != kParamCount) {
            throw std::invalid_argument("ClassicalMlp: expects 22 parameters");
        }
    }

    /// Glorot-uniform weights, zero biases.
    static ClassicalMlp random(Rng &rng) {
        ClassicalMlp m;
        const double a1 = std::sqrt(6.0 / (kIn + kHidden));
        const double a2 = std::sqrt(6.0 / (kHidden + kOut));
        std::uniform_real_distribution<double> u1(-a1, a1);
        std::uniform_real_distribution<double> u2(-a2, a2);
        for (std::size_t i = kW1; i < kB1; ++i) {
            m.p_[i] = u1(rng);
        }
        for (std::size_t i = kW2; i < kB2; ++i) {
            m.p_[i] = u2(rng);
        }
        return m;
    }

    double &w1(std::size_t h, std::size_t i) { return p_[kW1 + h * kIn + i]; }
    double &b1(std::size_t h) { return p_[kB1 + h]; }
    double &w2(std::size_t o, std::size_t h) { return p_[kW2 + o * kHidden + h]; }
    double &b2(std::size_t o) { return p_[kB2 + o]; }

    [[nodiscard]] std::array<double, 2> logits(std::span<const double> x) const {
        return forward(x).out;
    }

    struct Backprop {
        double loss = 0.0;
        std::vector<double> grad;
    };

    /// Loss and full parameter gradient for one sample.
    [[nodiscard]] Backprop forward_backward(std::span<const double> x,
                                            int label) const {
        const Activations a = forward(x);
        const LossGrad lg = loss_and_grad(a.out, label);
        Backprop bp{lg.loss, std::vector<double>(kParamCount, 0.0)};
        accumulate(a, x, lg.dlogits, 1.0, bp.grad);
        return bp;
    }

    [[nodiscard]] BatchResult batch_gradient(std::span<const Sample> batch) const {
        BatchResult r{0.0, std::vector<double>(kParamCount, 0.0)};
        const double w = 1.0 / static_cast<double>(batch.size());
        for (const auto &s : batch) {
            const Activations a = forward(s.features);
            const LossGrad lg = loss_and_grad(a.out, s.label);
            r.loss_sum += lg.loss;
            accumulate(a, s.features, lg.dlogits, w, r.grad);
        }
        return r;
    }

    [[nodiscard]] std::span<const double> parameters() const noexcept { return p_; }
    void set_parameters(std::span<const double> p) {
        if (p.size() != kParamCount) {
            throw std::invalid_argument("ClassicalMlp: expects 22 parameters");
        }
        p_.assign(p.begin(), p.end());
    }
    void apply_update(const SgdOptimizer &opt, std::span<const double> g) {
        opt.step(p_, g);
    }

  private:
    struct Activations {
        std::array<double, kHidden> hidden{};
        std::array<double, kOut> out{};
    };

    [[nodiscard]] Activations forward(std::span<const double> x) const {
        if (x.size() != kIn) {
            throw std::invalid_argument("ClassicalMlp: expects two features");
        }
        Activations a;
        for (std::size_t h = 0; h < kHidden; ++h) {
            double s = p_[kB1 + h];
            for (std::size_t i = 0; i < kIn; ++i) {
                s += p_[kW1 + h * kIn + i] * x[i];
            }
            a.hidden[h] = std::tanh(s);
        }
        for (std::size_t o = 0; o < kOut; ++o) {
            double s = p_[kB2 + o];
            for (std::size_t h = 0; h < kHidden; ++h) {
                s += p_[kW2 + o * kHidden + h] * a.hidden[h];
            }
            a.out[o] = s;
        }
        return a;
    }

    void accumulate(const Activations &a, std::span<const double> x,
                    const std::array<double, 2> &dout, double weight,
                    std::vector<double> &grad) const {
        std::array<double, kHidden> dhidden{};
        for (std::size_t o = 0; o < kOut; ++o) {
            const double d = weight * dout[o];
            grad[kB2 + o] += d;
            for (std::size_t h = 0; h < kHidden; ++h) {
                grad[kW2 + o * kHidden + h] += d * a.hidden[h];
                dhidden[h] += d * p_[kW2 + o * kHidden + h];
            }
        }
        for (std::size_t h = 0; h < kHidden; ++h) {
            const double dpre = dhidden[h] * (1.0 - a.hidden[h] * a.hidden[h]);
            grad[kB1 + h] += dpre;
            for (std::size_t i = 0; i < kIn; ++i) {
                grad[kW1 + h * kIn + i] += dpre * x[i];
            }
        }
    }

    std::vector<double> p_;
};

/// mlp_forward_backward in free-function form.
inline ClassicalMlp::Backprop mlp_forward_backward(const ClassicalMlp &model,
                                                   std::span<const double> x,
                                                   int label) {
    return model.forward_backward(x, label);
}

namespace detail {

inline std::array<double, 2> two_logits(const std::vector<double> &z) {
    if (z.size() != 2) {
        throw std::invalid_argument("classifier head needs exactly two qubits");
    }
    return {z[0], z[1]};
}

/// Mean-loss gradient w.r.t. circuit parameters over a batch, summed in
/// sample order.
inline BatchResult vqc_batch_gradient(const VqcModel &model,
                                      std::span<const Sample> batch) {
    BatchResult r{0.0, std::vector<double>(model.params.size(), 0.0)};
    const double w = 1.0 / static_cast<double>(batch.size());
    for (const auto &s : batch) {
        const auto z = forward(model, s.features);
        const LossGrad lg = loss_and_grad(z, s.label);
        r.loss_sum += lg.loss;
        const std::array<double, 2> up{w * lg.dlogits[0], w * lg.dlogits[1]};
        const ParamTensor g = gradient(model, s.features, up);
        for (std::size_t i = 0; i < g.size(); ++i) {
            r.grad[i] += g[i];
        }
    }
    return r;
}

} // namespace detail

/// VQC trained directly on its rotation angles. The two per-qubit <Z> values
/// are the class logits.
class VqcClassifier {
  public:
    VqcClassifier() = default;
    explicit VqcClassifier(VqcModel model) : model_(std::move(model)) {
        model_.validate();
        if (model_.num_qubits != 2) {
            throw std::invalid_argument("VqcClassifier: binary head needs 2 qubits");
        }
    }

    /// Angles uniform in [-pi/4, pi/4].
    static VqcClassifier random(std::size_t layers, Rng &rng) {
        std::uniform_real_distribution<double> u(-std::numbers::pi / 4,
                                                 std::numbers::pi / 4);
        ParamTensor p(layers, 2);
        for (auto &v : p.flat()) {
            v = u(rng);
        }
        return VqcClassifier(VqcModel(2, layers, std::move(p)));
    }

    [[nodiscard]] std::array<double, 2> logits(std::span<const double> x) const {
        return detail::two_logits(forward(model_, x));
    }
    [[nodiscard]] BatchResult batch_gradient(std::span<const Sample> batch) const {
        return detail::vqc_batch_gradient(model_, batch);
    }
    [[nodiscard]] std::span<const double> parameters() const noexcept {
        return model_.params.flat();
    }
    void set_parameters(std::span<const double> p) {
        if (p.size() != model_.params.size()) {
            throw std::invalid_argument("VqcClassifier: parameter count mismatch");
        }
        std::copy(p.begin(), p.end(), model_.params.flat().begin());
    }
    void apply_update(const SgdOptimizer &opt, std::span<const double> g) {
        opt.step(model_.params.flat(), g);
    }
    [[nodiscard]] const VqcModel &model() const noexcept { return model_; }

  private:
    VqcModel model_{2, 2};
};

/// VQC whose circuit angles are materialized from quantum weights. Training
/// moves the stored weight angles, which are kept in (-pi, pi].
class QuantumWeightClassifier {
  public:
    QuantumWeightClassifier() = default;
    explicit QuantumWeightClassifier(QuantumWeightStore store)
        : store_(std::move(store)) {
        store_.validate();
        if (store_.angles.qubits() != 2) {
            throw std::invalid_argument(
                "QuantumWeightClassifier: binary head needs 2 qubits");
        }
    }

    /// Angles uniform in [pi/2 - 0.5, pi/2 + 0.5], i.e. weights start near 0.
    static QuantumWeightClassifier random(std::size_t layers, double gamma,
                                          Rng &rng) {
        std::uniform_real_distribution<double> u(std::numbers::pi / 2 - 0.5,
                                                 std::numbers::pi / 2 + 0.5);
        ParamTensor a(layers, 2);
        for (auto &v : a.flat()) {
            v = u(rng);
        }
        return QuantumWeightClassifier({std::move(a), gamma});
    }

    [[nodiscard]] VqcModel circuit_model() const {
        return {2, store_.angles.layers(), materialize(store_)};
    }

    [[nodiscard]] std::array<double, 2> logits(std::span<const double> x) const {
        return detail::two_logits(forward(circuit_model(), x));
    }

    [[nodiscard]] BatchResult batch_gradient(std::span<const Sample> batch) const {
        BatchResult r = detail::vqc_batch_gradient(circuit_model(), batch);
        const ParamTensor circuit_grad(store_.angles.layers(), 2, std::move(r.grad));
        r.grad = weight_gradient(store_, circuit_grad).values();
        return r;
    }

    [[nodiscard]] std::span<const double> parameters() const noexcept {
        return store_.angles.flat();
    }
    void set_parameters(std::span<const double> p) {
        if (p.size() != store_.angles.size()) {
            throw std::invalid_argument(
                "QuantumWeightClassifier: parameter count mismatch");
        }
        std::copy(p.begin(), p.end(), store_.angles.flat().begin());
    }
    void apply_update(const SgdOptimizer &opt, std::span<const double> g) {
        opt.step(store_.angles.flat(), g);
        for (auto &a : store_.angles.flat()) {
            a = wrap_angle(a);
        }
        const ParamTensor eff = materialize(store_);
        for (double v : eff.flat()) {
            if (std::abs(v) > store_.gamma) {
                throw std::logic_error(
                    "QuantumWeightClassifier: weight escaped [-gamma, gamma]");
            }
        }
    }

    [[nodiscard]] const QuantumWeightStore &store() const noexcept { return store_; }
    void set_store(QuantumWeightStore s) {
        if (!s.angles.same_shape(store_.angles)) {
            throw std::invalid_argument("QuantumWeightClassifier: store shape mismatch");
        }
        store_ = std::move(s);
    }

  private:
    QuantumWeightStore store_{ParamTensor(2, 2), std::numbers::pi};
};

static_assert(Classifier<ClassicalMlp>);
static_assert(Classifier<VqcClassifier>);
static_assert(Classifier<QuantumWeightClassifier>);

// ---- training and evaluation ----------------------------------------------

struct EpochStats {
    double loss_sum = 0.0;
    std::size_t samples = 0;

    EpochStats &operator+=(const EpochStats &o) {
        loss_sum += o.loss_sum;
        samples += o.samples;
        return *this;
    }
    [[nodiscard]] double mean() const {
        return samples ? loss_sum / static_cast<double>(samples) : 0.0;
    }
};

/// One pass over `data` in shuffled mini-batches. The reported loss is the
/// pre-update loss of each sample.
template <Classifier M>
EpochStats train_epoch(M &model, std::span<const Sample> data,
                       std::size_t batch_size, const SgdOptimizer &opt, Rng &rng) {
    if (batch_size == 0) {
        throw std::invalid_argument("train_epoch: batch_size must be >= 1");
    }
    if (data.empty()) {
        throw std::invalid_argument("train_epoch: empty training data");
    }
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::shuffle(order.begin(), order.end(), rng);
    EpochStats stats;
    std::vector<Sample> batch;
    batch.reserve(batch_size);
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        batch.clear();
        const std::size_t stop = std::min(order.size(), start + batch_size);
        for (std::size_t i = start; i < stop; ++i) {
            batch.push_back(data[order[i]]);
        }
        const BatchResult r = model.batch_gradient(batch);
        model.apply_update(opt, r.grad);
        stats.loss_sum += r.loss_sum;
        stats.samples += batch.size();
    }
    return stats;
}

struct TrainConfig {
    std::size_t batch_size = 32;
    SgdOptimizer optimizer{};
};

/// Plain single-node training for `epochs` epochs.
template <Classifier M>
EpochStats train_centralized(M &model, std::span<const Sample> data,
                             std::size_t epochs, const TrainConfig &cfg, Rng &rng) {
    EpochStats total;
    for (std::size_t e = 0; e < epochs; ++e) {
        total += train_epoch(model, data, cfg.batch_size, cfg.optimizer, rng);
    }
    return total;
}

inline int predict(const std::array<double, 2> &logits) {
    return logits[1] > logits[0] ? 1 : 0;
}

/// Fraction of samples whose argmax logit equals the label.
template <typename M>
double evaluate(const M &model, std::span<const Sample> test_set) {
    if (test_set.empty()) {
        throw std::invalid_argument("evaluate: empty test set");
    }
    std::size_t correct = 0;
    for (const auto &s : test_set) {
        if (predict(model.logits(s.features)) == s.label) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(test_set.size());
}

} // namespace qfl
