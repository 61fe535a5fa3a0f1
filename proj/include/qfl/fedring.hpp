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
 * Federated orchestration. Ring: clients train one after another and pass
 * their parameters to the next client; a round is one full loop. Hub-spoke:
 * every client starts from the global model and the hub averages.
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "qfl/datagen.hpp"
#include "qfl/teleport.hpp"
#include "qfl/trainkit.hpp"

namespace qfl {

/// Seeded shuffle of sample indices followed by a contiguous split. Shard
/// sizes differ by at most one; each shard keeps the input order of its
/// members, so K = 1 returns the input unchanged.
inline std::vector<std::vector<Sample>> partition(std::span<const Sample> data,
                                                  std::size_t num_clients,
                                                  std::uint64_t seed) {
    if (num_clients == 0) {
        throw std::invalid_argument("partition: need at least one client");
    }
    if (num_clients > data.size()) {
        throw std::invalid_argument("partition: more clients than samples");
    }
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);

    std::vector<std::vector<Sample>> shards(num_clients);
    const std::size_t base = data.size() / num_clients;
    const std::size_t extra = data.size() % num_clients;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < num_clients; ++k) {
        const std::size_t len = base + (k < extra ? 1 : 0);
        std::vector<std::size_t> mine(idx.begin() + static_cast<std::ptrdiff_t>(pos),
                                      idx.begin() + static_cast<std::ptrdiff_t>(pos + len));
        std::sort(mine.begin(), mine.end());
        shards[k].reserve(len);
        for (std::size_t i : mine) {
            shards[k].push_back(data[i]);
        }
        pos += len;
    }
    return shards;
}

enum class Transport { ClassicalCopy, Teleport };

struct RingSchedule {
    std::size_t num_clients = 3;
    std::size_t num_rounds = 100;
    std::size_t local_epochs = 5;
    Transport transport = Transport::ClassicalCopy;
    /// Measure wall-clock time per round. Off by default so metrics files
    /// are reproducible byte for byte.
    bool record_timing = false;

    void validate() const {
        if (num_clients < 1 || num_rounds < 1 || local_epochs < 1) {
            throw std::invalid_argument(
                "RingSchedule: clients, rounds and local epochs must be >= 1");
        }
    }
};

/// Training rng of client k, derived from the experiment seed.
inline Rng client_rng(std::uint64_t seed, std::size_t client_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(client_id), 0x51f1u};
    return Rng(seq);
}

template <Classifier M>
struct ClientState {
    std::size_t client_id = 0;
    std::vector<Sample> shard;
    M model;
    Rng rng;
};

/// One client per shard, all holding a copy of `initial`.
template <Classifier M>
std::vector<ClientState<M>> make_clients(const M &initial,
                                         std::vector<std::vector<Sample>> shards,
                                         std::uint64_t seed) {
    std::vector<ClientState<M>> clients;
    clients.reserve(shards.size());
    for (std::size_t k = 0; k < shards.size(); ++k) {
        clients.push_back({k, std::move(shards[k]), initial, client_rng(seed, k)});
    }
    return clients;
}

template <Classifier M>
struct FederatedResult {
    M model;
    std::vector<RoundMetrics> metrics;
};

class RingTransportError : public ChannelError {
  public:
    RingTransportError(std::size_t round, std::size_t client,
                       const TeleportError &cause)
        : ChannelError("ring round " + std::to_string(round) + ", client " +
                       std::to_string(client) + ": " + cause.what()),
          round_(round), client_(client), weight_(cause.weight_index()) {}
    [[nodiscard]] std::size_t round() const noexcept { return round_; }
    [[nodiscard]] std::size_t client() const noexcept { return client_; }
    [[nodiscard]] std::size_t weight_index() const noexcept { return weight_; }

  private:
    std::size_t round_;
    std::size_t client_;
    std::size_t weight_;
};

namespace detail {

template <Classifier M>
void check_clients(const std::vector<ClientState<M>> &clients,
                   std::span<const Sample> test_set, std::size_t expected) {
    if (clients.size() != expected) {
        throw std::invalid_argument("federated run: client count does not match "
                                    "the schedule");
    }
    for (const auto &c : clients) {
        if (c.shard.empty()) {
            throw std::invalid_argument("federated run: client with empty shard");
        }
        if (c.model.parameters().size() != clients.front().model.parameters().size()) {
            throw std::invalid_argument("federated run: inconsistent models");
        }
    }
    if (test_set.empty()) {
        throw std::invalid_argument("federated run: empty test set");
    }
}

using Clock = std::chrono::steady_clock;

inline std::int64_t elapsed_ms(Clock::time_point since) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() -
                                                                 since)
        .count();
}

} // namespace detail

/// Sequential ring training. Client k+1 starts each of its turns from the
/// parameters client k just produced; after the last client of each round
/// its model is evaluated on `test_set`. `channel_rng` drives the Bell
/// measurements of the teleport transport and is otherwise unused.
template <Classifier M>
FederatedResult<M> run_ring(const RingSchedule &schedule,
                            std::vector<ClientState<M>> &clients,
                            std::span<const Sample> test_set,
                            const TrainConfig &train, Rng &channel_rng) {
    schedule.validate();
    detail::check_clients(clients, test_set, schedule.num_clients);
    constexpr bool quantum_weights = std::is_same_v<M, QuantumWeightClassifier>;
    if (schedule.transport == Transport::Teleport && !quantum_weights) {
        throw std::invalid_argument(
            "run_ring: teleport transport requires quantum weights");
    }

    FederatedResult<M> result{clients.front().model, {}};
    result.metrics.reserve(schedule.num_rounds);
    M carry = clients.front().model;
    bool first_turn = true;
    for (std::size_t round = 1; round <= schedule.num_rounds; ++round) {
        const auto started = detail::Clock::now();
        EpochStats stats;
        for (auto &client : clients) {
            if (!first_turn) {
                if constexpr (quantum_weights) {
                    if (schedule.transport == Transport::Teleport) {
                        try {
                            client.model.set_store(
                                teleport_weights(carry.store(), channel_rng));
                        } catch (const TeleportError &e) {
                            throw RingTransportError(round, client.client_id, e);
                        }
                    } else {
                        client.model.set_store(carry.store());
                    }
                } else {
                    client.model.set_parameters(carry.parameters());
                }
            }
            first_turn = false;
            for (std::size_t e = 0; e < schedule.local_epochs; ++e) {
                stats += train_epoch(client.model, client.shard, train.batch_size,
                                     train.optimizer, client.rng);
            }
            carry = client.model;
        }
        const auto &last = clients.back();
        result.metrics.push_back(
            {round, last.client_id, stats.mean(), evaluate(last.model, test_set),
             schedule.record_timing ? detail::elapsed_ms(started) : 0});
    }
    result.model = clients.back().model;
    return result;
}

/// Element-wise arithmetic mean. Each coordinate is summed in sorted order,
/// so the result does not depend on the order of `vectors`.
inline std::vector<double>
average_parameters(const std::vector<std::vector<double>> &vectors) {
    if (vectors.empty()) {
        throw std::invalid_argument("average_parameters: no inputs");
    }
    const std::size_t n = vectors.front().size();
    std::vector<double> out(n, 0.0);
    std::vector<double> column(vectors.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < vectors.size(); ++k) {
            if (vectors[k].size() != n) {
                throw std::invalid_argument("average_parameters: size mismatch");
            }
            column[k] = vectors[k][i];
        }
        std::sort(column.begin(), column.end());
        double s = 0.0;
        for (double v : column) {
            s += v;
        }
        out[i] = s / static_cast<double>(vectors.size());
    }
    return out;
}

/// FedAvg with a central hub. Only classical-parameter models are accepted;
/// averaging weight angles has no defined meaning. Metrics use the global
/// model and carry `num_clients` as the hub's id.
template <Classifier M>
FederatedResult<M> run_hubspoke(const RingSchedule &schedule,
                                std::vector<ClientState<M>> &clients,
                                std::span<const Sample> test_set,
                                const TrainConfig &train) {
    if constexpr (std::is_same_v<M, QuantumWeightClassifier>) {
        throw std::invalid_argument(
            "run_hubspoke: quantum-weight models cannot be averaged");
    } else {
        schedule.validate();
        detail::check_clients(clients, test_set, schedule.num_clients);
        if (schedule.transport != Transport::ClassicalCopy) {
            throw std::invalid_argument("run_hubspoke: only classical transport");
        }
        M global = clients.front().model;
        FederatedResult<M> result{global, {}};
        for (std::size_t round = 1; round <= schedule.num_rounds; ++round) {
            const auto started = detail::Clock::now();
            EpochStats stats;
            std::vector<std::vector<double>> uploads;
            uploads.reserve(clients.size());
            for (auto &client : clients) {
                client.model.set_parameters(global.parameters());
                for (std::size_t e = 0; e < schedule.local_epochs; ++e) {
                    stats += train_epoch(client.model, client.shard,
                                         train.batch_size, train.optimizer,
                                         client.rng);
                }
                const auto p = client.model.parameters();
                uploads.emplace_back(p.begin(), p.end());
            }
            global.set_parameters(average_parameters(uploads));
            result.metrics.push_back(
                {round, clients.size(), stats.mean(), evaluate(global, test_set),
                 schedule.record_timing ? detail::elapsed_ms(started) : 0});
        }
        result.model = global;
        return result;
    }
}

} // namespace qfl
