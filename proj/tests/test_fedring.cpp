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


#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "qfl/datagen.hpp"
#include "qfl/fedring.hpp"

namespace {

using qfl::Sample;
constexpr double pi = std::numbers::pi;

std::vector<Sample> numbered(std::size_t n) {
    std::vector<Sample> v;
    for (std::size_t i = 0; i < n; ++i) {
        v.push_back({{static_cast<double>(i), 0.0}, static_cast<int>(i % 2),
                     qfl::Split::Train});
    }
    return v;
}

struct SmallProblem {
    std::vector<Sample> train;
    std::vector<Sample> test;
};

SmallProblem small_problem() {
    const auto ds =
        qfl::scale_and_split(qfl::make_circles({120, 0.05, 0.5}, 21), {}, 21);
    return {ds.train(), ds.test()};
}

template <typename M> M initial_model(qfl::Rng &rng);
template <> qfl::ClassicalMlp initial_model(qfl::Rng &rng) {
    return qfl::ClassicalMlp::random(rng);
}
template <> qfl::VqcClassifier initial_model(qfl::Rng &rng) {
    return qfl::VqcClassifier::random(2, rng);
}
template <> qfl::QuantumWeightClassifier initial_model(qfl::Rng &rng) {
    return qfl::QuantumWeightClassifier::random(2, pi, rng);
}

bool same_params(std::span<const double> a, std::span<const double> b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin());
}

TEST(Partition, DefaultSplit) {
    const auto shards = qfl::partition(numbered(960), 3, 42);
    ASSERT_EQ(shards.size(), 3u);
    for (const auto &s : shards) {
        EXPECT_EQ(s.size(), 320u);
    }
}

TEST(Partition, SingleClientIsWholeSet) {
    const auto data = numbered(50);
    const auto shards = qfl::partition(data, 1, 7);
    ASSERT_EQ(shards.size(), 1u);
    EXPECT_EQ(shards[0], data);
}

TEST(Partition, DisjointCoveringBalanced) {
    for (std::size_t k : {2u, 3u, 5u, 7u}) {
        const auto data = numbered(101);
        const auto shards = qfl::partition(data, k, 13);
        std::multiset<double> seen;
        std::size_t lo = data.size(), hi = 0;
        for (const auto &s : shards) {
            lo = std::min(lo, s.size());
            hi = std::max(hi, s.size());
            for (const auto &p : s) {
                seen.insert(p.features[0]);
            }
        }
        EXPECT_LE(hi - lo, 1u);
        ASSERT_EQ(seen.size(), data.size());
        for (const auto &p : data) {
            EXPECT_EQ(seen.count(p.features[0]), 1u);
        }
    }
}

TEST(Partition, Deterministic) {
    const auto data = numbered(90);
    EXPECT_EQ(qfl::partition(data, 3, 5), qfl::partition(data, 3, 5));
    EXPECT_NE(qfl::partition(data, 3, 5), qfl::partition(data, 3, 6));
}

TEST(Partition, Errors) {
    const auto data = numbered(4);
    EXPECT_THROW(qfl::partition(data, 5, 1), std::invalid_argument);
    EXPECT_THROW(qfl::partition(data, 0, 1), std::invalid_argument);
}

template <typename M> class RingVariants : public ::testing::Test {};
using Variants =
    ::testing::Types<qfl::ClassicalMlp, qfl::VqcClassifier, qfl::QuantumWeightClassifier>;
TYPED_TEST_SUITE(RingVariants, Variants);

TYPED_TEST(RingVariants, SingleClientRingEqualsCentralized) {
    using M = TypeParam;
    const auto prob = small_problem();
    qfl::Rng init(3);
    const M start = initial_model<M>(init);
    const qfl::RingSchedule sched{1, 5, 2};
    const qfl::TrainConfig cfg{32, {0.1}};

    auto clients = qfl::make_clients(start, qfl::partition(prob.train, 1, 9), 9);
    qfl::Rng channel(0);
    const auto ring = qfl::run_ring(sched, clients, prob.test, cfg, channel);

    M central = start;
    qfl::Rng rng = qfl::client_rng(9, 0);
    ASSERT_EQ(ring.metrics.size(), 5u);
    for (std::size_t r = 0; r < 5; ++r) {
        const auto stats = qfl::train_centralized(central, std::span<const Sample>(prob.train),
                                                  2, cfg, rng);
        EXPECT_EQ(ring.metrics[r].mean_train_loss, stats.mean());
        EXPECT_EQ(ring.metrics[r].test_accuracy, qfl::evaluate(central, prob.test));
    }
    EXPECT_TRUE(same_params(ring.model.parameters(), central.parameters()));
}

TYPED_TEST(RingVariants, Deterministic) {
    using M = TypeParam;
    const auto prob = small_problem();
    qfl::Rng init(4);
    const M start = initial_model<M>(init);
    const qfl::RingSchedule sched{3, 2, 1};
    auto run = [&] {
        auto clients = qfl::make_clients(start, qfl::partition(prob.train, 3, 2), 2);
        qfl::Rng channel(1);
        return qfl::run_ring(sched, clients, prob.test, {}, channel);
    };
    const auto a = run();
    const auto b = run();
    EXPECT_TRUE(same_params(a.model.parameters(), b.model.parameters()));
    ASSERT_EQ(a.metrics.size(), b.metrics.size());
    for (std::size_t i = 0; i < a.metrics.size(); ++i) {
        EXPECT_EQ(a.metrics[i].mean_train_loss, b.metrics[i].mean_train_loss);
        EXPECT_EQ(a.metrics[i].test_accuracy, b.metrics[i].test_accuracy);
        EXPECT_EQ(a.metrics[i].client_id, 2u);
        EXPECT_EQ(a.metrics[i].round, i + 1);
        EXPECT_EQ(a.metrics[i].wall_ms, 0);
    }
}

TEST(RunRing, RejectsZeroRounds) {
    const auto prob = small_problem();
    auto clients = qfl::make_clients(qfl::ClassicalMlp{}, qfl::partition(prob.train, 1, 1), 1);
    qfl::Rng channel(0);
    EXPECT_THROW(qfl::run_ring(qfl::RingSchedule{1, 0, 1}, clients, prob.test, {}, channel),
                 std::invalid_argument);
    EXPECT_THROW(qfl::run_ring(qfl::RingSchedule{2, 1, 1}, clients, prob.test, {}, channel),
                 std::invalid_argument);
}

TEST(RunRing, TeleportNeedsQuantumWeights) {
    const auto prob = small_problem();
    auto clients = qfl::make_clients(qfl::ClassicalMlp{}, qfl::partition(prob.train, 1, 1), 1);
    qfl::Rng channel(0);
    const qfl::RingSchedule sched{1, 1, 1, qfl::Transport::Teleport};
    EXPECT_THROW(qfl::run_ring(sched, clients, prob.test, {}, channel),
                 std::invalid_argument);
}

TEST(RunRing, OneStepChainOracle) {
    // R=1, E=1 and shards no larger than a batch: each client takes exactly
    // one SGD step from the parameters the previous client handed over.
    const auto prob = small_problem();
    const std::vector<Sample> train(prob.train.begin(), prob.train.begin() + 40);
    qfl::Rng init(5);
    const auto start = qfl::ClassicalMlp::random(init);
    const double lr = 0.1;
    const auto shards = qfl::partition(train, 2, 6);

    auto clients = qfl::make_clients(start, shards, 6);
    qfl::Rng channel(0);
    const auto ring =
        qfl::run_ring(qfl::RingSchedule{2, 1, 1}, clients, prob.test, {32, {lr}}, channel);

    std::vector<double> p(start.parameters().begin(), start.parameters().end());
    for (const auto &shard : shards) {
        const qfl::ClassicalMlp m(p);
        std::vector<double> g(p.size(), 0.0);
        for (const auto &s : shard) {
            const auto bp = m.forward_backward(s.features, s.label);
            for (std::size_t i = 0; i < g.size(); ++i) {
                g[i] += bp.grad[i] / static_cast<double>(shard.size());
            }
        }
        for (std::size_t i = 0; i < p.size(); ++i) {
            p[i] -= lr * g[i];
        }
    }
    const auto got = ring.model.parameters();
    for (std::size_t i = 0; i < p.size(); ++i) {
        EXPECT_NEAR(got[i], p[i], 1e-12);
    }
}

TEST(RunRing, TeleportMatchesCopy) {
    const auto prob = small_problem();
    qfl::Rng init(8);
    const auto start = qfl::QuantumWeightClassifier::random(2, pi, init);
    auto run = [&](qfl::Transport t) {
        auto clients = qfl::make_clients(start, qfl::partition(prob.train, 3, 4), 4);
        qfl::Rng channel(12);
        return qfl::run_ring(qfl::RingSchedule{3, 10, 1, t}, clients, prob.test, {},
                             channel);
    };
    const auto copy = run(qfl::Transport::ClassicalCopy);
    const auto tele = run(qfl::Transport::Teleport);
    ASSERT_EQ(copy.metrics.size(), 10u);
    for (std::size_t i = 0; i < copy.metrics.size(); ++i) {
        EXPECT_NEAR(copy.metrics[i].mean_train_loss, tele.metrics[i].mean_train_loss, 1e-9);
        EXPECT_NEAR(copy.metrics[i].test_accuracy, tele.metrics[i].test_accuracy, 1e-9);
    }
    const auto a = copy.model.parameters();
    const auto b = tele.model.parameters();
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_NEAR(a[i], b[i], 1e-9);
    }
}

TEST(RingTransportError, ReportsLocation) {
    const qfl::RingTransportError e(7, 2, qfl::TeleportError(5, "bad pair"));
    EXPECT_EQ(e.round(), 7u);
    EXPECT_EQ(e.client(), 2u);
    EXPECT_EQ(e.weight_index(), 5u);
}

TEST(AverageParameters, Examples) {
    EXPECT_EQ(qfl::average_parameters({{1.0, 5.0}, {3.0, -1.0}}),
              (std::vector<double>{2.0, 2.0}));
    EXPECT_THROW(qfl::average_parameters({}), std::invalid_argument);
    EXPECT_THROW(qfl::average_parameters({{1.0}, {1.0, 2.0}}), std::invalid_argument);
}

TEST(AverageParameters, MatchesIndependentSumAndIsPermutationInvariant) {
    std::mt19937_64 rng(191);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<double>> vs(5, std::vector<double>(22));
        for (auto &v : vs) {
            for (auto &x : v) {
                x = u(rng);
            }
        }
        const auto mean = qfl::average_parameters(vs);
        for (std::size_t i = 0; i < 22; ++i) {
            long double s = 0.0L;
            for (const auto &v : vs) {
                s += v[i];
            }
            EXPECT_NEAR(mean[i], static_cast<double>(s / 5.0L), 1e-12);
        }
        auto shuffled = vs;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        EXPECT_EQ(qfl::average_parameters(shuffled), mean);
    }
}

TEST(RunHubspoke, SingleClientEqualsCentralized) {
    const auto prob = small_problem();
    qfl::Rng init(10);
    const auto start = qfl::VqcClassifier::random(2, init);
    auto clients = qfl::make_clients(start, qfl::partition(prob.train, 1, 3), 3);
    const auto hub = qfl::run_hubspoke(qfl::RingSchedule{1, 3, 1}, clients, prob.test, {});
    auto central = start;
    qfl::Rng rng = qfl::client_rng(3, 0);
    qfl::train_centralized(central, std::span<const Sample>(prob.train), 3, {}, rng);
    EXPECT_TRUE(same_params(hub.model.parameters(), central.parameters()));
    EXPECT_EQ(hub.metrics.back().client_id, 1u);
}

TEST(RunHubspoke, ClientOrderDoesNotMatter) {
    const auto prob = small_problem();
    qfl::Rng init(11);
    const auto start = qfl::ClassicalMlp::random(init);
    auto forward = qfl::make_clients(start, qfl::partition(prob.train, 3, 5), 5);
    auto reversed = forward;
    std::reverse(reversed.begin(), reversed.end());
    const qfl::RingSchedule sched{3, 3, 2};
    const auto a = qfl::run_hubspoke(sched, forward, prob.test, {});
    const auto b = qfl::run_hubspoke(sched, reversed, prob.test, {});
    EXPECT_TRUE(same_params(a.model.parameters(), b.model.parameters()));
}

TEST(RunHubspoke, RejectsQuantumWeights) {
    const auto prob = small_problem();
    qfl::Rng init(12);
    auto clients = qfl::make_clients(qfl::QuantumWeightClassifier::random(2, pi, init),
                                     qfl::partition(prob.train, 2, 1), 1);
    EXPECT_THROW(qfl::run_hubspoke(qfl::RingSchedule{2, 1, 1}, clients, prob.test, {}),
                 std::invalid_argument);
}

} // namespace
