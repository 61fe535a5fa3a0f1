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
#include <set>
#include <sstream>
#include <array>
#include <vector>

#include <gtest/gtest.h>

#include "qfl/datagen.hpp"

namespace {

using qfl::CirclesParams;
using qfl::Dataset;
using qfl::ScaleOptions;
using qfl::Split;
constexpr double pi = std::numbers::pi;

std::size_t count_label(const std::vector<qfl::Sample> &v, int label) {
    return static_cast<std::size_t>(std::count_if(
        v.begin(), v.end(), [label](const auto &s) { return s.label == label; }));
}

TEST(MakeCircles, NoiselessGeometry) {
    const Dataset ds = qfl::make_circles({8, 0.0, 0.5}, 1);
    ASSERT_EQ(ds.points.size(), 8u);
    for (const auto &p : ds.points) {
        const double r = std::hypot(p.features[0], p.features[1]);
        EXPECT_NEAR(r, p.label == 0 ? 1.0 : 0.5, 1e-15);
    }
    EXPECT_EQ(count_label(ds.points, 0), 4u);
    EXPECT_EQ(count_label(ds.points, 1), 4u);
}

TEST(MakeCircles, RadialNoiseMatchesSigma) {
    const Dataset ds = qfl::make_circles({10000, 0.1, 0.5}, 2);
    double sum = 0.0;
    double sq = 0.0;
    for (const auto &p : ds.points) {
        const double dr = std::hypot(p.features[0], p.features[1]) -
                          (p.label == 0 ? 1.0 : 0.5);
        sum += dr;
        sq += dr * dr;
    }
    const double n = static_cast<double>(ds.points.size());
    const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
    EXPECT_NEAR(sd, 0.1, 0.02);
}

TEST(MakeCircles, Deterministic) {
    EXPECT_EQ(qfl::make_circles({}, 9).points, qfl::make_circles({}, 9).points);
    EXPECT_NE(qfl::make_circles({}, 9).points, qfl::make_circles({}, 10).points);
}

TEST(MakeCircles, Errors) {
    EXPECT_THROW(qfl::make_circles({7, 0.1, 0.5}, 1), std::invalid_argument);
    EXPECT_THROW(qfl::make_circles({0, 0.1, 0.5}, 1), std::invalid_argument);
    EXPECT_THROW(qfl::make_circles({8, 0.1, 1.0}, 1), std::invalid_argument);
    EXPECT_THROW(qfl::make_circles({8, 0.1, 0.0}, 1), std::invalid_argument);
    EXPECT_THROW(qfl::make_circles({8, -0.1, 0.5}, 1), std::invalid_argument);
}

TEST(ScaleAndSplit, DefaultSizesAndBalance) {
    const Dataset ds = qfl::scale_and_split(qfl::make_circles({}, 42), {}, 42);
    const auto train = ds.train();
    const auto test = ds.test();
    EXPECT_EQ(train.size(), 960u);
    EXPECT_EQ(test.size(), 240u);
    EXPECT_LE(std::abs(static_cast<long>(count_label(train, 0)) -
                       static_cast<long>(count_label(train, 1))),
              1);
    EXPECT_LE(std::abs(static_cast<long>(count_label(test, 0)) -
                       static_cast<long>(count_label(test, 1))),
              1);
}

TEST(ScaleAndSplit, MinMaxEndpointsExact) {
    for (const auto &[lo, hi] : {std::pair{0.0, pi}, std::pair{-pi, pi}}) {
        const Dataset ds =
            qfl::scale_and_split(qfl::make_circles({}, 5), {0.8, lo, hi}, 5);
        const auto train = ds.train();
        for (std::size_t f = 0; f < 2; ++f) {
            const auto [mn, mx] = std::minmax_element(
                train.begin(), train.end(),
                [f](const auto &a, const auto &b) { return a.features[f] < b.features[f]; });
            EXPECT_EQ(mn->features[f], lo);
            EXPECT_EQ(mx->features[f], hi);
        }
        for (const auto &p : ds.points) {
            for (double v : p.features) {
                EXPECT_GE(v, lo);
                EXPECT_LE(v, hi);
            }
        }
    }
}

TEST(ScaleAndSplit, ClampCountMatchesIndependentRecount) {
    // Rebuild the seeded stratified split on the raw points and count test
    // coordinates outside the train min/max, i.e. the ones that get clamped.
    const CirclesParams cp{1200, 0.2, 0.5};
    const Dataset raw = qfl::make_circles(cp, 11);
    const ScaleOptions opts{0.8, 0.0, pi};
    const Dataset ds = qfl::scale_and_split(raw, opts, 11);

    qfl::Rng rng(11);
    std::array<std::vector<qfl::Sample>, 2> by_class;
    for (const auto &p : raw.points) {
        by_class[static_cast<std::size_t>(p.label)].push_back(p);
    }
    std::vector<qfl::Sample> train, test;
    for (auto &cls : by_class) {
        std::shuffle(cls.begin(), cls.end(), rng);
        const auto n_train = static_cast<std::size_t>(std::llround(0.8 * cls.size()));
        train.insert(train.end(), cls.begin(), cls.begin() + static_cast<long>(n_train));
        test.insert(test.end(), cls.begin() + static_cast<long>(n_train), cls.end());
    }
    std::size_t expected = 0;
    for (std::size_t f = 0; f < 2; ++f) {
        double lo = train[0].features[f], hi = lo;
        for (const auto &s : train) {
            lo = std::min(lo, s.features[f]);
            hi = std::max(hi, s.features[f]);
        }
        for (const auto &s : test) {
            expected += (s.features[f] < lo || s.features[f] > hi) ? 1 : 0;
        }
    }
    EXPECT_EQ(ds.clamped_test_values, expected);
}

TEST(ScaleAndSplit, DisjointAndCovering) {
    const Dataset raw = qfl::make_circles({}, 3);
    const Dataset ds = qfl::scale_and_split(raw, {}, 3);
    EXPECT_EQ(ds.points.size(), raw.points.size());
    EXPECT_EQ(ds.train().size() + ds.test().size(), raw.points.size());
}

TEST(ScaleAndSplit, Deterministic) {
    const Dataset raw = qfl::make_circles({}, 4);
    EXPECT_EQ(qfl::scale_and_split(raw, {}, 4).points,
              qfl::scale_and_split(raw, {}, 4).points);
}

TEST(ScaleAndSplit, Errors) {
    Dataset flat;
    for (int i = 0; i < 10; ++i) {
        flat.points.push_back({{1.0, static_cast<double>(i)}, i % 2, Split::Train});
    }
    EXPECT_THROW(qfl::scale_and_split(flat, {}, 1), std::invalid_argument);
    const Dataset raw = qfl::make_circles({}, 1);
    EXPECT_THROW(qfl::scale_and_split(raw, {1.0, 0.0, pi}, 1), std::invalid_argument);
    EXPECT_THROW(qfl::scale_and_split(raw, {0.8, pi, 0.0}, 1), std::invalid_argument);
}

TEST(DatasetCsv, RoundTripAndFormat) {
    const Dataset ds = qfl::scale_and_split(qfl::make_circles({40, 0.1, 0.5}, 8), {}, 8);
    std::ostringstream os;
    qfl::write_dataset_csv(os, ds);
    const std::string text = os.str();
    EXPECT_EQ(text.rfind("x1,x2,label,split\n", 0), 0u);
    EXPECT_EQ(text.find('\r'), std::string::npos);

    std::istringstream is(text);
    const Dataset back = qfl::read_dataset_csv(is);
    ASSERT_EQ(back.points.size(), ds.points.size());
    for (std::size_t i = 0; i < ds.points.size(); ++i) {
        EXPECT_EQ(back.points[i].label, ds.points[i].label);
        EXPECT_EQ(back.points[i].split, ds.points[i].split);
        for (std::size_t f = 0; f < 2; ++f) {
            EXPECT_NEAR(back.points[i].features[f], ds.points[i].features[f],
                        1e-8 * std::max(1.0, std::abs(ds.points[i].features[f])));
        }
    }
    // 9 significant digits are stable under a second round trip.
    std::ostringstream again;
    qfl::write_dataset_csv(again, back);
    EXPECT_EQ(again.str(), text);
}

TEST(DatasetCsv, RejectsMalformed) {
    std::istringstream no_header("1,2,0,train\n");
    EXPECT_THROW(qfl::read_dataset_csv(no_header), std::runtime_error);
    std::istringstream bad_split("x1,x2,label,split\n1,2,0,validation\n");
    EXPECT_THROW(qfl::read_dataset_csv(bad_split), std::runtime_error);
    std::istringstream bad_num("x1,x2,label,split\nabc,2,0,train\n");
    EXPECT_THROW(qfl::read_dataset_csv(bad_num), std::runtime_error);
}

TEST(DatasetChecksum, SensitiveToContent) {
    const Dataset a = qfl::scale_and_split(qfl::make_circles({}, 42), {}, 42);
    const Dataset b = qfl::scale_and_split(qfl::make_circles({}, 43), {}, 43);
    EXPECT_EQ(qfl::dataset_checksum(a), qfl::dataset_checksum(a));
    EXPECT_NE(qfl::dataset_checksum(a), qfl::dataset_checksum(b));
    EXPECT_EQ(qfl::dataset_checksum(a).size(), 16u);
}

} // namespace
