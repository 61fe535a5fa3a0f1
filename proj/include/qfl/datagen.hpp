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
 * make-circles toy dataset: generation, stratified train/test split, and
 * min-max scaling of features into rotation angles.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qfl/statevec.hpp"

namespace qfl {

enum class Split { Train, Test };

struct Sample {
    std::array<double, 2> features{};
    int label = 0;
    Split split = Split::Train;
    friend bool operator==(const Sample &, const Sample &) = default;
};

struct Dataset {
    std::vector<Sample> points;
    /// Test coordinates that fell outside the scaled range and were clamped.
    std::size_t clamped_test_values = 0;

    [[nodiscard]] std::vector<Sample> select(Split s) const {
        std::vector<Sample> out;
        std::copy_if(points.begin(), points.end(), std::back_inserter(out),
                     [s](const Sample &p) { return p.split == s; });
        return out;
    }
    [[nodiscard]] std::vector<Sample> train() const { return select(Split::Train); }
    [[nodiscard]] std::vector<Sample> test() const { return select(Split::Test); }
};

struct CirclesParams {
    std::size_t n = 1200;
    double noise_sigma = 0.1;
    double factor = 0.5;
};

/// n/2 points on the unit circle (label 0) and n/2 on the circle of radius
/// `factor` (label 1) at evenly spaced angles, each coordinate jittered by
/// N(0, noise_sigma^2).
inline Dataset make_circles(const CirclesParams &params, std::uint64_t seed) {
    if (params.n == 0 || params.n % 2 != 0) {
        throw std::invalid_argument("make_circles: n must be positive and even");
    }
    if (!(params.factor > 0.0 && params.factor < 1.0)) {
        throw std::invalid_argument("make_circles: factor must lie in (0, 1)");
    }
    if (!(params.noise_sigma >= 0.0) || !std::isfinite(params.noise_sigma)) {
        throw std::invalid_argument("make_circles: noise_sigma must be >= 0");
    }
    const std::size_t half = params.n / 2;
    Dataset ds;
    ds.points.reserve(params.n);
    for (int label = 0; label < 2; ++label) {
        const double radius = label == 0 ? 1.0 : params.factor;
        for (std::size_t i = 0; i < half; ++i) {
            const double t = 2.0 * std::numbers::pi * static_cast<double>(i) /
                             static_cast<double>(half);
            ds.points.push_back({{radius * std::cos(t), radius * std::sin(t)},
                                 label,
                                 Split::Train});
        }
    }
    if (params.noise_sigma > 0.0) {
        Rng rng(seed);
        std::normal_distribution<double> noise(0.0, params.noise_sigma);
        for (auto &p : ds.points) {
            p.features[0] += noise(rng);
            p.features[1] += noise(rng);
        }
    }
    return ds;
}

struct ScaleOptions {
    double train_fraction = 0.8;
    /// Features are mapped onto [range_min, range_max].
    double range_min = -std::numbers::pi;
    double range_max = std::numbers::pi;
};

/// Stratified seeded split followed by per-feature min-max scaling fitted on
/// the training portion. Test values outside the range are clamped and
/// counted in `clamped_test_values`.
inline Dataset scale_and_split(const Dataset &raw, const ScaleOptions &opts,
                               std::uint64_t seed) {
    if (!(opts.train_fraction > 0.0 && opts.train_fraction < 1.0)) {
        throw std::invalid_argument(
            "scale_and_split: train_fraction must lie in (0, 1)");
    }
    if (!std::isfinite(opts.range_min) || !std::isfinite(opts.range_max) ||
        !(opts.range_max > opts.range_min)) {
        throw std::invalid_argument(
            "scale_and_split: need finite range_min < range_max");
    }
    Rng rng(seed);
    std::array<std::vector<Sample>, 2> by_class;
    for (const auto &p : raw.points) {
        if (p.label != 0 && p.label != 1) {
            throw std::invalid_argument("scale_and_split: label must be 0 or 1");
        }
        by_class[static_cast<std::size_t>(p.label)].push_back(p);
    }
    std::vector<Sample> train;
    std::vector<Sample> test;
    for (auto &cls : by_class) {
        std::shuffle(cls.begin(), cls.end(), rng);
        const auto n_train = static_cast<std::size_t>(
            std::llround(opts.train_fraction * static_cast<double>(cls.size())));
        for (std::size_t i = 0; i < cls.size(); ++i) {
            Sample s = cls[i];
            s.split = i < n_train ? Split::Train : Split::Test;
            (i < n_train ? train : test).push_back(s);
        }
    }
    if (train.empty() || test.empty()) {
        throw std::invalid_argument("scale_and_split: a split would be empty");
    }
    std::shuffle(train.begin(), train.end(), rng);
    std::shuffle(test.begin(), test.end(), rng);

    std::array<double, 2> lo{};
    std::array<double, 2> hi{};
    for (std::size_t f = 0; f < 2; ++f) {
        const auto [mn, mx] = std::minmax_element(
            train.begin(), train.end(), [f](const Sample &a, const Sample &b) {
                return a.features[f] < b.features[f];
            });
        lo[f] = mn->features[f];
        hi[f] = mx->features[f];
        if (!(hi[f] > lo[f])) {
            throw std::invalid_argument("scale_and_split: degenerate feature");
        }
    }

    const double width = opts.range_max - opts.range_min;
    Dataset out;
    out.points.reserve(train.size() + test.size());
    auto scale = [&](Sample s) {
        for (std::size_t f = 0; f < 2; ++f) {
            double v = opts.range_min + (s.features[f] - lo[f]) /
                                            (hi[f] - lo[f]) * width;
            if (v < opts.range_min || v > opts.range_max) {
                v = std::clamp(v, opts.range_min, opts.range_max);
                ++out.clamped_test_values;
            }
            s.features[f] = v;
        }
        return s;
    };
    for (const auto &s : train) {
        out.points.push_back(scale(s));
    }
    // Training values land inside the range by construction, so everything
    // counted from here on is a test value.
    out.clamped_test_values = 0;
    for (const auto &s : test) {
        out.points.push_back(scale(s));
    }
    return out;
}

// ---- CSV: header "x1,x2,label,split", floats with 9 significant digits ----

inline std::string format_g9(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline void write_dataset_csv(std::ostream &os, const Dataset &ds) {
    os << "x1,x2,label,split\n";
    for (const auto &p : ds.points) {
        os << format_g9(p.features[0]) << ',' << format_g9(p.features[1]) << ','
           << p.label << ',' << (p.split == Split::Train ? "train" : "test")
           << '\n';
    }
}

inline Dataset read_dataset_csv(std::istream &is) {
    std::string line;
    if (!std::getline(is, line) || line != "x1,x2,label,split") {
        throw std::runtime_error("dataset csv: missing or wrong header");
    }
    Dataset ds;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        std::stringstream ss(line);
        std::string x1, x2, label, split;
        if (!std::getline(ss, x1, ',') || !std::getline(ss, x2, ',') ||
            !std::getline(ss, label, ',') || !std::getline(ss, split)) {
            throw std::runtime_error("dataset csv: malformed line " +
                                     std::to_string(lineno));
        }
        Sample s;
        try {
            s.features = {std::stod(x1), std::stod(x2)};
            s.label = std::stoi(label);
        } catch (const std::exception &) {
            throw std::runtime_error("dataset csv: bad number on line " +
                                     std::to_string(lineno));
        }
        if ((s.label != 0 && s.label != 1) ||
            (split != "train" && split != "test")) {
            throw std::runtime_error("dataset csv: bad label/split on line " +
                                     std::to_string(lineno));
        }
        s.split = split == "train" ? Split::Train : Split::Test;
        ds.points.push_back(s);
    }
    return ds;
}

/// FNV-1a 64 over the dataset's CSV text, as 16 hex digits.
inline std::string dataset_checksum(const Dataset &ds) {
    std::ostringstream os;
    write_dataset_csv(os, ds);
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : os.str()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace qfl
