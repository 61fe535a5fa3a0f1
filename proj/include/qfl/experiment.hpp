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
 * End-to-end experiment runner behind the `qflring` command line tool:
 * configuration, dataset construction, federated training and the metrics
 * CSV files.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qfl/datagen.hpp"
#include "qfl/fedring.hpp"
#include "qfl/trainkit.hpp"

namespace qfl {

enum class ModelKind { Cfl, QflClassical, QflQuantum };
enum class Topology { Ring, HubSpoke };

inline std::string to_string(ModelKind m) {
    switch (m) {
    case ModelKind::Cfl:
        return "cfl";
    case ModelKind::QflClassical:
        return "qfl-classical";
    case ModelKind::QflQuantum:
        return "qfl-quantum";
    }
    return "?";
}

inline ModelKind parse_model(const std::string &s) {
    if (s == "cfl") {
        return ModelKind::Cfl;
    }
    if (s == "qfl-classical") {
        return ModelKind::QflClassical;
    }
    if (s == "qfl-quantum") {
        return ModelKind::QflQuantum;
    }
    throw std::invalid_argument("unknown model '" + s +
                                "' (expected cfl, qfl-classical or qfl-quantum)");
}

class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown instead of a config when `--help` was given; carries the text.
class HelpRequested : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    ModelKind model = ModelKind::Cfl;
    Topology topology = Topology::Ring;
    std::size_t clients = 3;
    std::size_t rounds = 100;
    std::size_t local_epochs = 5;
    std::size_t layers = 2;
    double learning_rate = 0.1;
    std::size_t batch_size = 32;
    double gamma = std::numbers::pi;
    CirclesParams circles{};
    double train_fraction = 0.8;
    double feature_min = -std::numbers::pi;
    double feature_max = std::numbers::pi;
    Transport transport = Transport::ClassicalCopy;
    std::uint64_t seed = 42;
    std::string output = "metrics.csv";
    std::string dump_dataset;
    bool record_timing = false;

    /// Throws ConfigError naming the first violated bound.
    void validate() const {
        auto fail = [](const std::string &m) { throw ConfigError(m); };
        if (clients < 1) fail("clients must be >= 1");
        if (rounds < 1) fail("rounds must be >= 1");
        if (local_epochs < 1) fail("local-epochs must be >= 1");
        if (layers < 1) fail("layers must be >= 1");
        if (batch_size < 1) fail("batch-size must be >= 1");
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
            fail("learning-rate must be > 0");
        if (!(gamma > 0.0) || !std::isfinite(gamma)) fail("gamma must be > 0");
        if (circles.n < 2 || circles.n % 2 != 0) fail("n must be even and >= 2");
        if (!(circles.noise_sigma >= 0.0) || !std::isfinite(circles.noise_sigma))
            fail("noise must be >= 0");
        if (!(circles.factor > 0.0 && circles.factor < 1.0))
            fail("factor must lie in (0, 1)");
        if (!(train_fraction > 0.0 && train_fraction < 1.0))
            fail("train-fraction must lie in (0, 1)");
        if (!std::isfinite(feature_min) || !std::isfinite(feature_max) ||
            !(feature_max > feature_min))
            fail("feature-min must be below feature-max");
        if (transport == Transport::Teleport && model != ModelKind::QflQuantum)
            fail("transport=teleport requires model=qfl-quantum");
        if (topology == Topology::HubSpoke && model == ModelKind::QflQuantum)
            fail("hub-spoke averaging is undefined for quantum weights");
        if (topology == Topology::HubSpoke && transport == Transport::Teleport)
            fail("hub-spoke supports only transport=copy");
        if (output.empty()) fail("output path must not be empty");
    }

    [[nodiscard]] bool same_dataset(const ExperimentConfig &o) const {
        return circles.n == o.circles.n &&
               circles.noise_sigma == o.circles.noise_sigma &&
               circles.factor == o.circles.factor &&
               train_fraction == o.train_fraction &&
               feature_min == o.feature_min && feature_max == o.feature_max &&
               seed == o.seed;
    }
};

namespace detail {

inline void add_experiment_options(CLI::App &app, ExperimentConfig &cfg,
                                   std::string &transport, std::string &topology) {
    app.add_option("--clients", cfg.clients, "number of ring clients K");
    app.add_option("--rounds", cfg.rounds, "training rounds R (full ring loops)");
    app.add_option("--local-epochs", cfg.local_epochs, "local epochs E per visit");
    app.add_option("--layers", cfg.layers, "variational layers L");
    app.add_option("--learning-rate,--lr", cfg.learning_rate, "SGD step size");
    app.add_option("--batch-size", cfg.batch_size, "mini-batch size");
    app.add_option("--gamma", cfg.gamma, "quantum-weight scale");
    app.add_option("--n", cfg.circles.n, "dataset size");
    app.add_option("--noise", cfg.circles.noise_sigma, "coordinate noise sigma");
    app.add_option("--factor", cfg.circles.factor, "inner/outer radius ratio");
    app.add_option("--train-fraction", cfg.train_fraction, "train share of points");
    app.add_option("--feature-min", cfg.feature_min,
                   "lower end of the scaled feature range");
    app.add_option("--feature-max", cfg.feature_max,
                   "upper end of the scaled feature range");
    app.add_option("--transport", transport, "copy | teleport")
        ->check(CLI::IsMember({"copy", "teleport"}));
    app.add_option("--topology", topology, "ring | hubspoke")
        ->check(CLI::IsMember({"ring", "hubspoke"}));
    app.add_option("--seed", cfg.seed, "experiment seed");
    app.add_option("--output,-o", cfg.output, "metrics CSV path");
    app.add_option("--dump-dataset", cfg.dump_dataset,
                   "also write the scaled dataset CSV here");
    app.add_flag("--timing", cfg.record_timing,
                 "record wall-clock milliseconds per round");
    app.set_config("--config", "", "flat key=value configuration file");
    app.allow_config_extras(false);
}

inline void parse_app(CLI::App &app, const std::vector<std::string> &args) {
    // CLI11 consumes arguments from the back.
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp &) {
        throw HelpRequested(app.help());
    } catch (const CLI::ParseError &e) {
        throw ConfigError(e.what());
    }
}

inline void finish_config(ExperimentConfig &cfg, const std::string &transport,
                          const std::string &topology) {
    cfg.transport =
        transport == "teleport" ? Transport::Teleport : Transport::ClassicalCopy;
    cfg.topology = topology == "hubspoke" ? Topology::HubSpoke : Topology::Ring;
}

} // namespace detail

/// Parses `args` (without the program name). Values from a `--config` file
/// are overridden by explicit flags. Throws ConfigError on any problem.
inline ExperimentConfig parse_config(const std::vector<std::string> &args) {
    CLI::App app{"qflring run"};
    ExperimentConfig cfg;
    std::string model;
    std::string transport = "copy";
    std::string topology = "ring";
    app.add_option("--model", model, "cfl | qfl-classical | qfl-quantum")
        ->required();
    detail::add_experiment_options(app, cfg, transport, topology);
    detail::parse_app(app, args);
    try {
        cfg.model = parse_model(model);
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    detail::finish_config(cfg, transport, topology);
    cfg.validate();
    return cfg;
}

// ---- metrics CSV ------------------------------------------------------------

inline constexpr const char *kMetricsHeader =
    "round,client,mean_train_loss,test_accuracy,wall_ms";

inline void write_metrics_row(std::ostream &os, const RoundMetrics &m) {
    os << m.round << ',' << m.client_id << ',' << format_g9(m.mean_train_loss)
       << ',' << format_g9(m.test_accuracy) << ',' << m.wall_ms << '\n';
}

inline void write_metrics_csv(std::ostream &os,
                              const std::vector<RoundMetrics> &metrics) {
    os << kMetricsHeader << '\n';
    for (const auto &m : metrics) {
        write_metrics_row(os, m);
    }
}

/// First round whose accuracy is within `tolerance` of the final accuracy.
inline std::size_t convergence_round(const std::vector<RoundMetrics> &metrics,
                                     double tolerance = 0.02) {
    if (metrics.empty()) {
        return 0;
    }
    const double final_acc = metrics.back().test_accuracy;
    for (const auto &m : metrics) {
        if (std::abs(m.test_accuracy - final_acc) <= tolerance) {
            return m.round;
        }
    }
    return metrics.back().round;
}

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<RoundMetrics> metrics;
    double final_accuracy = 0.0;
    std::size_t convergence = 0;
    std::string dataset_checksum;
};

inline Dataset build_dataset(const ExperimentConfig &cfg) {
    const Dataset raw = make_circles(cfg.circles, cfg.seed);
    return scale_and_split(
        raw, {cfg.train_fraction, cfg.feature_min, cfg.feature_max}, cfg.seed);
}

/// Rng for a named purpose, derived from the experiment seed.
inline Rng derived_rng(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32), stream, 0x9e37u};
    return Rng(seq);
}

inline constexpr std::uint32_t kInitStream = 1;
inline constexpr std::uint32_t kChannelStream = 2;

namespace detail {

template <Classifier M>
std::vector<RoundMetrics> train_federated(const ExperimentConfig &cfg,
                                          const M &initial, const Dataset &ds) {
    const std::vector<Sample> train = ds.train();
    const std::vector<Sample> test = ds.test();
    RingSchedule schedule{cfg.clients, cfg.rounds, cfg.local_epochs, cfg.transport,
                          cfg.record_timing};
    TrainConfig tc{cfg.batch_size, SgdOptimizer{cfg.learning_rate}};
    auto clients = make_clients(initial, partition(train, cfg.clients, cfg.seed),
                                cfg.seed);
    if (cfg.topology == Topology::HubSpoke) {
        return run_hubspoke(schedule, clients, test, tc).metrics;
    }
    Rng channel = derived_rng(cfg.seed, kChannelStream);
    return run_ring(schedule, clients, test, tc, channel).metrics;
}

} // namespace detail

/// Trains the configured model on an already built dataset.
inline std::vector<RoundMetrics> train_model(const ExperimentConfig &cfg,
                                             const Dataset &ds) {
    Rng init = derived_rng(cfg.seed, kInitStream);
    switch (cfg.model) {
    case ModelKind::Cfl:
        return detail::train_federated(cfg, ClassicalMlp::random(init), ds);
    case ModelKind::QflClassical:
        return detail::train_federated(cfg, VqcClassifier::random(cfg.layers, init),
                                       ds);
    case ModelKind::QflQuantum:
        return detail::train_federated(
            cfg, QuantumWeightClassifier::random(cfg.layers, cfg.gamma, init), ds);
    }
    throw std::logic_error("train_model: unhandled model kind");
}

inline ExperimentResult summarize(const ExperimentConfig &cfg,
                                  std::vector<RoundMetrics> metrics,
                                  std::string checksum) {
    ExperimentResult r{cfg, std::move(metrics), 0.0, 0, std::move(checksum)};
    r.final_accuracy = r.metrics.back().test_accuracy;
    r.convergence = convergence_round(r.metrics);
    return r;
}

inline void print_summary(std::ostream &log, const ExperimentResult &r) {
    const auto &c = r.config;
    log << "model=" << to_string(c.model)
        << " topology=" << (c.topology == Topology::Ring ? "ring" : "hubspoke")
        << " transport="
        << (c.transport == Transport::Teleport ? "teleport" : "copy")
        << " rounds=" << c.rounds << " client_visits=" << c.rounds * c.clients
        << " final_accuracy=" << format_g9(r.final_accuracy)
        << " convergence_round=" << r.convergence
        << " dataset=" << r.dataset_checksum << '\n';
}

inline std::ofstream open_output(const std::string &path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    return os;
}

inline void close_output(std::ofstream &os, const std::string &path) {
    os.close();
    if (!os) {
        throw std::runtime_error("failed writing '" + path + "'");
    }
}

/// Runs one experiment and writes its metrics CSV (and optionally the
/// dataset). Throws on any failure; the caller maps that to an exit code.
inline ExperimentResult run_experiment(const ExperimentConfig &cfg,
                                       std::ostream &log) {
    cfg.validate();
    const Dataset ds = build_dataset(cfg);
    if (ds.clamped_test_values > 0) {
        log << "clamped " << ds.clamped_test_values
            << " test feature values into [" << format_g9(cfg.feature_min)
            << ", " << format_g9(cfg.feature_max) << "]\n";
    }
    if (!cfg.dump_dataset.empty()) {
        auto os = open_output(cfg.dump_dataset);
        write_dataset_csv(os, ds);
        close_output(os, cfg.dump_dataset);
    }
    // Open before training so an unwritable path fails fast.
    auto out = open_output(cfg.output);
    ExperimentResult r = summarize(cfg, train_model(cfg, ds), dataset_checksum(ds));
    write_metrics_csv(out, r.metrics);
    close_output(out, cfg.output);
    print_summary(log, r);
    return r;
}

inline constexpr const char *kCompareHeader =
    "model,round,client,mean_train_loss,test_accuracy,wall_ms,dataset_checksum";

/// Runs each config in turn on one shared dataset and writes a single CSV
/// with a leading `model` column to `output`.
inline std::vector<ExperimentResult>
compare(const std::vector<ExperimentConfig> &configs, const std::string &output,
        std::ostream &log) {
    if (configs.size() < 2) {
        throw ConfigError("compare needs at least two configurations");
    }
    for (const auto &c : configs) {
        c.validate();
        if (!c.same_dataset(configs.front())) {
            throw ConfigError("compare: configurations disagree on dataset "
                              "parameters or seed");
        }
    }
    auto out = open_output(output);
    const Dataset ds = build_dataset(configs.front());
    const std::string checksum = dataset_checksum(ds);
    std::vector<ExperimentResult> results;
    out << kCompareHeader << '\n';
    for (const auto &c : configs) {
        ExperimentResult r = summarize(c, train_model(c, ds), checksum);
        for (const auto &m : r.metrics) {
            out << to_string(c.model) << ',';
            std::ostringstream row;
            write_metrics_row(row, m);
            std::string s = row.str();
            s.pop_back();
            out << s << ',' << checksum << '\n';
        }
        print_summary(log, r);
        results.push_back(std::move(r));
    }
    close_output(out, output);
    return results;
}

/// Parses the `compare` subcommand: shared flags plus
/// `--models a,b[,c]`. `--transport teleport` applies to qfl-quantum only.
inline std::vector<ExperimentConfig>
parse_compare(const std::vector<std::string> &args) {
    CLI::App app{"qflring compare"};
    ExperimentConfig base;
    std::vector<std::string> models{"cfl", "qfl-classical", "qfl-quantum"};
    std::string transport = "copy";
    std::string topology = "ring";
    app.add_option("--models", models, "comma separated model list")
        ->delimiter(',');
    detail::add_experiment_options(app, base, transport, topology);
    detail::parse_app(app, args);
    detail::finish_config(base, transport, topology);
    std::vector<ExperimentConfig> out;
    for (const auto &m : models) {
        ExperimentConfig c = base;
        try {
            c.model = parse_model(m);
        } catch (const std::invalid_argument &e) {
            throw ConfigError(e.what());
        }
        if (c.model != ModelKind::QflQuantum) {
            c.transport = Transport::ClassicalCopy;
        }
        c.validate();
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace qfl
