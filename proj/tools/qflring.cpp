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

// qflring run --model <cfl|qfl-classical|qfl-quantum> [options]
// qflring compare [--models a,b,c] [options] -o combined.csv

#include <iostream>
#include <string>
#include <vector>

#include "qfl/experiment.hpp"

namespace {

int usage(std::ostream &os) {
    os << "usage: qflring run --model <cfl|qfl-classical|qfl-quantum> [options]\n"
          "       qflring compare [--models cfl,qfl-classical,qfl-quantum] "
          "[options]\n"
          "run `qflring run --help` for the option list\n";
    return 2;
}

} // namespace

int main(int argc, char **argv) {
    if (argc < 2) {
        return usage(std::cerr);
    }
    const std::string command = argv[1];
    const std::vector<std::string> args(argv + 2, argv + argc);
    try {
        if (command == "run") {
            qfl::run_experiment(qfl::parse_config(args), std::cout);
        } else if (command == "compare") {
            const auto configs = qfl::parse_compare(args);
            qfl::compare(configs, configs.front().output, std::cout);
        } else if (command == "-h" || command == "--help") {
            usage(std::cout);
            return 0;
        } else {
            return usage(std::cerr);
        }
    } catch (const qfl::HelpRequested &h) {
        std::cout << h.what();
        return 0;
    } catch (const qfl::ConfigError &e) {
        std::cerr << "qflring: " << e.what() << '\n';
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "qflring: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
