// Copyright 2026 The irsbeam Authors
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


#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "irsbeam/harness.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string summary;
  int threads = 1;
  bool timing = false;
};

int run(irsbeam::SweepKind kind, const Options& opt) {
  irsbeam::ExperimentSpec spec = irsbeam::load_experiment(opt.config);
  spec.sweep = kind;
  if (opt.seed) spec.seed = *opt.seed;
  if (!opt.out.empty()) spec.output_path = opt.out;
  spec.timing = opt.timing;

  const auto rows = irsbeam::run_experiment(spec, opt.threads);
  if (spec.output_path.empty() || spec.output_path == "-") {
    irsbeam::write_csv(std::cout, rows);
  } else {
    std::ofstream os(spec.output_path, std::ios::binary);
    if (!os) throw irsbeam::ConfigError("cannot open " + spec.output_path);
    irsbeam::write_csv(os, rows);
  }
  if (!opt.summary.empty()) {
    std::ofstream os(opt.summary, std::ios::binary);
    if (!os) throw irsbeam::ConfigError("cannot open " + opt.summary);
    irsbeam::write_summary_csv(os, irsbeam::summarize(rows));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Beamforming and power split for PIN-diode IRS downlinks"};
  app.require_subcommand(1);
  Options opt;

  const std::pair<const char*, const char*> subs[] = {
      {"sweep-power", "Sweep the system power budget"},
      {"sweep-size", "Sweep the IRS size"},
      {"convergence", "One row per iteration for iterative methods"},
      {"single", "One operating point"},
  };
  for (const auto& [name, help] : subs) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "Experiment YAML")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "Master seed, overrides the config");
    sub->add_option("--out", opt.out, "Result CSV, '-' for stdout");
    sub->add_option("--threads", opt.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--summary", opt.summary, "Also write per-point mean and standard error");
    sub->add_flag("--timing", opt.timing, "Record wall time (output is no longer reproducible)");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    return run(irsbeam::parse_sweep(name), opt);
  } catch (const irsbeam::MethodIntractable& e) {
    std::cerr << "irsbeam: " << e.what() << '\n';
    return 3;
  } catch (const irsbeam::ConfigError& e) {
    std::cerr << "irsbeam: config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "irsbeam: " << e.what() << '\n';
    return 1;
  }
}
