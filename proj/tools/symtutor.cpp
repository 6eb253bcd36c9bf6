#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "symtutor/commands.hpp"
#include "symtutor/instance.hpp"

using namespace symtutor;

namespace {

// Flags given on the command line win over the config file.
struct Overrides {
  std::optional<std::string> config;
  std::vector<std::pair<std::string, std::string>> values;

  KeyValues merged() const {
    KeyValues kv = config ? load_key_values(*config) : KeyValues{};
    std::string body;
    for (const auto& [k, v] : values) body += k + " = " + v + "\n";
    for (auto& [k, v] : parse_key_values(body)) kv[k] = v;
    return kv;
  }
};

void flag(CLI::App* app, Overrides& o, const std::string& name, const std::string& key,
          const std::string& help) {
  app->add_option_function<std::string>(
      name, [&o, key](const std::string& v) { o.values.emplace_back(key, v); }, help);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"symtutor: datasets, agents and scoring for tape-machine tutoring"};
  app.require_subcommand(1);

  Overrides gen_o, run_o, eval_o;

  auto* gen = app.add_subcommand("gen", "render a dataset to JSONL");
  gen->add_option("--config", gen_o.config, "key = value config file")->check(CLI::ExistingFile);
  flag(gen, gen_o, "--task", "task", "copy | reverse | add");
  flag(gen, gen_o, "--format", "format", "baseline | scratchpad-coarse | scratchpad-fine | tutor | callable");
  flag(gen, gen_o, "--markers", "markers", "none | ordered | random | reference");
  flag(gen, gen_o, "--alpha", "alpha", "repetition rate(s), comma separated");
  flag(gen, gen_o, "--digits", "digits", "size range, e.g. 1-20");
  flag(gen, gen_o, "--count", "count", "number of examples");
  flag(gen, gen_o, "--train-max", "train_max", "largest in-distribution size");
  flag(gen, gen_o, "--id-prefix", "id_prefix", "example id prefix (default: task name)");
  flag(gen, gen_o, "--seed", "seed", "base seed");
  flag(gen, gen_o, "--workers", "workers", "threads (0 = all)");
  flag(gen, gen_o, "-o,--output", "output", "output JSONL path");

  auto* run = app.add_subcommand("run", "evaluate an agent on a dataset, appending records");
  run->add_option("--config", run_o.config, "key = value config file")->check(CLI::ExistingFile);
  flag(run, run_o, "--dataset", "dataset", "dataset JSONL");
  flag(run, run_o, "--records", "records", "records JSONL (appended, resumable)");
  flag(run, run_o, "--agent", "agent", "oracle | pattern | remote");
  flag(run, run_o, "--shots", "shots", "exemplars per prompt");
  flag(run, run_o, "--tutor-mode", "tutor_mode", "batch | incremental");
  flag(run, run_o, "--window", "window", "pattern agent window");
  flag(run, run_o, "--tie-break", "tie_break", "latest | earliest");
  flag(run, run_o, "--endpoint", "endpoint", "completion endpoint URL");
  flag(run, run_o, "--model", "model", "remote model name");
  flag(run, run_o, "--max-tokens", "max_tokens", "completion token cap");
  flag(run, run_o, "--call-budget", "call_budget", "callable invocations per example");
  flag(run, run_o, "--seed", "seed", "seed for the shot pool");
  flag(run, run_o, "--workers", "workers", "concurrent examples (0 = all)");

  auto* eval = app.add_subcommand("eval", "aggregate records into curves and a report");
  eval->add_option("--config", eval_o.config, "key = value config file")->check(CLI::ExistingFile);
  flag(eval, eval_o, "--records", "records", "records JSONL");
  flag(eval, eval_o, "--report-dir", "report_dir", "output directory");
  flag(eval, eval_o, "--train-max", "train_max", "largest in-distribution size");

  std::string trace_task;
  std::vector<std::string> trace_operands;
  auto* trace = app.add_subcommand("trace", "print and check the gold action trace for one problem");
  trace->add_option("task", trace_task, "copy | reverse | add")->required();
  trace->add_option("operands", trace_operands,
                    "copy: digits; reverse: items; add: two numbers")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // help and version requests exit 0; usage errors count as config errors
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      cmd_gen(gen_config_from(gen_o.merged()), std::cerr);
    } else if (*run) {
      cmd_run(run_config_from(run_o.merged()), std::cerr);
    } else if (*eval) {
      cmd_eval(eval_config_from(eval_o.merged()), std::cerr);
    } else if (*trace) {
      auto task = parse_task_kind(trace_task);
      std::vector<std::string> ops;
      for (const auto& arg : trace_operands)
        for (auto& t : split_tokens(arg)) ops.push_back(t);
      // "trace copy 305" reads as the digits 3 0 5
      if (task == TaskKind::Copy && ops.size() == 1 && ops[0].size() > 1 && is_digit_string(ops[0])) {
        auto s = ops[0];
        ops.clear();
        for (char c : s) ops.emplace_back(1, c);
      }
      return cmd_trace(task, ops, std::cout) ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
