#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "symtutor/agents.hpp"
#include "symtutor/datagen.hpp"
#include "symtutor/error.hpp"
#include "symtutor/eval.hpp"

namespace symtutor {

// Flat "key = value" documents; '#' starts a comment line.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::string_view text);
KeyValues load_key_values(const std::filesystem::path& path);

struct GenConfig {
  DatasetConfig dataset;
  std::filesystem::path output = "data/dataset.jsonl";
  int workers = 1;
};

GenConfig gen_config_from(const KeyValues& kv);

struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path records = "out/records.jsonl";
  std::string agent = "oracle"; // oracle | pattern | remote
  std::optional<std::size_t> shots; // default: 15 for tutor, 4 otherwise
  int shot_min_n = 1;
  int shot_max_n = 5;
  double shot_alpha = 0.1;
  int train_max_n = 5;
  SessionMode tutor_mode = SessionMode::Batch;
  PatternMatchConfig pattern;
  RemoteConfig remote;
  int max_tokens = kDefaultMaxTokens;
  std::size_t call_budget = 256;
  int workers = 1;
  std::size_t flush_every = 64;
  std::uint64_t seed = 42;

  std::size_t shot_count(FormatFamily family) const {
    return shots.value_or(family == FormatFamily::Tutor ? 15 : 4);
  }
};

RunConfig run_config_from(const KeyValues& kv);

struct EvalConfig {
  std::filesystem::path records = "out/records.jsonl";
  std::filesystem::path report_dir = "out/report";
  int train_max_n = 5;
};

EvalConfig eval_config_from(const KeyValues& kv);

std::unique_ptr<Agent> make_agent(const RunConfig& config);

/// Shot pool shared by every query of a run: rendered in the dataset's task
/// and format with sizes drawn from the shot range.
std::vector<RenderedExample> make_shots(const RunConfig& config, TaskKind task, const FormatSpec& format);

/// Prompt, completion (through the callable loop or a tutor session when the
/// format needs it) and scoring for one example. Agent errors come back as
/// fault records.
EvalRecord evaluate_example(Agent& agent, const RenderedExample& example,
                            std::span<const RenderedExample> shots, const RunConfig& config);

struct RunSummary {
  std::size_t total = 0;
  std::size_t resumed = 0; // already present in the records file
  std::size_t written = 0;
  std::size_t exact = 0;
};

std::size_t cmd_gen(const GenConfig& config, std::ostream& log);

/// Evaluates every dataset example this agent has not yet recorded in
/// `config.records`, appending in dataset order and flushing every
/// `flush_every` records.
/// `stop_after` limits how many new records are written (used to simulate
/// an interrupted run).
RunSummary cmd_run(const RunConfig& config, std::ostream& log, Agent* agent = nullptr,
                   std::optional<std::size_t> stop_after = std::nullopt);

ReportPaths cmd_eval(const EvalConfig& config, std::ostream& log);

/// Prints the gold trace, runs it and reports PASS/FAIL; returns true on PASS.
bool cmd_trace(TaskKind task, const std::vector<std::string>& operands, std::ostream& out);

/// Process exit status for an error: 2 config, 3 I/O, 4 endpoint, 1 other.
int exit_code_for(const Error& error);

} // namespace symtutor
