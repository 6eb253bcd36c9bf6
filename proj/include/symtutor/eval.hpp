#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "symtutor/datagen.hpp"

namespace symtutor {

inline constexpr int kReportSchemaVersion = 1;

enum class ErrorClass { None, Skip, OverReplicate, Substitution, Malformed, Fault };

std::string_view to_string(ErrorClass c);
ErrorClass parse_error_class(std::string_view name);

struct EvalRecord {
  std::string id;
  std::string agent;
  TaskKind task = TaskKind::Copy;
  std::string format; // FormatSpec::label()
  std::optional<double> alpha;
  std::size_t n = 0;
  std::string split = "in";
  std::string prediction;
  std::string target;
  bool exact_match = false;
  ErrorClass error_class = ErrorClass::Malformed;
  std::string detail;

  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

/// Trims, collapses whitespace runs to one space.
std::string normalize_whitespace(std::string_view text);

/// Drops letter-marker tokens ("A", "BC") and "P{k}:" prefixes.
std::string strip_markers(std::string_view text);

/// Token-level equality after whitespace normalisation; markers are removed
/// from both sides first when `strip` is set.
bool exact_match(std::string_view prediction, std::string_view target, bool strip = false);

/// Replaces "@P{k}" references by the digit defined as "P{k}:{d}" anywhere in
/// `definitions`, then removes the remaining "P{k}:" prefixes.
std::optional<std::string> resolve_references(std::string_view text, std::string_view definitions);

/// Pulls the final answer out of a completion in the given format:
/// baseline takes the first line, scratchpads the text after the last
/// "result:", callable the value returned by the last combine() call.
/// Tutor traces are not handled here (they need the machine). nullopt means
/// the completion does not follow the format.
std::optional<std::string> extract_answer(const FormatSpec& format, std::string_view input,
                                          std::string_view completion);

/// The answer a perfect completion would yield, as scored.
std::string expected_answer(const RenderedExample& example);

/// Classifies a wrong prediction. Skip: the prediction is the target with
/// whole periods of one repeat run deleted (at least one copy left).
/// Over-replicate: the same with roles swapped. Anything else is a
/// substitution; well-formedness is checked by the caller.
ErrorClass classify_error(std::span<const std::string> input, std::span<const std::string> prediction,
                          std::span<const std::string> target);

/// True iff `shorter` is `longer` with whole periods removed from a repeat run.
bool deletion_within_repeat_run(std::span<const std::string> longer,
                                std::span<const std::string> shorter);

/// Scores an already-extracted answer (nullopt = malformed output).
EvalRecord score_answer(const RenderedExample& example, std::string agent,
                        const std::optional<std::string>& answer, std::string_view raw);

/// Extracts the answer from a raw completion and scores it.
EvalRecord score_completion(const RenderedExample& example, std::string agent,
                            std::string_view completion);

EvalRecord fault_record(const RenderedExample& example, std::string agent, std::string detail,
                        std::string_view raw = {});

nlohmann::json to_json(const EvalRecord& record);
EvalRecord record_from_json(const nlohmann::json& j);
std::vector<EvalRecord> read_records(const std::filesystem::path& path);

struct CurveKey {
  std::string agent;
  TaskKind task = TaskKind::Copy;
  std::string format;
  std::optional<double> alpha;

  friend bool operator<(const CurveKey& a, const CurveKey& b) {
    return std::tie(a.agent, a.task, a.format, a.alpha) < std::tie(b.agent, b.task, b.format, b.alpha);
  }
  friend bool operator==(const CurveKey&, const CurveKey&) = default;
};

struct CurvePoint {
  std::size_t n = 0;
  std::size_t count = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  std::string split = "in";

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

using Curves = std::map<CurveKey, std::vector<CurvePoint>>;

/// One point per n per key, n ascending. Points with n above
/// `train_max_n` are tagged "ood". Throws EmptyRecords.
Curves aggregate(std::span<const EvalRecord> records, int train_max_n = 5);

/// Sums counts of two curve sets; equals aggregating the concatenation.
Curves merge_curves(const Curves& a, const Curves& b, int train_max_n = 5);

struct ReportPaths {
  std::filesystem::path curves_csv;
  std::filesystem::path records_jsonl;
  std::filesystem::path table_txt;
};

std::string curves_csv(const Curves& curves);
std::string curves_table(const Curves& curves);

/// Writes curves.csv, records.jsonl and report.txt under `dir`.
ReportPaths write_report(const Curves& curves, std::span<const EvalRecord> records,
                         const std::filesystem::path& dir);

/// Shortest round-trip decimal form, used for every float in reports.
std::string format_double(double value);

} // namespace symtutor
