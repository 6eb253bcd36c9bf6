#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace symtutor {

enum class TaskKind { Copy, Reverse, Add };

std::string_view to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view name);

/// A copy, reverse or addition problem together with its ground-truth answer.
///
/// Copy operands are single digits, reverse operands are word tokens, and
/// addition carries two digit strings without leading zeros (except "0").
/// Construct through the factories; they validate and fill `target`.
struct TaskInstance {
  TaskKind kind = TaskKind::Copy;
  std::vector<std::string> tokens; // copy / reverse
  std::string lhs;                 // add
  std::string rhs;                 // add
  std::string target;

  static TaskInstance copy(std::vector<std::string> digits);
  static TaskInstance reverse(std::vector<std::string> items);
  static TaskInstance add(std::string lhs, std::string rhs);

  /// Cell count for copy/reverse, aligned column count for addition.
  std::size_t size() const;

  /// Operands as stored in dataset files: the token list, or {lhs, rhs}.
  std::vector<std::string> operands() const;
  static TaskInstance from_operands(TaskKind kind, std::span<const std::string> operands);

  friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

/// Recomputes the answer from operands: copy verbatim, reverse the items,
/// schoolbook sum for addition. Output digits are space separated; reverse
/// items are joined with ", ".
std::string target_of(TaskKind kind, std::span<const std::string> operands);
inline std::string target_of(const TaskInstance& instance) {
  auto ops = instance.operands();
  return target_of(instance.kind, ops);
}

/// Column-wise decimal addition of two digit strings, most significant first.
std::string schoolbook_add(std::string_view lhs, std::string_view rhs);

/// Splits on whitespace and commas, dropping empty pieces.
std::vector<std::string> split_tokens(std::string_view text);

std::string join(std::span<const std::string> parts, std::string_view sep);
std::string spaced_digits(std::string_view digits);

bool is_digit_token(std::string_view token);
bool is_digit_string(std::string_view text);

} // namespace symtutor
