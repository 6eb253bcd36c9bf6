#include "symtutor/instance.hpp"

#include <algorithm>

#include "symtutor/error.hpp"

namespace symtutor {

std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::EmptyTrace: return "EmptyTrace";
  case ErrorCode::UnknownAction: return "UnknownAction";
  case ErrorCode::EmptyOperand: return "EmptyOperand";
  case ErrorCode::NonDigitOperand: return "NonDigitOperand";
  case ErrorCode::InvalidOperand: return "InvalidOperand";
  case ErrorCode::NotRunning: return "NotRunning";
  case ErrorCode::UnknownCallable: return "UnknownCallable";
  case ErrorCode::ArityError: return "ArityError";
  case ErrorCode::NonDigitArgument: return "NonDigitArgument";
  case ErrorCode::FormatTaskMismatch: return "FormatTaskMismatch";
  case ErrorCode::MixedFormats: return "MixedFormats";
  case ErrorCode::EmptyExemplars: return "EmptyExemplars";
  case ErrorCode::UnparseableQuery: return "UnparseableQuery";
  case ErrorCode::Timeout: return "Timeout";
  case ErrorCode::HttpStatus: return "HttpStatus";
  case ErrorCode::MissingCredential: return "MissingCredential";
  case ErrorCode::Transport: return "Transport";
  case ErrorCode::CallBudgetExceeded: return "CallBudgetExceeded";
  case ErrorCode::EmptyRecords: return "EmptyRecords";
  case ErrorCode::Io: return "Io";
  case ErrorCode::Config: return "Config";
  case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

std::string_view to_string(TaskKind kind) {
  switch (kind) {
  case TaskKind::Copy: return "copy";
  case TaskKind::Reverse: return "reverse";
  case TaskKind::Add: return "add";
  }
  return "?";
}

TaskKind parse_task_kind(std::string_view name) {
  if (name == "copy") return TaskKind::Copy;
  if (name == "reverse") return TaskKind::Reverse;
  if (name == "add") return TaskKind::Add;
  throw Error(ErrorCode::Config, "unknown task '" + std::string(name) + "'");
}

bool is_digit_token(std::string_view token) {
  return token.size() == 1 && token[0] >= '0' && token[0] <= '9';
}

bool is_digit_string(std::string_view text) {
  return !text.empty() &&
         std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string join(std::span<const std::string> parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string spaced_digits(std::string_view digits) {
  std::string out;
  out.reserve(digits.size() * 2);
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i) out.push_back(' ');
    out.push_back(digits[i]);
  }
  return out;
}

std::string schoolbook_add(std::string_view lhs, std::string_view rhs) {
  std::string sum;
  int carry = 0;
  auto i = static_cast<std::ptrdiff_t>(lhs.size()) - 1;
  auto j = static_cast<std::ptrdiff_t>(rhs.size()) - 1;
  while (i >= 0 || j >= 0 || carry) {
    int s = carry;
    if (i >= 0) s += lhs[i--] - '0';
    if (j >= 0) s += rhs[j--] - '0';
    sum.push_back(static_cast<char>('0' + s % 10));
    carry = s / 10;
  }
  std::reverse(sum.begin(), sum.end());
  return sum;
}

namespace {

void check_addend(const std::string& operand) {
  if (operand.empty()) throw Error(ErrorCode::EmptyOperand, "addition operand is empty");
  if (!is_digit_string(operand))
    throw Error(ErrorCode::NonDigitOperand, "'" + operand + "' is not a digit string");
  if (operand.size() > 1 && operand[0] == '0')
    throw Error(ErrorCode::InvalidOperand, "'" + operand + "' has a leading zero");
}

} // namespace

std::string target_of(TaskKind kind, std::span<const std::string> operands) {
  switch (kind) {
  case TaskKind::Copy:
    return join(operands, " ");
  case TaskKind::Reverse: {
    std::vector<std::string> rev(operands.rbegin(), operands.rend());
    return join(rev, ", ");
  }
  case TaskKind::Add:
    if (operands.size() != 2)
      throw Error(ErrorCode::InvalidOperand, "addition takes exactly two operands");
    return spaced_digits(schoolbook_add(operands[0], operands[1]));
  }
  return {};
}

TaskInstance TaskInstance::copy(std::vector<std::string> digits) {
  if (digits.empty()) throw Error(ErrorCode::EmptyOperand, "copy input is empty");
  for (const auto& d : digits)
    if (!is_digit_token(d))
      throw Error(ErrorCode::NonDigitOperand, "copy cell '" + d + "' is not a single digit");
  TaskInstance inst;
  inst.kind = TaskKind::Copy;
  inst.tokens = std::move(digits);
  inst.target = target_of(inst);
  return inst;
}

TaskInstance TaskInstance::reverse(std::vector<std::string> items) {
  if (items.empty()) throw Error(ErrorCode::EmptyOperand, "reverse input is empty");
  for (const auto& item : items) {
    if (item.empty()) throw Error(ErrorCode::EmptyOperand, "empty list item");
    if (item.find_first_of(", \t\n") != std::string::npos)
      throw Error(ErrorCode::InvalidOperand, "list item '" + item + "' is not a single token");
  }
  TaskInstance inst;
  inst.kind = TaskKind::Reverse;
  inst.tokens = std::move(items);
  inst.target = target_of(inst);
  return inst;
}

TaskInstance TaskInstance::add(std::string lhs, std::string rhs) {
  check_addend(lhs);
  check_addend(rhs);
  TaskInstance inst;
  inst.kind = TaskKind::Add;
  inst.lhs = std::move(lhs);
  inst.rhs = std::move(rhs);
  inst.target = target_of(inst);
  return inst;
}

std::size_t TaskInstance::size() const {
  if (kind == TaskKind::Add) return std::max(lhs.size(), rhs.size());
  return tokens.size();
}

std::vector<std::string> TaskInstance::operands() const {
  if (kind == TaskKind::Add) return {lhs, rhs};
  return tokens;
}

TaskInstance TaskInstance::from_operands(TaskKind kind, std::span<const std::string> operands) {
  std::vector<std::string> ops(operands.begin(), operands.end());
  switch (kind) {
  case TaskKind::Copy: return copy(std::move(ops));
  case TaskKind::Reverse: return reverse(std::move(ops));
  case TaskKind::Add:
    if (ops.size() != 2)
      throw Error(ErrorCode::InvalidOperand, "addition takes exactly two operands");
    return add(std::move(ops[0]), std::move(ops[1]));
  }
  throw Error(ErrorCode::InvalidOperand, "unknown task");
}

} // namespace symtutor
