#include "symtutor/machine.hpp"

#include <algorithm>

#include "symtutor/error.hpp"

namespace symtutor {

std::string_view to_string(const Action& action) {
  switch (action.kind) {
  case ActionKind::Rmov: return "rmov";
  case ActionKind::Lmov: return "lmov";
  case ActionKind::Cpy: return "cpy";
  case ActionKind::Add: return "add";
  case ActionKind::EndAssert: return action.expected ? "end=T" : "end=F";
  }
  return "?";
}

std::string_view to_string(RunStatus status) {
  switch (status) {
  case RunStatus::Running: return "running";
  case RunStatus::Halted: return "halted";
  case RunStatus::Faulted: return "faulted";
  }
  return "?";
}

std::string_view to_string(FaultKind kind) {
  switch (kind) {
  case FaultKind::CursorOverrun: return "CursorOverrun";
  case FaultKind::ReadAtSentinel: return "ReadAtSentinel";
  case FaultKind::EndMismatch: return "EndMismatch";
  case FaultKind::WrongAlphabet: return "WrongAlphabet";
  case FaultKind::TraceUnderrun: return "TraceUnderrun";
  }
  return "?";
}

std::string format_trace(const Trace& trace) {
  std::string out;
  out.reserve(trace.size() * 6);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (i) out += ", ";
    out += to_string(trace[i]);
  }
  return out;
}

namespace {

std::optional<Action> action_from_token(std::string_view tok) {
  if (tok == "rmov") return Action::rmov();
  if (tok == "lmov") return Action::lmov();
  if (tok == "cpy") return Action::cpy();
  if (tok == "add") return Action::add();
  if (tok == "end=T") return Action::end(true);
  if (tok == "end=F") return Action::end(false);
  return std::nullopt;
}

bool is_separator(char c) { return c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

} // namespace

Trace parse_trace(std::string_view text) {
  Trace trace;
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_separator(text[i])) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < text.size() && !is_separator(text[i])) ++i;
    auto tok = text.substr(start, i - start);
    auto action = action_from_token(tok);
    if (!action) throw UnknownActionError(std::string(tok), start);
    trace.push_back(*action);
  }
  if (trace.empty()) throw Error(ErrorCode::EmptyTrace, "no actions in trace text");
  return trace;
}

MachineState new_machine(const TaskInstance& instance) {
  MachineState m;
  m.task_ = instance.kind;
  switch (instance.kind) {
  case TaskKind::Copy:
  case TaskKind::Reverse:
    if (instance.tokens.empty()) throw Error(ErrorCode::EmptyOperand, "no cells to load");
    for (const auto& tok : instance.tokens) {
      if (tok.empty()) throw Error(ErrorCode::EmptyOperand, "empty cell");
      if (instance.kind == TaskKind::Copy && !is_digit_token(tok))
        throw Error(ErrorCode::NonDigitOperand, "copy cell '" + tok + "' is not a digit");
    }
    m.tapes_.push_back(instance.tokens);
    m.cursor_ = instance.kind == TaskKind::Copy ? -1 : static_cast<int>(instance.tokens.size());
    break;
  case TaskKind::Add: {
    for (const auto* op : {&instance.lhs, &instance.rhs}) {
      if (op->empty()) throw Error(ErrorCode::EmptyOperand, "addition operand is empty");
      if (!is_digit_string(*op))
        throw Error(ErrorCode::NonDigitOperand, "'" + *op + "' is not a digit string");
    }
    const auto width = std::max(instance.lhs.size(), instance.rhs.size());
    for (const auto* op : {&instance.lhs, &instance.rhs}) {
      std::vector<std::string> tape(width - op->size(), "0");
      for (char c : *op) tape.emplace_back(1, c);
      m.tapes_.push_back(std::move(tape));
    }
    m.cursor_ = static_cast<int>(width);
    break;
  }
  }
  return m;
}

int MachineState::terminal_position() const noexcept {
  return task_ == TaskKind::Copy ? width() : -1;
}

void MachineState::fail(FaultKind kind, std::string detail) {
  status_ = RunStatus::Faulted;
  fault_ = Fault{kind, steps_ - 1, std::move(detail)};
}

void MachineState::apply(const Action& action) {
  if (status_ != RunStatus::Running)
    throw Error(ErrorCode::NotRunning,
                "machine is " + std::string(to_string(status_)) + ", step rejected");
  ++steps_;
  const bool on_sentinel = cursor_ < 0 || cursor_ >= width();
  switch (action.kind) {
  case ActionKind::Rmov:
    if (cursor_ >= width()) return fail(FaultKind::CursorOverrun, "rmov at right sentinel");
    ++cursor_;
    return;
  case ActionKind::Lmov:
    if (cursor_ <= -1) return fail(FaultKind::CursorOverrun, "lmov at left sentinel");
    --cursor_;
    return;
  case ActionKind::EndAssert: {
    const bool truth = at_terminal();
    if (truth != action.expected)
      return fail(FaultKind::EndMismatch, std::string("asserted ") + (action.expected ? "T" : "F") +
                                              " at position " + std::to_string(cursor_));
    if (truth) status_ = RunStatus::Halted;
    return;
  }
  case ActionKind::Cpy:
    if (task_ == TaskKind::Add) return fail(FaultKind::WrongAlphabet, "cpy in an addition run");
    if (on_sentinel) return fail(FaultKind::ReadAtSentinel, "cpy on a sentinel");
    output_.push_back(tapes_.front()[static_cast<std::size_t>(cursor_)]);
    return;
  case ActionKind::Add: {
    if (task_ != TaskKind::Add) return fail(FaultKind::WrongAlphabet, "add outside addition");
    if (on_sentinel) return fail(FaultKind::ReadAtSentinel, "add on a sentinel");
    const auto col = static_cast<std::size_t>(cursor_);
    const int sum = (tapes_[0][col][0] - '0') + (tapes_[1][col][0] - '0') + carry_;
    output_.emplace_back(1, static_cast<char>('0' + sum % 10));
    carry_ = sum / 10;
    return;
  }
  }
}

void MachineState::underrun() {
  if (status_ != RunStatus::Running) return;
  status_ = RunStatus::Faulted;
  fault_ = Fault{FaultKind::TraceUnderrun, steps_, "trace ended before end=T"};
}

std::string MachineState::render() const {
  if (status_ != RunStatus::Halted)
    throw Error(ErrorCode::NotRunning, "output is only rendered for a halted machine");
  if (task_ != TaskKind::Add) return join(output_, task_ == TaskKind::Reverse ? ", " : " ");
  std::vector<std::string> digits(output_.rbegin(), output_.rend());
  if (carry_ != 0) digits.insert(digits.begin(), std::to_string(carry_));
  return join(digits, " ");
}

std::string MachineState::serialize() const {
  std::string out = "task=" + std::string(to_string(task_));
  for (const auto& tape : tapes_) out += ";tape=" + join(tape, "|");
  out += ";cursor=" + std::to_string(cursor_);
  out += ";carry=" + std::to_string(carry_);
  out += ";output=" + join(output_, "|");
  out += ";status=" + std::string(to_string(status_));
  if (fault_)
    out += ";fault=" + std::string(to_string(fault_->kind)) + "@" +
           std::to_string(fault_->action_index) + ":" + fault_->detail;
  out += ";steps=" + std::to_string(steps_);
  return out;
}

MachineState step(MachineState state, const Action& action) {
  state.apply(action);
  return state;
}

RunResult run_trace(MachineState state, const Trace& trace) {
  if (state.status() != RunStatus::Running)
    throw Error(ErrorCode::NotRunning, "run_trace needs a running machine");
  RunResult result{std::move(state), std::nullopt, 0, 0};
  auto& m = result.state;
  for (const auto& action : trace) {
    if (m.status() != RunStatus::Running) break;
    m.apply(action);
    ++result.consumed;
  }
  result.trailing = trace.size() - result.consumed;
  if (m.status() == RunStatus::Running) m.underrun();
  if (m.status() == RunStatus::Halted) result.output = m.render();
  return result;
}

} // namespace symtutor
