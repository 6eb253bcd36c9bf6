#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "symtutor/instance.hpp"

namespace symtutor {

enum class ActionKind : std::uint8_t { Rmov, Lmov, Cpy, Add, EndAssert };

/// One token of the tutor action language. `expected` is only meaningful
/// for EndAssert (the =T / =F suffix).
struct Action {
  ActionKind kind = ActionKind::Rmov;
  bool expected = false;

  static constexpr Action rmov() { return {ActionKind::Rmov, false}; }
  static constexpr Action lmov() { return {ActionKind::Lmov, false}; }
  static constexpr Action cpy() { return {ActionKind::Cpy, false}; }
  static constexpr Action add() { return {ActionKind::Add, false}; }
  static constexpr Action end(bool at_end) { return {ActionKind::EndAssert, at_end}; }

  friend constexpr bool operator==(const Action& a, const Action& b) {
    return a.kind == b.kind && (a.kind != ActionKind::EndAssert || a.expected == b.expected);
  }
};

using Trace = std::vector<Action>;

std::string_view to_string(const Action& action);

/// Canonical serialization: tokens joined with ", ".
std::string format_trace(const Trace& trace);

/// Accepts exactly rmov, lmov, cpy, add, end=T, end=F separated by commas
/// and/or whitespace. Throws UnknownActionError or Error(EmptyTrace).
Trace parse_trace(std::string_view text);

enum class RunStatus { Running, Halted, Faulted };

enum class FaultKind { CursorOverrun, ReadAtSentinel, EndMismatch, WrongAlphabet, TraceUnderrun };

std::string_view to_string(RunStatus status);
std::string_view to_string(FaultKind kind);

struct Fault {
  FaultKind kind = FaultKind::CursorOverrun;
  std::size_t action_index = 0;
  std::string detail;
};

/// Multi-tape machine that executes tutor traces.
///
/// Copy and reverse use one tape of word cells; addition uses two
/// right-aligned digit tapes of equal width (shorter operand zero padded on
/// the left). Position -1 is the left sentinel and `width()` is the right
/// sentinel. Copy starts on the left sentinel and terminates on the right
/// one; reverse and addition start on the right sentinel and terminate on
/// the left one.
class MachineState {
public:
  TaskKind task() const noexcept { return task_; }
  const std::vector<std::vector<std::string>>& tapes() const noexcept { return tapes_; }
  int cursor() const noexcept { return cursor_; }
  int carry() const noexcept { return carry_; }
  const std::vector<std::string>& output() const noexcept { return output_; }
  RunStatus status() const noexcept { return status_; }
  const std::optional<Fault>& fault() const noexcept { return fault_; }
  std::size_t steps() const noexcept { return steps_; }

  int width() const noexcept { return static_cast<int>(tapes_.front().size()); }
  int terminal_position() const noexcept;
  bool at_terminal() const noexcept { return cursor_ == terminal_position(); }

  /// Executes one action in place. Throws Error(NotRunning) if the machine
  /// has already halted or faulted; every other failure becomes a fault.
  void apply(const Action& action);

  /// Marks the run as faulted by exhaustion of the trace.
  void underrun();

  /// Final answer text. Only valid once Halted; addition prepends a nonzero
  /// final carry here.
  std::string render() const;

  /// Stable text form of the full state, used for determinism checks.
  std::string serialize() const;

  friend MachineState new_machine(const TaskInstance& instance);
  friend bool operator==(const MachineState&, const MachineState&) = default;

private:
  void fail(FaultKind kind, std::string detail);

  TaskKind task_ = TaskKind::Copy;
  std::vector<std::vector<std::string>> tapes_;
  int cursor_ = -1;
  int carry_ = 0;
  std::vector<std::string> output_;
  RunStatus status_ = RunStatus::Running;
  std::optional<Fault> fault_;
  std::size_t steps_ = 0;
};

MachineState new_machine(const TaskInstance& instance);

/// Value-semantics wrapper around MachineState::apply.
MachineState step(MachineState state, const Action& action);

struct RunResult {
  MachineState state;
  std::optional<std::string> output; // set iff Halted
  std::size_t consumed = 0;          // actions executed, including the halting/faulting one
  std::size_t trailing = 0;          // actions left unexecuted after Halted
};

RunResult run_trace(MachineState state, const Trace& trace);

} // namespace symtutor
