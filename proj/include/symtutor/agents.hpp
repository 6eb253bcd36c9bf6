#pragma once

#include <atomic>
#include <cstddef>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "symtutor/instance.hpp"
#include "symtutor/machine.hpp"
#include "symtutor/oracles.hpp"

namespace symtutor {

inline constexpr int kDefaultMaxTokens = 512;

struct AgentRequest {
  std::string prompt;
  std::vector<std::string> stop;
  int max_tokens = kDefaultMaxTokens;
  std::string request_id;
};

struct DecodeConfig {
  double temperature = 0.0;
  double top_p = 1.0;
  double frequency_penalty = 0.0;
  double presence_penalty = 0.0;
};

/// Text-completion agent. Implementations must tolerate concurrent calls.
class Agent {
public:
  virtual ~Agent() = default;
  virtual std::string id() const = 0;
  virtual std::string complete(const AgentRequest& request) = 0;
};

/// Perfect tutor. Reads the query after the last blank line of the prompt
/// and answers with the gold trace. Actions already present after
/// "result:" (incremental sessions) are skipped, and at most `max_tokens`
/// actions are returned per call.
class OracleAgent final : public Agent {
public:
  std::string id() const override { return "oracle"; }
  std::string complete(const AgentRequest& request) override;
};

enum class TieBreak { Latest, Earliest };

struct PatternMatchConfig {
  int window = 3;
  TieBreak tie_break = TieBreak::Latest;
};

/// Copies by pattern matching instead of by position, which is how the
/// repeat-run failures arise: each next token is the input token following
/// a match of the last `window` emitted tokens. While fewer than `window`
/// tokens are out the pattern is anchored at the start of the sequence.
class PatternAgent final : public Agent {
public:
  explicit PatternAgent(PatternMatchConfig config = {});
  std::string id() const override;
  std::string complete(const AgentRequest& request) override;

  /// The copy kernel on its own, for direct testing.
  std::vector<std::string> copy_tokens(const std::vector<std::string>& input, int max_tokens) const;

private:
  PatternMatchConfig config_;
};

struct RemoteConfig {
  std::string endpoint = "http://127.0.0.1:8000/v1/completions";
  std::string model = "text-davinci-002";
  std::string api_key_env = "SYMTUTOR_API_KEY";
  DecodeConfig decode;
  int timeout_ms = 30000;
  int max_retries = 4;
  int backoff_initial_ms = 250;
  int backoff_cap_ms = 8000;
};

/// JSON body sent for one completion; byte-stable for a given request.
std::string remote_request_body(const AgentRequest& request, const RemoteConfig& config);

/// Completion-style HTTP client (POST prompt, read choices[0].text).
///
/// Transport failures, timeouts, 429 and 5xx are retried with capped
/// exponential backoff; 401/403 and other 4xx fail immediately. The
/// credential comes from the environment variable named in the config and
/// is checked at construction.
class RemoteAgent final : public Agent {
public:
  explicit RemoteAgent(RemoteConfig config);
  std::string id() const override { return "remote:" + config_.model; }
  std::string complete(const AgentRequest& request) override;
  const RemoteConfig& config() const noexcept { return config_; }

private:
  RemoteConfig config_;
  std::string api_key_;
  std::atomic<std::size_t> counter_{0};
};

/// Replays canned completions in order, then returns empty strings.
class ScriptedAgent final : public Agent {
public:
  explicit ScriptedAgent(std::vector<std::string> replies, std::string name = "scripted");
  std::string id() const override { return name_; }
  std::string complete(const AgentRequest& request) override;
  std::vector<AgentRequest> requests() const;

private:
  mutable std::mutex mutex_;
  std::vector<std::string> replies_;
  std::vector<AgentRequest> seen_;
  std::size_t next_ = 0;
  std::string name_;
};

// ---------------------------------------------------------- callable loop

struct CallLimits {
  std::size_t call_budget = 256;
  int max_tokens = kDefaultMaxTokens;
  std::vector<std::string> stop{"\n\n"};
};

struct CallableLoopResult {
  std::string context;   // prompt plus everything appended
  std::string generated; // context without the prompt
  std::size_t calls = 0;
  std::size_t rounds = 0;
};

/// Requests completions until one contains no call site. Each completion is
/// cut right after its earliest complete call site, the call is executed
/// and " -> {result}\n" is appended before asking again. The context only
/// ever grows at the end. Throws CallBudgetExceeded, or the callable's own
/// error annotated with the call site text.
CallableLoopResult callable_loop(Agent& agent, const std::string& prompt,
                                 const CallableRegistry& registry, const CallLimits& limits = {});

// ---------------------------------------------------------- tutor session

enum class SessionMode { Batch, Incremental };

std::string_view to_string(SessionMode mode);
SessionMode parse_session_mode(std::string_view name);

struct SessionConfig {
  SessionMode mode = SessionMode::Batch;
  int max_tokens = kDefaultMaxTokens;
  std::size_t slack = 8; // extra actions allowed beyond 3n+2 in incremental mode
};

struct StepLog {
  std::size_t index = 0;
  Action action;
  RunStatus status = RunStatus::Running;
  std::string note;
};

struct SessionResult {
  RunStatus status = RunStatus::Running;
  std::optional<std::string> output; // rendered answer when Halted
  std::string fault;                 // fault kind name, "UnknownAction", "ActionBudget", ...
  std::size_t fault_index = 0;
  bool malformed = false;            // the agent produced unparseable trace text
  std::vector<StepLog> log;
  std::string transcript;            // what the agent produced, with feedback in incremental mode
};

/// Drives the machine with actions produced by the agent. Batch mode asks
/// for the whole trace in one completion; incremental mode asks for one
/// action at a time and appends the machine's verdict after each.
SessionResult tutor_session(Agent& agent, const TaskInstance& instance, const std::string& prompt,
                            const SessionConfig& config = {});

} // namespace symtutor
