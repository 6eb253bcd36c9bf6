#include "symtutor/agents.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "symtutor/datagen.hpp"
#include "symtutor/error.hpp"

namespace symtutor {

namespace {

struct Query {
  std::string input;
  std::string tail; // text after "result:"
};

// The query is the last blank-line separated block of the prompt.
Query last_query(std::string_view prompt) {
  auto sep = prompt.rfind("\n\n");
  auto block = sep == std::string_view::npos ? prompt : prompt.substr(sep + 2);
  auto res = block.find(" result:");
  if (res == std::string_view::npos)
    throw Error(ErrorCode::UnparseableQuery, "no 'result:' in the query block");
  return {std::string(block.substr(0, res)), std::string(block.substr(res + 8))};
}

std::size_t actions_in(std::string_view tail) {
  std::size_t count = 0;
  for (auto& tok : split_tokens(tail)) {
    if (tok.starts_with('<')) continue;
    ++count;
  }
  return count;
}

} // namespace

std::string OracleAgent::complete(const AgentRequest& request) {
  auto query = last_query(request.prompt);
  auto instance = parse_input(query.input);
  auto trace = oracle_trace(instance);
  const auto done = std::min(actions_in(query.tail), trace.size());
  const auto take = std::min<std::size_t>(trace.size() - done,
                                          static_cast<std::size_t>(std::max(request.max_tokens, 0)));
  Trace rest(trace.begin() + static_cast<std::ptrdiff_t>(done),
             trace.begin() + static_cast<std::ptrdiff_t>(done + take));
  return format_trace(rest);
}

// ----------------------------------------------------------------- pattern

PatternAgent::PatternAgent(PatternMatchConfig config) : config_(config) {
  if (config_.window < 1) throw Error(ErrorCode::Config, "pattern window must be >= 1");
}

std::string PatternAgent::id() const {
  return "pattern:w" + std::to_string(config_.window) +
         (config_.tie_break == TieBreak::Latest ? ":latest" : ":earliest");
}

std::vector<std::string> PatternAgent::copy_tokens(const std::vector<std::string>& input,
                                                   int max_tokens) const {
  // seq[0] is a begin marker shared by input and output; seq[1..N] is the input
  const std::size_t N = input.size();
  std::vector<const std::string*> seq{nullptr};
  for (const auto& t : input) seq.push_back(&t);
  std::vector<const std::string*> out{nullptr};

  auto same = [](const std::string* a, const std::string* b) {
    if (!a || !b) return a == b;
    return *a == *b;
  };

  std::vector<std::string> emitted;
  const auto w = static_cast<std::size_t>(config_.window);
  while (emitted.size() < static_cast<std::size_t>(std::max(max_tokens, 0))) {
    const std::size_t m = std::min(w, out.size());
    const std::size_t pat = out.size() - m;
    std::optional<std::size_t> match;
    for (std::size_t j = m - 1; j <= N; ++j) {
      bool ok = true;
      for (std::size_t i = 0; i < m && ok; ++i) ok = same(seq[j + 1 - m + i], out[pat + i]);
      if (!ok) continue;
      match = j;
      if (config_.tie_break == TieBreak::Earliest) break;
    }
    if (!match || *match == N) break;
    out.push_back(seq[*match + 1]);
    emitted.push_back(*seq[*match + 1]);
  }
  return emitted;
}

std::string PatternAgent::complete(const AgentRequest& request) {
  auto query = last_query(request.prompt);
  std::string_view input = query.input;
  if (!input.starts_with("copy:"))
    throw Error(ErrorCode::UnparseableQuery, "pattern agent only copies ('copy:' prompts)");
  auto tokens = split_tokens(input.substr(5));
  return join(copy_tokens(tokens, request.max_tokens), " ");
}

// ------------------------------------------------------------------ remote

std::string remote_request_body(const AgentRequest& request, const RemoteConfig& config) {
  nlohmann::json body;
  body["model"] = config.model;
  body["prompt"] = request.prompt;
  body["max_tokens"] = request.max_tokens;
  body["temperature"] = config.decode.temperature;
  body["top_p"] = config.decode.top_p;
  body["frequency_penalty"] = config.decode.frequency_penalty;
  body["presence_penalty"] = config.decode.presence_penalty;
  if (!request.stop.empty()) body["stop"] = request.stop;
  return body.dump();
}

namespace {

struct Endpoint {
  std::string base; // scheme://host:port
  std::string path;
};

Endpoint parse_endpoint(const std::string& url) {
  constexpr std::string_view kHttp = "http://";
  if (!url.starts_with(kHttp))
    throw Error(ErrorCode::Config, "endpoint must be an http:// URL, got '" + url + "'");
  auto slash = url.find('/', kHttp.size());
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

} // namespace

RemoteAgent::RemoteAgent(RemoteConfig config) : config_(std::move(config)) {
  parse_endpoint(config_.endpoint);
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0')
    throw Error(ErrorCode::MissingCredential,
                "environment variable " + config_.api_key_env + " is not set");
  api_key_ = key;
}

std::string RemoteAgent::complete(const AgentRequest& request) {
  const auto id = request.request_id.empty() ? "req-" + std::to_string(counter_++) : request.request_id;
  const auto endpoint = parse_endpoint(config_.endpoint);
  const auto body = remote_request_body(request, config_);

  httplib::Client client(endpoint.base);
  const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers{{"Authorization", "Bearer " + api_key_}, {"X-Request-Id", id}};

  int delay_ms = config_.backoff_initial_ms;
  for (int attempt = 0;; ++attempt) {
    const auto started = std::chrono::steady_clock::now();
    auto res = client.Post(endpoint.path, headers, body, "application/json");
    const bool last = attempt >= config_.max_retries;

    if (res && res->status == 200) {
      try {
        auto j = nlohmann::json::parse(res->body);
        return j.at("choices").at(0).at("text").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Transport, id + ": malformed completion response: " + e.what());
      }
    }
    if (res) {
      const int status = res->status;
      if (status == 401 || status == 403)
        throw HttpStatusError(status, id + ": credential rejected (HTTP " + std::to_string(status) + ")");
      const bool transient = status == 429 || status >= 500;
      if (!transient || last)
        throw HttpStatusError(status, id + ": HTTP " + std::to_string(status) + " after " +
                                          std::to_string(attempt + 1) + " attempt(s)");
    } else {
      const auto elapsed = std::chrono::steady_clock::now() - started;
      const bool timed_out = res.error() == httplib::Error::ConnectionTimeout ||
                             (res.error() == httplib::Error::Read && elapsed >= timeout);
      if (last) {
        if (timed_out)
          throw Error(ErrorCode::Timeout, id + ": no response within " +
                                              std::to_string(config_.timeout_ms) + " ms");
        throw Error(ErrorCode::Transport, id + ": " + httplib::to_string(res.error()));
      }
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
    delay_ms = std::min(delay_ms * 2, config_.backoff_cap_ms);
  }
}

// ---------------------------------------------------------------- scripted

ScriptedAgent::ScriptedAgent(std::vector<std::string> replies, std::string name)
    : replies_(std::move(replies)), name_(std::move(name)) {}

std::string ScriptedAgent::complete(const AgentRequest& request) {
  std::lock_guard lock(mutex_);
  seen_.push_back(request);
  if (next_ >= replies_.size()) return {};
  return replies_[next_++];
}

std::vector<AgentRequest> ScriptedAgent::requests() const {
  std::lock_guard lock(mutex_);
  return seen_;
}

// ----------------------------------------------------------- callable loop

CallableLoopResult callable_loop(Agent& agent, const std::string& prompt,
                                 const CallableRegistry& registry, const CallLimits& limits) {
  CallableLoopResult result{prompt, {}, 0, 0};
  for (;;) {
    ++result.rounds;
    auto completion = agent.complete({result.context, limits.stop, limits.max_tokens, {}});
    auto site = find_call_site(completion, registry);
    if (!site) {
      result.context += completion;
      result.generated += completion;
      return result;
    }
    const auto text = completion.substr(site->begin, site->end - site->begin);
    if (result.calls >= limits.call_budget)
      throw Error(ErrorCode::CallBudgetExceeded,
                  "budget of " + std::to_string(limits.call_budget) + " calls spent at '" + text + "'");
    CallableResult called;
    try {
      called = registry.call(site->name, site->args);
    } catch (const Error& e) {
      throw Error(e.code(), "in '" + text + "': " + e.what());
    }
    auto splice = completion.substr(0, site->end) + " -> " + called.rendered + "\n";
    result.context += splice;
    result.generated += splice;
    ++result.calls;
  }
}

// ----------------------------------------------------------- tutor session

std::string_view to_string(SessionMode mode) {
  return mode == SessionMode::Batch ? "batch" : "incremental";
}

SessionMode parse_session_mode(std::string_view name) {
  if (name == "batch") return SessionMode::Batch;
  if (name == "incremental") return SessionMode::Incremental;
  throw Error(ErrorCode::Config, "unknown tutor mode '" + std::string(name) + "'");
}

namespace {

void record_step(SessionResult& out, const MachineState& m, const Action& action) {
  std::string note = "ok";
  if (m.status() == RunStatus::Halted) note = "halted";
  if (m.status() == RunStatus::Faulted) note = "fault:" + std::string(to_string(m.fault()->kind));
  out.log.push_back({out.log.size(), action, m.status(), note});
}

void finish(SessionResult& out, const MachineState& m) {
  out.status = m.status();
  if (m.status() == RunStatus::Halted) out.output = m.render();
  if (m.fault()) {
    out.fault = std::string(to_string(m.fault()->kind));
    out.fault_index = m.fault()->action_index;
  }
}

} // namespace

SessionResult tutor_session(Agent& agent, const TaskInstance& instance, const std::string& prompt,
                            const SessionConfig& config) {
  SessionResult out;
  auto machine = new_machine(instance);

  if (config.mode == SessionMode::Batch) {
    out.transcript = agent.complete({prompt, {"\n"}, config.max_tokens, {}});
    Trace trace;
    try {
      trace = parse_trace(out.transcript);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::EmptyTrace) {
        machine.underrun();
        finish(out, machine);
        return out;
      }
      out.status = RunStatus::Faulted;
      out.malformed = true;
      out.fault = std::string(to_string(e.code()));
      return out;
    }
    for (const auto& action : trace) {
      if (machine.status() != RunStatus::Running) break;
      machine.apply(action);
      record_step(out, machine, action);
    }
    machine.underrun();
    finish(out, machine);
    return out;
  }

  const std::size_t budget = 3 * instance.size() + 2 + config.slack;
  while (machine.status() == RunStatus::Running) {
    if (out.log.size() >= budget) {
      out.status = RunStatus::Faulted;
      out.fault = "ActionBudget";
      out.fault_index = out.log.size();
      return out;
    }
    auto reply = agent.complete({prompt + out.transcript, {"\n"}, 1, {}});
    Trace actions;
    try {
      actions = parse_trace(reply);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::EmptyTrace) {
        machine.underrun();
        break;
      }
      out.status = RunStatus::Faulted;
      out.malformed = true;
      out.fault = std::string(to_string(e.code()));
      out.fault_index = out.log.size();
      return out;
    }
    const auto& action = actions.front();
    machine.apply(action);
    record_step(out, machine, action);
    out.transcript += (out.log.size() == 1 ? " " : ", ");
    out.transcript += std::string(to_string(action)) + " <" + out.log.back().note + ">";
  }
  finish(out, machine);
  return out;
}

} // namespace symtutor
