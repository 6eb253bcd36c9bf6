#include "symtutor/commands.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "symtutor/kernels.hpp"
#include "symtutor/oracles.hpp"

namespace symtutor {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      // gen
      "task", "format", "markers", "alpha", "digits", "count", "seed", "train_max", "output",
      "workers", "id_prefix",
      // run
      "dataset", "records", "agent", "shots", "shot_digits", "shot_alpha", "tutor_mode", "window",
      "tie_break", "max_tokens", "call_budget", "endpoint", "model", "api_key_env", "timeout_ms",
      "max_retries", "flush_every", "temperature", "top_p", "frequency_penalty", "presence_penalty",
      // eval
      "report_dir"};
  return keys;
}

template <typename T>
T number(const KeyValues& kv, const std::string& key, T fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  T value{};
  const auto& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorCode::Config, "'" + key + "' expects a number, got '" + s + "'");
  return value;
}

std::string text(const KeyValues& kv, const std::string& key, std::string fallback) {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

// "1-5" or "7"
std::pair<int, int> range(const KeyValues& kv, const std::string& key, std::pair<int, int> fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  auto s = it->second;
  auto dash = s.find('-');
  KeyValues tmp{{"lo", trim(s.substr(0, dash))},
                {"hi", dash == std::string::npos ? trim(s) : trim(s.substr(dash + 1))}};
  auto lo = number<int>(tmp, "lo", 0);
  auto hi = number<int>(tmp, "hi", 0);
  if (lo < 1 || hi < lo)
    throw Error(ErrorCode::Config, "'" + key + "' must be a range like 1-5, got '" + s + "'");
  return {lo, hi};
}

std::vector<double> number_list(const KeyValues& kv, const std::string& key, std::vector<double> fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  std::vector<double> out;
  for (auto& piece : split_tokens(it->second)) {
    KeyValues tmp{{key, piece}};
    out.push_back(number<double>(tmp, key, 0.0));
  }
  if (out.empty()) throw Error(ErrorCode::Config, "'" + key + "' is empty");
  return out;
}

FormatSpec format_from(const KeyValues& kv) {
  FormatSpec f;
  f.family = parse_format_family(text(kv, "format", "baseline"));
  f.markers.mode = parse_marker_mode(text(kv, "markers", "none"));
  return f;
}

} // namespace

KeyValues parse_key_values(std::string_view body) {
  KeyValues kv;
  std::istringstream in{std::string(body)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::Config, "line " + std::to_string(lineno) + ": expected key = value");
    auto key = trim(t.substr(0, eq));
    if (!known_keys().count(key))
      throw Error(ErrorCode::Config, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    kv[key] = trim(t.substr(eq + 1));
  }
  return kv;
}

KeyValues load_key_values(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Config, "cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_key_values(buf.str());
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, path.string() + ": " + e.what());
  }
}

GenConfig gen_config_from(const KeyValues& kv) {
  GenConfig g;
  auto& d = g.dataset;
  d.task = parse_task_kind(text(kv, "task", "copy"));
  d.format = format_from(kv);
  d.count = number<std::size_t>(kv, "count", 0);
  std::tie(d.min_n, d.max_n) = range(kv, "digits", {1, 5});
  d.alphas = number_list(kv, "alpha", {0.1});
  for (double a : d.alphas)
    if (a < 0.0 || a > 1.0) throw Error(ErrorCode::Config, "alpha must lie in [0, 1]");
  d.seed = number<std::uint64_t>(kv, "seed", 42);
  d.train_max_n = number<int>(kv, "train_max", 5);
  d.id_prefix = text(kv, "id_prefix", "");
  g.output = text(kv, "output", g.output.string());
  g.workers = number<int>(kv, "workers", 1);
  d.format.check(d.task);
  return g;
}

RunConfig run_config_from(const KeyValues& kv) {
  RunConfig r;
  r.dataset = text(kv, "dataset", "");
  if (r.dataset.empty()) throw Error(ErrorCode::Config, "'dataset' is required");
  r.records = text(kv, "records", r.records.string());
  r.agent = text(kv, "agent", r.agent);
  if (kv.count("shots")) {
    r.shots = number<std::size_t>(kv, "shots", 0);
    if (*r.shots < 1) throw Error(ErrorCode::Config, "'shots' must be at least 1");
  }
  std::tie(r.shot_min_n, r.shot_max_n) = range(kv, "shot_digits", {1, 5});
  r.shot_alpha = number<double>(kv, "shot_alpha", r.shot_alpha);
  r.train_max_n = number<int>(kv, "train_max", r.train_max_n);
  r.tutor_mode = parse_session_mode(text(kv, "tutor_mode", "batch"));
  r.pattern.window = number<int>(kv, "window", r.pattern.window);
  if (r.pattern.window < 1) throw Error(ErrorCode::Config, "'window' must be at least 1");
  auto tie = text(kv, "tie_break", "latest");
  if (tie != "latest" && tie != "earliest")
    throw Error(ErrorCode::Config, "'tie_break' is latest or earliest");
  r.pattern.tie_break = tie == "latest" ? TieBreak::Latest : TieBreak::Earliest;
  r.max_tokens = number<int>(kv, "max_tokens", r.max_tokens);
  if (r.max_tokens < 1) throw Error(ErrorCode::Config, "'max_tokens' must be at least 1");
  r.call_budget = number<std::size_t>(kv, "call_budget", r.call_budget);
  r.remote.endpoint = text(kv, "endpoint", r.remote.endpoint);
  r.remote.model = text(kv, "model", r.remote.model);
  r.remote.api_key_env = text(kv, "api_key_env", r.remote.api_key_env);
  r.remote.timeout_ms = number<int>(kv, "timeout_ms", r.remote.timeout_ms);
  r.remote.max_retries = number<int>(kv, "max_retries", r.remote.max_retries);
  r.remote.decode.temperature = number<double>(kv, "temperature", r.remote.decode.temperature);
  r.remote.decode.top_p = number<double>(kv, "top_p", r.remote.decode.top_p);
  r.remote.decode.frequency_penalty = number<double>(kv, "frequency_penalty", r.remote.decode.frequency_penalty);
  r.remote.decode.presence_penalty = number<double>(kv, "presence_penalty", r.remote.decode.presence_penalty);
  r.workers = number<int>(kv, "workers", r.workers);
  r.flush_every = std::max<std::size_t>(1, number<std::size_t>(kv, "flush_every", r.flush_every));
  r.seed = number<std::uint64_t>(kv, "seed", r.seed);
  return r;
}

EvalConfig eval_config_from(const KeyValues& kv) {
  EvalConfig e;
  e.records = text(kv, "records", e.records.string());
  e.report_dir = text(kv, "report_dir", e.report_dir.string());
  e.train_max_n = number<int>(kv, "train_max", e.train_max_n);
  return e;
}

std::unique_ptr<Agent> make_agent(const RunConfig& config) {
  if (config.agent == "oracle") return std::make_unique<OracleAgent>();
  if (config.agent == "pattern") return std::make_unique<PatternAgent>(config.pattern);
  if (config.agent == "remote") return std::make_unique<RemoteAgent>(config.remote);
  throw Error(ErrorCode::Config, "unknown agent '" + config.agent + "' (oracle, pattern, remote)");
}

std::vector<RenderedExample> make_shots(const RunConfig& config, TaskKind task, const FormatSpec& format) {
  DatasetConfig d;
  d.task = task;
  d.format = format;
  d.count = config.shot_count(format.family);
  d.min_n = config.shot_min_n;
  d.max_n = config.shot_max_n;
  d.alphas = {config.shot_alpha};
  d.seed = derive_seed(config.seed, 0x5e07);
  d.train_max_n = config.train_max_n;
  d.id_prefix = "shot";
  return kernels::render_dataset_serial(d);
}

EvalRecord evaluate_example(Agent& agent, const RenderedExample& example,
                            std::span<const RenderedExample> shots, const RunConfig& config) {
  const auto agent_id = agent.id();
  try {
    const auto prompt = build_prompt(shots, example);
    switch (example.format.family) {
    case FormatFamily::Tutor: {
      SessionConfig session{config.tutor_mode, config.max_tokens, 8};
      auto res = tutor_session(agent, example.instance, prompt, session);
      if (res.malformed) return score_answer(example, agent_id, std::nullopt, res.transcript);
      if (res.status == RunStatus::Halted) return score_answer(example, agent_id, res.output, res.transcript);
      return fault_record(example, agent_id,
                          res.fault + " at action " + std::to_string(res.fault_index), res.transcript);
    }
    case FormatFamily::Callable: {
      static const CallableRegistry registry;
      CallLimits limits{config.call_budget, config.max_tokens, stop_sequences(example.format)};
      auto loop = callable_loop(agent, prompt, registry, limits);
      return score_completion(example, agent_id, loop.generated);
    }
    default: {
      auto completion =
          agent.complete({prompt, stop_sequences(example.format), config.max_tokens, example.id});
      return score_completion(example, agent_id, completion);
    }
    }
  } catch (const Error& e) {
    return fault_record(example, agent_id, e.what());
  }
}

std::size_t cmd_gen(const GenConfig& config, std::ostream& log) {
  auto written = gen_dataset(config.dataset, config.output, config.workers);
  log << config.output.string() << ": " << written << " examples\n";
  return written;
}

namespace {

// Reads ids already recorded; drops a torn final line left by an interrupted run.
// Keys are "agent\tid" so several agents can share one records file.
std::unordered_set<std::string> recorded_ids(const std::filesystem::path& path) {
  std::unordered_set<std::string> ids;
  if (!std::filesystem::exists(path)) return ids;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::vector<std::string> good;
  bool torn = false;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    try {
      auto r = record_from_json(nlohmann::json::parse(line));
      ids.insert(r.agent + '\t' + r.id);
      good.push_back(line);
    } catch (const std::exception&) {
      torn = true;
      break;
    }
  }
  in.close();
  if (torn) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    for (const auto& g : good) out << g << '\n';
    if (!out) throw Error(ErrorCode::Io, "cannot rewrite " + path.string());
  }
  return ids;
}

} // namespace

RunSummary cmd_run(const RunConfig& config, std::ostream& log, Agent* agent,
                   std::optional<std::size_t> stop_after) {
  auto examples = read_dataset(config.dataset);
  RunSummary summary;
  summary.total = examples.size();
  if (examples.empty()) {
    log << "dataset " << config.dataset.string() << " is empty, nothing to run\n";
    return summary;
  }
  const auto task = examples.front().instance.kind;
  const auto format = examples.front().format;
  for (const auto& ex : examples)
    if (ex.instance.kind != task || !(ex.format == format))
      throw Error(ErrorCode::MixedFormats, "dataset mixes formats: " + ex.id + " is " + ex.format.label());

  if (!agent && config.agent == "oracle" && format.family != FormatFamily::Tutor)
    throw Error(ErrorCode::Config, "the oracle agent only answers tutor prompts, dataset is " + format.label());
  if (!agent && config.agent == "pattern" &&
      (task != TaskKind::Copy || format.family != FormatFamily::Baseline))
    throw Error(ErrorCode::Config, "the pattern agent only answers baseline copy prompts, dataset is " +
                                       std::string(to_string(task)) + " " + format.label());
  std::unique_ptr<Agent> owned;
  if (!agent) {
    owned = make_agent(config);
    agent = owned.get();
  }
  const auto shots = make_shots(config, task, format);

  if (config.records.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(config.records.parent_path(), ec);
  }
  const auto done = recorded_ids(config.records);
  const auto agent_id = agent->id();
  std::vector<const RenderedExample*> pending;
  for (const auto& ex : examples)
    if (!done.count(agent_id + '\t' + ex.id)) pending.push_back(&ex);
  summary.resumed = examples.size() - pending.size();
  if (stop_after && pending.size() > *stop_after) pending.resize(*stop_after);

  std::ofstream out(config.records, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + config.records.string() + " for appending");

  const int workers = kernels::resolve_workers(config.workers);
  for (std::size_t begin = 0; begin < pending.size(); begin += config.flush_every) {
    const auto end = std::min(pending.size(), begin + config.flush_every);
    std::vector<EvalRecord> chunk(end - begin);
    kernels::ExceptionGuard guard;
    const auto count = static_cast<std::ptrdiff_t>(chunk.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      const auto k = static_cast<std::size_t>(i);
      guard.run([&] { chunk[k] = evaluate_example(*agent, *pending[begin + k], shots, config); });
    }
    guard.rethrow();
    for (const auto& r : chunk) {
      out << to_json(r).dump() << '\n';
      summary.exact += r.exact_match ? 1 : 0;
    }
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "write failed on " + config.records.string());
    summary.written += chunk.size();
  }
  log << config.records.string() << ": " << summary.written << " new record(s), " << summary.resumed
      << " already present, " << summary.exact << " exact of the new\n";
  return summary;
}

ReportPaths cmd_eval(const EvalConfig& config, std::ostream& log) {
  auto records = read_records(config.records);
  auto curves = aggregate(records, config.train_max_n);
  auto paths = write_report(curves, records, config.report_dir);
  log << paths.curves_csv.string() << "\n" << paths.records_jsonl.string() << "\n"
      << paths.table_txt.string() << "\n";
  return paths;
}

bool cmd_trace(TaskKind task, const std::vector<std::string>& operands, std::ostream& out) {
  auto instance = TaskInstance::from_operands(task, operands);
  auto trace = oracle_trace(instance);
  auto run = run_trace(new_machine(instance), trace);
  const auto expected = target_of(instance);
  out << "task: " << to_string(task) << "\n";
  out << "trace (" << trace.size() << " actions): " << format_trace(trace) << "\n";
  out << "status: " << to_string(run.state.status()) << "\n";
  out << "output: " << run.output.value_or("") << "\n";
  out << "target: " << expected << "\n";
  const bool pass = run.output && *run.output == expected;
  out << (pass ? "PASS" : "FAIL") << "\n";
  return pass;
}

int exit_code_for(const Error& error) {
  switch (error.code()) {
  case ErrorCode::Config:
  case ErrorCode::FormatTaskMismatch:
  case ErrorCode::MixedFormats:
  case ErrorCode::EmptyExemplars:
    return 2;
  case ErrorCode::Io:
  case ErrorCode::Parse:
    return 3;
  case ErrorCode::Timeout:
  case ErrorCode::HttpStatus:
  case ErrorCode::MissingCredential:
  case ErrorCode::Transport:
    return 4;
  default:
    return 1;
  }
}

} // namespace symtutor
