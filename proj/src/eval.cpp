#include "symtutor/eval.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "symtutor/error.hpp"
#include "symtutor/oracles.hpp"

namespace symtutor {

std::string_view to_string(ErrorClass c) {
  switch (c) {
  case ErrorClass::None: return "none";
  case ErrorClass::Skip: return "skip";
  case ErrorClass::OverReplicate: return "over-replicate";
  case ErrorClass::Substitution: return "substitution";
  case ErrorClass::Malformed: return "malformed";
  case ErrorClass::Fault: return "fault";
  }
  return "?";
}

ErrorClass parse_error_class(std::string_view name) {
  for (auto c : {ErrorClass::None, ErrorClass::Skip, ErrorClass::OverReplicate,
                 ErrorClass::Substitution, ErrorClass::Malformed, ErrorClass::Fault})
    if (to_string(c) == name) return c;
  throw Error(ErrorCode::Parse, "unknown error class '" + std::string(name) + "'");
}

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> whitespace_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

// "P12:7" -> (12, "7"); "P12:7," keeps the trailing comma in the value.
std::optional<std::pair<std::size_t, std::string>> positional(std::string_view tok) {
  if (tok.size() < 4 || tok[0] != 'P') return std::nullopt;
  auto colon = tok.find(':');
  if (colon == std::string_view::npos || colon == 1) return std::nullopt;
  std::size_t k = 0;
  auto [ptr, ec] = std::from_chars(tok.data() + 1, tok.data() + colon, k);
  if (ec != std::errc() || ptr != tok.data() + colon) return std::nullopt;
  return std::make_pair(k, std::string(tok.substr(colon + 1)));
}

std::optional<std::size_t> reference(std::string_view tok) {
  if (tok.size() < 3 || tok[0] != '@' || tok[1] != 'P') return std::nullopt;
  std::size_t k = 0;
  auto [ptr, ec] = std::from_chars(tok.data() + 2, tok.data() + tok.size(), k);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) return std::nullopt;
  return k;
}

std::string first_line(std::string_view text) {
  auto nl = text.find('\n');
  return normalize_whitespace(text.substr(0, nl));
}

} // namespace

std::string normalize_whitespace(std::string_view text) {
  auto toks = whitespace_tokens(text);
  return join(toks, " ");
}

std::string strip_markers(std::string_view text) {
  std::vector<std::string> kept;
  for (auto& tok : whitespace_tokens(text)) {
    if (is_marker_token(tok)) continue;
    if (auto def = positional(tok)) {
      kept.push_back(def->second);
      continue;
    }
    kept.push_back(tok);
  }
  return join(kept, " ");
}

bool exact_match(std::string_view prediction, std::string_view target, bool strip) {
  if (strip) return normalize_whitespace(strip_markers(prediction)) == normalize_whitespace(strip_markers(target));
  return normalize_whitespace(prediction) == normalize_whitespace(target);
}

std::optional<std::string> resolve_references(std::string_view text, std::string_view definitions) {
  std::unordered_map<std::size_t, std::string> values;
  for (auto& tok : split_tokens(definitions))
    if (auto def = positional(tok)) values[def->first] = def->second;
  std::vector<std::string> out;
  for (auto& tok : whitespace_tokens(text)) {
    if (auto k = reference(tok)) {
      auto it = values.find(*k);
      if (it == values.end()) return std::nullopt;
      out.push_back(it->second);
    } else if (auto def = positional(tok)) {
      out.push_back(def->second);
    } else {
      out.push_back(tok);
    }
  }
  return join(out, " ");
}

std::optional<std::string> extract_answer(const FormatSpec& format, std::string_view input,
                                          std::string_view completion) {
  switch (format.family) {
  case FormatFamily::Baseline:
    return first_line(completion);
  case FormatFamily::Tutor:
    return std::nullopt;
  case FormatFamily::ScratchpadCoarse:
  case FormatFamily::ScratchpadFine: {
    auto pos = completion.rfind("result:");
    if (pos == std::string_view::npos) return std::nullopt;
    auto line = first_line(completion.substr(pos + 7));
    if (format.markers.mode == MarkerMode::Reference) {
      std::string defs(input);
      defs += "\n";
      defs += completion;
      return resolve_references(line, defs);
    }
    return line;
  }
  case FormatFamily::Callable: {
    auto pos = completion.rfind("combine(");
    if (pos == std::string_view::npos) return std::nullopt;
    auto rest = completion.substr(pos);
    auto line = rest.substr(0, rest.find('\n'));
    auto arrow = line.find(" -> ");
    if (arrow == std::string_view::npos) return std::nullopt;
    return normalize_whitespace(line.substr(arrow + 4));
  }
  }
  return std::nullopt;
}

std::string expected_answer(const RenderedExample& ex) {
  if (ex.format.family == FormatFamily::Tutor) return ex.instance.target;
  std::optional<std::string> answer;
  if (ex.format.family == FormatFamily::Callable) {
    static const CallableRegistry registry;
    answer = extract_answer(ex.format, ex.input, resolve_call_sites(ex.target, registry));
  } else {
    answer = extract_answer(ex.format, ex.input, ex.target);
  }
  if (!answer) throw Error(ErrorCode::Parse, "target of " + ex.id + " does not follow its format");
  return ex.format.targets_carry_markers(ex.instance.kind) ? *answer : strip_markers(*answer);
}

namespace {

bool periodic(std::span<const std::string> t, std::size_t begin, std::size_t end, std::size_t p) {
  for (std::size_t i = begin; i + p < end; ++i)
    if (t[i] != t[i + p]) return false;
  return true;
}

} // namespace

bool deletion_within_repeat_run(std::span<const std::string> longer,
                                std::span<const std::string> shorter) {
  const auto T = longer.size();
  const auto P = shorter.size();
  if (P >= T) return false;
  const auto d = T - P;
  std::size_t lcp = 0;
  while (lcp < P && longer[lcp] == shorter[lcp]) ++lcp;
  std::size_t lcs = 0;
  while (lcs < P && longer[T - 1 - lcs] == shorter[P - 1 - lcs]) ++lcs;
  const std::size_t lo = P > lcs ? P - lcs : 0;
  const std::size_t hi = std::min(lcp, P);
  // deleting longer[a, a + d) reproduces `shorter` for every a in [lo, hi]
  for (std::size_t a = lo; a <= hi; ++a) {
    for (std::size_t p = 1; p <= d; ++p) {
      if (d % p != 0) continue;
      if (a >= p && periodic(longer, a - p, a + d, p)) return true;
      if (a + d + p <= T && periodic(longer, a, a + d + p, p)) return true;
    }
  }
  return false;
}

ErrorClass classify_error(std::span<const std::string> /*input*/,
                          std::span<const std::string> prediction,
                          std::span<const std::string> target) {
  if (std::equal(prediction.begin(), prediction.end(), target.begin(), target.end()))
    return ErrorClass::None;
  if (prediction.size() < target.size() && deletion_within_repeat_run(target, prediction))
    return ErrorClass::Skip;
  if (prediction.size() > target.size() && deletion_within_repeat_run(prediction, target))
    return ErrorClass::OverReplicate;
  return ErrorClass::Substitution;
}

namespace {

bool well_formed(TaskKind task, std::span<const std::string> tokens, bool markers_allowed) {
  if (tokens.empty()) return false;
  if (task == TaskKind::Reverse) return true;
  return std::all_of(tokens.begin(), tokens.end(), [&](const std::string& t) {
    return is_digit_token(t) || (markers_allowed && is_marker_token(t));
  });
}

EvalRecord base_record(const RenderedExample& ex, std::string agent) {
  EvalRecord r;
  r.id = ex.id;
  r.agent = std::move(agent);
  r.task = ex.instance.kind;
  r.format = ex.format.label();
  r.alpha = ex.alpha;
  r.n = ex.n();
  r.split = ex.split;
  return r;
}

} // namespace

EvalRecord score_answer(const RenderedExample& ex, std::string agent,
                        const std::optional<std::string>& answer, std::string_view raw) {
  auto r = base_record(ex, std::move(agent));
  const bool keep_markers = ex.format.targets_carry_markers(ex.instance.kind);
  r.target = normalize_whitespace(expected_answer(ex));
  if (!answer) {
    r.prediction = std::string(raw);
    r.error_class = ErrorClass::Malformed;
    r.detail = "completion does not follow the " + ex.format.label() + " format";
    return r;
  }
  r.prediction = normalize_whitespace(keep_markers ? *answer : strip_markers(*answer));
  r.exact_match = r.prediction == r.target;
  if (r.exact_match) {
    r.error_class = ErrorClass::None;
    return r;
  }
  auto pred_toks = split_tokens(r.prediction);
  auto target_toks = split_tokens(r.target);
  if (!well_formed(ex.instance.kind, pred_toks, keep_markers)) {
    r.error_class = ErrorClass::Malformed;
    return r;
  }
  auto input_toks = split_tokens(ex.input);
  r.error_class = classify_error(input_toks, pred_toks, target_toks);
  if (r.error_class == ErrorClass::None) r.error_class = ErrorClass::Substitution; // token-equal, spacing differs
  return r;
}

EvalRecord score_completion(const RenderedExample& ex, std::string agent, std::string_view completion) {
  return score_answer(ex, std::move(agent), extract_answer(ex.format, ex.input, completion), completion);
}

EvalRecord fault_record(const RenderedExample& ex, std::string agent, std::string detail,
                        std::string_view raw) {
  auto r = base_record(ex, std::move(agent));
  r.target = normalize_whitespace(expected_answer(ex));
  r.prediction = std::string(raw);
  r.error_class = ErrorClass::Fault;
  r.detail = std::move(detail);
  return r;
}

nlohmann::json to_json(const EvalRecord& r) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["id"] = r.id;
  j["agent"] = r.agent;
  j["task"] = std::string(to_string(r.task));
  j["format"] = r.format;
  j["alpha"] = r.alpha ? nlohmann::json(*r.alpha) : nlohmann::json(nullptr);
  j["n"] = r.n;
  j["split"] = r.split;
  j["prediction"] = r.prediction;
  j["target"] = r.target;
  j["exact_match"] = r.exact_match;
  j["error_class"] = std::string(to_string(r.error_class));
  j["detail"] = r.detail;
  return j;
}

EvalRecord record_from_json(const nlohmann::json& j) {
  try {
    EvalRecord r;
    r.id = j.at("id").get<std::string>();
    r.agent = j.at("agent").get<std::string>();
    r.task = parse_task_kind(j.at("task").get<std::string>());
    r.format = j.at("format").get<std::string>();
    if (!j.at("alpha").is_null()) r.alpha = j["alpha"].get<double>();
    r.n = j.at("n").get<std::size_t>();
    r.split = j.at("split").get<std::string>();
    r.prediction = j.at("prediction").get<std::string>();
    r.target = j.at("target").get<std::string>();
    r.exact_match = j.at("exact_match").get<bool>();
    r.error_class = parse_error_class(j.at("error_class").get<std::string>());
    r.detail = j.value("detail", std::string());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("record: ") + e.what());
  }
}

std::vector<EvalRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open records " + path.string());
  std::vector<EvalRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::Parse, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

namespace {

void finalize(std::vector<CurvePoint>& points, int train_max_n) {
  std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.n < b.n; });
  for (auto& p : points) {
    p.accuracy = static_cast<double>(p.correct) / static_cast<double>(p.count);
    p.split = p.n <= static_cast<std::size_t>(train_max_n) ? "in" : "ood";
  }
}

void add_point(std::vector<CurvePoint>& points, std::size_t n, std::size_t count, std::size_t correct) {
  auto it = std::find_if(points.begin(), points.end(), [&](const auto& p) { return p.n == n; });
  if (it == points.end()) {
    points.push_back({n, count, correct, 0.0, "in"});
  } else {
    it->count += count;
    it->correct += correct;
  }
}

} // namespace

Curves aggregate(std::span<const EvalRecord> records, int train_max_n) {
  if (records.empty()) throw Error(ErrorCode::EmptyRecords, "nothing to aggregate");
  Curves curves;
  for (const auto& r : records)
    add_point(curves[{r.agent, r.task, r.format, r.alpha}], r.n, 1, r.exact_match ? 1 : 0);
  for (auto& [key, points] : curves) finalize(points, train_max_n);
  return curves;
}

Curves merge_curves(const Curves& a, const Curves& b, int train_max_n) {
  Curves out = a;
  for (const auto& [key, points] : b)
    for (const auto& p : points) add_point(out[key], p.n, p.count, p.correct);
  for (auto& [key, points] : out) finalize(points, train_max_n);
  return out;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string alpha_text(const std::optional<double>& alpha) {
  return alpha ? format_double(*alpha) : std::string();
}

} // namespace

std::string curves_csv(const Curves& curves) {
  std::string out = "agent,format,alpha,n,count,correct,accuracy,split,task,schema_version\n";
  for (const auto& [key, points] : curves) {
    for (const auto& p : points) {
      out += csv_field(key.agent) + "," + csv_field(key.format) + "," + alpha_text(key.alpha) + "," +
             std::to_string(p.n) + "," + std::to_string(p.count) + "," + std::to_string(p.correct) +
             "," + format_double(p.accuracy) + "," + p.split + "," + std::string(to_string(key.task)) +
             "," + std::to_string(kReportSchemaVersion) + "\n";
    }
  }
  return out;
}

std::string curves_table(const Curves& curves) {
  std::ostringstream out;
  for (const auto& [key, points] : curves) {
    out << "agent=" << key.agent << " task=" << to_string(key.task) << " format=" << key.format
        << " alpha=" << (key.alpha ? format_double(*key.alpha) : "-") << "\n";
    out << "  " << std::setw(5) << "n" << std::setw(8) << "count" << std::setw(9) << "correct"
        << std::setw(10) << "accuracy" << "  split\n";
    for (const auto& p : points) {
      out << "  " << std::setw(5) << p.n << std::setw(8) << p.count << std::setw(9) << p.correct
          << std::setw(10) << std::fixed << std::setprecision(4) << p.accuracy << "  " << p.split << "\n";
    }
  }
  return out.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw Error(ErrorCode::Io, "write failed on " + path.string());
}

} // namespace

ReportPaths write_report(const Curves& curves, std::span<const EvalRecord> records,
                         const std::filesystem::path& dir) {
  if (curves.empty()) throw Error(ErrorCode::EmptyRecords, "no curves to report");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
  ReportPaths paths{dir / "curves.csv", dir / "records.jsonl", dir / "report.txt"};
  write_file(paths.curves_csv, curves_csv(curves));
  std::string lines;
  for (const auto& r : records) lines += to_json(r).dump() + "\n";
  write_file(paths.records_jsonl, lines);
  write_file(paths.table_txt, curves_table(curves));
  return paths;
}

} // namespace symtutor
