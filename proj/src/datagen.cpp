#include "symtutor/datagen.hpp"

#include <array>
#include <fstream>
#include <iostream>

#include "symtutor/error.hpp"
#include "symtutor/kernels.hpp"
#include "symtutor/oracles.hpp"

namespace symtutor {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::string sample_number(const RepetitionSpec& spec, Rng& rng, bool no_leading_zero) {
  std::string digits;
  if (spec.n_digits <= 0) return digits;
  digits.reserve(static_cast<std::size_t>(spec.n_digits));
  const int lo = (no_leading_zero && spec.n_digits > 1) ? 1 : 0;
  digits.push_back(static_cast<char>('0' + std::uniform_int_distribution<int>(lo, 9)(rng)));
  std::bernoulli_distribution repeat(spec.alpha);
  std::uniform_int_distribution<int> other(0, 8);
  for (int i = 1; i < spec.n_digits; ++i) {
    const int prev = digits.back() - '0';
    if (repeat(rng)) {
      digits.push_back(digits.back());
    } else {
      int d = other(rng);
      if (d >= prev) ++d;
      digits.push_back(static_cast<char>('0' + d));
    }
  }
  return digits;
}

std::string sample_number(const RepetitionSpec& spec, std::uint64_t seed, bool no_leading_zero) {
  Rng rng(seed);
  return sample_number(spec, rng, no_leading_zero);
}

namespace {

constexpr std::array<std::string_view, 120> kNouns = {
    "apple",  "bike",   "book",   "cat",    "pen",    "dog",    "tree",   "house",  "car",
    "table",  "chair",  "door",   "window", "phone",  "cup",    "bottle", "shoe",   "hat",
    "coat",   "bird",   "fish",   "horse",  "cow",    "sheep",  "goat",   "lion",   "tiger",
    "bear",   "wolf",   "fox",    "mouse",  "rabbit", "duck",   "frog",   "snake",  "river",
    "lake",   "sea",    "hill",   "road",   "bridge", "city",   "town",   "farm",   "field",
    "flower", "grass",  "leaf",   "rock",   "sand",   "star",   "moon",   "sun",    "cloud",
    "rain",   "snow",   "wind",   "fire",   "water",  "bread",  "cake",   "milk",   "egg",
    "rice",   "salt",   "sugar",  "tea",    "wine",   "beer",   "soup",   "box",    "bag",
    "key",    "lock",   "clock",  "watch",  "ring",   "coin",   "card",   "map",    "desk",
    "bed",    "lamp",   "wall",   "floor",  "roof",   "garden", "park",   "school", "bank",
    "shop",   "church", "train",  "boat",   "ship",   "plane",  "truck",  "bus",    "ball",
    "game",   "song",   "film",   "photo",  "paper",  "letter", "word",   "name",   "king",
    "queen",  "baby",   "child",  "friend", "doctor", "nurse",  "farmer", "pilot",  "cook",
    "judge",  "island", "forest",
};

} // namespace

std::span<const std::string_view> noun_vocabulary() { return kNouns; }

TaskInstance sample_instance(TaskKind kind, int n, double alpha, Rng& rng) {
  switch (kind) {
  case TaskKind::Copy: {
    auto digits = sample_number({alpha, n}, rng);
    std::vector<std::string> cells;
    for (char c : digits) cells.emplace_back(1, c);
    return TaskInstance::copy(std::move(cells));
  }
  case TaskKind::Add: {
    auto lhs = sample_number({alpha, n}, rng, true);
    auto rhs = sample_number({alpha, n}, rng, true);
    return TaskInstance::add(std::move(lhs), std::move(rhs));
  }
  case TaskKind::Reverse: {
    std::vector<std::string> items;
    const auto vocab = noun_vocabulary();
    if (static_cast<std::size_t>(n) <= vocab.size()) {
      std::vector<std::size_t> idx(vocab.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      for (int i = 0; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), idx.size() - 1);
        std::swap(idx[static_cast<std::size_t>(i)], idx[pick(rng)]);
        items.emplace_back(vocab[idx[static_cast<std::size_t>(i)]]);
      }
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
      for (int i = 0; i < n; ++i) items.emplace_back(vocab[pick(rng)]);
    }
    return TaskInstance::reverse(std::move(items));
  }
  }
  throw Error(ErrorCode::InvalidOperand, "unknown task");
}

// ---------------------------------------------------------------- markers

std::string_view to_string(MarkerMode mode) {
  switch (mode) {
  case MarkerMode::None: return "none";
  case MarkerMode::Ordered: return "ordered";
  case MarkerMode::Random: return "random";
  case MarkerMode::Reference: return "reference";
  }
  return "?";
}

MarkerMode parse_marker_mode(std::string_view name) {
  if (name == "none") return MarkerMode::None;
  if (name == "ordered") return MarkerMode::Ordered;
  if (name == "random") return MarkerMode::Random;
  if (name == "reference") return MarkerMode::Reference;
  throw Error(ErrorCode::Config, "unknown marker mode '" + std::string(name) + "'");
}

std::string marker_name(std::size_t index) {
  std::string name;
  std::size_t v = index + 1;
  while (v > 0) {
    --v;
    name.insert(name.begin(), static_cast<char>('A' + v % 26));
    v /= 26;
  }
  return name;
}

std::optional<std::size_t> parse_marker(std::string_view name) {
  if (name.empty() || name.size() > 12) return std::nullopt;
  std::size_t v = 0;
  for (char c : name) {
    if (c < 'A' || c > 'Z') return std::nullopt;
    v = v * 26 + static_cast<std::size_t>(c - 'A' + 1);
  }
  return v - 1;
}

bool is_marker_token(std::string_view token) { return parse_marker(token).has_value(); }

std::vector<std::string> assign_markers(std::size_t n, const MarkerScheme& scheme, Rng& rng) {
  std::vector<std::string> out;
  if (scheme.mode == MarkerMode::Ordered) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(marker_name(i));
  } else if (scheme.mode == MarkerMode::Random) {
    const std::size_t pool = std::max<std::size_t>(26, n);
    std::vector<std::size_t> idx(pool);
    for (std::size_t i = 0; i < pool; ++i) idx[i] = i;
    for (std::size_t i = 0; i < n; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool - 1);
      std::swap(idx[i], idx[pick(rng)]);
      out.push_back(marker_name(idx[i]));
    }
  }
  return out;
}

std::vector<std::string> assign_markers(std::size_t n, const MarkerScheme& scheme,
                                        std::uint64_t seed) {
  Rng rng(seed);
  return assign_markers(n, scheme, rng);
}

// ---------------------------------------------------------------- formats

std::string_view to_string(FormatFamily family) {
  switch (family) {
  case FormatFamily::Baseline: return "baseline";
  case FormatFamily::ScratchpadCoarse: return "scratchpad-coarse";
  case FormatFamily::ScratchpadFine: return "scratchpad-fine";
  case FormatFamily::Tutor: return "tutor";
  case FormatFamily::Callable: return "callable";
  }
  return "?";
}

FormatFamily parse_format_family(std::string_view name) {
  if (name == "baseline") return FormatFamily::Baseline;
  if (name == "scratchpad-coarse") return FormatFamily::ScratchpadCoarse;
  if (name == "scratchpad-fine") return FormatFamily::ScratchpadFine;
  if (name == "tutor") return FormatFamily::Tutor;
  if (name == "callable") return FormatFamily::Callable;
  throw Error(ErrorCode::Config, "unknown format family '" + std::string(name) + "'");
}

std::string FormatSpec::label() const {
  std::string out(to_string(family));
  if (markers.mode != MarkerMode::None) out += "+" + std::string(to_string(markers.mode));
  return out;
}

bool FormatSpec::targets_carry_markers(TaskKind task) const {
  if (task == TaskKind::Reverse) return false;
  return markers.mode == MarkerMode::Ordered || markers.mode == MarkerMode::Random;
}

void FormatSpec::check(TaskKind task) const {
  auto mismatch = [&](const std::string& why) {
    throw Error(ErrorCode::FormatTaskMismatch,
                label() + " for task " + std::string(to_string(task)) + ": " + why);
  };
  if (family == FormatFamily::Tutor && markers.mode != MarkerMode::None)
    mismatch("tutor traces take unmarked inputs");
  if (markers.mode == MarkerMode::Reference &&
      (task != TaskKind::Add || family != FormatFamily::ScratchpadFine))
    mismatch("reference markers need addition with fine-grained steps");
  switch (family) {
  case FormatFamily::Baseline:
  case FormatFamily::Tutor:
    return;
  case FormatFamily::ScratchpadFine:
    if (task == TaskKind::Copy) mismatch("no step format for copy");
    return;
  case FormatFamily::ScratchpadCoarse:
  case FormatFamily::Callable:
    if (task != TaskKind::Add) mismatch("addition only");
    return;
  }
}

namespace {

std::string marked(const std::string& marker, const std::string& token) {
  return marker.empty() ? token : marker + " " + token;
}

std::string render_copy(const TaskInstance& inst, const FormatSpec& format, Rng& rng,
                        std::string& target) {
  auto markers = assign_markers(inst.tokens.size(), format.markers, rng);
  std::vector<std::string> cells;
  for (std::size_t i = 0; i < inst.tokens.size(); ++i)
    cells.push_back(marked(markers.empty() ? "" : markers[i], inst.tokens[i]));
  auto body = join(cells, " ");
  target = format.family == FormatFamily::Tutor ? format_trace(oracle_trace(inst)) : body;
  return "copy: " + body;
}

std::string render_reverse(const TaskInstance& inst, const FormatSpec& format, Rng& rng,
                           std::string& target) {
  const auto n = inst.tokens.size();
  auto markers = assign_markers(n, format.markers, rng);
  std::vector<std::string> items;
  for (std::size_t i = 0; i < n; ++i)
    items.push_back(marked(markers.empty() ? "" : markers[i], inst.tokens[i]));
  switch (format.family) {
  case FormatFamily::Tutor:
    target = format_trace(oracle_trace(inst));
    break;
  case FormatFamily::ScratchpadFine:
    target.clear();
    for (std::size_t i = n; i-- > 0;) {
      auto label = markers.empty() ? std::to_string(i + 1) : markers[i];
      target += label + ": " + inst.tokens[i] + "\n";
    }
    target += "result: " + inst.target;
    break;
  default:
    target = inst.target;
  }
  return "reverse the list: " + join(items, ", ");
}

// Column-wise view of an addition problem, least significant column first.
struct Column {
  char a, b;
  int carry_in, carry_out;
  char result;
  bool a_real, b_real; // false for zero padding
};

std::vector<Column> columns_of(const TaskInstance& inst) {
  const auto k = inst.size();
  std::vector<Column> cols;
  int carry = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const bool a_real = j < inst.lhs.size();
    const bool b_real = j < inst.rhs.size();
    const char a = a_real ? inst.lhs[inst.lhs.size() - 1 - j] : '0';
    const char b = b_real ? inst.rhs[inst.rhs.size() - 1 - j] : '0';
    const int s = (a - '0') + (b - '0') + carry;
    cols.push_back({a, b, carry, s / 10, static_cast<char>('0' + s % 10), a_real, b_real});
    carry = s / 10;
  }
  return cols;
}

std::string render_add_reference(const TaskInstance& inst, std::string& target) {
  std::size_t counter = 0;
  auto define = [&](char digit, std::size_t& slot) {
    slot = ++counter;
    return "P" + std::to_string(slot) + ":" + std::string(1, digit);
  };
  auto ref = [](std::size_t slot) { return "@P" + std::to_string(slot); };

  const auto cols = columns_of(inst);
  std::vector<std::size_t> lhs_slot(inst.lhs.size()), rhs_slot(inst.rhs.size());
  std::vector<std::string> lhs_toks, rhs_toks;
  for (std::size_t i = 0; i < inst.lhs.size(); ++i) lhs_toks.push_back(define(inst.lhs[i], lhs_slot[i]));
  for (std::size_t i = 0; i < inst.rhs.size(); ++i) rhs_toks.push_back(define(inst.rhs[i], rhs_slot[i]));

  std::vector<std::size_t> result_slot(cols.size());
  std::size_t carry_slot = 0;
  target.clear();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const auto& c = cols[j];
    std::size_t scratch = 0;
    auto a = c.a_real ? ref(lhs_slot[inst.lhs.size() - 1 - j]) : define('0', scratch);
    auto b = c.b_real ? ref(rhs_slot[inst.rhs.size() - 1 - j]) : define('0', scratch);
    auto cin = j == 0 ? define('0', scratch) : ref(carry_slot);
    auto cout = define(static_cast<char>('0' + c.carry_out), carry_slot);
    auto r = define(c.result, result_slot[j]);
    target += a + " + " + b + " + " + cin + " -> carry C: " + cout + ", result " + r + "\n";
  }
  std::vector<std::string> digits;
  for (std::size_t j = cols.size(); j-- > 0;) digits.push_back(ref(result_slot[j]));
  target += "combine: carry " + ref(carry_slot) + ", digits " + join(digits, " ") + "\n";
  if (cols.back().carry_out != 0) digits.insert(digits.begin(), ref(carry_slot));
  target += "result: " + join(digits, " ");
  return "question: " + join(lhs_toks, " ") + " + " + join(rhs_toks, " ");
}

std::string render_add(const TaskInstance& inst, const FormatSpec& format, Rng& rng,
                       std::string& target) {
  if (format.markers.mode == MarkerMode::Reference) return render_add_reference(inst, target);

  const auto k = inst.size();
  // markers[0] labels the overflow column, markers[c + 1] aligned column c (msd first)
  auto markers = assign_markers(k + 1, format.markers, rng);
  auto column_marker = [&](std::size_t from_lsd) -> std::string {
    if (markers.empty()) return {};
    return markers[k - from_lsd];
  };
  auto render_number = [&](std::string_view digits) {
    std::vector<std::string> toks;
    for (std::size_t i = 0; i < digits.size(); ++i)
      toks.push_back(marked(column_marker(digits.size() - 1 - i), std::string(1, digits[i])));
    return join(toks, " ");
  };

  const auto cols = columns_of(inst);
  const auto sum = schoolbook_add(inst.lhs, inst.rhs);
  const auto input = "question: " + render_number(inst.lhs) + " + " + render_number(inst.rhs);

  auto mark_digit = [&](std::size_t j, char d) { return marked(column_marker(j), std::string(1, d)); };

  switch (format.family) {
  case FormatFamily::Baseline:
    target = render_number(sum);
    break;
  case FormatFamily::Tutor:
    target = format_trace(oracle_trace(inst));
    break;
  case FormatFamily::ScratchpadCoarse:
    target.clear();
    for (std::size_t j = 0; j < cols.size(); ++j)
      target += mark_digit(j, cols[j].a) + " + " + mark_digit(j, cols[j].b) + "\n";
    target += "result: " + render_number(sum);
    break;
  case FormatFamily::ScratchpadFine: {
    target.clear();
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const auto& c = cols[j];
      target += mark_digit(j, c.a) + " + " + mark_digit(j, c.b) + " + " +
                std::to_string(c.carry_in) + " -> carry C: " + std::to_string(c.carry_out) +
                ", result " + mark_digit(j, c.result) + "\n";
    }
    std::vector<std::string> digits;
    for (std::size_t j = cols.size(); j-- > 0;) digits.push_back(mark_digit(j, cols[j].result));
    target += "combine: carry " + std::to_string(cols.back().carry_out) + ", digits " +
              join(digits, " ") + "\n";
    target += "result: " + render_number(sum);
    break;
  }
  case FormatFamily::Callable: {
    std::vector<std::string> lines;
    lines.push_back(call_site("convert", std::vector<std::string>{inst.lhs}));
    lines.push_back(call_site("convert", std::vector<std::string>{inst.rhs}));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      std::vector<std::string> args{std::string(1, cols[j].a), std::string(1, cols[j].b)};
      if (j > 0) args.push_back(std::to_string(cols[j].carry_in));
      lines.push_back(call_site("add", args));
    }
    std::vector<std::string> args;
    for (std::size_t j = cols.size(); j-- > 0;) args.emplace_back(1, cols[j].result);
    args.push_back(std::to_string(cols.back().carry_out));
    lines.push_back(call_site("combine", args));
    target = join(lines, "\n");
    break;
  }
  }
  return input;
}

} // namespace

RenderedExample render_example(const TaskInstance& instance, const FormatSpec& format,
                               std::uint64_t seed) {
  format.check(instance.kind);
  Rng rng(derive_seed(seed, 1));
  RenderedExample ex;
  ex.instance = instance;
  ex.format = format;
  ex.seed = seed;
  switch (instance.kind) {
  case TaskKind::Copy: ex.input = render_copy(instance, format, rng, ex.target); break;
  case TaskKind::Reverse: ex.input = render_reverse(instance, format, rng, ex.target); break;
  case TaskKind::Add: ex.input = render_add(instance, format, rng, ex.target); break;
  }
  return ex;
}

namespace {

bool single_line(FormatFamily family) {
  return family == FormatFamily::Baseline || family == FormatFamily::Tutor;
}

} // namespace

std::string exemplar_block(const RenderedExample& example) {
  switch (example.format.family) {
  case FormatFamily::Baseline:
  case FormatFamily::Tutor:
    return example.input + " result: " + example.target;
  case FormatFamily::Callable: {
    static const CallableRegistry registry;
    return example.input + "\n" + resolve_call_sites(example.target, registry);
  }
  default:
    return example.input + "\n" + example.target;
  }
}

std::string query_block(const RenderedExample& example) {
  return single_line(example.format.family) ? example.input + " result:" : example.input + "\n";
}

std::string build_prompt(std::span<const RenderedExample> exemplars, const RenderedExample& query) {
  if (exemplars.empty()) throw Error(ErrorCode::EmptyExemplars, "a prompt needs at least one exemplar");
  std::string prompt;
  for (const auto& ex : exemplars) {
    if (!(ex.format == query.format) || ex.instance.kind != query.instance.kind)
      throw Error(ErrorCode::MixedFormats, "exemplar " + ex.id + " is " + ex.format.label() + "/" +
                                               std::string(to_string(ex.instance.kind)) +
                                               ", query is " + query.format.label() + "/" +
                                               std::string(to_string(query.instance.kind)));
    prompt += exemplar_block(ex);
    prompt += "\n\n";
  }
  prompt += query_block(query);
  return prompt;
}

std::vector<std::string> stop_sequences(const FormatSpec& format) {
  if (single_line(format.family)) return {"\n"};
  return {"\n\n"};
}

namespace {

std::string_view trim_view(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Digits of one rendered addend: drops letter markers and P{k}: prefixes.
std::string addend_digits(std::string_view text) {
  std::string digits;
  for (auto& tok : split_tokens(text)) {
    if (is_marker_token(tok)) continue;
    auto colon = tok.find(':');
    std::string_view value = colon == std::string::npos ? std::string_view(tok)
                                                        : std::string_view(tok).substr(colon + 1);
    if (!is_digit_token(value))
      throw Error(ErrorCode::UnparseableQuery, "bad addend token '" + tok + "'");
    digits += value;
  }
  return digits;
}

} // namespace

TaskInstance parse_input(std::string_view input) {
  input = trim_view(input);
  try {
    if (input.starts_with("copy:")) {
      std::vector<std::string> cells;
      for (auto& tok : split_tokens(input.substr(5)))
        if (!is_marker_token(tok)) cells.push_back(tok);
      return TaskInstance::copy(std::move(cells));
    }
    constexpr std::string_view kReverse = "reverse the list:";
    if (input.starts_with(kReverse)) {
      std::vector<std::string> items;
      auto rest = input.substr(kReverse.size());
      std::size_t start = 0;
      while (start <= rest.size()) {
        auto comma = rest.find(',', start);
        auto piece = split_tokens(rest.substr(start, comma - start));
        if (!piece.empty()) items.push_back(piece.back());
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      return TaskInstance::reverse(std::move(items));
    }
    if (input.starts_with("question:")) {
      auto rest = input.substr(9);
      auto plus = rest.find(" + ");
      if (plus == std::string_view::npos)
        throw Error(ErrorCode::UnparseableQuery, "no ' + ' in addition query");
      return TaskInstance::add(addend_digits(rest.substr(0, plus)),
                               addend_digits(rest.substr(plus + 3)));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UnparseableQuery) throw;
    throw Error(ErrorCode::UnparseableQuery, e.what());
  }
  throw Error(ErrorCode::UnparseableQuery, "unrecognised input '" + std::string(input) + "'");
}

// --------------------------------------------------------------- datasets

RenderedExample make_example(const DatasetConfig& config, std::size_t index) {
  const auto span = static_cast<std::size_t>(config.max_n - config.min_n + 1);
  const int n = config.min_n + static_cast<int>(index % span);
  const double alpha = config.alphas.empty() ? 0.0 : config.alphas[(index / span) % config.alphas.size()];
  const auto seed = derive_seed(config.seed, index);
  Rng rng(seed);
  auto instance = sample_instance(config.task, n, alpha, rng);
  auto ex = render_example(instance, config.format, seed);
  auto prefix = config.id_prefix.empty() ? std::string(to_string(config.task)) : config.id_prefix;
  auto num = std::to_string(index);
  if (num.size() < 6) num.insert(0, 6 - num.size(), '0');
  ex.id = prefix + "-" + num;
  if (config.task != TaskKind::Reverse) ex.alpha = alpha;
  ex.split = n <= config.train_max_n ? "in" : "ood";
  return ex;
}

nlohmann::json to_json(const RenderedExample& ex) {
  nlohmann::json j;
  j["id"] = ex.id;
  j["task"] = std::string(to_string(ex.instance.kind));
  j["format"] = std::string(to_string(ex.format.family));
  j["marker_mode"] = std::string(to_string(ex.format.markers.mode));
  j["alpha"] = ex.alpha ? nlohmann::json(*ex.alpha) : nlohmann::json(nullptr);
  j["n"] = ex.n();
  j["input"] = ex.input;
  j["target"] = ex.target;
  j["seed"] = ex.seed;
  j["operands"] = ex.instance.operands();
  j["answer"] = ex.instance.target;
  j["split"] = ex.split;
  return j;
}

RenderedExample example_from_json(const nlohmann::json& j) {
  try {
    RenderedExample ex;
    ex.id = j.at("id").get<std::string>();
    const auto task = parse_task_kind(j.at("task").get<std::string>());
    const auto ops = j.at("operands").get<std::vector<std::string>>();
    ex.instance = TaskInstance::from_operands(task, ops);
    ex.format.family = parse_format_family(j.at("format").get<std::string>());
    ex.format.markers.mode = parse_marker_mode(j.at("marker_mode").get<std::string>());
    if (j.contains("alpha") && !j["alpha"].is_null()) ex.alpha = j["alpha"].get<double>();
    ex.input = j.at("input").get<std::string>();
    ex.target = j.at("target").get<std::string>();
    ex.seed = j.at("seed").get<std::uint64_t>();
    ex.split = j.value("split", std::string("in"));
    return ex;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("dataset record: ") + e.what());
  }
}

std::size_t write_jsonl(const std::filesystem::path& path, std::span<const RenderedExample> examples) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  for (const auto& ex : examples) out << to_json(ex).dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "write failed on " + path.string());
  return examples.size();
}

std::vector<RenderedExample> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open dataset " + path.string());
  std::vector<RenderedExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim_view(line).empty()) continue;
    try {
      out.push_back(example_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Parse, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::Parse, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::size_t gen_dataset(const DatasetConfig& config, const std::filesystem::path& path, int workers) {
  if (config.min_n < 1 || config.max_n < config.min_n)
    throw Error(ErrorCode::Config, "digit range must satisfy 1 <= min <= max");
  for (double a : config.alphas)
    if (a < 0.0 || a > 1.0) throw Error(ErrorCode::Config, "alpha outside [0, 1]");
  config.format.check(config.task);
  auto examples = kernels::render_dataset_omp(config, workers);
  if (examples.empty()) std::cerr << "warning: count is 0, writing empty dataset " << path << "\n";
  return write_jsonl(path, examples);
}

} // namespace symtutor
