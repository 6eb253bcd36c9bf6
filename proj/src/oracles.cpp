#include "symtutor/oracles.hpp"

#include <algorithm>

#include "symtutor/error.hpp"

namespace symtutor {

Trace oracle_trace(const TaskInstance& instance) {
  const auto n = instance.size();
  const Action move = instance.kind == TaskKind::Copy ? Action::rmov() : Action::lmov();
  const Action work = instance.kind == TaskKind::Add ? Action::add() : Action::cpy();
  Trace trace;
  trace.reserve(3 * n + 2);
  for (std::size_t i = 0; i < n; ++i) {
    trace.push_back(move);
    trace.push_back(Action::end(false));
    trace.push_back(work);
  }
  trace.push_back(move);
  trace.push_back(Action::end(true));
  return trace;
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

int single_digit(std::string_view name, const std::string& raw) {
  auto arg = trim(raw);
  if (!is_digit_token(arg))
    throw Error(ErrorCode::NonDigitArgument,
                std::string(name) + ": '" + raw + "' is not a single digit");
  return arg[0] - '0';
}

// Accepts "305", "3 0 5" and "3, 0, 5"-style digit lists.
std::string digit_list(std::string_view name, const std::string& raw) {
  std::string digits;
  for (char c : raw) {
    if (c == ' ' || c == '\t') continue;
    if (c < '0' || c > '9')
      throw Error(ErrorCode::NonDigitArgument,
                  std::string(name) + ": '" + raw + "' is not a digit list");
    digits.push_back(c);
  }
  if (digits.empty())
    throw Error(ErrorCode::NonDigitArgument, std::string(name) + ": empty argument");
  return digits;
}

void check_arity(std::string_view name, std::size_t got, std::size_t lo, std::size_t hi) {
  if (got < lo || got > hi)
    throw Error(ErrorCode::ArityError, std::string(name) + " got " + std::to_string(got) +
                                           " argument(s)");
}

std::string convert(std::span<const std::string> args, int) {
  check_arity("convert", args.size(), 1, 1);
  return spaced_digits(digit_list("convert", args[0]));
}

std::string add_digits(std::span<const std::string> args, int carry_in) {
  check_arity("add", args.size(), 2, 3);
  const int a = single_digit("add", args[0]);
  const int b = single_digit("add", args[1]);
  int c = carry_in;
  if (args.size() == 3) {
    c = single_digit("add", args[2]);
  }
  if (c > 1) throw Error(ErrorCode::NonDigitArgument, "add: carry must be 0 or 1");
  const int s = a + b + c;
  return "carry C: " + std::to_string(s / 10) + ", result " + std::to_string(s % 10);
}

std::string combine(std::span<const std::string> args, int) {
  check_arity("combine", args.size(), 1, static_cast<std::size_t>(-1));
  std::string digits;
  int carry = 0;
  const auto ndigits = args.size() == 1 ? 1 : args.size() - 1;
  for (std::size_t i = 0; i < ndigits; ++i) digits += digit_list("combine", args[i]);
  if (args.size() > 1) carry = single_digit("combine", args.back());
  if (carry != 0) digits.insert(digits.begin(), static_cast<char>('0' + carry));
  return spaced_digits(digits);
}

} // namespace

CallableRegistry::CallableRegistry() {
  table_.emplace("convert", convert);
  table_.emplace("add", add_digits);
  table_.emplace("combine", combine);
}

bool CallableRegistry::contains(std::string_view name) const {
  return table_.find(name) != table_.end();
}

std::vector<std::string> CallableRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, fn] : table_) out.push_back(name);
  return out;
}

CallableResult CallableRegistry::call(std::string_view name, std::span<const std::string> args,
                                      int carry_in) const {
  auto it = table_.find(name);
  if (it == table_.end())
    throw Error(ErrorCode::UnknownCallable, "'" + std::string(name) + "'");
  return {std::string(name), it->second(args, carry_in)};
}

CallableResult callable_call(std::string_view name, std::span<const std::string> args,
                             int carry_in) {
  static const CallableRegistry registry;
  return registry.call(name, args, carry_in);
}

std::string call_site(std::string_view name, std::span<const std::string> args) {
  return std::string(name) + "(" + join(args, ",") + ")";
}

namespace {

bool is_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

} // namespace

std::optional<CallSite> find_call_site(std::string_view text, const CallableRegistry& registry,
                                       std::size_t from) {
  std::optional<CallSite> best;
  for (const auto& name : registry.names()) {
    auto pos = text.find(name, from);
    while (pos != std::string_view::npos) {
      const auto open = pos + name.size();
      const bool word_start = pos == 0 || !is_name_char(text[pos - 1]);
      if (word_start && open < text.size() && text[open] == '(') {
        const auto close = text.find_first_of("()", open + 1);
        if (close != std::string_view::npos && text[close] == ')') {
          const auto end = close + 1;
          if (!best || end < best->end) {
            CallSite site{pos, end, name, {}};
            auto inner = text.substr(open + 1, close - open - 1);
            std::size_t start = 0;
            while (true) {
              auto comma = inner.find(',', start);
              site.args.emplace_back(trim(inner.substr(start, comma - start)));
              if (comma == std::string_view::npos) break;
              start = comma + 1;
            }
            best = std::move(site);
          }
          break; // later occurrences of this name close later
        }
      }
      pos = text.find(name, pos + 1);
    }
  }
  return best;
}

std::string resolve_call_sites(std::string_view text, const CallableRegistry& registry) {
  std::string out;
  std::size_t from = 0;
  while (auto site = find_call_site(text, registry, from)) {
    out.append(text.substr(from, site->end - from));
    out += " -> " + registry.call(site->name, site->args).rendered;
    from = site->end;
  }
  out.append(text.substr(from));
  return out;
}

} // namespace symtutor
