#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "symtutor/instance.hpp"
#include "symtutor/machine.hpp"

namespace symtutor {

/// Gold tutor trace: n x (move, end=F, cpy|add) followed by (move, end=T).
/// Copy moves right; reverse and addition move left. Length is 3n+2.
Trace oracle_trace(const TaskInstance& instance);

struct CallableResult {
  std::string name;
  std::string rendered;
};

/// Immutable table of the callable programs convert, add and combine.
///
///   convert(305)      -> "3 0 5"
///   add(1,5)          -> "carry C: 0, result 6"   (carry defaults to carry_in)
///   add(9,9,1)        -> "carry C: 1, result 9"
///   combine(3,6,0)    -> "3 6"   (last argument is the final carry)
///   combine(1 2)      -> "1 2"   (single argument: digit list, carry 0)
class CallableRegistry {
public:
  using Fn = std::function<std::string(std::span<const std::string>, int carry_in)>;

  CallableRegistry();

  bool contains(std::string_view name) const;
  std::vector<std::string> names() const;

  /// Throws Error with UnknownCallable, ArityError or NonDigitArgument.
  CallableResult call(std::string_view name, std::span<const std::string> args,
                      int carry_in = 0) const;

private:
  std::map<std::string, Fn, std::less<>> table_;
};

CallableResult callable_call(std::string_view name, std::span<const std::string> args,
                             int carry_in = 0);

/// Formats a call site exactly as the callable loop recognises it.
std::string call_site(std::string_view name, std::span<const std::string> args);

/// A `name(arg,...)` occurrence whose name is registered and whose argument
/// list contains no parentheses. [begin, end) covers the whole site.
struct CallSite {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string name;
  std::vector<std::string> args;
};

/// The complete call site that closes first in `text`, starting at `from`.
/// With nesting such as combine(convert(12)) this is the inner call.
std::optional<CallSite> find_call_site(std::string_view text, const CallableRegistry& registry,
                                       std::size_t from = 0);

/// Appends " -> {result}" after every call site, one per line, the way the
/// callable loop leaves the context once all sites are resolved.
std::string resolve_call_sites(std::string_view text, const CallableRegistry& registry);

} // namespace symtutor
