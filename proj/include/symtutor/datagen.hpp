#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "symtutor/instance.hpp"

namespace symtutor {

using Rng = std::mt19937_64;

/// Mixes a base seed with a stream index into an independent 64-bit seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

struct RepetitionSpec {
  double alpha = 0.1;
  int n_digits = 1;
};

/// Draws n digits where each digit repeats its predecessor with probability
/// alpha and otherwise is uniform over the nine other digits. The first
/// digit is uniform over 0-9, or 1-9 when `no_leading_zero` and n > 1.
std::string sample_number(const RepetitionSpec& spec, Rng& rng, bool no_leading_zero = false);
std::string sample_number(const RepetitionSpec& spec, std::uint64_t seed,
                          bool no_leading_zero = false);

/// Built-in list of single-token nouns used by the reverse task.
std::span<const std::string_view> noun_vocabulary();

/// Draws a task instance of size n (digits, or list items for reverse).
TaskInstance sample_instance(TaskKind kind, int n, double alpha, Rng& rng);

// ---------------------------------------------------------------- markers

enum class MarkerMode { None, Ordered, Random, Reference };

std::string_view to_string(MarkerMode mode);
MarkerMode parse_marker_mode(std::string_view name);

struct MarkerScheme {
  MarkerMode mode = MarkerMode::None;
};

/// Bijective base-26 names: 0 -> A, 25 -> Z, 26 -> AA, 27 -> AB, ...
std::string marker_name(std::size_t index);
std::optional<std::size_t> parse_marker(std::string_view name);
bool is_marker_token(std::string_view token);

/// Ordered: the first n names. Random: n distinct names drawn without
/// replacement from the first max(26, n) names, in random order. Other modes
/// yield an empty list.
std::vector<std::string> assign_markers(std::size_t n, const MarkerScheme& scheme, Rng& rng);
std::vector<std::string> assign_markers(std::size_t n, const MarkerScheme& scheme,
                                        std::uint64_t seed);

// ---------------------------------------------------------------- formats

enum class FormatFamily { Baseline, ScratchpadCoarse, ScratchpadFine, Tutor, Callable };

std::string_view to_string(FormatFamily family);
FormatFamily parse_format_family(std::string_view name);

struct FormatSpec {
  FormatFamily family = FormatFamily::Baseline;
  MarkerScheme markers;

  /// "baseline", "scratchpad-fine+ordered", ...
  std::string label() const;

  /// Whether answers in this format keep their markers when scored.
  bool targets_carry_markers(TaskKind task) const;

  /// Throws FormatTaskMismatch for unsupported combinations.
  void check(TaskKind task) const;

  friend bool operator==(const FormatSpec& a, const FormatSpec& b) {
    return a.family == b.family && a.markers.mode == b.markers.mode;
  }
};

struct RenderedExample {
  std::string id;
  TaskInstance instance;
  FormatSpec format;
  std::optional<double> alpha;
  std::uint64_t seed = 0;
  std::string input;
  std::string target;
  std::string split = "in";

  std::size_t n() const { return instance.size(); }
};

/// Renders an instance in the given format. Random markers are drawn from
/// `seed`, so the result is a pure function of its arguments.
RenderedExample render_example(const TaskInstance& instance, const FormatSpec& format,
                               std::uint64_t seed);

/// One k-shot prompt: each exemplar with its target, then the query with its
/// target elided, separated by blank lines.
std::string build_prompt(std::span<const RenderedExample> exemplars, const RenderedExample& query);

std::string exemplar_block(const RenderedExample& example);
std::string query_block(const RenderedExample& example);

/// Stop sequence a completion agent should honour for the format.
std::vector<std::string> stop_sequences(const FormatSpec& format);

/// Rebuilds the task instance from a rendered input line such as
/// "copy: A 1 B 2", "reverse the list: bike, cat" or "question: 1 1 + 2 5".
TaskInstance parse_input(std::string_view input);

// --------------------------------------------------------------- datasets

struct DatasetConfig {
  TaskKind task = TaskKind::Copy;
  FormatSpec format;
  std::size_t count = 0;
  int min_n = 1;
  int max_n = 5;
  std::vector<double> alphas{0.1};
  std::uint64_t seed = 42;
  int train_max_n = 5; // examples with n above this are tagged "ood"
  std::string id_prefix;
};

/// Example i of the dataset: n = min_n + i mod span, alpha cycles over
/// `alphas` every span examples, RNG stream derived from (seed, i).
RenderedExample make_example(const DatasetConfig& config, std::size_t index);

nlohmann::json to_json(const RenderedExample& example);
RenderedExample example_from_json(const nlohmann::json& j);

/// Writes one JSON object per line. Returns the number of lines written.
std::size_t write_jsonl(const std::filesystem::path& path, std::span<const RenderedExample> examples);
std::vector<RenderedExample> read_dataset(const std::filesystem::path& path);

/// Generates and writes the dataset with `workers` OpenMP threads.
std::size_t gen_dataset(const DatasetConfig& config, const std::filesystem::path& path,
                        int workers = 1);

} // namespace symtutor
