#include "symtutor/kernels.hpp"

#include <exception>
#include <functional>

#include <omp.h>

#include "symtutor/error.hpp"
#include "symtutor/machine.hpp"
#include "symtutor/oracles.hpp"

namespace symtutor::kernels {

int resolve_workers(int workers) { return workers > 0 ? workers : omp_get_max_threads(); }

namespace {

struct One {
  bool exact = false;
  bool faulted = false;
  bool bad_length = false;
  std::uint64_t hash = 0;
};

One check_one(const TaskInstance& inst, bool via_text) {
  One r;
  auto trace = oracle_trace(inst);
  r.bad_length = trace.size() != 3 * inst.size() + 2;
  if (via_text) trace = parse_trace(format_trace(trace));
  auto run = run_trace(new_machine(inst), trace);
  r.faulted = run.state.status() == RunStatus::Faulted;
  if (run.output) {
    r.exact = *run.output == target_of(inst);
    r.hash = std::hash<std::string>{}(*run.output);
  }
  return r;
}

void accumulate(TutorCheck& acc, const One& one) {
  ++acc.total;
  acc.exact += one.exact ? 1 : 0;
  acc.faulted += one.faulted ? 1 : 0;
  acc.bad_length += one.bad_length ? 1 : 0;
  acc.digest += one.hash;
}

TaskInstance sampled(TaskKind task, int n, double alpha, std::uint64_t seed, std::size_t i) {
  Rng rng(derive_seed(seed, i));
  return sample_instance(task, n, alpha, rng);
}

} // namespace

TutorCheck verify_tutor_serial(std::span<const TaskInstance> instances, bool via_text) {
  TutorCheck acc;
  for (const auto& inst : instances) accumulate(acc, check_one(inst, via_text));
  return acc;
}

TutorCheck verify_tutor_omp(std::span<const TaskInstance> instances, bool via_text, int workers) {
  std::size_t exact = 0, faulted = 0, bad = 0;
  std::uint64_t digest = 0;
  const auto count = static_cast<std::ptrdiff_t>(instances.size());
#pragma omp parallel for schedule(dynamic, 64) num_threads(resolve_workers(workers)) \
    reduction(+ : exact, faulted, bad, digest)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    auto one = check_one(instances[static_cast<std::size_t>(i)], via_text);
    exact += one.exact ? 1 : 0;
    faulted += one.faulted ? 1 : 0;
    bad += one.bad_length ? 1 : 0;
    digest += one.hash;
  }
  return {instances.size(), exact, faulted, bad, digest};
}

TutorCheck verify_sampled_serial(TaskKind task, int n, double alpha, std::size_t count,
                                 std::uint64_t seed, bool via_text) {
  TutorCheck acc;
  for (std::size_t i = 0; i < count; ++i) accumulate(acc, check_one(sampled(task, n, alpha, seed, i), via_text));
  return acc;
}

TutorCheck verify_sampled_omp(TaskKind task, int n, double alpha, std::size_t count,
                              std::uint64_t seed, bool via_text, int workers) {
  std::size_t exact = 0, faulted = 0, bad = 0;
  std::uint64_t digest = 0;
  const auto total = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 64) num_threads(resolve_workers(workers)) \
    reduction(+ : exact, faulted, bad, digest)
  for (std::ptrdiff_t i = 0; i < total; ++i) {
    auto one = check_one(sampled(task, n, alpha, seed, static_cast<std::size_t>(i)), via_text);
    exact += one.exact ? 1 : 0;
    faulted += one.faulted ? 1 : 0;
    bad += one.bad_length ? 1 : 0;
    digest += one.hash;
  }
  return {count, exact, faulted, bad, digest};
}

std::vector<RenderedExample> render_dataset_serial(const DatasetConfig& config) {
  std::vector<RenderedExample> out;
  out.reserve(config.count);
  for (std::size_t i = 0; i < config.count; ++i) out.push_back(make_example(config, i));
  return out;
}

std::vector<RenderedExample> render_dataset_omp(const DatasetConfig& config, int workers) {
  std::vector<RenderedExample> out(config.count);
  ExceptionGuard guard;
  const auto count = static_cast<std::ptrdiff_t>(config.count);
#pragma omp parallel for schedule(dynamic, 32) num_threads(resolve_workers(workers))
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    guard.run([&] { out[static_cast<std::size_t>(i)] = make_example(config, static_cast<std::size_t>(i)); });
  }
  guard.rethrow();
  return out;
}

namespace {

void check_sizes(std::size_t examples, std::size_t completions) {
  if (examples != completions)
    throw Error(ErrorCode::InvalidOperand, "score: " + std::to_string(examples) + " examples but " +
                                               std::to_string(completions) + " completions");
}

} // namespace

std::vector<EvalRecord> score_serial(std::span<const RenderedExample> examples,
                                     std::span<const std::string> completions, const std::string& agent) {
  check_sizes(examples.size(), completions.size());
  std::vector<EvalRecord> out;
  out.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i)
    out.push_back(score_completion(examples[i], agent, completions[i]));
  return out;
}

std::vector<EvalRecord> score_omp(std::span<const RenderedExample> examples,
                                  std::span<const std::string> completions, const std::string& agent,
                                  int workers) {
  check_sizes(examples.size(), completions.size());
  std::vector<EvalRecord> out(examples.size());
  ExceptionGuard guard;
  const auto count = static_cast<std::ptrdiff_t>(examples.size());
#pragma omp parallel for schedule(dynamic, 64) num_threads(resolve_workers(workers))
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    guard.run([&] { out[k] = score_completion(examples[k], agent, completions[k]); });
  }
  guard.rethrow();
  return out;
}

} // namespace symtutor::kernels
