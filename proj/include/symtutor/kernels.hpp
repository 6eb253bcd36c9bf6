#pragma once

#include <cstdint>
#include <exception>
#include <span>
#include <string>
#include <vector>

#include "symtutor/datagen.hpp"
#include "symtutor/eval.hpp"

// Batch kernels. Each *_omp kernel has a *_serial twin that computes the
// same result in index order; tests compare the two and the benchmark times
// them. Every item derives its own RNG stream from (seed, index), so the
// split across threads does not change the output.
namespace symtutor::kernels {

struct TutorCheck {
  std::size_t total = 0;
  std::size_t exact = 0;
  std::size_t faulted = 0;
  std::size_t bad_length = 0; // |trace| != 3n + 2
  std::uint64_t digest = 0;   // order-independent hash of the rendered outputs

  friend bool operator==(const TutorCheck&, const TutorCheck&) = default;
};

/// Runs oracle_trace(i) on new_machine(i) and compares the rendering with
/// target_of(i). With `via_text` the trace goes through format_trace and
/// parse_trace first, as an agent's output would.
TutorCheck verify_tutor_serial(std::span<const TaskInstance> instances, bool via_text = true);
TutorCheck verify_tutor_omp(std::span<const TaskInstance> instances, bool via_text = true,
                            int workers = 0);

/// Same check on `count` freshly sampled instances of size n, without
/// materialising them.
TutorCheck verify_sampled_serial(TaskKind task, int n, double alpha, std::size_t count,
                                 std::uint64_t seed, bool via_text = true);
TutorCheck verify_sampled_omp(TaskKind task, int n, double alpha, std::size_t count,
                              std::uint64_t seed, bool via_text = true, int workers = 0);

std::vector<RenderedExample> render_dataset_serial(const DatasetConfig& config);
std::vector<RenderedExample> render_dataset_omp(const DatasetConfig& config, int workers = 0);

/// Scores completions[i] against examples[i].
std::vector<EvalRecord> score_serial(std::span<const RenderedExample> examples,
                                     std::span<const std::string> completions, const std::string& agent);
std::vector<EvalRecord> score_omp(std::span<const RenderedExample> examples,
                                  std::span<const std::string> completions, const std::string& agent,
                                  int workers = 0);

// Exceptions must not escape an OpenMP region; keep the first, rethrow after.
class ExceptionGuard {
public:
  template <typename F>
  void run(F&& f) {
    try {
      f();
    } catch (...) {
#pragma omp critical(symtutor_exception_guard)
      if (!first_) first_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (first_) std::rethrow_exception(first_);
  }

private:
  std::exception_ptr first_;
};

/// workers <= 0 means the OpenMP default.
int resolve_workers(int workers);

} // namespace symtutor::kernels
