#include <gtest/gtest.h>

#include "support.hpp"
#include "symtutor/error.hpp"
#include "symtutor/kernels.hpp"

using namespace symtutor;
using namespace symtutor::kernels;

TEST(Kernels, VerifyTutorSerialMatchesOmp) {
  Rng rng(81);
  std::vector<TaskInstance> insts;
  for (int i = 0; i < 600; ++i)
    insts.push_back(sample_instance(static_cast<TaskKind>(i % 3), 1 + i % 50, 0.5, rng));
  for (bool via_text : {false, true}) {
    auto s = verify_tutor_serial(insts, via_text);
    EXPECT_EQ(s.total, insts.size());
    EXPECT_EQ(s.exact, insts.size());
    EXPECT_EQ(s.faulted, 0u);
    EXPECT_EQ(s.bad_length, 0u);
    for (int workers : {1, 2, 4}) EXPECT_EQ(verify_tutor_omp(insts, via_text, workers), s);
  }
}

TEST(Kernels, VerifySampledSerialMatchesOmp) {
  for (auto task : {TaskKind::Copy, TaskKind::Reverse, TaskKind::Add}) {
    auto s = verify_sampled_serial(task, 17, 0.9, 500, 5);
    EXPECT_EQ(s.exact, 500u);
    EXPECT_EQ(verify_sampled_omp(task, 17, 0.9, 500, 5, true, 3), s);
    EXPECT_NE(verify_sampled_serial(task, 17, 0.9, 500, 6).digest, s.digest);
  }
}

TEST(Kernels, RenderDatasetSerialMatchesOmp) {
  DatasetConfig cfg;
  cfg.task = TaskKind::Add;
  cfg.format = {FormatFamily::ScratchpadFine, {MarkerMode::Random}};
  cfg.count = 700;
  cfg.min_n = 1;
  cfg.max_n = 30;
  cfg.alphas = {0.1, 0.5, 0.9};
  auto s = render_dataset_serial(cfg);
  for (int workers : {1, 3}) {
    auto o = render_dataset_omp(cfg, workers);
    ASSERT_EQ(o.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i) ASSERT_EQ(to_json(o[i]).dump(), to_json(s[i]).dump());
  }
}

TEST(Kernels, ScoreSerialMatchesOmp) {
  DatasetConfig cfg;
  cfg.count = 400;
  cfg.max_n = 12;
  auto examples = render_dataset_serial(cfg);
  std::vector<std::string> completions;
  Rng rng(82);
  for (const auto& ex : examples) {
    auto t = ex.target;
    if (rng() % 2 && t.size() > 2) t = t.substr(2);
    completions.push_back(t);
  }
  auto s = score_serial(examples, completions, "x");
  EXPECT_EQ(score_omp(examples, completions, "x", 4), s);
  std::vector<std::string> short_list(completions.begin(), completions.begin() + 3);
  EXPECT_THROW(score_omp(examples, short_list, "x"), Error);
}

TEST(Kernels, ExceptionsLeaveParallelRegions) {
  DatasetConfig cfg;
  cfg.task = TaskKind::Copy;
  cfg.format = {FormatFamily::Callable, {}}; // unsupported, make_example throws
  cfg.count = 50;
  EXPECT_THROW(render_dataset_omp(cfg, 4), Error);
}

TEST(Kernels, ResolveWorkers) {
  EXPECT_EQ(resolve_workers(3), 3);
  EXPECT_GE(resolve_workers(0), 1);
}
