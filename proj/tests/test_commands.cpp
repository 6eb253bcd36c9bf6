#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sys/wait.h>
#include <sstream>

#include "support.hpp"
#include "symtutor/commands.hpp"

using namespace symtutor;

namespace {

struct Shell {
  int status = -1;
  std::string out;
};

// Runs the CLI binary; stderr is folded into the captured output.
Shell cli(const std::string& args, const std::string& prefix = "") {
  Shell r;
  std::string cmd = prefix + " " + std::string(SYMTUTOR_CLI) + " " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (auto got = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, got);
  int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

GenConfig gen(TaskKind task, FormatSpec format, std::size_t count, const std::filesystem::path& out) {
  GenConfig g;
  g.dataset.task = task;
  g.dataset.format = format;
  g.dataset.count = count;
  g.dataset.min_n = 1;
  g.dataset.max_n = 8;
  g.dataset.alphas = {0.1, 1.0};
  g.output = out;
  return g;
}

} // namespace

TEST(KeyValues, ParsesAndRejects) {
  auto kv = parse_key_values("# comment\ntask = add\n\n  format=scratchpad-fine  \nalpha = 0.1, 0.5\n");
  EXPECT_EQ(kv.at("task"), "add");
  EXPECT_EQ(kv.at("format"), "scratchpad-fine");
  auto g = gen_config_from(kv);
  EXPECT_EQ(g.dataset.task, TaskKind::Add);
  EXPECT_EQ(g.dataset.alphas, (std::vector<double>{0.1, 0.5}));

  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Parse;
  };
  EXPECT_EQ(code([] { parse_key_values("tsak = add"); }), ErrorCode::Config);
  EXPECT_EQ(code([] { parse_key_values("just words"); }), ErrorCode::Config);
  EXPECT_EQ(code([] { gen_config_from({{"count", "ten"}}); }), ErrorCode::Config);
  EXPECT_EQ(code([] { gen_config_from({{"digits", "5-1"}}); }), ErrorCode::Config);
  EXPECT_EQ(code([] { gen_config_from({{"alpha", "2"}}); }), ErrorCode::Config);
  EXPECT_EQ(code([] { gen_config_from({{"task", "copy"}, {"format", "callable"}}); }),
            ErrorCode::FormatTaskMismatch);
  EXPECT_EQ(code([] { run_config_from({}); }), ErrorCode::Config);
  EXPECT_EQ(code([] { run_config_from({{"dataset", "d"}, {"shots", "0"}}); }), ErrorCode::Config);
  EXPECT_EQ(code([] { load_key_values("/nonexistent/cfg.txt"); }), ErrorCode::Config);
}

TEST(KeyValues, RunDefaults) {
  auto r = run_config_from({{"dataset", "d.jsonl"}});
  EXPECT_EQ(r.max_tokens, 512);
  EXPECT_EQ(r.shot_count(FormatFamily::Baseline), 4u);
  EXPECT_EQ(r.shot_count(FormatFamily::Tutor), 15u);
  EXPECT_EQ(r.shot_min_n, 1);
  EXPECT_EQ(r.shot_max_n, 5);
  EXPECT_EQ(r.remote.decode.temperature, 0.0);
  EXPECT_EQ(r.remote.decode.top_p, 1.0);
  EXPECT_EQ(r.call_budget, 256u);
}

TEST(Commands, GenLineCounts) {
  check::TempDir dir;
  std::ostringstream log;
  auto copy = gen(TaskKind::Copy, {}, 2000, dir / "copy.jsonl");
  copy.dataset.max_n = 5;
  EXPECT_EQ(cmd_gen(copy, log), 2000u);
  auto add = gen(TaskKind::Add, {}, 1000, dir / "add.jsonl");
  add.dataset.max_n = 5;
  EXPECT_EQ(cmd_gen(add, log), 1000u);
  EXPECT_EQ(check::split_lines(check::read_file(dir / "add.jsonl")).size(), 1000u);
}

TEST(Commands, OracleTutorRunIsAllExact) {
  check::TempDir dir;
  std::ostringstream log;
  auto g = gen(TaskKind::Copy, {FormatFamily::Tutor, {}}, 160, dir / "d.jsonl");
  g.dataset.min_n = 1;
  g.dataset.max_n = 80;
  g.dataset.alphas = {1.0};
  cmd_gen(g, log);
  RunConfig r;
  r.dataset = dir / "d.jsonl";
  r.records = dir / "r.jsonl";
  for (auto mode : {SessionMode::Batch, SessionMode::Incremental}) {
    r.tutor_mode = mode;
    std::filesystem::remove(r.records);
    auto s = cmd_run(r, log);
    EXPECT_EQ(s.written, 160u);
    EXPECT_EQ(s.exact, 160u);
    for (const auto& rec : read_records(r.records)) ASSERT_TRUE(rec.exact_match) << rec.id;
  }
}

TEST(Commands, PatternAgentSkipsOnRepeats) {
  check::TempDir dir;
  std::ostringstream log;
  auto g = gen(TaskKind::Copy, {}, 80, dir / "d.jsonl");
  g.dataset.alphas = {1.0};
  g.dataset.max_n = 20;
  cmd_gen(g, log);
  RunConfig r;
  r.dataset = dir / "d.jsonl";
  r.records = dir / "r.jsonl";
  r.agent = "pattern";
  cmd_run(r, log);
  std::size_t skips = 0;
  for (const auto& rec : read_records(r.records)) skips += rec.error_class == ErrorClass::Skip;
  EXPECT_GT(skips, 0u);
}

TEST(Commands, ResumeGivesTheSameRecords) {
  check::TempDir dir;
  std::ostringstream log;
  cmd_gen(gen(TaskKind::Add, {FormatFamily::Tutor, {}}, 90, dir / "d.jsonl"), log);
  RunConfig r;
  r.dataset = dir / "d.jsonl";
  r.flush_every = 7;
  r.workers = 3;

  r.records = dir / "full.jsonl";
  cmd_run(r, log);

  r.records = dir / "part.jsonl";
  auto first = cmd_run(r, log, nullptr, 25);
  EXPECT_EQ(first.written, 25u);
  // simulate a crash in the middle of a write
  {
    std::ofstream torn(r.records, std::ios::app | std::ios::binary);
    torn << R"({"id":"add-0000)";
  }
  auto second = cmd_run(r, log);
  EXPECT_EQ(second.resumed, 25u);
  EXPECT_EQ(second.written, 65u);
  EXPECT_EQ(check::read_file(dir / "part.jsonl"), check::read_file(dir / "full.jsonl"));

  auto third = cmd_run(r, log);
  EXPECT_EQ(third.written, 0u);
  EXPECT_EQ(check::read_file(dir / "part.jsonl"), check::read_file(dir / "full.jsonl"));
}

TEST(Commands, AgentErrorsBecomeFaultRecords) {
  check::TempDir dir;
  std::ostringstream log;
  cmd_gen(gen(TaskKind::Add, {FormatFamily::Callable, {}}, 4, dir / "d.jsonl"), log);
  RunConfig r;
  r.dataset = dir / "d.jsonl";
  r.records = dir / "r.jsonl";
  ScriptedAgent agent({"add(1,x)", "convert(1)\n", "", ""});
  cmd_run(r, log, &agent);
  auto recs = read_records(r.records);
  ASSERT_EQ(recs.size(), 4u);
  EXPECT_EQ(recs[0].error_class, ErrorClass::Fault);
  EXPECT_NE(recs[0].detail.find("NonDigitArgument"), std::string::npos);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_EQ(recs[i].error_class, ErrorClass::Malformed);
}

TEST(Commands, AgentFormatGuards) {
  check::TempDir dir;
  std::ostringstream log;
  cmd_gen(gen(TaskKind::Add, {}, 3, dir / "d.jsonl"), log);
  RunConfig r;
  r.dataset = dir / "d.jsonl";
  r.records = dir / "r.jsonl";
  for (auto agent : {"oracle", "pattern", "nobody"}) {
    r.agent = agent;
    try {
      cmd_run(r, log);
      FAIL() << agent;
    } catch (const Error& e) {
      EXPECT_EQ(exit_code_for(e), 2) << agent;
    }
  }
}

TEST(Commands, TraceChecks) {
  std::ostringstream out;
  EXPECT_TRUE(cmd_trace(TaskKind::Add, {"11", "25"}, out));
  EXPECT_NE(out.str().find("output: 3 6"), std::string::npos);
  EXPECT_NE(out.str().find("PASS"), std::string::npos);

  std::ostringstream copy;
  EXPECT_TRUE(cmd_trace(TaskKind::Copy, {"7"}, copy));
  EXPECT_NE(copy.str().find("trace (5 actions)"), std::string::npos);

  std::ostringstream rev;
  EXPECT_TRUE(cmd_trace(TaskKind::Reverse, {"bike", "cat", "pen"}, rev));
  EXPECT_NE(rev.str().find("trace (11 actions)"), std::string::npos);
}

TEST(Commands, ExitCodeClasses) {
  EXPECT_EQ(exit_code_for(Error(ErrorCode::Config, "")), 2);
  EXPECT_EQ(exit_code_for(Error(ErrorCode::Io, "")), 3);
  EXPECT_EQ(exit_code_for(Error(ErrorCode::MissingCredential, "")), 4);
  EXPECT_EQ(exit_code_for(HttpStatusError(500, "")), 4);
  EXPECT_EQ(exit_code_for(Error(ErrorCode::EmptyRecords, "")), 1);
}

// ------------------------------------------------------------ CLI binary

TEST(Cli, PipelineIsByteIdentical) {
  check::TempDir dir;
  auto pipeline = [&](const std::string& tag) {
    auto d = (dir / (tag + ".jsonl")).string();
    auto r = (dir / (tag + "-records.jsonl")).string();
    auto rep = (dir / (tag + "-report")).string();
    EXPECT_EQ(cli("gen --task copy --digits 1-12 --alpha 0,0.5,1 --count 120 --seed 9 -o " + d).status, 0);
    EXPECT_EQ(cli("run --dataset " + d + " --agent pattern --records " + r + " --workers 2").status, 0);
    EXPECT_EQ(cli("eval --records " + r + " --report-dir " + rep).status, 0);
    return std::vector<std::string>{check::read_file(d), check::read_file(r),
                                    check::read_file(rep + "/curves.csv"),
                                    check::read_file(rep + "/records.jsonl"),
                                    check::read_file(rep + "/report.txt")};
  };
  auto a = pipeline("a"), b = pipeline("b");
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a[2].empty());
}

TEST(Cli, ConfigFileAndFlagOverride) {
  check::TempDir dir;
  check::write_file(dir / "gen.cfg", "task = add\nformat = scratchpad-fine\ncount = 7\nseed = 3\n");
  auto out = (dir / "x.jsonl").string();
  auto r = cli("gen --config " + (dir / "gen.cfg").string() + " --count 5 -o " + out);
  EXPECT_EQ(r.status, 0) << r.out;
  auto lines = check::split_lines(check::read_file(out));
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_NE(lines[0].find("\"task\":\"add\""), std::string::npos);
}

TEST(Cli, ExitCodes) {
  check::TempDir dir;
  EXPECT_EQ(cli("trace add 11 25").status, 0);
  EXPECT_NE(cli("gen --config /nonexistent/cfg").status, 0);
  check::write_file(dir / "bad.cfg", "colour = blue\n");
  EXPECT_EQ(cli("gen --config " + (dir / "bad.cfg").string()).status, 2);
  EXPECT_EQ(cli("gen --task copy --format callable -o " + (dir / "y.jsonl").string()).status, 2);
  EXPECT_EQ(cli("run --dataset " + (dir / "missing.jsonl").string()).status, 3);
  auto d = (dir / "d.jsonl").string();
  ASSERT_EQ(cli("gen --task copy --count 2 -o " + d).status, 0);
  auto remote = "run --dataset " + d + " --agent remote --endpoint http://127.0.0.1:9 --records " +
                (dir / "r.jsonl").string();
  EXPECT_EQ(cli(remote, "env -u SYMTUTOR_API_KEY").status, 4);
  EXPECT_EQ(cli("trace add").status, 2);
}
