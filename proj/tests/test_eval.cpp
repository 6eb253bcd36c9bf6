#include <gtest/gtest.h>

#include "support.hpp"
#include "symtutor/error.hpp"
#include "symtutor/eval.hpp"
#include "symtutor/kernels.hpp"
#include "symtutor/oracles.hpp"

using namespace symtutor;

namespace {

using Tokens = std::vector<std::string>;

Tokens toks(std::string_view s) { return split_tokens(s); }

// Brute force: does deleting m whole periods of length p at position i
// turn `longer` into `shorter`, with a copy of the period still adjacent?
bool brute_force_deletion(const Tokens& longer, const Tokens& shorter) {
  const std::size_t L = longer.size();
  if (shorter.size() >= L) return false;
  const std::size_t gap = L - shorter.size();
  for (std::size_t p = 1; p <= gap; ++p) {
    if (gap % p) continue;
    for (std::size_t i = 0; i + gap <= L; ++i) {
      Tokens cut(longer.begin(), longer.begin() + static_cast<std::ptrdiff_t>(i));
      cut.insert(cut.end(), longer.begin() + static_cast<std::ptrdiff_t>(i + gap), longer.end());
      if (cut != shorter) continue;
      bool periodic = true;
      for (std::size_t k = i + p; k < i + gap && periodic; ++k) periodic = longer[k] == longer[k - p];
      if (!periodic) continue;
      bool after = i + gap + p <= L;
      for (std::size_t k = 0; k < p && after; ++k) after = longer[i + gap + k] == longer[i + k];
      bool before = i >= p;
      for (std::size_t k = 0; k < p && before; ++k) before = longer[i - p + k] == longer[i + k];
      if (after || before) return true;
    }
  }
  return false;
}

EvalRecord record(std::string agent, TaskKind task, std::string format, std::optional<double> alpha,
                  std::size_t n, bool ok) {
  EvalRecord r;
  r.id = agent + "-" + std::to_string(n);
  r.agent = std::move(agent);
  r.task = task;
  r.format = std::move(format);
  r.alpha = alpha;
  r.n = n;
  r.exact_match = ok;
  r.error_class = ok ? ErrorClass::None : ErrorClass::Substitution;
  return r;
}

} // namespace

TEST(ExactMatch, Normalisation) {
  EXPECT_TRUE(exact_match("3 6", "3 6"));
  EXPECT_TRUE(exact_match(" 3  6 ", "3 6"));
  EXPECT_TRUE(exact_match("3\t6\n", "3 6"));
  EXPECT_FALSE(exact_match("3 6", "36"));
  EXPECT_FALSE(exact_match("G 3 C 6", "3 6"));
  EXPECT_TRUE(exact_match("G 3 C 6", "3 6", true));
  EXPECT_EQ(strip_markers("A 1 BC 2 P3:4"), "1 2 4");
}

TEST(ClassifyError, RepeatRunTranscripts) {
  auto skip1 = toks("9 8 9 8 9 4"), pred1 = toks("9 8 9 4");
  EXPECT_EQ(classify_error(skip1, pred1, skip1), ErrorClass::Skip);
  auto skip2 = toks("6 0 6 0 6 5"), pred2 = toks("6 0 6 5");
  EXPECT_EQ(classify_error(skip2, pred2, skip2), ErrorClass::Skip);
  // inside a longer number
  auto long_t = toks("1 2 9 8 9 8 9 4 7"), long_p = toks("1 2 9 8 9 4 7");
  EXPECT_EQ(classify_error(long_t, long_p, long_t), ErrorClass::Skip);
}

TEST(ClassifyError, OverReplicateAndSubstitution) {
  auto t = toks("6 0 6 0 6 5");
  EXPECT_EQ(classify_error(t, toks("6 0 6 0 6 0 6 5"), t), ErrorClass::OverReplicate);
  auto s = toks("3 6");
  EXPECT_EQ(classify_error(s, toks("3 7"), s), ErrorClass::Substitution);
  // a deletion that is not inside a repeat run
  auto u = toks("1 2 3 4");
  EXPECT_EQ(classify_error(u, toks("1 3 4"), u), ErrorClass::Substitution);
  // deleting every copy is not a skip
  auto v = toks("5 7 7 8");
  EXPECT_EQ(classify_error(v, toks("5 8"), v), ErrorClass::Substitution);
  EXPECT_EQ(classify_error(v, toks("5 7 8"), v), ErrorClass::Skip);
}

TEST(ClassifyErrorProperties, AgreesWithBruteForce) {
  Rng rng(71);
  std::size_t skips = 0, overs = 0;
  for (int trial = 0; trial < 20000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 9);
    Tokens target, pred;
    for (int i = 0; i < n; ++i) target.push_back(std::to_string(rng() % 3));
    pred = target;
    // random edit: delete or duplicate a small block, or substitute
    const auto op = rng() % 3;
    const auto at = rng() % pred.size();
    const auto len = 1 + rng() % 3;
    if (op == 0) {
      pred.erase(pred.begin() + static_cast<std::ptrdiff_t>(at),
                 pred.begin() + static_cast<std::ptrdiff_t>(std::min(pred.size(), at + len)));
    } else if (op == 1) {
      Tokens block(pred.begin() + static_cast<std::ptrdiff_t>(at),
                   pred.begin() + static_cast<std::ptrdiff_t>(std::min(pred.size(), at + len)));
      pred.insert(pred.begin() + static_cast<std::ptrdiff_t>(at), block.begin(), block.end());
    } else {
      pred[at] = std::to_string(rng() % 3);
    }
    auto c = classify_error(target, pred, target);
    if (pred == target) {
      ASSERT_EQ(c, ErrorClass::None);
      continue;
    }
    const bool skip = brute_force_deletion(target, pred);
    const bool over = brute_force_deletion(pred, target);
    ErrorClass want = skip ? ErrorClass::Skip : over ? ErrorClass::OverReplicate : ErrorClass::Substitution;
    ASSERT_EQ(c, want) << join(target, " ") << " -> " << join(pred, " ");
    skips += skip;
    overs += over;
  }
  EXPECT_GT(skips, 100u);
  EXPECT_GT(overs, 100u);
}

TEST(ExtractAnswer, PerFormat) {
  const std::string q = "question: 1 1 + 2 5";
  EXPECT_EQ(extract_answer({}, q, " 3 6\nquestion: junk"), "3 6");
  EXPECT_EQ(extract_answer({FormatFamily::ScratchpadFine, {}}, q,
                           "1 + 5 + 0 -> carry C: 0, result 6\nresult: 9\nresult: 3 6"),
            "3 6");
  EXPECT_FALSE(extract_answer({FormatFamily::ScratchpadCoarse, {}}, q, "1 + 5"));
  EXPECT_EQ(extract_answer({FormatFamily::Callable, {}}, q, "add(1,5) -> carry C: 0, result 6\ncombine(3,6,0) -> 3 6\n"),
            "3 6");
  EXPECT_FALSE(extract_answer({FormatFamily::Callable, {}}, q, "add(1,5) -> carry C: 0, result 6\n"));
  EXPECT_FALSE(extract_answer({FormatFamily::Tutor, {}}, q, "lmov"));
}

TEST(ExtractAnswer, ReferencesResolveAgainstTheInput) {
  auto ex = render_example(TaskInstance::add("11", "25"), {FormatFamily::ScratchpadFine, {MarkerMode::Reference}}, 0);
  EXPECT_EQ(extract_answer(ex.format, ex.input, ex.target), "3 6");
  EXPECT_EQ(resolve_references("@P1 @P2", "P1:4 P2:2"), "4 2");
  EXPECT_FALSE(resolve_references("@P9", "P1:4"));
}

TEST(Score, RecordFields) {
  auto ex = render_example(TaskInstance::add("11", "25"), {}, 0);
  ex.id = "add-1";
  ex.alpha = 0.5;
  auto ok = score_completion(ex, "a", " 3 6 ");
  EXPECT_TRUE(ok.exact_match);
  EXPECT_EQ(ok.error_class, ErrorClass::None);
  EXPECT_EQ(ok.n, 2u);
  EXPECT_EQ(ok.format, "baseline");

  auto bad = score_completion(ex, "a", "3 7");
  EXPECT_EQ(bad.error_class, ErrorClass::Substitution);
  EXPECT_EQ(score_completion(ex, "a", "").error_class, ErrorClass::Malformed);
  EXPECT_EQ(score_completion(ex, "a", "three six").error_class, ErrorClass::Malformed);
  EXPECT_EQ(fault_record(ex, "a", "boom").error_class, ErrorClass::Fault);
}

TEST(Score, MarkerTargetsKeepMarkers) {
  auto ex = render_example(TaskInstance::copy({"1", "2"}), {FormatFamily::Baseline, {MarkerMode::Ordered}}, 0);
  EXPECT_TRUE(score_completion(ex, "a", "A 1 B 2").exact_match);
  EXPECT_FALSE(score_completion(ex, "a", "1 2").exact_match);
  auto rev = render_example(TaskInstance::reverse({"owl", "cat"}), {FormatFamily::Baseline, {MarkerMode::Ordered}}, 0);
  EXPECT_TRUE(score_completion(rev, "a", "cat, owl").exact_match);
}

// error_class is none exactly when the prediction matches.
TEST(ScoreProperties, TaxonomyIsTotal) {
  Rng rng(72);
  const std::vector<std::string> noise{"", "1", "2 2", "A", "x", "  ", "1 1 1", "result: 4"};
  for (int trial = 0; trial < 3000; ++trial) {
    auto task = static_cast<TaskKind>(trial % 3);
    auto inst = sample_instance(task, 1 + static_cast<int>(rng() % 6), 0.7, rng);
    auto ex = render_example(inst, {}, rng());
    std::string completion = rng() % 3 == 0 ? ex.target : noise[rng() % noise.size()] + " " + inst.target.substr(0, rng() % (inst.target.size() + 1));
    auto r = score_completion(ex, "p", completion);
    ASSERT_EQ(r.exact_match, r.error_class == ErrorClass::None) << completion;
    auto back = record_from_json(nlohmann::json::parse(to_json(r).dump()));
    ASSERT_EQ(back, r);
  }
}

TEST(Aggregate, SinglePoint) {
  std::vector<EvalRecord> rs;
  for (int i = 0; i < 100; ++i) rs.push_back(record("a", TaskKind::Copy, "baseline", 0.1, 5, true));
  auto curves = aggregate(rs, 5);
  ASSERT_EQ(curves.size(), 1u);
  auto& pts = curves.begin()->second;
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0], (CurvePoint{5, 100, 100, 1.0, "in"}));
  EXPECT_EQ(aggregate(rs, 4).begin()->second[0].split, "ood");
}

TEST(Aggregate, EmptyThrows) {
  try {
    aggregate({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyRecords);
  }
  try {
    write_report({}, {}, std::filesystem::temp_directory_path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyRecords);
  }
}

TEST(AggregateProperties, ConservationAndMerging) {
  Rng rng(73);
  const std::vector<std::string> agents{"oracle", "pattern:w3:latest"};
  const std::vector<std::string> formats{"baseline", "tutor"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<EvalRecord> rs;
    const auto total = 1 + rng() % 300;
    for (std::size_t i = 0; i < total; ++i) {
      auto task = static_cast<TaskKind>(rng() % 3);
      std::optional<double> alpha;
      if (task != TaskKind::Reverse) alpha = (rng() % 3) * 0.4;
      rs.push_back(record(agents[rng() % 2], task, formats[rng() % 2], alpha, 1 + rng() % 8, rng() % 2));
    }
    auto curves = aggregate(rs, 5);
    std::size_t sum = 0;
    for (const auto& [key, pts] : curves) {
      std::size_t key_count = 0;
      for (const auto& r : rs)
        key_count += r.agent == key.agent && r.task == key.task && r.format == key.format && r.alpha == key.alpha;
      std::size_t c = 0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        ASSERT_GT(pts[i].count, 0u);
        ASSERT_LE(pts[i].correct, pts[i].count);
        ASSERT_DOUBLE_EQ(pts[i].accuracy, static_cast<double>(pts[i].correct) / static_cast<double>(pts[i].count));
        if (i) ASSERT_LT(pts[i - 1].n, pts[i].n);
        c += pts[i].count;
      }
      ASSERT_EQ(c, key_count);
      sum += c;
    }
    ASSERT_EQ(sum, rs.size());

    const auto cut = rng() % (rs.size() + 1);
    std::span<const EvalRecord> all(rs);
    auto left = all.first(cut), right = all.subspan(cut);
    Curves a = left.empty() ? Curves{} : aggregate(left, 5);
    Curves b = right.empty() ? Curves{} : aggregate(right, 5);
    ASSERT_EQ(merge_curves(a, b, 5), curves);
  }
}

TEST(Report, CsvOrderAndDeterminism) {
  std::vector<EvalRecord> rs{record("b", TaskKind::Copy, "baseline", 0.5, 3, true),
                             record("a", TaskKind::Copy, "baseline", 0.5, 2, false),
                             record("a", TaskKind::Copy, "baseline", 0.5, 1, true),
                             record("a", TaskKind::Reverse, "baseline", std::nullopt, 1, true)};
  auto curves = aggregate(rs, 1);
  EXPECT_EQ(curves_csv(curves),
            "agent,format,alpha,n,count,correct,accuracy,split,task,schema_version\n"
            "a,baseline,0.5,1,1,1,1,in,copy,1\n"
            "a,baseline,0.5,2,1,0,0,ood,copy,1\n"
            "a,baseline,,1,1,1,1,in,reverse,1\n"
            "b,baseline,0.5,3,1,1,1,ood,copy,1\n");

  check::TempDir dir;
  auto p1 = write_report(curves, rs, dir / "one");
  auto p2 = write_report(aggregate(rs, 1), rs, dir / "two");
  for (auto [x, y] : {std::pair{p1.curves_csv, p2.curves_csv}, {p1.records_jsonl, p2.records_jsonl},
                      {p1.table_txt, p2.table_txt}})
    EXPECT_EQ(check::read_file(x), check::read_file(y));
  EXPECT_EQ(read_records(p1.records_jsonl), rs);
}

TEST(Report, OracleTutorCurveIsFlat) {
  std::vector<EvalRecord> rs;
  Rng rng(74);
  for (int n = 1; n <= 100; ++n) {
    auto inst = sample_instance(TaskKind::Copy, n, 0.9, rng);
    auto ex = render_example(inst, {FormatFamily::Tutor, {}}, 0);
    auto run = run_trace(new_machine(inst), parse_trace(ex.target));
    rs.push_back(score_answer(ex, "oracle", run.output, ex.target));
  }
  for (const auto& [key, pts] : aggregate(rs)) {
    ASSERT_EQ(pts.size(), 100u);
    for (const auto& p : pts) EXPECT_EQ(p.accuracy, 1.0);
  }
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(format_double(2.0 / 3.0), "0.6666666666666666");
}

TEST(Records, BadFileIsAnError) {
  check::TempDir dir;
  check::write_file(dir / "r.jsonl", "{not json}\n");
  EXPECT_THROW(read_records(dir / "r.jsonl"), Error);
  EXPECT_THROW(read_records(dir / "absent.jsonl"), Error);
}
