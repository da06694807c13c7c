#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "parmine/error.h"
#include "parmine/splitbuilder.h"
#include "support.h"

using namespace parmine;
using parmine::testing::TempDir;
using parmine::testing::slurp;
using parmine::testing::write_file;

namespace {

// Documents "d00", "d01", ... with the given candidate counts, already in
// rank order (descending scores).
std::vector<AlignedDocument> synthetic_ranked(const std::vector<std::size_t>& sizes) {
  std::vector<AlignedDocument> docs;
  for (std::size_t d = 0; d < sizes.size(); ++d) {
    AlignedDocument doc;
    doc.pair_id = (d < 10 ? "d0" : "d") + std::to_string(d);
    doc.avg_score = 1.0 - 0.01 * static_cast<double>(d);
    for (std::size_t k = 0; k < sizes[d]; ++k) {
      doc.candidates.push_back({doc.pair_id, k, k + 1, doc.avg_score,
                                doc.pair_id + " src " + std::to_string(k),
                                doc.pair_id + " tgt " + std::to_string(k)});
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

Judgment verdict_for(const Candidate& c, Verdict v) {
  return {c.pair_id, c.src_index, c.tgt_index, v, "tester", "2024-01-01T00:00:00.000Z"};
}

// Judges `good` of each document's candidates good and the rest bad.
void judge_all(SplitSession& s, const std::map<std::string, std::size_t>& good) {
  while (true) {
    const auto item = s.next_unjudged();
    if (std::holds_alternative<Complete>(item)) return;
    const auto& c = std::get<NextPair>(item).candidate;
    const auto it = good.find(c.pair_id);
    const std::size_t g = it == good.end() ? 0 : it->second;
    s.record_judgment(verdict_for(c, c.src_index < g ? Verdict::kGood : Verdict::kBad));
  }
}

}  // namespace

TEST_CASE("rank_documents") {
  std::vector<AlignmentResult> rs;
  rs.emplace_back("a", std::vector<Match>{{0, 0, 0.5}});
  rs.emplace_back("b", std::vector<Match>{{0, 0, 0.9}});
  rs.emplace_back("c", std::vector<Match>{{0, 0, 0.7}});
  const auto ranked = rank_documents(rs);
  CHECK(ranked[0].pair_id() == "b");
  CHECK(ranked[1].pair_id() == "c");
  CHECK(ranked[2].pair_id() == "a");
  CHECK(rank_documents(std::vector<AlignmentResult>{}).empty());

  std::vector<AlignedDocument> ties{{"z", 0.5, {}}, {"m", 0.5, {}}, {"a", 0.5, {}}};
  const auto tied = rank_documents(ties);
  CHECK(tied[0].pair_id == "a");
  CHECK(tied[1].pair_id == "m");
  CHECK(tied[2].pair_id == "z");
}

TEST_CASE("verdicts and judgment records") {
  CHECK(parse_verdict("g") == Verdict::kGood);
  CHECK(parse_verdict("bad") == Verdict::kBad);
  CHECK_THROWS_AS(parse_verdict("maybe"), InvalidInput);
  const Judgment j{"doc", 3, 4, Verdict::kGood, "ann", "2024-05-06T07:08:09.010Z"};
  CHECK(judgment_from_json(to_json_line(j)) == j);
  CHECK_THROWS_AS(judgment_from_json("{\"pair_id\": 1}"), InvalidInput);
  const std::string ts = utc_timestamp();
  CHECK(ts.size() == 24);
  CHECK(ts.back() == 'Z');
}

TEST_CASE("judgment set keeps the last verdict") {
  JudgmentSet s;
  CHECK_FALSE(s.apply({"d", 0, 0, Verdict::kGood, "", ""}));
  CHECK(s.apply({"d", 0, 0, Verdict::kBad, "", ""}));
  CHECK(s.find({"d", 0, 0}) == Verdict::kBad);
  CHECK_FALSE(s.find({"d", 0, 1}).has_value());
  CHECK(s.size() == 1);
}

TEST_CASE("build_split strict rule and overshoot") {
  const auto docs = synthetic_ranked({10, 4, 6});
  JudgmentSet js;
  auto judge = [&](std::size_t d, std::size_t good) {
    for (const auto& c : docs[d].candidates) {
      js.apply(verdict_for(c, c.src_index < good ? Verdict::kGood : Verdict::kBad));
    }
  };
  SUBCASE("exactly half good is rejected") {
    judge(0, 5);
    const auto b = build_split(docs, 0, js, {3, 0.5});
    REQUIRE_FALSE(b.complete());
    CHECK(b.consumed.size() == 1);
    CHECK_FALSE(b.consumed[0].accepted);
    CHECK(b.suspended_at->pair_id == "d01");
    CHECK(b.end_document == 1);
  }
  SUBCASE("whole documents overshoot the volume") {
    judge(0, 6);
    const auto b = build_split(docs, 0, js, {3, 0.5});
    CHECK(b.complete());
    CHECK(b.accepted_pairs == 6);
    CHECK(b.end_document == 1);
  }
  SUBCASE("volume zero consumes nothing") {
    const auto b = build_split(docs, 0, js, {0, 0.5});
    CHECK(b.complete());
    CHECK(b.consumed.empty());
    CHECK(b.end_document == 0);
  }
  SUBCASE("running out of documents") {
    judge(0, 10);
    judge(1, 4);
    judge(2, 6);
    const auto b = build_split(docs, 0, js, {100, 0.5});
    CHECK(b.complete());
    CHECK(b.exhausted);
    CHECK(b.accepted_pairs == 20);
  }
}

TEST_CASE("session walks documents in rank order") {
  SplitSession s(synthetic_ranked({2, 3, 2, 2}), {2, 0.5}, {2, 0.5});
  auto next = std::get<NextPair>(s.next_unjudged());
  CHECK(next.candidate.pair_id == "d00");
  CHECK(next.candidate.src_index == 0);
  CHECK(next.document_total == 2);
  // Idempotent until a judgment arrives.
  CHECK(std::get<NextPair>(s.next_unjudged()).candidate == next.candidate);

  CHECK(s.record_judgment(verdict_for(next.candidate, Verdict::kGood)).next_available);
  next = std::get<NextPair>(s.next_unjudged());
  CHECK(next.candidate.src_index == 1);
  CHECK(next.document_judged == 1);
  s.record_judgment(verdict_for(next.candidate, Verdict::kBad));
  // 1 of 2 good is not > 1, so d00 is rejected and d01 comes next.
  next = std::get<NextPair>(s.next_unjudged());
  CHECK(next.candidate.pair_id == "d01");
  CHECK(next.document_rank == 1);
  CHECK(s.state().phase == Phase::kTest);

  CHECK_THROWS_AS(s.record_judgment({"d00", 5, 5, Verdict::kGood, "x", ""}), InvalidInput);
  CHECK_THROWS_AS(s.manifest(), StateError);
  TempDir dir;
  CHECK_THROWS_AS(s.emit(dir.path()), StateError);

  // Re-judging is accepted and reported as superseding.
  CHECK(s.record_judgment(verdict_for(next.candidate, Verdict::kGood)).superseded == false);
  CHECK(s.record_judgment(verdict_for(next.candidate, Verdict::kGood)).superseded);
}

TEST_CASE("session completes with test then dev") {
  SplitSession s(synthetic_ranked({4, 4, 4, 4, 4}), {3, 0.5}, {3, 0.5});
  judge_all(s, {{"d00", 2}, {"d01", 3}, {"d02", 4}, {"d03", 1}, {"d04", 4}});
  REQUIRE(s.complete());
  const auto st = s.state();
  CHECK(st.test.consumed.size() == 2);  // d00 rejected, d01 accepted with 3
  CHECK(st.dev.first_document == 2);
  CHECK(st.dev.consumed.size() == 1);   // d02 accepted with 4
  const auto m = s.manifest();
  CHECK(m.assignments.at("d00") == SplitName::kTrain);
  CHECK(m.assignments.at("d01") == SplitName::kTest);
  CHECK(m.assignments.at("d02") == SplitName::kDev);
  CHECK(m.assignments.at("d03") == SplitName::kTrain);
  CHECK(m.assignments.at("d04") == SplitName::kTrain);
  CHECK(m.test == SplitCounts{1, 3, 5, 8, 1});
  CHECK(m.dev == SplitCounts{1, 4, 0, 4, 0});
  CHECK(m.train.documents == 3);
  CHECK(m.train.aligned_lines == 12);
  CHECK(m.warnings.empty());
  CHECK(manifest_from_json(manifest_to_json(m)) == m);
}

TEST_CASE("zero accepted documents leave an empty split with a warning") {
  SplitSession s(synthetic_ranked({2, 2}), {5, 0.5}, {5, 0.5});
  judge_all(s, {});
  REQUIRE(s.complete());
  const auto m = s.manifest();
  CHECK(m.test.documents == 0);
  CHECK(m.dev.documents == 0);
  CHECK(m.train.documents == 2);
  CHECK(m.warnings.size() >= 2);
  TempDir dir;
  s.emit(dir.path());
  CHECK(read_corpus(dir / "test").empty());
  CHECK(read_corpus(dir / "train").size() == 4);
}

TEST_CASE("emit writes document-pure corpora") {
  TempDir dir;
  SplitSession s(synthetic_ranked({3, 3, 3}), {1, 0.5}, {1, 0.5});
  judge_all(s, {{"d00", 3}, {"d01", 2}});
  const auto m = s.emit(dir.path());
  const Corpus test = read_corpus(dir / "test");
  const Corpus dev = read_corpus(dir / "dev");
  const Corpus train = read_corpus(dir / "train");
  CHECK(test.size() == 3);
  CHECK(dev.size() == 2);  // only good pairs of d01
  CHECK(train.size() == 3);
  CHECK(dev.boundaries() == std::vector<DocSpan>{{"d01", 0, 2}});
  CHECK(read_manifest_json(dir / "manifest.json") == m);
  CHECK(m.test.aligned_lines + m.test.deleted_lines == m.test.judged);
  CHECK(m.dev.aligned_lines + m.dev.deleted_lines == m.dev.judged);
}

TEST_CASE("judgment log replay reproduces the state") {
  TempDir dir;
  const auto docs = synthetic_ranked({5, 3, 4, 6, 2, 5, 3});
  std::mt19937_64 rng(17);
  SessionState before;
  {
    SplitSession s(docs, {6, 0.5}, {4, 0.5}, dir / "log.jsonl");
    for (int k = 0; k < 14; ++k) {
      const auto item = s.next_unjudged();
      if (std::holds_alternative<Complete>(item)) break;
      const auto& c = std::get<NextPair>(item).candidate;
      s.record_judgment(verdict_for(c, rng() % 3 ? Verdict::kGood : Verdict::kBad));
    }
    before = s.state();
  }
  SplitSession again(docs, {6, 0.5}, {4, 0.5}, dir / "log.jsonl");
  CHECK(again.state() == before);
}

TEST_CASE("torn log tail is dropped") {
  TempDir dir;
  const auto docs = synthetic_ranked({3});
  {
    SplitSession s(docs, {1, 0.5}, {1, 0.5}, dir / "log.jsonl");
    s.record_judgment(verdict_for(docs[0].candidates[0], Verdict::kGood));
  }
  {
    std::ofstream out(dir / "log.jsonl", std::ios::app);
    out << "{\"pair_id\": \"d00\", \"src_in";
  }
  CHECK(JudgmentLog(dir / "copy.jsonl").replay().empty());
  SplitSession s(docs, {1, 0.5}, {1, 0.5}, dir / "log.jsonl");
  CHECK(s.state().judged == 1);
  s.record_judgment(verdict_for(docs[0].candidates[1], Verdict::kGood));
  SplitSession t(docs, {1, 0.5}, {1, 0.5}, dir / "log.jsonl");
  CHECK(t.state().judged == 2);
}

TEST_CASE("corrupt or foreign logs are data errors") {
  TempDir dir;
  const auto docs = synthetic_ranked({2});
  write_file(dir / "bad.jsonl", "not json\n");
  CHECK_THROWS_AS(SplitSession(docs, {1, 0.5}, {1, 0.5}, dir / "bad.jsonl"), DataError);
  write_file(dir / "foreign.jsonl",
             to_json_line(Judgment{"other", 0, 0, Verdict::kGood, "", ""}) + "\n");
  CHECK_THROWS_AS(SplitSession(docs, {1, 0.5}, {1, 0.5}, dir / "foreign.jsonl"), DataError);
}

TEST_CASE("alignment files round trip") {
  TempDir dir;
  auto docs = synthetic_ranked({2, 0, 3});
  docs[0].candidates[0].src_text = "tab\there";
  docs[0].avg_score = 0.1 + 0.2;
  for (const auto& d : docs) write_alignment(dir.path(), d);
  write_summary(dir.path(), docs);
  const auto back = read_alignments(dir.path());
  REQUIRE(back.size() == 3);
  CHECK(back[0].avg_score == docs[0].avg_score);
  CHECK(back[0].candidates[0].src_text == "tab here");
  CHECK(back[2] == docs[2]);
  CHECK(back[1].candidates.empty());

  write_file(dir / "d02.tsv", "0\t1\t0.5\ta\tb\n");
  CHECK_THROWS_AS(read_alignments(dir.path()), DataError);
}

TEST_CASE("retrain keeps pinned test and dev") {
  TempDir dir;
  SplitSession s(synthetic_ranked({3, 3, 3}), {1, 0.5}, {1, 0.5});
  judge_all(s, {{"d00", 3}, {"d01", 3}});
  const auto pinned = s.manifest();
  auto docs = synthetic_ranked({3, 3, 3, 2});
  std::swap(docs[0], docs[3]);  // new ranking must not matter
  const auto m = retrain_split(docs, pinned, dir.path());
  CHECK(m.assignments.at("d00") == SplitName::kTest);
  CHECK(m.assignments.at("d01") == SplitName::kDev);
  CHECK(m.assignments.at("d02") == SplitName::kTrain);
  CHECK(m.assignments.at("d03") == SplitName::kTrain);
  CHECK(m.test == pinned.test);
  CHECK(read_corpus(dir / "train").size() == 5);
}

TEST_CASE("interactive loop") {
  SplitSession s(synthetic_ranked({2, 2}), {1, 0.5}, {1, 0.5});
  std::istringstream in("g\nmaybe\ng\n");
  std::ostringstream out;
  CHECK_FALSE(run_interactive(s, in, out, "me"));
  CHECK(out.str().find("please answer g or b") != std::string::npos);
  CHECK(s.state().phase == Phase::kDev);
  std::istringstream rest("b\nb\nq\n");
  CHECK(run_interactive(s, rest, out, "me"));
  CHECK(s.complete());
}
