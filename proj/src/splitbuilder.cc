#include "parmine/splitbuilder.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unistd.h>

#include "json.hpp"

#include "parmine/error.h"
#include "parmine/text.h"

namespace parmine {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw DataError(where + ": bad number '" + s + "'");
  }
  return v;
}

std::size_t parse_index(const std::string& s, const std::string& where) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw DataError(where + ": bad index '" + s + "'");
  }
  return v;
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string tsv_safe(std::string_view text) {
  std::string out(text);
  std::replace_if(
      out.begin(), out.end(),
      [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
  return out;
}

CandidateKey key_of(const Candidate& c) {
  return {c.pair_id, c.src_index, c.tgt_index};
}

template <typename T, typename ScoreFn, typename IdFn>
std::vector<T> rank_by(std::vector<T> items, ScoreFn score, IdFn id) {
  std::stable_sort(items.begin(), items.end(), [&](const T& a, const T& b) {
    if (score(a) != score(b)) return score(a) > score(b);
    return id(a) < id(b);
  });
  return items;
}

}  // namespace

AlignedDocument make_aligned_document(const DocumentPair& pair,
                                      const AlignmentResult& result) {
  AlignedDocument doc;
  doc.pair_id = pair.pair_id();
  doc.avg_score = result.avg_score();
  for (const auto& m : result.matches()) {
    doc.candidates.push_back({pair.pair_id(), m.src_index, m.tgt_index, m.score,
                              pair.source()[m.src_index].text,
                              pair.target()[m.tgt_index].text});
  }
  return doc;
}

void write_alignment(const std::filesystem::path& dir,
                     const AlignedDocument& doc) {
  std::vector<std::string> rows;
  rows.reserve(doc.candidates.size());
  for (const auto& c : doc.candidates) {
    rows.push_back(std::to_string(c.src_index) + '\t' +
                   std::to_string(c.tgt_index) + '\t' + format_double(c.score) +
                   '\t' + tsv_safe(c.src_text) + '\t' + tsv_safe(c.tgt_text));
  }
  write_lines(dir / (doc.pair_id + ".tsv"), rows);
}

void write_summary(const std::filesystem::path& dir,
                   std::span<const AlignedDocument> docs) {
  std::vector<std::string> rows;
  for (const auto& d : docs) {
    rows.push_back(d.pair_id + '\t' + std::to_string(d.candidates.size()) +
                   '\t' + format_double(d.avg_score));
  }
  write_lines(dir / "summary.tsv", rows);
}

std::vector<AlignedDocument> read_alignments(const std::filesystem::path& dir) {
  const auto summary_path = dir / "summary.tsv";
  std::vector<AlignedDocument> docs;
  auto lines = read_lines(summary_path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = summary_path.string() + ":" + std::to_string(i + 1);
    auto f = split_fields(lines[i], '\t');
    if (f.size() != 3) throw DataError(where + ": expected 3 fields");
    AlignedDocument doc;
    doc.pair_id = f[0];
    const std::size_t expected = parse_index(f[1], where);
    doc.avg_score = parse_double(f[2], where);

    const auto path = dir / (doc.pair_id + ".tsv");
    auto rows = read_lines(path);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].empty()) continue;
      const std::string at = path.string() + ":" + std::to_string(r + 1);
      auto g = split_fields(rows[r], '\t');
      if (g.size() != 5) throw DataError(at + ": expected 5 fields");
      doc.candidates.push_back({doc.pair_id, parse_index(g[0], at),
                                parse_index(g[1], at), parse_double(g[2], at),
                                g[3], g[4]});
    }
    if (doc.candidates.size() != expected) {
      throw DataError(where + ": summary says " + f[1] + " matches, " +
                      path.string() + " has " +
                      std::to_string(doc.candidates.size()));
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<AlignmentResult> rank_documents(
    std::vector<AlignmentResult> results) {
  return rank_by(
      std::move(results), [](const AlignmentResult& r) { return r.avg_score(); },
      [](const AlignmentResult& r) -> const std::string& { return r.pair_id(); });
}

std::vector<AlignedDocument> rank_documents(std::vector<AlignedDocument> docs) {
  return rank_by(
      std::move(docs), [](const AlignedDocument& d) { return d.avg_score; },
      [](const AlignedDocument& d) -> const std::string& { return d.pair_id; });
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t secs = std::chrono::system_clock::to_time_t(now);
  const auto millis = std::chrono::duration_cast<std::chrono::milliseconds>(
                          now.time_since_epoch())
                          .count() %
                      1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(millis));
  return out;
}

std::string to_string(Verdict verdict) {
  return verdict == Verdict::kGood ? "good" : "bad";
}

Verdict parse_verdict(std::string_view text) {
  if (text == "good" || text == "g") return Verdict::kGood;
  if (text == "bad" || text == "b") return Verdict::kBad;
  throw InvalidInput("verdict must be good or bad, got '" + std::string(text) +
                     "'");
}

std::string to_json_line(const Judgment& j) {
  ordered_json o;
  o["pair_id"] = j.pair_id;
  o["src_index"] = j.src_index;
  o["tgt_index"] = j.tgt_index;
  o["verdict"] = to_string(j.verdict);
  o["annotator"] = j.annotator;
  o["timestamp"] = j.timestamp;
  return o.dump();
}

Judgment judgment_from_json(std::string_view line) {
  try {
    const json o = json::parse(line);
    Judgment j;
    j.pair_id = o.at("pair_id").get<std::string>();
    j.src_index = o.at("src_index").get<std::size_t>();
    j.tgt_index = o.at("tgt_index").get<std::size_t>();
    j.verdict = parse_verdict(o.at("verdict").get<std::string>());
    j.annotator = o.value("annotator", std::string());
    j.timestamp = o.value("timestamp", std::string());
    return j;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed judgment: ") + e.what());
  }
}

bool JudgmentSet::apply(const Judgment& judgment) {
  CandidateKey key{judgment.pair_id, judgment.src_index, judgment.tgt_index};
  auto [it, inserted] = latest_.insert_or_assign(std::move(key), judgment.verdict);
  return !inserted;
}

std::optional<Verdict> JudgmentSet::find(const CandidateKey& key) const {
  auto it = latest_.find(key);
  if (it == latest_.end()) return std::nullopt;
  return it->second;
}

JudgmentLog::JudgmentLog(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) {
    std::filesystem::create_directories(path_.parent_path());
  }
  // Drop a torn record left by a crash so the next append starts cleanly.
  if (std::filesystem::exists(path_)) {
    std::ifstream in(path_, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    if (!content.empty() && content.back() != '\n') {
      const auto keep = content.rfind('\n');
      std::filesystem::resize_file(
          path_, keep == std::string::npos ? 0 : keep + 1);
    }
  }
  file_ = std::fopen(path_.c_str(), "ab");
  if (!file_) throw DataError("cannot open judgment log " + path_.string());
}

JudgmentLog::~JudgmentLog() {
  if (file_) std::fclose(file_);
}

std::vector<Judgment> JudgmentLog::replay() const {
  std::ifstream in(path_, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  std::vector<Judgment> out;
  std::size_t start = 0, line_no = 0;
  while (start < content.size()) {
    const auto nl = content.find('\n', start);
    if (nl == std::string::npos) break;  // torn tail
    ++line_no;
    std::string_view line(content.data() + start, nl - start);
    start = nl + 1;
    if (trim(line).empty()) continue;
    try {
      out.push_back(judgment_from_json(line));
    } catch (const InvalidInput& e) {
      throw DataError(path_.string() + ":" + std::to_string(line_no) + ": " +
                      e.what());
    }
  }
  return out;
}

void JudgmentLog::append(const Judgment& judgment) {
  const std::string line = to_json_line(judgment) + '\n';
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() ||
      std::fflush(file_) != 0 || ::fsync(::fileno(file_)) != 0) {
    throw DataError("cannot append to judgment log " + path_.string());
  }
}

void SplitConfig::validate() const {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw ConfigError("ratio must be within [0, 1]");
  }
}

SplitBuild build_split(std::span<const AlignedDocument> ranked,
                       std::size_t first_document,
                       const JudgmentSet& judgments, const SplitConfig& cfg) {
  SplitBuild build;
  build.first_document = first_document;
  std::size_t next = first_document;
  while (build.accepted_pairs < cfg.volume) {
    if (next >= ranked.size()) {
      build.exhausted = true;
      break;
    }
    const AlignedDocument& doc = ranked[next];
    std::size_t good = 0;
    for (const auto& c : doc.candidates) {
      auto verdict = judgments.find(key_of(c));
      if (!verdict) {
        build.suspended_at = c;
        build.end_document = next;
        return build;
      }
      if (*verdict == Verdict::kGood) ++good;
    }
    const std::size_t total = doc.candidates.size();
    const bool accepted =
        static_cast<double>(good) > static_cast<double>(total) * cfg.ratio;
    build.consumed.push_back({next, doc.pair_id, total, good, accepted});
    if (accepted) build.accepted_pairs += good;
    ++next;
  }
  build.end_document = next;
  return build;
}

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::kTest:
      return "test";
    case Phase::kDev:
      return "dev";
    case Phase::kDone:
      return "done";
  }
  return "?";
}

std::string to_string(SplitName split) {
  switch (split) {
    case SplitName::kTest:
      return "test";
    case SplitName::kDev:
      return "dev";
    case SplitName::kTrain:
      return "train";
  }
  return "?";
}

namespace {

SplitName parse_split_name(const std::string& s) {
  if (s == "test") return SplitName::kTest;
  if (s == "dev") return SplitName::kDev;
  if (s == "train") return SplitName::kTrain;
  throw DataError("unknown split '" + s + "'");
}

ordered_json counts_json(const SplitCounts& c) {
  ordered_json o;
  o["documents"] = c.documents;
  o["aligned_lines"] = c.aligned_lines;
  o["deleted_lines"] = c.deleted_lines;
  o["judged"] = c.judged;
  o["rejected_documents"] = c.rejected_documents;
  return o;
}

SplitCounts counts_from(const json& o) {
  SplitCounts c;
  c.documents = o.at("documents").get<std::size_t>();
  c.aligned_lines = o.at("aligned_lines").get<std::size_t>();
  c.deleted_lines = o.at("deleted_lines").get<std::size_t>();
  c.judged = o.value("judged", std::size_t{0});
  c.rejected_documents = o.value("rejected_documents", std::size_t{0});
  return c;
}

}  // namespace

std::string manifest_to_json(const SplitManifest& m) {
  ordered_json o;
  ordered_json assignments = ordered_json::object();
  for (const auto& [id, split] : m.assignments) assignments[id] = to_string(split);
  o["assignments"] = std::move(assignments);
  o["counts"]["test"] = counts_json(m.test);
  o["counts"]["dev"] = counts_json(m.dev);
  o["counts"]["train"] = counts_json(m.train);
  o["warnings"] = m.warnings;
  return o.dump(2) + "\n";
}

SplitManifest manifest_from_json(std::string_view text) {
  try {
    const json o = json::parse(text);
    SplitManifest m;
    for (const auto& [id, split] : o.at("assignments").items()) {
      m.assignments[id] = parse_split_name(split.get<std::string>());
    }
    m.test = counts_from(o.at("counts").at("test"));
    m.dev = counts_from(o.at("counts").at("dev"));
    m.train = counts_from(o.at("counts").at("train"));
    m.warnings = o.value("warnings", std::vector<std::string>{});
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed split manifest: ") + e.what());
  }
}

SplitManifest read_manifest_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return manifest_from_json(ss.str());
}

std::size_t SessionState::accepted_pairs() const {
  return phase == Phase::kTest ? test.accepted_pairs : dev.accepted_pairs;
}

SplitSession::SplitSession(std::vector<AlignedDocument> ranked,
                           SplitConfig test, SplitConfig dev,
                           std::optional<std::filesystem::path> log_path)
    : ranked_(std::move(ranked)), test_cfg_(test), dev_cfg_(dev) {
  test_cfg_.validate();
  dev_cfg_.validate();
  for (std::size_t d = 0; d < ranked_.size(); ++d) {
    for (const auto& c : ranked_[d].candidates) {
      if (!candidate_doc_.emplace(key_of(c), d).second) {
        throw InvalidInput("duplicate candidate " + c.pair_id + " " +
                           std::to_string(c.src_index) + "-" +
                           std::to_string(c.tgt_index));
      }
    }
  }
  if (log_path) {
    log_.emplace(*log_path);
    for (const auto& j : log_->replay()) {
      if (!candidate_doc_.contains({j.pair_id, j.src_index, j.tgt_index})) {
        throw DataError("judgment log " + log_path->string() +
                        " refers to unknown candidate " + j.pair_id + " " +
                        std::to_string(j.src_index) + "-" +
                        std::to_string(j.tgt_index));
      }
      state_.judgments.apply(j);
    }
  }
  recompute();
}

const SplitConfig& SplitSession::config(Phase phase) const {
  return phase == Phase::kTest ? test_cfg_ : dev_cfg_;
}

void SplitSession::recompute() {
  state_.test = build_split(ranked_, 0, state_.judgments, test_cfg_);
  state_.dev = SplitBuild{};
  if (!state_.test.complete()) {
    state_.phase = Phase::kTest;
  } else {
    state_.dev = build_split(ranked_, state_.test.end_document,
                             state_.judgments, dev_cfg_);
    state_.phase = state_.dev.complete() ? Phase::kDone : Phase::kDev;
  }
  state_.judged = state_.judgments.size();
}

SessionState SplitSession::state() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return state_;
}

bool SplitSession::complete() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return state_.phase == Phase::kDone;
}

NextItem SplitSession::next_unjudged() const {
  std::lock_guard<std::mutex> lock(mutex_);
  if (state_.phase == Phase::kDone) return Complete{};
  const SplitBuild& build =
      state_.phase == Phase::kTest ? state_.test : state_.dev;
  NextPair next;
  next.phase = state_.phase;
  next.candidate = *build.suspended_at;
  next.document_rank = build.end_document;
  const auto& doc = ranked_[build.end_document];
  next.document_total = doc.candidates.size();
  for (const auto& c : doc.candidates) {
    if (state_.judgments.find(key_of(c))) ++next.document_judged;
  }
  return next;
}

Ack SplitSession::record_judgment(const Judgment& judgment) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (!candidate_doc_.contains(
          {judgment.pair_id, judgment.src_index, judgment.tgt_index})) {
    throw InvalidInput("no candidate " + judgment.pair_id + " " +
                       std::to_string(judgment.src_index) + "-" +
                       std::to_string(judgment.tgt_index));
  }
  Judgment stamped = judgment;
  if (stamped.timestamp.empty()) stamped.timestamp = utc_timestamp();
  if (log_) log_->append(stamped);
  Ack ack;
  ack.superseded = state_.judgments.apply(stamped);
  recompute();
  ack.next_available = state_.phase != Phase::kDone;
  return ack;
}

namespace {

void count_build(const SplitBuild& build, SplitName split,
                 SplitCounts& counts, SplitManifest& m) {
  for (const auto& d : build.consumed) {
    counts.judged += d.candidates;
    if (d.accepted) {
      ++counts.documents;
      counts.aligned_lines += d.good;
      m.assignments[d.pair_id] = split;
    } else {
      ++counts.rejected_documents;
    }
  }
  counts.deleted_lines = counts.judged - counts.aligned_lines;
}

}  // namespace

SplitManifest SplitSession::manifest() const {
  std::lock_guard<std::mutex> lock(mutex_);
  if (state_.phase != Phase::kDone) {
    throw StateError("split builds are not complete (phase " +
                     to_string(state_.phase) + ")");
  }
  SplitManifest m;
  count_build(state_.test, SplitName::kTest, m.test, m);
  count_build(state_.dev, SplitName::kDev, m.dev, m);
  for (const auto& doc : ranked_) {
    if (m.assignments.contains(doc.pair_id)) continue;
    m.assignments[doc.pair_id] = SplitName::kTrain;
    ++m.train.documents;
    m.train.aligned_lines += doc.candidates.size();
  }
  auto warn = [&](const char* name, const SplitCounts& counts,
                  const SplitBuild& build, const SplitConfig& cfg) {
    if (counts.documents == 0) {
      m.warnings.push_back(std::string(name) + " split is empty");
    }
    if (build.exhausted) {
      m.warnings.push_back(std::string(name) +
                           " split ran out of documents before reaching " +
                           std::to_string(cfg.volume) + " pairs");
    }
  };
  warn("test", m.test, state_.test, test_cfg_);
  warn("dev", m.dev, state_.dev, dev_cfg_);
  return m;
}

namespace {

Corpus collect(const std::string& name,
               std::span<const AlignedDocument> ranked,
               const SplitManifest& m, SplitName split,
               const JudgmentSet* judgments) {
  std::vector<SentencePair> pairs;
  std::vector<DocSpan> bounds;
  for (const auto& doc : ranked) {
    auto it = m.assignments.find(doc.pair_id);
    if (it == m.assignments.end() || it->second != split) continue;
    const std::size_t start = pairs.size();
    for (const auto& c : doc.candidates) {
      if (judgments && judgments->find(key_of(c)) != Verdict::kGood) continue;
      pairs.push_back({c.src_text, c.tgt_text});
    }
    bounds.push_back({doc.pair_id, start, pairs.size()});
  }
  return Corpus(name, std::move(pairs), std::move(bounds));
}

void write_manifest_file(const std::filesystem::path& out_dir,
                         const SplitManifest& m) {
  std::filesystem::create_directories(out_dir);
  std::ofstream out(out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
  out << manifest_to_json(m);
  if (!out) throw DataError("cannot write " + (out_dir / "manifest.json").string());
}

}  // namespace

SplitManifest SplitSession::emit(const std::filesystem::path& out_dir) const {
  SplitManifest m = manifest();
  JudgmentSet judgments;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    judgments = state_.judgments;
  }
  write_corpus(out_dir / "test",
               collect("test", ranked_, m, SplitName::kTest, &judgments));
  write_corpus(out_dir / "dev",
               collect("dev", ranked_, m, SplitName::kDev, &judgments));
  write_corpus(out_dir / "train",
               collect("train", ranked_, m, SplitName::kTrain, nullptr));
  write_manifest_file(out_dir, m);
  return m;
}

SplitManifest retrain_split(std::span<const AlignedDocument> docs,
                            const SplitManifest& pinned,
                            const std::filesystem::path& out_dir) {
  SplitManifest m;
  m.test = pinned.test;
  m.dev = pinned.dev;
  for (const auto& [id, split] : pinned.assignments) {
    if (split != SplitName::kTrain) m.assignments[id] = split;
  }
  for (const auto& doc : docs) {
    if (m.assignments.contains(doc.pair_id)) continue;
    m.assignments[doc.pair_id] = SplitName::kTrain;
    ++m.train.documents;
    m.train.aligned_lines += doc.candidates.size();
  }
  write_corpus(out_dir / "train",
               collect("train", docs, m, SplitName::kTrain, nullptr));
  write_manifest_file(out_dir, m);
  return m;
}

bool run_interactive(SplitSession& session, std::istream& in,
                     std::ostream& out, const std::string& annotator) {
  while (true) {
    const NextItem item = session.next_unjudged();
    if (std::holds_alternative<Complete>(item)) {
      out << "All judgments collected.\n";
      return true;
    }
    const auto& next = std::get<NextPair>(item);
    const auto& c = next.candidate;
    const auto& cfg = session.config(next.phase);
    const auto st = session.state();
    out << "[" << to_string(next.phase) << " " << st.accepted_pairs() << "/"
        << cfg.volume << "] document #" << next.document_rank + 1 << " "
        << c.pair_id << " (" << next.document_judged + 1 << "/"
        << next.document_total << ") score " << format_double(c.score) << "\n"
        << "  SRC: " << c.src_text << "\n"
        << "  TGT: " << c.tgt_text << "\n"
        << "good or bad? [g/b/q] " << std::flush;
    std::string line;
    if (!std::getline(in, line)) {
      out << "\n";
      return false;
    }
    const std::string answer(trim(line));
    if (answer == "q" || answer == "quit") return false;
    Verdict verdict;
    try {
      verdict = parse_verdict(answer);
    } catch (const InvalidInput&) {
      out << "please answer g or b\n";
      continue;
    }
    session.record_judgment(
        {c.pair_id, c.src_index, c.tgt_index, verdict, annotator, {}});
  }
}

}  // namespace parmine
