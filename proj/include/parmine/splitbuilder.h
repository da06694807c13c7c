#ifndef PARMINE_SPLITBUILDER_H_
#define PARMINE_SPLITBUILDER_H_

#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "parmine/corpus.h"

namespace parmine {

// One aligned sentence pair offered to the annotator.
struct Candidate {
  std::string pair_id;
  std::size_t src_index = 0;
  std::size_t tgt_index = 0;
  double score = 0.0;
  std::string src_text;
  std::string tgt_text;

  bool operator==(const Candidate&) const = default;
};

struct AlignedDocument {
  std::string pair_id;
  double avg_score = 0.0;
  std::vector<Candidate> candidates;  // alignment order

  bool operator==(const AlignedDocument&) const = default;
};

AlignedDocument make_aligned_document(const DocumentPair& pair,
                                      const AlignmentResult& result);

// Aligner output directory: <pair_id>.tsv with rows
// src_index, tgt_index, score, src_text, tgt_text, plus summary.tsv with
// pair_id, num_matches, avg_score.
void write_alignment(const std::filesystem::path& dir,
                     const AlignedDocument& doc);
void write_summary(const std::filesystem::path& dir,
                   std::span<const AlignedDocument> docs);
std::vector<AlignedDocument> read_alignments(const std::filesystem::path& dir);

// Descending average score, ties by pair_id.
std::vector<AlignmentResult> rank_documents(std::vector<AlignmentResult> results);
std::vector<AlignedDocument> rank_documents(std::vector<AlignedDocument> docs);

enum class Verdict { kGood, kBad };

struct Judgment {
  std::string pair_id;
  std::size_t src_index = 0;
  std::size_t tgt_index = 0;
  Verdict verdict = Verdict::kBad;
  std::string annotator;
  std::string timestamp;  // ISO 8601, UTC

  bool operator==(const Judgment&) const = default;
};

std::string utc_timestamp();
std::string to_string(Verdict verdict);
// "good"/"bad" (also "g"/"b"); throws InvalidInput otherwise.
Verdict parse_verdict(std::string_view text);

std::string to_json_line(const Judgment& judgment);
Judgment judgment_from_json(std::string_view line);

struct CandidateKey {
  std::string pair_id;
  std::size_t src_index = 0;
  std::size_t tgt_index = 0;

  auto operator<=>(const CandidateKey&) const = default;
};

// Latest verdict per candidate.
class JudgmentSet {
 public:
  // Returns true if an earlier verdict was superseded.
  bool apply(const Judgment& judgment);
  std::optional<Verdict> find(const CandidateKey& key) const;
  std::size_t size() const { return latest_.size(); }

  bool operator==(const JudgmentSet&) const = default;

 private:
  std::map<CandidateKey, Verdict> latest_;
};

// Append-only, line-delimited JSON judgment log.
class JudgmentLog {
 public:
  explicit JudgmentLog(std::filesystem::path path);
  ~JudgmentLog();
  JudgmentLog(const JudgmentLog&) = delete;
  JudgmentLog& operator=(const JudgmentLog&) = delete;

  const std::filesystem::path& path() const { return path_; }

  // Every record in file order. A torn final line (no newline) is ignored.
  std::vector<Judgment> replay() const;
  // Written and synced before returning.
  void append(const Judgment& judgment);

 private:
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
};

struct SplitConfig {
  std::size_t volume = 0;
  double ratio = 0.5;

  void validate() const;
};

struct DocumentOutcome {
  std::size_t rank = 0;
  std::string pair_id;
  std::size_t candidates = 0;
  std::size_t good = 0;
  bool accepted = false;

  bool operator==(const DocumentOutcome&) const = default;
};

// Result of running document-aware filtering from one position of the
// ranking. Documents are consumed whole while fewer than `volume` pairs
// are accepted; a document is accepted iff good > candidates * ratio.
struct SplitBuild {
  std::size_t first_document = 0;
  std::size_t end_document = 0;  // one past the last consumed document
  std::vector<DocumentOutcome> consumed;
  std::size_t accepted_pairs = 0;
  // First unjudged candidate blocking progress.
  std::optional<Candidate> suspended_at;
  bool exhausted = false;  // ran out of documents before reaching volume

  bool complete() const { return !suspended_at.has_value(); }
  bool operator==(const SplitBuild&) const = default;
};

SplitBuild build_split(std::span<const AlignedDocument> ranked,
                       std::size_t first_document,
                       const JudgmentSet& judgments, const SplitConfig& cfg);

enum class Phase { kTest, kDev, kDone };
enum class SplitName { kTest, kDev, kTrain };

std::string to_string(Phase phase);
std::string to_string(SplitName split);

struct SplitCounts {
  std::size_t documents = 0;
  std::size_t aligned_lines = 0;
  std::size_t deleted_lines = 0;
  std::size_t judged = 0;
  std::size_t rejected_documents = 0;

  bool operator==(const SplitCounts&) const = default;
};

struct SplitManifest {
  std::map<std::string, SplitName> assignments;
  SplitCounts test;
  SplitCounts dev;
  SplitCounts train;
  std::vector<std::string> warnings;

  bool operator==(const SplitManifest&) const = default;
};

std::string manifest_to_json(const SplitManifest& manifest);
SplitManifest manifest_from_json(std::string_view text);
SplitManifest read_manifest_json(const std::filesystem::path& path);

struct NextPair {
  Phase phase = Phase::kTest;
  Candidate candidate;
  std::size_t document_rank = 0;
  std::size_t document_judged = 0;
  std::size_t document_total = 0;
};

struct Complete {};

using NextItem = std::variant<NextPair, Complete>;

struct SessionState {
  Phase phase = Phase::kTest;
  std::size_t judged = 0;
  SplitBuild test;
  SplitBuild dev;
  JudgmentSet judgments;

  // Accepted pairs and target of the active phase.
  std::size_t accepted_pairs() const;
  bool operator==(const SessionState&) const = default;
};

struct Ack {
  bool superseded = false;
  bool next_available = false;
};

// Test split first, then dev from the documents left after it. Every
// document not taken into test or dev goes to train. The state is
// recomputed from the ranking and the judgments, so replaying the log
// reproduces it exactly.
class SplitSession {
 public:
  // Replays log_path when given and appends new judgments to it.
  SplitSession(std::vector<AlignedDocument> ranked, SplitConfig test,
               SplitConfig dev,
               std::optional<std::filesystem::path> log_path = {});

  const SplitConfig& config(Phase phase) const;
  const std::vector<AlignedDocument>& ranked() const { return ranked_; }

  SessionState state() const;
  NextItem next_unjudged() const;
  // Throws InvalidInput for a pair that is not a candidate.
  Ack record_judgment(const Judgment& judgment);
  bool complete() const;

  // Throws StateError until both builds are complete.
  SplitManifest manifest() const;
  // manifest.json plus test/dev/train corpus files.
  SplitManifest emit(const std::filesystem::path& out_dir) const;

 private:
  void recompute();

  std::vector<AlignedDocument> ranked_;
  SplitConfig test_cfg_;
  SplitConfig dev_cfg_;
  std::optional<JudgmentLog> log_;
  std::map<CandidateKey, std::size_t> candidate_doc_;
  SessionState state_;
  mutable std::mutex mutex_;
};

// Keeps the pinned test and dev documents and puts every other aligned
// document into train; writes train corpus and manifest.json to out_dir.
SplitManifest retrain_split(std::span<const AlignedDocument> docs,
                            const SplitManifest& pinned,
                            const std::filesystem::path& out_dir);

// Terminal loop: shows each pair, reads g/b per line, q or EOF stops.
// Returns true when both builds are complete.
bool run_interactive(SplitSession& session, std::istream& in,
                     std::ostream& out, const std::string& annotator);

}  // namespace parmine

#endif  // PARMINE_SPLITBUILDER_H_
