#ifndef PARMINE_CORPUS_H_
#define PARMINE_CORPUS_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace parmine {

struct Sentence {
  std::size_t index = 0;
  std::string text;
  // Whitespace split of text. Tokenization proper happens upstream.
  std::vector<std::string> tokens;
};

// Throws InvalidInput if text is blank.
Sentence make_sentence(std::size_t index, std::string text);

// Ordered sentences of one language. Sentence indices are always 0..size-1.
class Document {
 public:
  Document() = default;
  Document(std::string doc_id, std::string language,
           const std::vector<std::string>& lines);

  const std::string& doc_id() const { return doc_id_; }
  const std::string& language() const { return language_; }
  const std::vector<Sentence>& sentences() const { return sentences_; }
  std::size_t size() const { return sentences_.size(); }
  bool empty() const { return sentences_.empty(); }
  const Sentence& operator[](std::size_t i) const { return sentences_[i]; }

  std::vector<std::string> texts() const;

 private:
  std::string doc_id_;
  std::string language_;
  std::vector<Sentence> sentences_;
};

class DocumentPair {
 public:
  DocumentPair() = default;
  // translations, when given, must be line-aligned with source.
  DocumentPair(std::string pair_id, Document source, Document target,
               std::optional<std::vector<std::string>> translations = {});

  const std::string& pair_id() const { return pair_id_; }
  const Document& source() const { return source_; }
  const Document& target() const { return target_; }
  const std::optional<std::vector<std::string>>& translations() const {
    return translations_;
  }

  DocumentPair with_translations(std::vector<std::string> translations) const;

 private:
  std::string pair_id_;
  Document source_;
  Document target_;
  std::optional<std::vector<std::string>> translations_;
};

struct Match {
  std::size_t src_index = 0;
  std::size_t tgt_index = 0;
  double score = 0.0;

  bool operator==(const Match&) const = default;
};

// 1-1 matches of one document pair; gaps are implicit.
class AlignmentResult {
 public:
  AlignmentResult() = default;
  // Throws InvalidInput unless matches are strictly increasing on both sides.
  AlignmentResult(std::string pair_id, std::vector<Match> matches);

  const std::string& pair_id() const { return pair_id_; }
  const std::vector<Match>& matches() const { return matches_; }
  // Mean match score, 0 without matches.
  double avg_score() const { return avg_score_; }
  double total_score() const;

 private:
  std::string pair_id_;
  std::vector<Match> matches_;
  double avg_score_ = 0.0;
};

struct SentencePair {
  std::string src;
  std::string tgt;

  bool operator==(const SentencePair&) const = default;
};

// Half-open range [start, end) of a corpus owned by one document pair.
struct DocSpan {
  std::string pair_id;
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const DocSpan&) const = default;
};

class Corpus {
 public:
  Corpus() = default;
  // Throws InvalidInput unless boundaries partition [0, pairs.size()).
  Corpus(std::string name, std::vector<SentencePair> pairs,
         std::vector<DocSpan> boundaries);

  const std::string& name() const { return name_; }
  const std::vector<SentencePair>& pairs() const { return pairs_; }
  const std::vector<DocSpan>& boundaries() const { return boundaries_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }

  // First `count` pairs, boundaries clipped accordingly.
  Corpus prefix(std::size_t count) const;

  static Corpus concat(std::string name, std::span<const Corpus> parts);

 private:
  std::string name_;
  std::vector<SentencePair> pairs_;
  std::vector<DocSpan> boundaries_;
};

// Oversamples every smaller corpus to the size of the largest one by
// repeating it ceil(max/size) times and truncating, then concatenates in
// input order.
Corpus mix_corpora(std::span<const Corpus> corpora);

// Repetitions mix_corpora applies to a corpus of `size` when the largest
// has `max_size` pairs.
std::size_t oversampling_factor(std::size_t size, std::size_t max_size);

enum class Side { kSource, kTarget };

struct LengthStats {
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;  // population
};

LengthStats length_stats(const Corpus& corpus, Side side);
LengthStats length_stats(std::span<const std::size_t> token_counts);

// ---- files ----

// Reads raw lines, stripping '\n' and a trailing '\r'. Throws DataError.
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_lines(const std::filesystem::path& path,
                 std::span<const std::string> lines);

// One sentence per line, UTF-8, no blank lines.
Document read_document(const std::filesystem::path& path, std::string doc_id,
                       std::string language = {});

struct ManifestEntry {
  std::string pair_id;
  std::filesystem::path src_path;
  std::filesystem::path tgt_path;
  std::optional<std::filesystem::path> translation_path;
};

// Tab-separated rows: pair_id, src_path, tgt_path[, translation_path].
// Relative paths resolve against the manifest's directory. '#' starts a
// comment line.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path,
                    std::span<const ManifestEntry> entries);

DocumentPair load_pair(const ManifestEntry& entry);

// <prefix>.src, <prefix>.tgt and <prefix>.bounds.
void write_corpus(const std::filesystem::path& prefix, const Corpus& corpus);
Corpus read_corpus(const std::filesystem::path& prefix);

}  // namespace parmine

#endif  // PARMINE_CORPUS_H_
