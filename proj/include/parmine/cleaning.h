#ifndef PARMINE_CLEANING_H_
#define PARMINE_CLEANING_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "parmine/corpus.h"

namespace parmine {

// NFKC normalization. Input must be valid UTF-8.
std::string normalize_text(std::string_view raw);

struct CodepointRange {
  char32_t first;
  char32_t last;  // inclusive
};

struct CharsetProfile {
  std::string label;
  std::vector<CodepointRange> ranges;

  bool contains(char32_t c) const;
};

// a-z and A-Z.
CharsetProfile english_profile();
// Hiragana and katakana blocks.
CharsetProfile japanese_profile();

// "en", "ja", or a custom "label=XXXX-YYYY,ZZZZ" (hex code points).
CharsetProfile parse_profile(std::string_view text);

inline constexpr std::string_view kNoiseLabel = "Noise";

class DetectorConfig {
 public:
  // Throws ConfigError when 0 < m <= n fails or the charsets overlap.
  DetectorConfig(std::size_t n, std::size_t m, CharsetProfile first,
                 CharsetProfile second, std::uint64_t seed);

  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  const CharsetProfile& first() const { return first_; }
  const CharsetProfile& second() const { return second_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::size_t n_;
  std::size_t m_;
  CharsetProfile first_;
  CharsetProfile second_;
  std::uint64_t seed_;
};

// Picks min(n, size) distinct indices from [0, size). Partial Fisher-Yates
// over an mt19937_64 stream, bounded draws by rejection, so the result only
// depends on the seed.
std::vector<std::size_t> sample_indices(std::size_t size, std::size_t n,
                                        std::uint64_t seed);

// Majority-vote detector over sampled sentences. Each sentence goes to the
// first profile only if it has strictly more of its characters than of the
// second profile's; ties go to the second. Returns a profile label or
// kNoiseLabel. For documents shorter than n the vote threshold scales to
// ceil(m * size / n).
std::string detect_language(const Document& doc, const DetectorConfig& cfg);

struct SplitterConfig {
  // Sentence-final marks. Default: . ! ? 。 ． ！ ？
  std::u32string marks = U".!?。．！？";
};

// Breaks after a mark that is followed by whitespace or the end of text.
// Marks stay with their sentence; segments are trimmed, empty ones dropped.
std::vector<std::string> split_sentences(std::string_view paragraph,
                                         const SplitterConfig& cfg = {});

bool has_punctuation(std::string_view doc_text,
                     const SplitterConfig& cfg = {});

class MetaPattern {
 public:
  static MetaPattern literal(std::string text);
  // Throws ConfigError on a malformed expression.
  static MetaPattern regex(std::string expression);

  const std::string& source() const { return source_; }
  bool is_regex() const { return compiled_.has_value(); }

  // Removes every occurrence; returns how many were removed.
  std::size_t erase_all(std::string& text) const;

 private:
  std::string source_;
  std::optional<std::regex> compiled_;
};

// "[Music]" and "<<".
std::vector<MetaPattern> default_meta_patterns();

// One pattern per line. "re:" prefix marks a regex, anything else is
// literal; blank lines and lines starting with '#' are ignored.
std::vector<MetaPattern> load_meta_patterns(const std::filesystem::path& path);

std::string remove_meta_tokens(std::string_view sentence,
                               const std::vector<MetaPattern>& patterns,
                               std::size_t* removed = nullptr);

enum class Balance { kKeep, kDrop };

// Drop when the larger side has factor times the sentences of the smaller
// side or more.
Balance filter_imbalanced(const DocumentPair& pair, double factor = 2.0);
Balance filter_imbalanced(std::size_t src_size, std::size_t tgt_size,
                          double factor = 2.0);

struct CleaningReport {
  std::size_t files_normalized = 0;
  std::size_t decode_failures = 0;
  std::size_t language_mismatches = 0;
  std::size_t no_punctuation_dropped = 0;
  std::size_t meta_tokens_removed = 0;
  std::size_t imbalanced_dropped = 0;
  std::size_t pairs_kept = 0;

  CleaningReport& operator+=(const CleaningReport& other);
  bool operator==(const CleaningReport&) const = default;
};

struct CleaningConfig {
  DetectorConfig detector;
  SplitterConfig splitter;
  std::vector<MetaPattern> meta_patterns;
  double imbalance_factor = 2.0;
};

// One record per step per file, written as a JSON line.
struct StepRecord {
  std::string pair_id;
  std::string file;
  std::string step;     // normalize|detect|split|meta|balance
  std::string outcome;  // ok|dropped|...
  std::string detail;
};

struct CleanedPair {
  std::string pair_id;
  // Set when the pair survived every step.
  std::optional<std::vector<std::string>> source;
  std::optional<std::vector<std::string>> target;
  CleaningReport report;
  std::vector<StepRecord> records;

  bool kept() const { return source.has_value(); }
};

// Runs the five steps on a pair of raw files: encoding normalization,
// language check (source must detect as the first profile, target as the
// second), sentence splitting with the no-punctuation filter, meta-token
// removal and the balance filter.
CleanedPair clean_pair(const std::string& pair_id,
                       const std::filesystem::path& src_path,
                       const std::filesystem::path& tgt_path,
                       const CleaningConfig& cfg);

std::string to_json_line(const StepRecord& record);

}  // namespace parmine

#endif  // PARMINE_CLEANING_H_
