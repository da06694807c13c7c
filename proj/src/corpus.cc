#include "parmine/corpus.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "parmine/error.h"
#include "parmine/text.h"

namespace parmine {

namespace {

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

std::size_t parse_size(const std::string& field, const std::string& where) {
  std::size_t value = 0;
  auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw DataError(where + ": expected a non-negative integer, got '" +
                    field + "'");
  }
  return value;
}

void check_pair_id(const std::string& id, const std::string& where) {
  if (id.empty() || id.find_first_of("/\\\t") != std::string::npos ||
      id == "." || id == ".." || id == "summary") {
    throw DataError(where + ": invalid pair id '" + id + "'");
  }
}

}  // namespace

Sentence make_sentence(std::size_t index, std::string text) {
  if (trim(text).empty()) {
    throw InvalidInput("sentence " + std::to_string(index) + " is blank");
  }
  Sentence s;
  s.index = index;
  s.tokens = split_whitespace(text);
  s.text = std::move(text);
  return s;
}

Document::Document(std::string doc_id, std::string language,
                   const std::vector<std::string>& lines)
    : doc_id_(std::move(doc_id)), language_(std::move(language)) {
  sentences_.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    sentences_.push_back(make_sentence(i, lines[i]));
  }
}

std::vector<std::string> Document::texts() const {
  std::vector<std::string> out;
  out.reserve(sentences_.size());
  for (const auto& s : sentences_) out.push_back(s.text);
  return out;
}

DocumentPair::DocumentPair(std::string pair_id, Document source,
                           Document target,
                           std::optional<std::vector<std::string>> translations)
    : pair_id_(std::move(pair_id)),
      source_(std::move(source)),
      target_(std::move(target)),
      translations_(std::move(translations)) {
  if (translations_ && translations_->size() != source_.size()) {
    throw DataError("pair " + pair_id_ + ": " +
                    std::to_string(translations_->size()) +
                    " translations for " + std::to_string(source_.size()) +
                    " source sentences");
  }
}

DocumentPair DocumentPair::with_translations(
    std::vector<std::string> translations) const {
  return DocumentPair(pair_id_, source_, target_, std::move(translations));
}

AlignmentResult::AlignmentResult(std::string pair_id, std::vector<Match> matches)
    : pair_id_(std::move(pair_id)), matches_(std::move(matches)) {
  for (std::size_t k = 1; k < matches_.size(); ++k) {
    if (matches_[k].src_index <= matches_[k - 1].src_index ||
        matches_[k].tgt_index <= matches_[k - 1].tgt_index) {
      throw InvalidInput("alignment of " + pair_id_ + " is not monotonic");
    }
  }
  if (!matches_.empty()) avg_score_ = total_score() / matches_.size();
}

double AlignmentResult::total_score() const {
  double total = 0.0;
  for (const auto& m : matches_) total += m.score;
  return total;
}

Corpus::Corpus(std::string name, std::vector<SentencePair> pairs,
               std::vector<DocSpan> boundaries)
    : name_(std::move(name)),
      pairs_(std::move(pairs)),
      boundaries_(std::move(boundaries)) {
  std::size_t expected = 0;
  for (const auto& span : boundaries_) {
    if (span.start != expected || span.end < span.start) {
      throw InvalidInput("corpus " + name_ +
                         ": document boundaries are not contiguous at " +
                         span.pair_id);
    }
    expected = span.end;
  }
  if (expected != pairs_.size()) {
    throw InvalidInput("corpus " + name_ + ": boundaries cover " +
                       std::to_string(expected) + " of " +
                       std::to_string(pairs_.size()) + " pairs");
  }
}

Corpus Corpus::prefix(std::size_t count) const {
  count = std::min(count, pairs_.size());
  std::vector<SentencePair> pairs(pairs_.begin(), pairs_.begin() + count);
  std::vector<DocSpan> bounds;
  for (const auto& span : boundaries_) {
    if (span.start >= count && span.end > count) break;
    DocSpan clipped = span;
    clipped.end = std::min(span.end, count);
    bounds.push_back(std::move(clipped));
  }
  return Corpus(name_, std::move(pairs), std::move(bounds));
}

Corpus Corpus::concat(std::string name, std::span<const Corpus> parts) {
  std::size_t total = 0;
  for (const auto& c : parts) total += c.size();
  std::vector<SentencePair> pairs;
  pairs.reserve(total);
  std::vector<DocSpan> bounds;
  for (const auto& c : parts) {
    const std::size_t offset = pairs.size();
    pairs.insert(pairs.end(), c.pairs_.begin(), c.pairs_.end());
    for (const auto& span : c.boundaries_) {
      bounds.push_back({span.pair_id, span.start + offset, span.end + offset});
    }
  }
  return Corpus(std::move(name), std::move(pairs), std::move(bounds));
}

std::size_t oversampling_factor(std::size_t size, std::size_t max_size) {
  if (size == 0) throw InvalidInput("cannot oversample an empty corpus");
  return (max_size + size - 1) / size;
}

Corpus mix_corpora(std::span<const Corpus> corpora) {
  if (corpora.empty()) throw InvalidInput("mix_corpora: no corpora given");
  std::size_t max_size = 0;
  for (const auto& c : corpora) {
    if (c.empty()) {
      throw InvalidInput("mix_corpora: corpus '" + c.name() + "' is empty");
    }
    max_size = std::max(max_size, c.size());
  }
  if (corpora.size() == 1) return corpora.front();

  std::string name;
  std::vector<Corpus> parts;
  parts.reserve(corpora.size());
  for (const auto& c : corpora) {
    if (!name.empty()) name += '+';
    name += c.name();
    const std::size_t reps = oversampling_factor(c.size(), max_size);
    if (reps == 1) {
      parts.push_back(c);
      continue;
    }
    std::vector<Corpus> copies(reps, c);
    parts.push_back(Corpus::concat(c.name(), copies).prefix(max_size));
  }
  return Corpus::concat(std::move(name), parts);
}

LengthStats length_stats(std::span<const std::size_t> token_counts) {
  if (token_counts.empty()) {
    throw InvalidInput("length statistics of an empty corpus");
  }
  const double n = static_cast<double>(token_counts.size());
  double sum = 0.0;
  for (auto c : token_counts) sum += static_cast<double>(c);
  LengthStats stats;
  stats.mean = sum / n;
  double sq = 0.0;
  for (auto c : token_counts) {
    const double d = static_cast<double>(c) - stats.mean;
    sq += d * d;
  }
  stats.stddev = std::sqrt(sq / n);

  std::vector<std::size_t> sorted(token_counts.begin(), token_counts.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  stats.median = sorted.size() % 2 == 1
                     ? static_cast<double>(sorted[mid])
                     : (static_cast<double>(sorted[mid - 1]) +
                        static_cast<double>(sorted[mid])) / 2.0;
  return stats;
}

LengthStats length_stats(const Corpus& corpus, Side side) {
  std::vector<std::size_t> counts;
  counts.reserve(corpus.size());
  for (const auto& p : corpus.pairs()) {
    counts.push_back(
        split_whitespace(side == Side::kSource ? p.src : p.tgt).size());
  }
  return length_stats(counts);
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw DataError("error reading " + path.string());
  return lines;
}

void write_lines(const std::filesystem::path& path,
                 std::span<const std::string> lines) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& line : lines) out << line << '\n';
  if (!out) throw DataError("error writing " + path.string());
}

Document read_document(const std::filesystem::path& path, std::string doc_id,
                       std::string language) {
  auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!is_valid_utf8(lines[i])) {
      throw DataError(path.string() + ":" + std::to_string(i + 1) +
                      ": invalid UTF-8");
    }
    if (trim(lines[i]).empty()) {
      throw DataError(path.string() + ":" + std::to_string(i + 1) +
                      ": blank line in a sentence-per-line document");
    }
  }
  return Document(std::move(doc_id), std::move(language), lines);
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path q(p);
    return q.is_absolute() ? q : base / q;
  };
  std::vector<ManifestEntry> entries;
  auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    if (trim(lines[i]).empty() || lines[i].front() == '#') continue;
    auto fields = split_tabs(lines[i]);
    if (fields.size() < 3 || fields.size() > 4) {
      throw DataError(where + ": expected 3 or 4 tab-separated fields");
    }
    check_pair_id(fields[0], where);
    ManifestEntry e;
    e.pair_id = fields[0];
    e.src_path = resolve(fields[1]);
    e.tgt_path = resolve(fields[2]);
    if (fields.size() == 4 && !fields[3].empty()) {
      e.translation_path = resolve(fields[3]);
    }
    for (const auto& other : entries) {
      if (other.pair_id == e.pair_id) {
        throw DataError(where + ": duplicate pair id '" + e.pair_id + "'");
      }
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(const std::filesystem::path& path,
                    std::span<const ManifestEntry> entries) {
  std::vector<std::string> lines;
  for (const auto& e : entries) {
    std::string line =
        e.pair_id + '\t' + e.src_path.string() + '\t' + e.tgt_path.string();
    if (e.translation_path) line += '\t' + e.translation_path->string();
    lines.push_back(std::move(line));
  }
  write_lines(path, lines);
}

DocumentPair load_pair(const ManifestEntry& entry) {
  Document src = read_document(entry.src_path, entry.pair_id + ".src");
  Document tgt = read_document(entry.tgt_path, entry.pair_id + ".tgt");
  std::optional<std::vector<std::string>> translations;
  if (entry.translation_path) {
    translations = read_lines(*entry.translation_path);
    if (translations->size() != src.size()) {
      throw DataError("pair " + entry.pair_id + ": sidecar " +
                      entry.translation_path->string() + " has " +
                      std::to_string(translations->size()) + " lines for " +
                      std::to_string(src.size()) + " source sentences");
    }
  }
  return DocumentPair(entry.pair_id, std::move(src), std::move(tgt),
                      std::move(translations));
}

void write_corpus(const std::filesystem::path& prefix, const Corpus& corpus) {
  std::vector<std::string> src, tgt, bounds;
  src.reserve(corpus.size());
  tgt.reserve(corpus.size());
  for (const auto& p : corpus.pairs()) {
    src.push_back(p.src);
    tgt.push_back(p.tgt);
  }
  for (const auto& b : corpus.boundaries()) {
    bounds.push_back(b.pair_id + '\t' + std::to_string(b.start) + '\t' +
                     std::to_string(b.end));
  }
  auto with_ext = [&](const char* ext) {
    auto p = prefix;
    p += ext;
    return p;
  };
  write_lines(with_ext(".src"), src);
  write_lines(with_ext(".tgt"), tgt);
  write_lines(with_ext(".bounds"), bounds);
}

Corpus read_corpus(const std::filesystem::path& prefix) {
  auto with_ext = [&](const char* ext) {
    auto p = prefix;
    p += ext;
    return p;
  };
  auto src = read_lines(with_ext(".src"));
  auto tgt = read_lines(with_ext(".tgt"));
  if (src.size() != tgt.size()) {
    throw DataError("corpus " + prefix.string() + ": " +
                    std::to_string(src.size()) + " source vs " +
                    std::to_string(tgt.size()) + " target lines");
  }
  std::vector<SentencePair> pairs;
  pairs.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    pairs.push_back({std::move(src[i]), std::move(tgt[i])});
  }
  std::vector<DocSpan> bounds;
  const auto bounds_path = with_ext(".bounds");
  auto lines = read_lines(bounds_path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = bounds_path.string() + ":" + std::to_string(i + 1);
    auto f = split_tabs(lines[i]);
    if (f.size() != 3) throw DataError(where + ": expected 3 fields");
    bounds.push_back({f[0], parse_size(f[1], where), parse_size(f[2], where)});
  }
  try {
    return Corpus(prefix.filename().string(), std::move(pairs),
                  std::move(bounds));
  } catch (const InvalidInput& e) {
    throw DataError(e.what());
  }
}

}  // namespace parmine
