#include "parmine/cleaning.h"

#include <algorithm>
#include <charconv>
#include <random>

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "json.hpp"

#include "parmine/error.h"
#include "parmine/text.h"

namespace parmine {

std::string normalize_text(std::string_view raw) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfkc = icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(std::string("NFKC normalizer unavailable: ") +
                u_errorName(status));
  }
  icu::UnicodeString in = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  icu::UnicodeString out = nfkc->normalize(in, status);
  if (U_FAILURE(status)) {
    throw InvalidInput(std::string("NFKC normalization failed: ") +
                       u_errorName(status));
  }
  std::string result;
  out.toUTF8String(result);
  return result;
}

bool CharsetProfile::contains(char32_t c) const {
  for (const auto& r : ranges) {
    if (c >= r.first && c <= r.last) return true;
  }
  return false;
}

CharsetProfile english_profile() {
  return {"en", {{U'a', U'z'}, {U'A', U'Z'}}};
}

CharsetProfile japanese_profile() {
  return {"ja", {{0x3040, 0x309F}, {0x30A0, 0x30FF}}};
}

CharsetProfile parse_profile(std::string_view text) {
  if (text == "en") return english_profile();
  if (text == "ja") return japanese_profile();
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("unknown language profile '" + std::string(text) +
                      "' (use en, ja or label=XXXX-YYYY,...)");
  }
  CharsetProfile profile;
  profile.label = std::string(text.substr(0, eq));
  std::string_view rest = text.substr(eq + 1);
  auto parse_hex = [&](std::string_view h) {
    std::uint32_t v = 0;
    auto [p, ec] = std::from_chars(h.data(), h.data() + h.size(), v, 16);
    if (ec != std::errc() || p != h.data() + h.size() || v > 0x10FFFF) {
      throw ConfigError("bad code point '" + std::string(h) + "' in profile " +
                        profile.label);
    }
    return static_cast<char32_t>(v);
  };
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    std::string_view item = rest.substr(0, comma);
    const auto dash = item.find('-');
    CodepointRange range{};
    if (dash == std::string_view::npos) {
      range.first = range.last = parse_hex(item);
    } else {
      range.first = parse_hex(item.substr(0, dash));
      range.last = parse_hex(item.substr(dash + 1));
    }
    if (range.last < range.first) {
      throw ConfigError("empty code point range in profile " + profile.label);
    }
    profile.ranges.push_back(range);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (profile.ranges.empty()) {
    throw ConfigError("profile " + profile.label + " has no ranges");
  }
  return profile;
}

DetectorConfig::DetectorConfig(std::size_t n, std::size_t m,
                               CharsetProfile first, CharsetProfile second,
                               std::uint64_t seed)
    : n_(n), m_(m), first_(std::move(first)), second_(std::move(second)),
      seed_(seed) {
  if (n_ == 0 || m_ == 0 || m_ > n_) {
    throw ConfigError("detector thresholds need 0 < m <= n (got n=" +
                      std::to_string(n_) + ", m=" + std::to_string(m_) + ")");
  }
  if (first_.label == second_.label || first_.label == kNoiseLabel ||
      second_.label == kNoiseLabel) {
    throw ConfigError("detector profiles need two distinct labels");
  }
  for (const auto& a : first_.ranges) {
    for (const auto& b : second_.ranges) {
      if (a.first <= b.last && b.first <= a.last) {
        throw ConfigError("charsets of " + first_.label + " and " +
                          second_.label + " overlap");
      }
    }
  }
}

std::vector<std::size_t> sample_indices(std::size_t size, std::size_t n,
                                        std::uint64_t seed) {
  std::vector<std::size_t> idx(size);
  for (std::size_t i = 0; i < size; ++i) idx[i] = i;
  const std::size_t take = std::min(size, n);
  if (take == size) return idx;

  std::mt19937_64 engine(seed);
  auto bounded = [&](std::uint64_t k) {
    const std::uint64_t limit = -(-k % k);  // largest multiple of k, mod 2^64
    std::uint64_t r = engine();
    while (limit != 0 && r >= limit) r = engine();
    return r % k;
  };
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(bounded(size - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(take);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::string detect_language(const Document& doc, const DetectorConfig& cfg) {
  if (doc.empty()) {
    throw InvalidInput("language detection on empty document " + doc.doc_id());
  }
  std::size_t first_votes = 0;
  std::size_t second_votes = 0;
  for (std::size_t i : sample_indices(doc.size(), cfg.n(), cfg.seed())) {
    auto chars = decode_utf8(doc[i].text);
    if (!chars) {
      throw InvalidInput(doc.doc_id() + ": sentence " + std::to_string(i) +
                         " is not valid UTF-8");
    }
    std::size_t first_chars = 0;
    std::size_t second_chars = 0;
    for (char32_t c : *chars) {
      if (cfg.first().contains(c)) {
        ++first_chars;
      } else if (cfg.second().contains(c)) {
        ++second_chars;
      }
    }
    if (first_chars > second_chars) {
      ++first_votes;
    } else {
      ++second_votes;
    }
  }
  const std::size_t needed =
      doc.size() >= cfg.n() ? cfg.m()
                            : (cfg.m() * doc.size() + cfg.n() - 1) / cfg.n();
  if (first_votes >= needed) return cfg.first().label;
  if (second_votes >= needed) return cfg.second().label;
  return std::string(kNoiseLabel);
}

namespace {

bool ascii_space(char32_t c) {
  return c < 0x80 && is_space(static_cast<char>(c));
}

std::u32string decode_or_throw(std::string_view text) {
  auto chars = decode_utf8(text);
  if (!chars) throw InvalidInput("text is not valid UTF-8");
  return std::move(*chars);
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view paragraph,
                                         const SplitterConfig& cfg) {
  const std::u32string chars = decode_or_throw(paragraph);
  std::vector<std::string> out;
  auto flush = [&](std::size_t begin, std::size_t end) {
    std::string piece(trim(encode_utf8(
        std::u32string_view(chars).substr(begin, end - begin))));
    if (!piece.empty()) out.push_back(std::move(piece));
  };
  std::size_t start = 0;
  for (std::size_t i = 0; i < chars.size(); ++i) {
    if (cfg.marks.find(chars[i]) == std::u32string::npos) continue;
    if (i + 1 == chars.size() || ascii_space(chars[i + 1])) {
      flush(start, i + 1);
      start = i + 1;
    }
  }
  flush(start, chars.size());
  return out;
}

bool has_punctuation(std::string_view doc_text, const SplitterConfig& cfg) {
  const std::u32string chars = decode_or_throw(doc_text);
  return std::any_of(chars.begin(), chars.end(), [&](char32_t c) {
    return cfg.marks.find(c) != std::u32string::npos;
  });
}

MetaPattern MetaPattern::literal(std::string text) {
  if (text.empty()) throw ConfigError("empty meta-token pattern");
  MetaPattern p;
  p.source_ = std::move(text);
  return p;
}

MetaPattern MetaPattern::regex(std::string expression) {
  MetaPattern p;
  try {
    p.compiled_.emplace(expression, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw ConfigError("invalid meta-token regex '" + expression +
                      "': " + e.what());
  }
  p.source_ = std::move(expression);
  return p;
}

std::size_t MetaPattern::erase_all(std::string& text) const {
  std::size_t removed = 0;
  if (!compiled_) {
    std::size_t pos = 0;
    while ((pos = text.find(source_, pos)) != std::string::npos) {
      text.erase(pos, source_.size());
      ++removed;
    }
    return removed;
  }
  for (auto it = std::sregex_iterator(text.begin(), text.end(), *compiled_);
       it != std::sregex_iterator(); ++it) {
    if (it->length() > 0) ++removed;
  }
  if (removed > 0) text = std::regex_replace(text, *compiled_, "");
  return removed;
}

std::vector<MetaPattern> default_meta_patterns() {
  std::vector<MetaPattern> patterns;
  patterns.push_back(MetaPattern::literal("[Music]"));
  patterns.push_back(MetaPattern::literal("<<"));
  return patterns;
}

std::vector<MetaPattern> load_meta_patterns(const std::filesystem::path& path) {
  std::vector<MetaPattern> patterns;
  std::vector<std::string> lines;
  try {
    lines = read_lines(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  for (const auto& line : lines) {
    std::string_view entry = trim(line);
    if (entry.empty() || entry.front() == '#') continue;
    if (entry.starts_with("re:")) {
      patterns.push_back(MetaPattern::regex(std::string(entry.substr(3))));
    } else {
      patterns.push_back(MetaPattern::literal(std::string(entry)));
    }
  }
  return patterns;
}

std::string remove_meta_tokens(std::string_view sentence,
                               const std::vector<MetaPattern>& patterns,
                               std::size_t* removed) {
  std::string text(sentence);
  std::size_t count = 0;
  for (const auto& p : patterns) count += p.erase_all(text);
  if (removed) *removed = count;
  if (count == 0) return text;
  return collapse_whitespace(text);
}

Balance filter_imbalanced(std::size_t src_size, std::size_t tgt_size,
                          double factor) {
  if (src_size == 0 || tgt_size == 0) {
    throw InvalidInput("balance check on a pair with an empty side");
  }
  if (!(factor > 1.0)) {
    throw ConfigError("imbalance factor must be greater than 1");
  }
  const auto [lo, hi] = std::minmax(src_size, tgt_size);
  return static_cast<double>(hi) >= factor * static_cast<double>(lo)
             ? Balance::kDrop
             : Balance::kKeep;
}

Balance filter_imbalanced(const DocumentPair& pair, double factor) {
  return filter_imbalanced(pair.source().size(), pair.target().size(), factor);
}

CleaningReport& CleaningReport::operator+=(const CleaningReport& other) {
  files_normalized += other.files_normalized;
  decode_failures += other.decode_failures;
  language_mismatches += other.language_mismatches;
  no_punctuation_dropped += other.no_punctuation_dropped;
  meta_tokens_removed += other.meta_tokens_removed;
  imbalanced_dropped += other.imbalanced_dropped;
  pairs_kept += other.pairs_kept;
  return *this;
}

namespace {

struct SideState {
  std::filesystem::path path;
  std::vector<std::string> lines;  // normalized, non-blank
  std::vector<std::string> sentences;
};

}  // namespace

CleanedPair clean_pair(const std::string& pair_id,
                       const std::filesystem::path& src_path,
                       const std::filesystem::path& tgt_path,
                       const CleaningConfig& cfg) {
  CleanedPair result;
  result.pair_id = pair_id;
  auto record = [&](const std::filesystem::path& file, std::string step,
                    std::string outcome, std::string detail = {}) {
    result.records.push_back({pair_id, file.string(), std::move(step),
                              std::move(outcome), std::move(detail)});
  };

  SideState sides[2] = {{src_path, {}, {}}, {tgt_path, {}, {}}};

  // 1. encoding
  bool ok = true;
  for (auto& side : sides) {
    auto raw = read_lines(side.path);
    if (!raw.empty() && raw.front().starts_with("\xEF\xBB\xBF")) {
      raw.front().erase(0, 3);
    }
    std::size_t bad_line = 0;
    for (std::size_t i = 0; i < raw.size() && bad_line == 0; ++i) {
      if (!is_valid_utf8(raw[i])) bad_line = i + 1;
    }
    if (bad_line != 0) {
      ++result.report.decode_failures;
      record(side.path, "normalize", "dropped",
             "invalid UTF-8 at line " + std::to_string(bad_line));
      ok = false;
      continue;
    }
    for (const auto& line : raw) {
      std::string normalized = collapse_whitespace(normalize_text(line));
      if (!normalized.empty()) side.lines.push_back(std::move(normalized));
    }
    ++result.report.files_normalized;
    record(side.path, "normalize", "ok",
           std::to_string(side.lines.size()) + " lines");
    if (side.lines.empty()) {
      record(side.path, "normalize", "dropped", "no text");
      ok = false;
    }
  }
  if (!ok) return result;

  // 2. language
  const std::string expected[2] = {cfg.detector.first().label,
                                   cfg.detector.second().label};
  for (int s = 0; s < 2; ++s) {
    Document doc(pair_id, {}, sides[s].lines);
    const std::string label = detect_language(doc, cfg.detector);
    if (label != expected[s]) {
      ++result.report.language_mismatches;
      record(sides[s].path, "detect", "dropped",
             "detected " + label + ", expected " + expected[s]);
      ok = false;
    } else {
      record(sides[s].path, "detect", "ok", label);
    }
  }
  if (!ok) return result;

  // 3. sentences
  for (auto& side : sides) {
    bool punctuated = false;
    for (const auto& line : side.lines) {
      if (has_punctuation(line, cfg.splitter)) {
        punctuated = true;
        break;
      }
    }
    if (!punctuated) {
      ++result.report.no_punctuation_dropped;
      record(side.path, "split", "dropped", "no punctuation");
      ok = false;
      continue;
    }
    for (const auto& line : side.lines) {
      for (auto& s : split_sentences(line, cfg.splitter)) {
        side.sentences.push_back(std::move(s));
      }
    }
    record(side.path, "split", "ok",
           std::to_string(side.sentences.size()) + " sentences");
  }
  if (!ok) return result;

  // 4. meta tokens
  for (auto& side : sides) {
    std::size_t removed_here = 0;
    std::vector<std::string> kept;
    for (const auto& s : side.sentences) {
      std::size_t removed = 0;
      std::string cleaned = remove_meta_tokens(s, cfg.meta_patterns, &removed);
      removed_here += removed;
      if (!trim(cleaned).empty()) kept.push_back(std::move(cleaned));
    }
    side.sentences = std::move(kept);
    result.report.meta_tokens_removed += removed_here;
    record(side.path, "meta", "ok", std::to_string(removed_here) + " removed");
    if (side.sentences.empty()) {
      record(side.path, "meta", "dropped", "no sentences left");
      ok = false;
    }
  }
  if (!ok) return result;

  // 5. balance
  const std::size_t ns = sides[0].sentences.size();
  const std::size_t nt = sides[1].sentences.size();
  const std::string sizes = std::to_string(ns) + "/" + std::to_string(nt);
  if (filter_imbalanced(ns, nt, cfg.imbalance_factor) == Balance::kDrop) {
    ++result.report.imbalanced_dropped;
    record({}, "balance", "dropped", sizes);
    return result;
  }
  record({}, "balance", "ok", sizes);
  ++result.report.pairs_kept;
  result.source = std::move(sides[0].sentences);
  result.target = std::move(sides[1].sentences);
  return result;
}

std::string to_json_line(const StepRecord& r) {
  nlohmann::ordered_json j;
  j["pair_id"] = r.pair_id;
  j["file"] = r.file;
  j["step"] = r.step;
  j["outcome"] = r.outcome;
  j["detail"] = r.detail;
  return j.dump();
}

}  // namespace parmine
