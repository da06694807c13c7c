#include "parmine/similarity.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <unistd.h>

#include "parmine/error.h"
#include "parmine/text.h"

namespace parmine {

double sim_bleu(std::span<const std::string> translated_src,
                std::span<const std::string> tgt, int max_order) {
  if (max_order < 1) throw ConfigError("BLEU order must be at least 1");
  if (translated_src.empty() || tgt.empty()) return 0.0;

  std::vector<std::string> hyp, ref;
  hyp.reserve(translated_src.size());
  ref.reserve(tgt.size());
  for (const auto& t : translated_src) hyp.push_back(to_lower(t));
  for (const auto& t : tgt) ref.push_back(to_lower(t));

  auto count_ngrams = [](const std::vector<std::string>& tokens, int n) {
    std::map<std::vector<std::string>, std::size_t> counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      ++counts[std::vector<std::string>(tokens.begin() + i,
                                        tokens.begin() + i + n)];
    }
    return counts;
  };

  double log_sum = 0.0;
  for (int n = 1; n <= max_order; ++n) {
    const auto hyp_counts = count_ngrams(hyp, n);
    const auto ref_counts = count_ngrams(ref, n);
    std::size_t matches = 0;
    for (const auto& [gram, count] : hyp_counts) {
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matches += std::min(count, it->second);
    }
    const std::size_t total =
        hyp.size() >= static_cast<std::size_t>(n) ? hyp.size() - n + 1 : 0;
    double precision;
    if (n == 1) {
      if (matches == 0) return 0.0;
      precision = static_cast<double>(matches) / static_cast<double>(total);
    } else {
      precision = static_cast<double>(matches + 1) /
                  static_cast<double>(total + 1);
    }
    log_sum += std::log(precision);
  }
  const double brevity =
      std::min(1.0, std::exp(1.0 - static_cast<double>(ref.size()) /
                                       static_cast<double>(hyp.size())));
  return brevity * std::exp(log_sum / max_order);
}

TranslationProvider TranslationProvider::sidecar() {
  return TranslationProvider(Mode::kSidecar, {});
}

TranslationProvider TranslationProvider::identity() {
  return TranslationProvider(Mode::kIdentity, {});
}

TranslationProvider TranslationProvider::external_command(std::string command) {
  if (trim(command).empty()) {
    throw ConfigError("external translation command is empty");
  }
  return TranslationProvider(Mode::kExternalCommand, std::move(command));
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += '\'';
  return out;
}

std::vector<std::string> run_translator(const std::string& command,
                                        const DocumentPair& pair) {
  std::string input_path =
      (std::filesystem::temp_directory_path() / "parmine-mt-XXXXXX").string();
  const int fd = mkstemp(input_path.data());
  if (fd < 0) throw DataError("cannot create a temporary file for MT input");
  {
    std::string payload;
    for (const auto& s : pair.source().sentences()) {
      payload += s.text;
      payload += '\n';
    }
    const char* p = payload.data();
    std::size_t left = payload.size();
    while (left > 0) {
      const ssize_t n = ::write(fd, p, left);
      if (n <= 0) {
        ::close(fd);
        std::filesystem::remove(input_path);
        throw DataError("cannot write MT input for " + pair.pair_id());
      }
      p += n;
      left -= static_cast<std::size_t>(n);
    }
    ::close(fd);
  }

  const std::string full = "(" + command + ") < " + shell_quote(input_path);
  std::FILE* pipe = ::popen(full.c_str(), "r");
  if (!pipe) {
    std::filesystem::remove(input_path);
    throw DataError("cannot start translation command for " + pair.pair_id());
  }
  std::string output;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
  const int status = ::pclose(pipe);
  std::filesystem::remove(input_path);
  if (status != 0) {
    throw DataError("translation command failed for " + pair.pair_id() +
                    " (status " + std::to_string(status) + ")");
  }

  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < output.size()) {
    std::size_t nl = output.find('\n', start);
    if (nl == std::string::npos) nl = output.size();
    std::string line = output.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = nl + 1;
  }
  if (lines.size() != pair.source().size()) {
    throw DataError("translation command returned " +
                    std::to_string(lines.size()) + " lines for " +
                    std::to_string(pair.source().size()) +
                    " source sentences of " + pair.pair_id());
  }
  return lines;
}

}  // namespace

DocumentPair TranslationProvider::prepare(const DocumentPair& pair) const {
  switch (mode_) {
    case Mode::kSidecar:
      if (!pair.translations()) {
        throw DataError("pair " + pair.pair_id() +
                        " has no sidecar translation file");
      }
      return pair;
    case Mode::kIdentity:
      return pair.with_translations(pair.source().texts());
    case Mode::kExternalCommand:
      return pair.with_translations(run_translator(command_, pair));
  }
  return pair;
}

const std::string& TranslationProvider::translation_of(const DocumentPair& pair,
                                                       std::size_t i) {
  const auto& t = pair.translations();
  if (!t || i >= t->size()) {
    throw DataError("pair " + pair.pair_id() + ": no translation for line " +
                    std::to_string(i + 1) + " of " + pair.source().doc_id());
  }
  return (*t)[i];
}

double sim_emb(std::span<const std::string> translated_src_tokens,
               const Sentence& tgt, const EmbeddingTable& table) {
  const auto u = sentence_embedding(translated_src_tokens, table);
  const auto v = sentence_embedding(tgt.tokens, table);
  return cosine(u, v);
}

double sim_emb(const DocumentPair& pair, std::size_t src_index,
               std::size_t tgt_index, const EmbeddingTable& table) {
  const auto tokens =
      split_whitespace(TranslationProvider::translation_of(pair, src_index));
  return sim_emb(tokens, pair.target()[tgt_index], table);
}

SimilarityMeasure::SimilarityMeasure(Kind kind,
                                     std::shared_ptr<const EmbeddingTable> table,
                                     int bleu_order)
    : kind_(kind), table_(std::move(table)), bleu_order_(bleu_order) {
  if (kind_ != Kind::kMtBleu && !table_) {
    throw ConfigError("cosine measures need an embedding table");
  }
  if (bleu_order_ < 1) throw ConfigError("BLEU order must be at least 1");
}

SimilarityMeasure SimilarityMeasure::mt_bleu(int max_order) {
  return SimilarityMeasure(Kind::kMtBleu, nullptr, max_order);
}

SimilarityMeasure SimilarityMeasure::mt_cosine(
    std::shared_ptr<const EmbeddingTable> table) {
  return SimilarityMeasure(Kind::kMtCosine, std::move(table), 4);
}

SimilarityMeasure SimilarityMeasure::raw_cosine(
    std::shared_ptr<const EmbeddingTable> table) {
  return SimilarityMeasure(Kind::kRawCosine, std::move(table), 4);
}

double SimilarityMeasure::score(const DocumentPair& pair, std::size_t src_index,
                                std::size_t tgt_index) const {
  const Sentence& tgt = pair.target()[tgt_index];
  switch (kind_) {
    case Kind::kMtBleu: {
      const auto hyp = split_whitespace(
          TranslationProvider::translation_of(pair, src_index));
      return sim_bleu(hyp, tgt.tokens, bleu_order_);
    }
    case Kind::kMtCosine:
      return sim_emb(pair, src_index, tgt_index, *table_);
    case Kind::kRawCosine:
      return sim_emb(pair.source()[src_index].tokens, tgt, *table_);
  }
  return 0.0;
}

SimilarityMeasure::Kind parse_measure_kind(const std::string& name) {
  if (name == "mt-cosine") return SimilarityMeasure::Kind::kMtCosine;
  if (name == "mt-bleu") return SimilarityMeasure::Kind::kMtBleu;
  if (name == "raw-cosine") return SimilarityMeasure::Kind::kRawCosine;
  throw ConfigError("unknown measure '" + name +
                    "' (mt-cosine, mt-bleu or raw-cosine)");
}

std::string to_string(SimilarityMeasure::Kind kind) {
  switch (kind) {
    case SimilarityMeasure::Kind::kMtBleu:
      return "mt-bleu";
    case SimilarityMeasure::Kind::kMtCosine:
      return "mt-cosine";
    case SimilarityMeasure::Kind::kRawCosine:
      return "raw-cosine";
  }
  return "?";
}

ScoreMatrix score_matrix(const DocumentPair& pair,
                         const SimilarityMeasure& measure) {
  const std::size_t rows = pair.source().size();
  const std::size_t cols = pair.target().size();
  ScoreMatrix m(rows, cols);
  if (rows == 0 || cols == 0) return ScoreMatrix();

  std::vector<std::vector<std::string>> src_tokens(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    src_tokens[i] =
        measure.needs_translation()
            ? split_whitespace(TranslationProvider::translation_of(pair, i))
            : pair.source()[i].tokens;
  }

  if (measure.kind() == SimilarityMeasure::Kind::kMtBleu) {
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        m(i, j) = sim_bleu(src_tokens[i], pair.target()[j].tokens,
                           measure.bleu_order());
      }
    }
    return m;
  }

  const EmbeddingTable& table = *measure.table();
  std::vector<std::vector<double>> src_vecs(rows), tgt_vecs(cols);
  for (std::size_t i = 0; i < rows; ++i) {
    src_vecs[i] = sentence_embedding(src_tokens[i], table);
  }
  for (std::size_t j = 0; j < cols; ++j) {
    tgt_vecs[j] = sentence_embedding(pair.target()[j].tokens, table);
  }
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      m(i, j) = cosine(src_vecs[i], tgt_vecs[j]);
    }
  }
  return m;
}

}  // namespace parmine
