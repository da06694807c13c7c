#include "parmine/analysis.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "parmine/corpus.h"
#include "parmine/error.h"
#include "parmine/text.h"

namespace parmine {

std::size_t NGramLM::KeyHash::operator()(const std::vector<WordId>& key) const {
  std::size_t h = 1469598103934665603ULL;
  for (WordId w : key) {
    h ^= w;
    h *= 1099511628211ULL;
  }
  return h;
}

NGramLM train_lm(const TokenizedCorpus& corpus, int order, double discount) {
  if (corpus.empty()) throw InvalidInput("cannot train a model on no text");
  if (order < 1) throw InvalidInput("model order must be positive");
  if (!(discount > 0.0 && discount < 1.0)) {
    throw InvalidInput("discount must be in (0, 1)");
  }

  std::map<std::string, std::size_t> freq;
  std::vector<std::vector<std::string>> lowered;
  lowered.reserve(corpus.size());
  for (const auto& sentence : corpus) {
    auto& out = lowered.emplace_back();
    out.reserve(sentence.size());
    for (const auto& token : sentence) {
      out.push_back(to_lower(token));
      ++freq[out.back()];
    }
  }

  NGramLM lm;
  lm.order_ = order;
  lm.discount_ = discount;
  lm.words_ = {std::string(kBos), std::string(kEos), std::string(kUnk)};
  for (const auto& [word, count] : freq) {
    if (count >= 2 && word != kBos && word != kEos && word != kUnk) {
      lm.words_.push_back(word);
    }
  }
  for (std::size_t id = 0; id < lm.words_.size(); ++id) {
    lm.ids_.emplace(lm.words_[id], static_cast<NGramLM::WordId>(id));
  }
  lm.unk_ = 2;
  lm.tables_.resize(order);

  std::vector<NGramLM::WordId> seq;
  for (const auto& sentence : lowered) {
    seq.assign(1, 0);
    for (const auto& token : sentence) seq.push_back(lm.id_of(token));
    seq.push_back(1);
    for (std::size_t t = 1; t < seq.size(); ++t) {
      for (std::size_t k = 0; k < static_cast<std::size_t>(order) && k <= t;
           ++k) {
        std::vector<NGramLM::WordId> ctx(seq.begin() + (t - k), seq.begin() + t);
        auto& stats = lm.tables_[k][std::move(ctx)];
        ++stats.counts[seq[t]];
        ++stats.total;
      }
    }
  }
  return lm;
}

NGramLM::WordId NGramLM::id_of(const std::string& word) const {
  auto it = ids_.find(word);
  return it == ids_.end() ? unk_ : it->second;
}

double NGramLM::prob_ids(std::span<const WordId> history, WordId word) const {
  const double uniform = 1.0 / static_cast<double>(vocabulary_size());
  double p = uniform;
  const std::size_t top =
      std::min<std::size_t>(history.size(), static_cast<std::size_t>(order_ - 1));
  for (std::size_t k = 0; k <= top; ++k) {
    std::vector<WordId> ctx(history.end() - k, history.end());
    auto it = tables_[k].find(ctx);
    if (it == tables_[k].end()) continue;
    const ContextStats& stats = it->second;
    auto c = stats.counts.find(word);
    const double count = c == stats.counts.end() ? 0.0 : static_cast<double>(c->second);
    const double total = static_cast<double>(stats.total);
    const double types = static_cast<double>(stats.counts.size());
    p = (std::max(count - discount_, 0.0) + discount_ * types * p) / total;
  }
  return p;
}

double NGramLM::prob(std::span<const std::string> history,
                     const std::string& word) const {
  const std::string lowered = to_lower(word);
  if (lowered == kBos) throw InvalidInput("<s> is never predicted");
  const std::size_t keep =
      std::min<std::size_t>(history.size(), static_cast<std::size_t>(order_ - 1));
  std::vector<WordId> ids;
  ids.reserve(keep);
  for (std::size_t i = history.size() - keep; i < history.size(); ++i) {
    ids.push_back(id_of(to_lower(history[i])));
  }
  return prob_ids(ids, id_of(lowered));
}

double NGramLM::log_prob(std::span<const std::string> history,
                         const std::string& word) const {
  return std::log(prob(history, word));
}

std::vector<std::string> NGramLM::vocabulary() const {
  return {words_.begin() + 1, words_.end()};
}

double per_token_loglik(const LanguageModel& lm, const TokenizedCorpus& corpus) {
  double total = 0.0;
  std::size_t tokens = 0;
  const std::string eos(kEos);
  std::vector<std::string> history;
  for (const auto& sentence : corpus) {
    history.assign(1, std::string(kBos));
    for (const auto& token : sentence) {
      total += lm.log_prob(history, token);
      history.push_back(token);
    }
    total += lm.log_prob(history, eos);
    tokens += sentence.size();
  }
  return tokens == 0 ? 0.0 : total / static_cast<double>(tokens);
}

std::vector<std::vector<double>> lm_similarity_matrix(
    std::span<const TokenizedCorpus> corpora) {
  std::vector<NGramLM> models;
  models.reserve(corpora.size());
  for (const auto& c : corpora) models.push_back(train_lm(c));
  std::vector<std::vector<double>> matrix(corpora.size(),
                                          std::vector<double>(corpora.size()));
  for (std::size_t i = 0; i < corpora.size(); ++i) {
    for (std::size_t j = 0; j < corpora.size(); ++j) {
      matrix[i][j] = per_token_loglik(models[i], corpora[j]);
    }
  }
  return matrix;
}

TokenizedCorpus read_tokenized(const std::string& path) {
  TokenizedCorpus corpus;
  for (const auto& line : read_lines(path)) {
    auto tokens = split_whitespace(line);
    if (!tokens.empty()) corpus.push_back(std::move(tokens));
  }
  return corpus;
}

}  // namespace parmine
