#ifndef PARMINE_ANALYSIS_H_
#define PARMINE_ANALYSIS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace parmine {

using TokenizedCorpus = std::vector<std::vector<std::string>>;

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";
inline constexpr std::string_view kUnk = "<unk>";

class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  virtual int order() const = 0;
  // Natural-log probability of `word` after `history` (most recent last).
  // Words are compared after lowercasing.
  virtual double log_prob(std::span<const std::string> history,
                          const std::string& word) const = 0;
};

// Interpolated absolute discounting over lowercased tokens with <s>/</s>
// padding. Training words seen once collapse into <unk>.
class NGramLM : public LanguageModel {
 public:
  static constexpr int kDefaultOrder = 4;
  static constexpr double kDefaultDiscount = 0.75;

  int order() const override { return order_; }
  double discount() const { return discount_; }
  double log_prob(std::span<const std::string> history,
                  const std::string& word) const override;
  double prob(std::span<const std::string> history,
              const std::string& word) const;

  // Predictable symbols: vocabulary, </s> and <unk>.
  std::vector<std::string> vocabulary() const;
  std::size_t vocabulary_size() const { return words_.size() - 1; }

 private:
  friend NGramLM train_lm(const TokenizedCorpus&, int, double);

  using WordId = std::uint32_t;
  struct ContextStats {
    std::uint64_t total = 0;
    std::unordered_map<WordId, std::uint64_t> counts;
  };
  struct KeyHash {
    std::size_t operator()(const std::vector<WordId>& key) const;
  };

  WordId id_of(const std::string& word) const;
  double prob_ids(std::span<const WordId> history, WordId word) const;

  int order_ = kDefaultOrder;
  double discount_ = kDefaultDiscount;
  std::vector<std::string> words_;  // id -> word; id 0 is <s>
  std::unordered_map<std::string, WordId> ids_;
  WordId unk_ = 0;
  // tables_[k] holds contexts of length k (k = 0 is the unigram level).
  std::vector<std::unordered_map<std::vector<WordId>, ContextStats, KeyHash>>
      tables_;
};

// Throws InvalidInput on an empty corpus or bad order/discount.
NGramLM train_lm(const TokenizedCorpus& corpus,
                 int order = NGramLM::kDefaultOrder,
                 double discount = NGramLM::kDefaultDiscount);

// Sum of log P over every token and each sentence's </s>, divided by the
// number of real tokens.
double per_token_loglik(const LanguageModel& lm, const TokenizedCorpus& corpus);

// Row i, column j: model trained on corpus i scoring corpus j.
std::vector<std::vector<double>> lm_similarity_matrix(
    std::span<const TokenizedCorpus> corpora);

// One whitespace-tokenized sentence per line.
TokenizedCorpus read_tokenized(const std::string& path);

}  // namespace parmine

#endif  // PARMINE_ANALYSIS_H_
