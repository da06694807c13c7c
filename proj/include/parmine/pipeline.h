#ifndef PARMINE_PIPELINE_H_
#define PARMINE_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "parmine/aligner.h"
#include "parmine/corpus.h"
#include "parmine/similarity.h"

namespace parmine {

namespace fs = std::filesystem;

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

struct CleanOptions {
  fs::path manifest;
  fs::path out_dir;
  std::optional<fs::path> meta_patterns;
  std::string lang_a = "ja";
  std::string lang_b = "en";
  std::size_t n = 10;
  std::size_t m = 8;
  std::uint64_t seed = 1;
  double imbalance_factor = 2.0;
  std::size_t jobs = 1;
};

enum class TranslatorMode { kSidecar, kIdentity, kCommand };

struct AlignOptions {
  fs::path manifest;
  fs::path out_dir;
  SimilarityMeasure::Kind measure = SimilarityMeasure::Kind::kMtCosine;
  std::optional<fs::path> embeddings;
  AlignerConfig aligner;
  int bleu_order = 4;
  TranslatorMode translator = TranslatorMode::kSidecar;
  std::string translate_command;
  // Sidecars named <pair_id>.txt; overrides the manifest's column.
  std::optional<fs::path> translations_dir;
  std::size_t jobs = 1;
};

enum class JudgeMode { kInteractive, kServe, kBatch };

struct SplitOptions {
  fs::path alignments;
  fs::path out_dir;
  std::optional<fs::path> log;  // default <out_dir>/judgments.jsonl
  std::size_t volume_test = 2000;
  std::size_t volume_dev = 500;
  double ratio = 0.5;
  JudgeMode mode = JudgeMode::kInteractive;
  std::string annotator = "annotator";
  std::string serve_address = "127.0.0.1:8080";
  std::optional<fs::path> static_dir;
  // Retrain-only: test/dev come from this manifest, never re-assigned.
  std::optional<fs::path> pin_manifest;
};

struct StatsOptions {
  fs::path split_dir;
  fs::path out_dir;
};

struct StageResult {
  std::string stage;
  bool up_to_date = false;
  // Split stage only: false while judgments are still missing.
  bool complete = true;
  std::string summary;
};

StageResult run_clean(const CleanOptions& opts, std::ostream& log);
StageResult run_align(const AlignOptions& opts, std::ostream& log);
StageResult run_split(const SplitOptions& opts, std::istream& in,
                      std::ostream& out, std::ostream& log);
StageResult run_stats(const StatsOptions& opts, std::ostream& log);

// Validation performed before any stage does work. Throws ConfigError.
void validate(const CleanOptions& opts);
// check_inputs=false skips files an earlier pipeline stage will create.
void validate(const AlignOptions& opts, bool check_inputs = true);
void validate(const SplitOptions& opts, bool check_inputs = true);

// Tab-separated "split side mean median stddev" rows.
std::string format_length_report(const std::vector<std::string>& names,
                                  const std::vector<const Corpus*>& corpora);
// Square matrix with a header row, tab-separated, fixed precision.
std::string format_matrix(const std::vector<std::string>& names,
                          const std::vector<std::vector<double>>& matrix);

// 1 for ConfigError, 2 for data problems (DataError, InvalidInput),
// 3 for anything else.
int exit_code_for(const std::exception& e);

// Flat key=value file; '#' comments and blank lines ignored.
std::map<std::string, std::string> read_config_file(const fs::path& path);

struct PipelineConfig {
  CleanOptions clean;
  AlignOptions align;
  SplitOptions split;
  StatsOptions stats;
  fs::path out_dir;

  // Wires stage directories under out_dir: clean/, align/, split/, stats/.
  // Unknown keys are a ConfigError.
  // Relative paths resolve against base_dir; "{config_dir}" in
  // translate_cmd is replaced by it.
  static PipelineConfig from_key_values(
      const std::map<std::string, std::string>& values,
      const fs::path& base_dir = {});
  void validate() const;
};

// clean -> align -> split -> stats. Returns an exit code and prints a
// stage-qualified diagnostic on failure. A suspended split stops the
// pipeline with status 0 and a note on `log`.
int run_pipeline(const PipelineConfig& cfg, std::istream& in,
                 std::ostream& out, std::ostream& log);

}  // namespace parmine

#endif  // PARMINE_PIPELINE_H_
