// parmine: mine parallel sentence pairs from lecture subtitles.
//
//   parmine clean  --manifest raw.tsv --out clean/
//   parmine align  --manifest clean/manifest.tsv --measure mt-bleu --out align/
//   parmine split  --alignments align/ --out split/ --interactive
//   parmine stats  length --corpus split/test
//   parmine run    --config pipeline.conf

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "parmine/analysis.h"
#include "parmine/corpus.h"
#include "parmine/error.h"
#include "parmine/pipeline.h"

#ifndef PARMINE_VERSION
#define PARMINE_VERSION "dev"
#endif

namespace {

using namespace parmine;

struct Flags {
  CleanOptions clean;
  AlignOptions align;
  SplitOptions split;
  StatsOptions stats;
  std::string measure = "mt-cosine";
  std::string length_unit = "tokens";
  std::string translator = "sidecar";
  std::string meta_patterns;
  std::string embeddings;
  std::string translations_dir;
  std::string log;
  std::string static_dir;
  std::string pin_manifest;
  std::string serve;
  bool interactive = false;
  bool batch = false;
  double band = -1.0;
  std::size_t jobs = 1;
  std::vector<std::string> lm_corpora;
  std::vector<std::string> length_corpora;
  std::string config;
  std::vector<std::string> overrides;
};

std::optional<fs::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

void add_clean(CLI::App& app, Flags& f) {
  auto* cmd = app.add_subcommand("clean", "Normalize, language-check and split raw subtitle pairs");
  cmd->add_option("--manifest", f.clean.manifest, "TSV: pair_id, source path, target path")->required();
  cmd->add_option("--out", f.clean.out_dir, "Output directory")->required();
  cmd->add_option("--meta-patterns", f.meta_patterns, "Meta-token pattern file (re: prefix for regex)");
  cmd->add_option("--lang-a", f.clean.lang_a, "Source charset profile")->capture_default_str();
  cmd->add_option("--lang-b", f.clean.lang_b, "Target charset profile")->capture_default_str();
  cmd->add_option("--n", f.clean.n, "Sentences sampled per document")->capture_default_str();
  cmd->add_option("--m", f.clean.m, "Votes needed for a label")->capture_default_str();
  cmd->add_option("--seed", f.clean.seed, "Sampling seed")->capture_default_str();
  cmd->add_option("--imbalance-factor", f.clean.imbalance_factor, "Drop pairs whose line counts differ by this factor")
      ->capture_default_str();
}

void add_align(CLI::App& app, Flags& f) {
  auto* cmd = app.add_subcommand("align", "Align sentences of cleaned document pairs");
  cmd->add_option("--manifest", f.align.manifest, "Cleaned manifest")->required();
  cmd->add_option("--out", f.align.out_dir, "Output directory")->required();
  cmd->add_option("--measure", f.measure, "mt-cosine | mt-bleu | raw-cosine")->capture_default_str();
  cmd->add_option("--embeddings", f.embeddings, "Word vectors, text format, optionally gzipped");
  cmd->add_option("--th", f.align.aligner.threshold, "Similarity threshold")->capture_default_str();
  cmd->add_option("--k", f.align.aligner.max_length_ratio, "Maximum length ratio")->capture_default_str();
  cmd->add_option("--band", f.band, "Diagonal band half-width");
  cmd->add_option("--length-unit", f.length_unit, "tokens | chars")->capture_default_str();
  cmd->add_option("--bleu-order", f.align.bleu_order, "Maximum n-gram order")->capture_default_str();
  cmd->add_option("--translator", f.translator, "sidecar | identity | command")->capture_default_str();
  cmd->add_option("--translate-cmd", f.align.translate_command, "Shell filter: source lines in, translations out");
  cmd->add_option("--translations", f.translations_dir, "Directory of <pair_id>.txt sidecar translations");
}

void add_split_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--alignments", f.split.alignments, "Alignment directory")->required();
  cmd->add_option("--out", f.split.out_dir, "Output directory")->required();
  cmd->add_option("--log", f.log, "Judgment log (default <out>/judgments.jsonl)");
  cmd->add_option("--volume-test", f.split.volume_test, "Test split volume")->capture_default_str();
  cmd->add_option("--volume-dev", f.split.volume_dev, "Dev split volume")->capture_default_str();
  cmd->add_option("--ratio", f.split.ratio, "Minimum share of good pairs per document")->capture_default_str();
  cmd->add_option("--annotator", f.split.annotator, "Annotator name")->capture_default_str();
  cmd->add_option("--static", f.static_dir, "Serve UI assets from this directory");
}

void add_split(CLI::App& app, Flags& f) {
  auto* cmd = app.add_subcommand("split", "Build test/dev/train splits from human judgments");
  add_split_flags(cmd, f);
  auto* serve = cmd->add_option("--serve", f.serve, "Serve the judgment API on host:port");
  auto* inter = cmd->add_flag("--interactive", f.interactive, "Judge on the terminal");
  auto* batch = cmd->add_flag("--batch", f.batch, "Only replay the log and emit if complete");
  auto* pin = cmd->add_option("--pin-manifest", f.pin_manifest, "Keep test/dev from this manifest");
  cmd->add_flag("--retrain-only", "Alias documenting --pin-manifest use")->needs(pin);
  serve->excludes(inter)->excludes(batch)->excludes(pin);
  inter->excludes(batch)->excludes(pin);
  batch->excludes(pin);

  auto* srv = app.add_subcommand("serve", "Same as split --serve");
  add_split_flags(srv, f);
  srv->add_option("--address", f.split.serve_address, "host:port")->capture_default_str();
}

void add_stats(CLI::App& app, Flags& f) {
  auto* cmd = app.add_subcommand("stats", "Corpus reports");
  cmd->require_subcommand(1);
  auto* len = cmd->add_subcommand("length", "Mean/median/s.d. sentence length per side");
  len->add_option("--corpus", f.length_corpora, "Corpus prefix (reads .src/.tgt/.bounds)")->required();
  auto* lm = cmd->add_subcommand("lm-similarity", "Per-token log-likelihood of each corpus under each corpus's LM");
  lm->add_option("--corpora", f.lm_corpora, "Tokenized text files")->required()->expected(1, -1);
  auto* split = cmd->add_subcommand("split", "Both reports over a split directory");
  split->add_option("--split-dir", f.stats.split_dir, "Output of split")->required();
  split->add_option("--out", f.stats.out_dir, "Output directory")->required();
}

void add_run(CLI::App& app, Flags& f) {
  auto* cmd = app.add_subcommand("run", "clean, align, split and stats from a config file");
  cmd->add_option("--config", f.config, "key=value file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--set", f.overrides, "Override a config key: key=value");
}

SimilarityMeasure::Kind measure_kind(const std::string& s) {
  return parse_measure_kind(s);
}

TranslatorMode translator_mode(const std::string& s) {
  if (s == "sidecar") return TranslatorMode::kSidecar;
  if (s == "identity") return TranslatorMode::kIdentity;
  if (s == "command") return TranslatorMode::kCommand;
  throw ConfigError("--translator must be sidecar, identity or command");
}

void print_result(const StageResult& r) {
  std::cout << r.stage << ": " << r.summary << "\n";
}

int dispatch(CLI::App& app, Flags& f) {
  if (app.got_subcommand("clean")) {
    f.clean.meta_patterns = opt_path(f.meta_patterns);
    f.clean.jobs = f.jobs;
    print_result(run_clean(f.clean, std::cerr));
    return kExitOk;
  }
  if (app.got_subcommand("align")) {
    f.align.measure = measure_kind(f.measure);
    f.align.embeddings = opt_path(f.embeddings);
    f.align.translations_dir = opt_path(f.translations_dir);
    f.align.translator = translator_mode(f.translator);
    if (f.band >= 0) f.align.aligner.band_width = f.band;
    if (f.length_unit != "tokens" && f.length_unit != "chars") {
      throw ConfigError("--length-unit must be tokens or chars");
    }
    f.align.aligner.length_unit =
        f.length_unit == "tokens" ? LengthUnit::kTokens : LengthUnit::kCharacters;
    f.align.jobs = f.jobs;
    print_result(run_align(f.align, std::cerr));
    return kExitOk;
  }
  if (app.got_subcommand("split") || app.got_subcommand("serve")) {
    f.split.log = opt_path(f.log);
    f.split.static_dir = opt_path(f.static_dir);
    f.split.pin_manifest = opt_path(f.pin_manifest);
    if (app.got_subcommand("serve")) {
      f.split.mode = JudgeMode::kServe;
    } else if (!f.serve.empty()) {
      f.split.mode = JudgeMode::kServe;
      f.split.serve_address = f.serve;
    } else if (f.batch) {
      f.split.mode = JudgeMode::kBatch;
    } else {
      f.split.mode = JudgeMode::kInteractive;
    }
    print_result(run_split(f.split, std::cin, std::cout, std::cerr));
    return kExitOk;
  }
  if (auto* stats = app.get_subcommand("stats"); stats->parsed()) {
    if (stats->got_subcommand("length")) {
      std::vector<Corpus> corpora;
      std::vector<std::string> names;
      for (const auto& p : f.length_corpora) {
        corpora.push_back(read_corpus(p));
        names.push_back(fs::path(p).filename().string());
      }
      std::vector<const Corpus*> ptrs;
      for (const auto& c : corpora) ptrs.push_back(&c);
      std::cout << format_length_report(names, ptrs);
    } else if (stats->got_subcommand("lm-similarity")) {
      std::vector<TokenizedCorpus> corpora;
      std::vector<std::string> names;
      for (const auto& p : f.lm_corpora) {
        corpora.push_back(read_tokenized(p));
        names.push_back(fs::path(p).filename().string());
      }
      std::cout << format_matrix(names, lm_similarity_matrix(corpora));
    } else {
      print_result(run_stats(f.stats, std::cerr));
    }
    return kExitOk;
  }
  if (app.got_subcommand("run")) {
    auto values = read_config_file(f.config);
    for (const auto& o : f.overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got " + o);
      values[o.substr(0, eq)] = o.substr(eq + 1);
    }
    if (!values.count("jobs")) values["jobs"] = std::to_string(f.jobs);
    const auto cfg = PipelineConfig::from_key_values(
        values, fs::absolute(f.config).parent_path());
    return run_pipeline(cfg, std::cin, std::cout, std::cerr);
  }
  std::cerr << app.help();
  return kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mine parallel sentence pairs from lecture subtitles"};
  app.set_version_flag("--version", std::string("parmine ") + PARMINE_VERSION);
  app.require_subcommand(1);
  Flags flags;
  app.add_option("--jobs", flags.jobs, "Worker threads per stage")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  add_clean(app, flags);
  add_align(app, flags);
  add_split(app, flags);
  add_stats(app, flags);
  add_run(app, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    return dispatch(app, flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}
