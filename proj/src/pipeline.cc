#include "parmine/pipeline.h"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "parmine/analysis.h"
#include "parmine/cleaning.h"
#include "parmine/embeddings.h"
#include "parmine/error.h"
#include "parmine/parallel.h"
#include "parmine/server.h"
#include "parmine/splitbuilder.h"
#include "parmine/text.h"

namespace parmine {

namespace {

constexpr const char* kStampFile = ".stamp";

// SHA-256 over labelled fields and file contents.
class Fingerprint {
 public:
  Fingerprint() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
      throw Error("cannot initialise SHA-256");
    }
  }
  ~Fingerprint() { EVP_MD_CTX_free(ctx_); }
  Fingerprint(const Fingerprint&) = delete;
  Fingerprint& operator=(const Fingerprint&) = delete;

  void add(std::string_view key, std::string_view value) {
    feed(key);
    feed("=");
    const std::string len = std::to_string(value.size()) + ":";
    feed(len);
    feed(value);
    feed("\n");
  }

  void add_file(std::string_view key, const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      add(key, "<missing>");
      return;
    }
    feed(key);
    feed("@");
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
      feed(std::string_view(buf, static_cast<std::size_t>(in.gcount())));
    }
    feed("\n");
  }

  std::string hex() {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, digest, &len);
    static const char* kHex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += kHex[digest[i] >> 4];
      out += kHex[digest[i] & 15];
    }
    return out;
  }

 private:
  void feed(std::string_view data) {
    EVP_DigestUpdate(ctx_, data.data(), data.size());
  }

  EVP_MD_CTX* ctx_;
};

bool stamp_matches(const fs::path& dir, const std::string& digest) {
  std::ifstream in(dir / kStampFile);
  std::string stored;
  return in && std::getline(in, stored) && stored == digest;
}

void write_stamp(const fs::path& dir, const std::string& digest) {
  std::ofstream out(dir / kStampFile, std::ios::trunc);
  out << digest << '\n';
}

void require_file(const fs::path& path, const std::string& what) {
  if (!fs::is_regular_file(path)) {
    throw ConfigError(what + " not found: " + path.string());
  }
}

std::string format_fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string format_shortest(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

SimilarityMeasure make_measure(const AlignOptions& opts) {
  if (opts.measure == SimilarityMeasure::Kind::kMtBleu) {
    return SimilarityMeasure::mt_bleu(opts.bleu_order);
  }
  auto table = std::make_shared<const EmbeddingTable>(
      load_embeddings(*opts.embeddings));
  return opts.measure == SimilarityMeasure::Kind::kMtCosine
             ? SimilarityMeasure::mt_cosine(std::move(table))
             : SimilarityMeasure::raw_cosine(std::move(table));
}

TranslationProvider make_provider(const AlignOptions& opts) {
  switch (opts.translator) {
    case TranslatorMode::kIdentity:
      return TranslationProvider::identity();
    case TranslatorMode::kCommand:
      return TranslationProvider::external_command(opts.translate_command);
    case TranslatorMode::kSidecar:
      break;
  }
  return TranslationProvider::sidecar();
}

std::vector<ManifestEntry> align_entries(const AlignOptions& opts) {
  auto entries = read_manifest(opts.manifest);
  if (opts.translations_dir) {
    for (auto& e : entries) {
      e.translation_path = *opts.translations_dir / (e.pair_id + ".txt");
    }
  }
  return entries;
}

std::pair<std::string, int> parse_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) {
    throw ConfigError("serve address must be host:port, got " + address);
  }
  int port = 0;
  const std::string p = address.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), port);
  if (ec != std::errc() || ptr != p.data() + p.size() || port < 0 ||
      port > 65535) {
    throw ConfigError("bad port in " + address);
  }
  return {address.substr(0, colon), port};
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitValidation;
  if (dynamic_cast<const DataError*>(&e) ||
      dynamic_cast<const InvalidInput*>(&e)) {
    return kExitData;
  }
  return kExitInternal;
}

void validate(const CleanOptions& opts) {
  require_file(opts.manifest, "manifest");
  if (opts.meta_patterns) require_file(*opts.meta_patterns, "meta patterns");
  DetectorConfig(opts.n, opts.m, parse_profile(opts.lang_a),
                 parse_profile(opts.lang_b), opts.seed);
  if (!(opts.imbalance_factor > 1.0)) {
    throw ConfigError("imbalance factor must be greater than 1");
  }
  if (opts.out_dir.empty()) throw ConfigError("output directory not set");
}

void validate(const AlignOptions& opts, bool check_inputs) {
  if (check_inputs) require_file(opts.manifest, "manifest");
  opts.aligner.validate();
  if (opts.measure != SimilarityMeasure::Kind::kMtBleu) {
    if (!opts.embeddings) {
      throw ConfigError(to_string(opts.measure) + " needs --embeddings");
    }
    require_file(*opts.embeddings, "embeddings");
  }
  if (opts.bleu_order < 1) throw ConfigError("BLEU order must be at least 1");
  if (opts.translator == TranslatorMode::kCommand &&
      trim(opts.translate_command).empty()) {
    throw ConfigError("--translator command needs --translate-cmd");
  }
  if (opts.translations_dir && !fs::is_directory(*opts.translations_dir)) {
    throw ConfigError("translations directory not found: " +
                      opts.translations_dir->string());
  }
  const bool mt = opts.measure != SimilarityMeasure::Kind::kRawCosine;
  if (check_inputs && mt && opts.translator == TranslatorMode::kSidecar) {
    for (const auto& e : align_entries(opts)) {
      if (!e.translation_path) {
        throw ConfigError("pair " + e.pair_id +
                          " has no sidecar translation in " +
                          opts.manifest.string());
      }
      require_file(*e.translation_path, "sidecar translation");
    }
  }
  if (opts.out_dir.empty()) throw ConfigError("output directory not set");
}

void validate(const SplitOptions& opts, bool check_inputs) {
  SplitConfig{opts.volume_test, opts.ratio}.validate();
  if (check_inputs) {
    require_file(opts.alignments / "summary.tsv", "alignment summary");
  }
  if (opts.pin_manifest) require_file(*opts.pin_manifest, "pinned manifest");
  if (opts.mode == JudgeMode::kServe) parse_address(opts.serve_address);
  if (opts.static_dir && !fs::is_directory(*opts.static_dir)) {
    throw ConfigError("static directory not found: " +
                      opts.static_dir->string());
  }
  if (opts.out_dir.empty()) throw ConfigError("output directory not set");
}

StageResult run_clean(const CleanOptions& opts, std::ostream& log) {
  validate(opts);
  StageResult result;
  result.stage = "clean";
  const auto entries = read_manifest(opts.manifest);

  Fingerprint fp;
  fp.add("stage", "clean/1");
  fp.add("lang", opts.lang_a + "|" + opts.lang_b);
  fp.add("n,m,seed", std::to_string(opts.n) + "," + std::to_string(opts.m) +
                         "," + std::to_string(opts.seed));
  fp.add("imbalance", format_shortest(opts.imbalance_factor));
  if (opts.meta_patterns) fp.add_file("meta", *opts.meta_patterns);
  for (const auto& e : entries) {
    fp.add("pair", e.pair_id);
    fp.add_file("src", e.src_path);
    fp.add_file("tgt", e.tgt_path);
  }
  const std::string digest = fp.hex();
  if (stamp_matches(opts.out_dir, digest)) {
    result.up_to_date = true;
    result.summary = "up to date";
    return result;
  }

  CleaningConfig cfg{
      DetectorConfig(opts.n, opts.m, parse_profile(opts.lang_a),
                     parse_profile(opts.lang_b), opts.seed),
      SplitterConfig{},
      opts.meta_patterns ? load_meta_patterns(*opts.meta_patterns)
                         : default_meta_patterns(),
      opts.imbalance_factor};

  std::vector<CleanedPair> cleaned(entries.size());
  parallel_for(entries.size(), opts.jobs, [&](std::size_t i) {
    cleaned[i] =
        clean_pair(entries[i].pair_id, entries[i].src_path, entries[i].tgt_path, cfg);
  });

  fs::create_directories(opts.out_dir);
  CleaningReport total;
  std::vector<std::string> records;
  std::vector<ManifestEntry> kept;
  for (const auto& c : cleaned) {
    total += c.report;
    for (const auto& r : c.records) records.push_back(to_json_line(r));
    if (!c.kept()) continue;
    write_lines(opts.out_dir / (c.pair_id + ".src"), *c.source);
    write_lines(opts.out_dir / (c.pair_id + ".tgt"), *c.target);
    kept.push_back({c.pair_id, c.pair_id + ".src", c.pair_id + ".tgt", {}});
  }
  write_lines(opts.out_dir / "report.jsonl", records);
  write_manifest(opts.out_dir / "manifest.tsv", kept);

  std::ostringstream summary;
  summary << "kept " << total.pairs_kept << " of " << entries.size()
          << " pairs; normalized " << total.files_normalized
          << " files; dropped: " << total.decode_failures << " undecodable, "
          << total.language_mismatches << " language mismatches, "
          << total.no_punctuation_dropped << " without punctuation, "
          << total.imbalanced_dropped << " imbalanced; removed "
          << total.meta_tokens_removed << " meta tokens";
  result.summary = summary.str();
  log << "[clean] " << result.summary << "\n";
  write_stamp(opts.out_dir, digest);
  return result;
}

StageResult run_align(const AlignOptions& opts, std::ostream& log) {
  validate(opts);
  StageResult result;
  result.stage = "align";
  const auto entries = align_entries(opts);

  Fingerprint fp;
  fp.add("stage", "align/1");
  fp.add("measure", to_string(opts.measure));
  fp.add("th", format_shortest(opts.aligner.threshold));
  fp.add("k", format_shortest(opts.aligner.max_length_ratio));
  fp.add("band", opts.aligner.band_width
                     ? format_shortest(*opts.aligner.band_width)
                     : "none");
  fp.add("unit", opts.aligner.length_unit == LengthUnit::kTokens ? "tokens"
                                                                 : "chars");
  fp.add("bleu_order", std::to_string(opts.bleu_order));
  fp.add("translator", std::to_string(static_cast<int>(opts.translator)) +
                           "|" + opts.translate_command);
  if (opts.embeddings && opts.measure != SimilarityMeasure::Kind::kMtBleu) {
    fp.add_file("embeddings", *opts.embeddings);
  }
  for (const auto& e : entries) {
    fp.add("pair", e.pair_id);
    fp.add_file("src", e.src_path);
    fp.add_file("tgt", e.tgt_path);
    if (e.translation_path) fp.add_file("mt", *e.translation_path);
  }
  const std::string digest = fp.hex();
  if (stamp_matches(opts.out_dir, digest)) {
    result.up_to_date = true;
    result.summary = "up to date";
    return result;
  }

  const SimilarityMeasure measure = make_measure(opts);
  const TranslationProvider provider = make_provider(opts);
  const bool keep_translations =
      opts.translator == TranslatorMode::kCommand && measure.needs_translation();

  fs::create_directories(opts.out_dir);
  std::vector<AlignedDocument> docs(entries.size());
  parallel_for(entries.size(), opts.jobs, [&](std::size_t i) {
    ManifestEntry entry = entries[i];
    if (opts.translator != TranslatorMode::kSidecar) entry.translation_path.reset();
    DocumentPair pair = load_pair(entry);
    if (measure.needs_translation()) pair = provider.prepare(pair);
    if (keep_translations) {
      write_lines(opts.out_dir / "translations" / (pair.pair_id() + ".txt"),
                  *pair.translations());
    }
    const ScoreMatrix scores = score_matrix(pair, measure);
    docs[i] = make_aligned_document(pair, align(pair, scores, opts.aligner));
  });

  std::size_t matches = 0;
  for (const auto& d : docs) {
    write_alignment(opts.out_dir, d);
    matches += d.candidates.size();
  }
  write_summary(opts.out_dir, docs);

  result.summary = std::to_string(matches) + " sentence pairs from " +
                   std::to_string(docs.size()) + " document pairs";
  log << "[align] " << result.summary << "\n";
  write_stamp(opts.out_dir, digest);
  return result;
}

namespace {

std::string split_digest(const SplitOptions& opts, const fs::path& log_path,
                         const std::vector<AlignedDocument>& docs) {
  Fingerprint fp;
  fp.add("stage", "split/1");
  fp.add("volumes", std::to_string(opts.volume_test) + "," +
                        std::to_string(opts.volume_dev));
  fp.add("ratio", format_shortest(opts.ratio));
  if (opts.pin_manifest) fp.add_file("pinned", *opts.pin_manifest);
  fp.add_file("summary", opts.alignments / "summary.tsv");
  for (const auto& d : docs) fp.add_file(d.pair_id, opts.alignments / (d.pair_id + ".tsv"));
  if (!opts.pin_manifest) fp.add_file("log", log_path);
  return fp.hex();
}

std::string describe(const SplitManifest& m) {
  std::ostringstream out;
  out << "test " << m.test.documents << " docs / " << m.test.aligned_lines
      << " lines / " << m.test.deleted_lines << " deleted; dev "
      << m.dev.documents << " docs / " << m.dev.aligned_lines << " lines / "
      << m.dev.deleted_lines << " deleted; train " << m.train.documents
      << " docs / " << m.train.aligned_lines << " lines";
  return out.str();
}

}  // namespace

StageResult run_split(const SplitOptions& opts, std::istream& in,
                      std::ostream& out, std::ostream& log) {
  validate(opts);
  StageResult result;
  result.stage = "split";
  const fs::path log_path = opts.log ? *opts.log : opts.out_dir / "judgments.jsonl";
  auto ranked = rank_documents(read_alignments(opts.alignments));

  if (stamp_matches(opts.out_dir, split_digest(opts, log_path, ranked))) {
    result.up_to_date = true;
    result.summary = "up to date";
    return result;
  }
  fs::create_directories(opts.out_dir);

  if (opts.pin_manifest) {
    const SplitManifest pinned = read_manifest_json(*opts.pin_manifest);
    const SplitManifest m = retrain_split(ranked, pinned, opts.out_dir);
    result.summary = "retrain only: " + describe(m);
    log << "[split] " << result.summary << "\n";
    write_stamp(opts.out_dir, split_digest(opts, log_path, ranked));
    return result;
  }

  SplitSession session(std::move(ranked), {opts.volume_test, opts.ratio},
                       {opts.volume_dev, opts.ratio}, log_path);
  auto finish = [&] {
    const SplitManifest m = session.emit(opts.out_dir);
    for (const auto& w : m.warnings) log << "[split] warning: " << w << "\n";
    result.summary = describe(m);
    log << "[split] " << result.summary << "\n";
    write_stamp(opts.out_dir, split_digest(opts, log_path, session.ranked()));
  };

  switch (opts.mode) {
    case JudgeMode::kBatch:
      break;
    case JudgeMode::kInteractive:
      run_interactive(session, in, out, opts.annotator);
      break;
    case JudgeMode::kServe: {
      const auto [host, port] = parse_address(opts.serve_address);
      JudgmentServer server(session, opts.static_dir);
      std::atomic<bool> serving{true};
      std::jthread watcher([&] {
        bool emitted = false;
        while (serving) {
          if (!emitted && session.complete()) {
            finish();
            emitted = true;
            log << "[split] complete; outputs written, still serving\n";
          }
          std::this_thread::sleep_for(std::chrono::milliseconds(200));
        }
      });
      log << "[split] serving judgments on http://" << host << ":" << port
          << "\n";
      const bool ok = server.listen(host, port);
      serving = false;
      watcher.join();
      if (!ok) throw ConfigError("cannot listen on " + opts.serve_address);
      result.complete = session.complete();
      if (!result.complete) result.summary = "suspended";
      return result;
    }
  }

  if (!session.complete()) {
    result.complete = false;
    const SessionState st = session.state();
    result.summary = "suspended in " + to_string(st.phase) + " phase after " +
                     std::to_string(st.judged) + " judgments";
    log << "[split] " << result.summary << "\n";
    return result;
  }
  finish();
  return result;
}

std::string format_length_report(const std::vector<std::string>& names,
                                  const std::vector<const Corpus*>& corpora) {
  std::ostringstream out;
  out << "split\tside\tmean\tmedian\tstddev\n";
  for (std::size_t i = 0; i < corpora.size(); ++i) {
    for (Side side : {Side::kSource, Side::kTarget}) {
      out << names[i] << '\t' << (side == Side::kSource ? "source" : "target");
      if (corpora[i]->empty()) {
        out << "\t-\t-\t-\n";
        continue;
      }
      const LengthStats s = length_stats(*corpora[i], side);
      out << '\t' << format_fixed(s.mean, 1) << '\t' << format_fixed(s.median, 1)
          << '\t' << format_fixed(s.stddev, 1) << '\n';
    }
  }
  return out.str();
}

std::string format_matrix(const std::vector<std::string>& names,
                          const std::vector<std::vector<double>>& matrix) {
  std::ostringstream out;
  out << "LM\\corpus";
  for (const auto& n : names) out << '\t' << n;
  out << '\n';
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    out << names[i];
    for (double v : matrix[i]) out << '\t' << format_fixed(v, 3);
    out << '\n';
  }
  return out.str();
}

StageResult run_stats(const StatsOptions& opts, std::ostream& log) {
  StageResult result;
  result.stage = "stats";
  const std::vector<std::string> splits = {"test", "dev", "train"};
  Fingerprint fp;
  fp.add("stage", "stats/1");
  for (const auto& s : splits) {
    for (const char* ext : {".src", ".tgt", ".bounds"}) {
      fp.add_file(s + ext, opts.split_dir / (s + ext));
    }
  }
  const std::string digest = fp.hex();
  if (stamp_matches(opts.out_dir, digest)) {
    result.up_to_date = true;
    result.summary = "up to date";
    return result;
  }

  std::vector<Corpus> corpora;
  for (const auto& s : splits) corpora.push_back(read_corpus(opts.split_dir / s));
  std::vector<const Corpus*> ptrs;
  for (const auto& c : corpora) ptrs.push_back(&c);

  fs::create_directories(opts.out_dir);
  {
    std::ofstream out(opts.out_dir / "length.tsv", std::ios::binary | std::ios::trunc);
    out << format_length_report(splits, ptrs);
  }
  std::vector<std::string> names;
  std::vector<TokenizedCorpus> sides;
  for (std::size_t i = 0; i < corpora.size(); ++i) {
    if (corpora[i].empty()) continue;
    TokenizedCorpus tc;
    for (const auto& p : corpora[i].pairs()) tc.push_back(split_whitespace(p.tgt));
    names.push_back(splits[i]);
    sides.push_back(std::move(tc));
  }
  {
    std::ofstream out(opts.out_dir / "lm_similarity.tsv",
                      std::ios::binary | std::ios::trunc);
    out << format_matrix(names, lm_similarity_matrix(sides));
  }
  result.summary = "wrote length.tsv and lm_similarity.tsv";
  log << "[stats] " << result.summary << "\n";
  write_stamp(opts.out_dir, digest);
  return result;
}

std::map<std::string, std::string> read_config_file(const fs::path& path) {
  std::vector<std::string> lines;
  try {
    lines = read_lines(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  std::map<std::string, std::string> values;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(i + 1) +
                        ": expected key=value");
    }
    values[std::string(trim(line.substr(0, eq)))] =
        std::string(trim(line.substr(eq + 1)));
  }
  return values;
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || p != value.data() + value.size()) {
    throw ConfigError("bad value for " + key + ": '" + value + "'");
  }
  return out;
}

}  // namespace

PipelineConfig PipelineConfig::from_key_values(
    const std::map<std::string, std::string>& values, const fs::path& base_dir) {
  PipelineConfig cfg;
  auto path = [&](const std::string& v) {
    fs::path p(v);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };
  for (const auto& [key, value] : values) {
    if (key == "manifest") {
      cfg.clean.manifest = path(value);
    } else if (key == "out_dir") {
      cfg.out_dir = path(value);
    } else if (key == "meta_patterns") {
      cfg.clean.meta_patterns = path(value);
    } else if (key == "lang_a") {
      cfg.clean.lang_a = value;
    } else if (key == "lang_b") {
      cfg.clean.lang_b = value;
    } else if (key == "n") {
      cfg.clean.n = parse_number<std::size_t>(key, value);
    } else if (key == "m") {
      cfg.clean.m = parse_number<std::size_t>(key, value);
    } else if (key == "seed") {
      cfg.clean.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "imbalance_factor") {
      cfg.clean.imbalance_factor = parse_number<double>(key, value);
    } else if (key == "measure") {
      cfg.align.measure = parse_measure_kind(value);
    } else if (key == "embeddings") {
      cfg.align.embeddings = path(value);
    } else if (key == "th") {
      cfg.align.aligner.threshold = parse_number<double>(key, value);
    } else if (key == "k") {
      cfg.align.aligner.max_length_ratio = parse_number<double>(key, value);
    } else if (key == "band") {
      cfg.align.aligner.band_width = parse_number<double>(key, value);
    } else if (key == "length_unit") {
      if (value != "tokens" && value != "chars") {
        throw ConfigError("length_unit must be tokens or chars");
      }
      cfg.align.aligner.length_unit =
          value == "tokens" ? LengthUnit::kTokens : LengthUnit::kCharacters;
    } else if (key == "bleu_order") {
      cfg.align.bleu_order = parse_number<int>(key, value);
    } else if (key == "translator") {
      if (value == "sidecar") {
        cfg.align.translator = TranslatorMode::kSidecar;
      } else if (value == "identity") {
        cfg.align.translator = TranslatorMode::kIdentity;
      } else if (value == "command") {
        cfg.align.translator = TranslatorMode::kCommand;
      } else {
        throw ConfigError("translator must be sidecar, identity or command");
      }
    } else if (key == "translate_cmd") {
      // {config_dir} expands to base_dir so commands can use files next to
      // the config.
      std::string cmd = value;
      const std::string token = "{config_dir}";
      for (auto pos = cmd.find(token); pos != std::string::npos;
           pos = cmd.find(token, pos)) {
        cmd.replace(pos, token.size(), base_dir.string());
        pos += base_dir.string().size();
      }
      cfg.align.translate_command = cmd;
    } else if (key == "translations_dir") {
      cfg.align.translations_dir = path(value);
    } else if (key == "volume_test") {
      cfg.split.volume_test = parse_number<std::size_t>(key, value);
    } else if (key == "volume_dev") {
      cfg.split.volume_dev = parse_number<std::size_t>(key, value);
    } else if (key == "ratio") {
      cfg.split.ratio = parse_number<double>(key, value);
    } else if (key == "annotator") {
      cfg.split.annotator = value;
    } else if (key == "judge") {
      if (value == "interactive") {
        cfg.split.mode = JudgeMode::kInteractive;
      } else if (value == "batch") {
        cfg.split.mode = JudgeMode::kBatch;
      } else {
        throw ConfigError("judge must be interactive or batch");
      }
    } else if (key == "log") {
      cfg.split.log = path(value);
    } else if (key == "pin_manifest") {
      cfg.split.pin_manifest = path(value);
    } else if (key == "jobs") {
      cfg.clean.jobs = cfg.align.jobs = parse_number<std::size_t>(key, value);
    } else {
      throw ConfigError("unknown configuration key '" + key + "'");
    }
  }
  cfg.clean.out_dir = cfg.out_dir / "clean";
  cfg.align.manifest = cfg.clean.out_dir / "manifest.tsv";
  cfg.align.out_dir = cfg.out_dir / "align";
  cfg.split.alignments = cfg.align.out_dir;
  cfg.split.out_dir = cfg.out_dir / "split";
  cfg.stats.split_dir = cfg.split.out_dir;
  cfg.stats.out_dir = cfg.out_dir / "stats";
  return cfg;
}

void PipelineConfig::validate() const {
  if (out_dir.empty()) throw ConfigError("out_dir is required");
  parmine::validate(clean);
  parmine::validate(align, false);
  parmine::validate(split, false);
}

int run_pipeline(const PipelineConfig& cfg, std::istream& in, std::ostream& out,
                 std::ostream& log) {
  std::string stage = "config";
  try {
    cfg.validate();
    bool all_current = true;
    auto note = [&](const StageResult& r) {
      all_current = all_current && r.up_to_date;
      if (r.up_to_date) log << "[" << r.stage << "] up to date\n";
    };
    stage = "clean";
    note(run_clean(cfg.clean, log));
    stage = "align";
    note(run_align(cfg.align, log));
    stage = "split";
    const StageResult split = run_split(cfg.split, in, out, log);
    note(split);
    if (!split.complete) {
      log << "[pipeline] split suspended; rerun to continue judging\n";
      return kExitOk;
    }
    stage = "stats";
    note(run_stats(cfg.stats, log));
    if (all_current) log << "[pipeline] up to date\n";
    return kExitOk;
  } catch (const std::exception& e) {
    log << "error in " << stage << " stage: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace parmine
