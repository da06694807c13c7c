#include <random>
#include <set>

#include "doctest.h"
#include "json.hpp"
#include "parmine/cleaning.h"
#include "parmine/error.h"
#include "parmine/text.h"
#include "support.h"

using namespace parmine;
using parmine::testing::TempDir;
using parmine::testing::doc_of;
using parmine::testing::pair_of;
using parmine::testing::write_file;

namespace {

DetectorConfig en_ja(std::size_t n = 10, std::size_t m = 8, std::uint64_t seed = 7) {
  return DetectorConfig(n, m, english_profile(), japanese_profile(), seed);
}

std::vector<std::string> repeat(const std::string& s, std::size_t k) {
  return std::vector<std::string>(k, s);
}

std::string remove_spaces(std::string s) {
  std::erase_if(s, [](char c) { return is_space(c); });
  return s;
}

// Random text over letters, spaces and sentence marks, some full-width.
std::string random_paragraph(std::mt19937_64& rng) {
  static const std::vector<std::string> atoms = {
      "a", "b", "z", " ", " ", "  ", ".", "!", "?", "。", "！", "？", "．", "か", "e.g"};
  std::string out;
  const std::size_t len = rng() % 30;
  for (std::size_t i = 0; i < len; ++i) out += atoms[rng() % atoms.size()];
  return out;
}

}  // namespace

TEST_CASE("normalize_text examples") {
  CHECK(normalize_text("abc") == "abc");
  CHECK(normalize_text("\xEF\xBC\xA6") == "F");         // full-width F
  CHECK(normalize_text("\xEF\xBD\xB6") == "\xE3\x82\xAB");  // half-width ka
  CHECK(normalize_text("ｶﾞ") == "ガ");
  CHECK(normalize_text("①") == "1");
}

TEST_CASE("normalize_text is idempotent") {
  const std::vector<std::string> samples = {
      "ＡＢＣ１２３", "ﾃｽﾄ", "ﬁ ligature", "e\xCC\x81", "㍻", "Ⅻ", "plain", ""};
  for (const auto& s : samples) {
    const std::string once = normalize_text(s);
    CHECK(normalize_text(once) == once);
  }
  std::mt19937_64 rng(3);
  for (int t = 0; t < 300; ++t) {
    std::u32string text;
    const std::size_t len = rng() % 12;
    for (std::size_t i = 0; i < len; ++i) {
      // Mix of ASCII, Latin-1, half-width katakana and compatibility forms.
      static const char32_t pools[][2] = {
          {0x20, 0x7e}, {0xc0, 0xff}, {0xff61, 0xff9f}, {0xff01, 0xff5e}, {0x3300, 0x33ff}};
      const auto& p = pools[rng() % 5];
      text.push_back(static_cast<char32_t>(p[0] + rng() % (p[1] - p[0] + 1)));
    }
    const std::string once = normalize_text(encode_utf8(text));
    CHECK(normalize_text(once) == once);
  }
}

TEST_CASE("charset profiles") {
  const auto en = english_profile();
  CHECK(en.label == "en");
  CHECK(en.contains(U'a'));
  CHECK(en.contains(U'Z'));
  CHECK_FALSE(en.contains(U'1'));
  CHECK_FALSE(en.contains(U'é'));
  const auto ja = japanese_profile();
  CHECK(ja.contains(U'か'));
  CHECK(ja.contains(U'カ'));
  CHECK_FALSE(ja.contains(U'漢'));

  const auto custom = parse_profile("ru=0410-044F,0401");
  CHECK(custom.label == "ru");
  CHECK(custom.contains(U'Ж'));
  CHECK(custom.contains(U'Ё'));
  CHECK_FALSE(custom.contains(U'a'));
  CHECK(parse_profile("ja").label == "ja");
  CHECK_THROWS_AS(parse_profile("xx"), ConfigError);
  CHECK_THROWS_AS(parse_profile("xx=zz"), ConfigError);
  CHECK_THROWS_AS(parse_profile("xx=0050-0040"), ConfigError);
}

TEST_CASE("detector config validation") {
  CHECK_THROWS_AS(en_ja(10, 11), ConfigError);
  CHECK_THROWS_AS(en_ja(10, 0), ConfigError);
  CHECK_THROWS_AS(DetectorConfig(10, 8, english_profile(), english_profile(), 1),
                  ConfigError);
  CHECK_THROWS_AS(
      DetectorConfig(10, 8, english_profile(), parse_profile("xx=0061-0062"), 1),
      ConfigError);
}

TEST_CASE("sample_indices") {
  CHECK(sample_indices(5, 10, 1) == std::vector<std::size_t>{0, 1, 2, 3, 4});
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const std::size_t size = 1 + rng() % 50, n = 1 + rng() % 20;
    const std::uint64_t seed = rng();
    const auto a = sample_indices(size, n, seed);
    CHECK(a == sample_indices(size, n, seed));
    CHECK(a.size() == std::min(size, n));
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i] < size);
      if (i > 0) CHECK(a[i - 1] < a[i]);
    }
  }
  // Different seeds do not all pick the same subset.
  std::set<std::vector<std::size_t>> seen;
  for (std::uint64_t s = 0; s < 20; ++s) seen.insert(sample_indices(100, 10, s));
  CHECK(seen.size() > 1);
}

TEST_CASE("detect_language traces") {
  const auto cfg = en_ja();
  CHECK(detect_language(doc_of(repeat("the quick brown fox jumps", 10)), cfg) == "en");

  std::vector<std::string> mixed = repeat("this is english text", 5);
  for (const auto& s : repeat("これはにほんごのテキスト", 5)) mixed.push_back(s);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CHECK(detect_language(doc_of(mixed), en_ja(10, 8, seed)) == kNoiseLabel);
  }
  CHECK(detect_language(doc_of(repeat("ひらがなとカタカナ", 12)), cfg) == "ja");
  CHECK_THROWS_AS(detect_language(Document(), cfg), InvalidInput);
}

TEST_CASE("detect_language ties go to the second profile") {
  // Equal counts of a-z and kana, and sentences with neither.
  CHECK(detect_language(doc_of(repeat("ab かな", 10)), en_ja()) == "ja");
  CHECK(detect_language(doc_of(repeat("123 ...", 10)), en_ja()) == "ja");
  const DetectorConfig swapped(10, 8, japanese_profile(), english_profile(), 7);
  CHECK(detect_language(doc_of(repeat("ab かな", 10)), swapped) == "en");
}

TEST_CASE("detect_language on short documents scales the threshold") {
  // 5 sentences, n=10, m=8: threshold ceil(8*5/10) = 4.
  std::vector<std::string> four_en = repeat("english words", 4);
  four_en.push_back("にほんご");
  CHECK(detect_language(doc_of(four_en), en_ja()) == "en");
  std::vector<std::string> three_en = repeat("english words", 3);
  three_en.push_back("にほんご");
  three_en.push_back("にほんご");
  CHECK(detect_language(doc_of(three_en), en_ja()) == kNoiseLabel);
  // 3 sentences: ceil(8*3/10) = 3.
  CHECK(detect_language(doc_of({"a b", "c d", "かな"}), en_ja()) == kNoiseLabel);
}

TEST_CASE("detect_language is deterministic for a seed") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::string> lines;
    const std::size_t size = 1 + rng() % 40;
    for (std::size_t i = 0; i < size; ++i) {
      lines.push_back(rng() % 3 == 0 ? "かなのぶん" : "latin words");
    }
    const auto cfg = en_ja(10, 8, rng());
    const auto first = detect_language(doc_of(lines), cfg);
    CHECK(detect_language(doc_of(lines), cfg) == first);
  }
}

TEST_CASE("split_sentences examples") {
  CHECK(split_sentences("Hello world. How are you?") ==
        std::vector<std::string>{"Hello world.", "How are you?"});
  CHECK(split_sentences("e.g.x continues") == std::vector<std::string>{"e.g.x continues"});
  CHECK(split_sentences("").empty());
  CHECK(split_sentences("   ").empty());
  CHECK(split_sentences("Wow! Really?  Yes.") ==
        std::vector<std::string>{"Wow!", "Really?", "Yes."});
  CHECK(split_sentences("はい。 いいえ！") == std::vector<std::string>{"はい。", "いいえ！"});
  CHECK(split_sentences("はい。いいえ。") == std::vector<std::string>{"はい。いいえ。"});
  CHECK(split_sentences("3.14 is pi.") == std::vector<std::string>{"3.14 is pi."});
  SplitterConfig only_bang{U"!"};
  CHECK(split_sentences("a. b! c", only_bang) == std::vector<std::string>{"a. b!", "c"});
}

TEST_CASE("split_sentences loses only whitespace") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 500; ++t) {
    const std::string p = random_paragraph(rng);
    const auto parts = split_sentences(p);
    std::string joined;
    for (const auto& s : parts) {
      CHECK_FALSE(s.empty());
      CHECK(trim(s) == s);
      joined += s + " ";
    }
    CHECK(remove_spaces(joined) == remove_spaces(p));
  }
}

TEST_CASE("has_punctuation") {
  CHECK_FALSE(has_punctuation("no marks here"));
  CHECK(has_punctuation("one mark."));
  CHECK(has_punctuation("日本語。"));
  CHECK(has_punctuation("ｔｅｓｔ？"));
  CHECK_FALSE(has_punctuation("so um yeah and then we go on to the next slide"));
}

TEST_CASE("remove_meta_tokens") {
  const auto pats = default_meta_patterns();
  CHECK(remove_meta_tokens("[Music] welcome back", pats) == "welcome back");
  CHECK(remove_meta_tokens("<< so today", pats) == "so today");
  CHECK(remove_meta_tokens("no meta here", pats) == "no meta here");
  std::size_t removed = 0;
  CHECK(remove_meta_tokens("a [Music] b << c", pats, &removed) == "a b c");
  CHECK(removed == 2);
  CHECK(remove_meta_tokens("[Music]", pats).empty());
  // Untouched sentences keep their spacing.
  CHECK(remove_meta_tokens("keep  two", pats) == "keep  two");

  const auto re = MetaPattern::regex(R"(\[[A-Za-z ]+\])");
  CHECK(re.is_regex());
  CHECK(remove_meta_tokens("[Applause] thanks [Laughter]", {re}) == "thanks");
  CHECK_THROWS_AS(MetaPattern::regex("(unclosed"), ConfigError);
  CHECK_THROWS_AS(MetaPattern::literal(""), ConfigError);
}

TEST_CASE("meta pattern files") {
  TempDir dir;
  write_file(dir / "meta.txt", "# comment\n[Music]\n\nre:\\(.*?\\)\n<<\n");
  const auto pats = load_meta_patterns(dir / "meta.txt");
  REQUIRE(pats.size() == 3);
  CHECK_FALSE(pats[0].is_regex());
  CHECK(pats[1].is_regex());
  CHECK(remove_meta_tokens("(laughs) ok [Music]", pats) == "ok");
  write_file(dir / "bad.txt", "re:[\n");
  CHECK_THROWS_AS(load_meta_patterns(dir / "bad.txt"), ConfigError);
  CHECK_THROWS_AS(load_meta_patterns(dir / "none.txt"), ConfigError);
}

TEST_CASE("filter_imbalanced") {
  CHECK(filter_imbalanced(100, 100) == Balance::kKeep);
  CHECK(filter_imbalanced(200, 100) == Balance::kDrop);
  CHECK(filter_imbalanced(199, 100) == Balance::kKeep);
  CHECK(filter_imbalanced(100, 200) == Balance::kDrop);
  CHECK_THROWS_AS(filter_imbalanced(0, 3), InvalidInput);
  CHECK_THROWS_AS(filter_imbalanced(3, 3, 1.0), ConfigError);
  CHECK(filter_imbalanced(pair_of({"a", "b"}, {"c"})) == Balance::kDrop);

  std::mt19937_64 rng(4);
  for (int t = 0; t < 500; ++t) {
    const std::size_t a = 1 + rng() % 300, b = 1 + rng() % 300;
    CHECK(filter_imbalanced(a, b, 2.0) == filter_imbalanced(b, a, 2.0));
  }
}

TEST_CASE("cleaning report merge is associative and commutative") {
  auto make = [](std::size_t k) {
    CleaningReport r;
    r.files_normalized = k;
    r.decode_failures = k + 1;
    r.language_mismatches = 2 * k;
    r.no_punctuation_dropped = k % 3;
    r.meta_tokens_removed = k * k;
    r.imbalanced_dropped = 1;
    r.pairs_kept = k + 5;
    return r;
  };
  const auto a = make(1), b = make(2), c = make(3);
  CleaningReport ab = a;
  ab += b;
  CleaningReport ba = b;
  ba += a;
  CHECK(ab == ba);
  CleaningReport left = ab;
  left += c;
  CleaningReport bc = b;
  bc += c;
  CleaningReport right = a;
  right += bc;
  CHECK(left == right);
}

TEST_CASE("clean_pair runs the five steps") {
  TempDir dir;
  const CleaningConfig cfg{DetectorConfig(10, 8, japanese_profile(), english_profile(), 1),
                           SplitterConfig{}, default_meta_patterns(), 2.0};

  SUBCASE("good pair") {
    write_file(dir / "a.ja", "\xEF\xBB\xBFこんにちは。 ｹﾞｰﾑです。\n[Music] ありがとうございます！\n");
    write_file(dir / "a.en", "Hello.  This is a game.\n\n<< Thank you!\n");
    const auto r = clean_pair("a", dir / "a.ja", dir / "a.en", cfg);
    REQUIRE(r.kept());
    CHECK(*r.source == std::vector<std::string>{"こんにちは。", "ゲームです。", "ありがとうございます!"});
    CHECK(*r.target == std::vector<std::string>{"Hello.", "This is a game.", "Thank you!"});
    CHECK(r.report.files_normalized == 2);
    CHECK(r.report.meta_tokens_removed == 2);
    CHECK(r.report.pairs_kept == 1);
    for (const auto& rec : r.records) {
      const auto j = nlohmann::json::parse(to_json_line(rec));
      CHECK(j["pair_id"] == "a");
      CHECK(j.contains("step"));
      CHECK(j.contains("outcome"));
    }
  }
  SUBCASE("invalid utf-8 is reported and skipped") {
    write_file(dir / "b.ja", "こんにちは。\n");
    write_file(dir / "b.en", "caf\xe9.\n");
    const auto r = clean_pair("b", dir / "b.ja", dir / "b.en", cfg);
    CHECK_FALSE(r.kept());
    CHECK(r.report.decode_failures == 1);
  }
  SUBCASE("swapped languages") {
    write_file(dir / "c.ja", "Hello there.\n");
    write_file(dir / "c.en", "こんにちは。\n");
    const auto r = clean_pair("c", dir / "c.ja", dir / "c.en", cfg);
    CHECK_FALSE(r.kept());
    CHECK(r.report.language_mismatches == 2);
  }
  SUBCASE("no punctuation") {
    write_file(dir / "d.ja", "こんにちは。\n");
    write_file(dir / "d.en", "so um yeah\n");
    const auto r = clean_pair("d", dir / "d.ja", dir / "d.en", cfg);
    CHECK_FALSE(r.kept());
    CHECK(r.report.no_punctuation_dropped == 1);
  }
  SUBCASE("imbalanced") {
    write_file(dir / "e.ja", "いち。 に。 さん。 よん。\n");
    write_file(dir / "e.en", "One. Two.\n");
    const auto r = clean_pair("e", dir / "e.ja", dir / "e.en", cfg);
    CHECK_FALSE(r.kept());
    CHECK(r.report.imbalanced_dropped == 1);
  }
}
