#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "omni/rng.hpp"
#include "omni/tokenizer.hpp"

using omni::tok::Tokenizer;

namespace {

// Independent token-counting oracle: applies the same merge table with a
// different algorithm (repeatedly merge the lowest-ranked pair present,
// leftmost occurrence first) instead of one ascending pass per rank.
size_t oracle_token_count(const Tokenizer& model, const std::string& text) {
  std::vector<int> syms;
  for (unsigned char c : text) syms.push_back(c);
  const auto& merges = model.merges();
  while (true) {
    int best_rank = -1;
    for (size_t i = 0; i + 1 < syms.size(); ++i) {
      for (size_t r = 0; r < merges.size(); ++r) {
        if (merges[r].left == syms[i] && merges[r].right == syms[i + 1]) {
          if (best_rank < 0 || static_cast<int>(r) < best_rank) best_rank = static_cast<int>(r);
          break;
        }
      }
    }
    if (best_rank < 0) break;
    // merge all occurrences of that rank left to right
    std::vector<int> out;
    for (size_t i = 0; i < syms.size();) {
      if (i + 1 < syms.size() && syms[i] == merges[best_rank].left &&
          syms[i + 1] == merges[best_rank].right) {
        out.push_back(256 + best_rank);
        i += 2;
      } else {
        out.push_back(syms[i]);
        i += 1;
      }
    }
    syms = std::move(out);
  }
  return syms.size();
}

std::string random_utf8(omni::Rng& rng, int max_cps) {
  // mixes ASCII, CJK, emoji, accents, and control bytes
  std::string s;
  int n = static_cast<int>(rng.below(static_cast<uint64_t>(max_cps))) + 1;
  for (int i = 0; i < n; ++i) {
    uint32_t cp;
    switch (rng.below(6)) {
      case 0: cp = 0x20 + static_cast<uint32_t>(rng.below(0x5f)); break;          // ASCII
      case 1: cp = 0x4e00 + static_cast<uint32_t>(rng.below(0x51a6)); break;      // CJK
      case 2: cp = 0x1f300 + static_cast<uint32_t>(rng.below(0x200)); break;      // emoji
      case 3: cp = 0xc0 + static_cast<uint32_t>(rng.below(0x100)); break;         // latin ext
      case 4: cp = static_cast<uint32_t>(rng.below(0x20)); break;                 // controls
      default: cp = 0x20 + static_cast<uint32_t>(rng.below(0x5f)); break;
    }
    if (cp < 0x80) {
      s.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      s.push_back(static_cast<char>(0xc0 | (cp >> 6)));
      s.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
      s.push_back(static_cast<char>(0xe0 | (cp >> 12)));
      s.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
      s.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
      s.push_back(static_cast<char>(0xf0 | (cp >> 18)));
      s.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
      s.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
      s.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
  }
  return s;
}

}  // namespace

TEST_CASE("train: most frequent pair first") {
  auto t = Tokenizer::train("abababab", 259, {});
  REQUIRE(!t.merges().empty());
  CHECK(t.merges()[0].left == 'a');
  CHECK(t.merges()[0].right == 'b');
  // "abababab" -> [ab]x4 -> [abab]x2 -> budget left but (abab,abab) occurs once
  CHECK(t.merges().size() == 2);
  CHECK(t.vocab_size() == 258);
}

TEST_CASE("train: zero merge budget gives a pure byte tokenizer") {
  auto t = Tokenizer::train("whatever text", 256, {});
  CHECK(t.merges().empty());
  CHECK(t.vocab_size() == 256);
  auto ids = t.encode("hi");
  REQUIRE(ids.size() == 2);
  CHECK(ids[0] == 0x68);
  CHECK(ids[1] == 0x69);
}

TEST_CASE("train: stops early when no pair repeats") {
  auto t = Tokenizer::train("abcdefg", 300, {});
  CHECK(t.merges().empty());
}

TEST_CASE("train: rejects too-small vocab budget") {
  CHECK_THROWS_AS(Tokenizer::train("abc", 255, {}), std::invalid_argument);
  CHECK_THROWS_AS(Tokenizer::train("abc", 257, std::vector<std::string>{"<a>", "<b>"}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Tokenizer::train("", 300, {}), std::invalid_argument);
}

TEST_CASE("train: deterministic for identical corpus and config") {
  std::string corpus = "the quick brown fox jumps over the lazy dog, the dog sleeps";
  auto a = Tokenizer::train(corpus, 300, omni::tok::default_specials());
  auto b = Tokenizer::train(corpus, 300, omni::tok::default_specials());
  CHECK(a == b);
}

TEST_CASE("encode: single merge applies") {
  Tokenizer t({{'a', 'b'}}, {});
  auto ids = t.encode("ab");
  REQUIRE(ids.size() == 1);
  CHECK(ids[0] == 256);
  CHECK(t.encode("").empty());
}

TEST_CASE("decode: inverse of encode, errors on bad ids") {
  auto t = Tokenizer::train("你好世界你好世界你好", 280, {"<pad>"});
  CHECK(t.decode(t.encode("你好")) == "你好");
  CHECK(t.decode({}) == "");
  CHECK_THROWS_WITH_AS(t.decode({t.vocab_size()}), doctest::Contains(std::to_string(t.vocab_size()).c_str()),
                       std::runtime_error);
  CHECK_THROWS_AS(t.decode({t.special_id("<pad>")}), std::runtime_error);
}

TEST_CASE("round-trip property over random UTF-8") {
  auto t = Tokenizer::train("byte pair encodings of text, 文本的字节对编码, error handling",
                            320, omni::tok::default_specials());
  omni::Rng rng(7);
  for (int i = 0; i < 300; ++i) {
    std::string s = random_utf8(rng, 60);
    CHECK(t.decode(t.encode(s)) == s);
  }
}

TEST_CASE("monotone merges: more merges never increase token count") {
  std::string corpus =
      "compression works by replacing repeated pairs with a single symbol; "
      "repeated pairs appear in repeated text, repeated pairs appear often";
  auto full = Tokenizer::train(corpus, 300, {});
  for (size_t k = 0; k <= full.merges().size(); ++k) {
    Tokenizer partial(std::vector<omni::tok::MergeRule>(full.merges().begin(),
                                                        full.merges().begin() + k),
                      {});
    Tokenizer next(std::vector<omni::tok::MergeRule>(
                       full.merges().begin(),
                       full.merges().begin() + std::min(k + 1, full.merges().size())),
                   {});
    CHECK(next.encode(corpus).size() <= partial.encode(corpus).size());
  }
}

TEST_CASE("compression report: exact rates and layout") {
  Tokenizer pure_bytes({}, {});
  auto report = omni::tok::compression_rate(pure_bytes, {{"English", "plain ascii text"}});
  CHECK(report.rows[0].rate() == 1.0);  // one token per byte

  // 386 bytes / 100 tokens renders as 3.86
  omni::tok::CompressionReport synthetic;
  synthetic.rows.push_back({"Average-case", 386, 100, false});
  CHECK(synthetic.average() == doctest::Approx(3.86).epsilon(1e-12));
  CHECK(synthetic.render_table().find("3.86") != std::string::npos);
}

TEST_CASE("compression report: empty corpus flagged and excluded") {
  Tokenizer pure_bytes({}, {});
  auto report = omni::tok::compression_rate(pure_bytes, {{"a", "xyzw"}, {"b", ""}});
  CHECK(report.has_warnings);
  CHECK(report.rows[1].empty_corpus);
  CHECK(report.average() == doctest::Approx(1.0));
  CHECK(report.render_table().find("empty corpus") != std::string::npos);
}

TEST_CASE("token counts match the independent counting oracle") {
  std::string corpus =
      "for each repeated phrase the merge table grows; the merge table maps pairs "
      "to new ids and new ids join later merges";
  auto t = Tokenizer::train(corpus, 290, {});
  REQUIRE(t.merges().size() > 4);
  for (const std::string& text :
       {corpus, std::string("the merge table"), std::string("unrelated input 123")}) {
    CHECK(t.encode(text).size() == oracle_token_count(t, text));
  }
}

TEST_CASE("save/load round-trips byte-exactly") {
  auto t = Tokenizer::train("roundtrip roundtrip roundtrip", 280, omni::tok::default_specials());
  auto dir = std::filesystem::temp_directory_path() / "omni_tok_test";
  std::filesystem::create_directories(dir);
  auto file = dir / "tok.json";
  t.save(file);
  auto loaded = Tokenizer::load(file);
  CHECK(loaded == t);
  loaded.save(dir / "tok2.json");
  std::ifstream a(file), b(dir / "tok2.json");
  std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  CHECK(sa == sb);
}

TEST_CASE("specials: reserved ids, never emitted by encode") {
  auto t = Tokenizer::train("aaaa bbbb aaaa bbbb", 270, omni::tok::default_specials());
  CHECK(t.vocab_size() == 256 + static_cast<int>(t.merges().size()) + 11);
  CHECK(t.special_id("<bos>") == t.first_special_id() + 1);
  CHECK(t.special_id("<missing>") == -1);
  for (int id : t.encode("aaaa bbbb <bos>")) CHECK(!t.is_special(id));
}
