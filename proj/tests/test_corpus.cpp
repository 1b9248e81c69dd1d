#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "omni/corpus.hpp"
#include "omni/rng.hpp"

using namespace omni::corpus;

namespace {

// test-side Jaccard oracle: independent shingling (own word splitter) and
// plain std::set intersection
double oracle_jaccard(const std::string& a, const std::string& b, int width) {
  auto shingle_set = [width](const std::string& text) {
    std::istringstream ss(normalize(text));
    std::vector<std::string> words;
    std::string w;
    while (ss >> w) words.push_back(w);
    std::set<std::string> out;
    if (static_cast<int>(words.size()) < width) {
      if (words.empty()) return std::set<std::string>{""};
      return std::set<std::string>(words.begin(), words.end());
    }
    for (size_t i = 0; i + width <= words.size(); ++i) {
      std::string s;
      for (int j = 0; j < width; ++j) s += words[i + j] + (j + 1 < width ? " " : "");
      out.insert(s);
    }
    return out;
  };
  auto sa = shingle_set(a), sb = shingle_set(b);
  size_t inter = 0;
  for (const auto& s : sa) inter += sb.count(s);
  size_t uni = sa.size() + sb.size() - inter;
  return uni ? static_cast<double>(inter) / uni : 1.0;
}

std::string word(omni::Rng& rng) {
  std::string w;
  int len = 3 + static_cast<int>(rng.below(5));
  for (int i = 0; i < len; ++i) w.push_back(static_cast<char>('a' + rng.below(26)));
  return w;
}

std::string random_doc(omni::Rng& rng, int words) {
  std::string s;
  for (int i = 0; i < words; ++i) {
    if (i) s += ' ';
    s += word(rng);
  }
  return s;
}

}  // namespace

TEST_CASE("normalize: stated rules") {
  CHECK(normalize("Hello\t\tWorld ") == "hello world");
  CHECK(normalize("") == "");
  CHECK(normalize("  already normal  ") == "already normal");
  // NFC: e + combining acute composes to a single code point
  CHECK(normalize("cafe\xcc\x81") == "caf\xc3\xa9");
  CHECK(normalize("STRASSE") == "strasse");  // case folding, not lowercasing
}

TEST_CASE("normalize: idempotent (property)") {
  omni::Rng rng(11);
  const char* samples[] = {"MiXeD   CaSe\n\ntext", "你好  世界", "Caf\xc3\xa9 au\tlait",
                           "  \t ", "ümlaut ÜMLAUT", "a\r\nb\r\nc"};
  for (const char* s : samples) CHECK(normalize(normalize(s)) == normalize(s));
  for (int i = 0; i < 50; ++i) {
    std::string s = random_doc(rng, 8) + "  \tMIXED 你好";
    CHECK(normalize(normalize(s)) == normalize(s));
  }
}

TEST_CASE("exact_dedup: case/whitespace variants collapse") {
  std::vector<Document> docs = {{"d1", "Hello  World", "", ""},
                                {"d2", "hello world", "", ""},
                                {"d3", "different", "", ""}};
  auto r = exact_dedup(docs);
  REQUIRE(r.kept.size() == 2);
  CHECK(r.kept[0].id == "d1");  // first seen wins
  CHECK(r.kept[1].id == "d3");
  REQUIRE(r.groups.size() == 1);
  CHECK(r.groups[0].ids == std::vector<std::string>{"d1", "d2"});
}

TEST_CASE("exact_dedup: distinct corpus unchanged, empty corpus empty") {
  std::vector<Document> docs = {{"a", "one", "", ""}, {"b", "two", "", ""}};
  auto r = exact_dedup(docs);
  CHECK(r.kept.size() == 2);
  CHECK(r.groups.empty());
  CHECK(exact_dedup({}).kept.empty());
}

TEST_CASE("exact_dedup: no two kept docs share normalized text (property)") {
  omni::Rng rng(3);
  std::vector<Document> docs;
  for (int i = 0; i < 60; ++i) {
    std::string t = random_doc(rng, 1 + static_cast<int>(rng.below(4)));
    if (rng.below(2)) std::transform(t.begin(), t.end(), t.begin(), ::toupper);
    docs.push_back({"d" + std::to_string(i), t, "", ""});
  }
  auto r = exact_dedup(docs);
  std::set<std::string> seen;
  for (const auto& d : r.kept) CHECK(seen.insert(normalize(d.text)).second);
}

TEST_CASE("minhash: identical docs give identical signatures") {
  Document a{"a", "the same exact document text for both entries here", "", ""};
  Document b{"b", a.text, "", ""};
  auto sa = minhash(a, 64, 5, 42);
  auto sb = minhash(b, 64, 5, 42);
  CHECK(signature_agreement(sa, sb) == 1.0);
}

TEST_CASE("minhash: disjoint docs agree almost nowhere") {
  omni::Rng rng(5);
  Document a{"a", random_doc(rng, 40), "", ""};
  Document b{"b", random_doc(rng, 40), "", ""};
  REQUIRE(oracle_jaccard(a.text, b.text, 5) == 0.0);
  auto sa = minhash(a, 128, 5, 9);
  auto sb = minhash(b, 128, 5, 9);
  CHECK(signature_agreement(sa, sb) <= 3.0 / 128);
}

TEST_CASE("minhash: agreement estimates Jaccard within 0.1 at k=256") {
  omni::Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    // shared prefix + distinct suffixes gives a spread of true similarities
    std::string shared = random_doc(rng, 20 + static_cast<int>(rng.below(30)));
    std::string a = shared + " " + random_doc(rng, static_cast<int>(rng.below(25)));
    std::string b = shared + " " + random_doc(rng, static_cast<int>(rng.below(25)));
    Document da{"a", a, "", ""}, db{"b", b, "", ""};
    double j = oracle_jaccard(a, b, 5);
    double est = signature_agreement(minhash(da, 256, 5, 1000 + trial),
                                     minhash(db, 256, 5, 1000 + trial));
    CHECK(std::abs(est - j) <= 0.1);
  }
}

TEST_CASE("lsh_dedup: config validation") {
  CHECK_THROWS_AS(lsh_dedup({}, LshParams{128, 16, 9, 0.8, 5, 0}), std::invalid_argument);
}

TEST_CASE("lsh_dedup: exact duplicates always merge") {
  std::vector<Document> docs = {
      {"a", "repeated body of text that is long enough to shingle", "", ""},
      {"b", "repeated body of text that is long enough to shingle", "", ""},
      {"c", "something else entirely for the third document here", "", ""}};
  auto r = lsh_dedup(docs, LshParams{});
  REQUIRE(r.kept.size() == 2);
  CHECK(r.kept[0].id == "a");
  CHECK(r.kept[1].id == "c");
}

TEST_CASE("lsh_dedup: fully distinct corpus unchanged") {
  omni::Rng rng(23);
  std::vector<Document> docs;
  for (int i = 0; i < 10; ++i)
    docs.push_back({"d" + std::to_string(i), random_doc(rng, 30), "", ""});
  for (size_t i = 0; i < docs.size(); ++i)
    for (size_t j = i + 1; j < docs.size(); ++j)
      REQUIRE(oracle_jaccard(docs[i].text, docs[j].text, 5) < 0.8);
  auto r = lsh_dedup(docs, LshParams{});
  CHECK(r.kept.size() == docs.size());
  for (const auto& c : r.candidates) CHECK(!c.merged);
}

TEST_CASE("lsh_dedup: b=1, r=k merges exactly identical-signature pairs") {
  omni::Rng rng(29);
  std::vector<Document> docs;
  for (int i = 0; i < 6; ++i)
    docs.push_back({"d" + std::to_string(i), random_doc(rng, 25), "", ""});
  docs.push_back({"dup", docs[0].text, "", ""});
  LshParams p;
  p.k = 32;
  p.bands = 1;
  p.rows = 32;
  p.jaccard_threshold = 0.99;
  auto r = lsh_dedup(docs, p);
  CHECK(r.kept.size() == docs.size() - 1);
  int merged = 0;
  for (const auto& c : r.candidates) merged += c.merged;
  CHECK(merged == 1);
}

TEST_CASE("lsh_dedup: planted near-duplicate found across seeds") {
  // J = 0.95 pair: 199 words, one interior word replaced; that word sits in 5
  // of the 195 shingles, so the sets share 190 of 200
  omni::Rng rng(31);
  std::vector<std::string> words;
  for (int i = 0; i < 199; ++i) words.push_back(word(rng));
  auto join = [](const std::vector<std::string>& ws) {
    std::string s;
    for (size_t i = 0; i < ws.size(); ++i) s += (i ? " " : "") + ws[i];
    return s;
  };
  std::string base = join(words);
  words[100] = "changedword";
  std::string variant = join(words);
  REQUIRE(oracle_jaccard(base, variant, 5) == doctest::Approx(0.95).epsilon(1e-9));

  int detected = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    std::vector<Document> docs = {{"a", base, "", ""}, {"b", variant, "", ""}};
    LshParams p;
    p.k = 128;
    p.bands = 16;
    p.rows = 8;
    p.jaccard_threshold = 0.9;
    p.seed = seed;
    auto r = lsh_dedup(docs, p);
    if (r.kept.size() == 1) ++detected;
  }
  CHECK(detected >= 19);  // analytic detection prob ~ 0.9997 per run
}

TEST_CASE("quality_filter: stated rules") {
  QualityRules rules;
  rules.min_length = 10;
  std::vector<Document> docs = {{"short", "abc", "", ""}, {"long", "abcdefghijk", "", ""}};
  auto r = quality_filter(docs, rules);
  CHECK(r.kept.size() == 1);
  CHECK(r.kept[0].id == "long");
  CHECK(r.rejected_by_rule.at("min_length") == 1);

  QualityRules symbol_rule;
  symbol_rule.max_symbol_ratio = 0.5;
  // 9 of 10 codepoints are punctuation
  auto r2 = quality_filter({{"p", "!!!!!!!!!a", "", ""}}, symbol_rule);
  CHECK(r2.kept.empty());

  auto r3 = quality_filter(docs, QualityRules{});
  CHECK(r3.kept.size() == docs.size());  // empty rule set is identity

  QualityRules banned;
  banned.banned_substrings = {"forbidden"};
  auto r4 = quality_filter({{"x", "contains forbidden words", "", ""}}, banned);
  CHECK(r4.kept.empty());
  CHECK(r4.rejected_by_rule.at("banned_substring") == 1);
}

TEST_CASE("topo_sort_repo: stated examples") {
  // A imports B
  {
    CodeRepoGraph g{{"A", "B"}, {{"A", "B"}}};
    auto r = topo_sort_repo(g);
    CHECK(r.order == std::vector<std::string>{"B", "A"});
    CHECK(!r.has_cycle);
  }
  // chain A -> B -> C
  {
    CodeRepoGraph g{{"A", "B", "C"}, {{"A", "B"}, {"B", "C"}}};
    auto r = topo_sort_repo(g);
    CHECK(r.order == std::vector<std::string>{"C", "B", "A"});
  }
  // 2-cycle falls back to stable order with a flag
  {
    CodeRepoGraph g{{"A", "B"}, {{"A", "B"}, {"B", "A"}}};
    auto r = topo_sort_repo(g);
    CHECK(r.order == std::vector<std::string>{"A", "B"});
    CHECK(r.has_cycle);
    CHECK(r.cycle_nodes == std::vector<std::string>{"A"});
  }
}

TEST_CASE("topo_sort_repo: acyclic random graphs satisfy all edges (property)") {
  omni::Rng rng(37);
  for (int trial = 0; trial < 30; ++trial) {
    int n = 2 + static_cast<int>(rng.below(10));
    CodeRepoGraph g;
    for (int i = 0; i < n; ++i) g.nodes.push_back("f" + std::to_string(i));
    // edges only from lower to higher index => acyclic
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.below(3) == 0) g.edges.push_back({g.nodes[i], g.nodes[j]});
    auto r = topo_sort_repo(g);
    CHECK(!r.has_cycle);
    REQUIRE(r.order.size() == g.nodes.size());
    auto pos = [&](const std::string& name) {
      return std::find(r.order.begin(), r.order.end(), name) - r.order.begin();
    };
    auto sorted_nodes = g.nodes;
    auto sorted_order = r.order;
    std::sort(sorted_nodes.begin(), sorted_nodes.end());
    std::sort(sorted_order.begin(), sorted_order.end());
    CHECK(sorted_nodes == sorted_order);  // permutation of input
    for (const auto& [importer, imported] : g.edges) CHECK(pos(imported) < pos(importer));
  }
}

TEST_CASE("topo_sort_repo: unknown edge endpoint rejected") {
  CodeRepoGraph g{{"A"}, {{"A", "missing"}}};
  CHECK_THROWS_AS(topo_sort_repo(g), std::invalid_argument);
}

TEST_CASE("detect_lang: script ratio heuristic") {
  CHECK(detect_lang("plain english text here") == "en");
  CHECK(detect_lang("这是一段中文文本") == "zh");
  CHECK(detect_lang("12345 !!!") == "und");
}

TEST_CASE("jsonl round trip") {
  auto dir = std::filesystem::temp_directory_path() / "omni_corpus_test";
  std::filesystem::create_directories(dir);
  std::vector<Document> docs = {{"a", "text one", "web", ""}, {"b", "text 二", "books", "zh"}};
  write_jsonl(dir / "docs.jsonl", docs);
  auto loaded = read_jsonl(dir / "docs.jsonl");
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].id == "a");
  CHECK(loaded[1].text == "text 二");
  CHECK(loaded[1].lang == "zh");
}
