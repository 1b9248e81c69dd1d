#include "omni/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/uscript.h>

#include "omni/rng.hpp"

namespace omni::corpus {

namespace {

const icu::Normalizer2& nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* inst = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || !inst) throw std::runtime_error("ICU NFC instance unavailable");
  return *inst;
}

}  // namespace

std::string normalize(std::string_view text) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString composed = nfc().normalize(u, status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU normalize failed");
  composed.foldCase();
  status = U_ZERO_ERROR;
  composed = nfc().normalize(composed, status);  // folding can denormalize
  if (U_FAILURE(status)) throw std::runtime_error("ICU normalize failed");

  // collapse whitespace runs and strip
  icu::UnicodeString out;
  bool pending_space = false;
  bool seen_char = false;
  for (int32_t i = 0; i < composed.length();) {
    UChar32 cp = composed.char32At(i);
    i += U16_LENGTH(cp);
    if (u_isUWhiteSpace(cp)) {
      pending_space = seen_char;
    } else {
      if (pending_space) out.append(static_cast<UChar32>(' '));
      out.append(cp);
      pending_space = false;
      seen_char = true;
    }
  }
  std::string result;
  out.toUTF8String(result);
  return result;
}

std::string detect_lang(std::string_view text) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  int64_t han = 0, latin = 0, total = 0;
  for (int32_t i = 0; i < u.length();) {
    UChar32 cp = u.char32At(i);
    i += U16_LENGTH(cp);
    if (!u_isalpha(cp)) continue;
    ++total;
    UErrorCode status = U_ZERO_ERROR;
    UScriptCode script = uscript_getScript(cp, &status);
    if (script == USCRIPT_HAN) ++han;
    if (script == USCRIPT_LATIN) ++latin;
  }
  if (total == 0) return "und";
  if (han * 10 >= total * 3) return "zh";
  if (latin * 2 > total) return "en";
  return "other";
}

ExactDedupResult exact_dedup(const std::vector<Document>& docs) {
  ExactDedupResult result;
  std::unordered_map<std::string, size_t> first_by_norm;  // norm text -> group index
  std::vector<DedupGroup> groups;
  for (const auto& doc : docs) {
    std::string key = normalize(doc.text);
    auto it = first_by_norm.find(key);
    if (it == first_by_norm.end()) {
      first_by_norm.emplace(std::move(key), groups.size());
      groups.push_back({{doc.id}});
      result.kept.push_back(doc);
    } else {
      groups[it->second].ids.push_back(doc.id);
    }
  }
  for (auto& g : groups)
    if (g.ids.size() > 1) result.groups.push_back(std::move(g));
  return result;
}

std::vector<std::string> shingles(std::string_view text, int width) {
  std::string norm = normalize(text);
  std::vector<std::string> words;
  std::istringstream ss(norm);
  std::string w;
  while (ss >> w) words.push_back(w);

  std::vector<std::string> out;
  if (static_cast<int>(words.size()) < width) {
    if (words.empty()) return {""};
    return words;  // singleton token set fallback
  }
  for (size_t i = 0; i + width <= words.size(); ++i) {
    std::string sh = words[i];
    for (int j = 1; j < width; ++j) {
      sh += ' ';
      sh += words[i + j];
    }
    out.push_back(std::move(sh));
  }
  return out;
}

MinHashSignature minhash(const Document& doc, int k, int shingle_width, uint64_t seed) {
  if (k < 1) throw std::invalid_argument("minhash: k must be >= 1");
  auto sh = shingles(doc.text, shingle_width);
  std::vector<uint64_t> base;
  base.reserve(sh.size());
  for (const auto& s : sh) base.push_back(fnv1a64(s.data(), s.size()));

  MinHashSignature sig;
  sig.k = k;
  sig.shingle_width = shingle_width;
  sig.values.resize(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) {
    uint64_t mixer = hash_mix64(seed + 0x9e3779b97f4a7c15ull * static_cast<uint64_t>(i + 1));
    uint64_t best = UINT64_MAX;
    for (uint64_t h : base) best = std::min(best, hash_mix64(h ^ mixer));
    sig.values[static_cast<size_t>(i)] = best;
  }
  return sig;
}

double signature_agreement(const MinHashSignature& a, const MinHashSignature& b) {
  if (a.k != b.k || a.k == 0) throw std::invalid_argument("signature_agreement: k mismatch");
  int64_t hits = 0;
  for (size_t i = 0; i < a.values.size(); ++i) hits += a.values[i] == b.values[i];
  return static_cast<double>(hits) / a.k;
}

double shingle_jaccard(const Document& a, const Document& b, int shingle_width) {
  auto sa = shingles(a.text, shingle_width);
  auto sb = shingles(b.text, shingle_width);
  std::sort(sa.begin(), sa.end());
  sa.erase(std::unique(sa.begin(), sa.end()), sa.end());
  std::sort(sb.begin(), sb.end());
  sb.erase(std::unique(sb.begin(), sb.end()), sb.end());
  std::vector<std::string> inter;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(inter));
  size_t uni = sa.size() + sb.size() - inter.size();
  return uni ? static_cast<double>(inter.size()) / static_cast<double>(uni) : 1.0;
}

LshResult lsh_dedup(const std::vector<Document>& docs, const LshParams& params) {
  if (params.bands * params.rows != params.k)
    throw std::invalid_argument("lsh_dedup: bands * rows must equal k");

  std::vector<MinHashSignature> sigs;
  sigs.reserve(docs.size());
  for (const auto& d : docs)
    sigs.push_back(minhash(d, params.k, params.shingle_width, params.seed));

  // band buckets -> candidate pairs
  std::vector<std::pair<size_t, size_t>> candidates;
  {
    std::unordered_map<uint64_t, std::vector<size_t>> buckets;
    for (int b = 0; b < params.bands; ++b) {
      buckets.clear();
      for (size_t i = 0; i < docs.size(); ++i) {
        uint64_t h = fnv1a64(&sigs[i].values[static_cast<size_t>(b * params.rows)],
                             sizeof(uint64_t) * static_cast<size_t>(params.rows));
        buckets[h ^ hash_mix64(static_cast<uint64_t>(b))].push_back(i);
      }
      for (const auto& [key, members] : buckets)
        for (size_t x = 0; x < members.size(); ++x)
          for (size_t y = x + 1; y < members.size(); ++y)
            candidates.emplace_back(members[x], members[y]);
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  }

  // verify candidates with exact Jaccard, merge into first-seen representative
  std::vector<size_t> parent(docs.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<size_t(size_t)> find = [&](size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  LshResult result;
  for (auto [i, j] : candidates) {
    CandidatePair cp;
    cp.a = docs[i].id;
    cp.b = docs[j].id;
    cp.jaccard = shingle_jaccard(docs[i], docs[j], params.shingle_width);
    cp.merged = cp.jaccard >= params.jaccard_threshold;
    if (cp.merged) {
      size_t ri = find(i), rj = find(j);
      if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
    }
    result.candidates.push_back(std::move(cp));
  }
  for (size_t i = 0; i < docs.size(); ++i)
    if (find(i) == i) result.kept.push_back(docs[i]);
  return result;
}

namespace {

struct TextStats {
  size_t codepoints = 0;
  size_t alpha = 0;
  size_t symbol = 0;  // neither alphanumeric nor whitespace
};

TextStats text_stats(std::string_view text) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  TextStats st;
  for (int32_t i = 0; i < u.length();) {
    UChar32 cp = u.char32At(i);
    i += U16_LENGTH(cp);
    ++st.codepoints;
    if (u_isalpha(cp)) ++st.alpha;
    if (!u_isalnum(cp) && !u_isUWhiteSpace(cp)) ++st.symbol;
  }
  return st;
}

}  // namespace

QualityResult quality_filter(const std::vector<Document>& docs, const QualityRules& rules) {
  QualityResult result;
  for (const auto& doc : docs) {
    TextStats st = text_stats(doc.text);
    bool rejected = false;
    auto fail = [&](const char* rule) {
      ++result.rejected_by_rule[rule];
      rejected = true;
    };
    if (rules.min_length && st.codepoints < *rules.min_length) fail("min_length");
    if (rules.max_length && st.codepoints > *rules.max_length) fail("max_length");
    if (st.codepoints > 0) {
      double symbol_ratio = static_cast<double>(st.symbol) / st.codepoints;
      double alpha_ratio = static_cast<double>(st.alpha) / st.codepoints;
      if (rules.max_symbol_ratio && symbol_ratio > *rules.max_symbol_ratio)
        fail("max_symbol_ratio");
      if (rules.min_alpha_ratio && alpha_ratio < *rules.min_alpha_ratio) fail("min_alpha_ratio");
    }
    for (const auto& banned : rules.banned_substrings) {
      if (doc.text.find(banned) != std::string::npos) {
        fail("banned_substring");
        break;
      }
    }
    if (rules.scorer_hook && !rules.scorer_hook(doc)) fail("scorer_hook");
    if (!rejected) result.kept.push_back(doc);
  }
  return result;
}

TopoResult topo_sort_repo(const CodeRepoGraph& graph) {
  std::unordered_map<std::string, size_t> index;
  for (size_t i = 0; i < graph.nodes.size(); ++i) index[graph.nodes[i]] = i;
  for (const auto& [importer, imported] : graph.edges)
    if (!index.count(importer) || !index.count(imported))
      throw std::invalid_argument("topo_sort_repo: edge references unknown node");

  size_t n = graph.nodes.size();
  // deps[i] = count of not-yet-emitted imports of node i
  std::vector<int> deps(n, 0);
  std::vector<std::vector<size_t>> importers_of(n);  // imported -> importers
  for (const auto& [importer, imported] : graph.edges) {
    size_t a = index[importer], b = index[imported];
    if (a == b) continue;  // self-import carries no ordering constraint
    ++deps[a];
    importers_of[b].push_back(a);
  }

  TopoResult result;
  std::vector<bool> emitted(n, false);
  auto emit = [&](size_t i) {
    emitted[i] = true;
    result.order.push_back(graph.nodes[i]);
    for (size_t imp : importers_of[i]) --deps[imp];
  };

  // each step emits the lowest-input-index node whose imports are all
  // emitted, so every file lands at its earliest legal position
  for (size_t done = 0; done < n; ++done) {
    size_t pick = n;
    for (size_t i = 0; i < n; ++i) {
      if (!emitted[i] && deps[i] == 0) {
        pick = i;
        break;
      }
    }
    if (pick == n) {
      // cycle: release the first remaining node in input order, flagged
      for (size_t i = 0; i < n; ++i) {
        if (!emitted[i]) {
          pick = i;
          break;
        }
      }
      result.has_cycle = true;
      result.cycle_nodes.push_back(graph.nodes[pick]);
    }
    emit(pick);
  }
  return result;
}

std::vector<Document> read_jsonl(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("read_jsonl: cannot open " + file.string());
  std::vector<Document> docs;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    Document d;
    d.id = j.value("id", "line-" + std::to_string(lineno));
    d.text = j.at("text").get<std::string>();
    d.source = j.value("source", "");
    d.lang = j.value("lang", "");
    docs.push_back(std::move(d));
  }
  return docs;
}

void write_jsonl(const std::filesystem::path& file, const std::vector<Document>& docs) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("write_jsonl: cannot open " + file.string());
  for (const auto& d : docs) {
    nlohmann::json j{{"id", d.id}, {"text", d.text}, {"source", d.source}};
    if (!d.lang.empty()) j["lang"] = d.lang;
    out << j.dump() << "\n";
  }
}

}  // namespace omni::corpus
