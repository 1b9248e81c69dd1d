#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace omni::corpus {

struct Document {
  std::string id;
  std::string text;
  std::string source;
  std::string lang;  // optional, filled by detect_lang or the caller
};

// NFC, whitespace runs collapsed to one space, case-folded, stripped.
// Idempotent.
std::string normalize(std::string_view text);

// trivial script-ratio heuristic; callers may plug their own
using LangHook = std::function<std::string(std::string_view)>;
std::string detect_lang(std::string_view text);

struct DedupGroup {
  std::vector<std::string> ids;  // first entry is the kept representative
};

struct ExactDedupResult {
  std::vector<Document> kept;
  std::vector<DedupGroup> groups;  // one per normalized-text class with >1 member
};

ExactDedupResult exact_dedup(const std::vector<Document>& docs);

struct MinHashSignature {
  int k = 0;
  int shingle_width = 0;
  std::vector<uint64_t> values;
};

// width-w word shingles over normalized text; documents shorter than one
// shingle fall back to their word set
std::vector<std::string> shingles(std::string_view text, int width);

MinHashSignature minhash(const Document& doc, int k, int shingle_width, uint64_t seed);

// fraction of positions where two signatures agree
double signature_agreement(const MinHashSignature& a, const MinHashSignature& b);

// exact Jaccard similarity of the two documents' shingle sets
double shingle_jaccard(const Document& a, const Document& b, int shingle_width);

struct LshParams {
  int k = 128;
  int bands = 16;
  int rows = 8;
  double jaccard_threshold = 0.8;
  int shingle_width = 5;
  uint64_t seed = 0;
};

struct CandidatePair {
  std::string a;
  std::string b;
  double jaccard = 0.0;
  bool merged = false;
};

struct LshResult {
  std::vector<Document> kept;
  std::vector<CandidatePair> candidates;
};

// banding LSH over minhash signatures; band collisions are verified with
// exact shingle Jaccard before merging (keep first seen)
LshResult lsh_dedup(const std::vector<Document>& docs, const LshParams& params);

struct QualityRules {
  std::optional<size_t> min_length;        // in code points
  std::optional<size_t> max_length;
  std::optional<double> max_symbol_ratio;  // non-alphanumeric, non-space
  std::optional<double> min_alpha_ratio;
  std::vector<std::string> banned_substrings;
  // slot for model-based scorers; this project ships no model
  std::function<bool(const Document&)> scorer_hook;
};

struct QualityResult {
  std::vector<Document> kept;
  std::map<std::string, int> rejected_by_rule;
};

QualityResult quality_filter(const std::vector<Document>& docs, const QualityRules& rules);

struct CodeRepoGraph {
  std::vector<std::string> nodes;
  std::vector<std::pair<std::string, std::string>> edges;  // importer -> imported
};

struct TopoResult {
  std::vector<std::string> order;        // imported files precede importers
  std::vector<std::string> cycle_nodes;  // emitted in stable order, flagged
  bool has_cycle = false;
};

// stable topological sort; cycles degrade to flagged input order at the
// earliest legal position
TopoResult topo_sort_repo(const CodeRepoGraph& graph);

// one JSON object per line: {id, text, source}
std::vector<Document> read_jsonl(const std::filesystem::path& file);
void write_jsonl(const std::filesystem::path& file, const std::vector<Document>& docs);

}  // namespace omni::corpus
