#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace omni::tok {

// One merge rule. The merged token's id is 256 + its rank in the merge list.
struct MergeRule {
  int left;
  int right;
  bool operator==(const MergeRule&) const = default;
};

// Byte-level BPE model. Ids are laid out as:
//   [0, 256)                      raw bytes
//   [256, 256+|merges|)           merged tokens, in training order
//   [256+|merges|, vocab_size)    special tokens, in declaration order
// Specials are never produced by encode and never accepted by decode; the
// sequence assembler injects them directly by id.
class Tokenizer {
 public:
  Tokenizer() = default;
  Tokenizer(std::vector<MergeRule> merges, std::vector<std::string> specials);

  // Greedy highest-frequency pair merging until the vocab budget is spent or
  // no adjacent pair occurs at least twice. Ties break toward the lowest
  // (left, right) id pair so training is deterministic.
  static Tokenizer train(std::string_view corpus, int target_vocab,
                         std::vector<std::string> specials);

  std::vector<int> encode(std::string_view text) const;
  std::string decode(const std::vector<int>& ids) const;

  int vocab_size() const { return 256 + static_cast<int>(merges_.size() + specials_.size()); }
  const std::vector<MergeRule>& merges() const { return merges_; }
  const std::vector<std::string>& specials() const { return specials_; }

  int first_special_id() const { return 256 + static_cast<int>(merges_.size()); }
  bool is_special(int id) const { return id >= first_special_id() && id < vocab_size(); }
  // id of a named special, or -1
  int special_id(std::string_view name) const;

  void save(const std::filesystem::path& file) const;
  static Tokenizer load(const std::filesystem::path& file);

  bool operator==(const Tokenizer&) const = default;

 private:
  std::vector<MergeRule> merges_;
  std::vector<std::string> specials_;
};

// Special token names used across the project. The assembler resolves these
// by name so a tokenizer trained with different extras still works.
std::vector<std::string> default_specials();

struct DomainRate {
  std::string domain;
  uint64_t corpus_bytes = 0;
  uint64_t token_count = 0;
  bool empty_corpus = false;  // excluded from the average, flagged in output
  double rate() const { return token_count ? static_cast<double>(corpus_bytes) / token_count : 0.0; }
};

struct CompressionReport {
  std::vector<DomainRate> rows;
  bool has_warnings = false;
  double average() const;                 // unweighted mean over non-empty domains
  std::string render_table() const;       // domains x rate + Average, 2 decimals
  std::string to_json_string() const;
};

// bytes-per-token benchmark over named corpora
CompressionReport compression_rate(const Tokenizer& model,
                                   const std::vector<std::pair<std::string, std::string>>& corpora);

}  // namespace omni::tok
