#include "omni/tokenizer.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace omni::tok {

namespace {

uint64_t pair_key(int a, int b) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) | static_cast<uint32_t>(b);
}

// single left-to-right pass replacing (left, right) with merged_id
void apply_merge(std::vector<int>& syms, int left, int right, int merged_id) {
  size_t w = 0;
  for (size_t r = 0; r < syms.size();) {
    if (r + 1 < syms.size() && syms[r] == left && syms[r + 1] == right) {
      syms[w++] = merged_id;
      r += 2;
    } else {
      syms[w++] = syms[r++];
    }
  }
  syms.resize(w);
}

}  // namespace

Tokenizer::Tokenizer(std::vector<MergeRule> merges, std::vector<std::string> specials)
    : merges_(std::move(merges)), specials_(std::move(specials)) {
  int next_id = 256;
  for (const auto& m : merges_) {
    if (m.left < 0 || m.left >= next_id || m.right < 0 || m.right >= next_id)
      throw std::invalid_argument("tokenizer: merge references an id not yet defined");
    ++next_id;
  }
}

Tokenizer Tokenizer::train(std::string_view corpus, int target_vocab,
                           std::vector<std::string> specials) {
  int floor_vocab = 256 + static_cast<int>(specials.size());
  if (target_vocab < floor_vocab)
    throw std::invalid_argument("train_bpe: target_vocab " + std::to_string(target_vocab) +
                                " is below 256 + " + std::to_string(specials.size()) +
                                " specials");
  if (corpus.empty()) throw std::invalid_argument("train_bpe: empty corpus");

  std::vector<int> syms;
  syms.reserve(corpus.size());
  for (unsigned char c : corpus) syms.push_back(c);

  int merge_budget = target_vocab - floor_vocab;
  std::vector<MergeRule> merges;
  merges.reserve(static_cast<size_t>(merge_budget));

  std::unordered_map<uint64_t, int64_t> counts;
  while (static_cast<int>(merges.size()) < merge_budget) {
    counts.clear();
    for (size_t i = 0; i + 1 < syms.size(); ++i) ++counts[pair_key(syms[i], syms[i + 1])];

    int64_t best_count = 0;
    uint64_t best_pair = 0;
    for (const auto& [key, count] : counts) {
      if (count > best_count || (count == best_count && key < best_pair)) {
        best_count = count;
        best_pair = key;
      }
    }
    if (best_count < 2) break;  // no pair worth a token

    int left = static_cast<int>(best_pair >> 32);
    int right = static_cast<int>(best_pair & 0xffffffffu);
    int merged_id = 256 + static_cast<int>(merges.size());
    apply_merge(syms, left, right, merged_id);
    merges.push_back({left, right});
  }
  return Tokenizer(std::move(merges), std::move(specials));
}

std::vector<int> Tokenizer::encode(std::string_view text) const {
  std::vector<int> syms;
  syms.reserve(text.size());
  for (unsigned char c : text) syms.push_back(c);
  // Merges applied in rank order. A merge can only create adjacencies that
  // involve its own (later-ranked) output token, so one ascending pass is
  // complete.
  for (size_t rank = 0; rank < merges_.size(); ++rank) {
    if (syms.size() < 2) break;
    apply_merge(syms, merges_[rank].left, merges_[rank].right, 256 + static_cast<int>(rank));
  }
  return syms;
}

std::string Tokenizer::decode(const std::vector<int>& ids) const {
  // expand merge ids depth-first; bytes are the leaves
  std::string out;
  std::vector<int> stack;
  for (int id : ids) {
    if (id < 0 || id >= vocab_size())
      throw std::runtime_error("decode: unknown token id " + std::to_string(id));
    if (is_special(id))
      throw std::runtime_error("decode: id " + std::to_string(id) + " is the special token '" +
                               specials_[static_cast<size_t>(id - first_special_id())] +
                               "', which decode does not accept");
    stack.push_back(id);
    while (!stack.empty()) {
      int cur = stack.back();
      stack.pop_back();
      if (cur < 256) {
        out.push_back(static_cast<char>(cur));
      } else {
        const MergeRule& m = merges_[static_cast<size_t>(cur - 256)];
        stack.push_back(m.right);
        stack.push_back(m.left);
      }
    }
  }
  return out;
}

int Tokenizer::special_id(std::string_view name) const {
  for (size_t i = 0; i < specials_.size(); ++i)
    if (specials_[i] == name) return first_special_id() + static_cast<int>(i);
  return -1;
}

void Tokenizer::save(const std::filesystem::path& file) const {
  nlohmann::json j;
  j["version"] = 1;
  j["specials"] = specials_;
  auto& m = j["merges"] = nlohmann::json::array();
  for (const auto& r : merges_) m.push_back({r.left, r.right});
  j["vocab_size"] = vocab_size();
  std::ofstream out(file);
  if (!out) throw std::runtime_error("tokenizer save: cannot open " + file.string());
  out << j.dump(2) << "\n";
}

Tokenizer Tokenizer::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("tokenizer load: cannot open " + file.string());
  nlohmann::json j = nlohmann::json::parse(in);
  std::vector<MergeRule> merges;
  for (const auto& p : j.at("merges")) merges.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
  std::vector<std::string> specials = j.at("specials").get<std::vector<std::string>>();
  Tokenizer t(std::move(merges), std::move(specials));
  if (j.at("vocab_size").get<int>() != t.vocab_size())
    throw std::runtime_error("tokenizer load: vocab_size field does not match merges + specials");
  return t;
}

std::vector<std::string> default_specials() {
  return {"<pad>",         "<bos>",       "<eos>",        "<img_start>",
          "<img_end>",     "<audio_start>", "<audio_end>", "<role_system>",
          "<role_user>",   "<role_assistant>", "<turn_end>"};
}

double CompressionReport::average() const {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : rows) {
    if (r.empty_corpus) continue;
    sum += r.rate();
    ++n;
  }
  return n ? sum / n : 0.0;
}

std::string CompressionReport::render_table() const {
  size_t width = 7;  // "Average"
  for (const auto& r : rows) width = std::max(width, r.domain.size());
  std::ostringstream os;
  os << "Compression Rate (Bytes/Tokens)\n";
  char buf[64];
  for (const auto& r : rows) {
    os << r.domain << std::string(width - r.domain.size() + 2, ' ');
    if (r.empty_corpus) {
      os << "n/a (empty corpus)\n";
    } else {
      std::snprintf(buf, sizeof buf, "%.2f", r.rate());
      os << buf << "\n";
    }
  }
  std::snprintf(buf, sizeof buf, "%.2f", average());
  os << "Average" << std::string(width - 7 + 2, ' ') << buf << "\n";
  return os.str();
}

std::string CompressionReport::to_json_string() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  auto& domains = j["domains"] = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json d;
    d["domain"] = r.domain;
    if (r.empty_corpus) {
      d["warning"] = "empty corpus";
    } else {
      d["corpus_bytes"] = r.corpus_bytes;
      d["token_count"] = r.token_count;
      d["rate"] = r.rate();
    }
    domains.push_back(std::move(d));
  }
  j["average"] = average();
  j["has_warnings"] = has_warnings;
  return j.dump(2);
}

CompressionReport compression_rate(
    const Tokenizer& model, const std::vector<std::pair<std::string, std::string>>& corpora) {
  CompressionReport report;
  for (const auto& [name, text] : corpora) {
    DomainRate row;
    row.domain = name;
    if (text.empty()) {
      row.empty_corpus = true;
      report.has_warnings = true;
    } else {
      row.corpus_bytes = text.size();
      row.token_count = model.encode(text).size();
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace omni::tok
