#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "omni/bundle.hpp"
#include "omni/image.hpp"
#include "omni/lm.hpp"
#include "omni/lm_train.hpp"
#include "omni/tensor.hpp"

namespace omni::seq {

enum class Modality { text, image, audio };

struct Segment {
  Modality kind = Modality::text;
  std::vector<int> ids;            // text payload
  img::Image image;                // image payload
  std::vector<float> audio_samples;
  int audio_rate = 16000;

  static Segment text_ids(std::vector<int> ids);
  static Segment text(const tok::Tokenizer& tokenizer, std::string_view s);
  static Segment from_image(img::Image image);
  static Segment from_audio(std::vector<float> samples, int rate);
};

struct OmniSequence {
  Tensor embeds;                 // [len, hidden]
  std::vector<int> token_ids;    // -1 at media positions
  std::vector<int> positions;    // restart at 0 per document
  std::vector<Modality> modality;
  std::vector<int> doc_ids;
  int64_t length() const { return static_cast<int64_t>(token_ids.size()); }
};

struct TokenBudget {
  int64_t text = 0;
  int64_t image = 0;
  int64_t audio = 0;
  int64_t markers = 0;
  int64_t total() const { return text + image + audio + markers; }
};

// exact counts assemble would produce, computed from plans alone
TokenBudget token_budget(const std::vector<Segment>& segments,
                         const vision::VisionConfig& vcfg = {},
                         const audio::AudioConfig& acfg = {});

// media blocks wrapped in <img_start>/<img_end> and <audio_start>/<audio_end>
OmniSequence assemble(bundle::ModelBundle& model, const std::vector<Segment>& segments,
                      int doc_id = 0);

lm::AttnMask row_mask(const OmniSequence& row);

// packed row forward; equals per-document forward under the block mask
Tensor forward_row(const bundle::ModelBundle& model, const OmniSequence& row);

// next-token targets within each document; media positions carry no loss
lm::TrainRow to_train_row(const OmniSequence& row);

struct TruncationRecord {
  int doc_id = 0;
  int64_t original_len = 0;
  int64_t kept_len = 0;
};

struct PackedBatch {
  std::vector<OmniSequence> rows;
  std::vector<TruncationRecord> truncations;
  std::string report_json() const;
};

// seeded shuffle, greedy fill; over-length samples are tail-truncated
PackedBatch pack_training(const std::vector<OmniSequence>& samples, int64_t max_len, uint64_t seed);

struct Turn {
  std::string role;  // system | user | assistant
  std::vector<Segment> segments;
};

// wraps each turn in role-marker specials consumable by assemble
std::vector<Segment> chat_template(const std::vector<Turn>& turns, const tok::Tokenizer& tokenizer);

// JSONL sample manifest: {doc_id, segments: [{kind, text | path}]}
struct ManifestSample {
  int doc_id = 0;
  std::vector<Segment> segments;
};
std::vector<ManifestSample> read_manifest(const std::filesystem::path& file,
                                          const tok::Tokenizer& tokenizer);

}  // namespace omni::seq
