#include "omni/sequencer.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "omni/rng.hpp"
#include "omni/wav.hpp"

namespace omni::seq {

Segment Segment::text_ids(std::vector<int> ids) {
  Segment s;
  s.kind = Modality::text;
  s.ids = std::move(ids);
  return s;
}

Segment Segment::text(const tok::Tokenizer& tokenizer, std::string_view text) {
  return text_ids(tokenizer.encode(text));
}

Segment Segment::from_image(img::Image image) {
  Segment s;
  s.kind = Modality::image;
  s.image = std::move(image);
  return s;
}

Segment Segment::from_audio(std::vector<float> samples, int rate) {
  Segment s;
  s.kind = Modality::audio;
  s.audio_samples = std::move(samples);
  s.audio_rate = rate;
  return s;
}

TokenBudget token_budget(const std::vector<Segment>& segments, const vision::VisionConfig& vcfg,
                         const audio::AudioConfig& acfg) {
  TokenBudget b;
  for (const auto& seg : segments) {
    switch (seg.kind) {
      case Modality::text:
        b.text += static_cast<int64_t>(seg.ids.size());
        break;
      case Modality::image:
        b.image += vision::token_budget(seg.image.width, seg.image.height, vcfg);
        b.markers += 2;
        break;
      case Modality::audio: {
        int64_t n16k = static_cast<int64_t>(seg.audio_samples.size());
        if (seg.audio_rate != acfg.sample_rate)
          n16k = n16k * acfg.sample_rate / seg.audio_rate;
        b.audio += audio::token_count_for_samples(n16k, acfg);
        b.markers += 2;
        break;
      }
    }
  }
  return b;
}

namespace {

int require_special(const tok::Tokenizer& t, std::string_view name) {
  int id = t.special_id(name);
  if (id < 0)
    throw std::runtime_error("assemble: tokenizer lacks required special token " +
                             std::string(name));
  return id;
}

void append_token(bundle::ModelBundle& m, OmniSequence& out, int id, Modality kind, int doc_id) {
  int64_t row = out.length();
  std::copy(m.lm.embed.row(id), m.lm.embed.row(id) + m.lm_config.hidden, out.embeds.row(row));
  out.token_ids.push_back(id);
  out.positions.push_back(static_cast<int>(row));
  out.modality.push_back(kind);
  out.doc_ids.push_back(doc_id);
}

void append_embeds(OmniSequence& out, const Tensor& block, Modality kind, int doc_id) {
  int64_t row = out.length();
  for (int64_t i = 0; i < block.dim(0); ++i) {
    std::copy(block.row(i), block.row(i) + block.dim(1), out.embeds.row(row + i));
    out.token_ids.push_back(-1);
    out.positions.push_back(static_cast<int>(row + i));
    out.modality.push_back(kind);
    out.doc_ids.push_back(doc_id);
  }
}

}  // namespace

OmniSequence assemble(bundle::ModelBundle& model, const std::vector<Segment>& segments,
                      int doc_id) {
  TokenBudget budget = token_budget(segments, model.vision_config, model.audio_config);
  int64_t expected = budget.total();
  if (expected > model.lm_config.max_context) {
    // name the segment that crosses the line
    int64_t run = 0;
    size_t blame = segments.size() - 1;
    for (size_t i = 0; i < segments.size(); ++i) {
      run += token_budget({segments[i]}, model.vision_config, model.audio_config).total();
      if (run > model.lm_config.max_context) {
        blame = i;
        break;
      }
    }
    throw std::runtime_error("assemble: budget overflow (" + std::to_string(expected) + " > " +
                             std::to_string(model.lm_config.max_context) + ") at segment " +
                             std::to_string(blame));
  }

  OmniSequence out;
  out.embeds = Tensor({expected, model.lm_config.hidden});

  int img_start = require_special(model.tokenizer, "<img_start>");
  int img_end = require_special(model.tokenizer, "<img_end>");
  int audio_start = require_special(model.tokenizer, "<audio_start>");
  int audio_end = require_special(model.tokenizer, "<audio_end>");

  for (const auto& seg : segments) {
    switch (seg.kind) {
      case Modality::text:
        for (int id : seg.ids) {
          if (id < 0 || id >= model.lm_config.vocab)
            throw std::runtime_error("assemble: text id outside vocab");
          append_token(model, out, id, Modality::text, doc_id);
        }
        break;
      case Modality::image: {
        if (seg.image.rgb.empty()) throw std::runtime_error("assemble: unresolved image segment");
        auto tokens = vision::encode_image(model.vision_config, model.vision, seg.image);
        append_token(model, out, img_start, Modality::text, doc_id);
        append_embeds(out, tokens.embeddings, Modality::image, doc_id);
        append_token(model, out, img_end, Modality::text, doc_id);
        break;
      }
      case Modality::audio: {
        if (seg.audio_samples.empty())
          throw std::runtime_error("assemble: unresolved audio segment");
        Tensor tokens = audio::encode_audio(model.audio_config, model.audio, seg.audio_samples,
                                            seg.audio_rate);
        append_token(model, out, audio_start, Modality::text, doc_id);
        append_embeds(out, tokens, Modality::audio, doc_id);
        append_token(model, out, audio_end, Modality::text, doc_id);
        break;
      }
    }
  }
  if (out.length() != expected)
    throw std::logic_error("assemble: emitted length disagrees with the computed budget");
  return out;
}

lm::AttnMask row_mask(const OmniSequence& row) {
  lm::AttnMask mask;
  mask.doc_ids = row.doc_ids;
  return mask;
}

Tensor forward_row(const bundle::ModelBundle& model, const OmniSequence& row) {
  return lm::forward_embed(model.lm_config, model.lm, row.embeds, row.positions, row_mask(row));
}

lm::TrainRow to_train_row(const OmniSequence& row) {
  lm::TrainRow tr;
  tr.token_ids = row.token_ids;
  tr.injected = row.embeds;
  tr.positions = row.positions;
  tr.doc_ids = row.doc_ids;
  tr.targets.assign(row.token_ids.size(), -1);
  for (size_t t = 0; t + 1 < row.token_ids.size(); ++t) {
    if (row.doc_ids[t] != row.doc_ids[t + 1]) continue;  // no loss across documents
    if (row.token_ids[t + 1] < 0) continue;              // media positions carry no target
    tr.targets[t] = row.token_ids[t + 1];
  }
  return tr;
}

std::string PackedBatch::report_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json r;
    r["length"] = row.length();
    std::vector<int> docs;
    std::vector<int64_t> lens;
    for (size_t i = 0; i < row.doc_ids.size(); ++i) {
      if (docs.empty() || docs.back() != row.doc_ids[i]) {
        docs.push_back(row.doc_ids[i]);
        lens.push_back(0);
      }
      ++lens.back();
    }
    r["doc_ids"] = docs;
    r["doc_lengths"] = lens;
    j["rows"].push_back(std::move(r));
  }
  j["truncations"] = nlohmann::json::array();
  for (const auto& tr : truncations)
    j["truncations"].push_back(
        {{"doc_id", tr.doc_id}, {"original_len", tr.original_len}, {"kept_len", tr.kept_len}});
  return j.dump(2);
}

namespace {

OmniSequence truncate_sequence(const OmniSequence& s, int64_t keep) {
  OmniSequence out;
  out.embeds = Tensor({keep, s.embeds.dim(1)});
  std::copy(s.embeds.vec().begin(), s.embeds.vec().begin() + keep * s.embeds.dim(1),
            out.embeds.vec().begin());
  auto cut = [keep](const auto& v) {
    return std::decay_t<decltype(v)>(v.begin(), v.begin() + keep);
  };
  out.token_ids = cut(s.token_ids);
  out.positions = cut(s.positions);
  out.modality = cut(s.modality);
  out.doc_ids = cut(s.doc_ids);
  return out;
}

void append_sequence(OmniSequence& row, const OmniSequence& s) {
  int64_t off = row.length();
  Tensor merged({off + s.length(), s.embeds.dim(1)});
  if (off) std::copy(row.embeds.vec().begin(), row.embeds.vec().end(), merged.vec().begin());
  std::copy(s.embeds.vec().begin(), s.embeds.vec().end(), merged.row(off));
  row.embeds = std::move(merged);
  row.token_ids.insert(row.token_ids.end(), s.token_ids.begin(), s.token_ids.end());
  row.positions.insert(row.positions.end(), s.positions.begin(), s.positions.end());
  row.modality.insert(row.modality.end(), s.modality.begin(), s.modality.end());
  row.doc_ids.insert(row.doc_ids.end(), s.doc_ids.begin(), s.doc_ids.end());
}

}  // namespace

PackedBatch pack_training(const std::vector<OmniSequence>& samples, int64_t max_len,
                          uint64_t seed) {
  if (max_len < 1) throw std::invalid_argument("pack_training: max_len must be >= 1");

  std::vector<size_t> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  for (size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.below(i)]);

  PackedBatch batch;
  OmniSequence current;
  auto flush = [&] {
    if (current.length()) batch.rows.push_back(std::move(current));
    current = OmniSequence{};
  };
  for (size_t idx : order) {
    const OmniSequence* sample = &samples[idx];
    OmniSequence clipped;
    if (sample->length() > max_len) {
      clipped = truncate_sequence(*sample, max_len);
      batch.truncations.push_back({sample->doc_ids.empty() ? 0 : sample->doc_ids[0],
                                   sample->length(), max_len});
      sample = &clipped;
    }
    if (current.length() + sample->length() > max_len) flush();
    append_sequence(current, *sample);
  }
  flush();
  return batch;
}

std::vector<Segment> chat_template(const std::vector<Turn>& turns,
                                   const tok::Tokenizer& tokenizer) {
  std::vector<Segment> out;
  for (const auto& turn : turns) {
    std::string marker;
    if (turn.role == "system")
      marker = "<role_system>";
    else if (turn.role == "user")
      marker = "<role_user>";
    else if (turn.role == "assistant")
      marker = "<role_assistant>";
    else
      throw std::runtime_error("chat_template: unknown role '" + turn.role + "'");
    out.push_back(Segment::text_ids({require_special(tokenizer, marker)}));
    out.insert(out.end(), turn.segments.begin(), turn.segments.end());
    out.push_back(Segment::text_ids({require_special(tokenizer, "<turn_end>")}));
  }
  return out;
}

std::vector<ManifestSample> read_manifest(const std::filesystem::path& file,
                                          const tok::Tokenizer& tokenizer) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("manifest: cannot open " + file.string());
  std::vector<ManifestSample> samples;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    ManifestSample sample;
    sample.doc_id = j.value("doc_id", lineno);
    for (const auto& seg : j.at("segments")) {
      std::string kind = seg.at("kind").get<std::string>();
      if (kind == "text") {
        sample.segments.push_back(Segment::text(tokenizer, seg.at("text").get<std::string>()));
      } else if (kind == "image") {
        sample.segments.push_back(
            Segment::from_image(img::load_image(seg.at("path").get<std::string>())));
      } else if (kind == "audio") {
        auto wav = wav::read_wav(seg.at("path").get<std::string>());
        sample.segments.push_back(Segment::from_audio(std::move(wav.samples), wav.sample_rate));
      } else {
        throw std::runtime_error("manifest: unknown segment kind '" + kind + "'");
      }
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

}  // namespace omni::seq
