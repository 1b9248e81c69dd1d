#include <doctest.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "omni/rng.hpp"
#include "omni/sequencer.hpp"
#include "omni/wav.hpp"

using namespace omni::seq;
using omni::Rng;
using omni::Tensor;
using omni::bundle::ModelBundle;

namespace {

ModelBundle& shared_bundle() {
  static ModelBundle bundle = ModelBundle::init_toy(12345);
  return bundle;
}

omni::img::Image noise_image(int w, int h, uint64_t seed) {
  omni::img::Image im;
  im.width = w;
  im.height = h;
  im.rgb.resize(static_cast<size_t>(w) * h * 3);
  Rng rng(seed);
  for (auto& v : im.rgb) v = static_cast<float>(rng.uniform());
  return im;
}

std::vector<float> noise_audio(double seconds, uint64_t seed) {
  Rng rng(seed);
  std::vector<float> s(static_cast<size_t>(seconds * 16000));
  for (auto& v : s) v = 0.3f * static_cast<float>(rng.uniform(-1.0, 1.0));
  return s;
}

std::vector<int> random_ids(const ModelBundle& m, int n, uint64_t seed) {
  Rng rng(seed);
  std::vector<int> ids;
  for (int i = 0; i < n; ++i) ids.push_back(static_cast<int>(rng.below(256)));
  (void)m;
  return ids;
}

// synthetic text-only sequence, bypassing assemble, for packing tests
OmniSequence make_text_seq(const ModelBundle& m, int64_t len, int doc_id, uint64_t seed) {
  OmniSequence s;
  s.embeds = Tensor({len, m.lm_config.hidden});
  Rng rng(seed);
  for (int64_t t = 0; t < len; ++t) {
    int id = static_cast<int>(rng.below(256));
    std::copy(m.lm.embed.row(id), m.lm.embed.row(id) + m.lm_config.hidden, s.embeds.row(t));
    s.token_ids.push_back(id);
    s.positions.push_back(static_cast<int>(t));
    s.modality.push_back(Modality::text);
    s.doc_ids.push_back(doc_id);
  }
  return s;
}

nlohmann::json describe_segments(const std::vector<Segment>& segs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : segs) {
    nlohmann::json j;
    switch (s.kind) {
      case Modality::text:
        j["kind"] = "text";
        j["ids"] = s.ids;
        break;
      case Modality::image:
        j["kind"] = "image";
        j["w"] = s.image.width;
        j["h"] = s.image.height;
        break;
      case Modality::audio:
        j["kind"] = "audio";
        j["samples"] = s.audio_samples.size();
        break;
    }
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace

TEST_CASE("token_budget: stated examples") {
  auto& m = shared_bundle();
  auto img_budget = token_budget({Segment::from_image(noise_image(4000, 500, 1))});
  CHECK(img_budget.image == 576);
  CHECK(img_budget.markers == 2);

  auto audio_budget = token_budget({Segment::from_audio(noise_audio(75.0, 2), 16000)});
  CHECK(audio_budget.audio == 3750);
  CHECK(audio_budget.markers == 2);

  auto empty = token_budget({});
  CHECK(empty.total() == 0);
  (void)m;
}

TEST_CASE("assemble: text-only rows are embedding lookups") {
  auto& m = shared_bundle();
  auto ids = random_ids(m, 12, 3);
  auto seq = assemble(m, {Segment::text_ids(ids)});
  REQUIRE(seq.length() == 12);
  for (int64_t t = 0; t < 12; ++t) {
    CHECK(seq.token_ids[static_cast<size_t>(t)] == ids[static_cast<size_t>(t)]);
    for (int64_t j = 0; j < m.lm_config.hidden; ++j)
      CHECK(seq.embeds(t, j) == m.lm.embed(ids[static_cast<size_t>(t)], j));
  }
}

TEST_CASE("assemble: text+image+text layout is 10 + 1 + 64 + 1 + 5") {
  auto& m = shared_bundle();
  std::vector<Segment> segs = {Segment::text_ids(random_ids(m, 10, 4)),
                               Segment::from_image(noise_image(448, 448, 5)),
                               Segment::text_ids(random_ids(m, 5, 6))};
  auto seq = assemble(m, segs);
  REQUIRE(seq.length() == 81);
  CHECK(seq.token_ids[10] == m.tokenizer.special_id("<img_start>"));
  CHECK(seq.token_ids[75] == m.tokenizer.special_id("<img_end>"));
  for (int t = 11; t < 75; ++t) {
    CHECK(seq.token_ids[static_cast<size_t>(t)] == -1);
    CHECK(seq.modality[static_cast<size_t>(t)] == Modality::image);
  }
  // positions sequential from zero
  for (int64_t t = 0; t < seq.length(); ++t) CHECK(seq.positions[static_cast<size_t>(t)] == t);
}

TEST_CASE("assemble: one second of audio occupies 52 positions") {
  auto& m = shared_bundle();
  auto seq = assemble(m, {Segment::from_audio(noise_audio(1.0, 7), 16000)});
  CHECK(seq.length() == 52);  // marker + 50 + marker
  CHECK(seq.token_ids[0] == m.tokenizer.special_id("<audio_start>"));
  CHECK(seq.token_ids[51] == m.tokenizer.special_id("<audio_end>"));
}

TEST_CASE("assemble: length always equals the precomputed budget (property)") {
  auto& m = shared_bundle();
  Rng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Segment> segs;
    int picks = 1 + static_cast<int>(rng.below(4));
    for (int i = 0; i < picks; ++i) {
      switch (rng.below(3)) {
        case 0:
          segs.push_back(Segment::text_ids(random_ids(m, 1 + int(rng.below(30)), rng.next())));
          break;
        case 1:
          segs.push_back(Segment::from_image(
              noise_image(300 + int(rng.below(600)), 300 + int(rng.below(600)), rng.next())));
          break;
        default:
          segs.push_back(Segment::from_audio(noise_audio(0.3 + rng.uniform() * 1.5, rng.next()),
                                             16000));
          break;
      }
    }
    auto budget = token_budget(segs, m.vision_config, m.audio_config);
    auto seq = assemble(m, segs);
    CHECK(seq.length() == budget.total());
  }
}

TEST_CASE("assemble: budget overflow names the offending segment") {
  auto& m = shared_bundle();
  std::vector<Segment> segs;
  for (int i = 0; i < 3; ++i) segs.push_back(Segment::text_ids(random_ids(m, 2000, 9 + i)));
  try {
    assemble(m, segs);
    FAIL("expected overflow");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("segment 2") != std::string::npos);
  }
}

TEST_CASE("pack: greedy fill with identity shuffle") {
  auto& m = shared_bundle();
  // find a seed whose 3-element Fisher-Yates permutation is identity
  uint64_t seed = 0;
  for (;; ++seed) {
    std::vector<size_t> order{0, 1, 2};
    Rng rng(seed);
    for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    if (order[0] == 0 && order[1] == 1 && order[2] == 2) break;
  }
  std::vector<OmniSequence> samples;
  samples.push_back(make_text_seq(m, 2000, 1, 11));
  samples.push_back(make_text_seq(m, 2000, 2, 12));
  samples.push_back(make_text_seq(m, 1000, 3, 13));
  auto batch = pack_training(samples, 4096, seed);
  REQUIRE(batch.rows.size() == 2);
  CHECK(batch.rows[0].length() == 4000);
  CHECK(batch.rows[1].length() == 1000);
  CHECK(batch.truncations.empty());
}

TEST_CASE("pack: oversize sample is tail-truncated and recorded") {
  auto& m = shared_bundle();
  std::vector<OmniSequence> samples;
  samples.push_back(make_text_seq(m, 5000, 7, 21));
  auto batch = pack_training(samples, 4096, 3);
  REQUIRE(batch.rows.size() == 1);
  CHECK(batch.rows[0].length() == 4096);
  REQUIRE(batch.truncations.size() == 1);
  CHECK(batch.truncations[0].doc_id == 7);
  CHECK(batch.truncations[0].original_len == 5000);
  CHECK(batch.truncations[0].kept_len == 4096);
  CHECK(batch.report_json().find("truncations") != std::string::npos);
}

TEST_CASE("pack: conservation and row bounds (property)") {
  auto& m = shared_bundle();
  Rng rng(31);
  std::vector<OmniSequence> samples;
  std::map<int, int64_t> want;  // doc -> expected kept length
  for (int i = 0; i < 17; ++i) {
    int64_t len = 1 + static_cast<int64_t>(rng.below(900));
    samples.push_back(make_text_seq(m, len, 100 + i, rng.next()));
    want[100 + i] = std::min<int64_t>(len, 512);
  }
  auto batch = pack_training(samples, 512, 77);
  std::map<int, int64_t> got;
  for (const auto& row : batch.rows) {
    CHECK(row.length() <= 512);
    int64_t sum = 0;
    for (int doc : row.doc_ids) {
      ++got[doc];
      ++sum;
    }
    CHECK(sum == row.length());
  }
  CHECK(got == want);
}

TEST_CASE("pack: seed determinism is byte-identical") {
  auto& m = shared_bundle();
  std::vector<OmniSequence> samples;
  for (int i = 0; i < 9; ++i) samples.push_back(make_text_seq(m, 40 + i * 13, i, 50 + i));
  auto a = pack_training(samples, 256, 99);
  auto b = pack_training(samples, 256, 99);
  REQUIRE(a.rows.size() == b.rows.size());
  for (size_t r = 0; r < a.rows.size(); ++r) {
    CHECK(a.rows[r].token_ids == b.rows[r].token_ids);
    CHECK(a.rows[r].doc_ids == b.rows[r].doc_ids);
    CHECK(a.rows[r].positions == b.rows[r].positions);
    REQUIRE(a.rows[r].embeds.numel() == b.rows[r].embeds.numel());
    CHECK(std::memcmp(a.rows[r].embeds.data(), b.rows[r].embeds.data(),
                      sizeof(float) * static_cast<size_t>(a.rows[r].embeds.numel())) == 0);
  }
  auto c = pack_training(samples, 256, 100);
  bool same_order = a.rows.size() == c.rows.size();
  if (same_order)
    for (size_t r = 0; r < a.rows.size(); ++r)
      same_order = same_order && a.rows[r].doc_ids == c.rows[r].doc_ids;
  CHECK(!same_order);  // different seed shuffles differently
}

TEST_CASE("pack: block mask isolates documents in the forward pass") {
  auto& m = shared_bundle();
  std::vector<OmniSequence> samples;
  samples.push_back(make_text_seq(m, 18, 1, 61));
  samples.push_back(make_text_seq(m, 11, 2, 62));
  samples.push_back(make_text_seq(m, 7, 3, 63));
  auto batch = pack_training(samples, 64, 5);
  REQUIRE(batch.rows.size() == 1);
  const auto& row = batch.rows[0];

  Tensor packed = forward_row(m, row);
  // packed-row logits must equal each document run alone
  int64_t off = 0;
  std::map<int, const OmniSequence*> by_doc;
  for (const auto& s : samples) by_doc[s.doc_ids[0]] = &s;
  while (off < row.length()) {
    int doc = row.doc_ids[static_cast<size_t>(off)];
    const OmniSequence& alone = *by_doc.at(doc);
    Tensor solo = forward_row(m, alone);
    for (int64_t t = 0; t < alone.length(); ++t)
      for (int64_t j = 0; j < solo.dim(1); ++j)
        CHECK(std::abs(packed(off + t, j) - solo(t, j)) < 1e-6);
    off += alone.length();
  }
}

TEST_CASE("to_train_row: next-token targets stop at document edges and media") {
  auto& m = shared_bundle();
  auto seq = assemble(m, {Segment::text_ids({5, 6}),
                          Segment::from_audio(noise_audio(0.5, 71), 16000),
                          Segment::text_ids({9})});
  auto row = to_train_row(seq);
  REQUIRE(row.targets.size() == static_cast<size_t>(seq.length()));
  CHECK(row.targets[0] == 6);
  CHECK(row.targets[1] == m.tokenizer.special_id("<audio_start>"));
  // inside the audio block every target is disabled
  for (int64_t t = 3; t < 2 + 25; ++t) CHECK(row.targets[static_cast<size_t>(t)] == -1);
  CHECK(row.targets[row.targets.size() - 1] == -1);  // last position has no successor

  // packed rows never create targets across document boundaries
  auto a = make_text_seq(m, 6, 1, 81);
  auto b = make_text_seq(m, 5, 2, 82);
  auto batch = pack_training({a, b}, 32, 1);
  REQUIRE(batch.rows.size() == 1);
  auto packed_row = to_train_row(batch.rows[0]);
  int boundary = 5;  // last position of the first doc in the row
  if (batch.rows[0].doc_ids[0] == 2) boundary = 4;
  CHECK(packed_row.targets[static_cast<size_t>(boundary)] == -1);
}

TEST_CASE("chat_template: structure and errors") {
  auto& m = shared_bundle();
  CHECK(chat_template({}, m.tokenizer).empty());

  auto segs = chat_template({{"user", {Segment::text_ids({10, 11})}}}, m.tokenizer);
  REQUIRE(segs.size() == 3);
  CHECK(segs[0].ids == std::vector<int>{m.tokenizer.special_id("<role_user>")});
  CHECK(segs[1].ids == std::vector<int>{10, 11});
  CHECK(segs[2].ids == std::vector<int>{m.tokenizer.special_id("<turn_end>")});

  CHECK_THROWS_AS(chat_template({{"narrator", {}}}, m.tokenizer), std::runtime_error);
}

TEST_CASE("chat_template: golden three-turn mixed conversation") {
  auto& m = shared_bundle();
  std::vector<Turn> turns = {
      {"system", {Segment::text(m.tokenizer, "be concise")}},
      {"user",
       {Segment::text(m.tokenizer, "what is in this picture and clip"),
        Segment::from_image(noise_image(640, 480, 91)),
        Segment::from_audio(noise_audio(1.0, 92), 16000)}},
      {"assistant", {Segment::text(m.tokenizer, "a synthetic test pattern")}},
  };
  auto segs = chat_template(turns, m.tokenizer);
  auto got = describe_segments(segs);

  auto path = std::filesystem::path(OMNI_FIXTURES_DIR) / "golden" / "chat_template.json";
  if (std::getenv("OMNI_REGEN_GOLDEN")) std::ofstream(path) << got.dump(2);
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "golden fixture missing; run with OMNI_REGEN_GOLDEN=1");
  CHECK(got == nlohmann::json::parse(in));
}

TEST_CASE("manifest: jsonl with text and media paths") {
  auto& m = shared_bundle();
  auto dir = std::filesystem::temp_directory_path() / "omni_seq_test";
  std::filesystem::create_directories(dir);
  omni::img::save_ppm(dir / "img.ppm", noise_image(100, 80, 95));
  omni::wav::write_wav(dir / "a.wav", noise_audio(0.5, 96), 16000);

  std::ofstream mf(dir / "samples.jsonl");
  mf << nlohmann::json{{"doc_id", 1},
                       {"segments", {{{"kind", "text"}, {"text", "hello"}}}}}
            .dump()
     << "\n";
  mf << nlohmann::json{
            {"doc_id", 2},
            {"segments",
             {{{"kind", "image"}, {"path", (dir / "img.ppm").string()}},
              {{"kind", "audio"}, {"path", (dir / "a.wav").string()}}}}}
            .dump()
     << "\n";
  mf.close();

  auto samples = read_manifest(dir / "samples.jsonl", m.tokenizer);
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].doc_id == 1);
  CHECK(samples[0].segments[0].kind == Modality::text);
  CHECK(samples[1].segments[0].kind == Modality::image);
  CHECK(samples[1].segments[0].image.width == 100);
  CHECK(samples[1].segments[1].kind == Modality::audio);
  CHECK(samples[1].segments[1].audio_samples.size() == 8000);
}

TEST_CASE("bundle: checkpoint save/load round trip with shape validation") {
  auto dir = std::filesystem::temp_directory_path() / "omni_bundle_test";
  std::filesystem::remove_all(dir);
  auto m = ModelBundle::init_tiny(21);
  m.save(dir);
  auto loaded = ModelBundle::load(dir);
  CHECK(loaded.tokenizer == m.tokenizer);
  CHECK(loaded.lm_config.hidden == m.lm_config.hidden);
  auto refs_a = m.registry();
  auto refs_b = loaded.registry();
  REQUIRE(refs_a.size() == refs_b.size());
  for (size_t i = 0; i < refs_a.size(); ++i) {
    CHECK(refs_a[i].name == refs_b[i].name);
    CHECK(refs_a[i].tag == refs_b[i].tag);
    CHECK(std::memcmp(refs_a[i].tensor->data(), refs_b[i].tensor->data(),
                      sizeof(float) * static_cast<size_t>(refs_a[i].tensor->numel())) == 0);
  }

  // a shape mismatch in the manifest must be rejected
  auto manifest_path = dir / "manifest.json";
  auto manifest = nlohmann::json::parse(std::ifstream(manifest_path));
  manifest["tensors"]["lm.embed"]["shape"] = {1, 1};
  std::ofstream(manifest_path) << manifest.dump(2);
  CHECK_THROWS_AS(ModelBundle::load(dir), std::runtime_error);
}
