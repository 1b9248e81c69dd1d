#include "omni/websearch.hpp"

#include <stdexcept>

#include <json.hpp>

#define CPPHTTPLIB_NO_EXCEPTIONS 0
#include <httplib.h>

namespace omni::websearch {

std::string ScriptedBackend::complete(const std::string&) {
  if (next_ >= responses_.size())
    throw std::runtime_error("scripted backend: no response left for this call");
  return responses_[next_++];
}

MockSearchClient::MockSearchClient() {
  fixtures_["capital-fixture"] = {
      {"mock://capital/1", "Gazetteer entry",
       "Sampleton has served as the capital of Exampleland since 1901."},
      {"mock://capital/2", "Exampleland almanac",
       "Government offices are concentrated in Sampleton, the seat of parliament."},
      {"mock://capital/3", "Travel notes",
       "Most visitors arrive through Sampleton, the administrative capital."}};
  fixtures_["weather-fixture"] = {
      {"mock://weather/1", "Climate survey", "Coastal towns report mild winters and wet springs."},
      {"mock://weather/2", "Field observations", "Inland plateaus see large day-night swings."}};
}

std::vector<SearchResult> MockSearchClient::search(const std::string& query) {
  auto it = fixtures_.find(query);
  return it == fixtures_.end() ? std::vector<SearchResult>{} : it->second;
}

void MockSearchClient::add_fixture(const std::string& query, std::vector<SearchResult> results) {
  fixtures_[query] = std::move(results);
}

HttpSearchClient::HttpSearchClient(std::string host, int port, std::string path)
    : host_(std::move(host)), port_(port), path_(std::move(path)) {}

std::vector<SearchResult> HttpSearchClient::search(const std::string& query) {
  httplib::Client client(host_, port_);
  client.set_read_timeout(10, 0);
  httplib::Params params{{"q", query}};
  auto res = client.Get(path_, params, httplib::Headers{});
  if (!res || res->status != 200)
    throw std::runtime_error("http search: request failed" +
                             (res ? " with status " + std::to_string(res->status) : ""));
  auto j = nlohmann::json::parse(res->body);
  std::vector<SearchResult> out;
  for (const auto& e : j) {
    out.push_back({e.value("url", ""), e.value("title", ""), e.value("snippet", "")});
  }
  return out;
}

std::string PipelineTranscript::to_json_string() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["query"] = query;
  j["degraded"] = degraded;
  j["parse_failure"] = parse_failure;
  j["answer"] = answer;
  auto& steps_json = j["steps"] = nlohmann::json::array();
  for (const auto& s : steps) {
    steps_json.push_back({{"state", s.state},
                          {"source_index", s.source_index},
                          {"prompts", s.prompts},
                          {"outputs", s.outputs}});
  }
  return j.dump(2);
}

namespace {

const char* kDecideSchema =
    "You may answer directly or call web search.\n"
    "Reply with exactly one JSON object and nothing else.\n"
    "Schema: {\"action\": \"answer\"} or {\"action\": \"search\", \"query\": \"<terms>\"}\n";

bool parse_decision(const std::string& raw, SearchDecision& out) {
  nlohmann::json j = nlohmann::json::parse(raw, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("action")) return false;
  if (!j["action"].is_string()) return false;
  std::string action = j["action"].get<std::string>();
  if (action == "answer") {
    out.mode = SearchDecision::Mode::direct_answer;
    out.query_rewrite.clear();
    return true;
  }
  if (action == "search") {
    if (!j.contains("query") || !j["query"].is_string()) return false;
    std::string q = j["query"].get<std::string>();
    if (q.empty()) return false;
    out.mode = SearchDecision::Mode::search;
    out.query_rewrite = q;
    return true;
  }
  return false;
}

}  // namespace

SearchDecision decide(const std::string& query, LlmBackend& backend,
                      PipelineTranscript* transcript) {
  if (query.empty()) throw std::invalid_argument("decide: empty query");

  Step step;
  step.state = "Decide";
  SearchDecision decision;
  std::string prompt = std::string(kDecideSchema) + "User query: " + query;
  bool ok = false;
  for (int attempt = 0; attempt < 2 && !ok; ++attempt) {
    std::string raw;
    try {
      raw = backend.complete(prompt);
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("pipeline step Decide: backend failed: ") + e.what());
    }
    step.prompts.push_back(prompt);
    step.outputs.push_back(raw);
    ok = parse_decision(raw, decision);
    prompt = std::string("Your previous reply was not one valid JSON object.\n") + kDecideSchema +
             "User query: " + query;
  }
  if (!ok) {
    decision.mode = SearchDecision::Mode::direct_answer;
    decision.query_rewrite.clear();
    decision.parse_failure = true;
  }
  if (transcript) {
    transcript->steps.push_back(std::move(step));
    transcript->parse_failure = transcript->parse_failure || decision.parse_failure;
  }
  return decision;
}

PipelineResult run_pipeline(const std::string& query, LlmBackend& backend, SearchClient& client,
                            int k_sources) {
  if (k_sources < 1) throw std::invalid_argument("run_pipeline: k_sources must be >= 1");

  PipelineResult result;
  PipelineTranscript& tr = result.transcript;
  tr.query = query;

  SearchDecision decision = decide(query, backend, &tr);

  struct Extracted {
    int index;
    SearchResult source;
    std::string passage;
    std::string summary;
  };
  std::vector<Extracted> survivors;

  if (decision.mode == SearchDecision::Mode::search) {
    std::vector<SearchResult> results;
    bool search_ok = true;
    try {
      results = client.search(decision.query_rewrite);
    } catch (const std::exception&) {
      search_ok = false;
    }
    if (!search_ok || results.empty()) {
      tr.degraded = true;
    } else {
      Step search_step;
      search_step.state = "Search";
      search_step.prompts.push_back(decision.query_rewrite);
      nlohmann::json urls = nlohmann::json::array();
      for (const auto& r : results) urls.push_back(r.url);
      search_step.outputs.push_back(urls.dump());
      tr.steps.push_back(std::move(search_step));

      int n = std::min<int>(k_sources, static_cast<int>(results.size()));
      for (int i = 0; i < n; ++i) {
        Step step;
        step.state = "Extract";
        step.source_index = i;
        std::string prompt = "Extract the passage most relevant to the query.\nQuery: " + query +
                             "\nSource [" + std::to_string(i) + "] " + results[size_t(i)].url +
                             "\nTitle: " + results[size_t(i)].title + "\n" +
                             results[size_t(i)].snippet + "\nRelevant passage:";
        std::string passage;
        bool failed = false;
        try {
          passage = backend.complete(prompt);
        } catch (const std::exception&) {
          failed = true;
        }
        step.prompts.push_back(prompt);
        step.outputs.push_back(passage);
        tr.steps.push_back(std::move(step));
        if (!failed && !passage.empty())
          survivors.push_back({i, results[size_t(i)], passage, ""});
      }

      for (auto& src : survivors) {
        Step step;
        step.state = "Summarize";
        step.source_index = src.index;
        std::string prompt = "Summarize the passage for answering the query.\nQuery: " + query +
                             "\nPassage: " + src.passage + "\nSummary:";
        std::string summary;
        try {
          summary = backend.complete(prompt);
        } catch (const std::exception&) {
          summary.clear();
        }
        step.prompts.push_back(prompt);
        step.outputs.push_back(summary);
        tr.steps.push_back(std::move(step));
        src.summary = summary;
      }
      std::erase_if(survivors, [](const Extracted& e) { return e.summary.empty(); });
      if (survivors.empty()) tr.degraded = true;
    }
  }

  Step answer_step;
  answer_step.state = "Answer";
  std::string prompt;
  if (!survivors.empty()) {
    prompt = "Answer the query using the numbered summaries.\nQuery: " + query + "\nSummaries:\n";
    for (size_t i = 0; i < survivors.size(); ++i)
      prompt += "[" + std::to_string(i + 1) + "] " + survivors[i].summary + "\n";
    prompt += "Answer:";
  } else {
    prompt = "Answer the query.\nQuery: " + query + "\nAnswer:";
  }
  std::string answer;
  try {
    answer = backend.complete(prompt);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("pipeline step Answer: backend failed: ") + e.what());
  }
  answer_step.prompts.push_back(prompt);
  answer_step.outputs.push_back(answer);
  tr.steps.push_back(std::move(answer_step));

  tr.answer = answer;
  result.answer = answer;
  return result;
}

}  // namespace omni::websearch
