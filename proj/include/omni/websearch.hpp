#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace omni::websearch {

// text-in text-out model interface; the pipeline never sees anything else
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

// canned responses consumed in order; running past the script is an error
class ScriptedBackend : public LlmBackend {
 public:
  explicit ScriptedBackend(std::vector<std::string> responses)
      : responses_(std::move(responses)) {}
  std::string complete(const std::string& prompt) override;

 private:
  std::vector<std::string> responses_;
  size_t next_ = 0;
};

struct SearchResult {
  std::string url;
  std::string title;
  std::string snippet;
};

class SearchClient {
 public:
  virtual ~SearchClient() = default;
  virtual std::vector<SearchResult> search(const std::string& query) = 0;
};

// deterministic fixtures keyed by query; unknown queries return nothing
class MockSearchClient : public SearchClient {
 public:
  MockSearchClient();  // seeds the built-in fixtures
  std::vector<SearchResult> search(const std::string& query) override;
  void add_fixture(const std::string& query, std::vector<SearchResult> results);

 private:
  std::map<std::string, std::vector<SearchResult>> fixtures_;
};

// GET <base>/?q=<query>, expecting a JSON list of {url, title, snippet}
class HttpSearchClient : public SearchClient {
 public:
  HttpSearchClient(std::string host, int port, std::string path = "/search");
  std::vector<SearchResult> search(const std::string& query) override;

 private:
  std::string host_;
  int port_;
  std::string path_;
};

struct SearchDecision {
  enum class Mode { direct_answer, search };
  Mode mode = Mode::direct_answer;
  std::string query_rewrite;  // non-empty exactly when mode == search
  bool parse_failure = false;
};

struct Step {
  std::string state;  // Decide | Search | Extract | Summarize | Answer
  int source_index = -1;
  std::vector<std::string> prompts;
  std::vector<std::string> outputs;
};

struct PipelineTranscript {
  std::string query;
  std::vector<Step> steps;
  bool degraded = false;
  bool parse_failure = false;
  std::string answer;
  std::string to_json_string() const;
};

// one function-call round: JSON {action, query?}; one repair retry, then
// fall back to answering directly with the parse-failure flag set
SearchDecision decide(const std::string& query, LlmBackend& backend,
                      PipelineTranscript* transcript = nullptr);

struct PipelineResult {
  std::string answer;
  PipelineTranscript transcript;
};

// Decide -> (Search -> Extract x n -> Summarize x n ->) Answer
PipelineResult run_pipeline(const std::string& query, LlmBackend& backend, SearchClient& client,
                            int k_sources);

}  // namespace omni::websearch
