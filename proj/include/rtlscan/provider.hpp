#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlscan/json_schema.hpp"
#include "rtlscan/prompts.hpp"

namespace rtlscan {

enum class ProviderKind { Http, Replay };

struct ProviderConfig {
  ProviderKind kind = ProviderKind::Replay;
  std::string model = "gpt-4o-mini";
  std::string endpoint_url;     // full chat-completions URL (http mode)
  std::string api_key_env;      // name of the env var holding the key
  double temperature = 0.0;     // deterministic by default
  int max_retries = 3;
  int request_timeout_s = 60;
  int backoff_base_ms = 250;
  std::string fixture_path;     // replay mode lookup / --record target
  bool record = false;
};

struct ProviderError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One JSON file per request digest: {digest, request, response, model,
// timestamp}. Reads are lock-free on immutable files; appends serialize.
class FixtureStore {
 public:
  explicit FixtureStore(std::string dir) : dir_(std::move(dir)) {}

  const std::string& dir() const { return dir_; }

  std::optional<nlohmann::json> load(const std::string& digest) const {
    std::ifstream in(path_of(digest));
    if (!in) return std::nullopt;
    nlohmann::json j;
    in >> j;
    return j;
  }

  void save(const std::string& digest, const nlohmann::json& request,
            const nlohmann::json& response, const std::string& model,
            bool deterministic_timestamp = false) {
    std::lock_guard<std::mutex> lock(write_mutex_);
    std::filesystem::create_directories(dir_);
    nlohmann::json j;
    j["digest"] = digest;
    j["request"] = request;
    j["response"] = response;
    j["model"] = model;
    j["timestamp"] = deterministic_timestamp ? "" : now_iso8601();
    std::string tmp = path_of(digest) + ".tmp";
    {
      std::ofstream out(tmp);
      out << j.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, path_of(digest));
  }

  std::vector<std::string> list() const {
    std::vector<std::string> digests;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir_, ec)) {
      if (entry.path().extension() != ".json") continue;
      digests.push_back(entry.path().stem().string());
    }
    std::sort(digests.begin(), digests.end());
    return digests;
  }

  // Closest stored digests by shared hex prefix, for replay-miss messages.
  std::vector<std::string> nearest(const std::string& digest, size_t count) const {
    auto all = list();
    std::stable_sort(all.begin(), all.end(),
                     [&](const std::string& a, const std::string& b) {
                       return common_prefix(a, digest) > common_prefix(b, digest);
                     });
    if (all.size() > count) all.resize(count);
    return all;
  }

  // Integrity pass over every fixture: filename matches the stored digest,
  // the digest recomputes from the stored request, response parses.
  std::vector<std::string> verify() const {
    std::vector<std::string> problems;
    for (const auto& digest : list()) {
      auto j = load(digest);
      if (!j) {
        problems.push_back(digest + ": unreadable");
        continue;
      }
      if (!j->contains("request") || !j->contains("response")) {
        problems.push_back(digest + ": missing request/response");
        continue;
      }
      if (j->value("digest", "") != digest)
        problems.push_back(digest + ": stored digest mismatch");
      PromptBundle bundle;
      const auto& req = j->at("request");
      bundle.system = req.value("system", "");
      for (const auto& u : req.value("user", nlohmann::json::array()))
        bundle.user.push_back(u.get<std::string>());
      for (const auto& a : req.value("assistant", nlohmann::json::array()))
        bundle.assistant.push_back(a.get<std::string>());
      bundle.schema = req.value("schema", nlohmann::json::object());
      if (request_digest(bundle, req.value("model", "")) != digest)
        problems.push_back(digest + ": digest does not recompute from request");
    }
    return problems;
  }

 private:
  static size_t common_prefix(const std::string& a, const std::string& b) {
    size_t n = 0;
    while (n < a.size() && n < b.size() && a[n] == b[n]) ++n;
    return n;
  }

  static std::string now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    return buf;
  }

  std::string path_of(const std::string& digest) const {
    return dir_ + "/" + digest + ".json";
  }

  std::string dir_;
  mutable std::mutex write_mutex_;
};

// Transport seam so retry behaviour is testable without sockets.
struct HttpResponse {
  int status = 0;
  std::string body;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const std::string& url,
                            const std::vector<std::pair<std::string, std::string>>& headers,
                            const std::string& body, int timeout_s) = 0;
};

// Chat-completion provider: http mode speaks the role-tagged message list
// with a json_schema response constraint; replay mode resolves requests from
// the fixture store by digest.
class Provider {
 public:
  Provider(ProviderConfig config, std::shared_ptr<FixtureStore> store,
           std::shared_ptr<HttpTransport> transport = nullptr)
      : config_(std::move(config)),
        store_(std::move(store)),
        transport_(std::move(transport)) {}

  const ProviderConfig& config() const { return config_; }
  const std::vector<std::string>& attempt_log() const { return attempts_; }

  nlohmann::json request_json(const PromptBundle& bundle) const {
    nlohmann::json req;
    req["system"] = bundle.system;
    req["user"] = bundle.user;
    req["assistant"] = bundle.assistant;
    req["schema"] = bundle.schema;
    req["model"] = config_.model;
    return req;
  }

  nlohmann::json complete(const PromptBundle& bundle) {
    const std::string digest = request_digest(bundle, config_.model);
    if (config_.kind == ProviderKind::Replay) return replay(bundle, digest);
    nlohmann::json response = http_complete(bundle);
    if (config_.record && store_)
      store_->save(digest, request_json(bundle), response, config_.model);
    return response;
  }

 private:
  nlohmann::json replay(const PromptBundle& bundle, const std::string& digest) {
    (void)bundle;
    if (!store_) throw ProviderError("replay provider has no fixture store");
    if (auto fixture = store_->load(digest)) return fixture->at("response");
    std::string message = "no recorded fixture for request digest " + digest +
                          " under " + store_->dir();
    auto near = store_->nearest(digest, 3);
    if (near.empty()) {
      message += "; the fixture store is empty";
    } else {
      message += "; nearest stored digests:";
      for (const auto& d : near) message += " " + d;
    }
    throw ProviderError(message);
  }

  nlohmann::json wire_body(const PromptBundle& bundle) const {
    nlohmann::json messages = nlohmann::json::array();
    messages.push_back({{"role", "system"}, {"content", bundle.system}});
    for (size_t i = 0; i < bundle.user.size(); ++i) {
      messages.push_back({{"role", "user"}, {"content", bundle.user[i]}});
      if (i < bundle.assistant.size())
        messages.push_back({{"role", "assistant"}, {"content", bundle.assistant[i]}});
    }
    nlohmann::json body;
    body["model"] = config_.model;
    body["messages"] = messages;
    body["temperature"] = config_.temperature;
    body["response_format"] = {
        {"type", "json_schema"},
        {"json_schema",
         {{"name", "response"}, {"strict", true}, {"schema", bundle.schema}}}};
    return body;
  }

  static std::string extract_content(const nlohmann::json& api_response) {
    if (!api_response.contains("choices") || api_response["choices"].empty())
      throw ProviderError("response has no choices");
    const auto& message = api_response["choices"][0].at("message");
    return message.at("content").get<std::string>();
  }

  // Accept plain JSON or a fenced ```json block.
  static nlohmann::json parse_content(const std::string& content) {
    std::string text = content;
    size_t fence = text.find("```");
    if (fence != std::string::npos) {
      size_t start = text.find('\n', fence);
      size_t end = text.find("```", start);
      if (start != std::string::npos && end != std::string::npos)
        text = text.substr(start + 1, end - start - 1);
    }
    return nlohmann::json::parse(text);
  }

  nlohmann::json http_complete(const PromptBundle& bundle) {
    if (!transport_) throw ProviderError("http provider has no transport");
    if (config_.endpoint_url.empty())
      throw ProviderError("http provider requires an endpoint url");
    std::vector<std::pair<std::string, std::string>> headers = {
        {"Content-Type", "application/json"}};
    if (!config_.api_key_env.empty()) {
      const char* key = std::getenv(config_.api_key_env.c_str());
      if (!key || !*key)
        throw ProviderError("API key environment variable '" +
                            config_.api_key_env + "' is not set");
      headers.push_back({"Authorization", std::string("Bearer ") + key});
    }
    const std::string body = wire_body(bundle).dump();

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0) {
        int delay = config_.backoff_base_ms * (1 << (attempt - 1));
        std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      }
      HttpResponse response =
          transport_->post(config_.endpoint_url, headers, body,
                           config_.request_timeout_s);
      attempts_.push_back("attempt " + std::to_string(attempt + 1) +
                          ": status " + std::to_string(response.status));
      if (response.status == 429 || response.status >= 500) {
        last_error = "status " + std::to_string(response.status);
        continue;  // retryable
      }
      if (response.status != 200)
        throw ProviderError("provider returned status " +
                            std::to_string(response.status) + ": " +
                            response.body);
      try {
        nlohmann::json parsed = parse_content(
            extract_content(nlohmann::json::parse(response.body)));
        std::string schema_error;
        if (!validate_against_schema(parsed, bundle.schema, &schema_error)) {
          last_error = "schema-invalid response: " + schema_error;
          continue;  // retryable: the model may produce a valid one
        }
        return parsed;
      } catch (const nlohmann::json::exception& e) {
        last_error = std::string("unparseable response: ") + e.what();
        continue;
      }
    }
    throw ProviderError("request failed after " +
                        std::to_string(config_.max_retries + 1) +
                        " attempts; last error: " + last_error);
  }

  ProviderConfig config_;
  std::shared_ptr<FixtureStore> store_;
  std::shared_ptr<HttpTransport> transport_;
  std::vector<std::string> attempts_;
};

// Default transport backed by cpp-httplib; constructed lazily so tests never
// open sockets.
class HttplibTransport : public HttpTransport {
 public:
  HttpResponse post(const std::string& url,
                    const std::vector<std::pair<std::string, std::string>>& headers,
                    const std::string& body, int timeout_s) override;
};

}  // namespace rtlscan
