#pragma once

#include <cstdlib>
#include <map>
#include <optional>
#include <string>

#include <httplib.h>

#include "guipilot/backend.hpp"

namespace guipilot {

struct LiveEndpoint {
  std::string base_url;  // e.g. http://127.0.0.1:8807
  std::string model;
  std::string api_key_env;  // name of the env var holding the key, may be empty
  std::optional<double> temperature_override;
};

// Chat-completions style HTTP adapter. Each role maps to one endpoint; image
// parts are forwarded as image_url refs (the deployment maps refs to frames).
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(std::map<std::string, LiveEndpoint> by_role)
      : by_role_(std::move(by_role)) {}

  std::string complete(const CompletionRequest& req) override {
    auto it = by_role_.find(to_string(req.role));
    if (it == by_role_.end()) {
      throw BackendError(std::string("no endpoint configured for role ") + to_string(req.role));
    }
    const LiveEndpoint& ep = it->second;

    json content = json::array();
    for (const auto& part : req.user_parts) {
      if (part.is_image) {
        content.push_back(json{{"type", "image_url"}, {"image_url", json{{"url", part.content}}}});
      } else {
        content.push_back(json{{"type", "text"}, {"text", part.content}});
      }
    }
    json body{{"model", ep.model},
              {"messages", json::array({json{{"role", "system"}, {"content", req.system_text}},
                                        json{{"role", "user"}, {"content", std::move(content)}}})},
              {"temperature", ep.temperature_override.value_or(req.temperature)},
              {"max_tokens", req.max_output}};

    httplib::Client client(ep.base_url);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!ep.api_key_env.empty()) {
      if (const char* key = std::getenv(ep.api_key_env.c_str())) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
      }
    }
    auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
    if (!res) throw BackendUnavailable("transport error reaching " + ep.base_url);
    if (res->status != 200) {
      throw BackendUnavailable("endpoint " + ep.base_url + " returned status " +
                               std::to_string(res->status));
    }
    json parsed;
    try {
      parsed = json::parse(res->body);
    } catch (const std::exception& e) {
      throw BackendError(std::string("unreadable completion response: ") + e.what());
    }
    std::string text;
    try {
      text = parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception&) {
      throw BackendError("completion response missing choices[0].message.content");
    }
    if (text.empty()) throw EmptyOutput("endpoint returned an empty completion");
    return text;
  }

 private:
  std::map<std::string, LiveEndpoint> by_role_;
};

}  // namespace guipilot
