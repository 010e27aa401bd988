#pragma once

#include "physcad/agent/backend.hpp"

#include <chrono>
#include <functional>
#include <string>

namespace physcad::agent {

enum class Provider { Generic, Anthropic, OpenAI };

Provider provider_from_string(const std::string& s);
std::string to_string(Provider p);

struct RemoteConfig {
    Provider provider = Provider::Generic;
    /// scheme://host[:port][/path]; when the path is empty the provider's
    /// default (/v1/messages, /v1/chat/completions, /chat) is used.
    std::string endpoint;
    /// Name of the environment variable holding the credential. The value is
    /// read per request and never stored.
    std::string api_key_env;
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::seconds timeout{120};
};

/// Provider-native request body and the normalized response.
nlohmann::json encode_request(Provider p, const ChatRequest& r);
ChatResponse decode_response(Provider p, const nlohmann::json& body);

/// One HTTP POST per chat turn. Transport errors, 429 and 5xx are retried
/// with exponential backoff; other 4xx fail immediately. Both end in
/// BackendUnavailable.
class RemoteBackend : public AgentBackend {
public:
    explicit RemoteBackend(RemoteConfig config);

    ChatResponse chat(const ChatRequest& request) override;
    std::string name() const override { return "remote:" + to_string(config_.provider); }

    /// Replaces the sleep between retries (tests).
    void set_sleeper(std::function<void(std::chrono::milliseconds)> s) { sleep_ = std::move(s); }

private:
    RemoteConfig config_;
    std::string scheme_host_;
    std::string path_;
    std::function<void(std::chrono::milliseconds)> sleep_;
};

} // namespace physcad::agent
