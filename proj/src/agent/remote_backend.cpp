#include "physcad/agent/remote_backend.hpp"

#include <httplib.h>

#include <cstdlib>
#include <regex>
#include <thread>

namespace physcad::agent {

Provider provider_from_string(const std::string& s)
{
    if (s == "generic")
        return Provider::Generic;
    if (s == "anthropic")
        return Provider::Anthropic;
    if (s == "openai")
        return Provider::OpenAI;
    throw std::invalid_argument("unknown provider '" + s + "' (expected generic, anthropic or openai)");
}

std::string to_string(Provider p)
{
    switch (p) {
    case Provider::Generic: return "generic";
    case Provider::Anthropic: return "anthropic";
    case Provider::OpenAI: return "openai";
    }
    return "generic";
}

namespace {

std::string b64(const std::vector<std::uint8_t>& bytes)
{
    return httplib::detail::base64_encode(std::string(bytes.begin(), bytes.end()));
}

std::string default_path(Provider p)
{
    switch (p) {
    case Provider::Anthropic: return "/v1/messages";
    case Provider::OpenAI: return "/v1/chat/completions";
    case Provider::Generic: return "/chat";
    }
    return "/chat";
}

nlohmann::json encode_generic(const ChatRequest& r)
{
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : r.messages) {
        nlohmann::json parts = nlohmann::json::array();
        for (const auto& p : m.parts) {
            if (p.image)
                parts.push_back({{"image", {{"data", b64(p.image->bytes)}, {"media_type", p.image->media_type}}}});
            else
                parts.push_back({{"text", p.text}});
        }
        msgs.push_back({{"role", m.role}, {"parts", parts}});
    }
    return {{"model", r.model_id},
            {"temperature", r.temperature},
            {"max_output_tokens", r.max_output_tokens},
            {"thinking", r.thinking},
            {"messages", msgs}};
}

nlohmann::json encode_anthropic(const ChatRequest& r)
{
    std::string system;
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : r.messages) {
        if (m.role == "system") {
            system += m.text();
            continue;
        }
        nlohmann::json content = nlohmann::json::array();
        for (const auto& p : m.parts) {
            if (p.image)
                content.push_back({{"type", "image"},
                                   {"source",
                                    {{"type", "base64"},
                                     {"media_type", p.image->media_type},
                                     {"data", b64(p.image->bytes)}}}});
            else
                content.push_back({{"type", "text"}, {"text", p.text}});
        }
        msgs.push_back({{"role", m.role}, {"content", content}});
    }
    nlohmann::json body{{"model", r.model_id},
                        {"max_tokens", r.max_output_tokens},
                        {"temperature", r.temperature},
                        {"messages", msgs}};
    if (!system.empty())
        body["system"] = system;
    if (!r.thinking)
        body["thinking"] = {{"type", "disabled"}};
    return body;
}

nlohmann::json encode_openai(const ChatRequest& r)
{
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : r.messages) {
        nlohmann::json content = nlohmann::json::array();
        for (const auto& p : m.parts) {
            if (p.image)
                content.push_back(
                    {{"type", "image_url"},
                     {"image_url", {{"url", "data:" + p.image->media_type + ";base64," + b64(p.image->bytes)}}}});
            else
                content.push_back({{"type", "text"}, {"text", p.text}});
        }
        msgs.push_back({{"role", m.role}, {"content", content}});
    }
    return {{"model", r.model_id},
            {"temperature", r.temperature},
            {"max_tokens", r.max_output_tokens},
            {"messages", msgs}};
}

} // namespace

nlohmann::json encode_request(Provider p, const ChatRequest& r)
{
    switch (p) {
    case Provider::Anthropic: return encode_anthropic(r);
    case Provider::OpenAI: return encode_openai(r);
    case Provider::Generic: return encode_generic(r);
    }
    return encode_generic(r);
}

ChatResponse decode_response(Provider p, const nlohmann::json& body)
{
    ChatResponse out;
    switch (p) {
    case Provider::Generic:
        out.text = body.at("text").get<std::string>();
        out.input_tokens = body.value("input_tokens", 0L);
        out.output_tokens = body.value("output_tokens", 0L);
        break;
    case Provider::Anthropic:
        for (const auto& block : body.at("content"))
            if (block.value("type", "") == "text")
                out.text += block.at("text").get<std::string>();
        out.input_tokens = body.at("usage").value("input_tokens", 0L);
        out.output_tokens = body.at("usage").value("output_tokens", 0L);
        break;
    case Provider::OpenAI: {
        const auto& msg = body.at("choices").at(0).at("message");
        if (msg.contains("content") && msg["content"].is_string())
            out.text = msg["content"].get<std::string>();
        out.input_tokens = body.at("usage").value("prompt_tokens", 0L);
        out.output_tokens = body.at("usage").value("completion_tokens", 0L);
        break;
    }
    }
    if (out.input_tokens < 0 || out.output_tokens < 0)
        throw std::invalid_argument("negative token counts in response");
    return out;
}

RemoteBackend::RemoteBackend(RemoteConfig config)
    : config_(std::move(config)), sleep_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })
{
    static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(config_.endpoint, m, url))
        throw std::invalid_argument("endpoint must look like http(s)://host[:port][/path], got '" + config_.endpoint + "'");
    scheme_host_ = m[1].str();
    path_ = m[2].matched ? m[2].str() : default_path(config_.provider);
}

ChatResponse RemoteBackend::chat(const ChatRequest& request)
{
    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (!key || !*key)
            throw BackendUnavailable("environment variable " + config_.api_key_env + " is not set");
        switch (config_.provider) {
        case Provider::Anthropic:
            headers.emplace("x-api-key", key);
            headers.emplace("anthropic-version", "2023-06-01");
            break;
        case Provider::OpenAI:
        case Provider::Generic:
            headers.emplace("Authorization", std::string("Bearer ") + key);
            break;
        }
    }
    const std::string body = encode_request(config_.provider, request).dump();

    std::string last_error;
    auto backoff = config_.initial_backoff;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            sleep_(backoff);
            backoff *= 2;
        }
        httplib::Client client(scheme_host_);
        client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(config_.timeout).count());
        client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(config_.timeout).count());
        auto res = client.Post(path_, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw BackendUnavailable("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500));
        try {
            return decode_response(config_.provider, nlohmann::json::parse(res->body));
        } catch (const std::exception& e) {
            throw BackendUnavailable(std::string("malformed response: ") + e.what());
        }
    }
    throw BackendUnavailable(last_error + " after " + std::to_string(config_.max_retries) + " retries");
}

} // namespace physcad::agent
