#pragma once

#include "physcad/common.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace physcad::agent {

enum class AgentRole { Planner, Engineer, GeometryReviewer, StructuralReviewer };

std::string to_string(AgentRole r);
AgentRole role_from_string(const std::string& s);

struct ImageData {
    std::string media_type = "image/png";
    std::vector<std::uint8_t> bytes;
};

/// One ordered piece of a message: text or an image.
struct MessagePart {
    std::string text;
    std::optional<ImageData> image;

    static MessagePart from_text(std::string t) { return {std::move(t), std::nullopt}; }
    static MessagePart from_image(ImageData img) { return {{}, std::move(img)}; }
};

struct ChatMessage {
    std::string role; ///< "system", "user" or "assistant"
    std::vector<MessagePart> parts;

    /// Concatenated text parts, images skipped.
    std::string text() const;
};

struct ChatRequest {
    std::string model_id;
    double temperature = 0.5;
    int max_output_tokens = 4096;
    bool thinking = false;
    AgentRole agent = AgentRole::Engineer;
    std::vector<ChatMessage> messages;

    std::size_t image_count() const;
    std::string all_text() const;
};

struct ChatResponse {
    std::string text;
    long input_tokens = 0;
    long output_tokens = 0;
};

/// Transport failure after retries; aborts the run without counting as a
/// design failure.
class BackendUnavailable : public Error {
public:
    using Error::Error;
};

class AgentBackend {
public:
    virtual ~AgentBackend() = default;
    virtual ChatResponse chat(const ChatRequest& request) = 0;
    virtual std::string name() const = 0;
};

/// Replays fixed responses per role. When a role's queue runs dry its last
/// response repeats; a role with no responses at all raises BackendUnavailable.
/// Token counts left at zero in the script are filled with ceil(chars / 4) of
/// the request text and the response text, so accounting is deterministic.
class ScriptedBackend : public AgentBackend {
public:
    using Script = std::map<AgentRole, std::vector<ChatResponse>>;

    explicit ScriptedBackend(Script script);

    /// {"planner": [...], "engineer": [...], "geometry_reviewer": [...],
    ///  "structural_reviewer": [...]}; entries are strings or
    ///  {"text", "input_tokens", "output_tokens"} objects.
    static Script script_from_json(const nlohmann::json& j);

    ChatResponse chat(const ChatRequest& request) override;
    std::string name() const override { return "mock"; }

    /// Every request seen so far, in order.
    std::vector<ChatRequest> requests() const;
    std::vector<ChatResponse> responses() const;

private:
    mutable std::mutex mu_;
    Script script_;
    std::map<AgentRole, std::size_t> cursor_;
    std::vector<ChatRequest> requests_;
    std::vector<ChatResponse> responses_;
};

long estimate_tokens(std::string_view text);

} // namespace physcad::agent
