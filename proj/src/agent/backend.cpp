#include "physcad/agent/backend.hpp"

#include <array>

namespace physcad::agent {

namespace {

constexpr std::array<std::pair<AgentRole, const char*>, 4> kRoles{{
    {AgentRole::Planner, "planner"},
    {AgentRole::Engineer, "engineer"},
    {AgentRole::GeometryReviewer, "geometry_reviewer"},
    {AgentRole::StructuralReviewer, "structural_reviewer"},
}};

} // namespace

std::string to_string(AgentRole r)
{
    for (const auto& [k, name] : kRoles)
        if (k == r)
            return name;
    return "engineer";
}

AgentRole role_from_string(const std::string& s)
{
    for (const auto& [k, name] : kRoles)
        if (s == name)
            return k;
    throw std::invalid_argument("unknown agent role '" + s + "'");
}

std::string ChatMessage::text() const
{
    std::string out;
    for (const auto& p : parts)
        if (!p.image)
            out += p.text;
    return out;
}

std::size_t ChatRequest::image_count() const
{
    std::size_t n = 0;
    for (const auto& m : messages)
        for (const auto& p : m.parts)
            n += p.image.has_value();
    return n;
}

std::string ChatRequest::all_text() const
{
    std::string out;
    for (const auto& m : messages) {
        out += m.text();
        out += '\n';
    }
    return out;
}

long estimate_tokens(std::string_view text)
{
    return static_cast<long>((text.size() + 3) / 4);
}

ScriptedBackend::ScriptedBackend(Script script) : script_(std::move(script)) {}

ScriptedBackend::Script ScriptedBackend::script_from_json(const nlohmann::json& j)
{
    if (!j.is_object())
        throw std::invalid_argument("mock script must be a JSON object keyed by role");
    Script s;
    for (const auto& [key, list] : j.items()) {
        const AgentRole role = role_from_string(key);
        if (!list.is_array())
            throw std::invalid_argument("mock script entry '" + key + "' must be an array");
        for (const auto& e : list) {
            ChatResponse r;
            if (e.is_string()) {
                r.text = e.get<std::string>();
            } else {
                r.text = e.at("text").get<std::string>();
                r.input_tokens = e.value("input_tokens", 0L);
                r.output_tokens = e.value("output_tokens", 0L);
            }
            s[role].push_back(std::move(r));
        }
    }
    return s;
}

ChatResponse ScriptedBackend::chat(const ChatRequest& request)
{
    std::lock_guard lock(mu_);
    requests_.push_back(request);
    auto it = script_.find(request.agent);
    if (it == script_.end() || it->second.empty())
        throw BackendUnavailable("mock script has no responses for role " + to_string(request.agent));
    std::size_t& k = cursor_[request.agent];
    ChatResponse r = it->second[std::min(k, it->second.size() - 1)];
    ++k;
    if (r.input_tokens == 0)
        r.input_tokens = estimate_tokens(request.all_text());
    if (r.output_tokens == 0)
        r.output_tokens = estimate_tokens(r.text);
    responses_.push_back(r);
    return r;
}

std::vector<ChatRequest> ScriptedBackend::requests() const
{
    std::lock_guard lock(mu_);
    return requests_;
}

std::vector<ChatResponse> ScriptedBackend::responses() const
{
    std::lock_guard lock(mu_);
    return responses_;
}

} // namespace physcad::agent
