#include "physcad/agent/prompts.hpp"

#include <stdexcept>

namespace physcad::agent {

namespace detail {
const std::map<std::string, std::string_view>& prompt_assets();
}

std::vector<std::string> prompt_names()
{
    std::vector<std::string> out;
    for (const auto& [name, text] : detail::prompt_assets())
        out.push_back(name);
    return out;
}

std::string_view prompt_template(std::string_view name)
{
    const auto& assets = detail::prompt_assets();
    auto it = assets.find(std::string(name));
    if (it == assets.end())
        throw std::out_of_range("no prompt template named '" + std::string(name) + "'");
    return it->second;
}

std::string render_template(std::string_view text, const PromptVars& vars)
{
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (true) {
        const std::size_t open = text.find("{{", pos);
        if (open == std::string_view::npos) {
            out.append(text.substr(pos));
            return out;
        }
        const std::size_t close = text.find("}}", open + 2);
        if (close == std::string_view::npos)
            throw std::invalid_argument("unterminated placeholder in template");
        out.append(text.substr(pos, open - pos));
        const std::string key(text.substr(open + 2, close - open - 2));
        auto it = vars.find(key);
        if (it == vars.end())
            throw std::invalid_argument("no value for placeholder {{" + key + "}}");
        out.append(it->second);
        pos = close + 2;
    }
}

std::vector<ChatMessage> render_messages(std::string_view name, const PromptVars& vars)
{
    const std::string text = render_template(prompt_template(name), vars);
    constexpr std::string_view marker = "===USER===\n";
    const std::size_t split = text.find(marker);
    if (split == std::string::npos)
        return {{"user", {MessagePart::from_text(text)}}};
    return {{"system", {MessagePart::from_text(text.substr(0, split))}},
            {"user", {MessagePart::from_text(text.substr(split + marker.size()))}}};
}

} // namespace physcad::agent
