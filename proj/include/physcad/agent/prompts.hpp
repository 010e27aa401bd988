#pragma once

#include "physcad/agent/backend.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace physcad::agent {

/// Names of the embedded templates, e.g. "planner.v1".
std::vector<std::string> prompt_names();

/// Raw template text; throws std::out_of_range for unknown names.
std::string_view prompt_template(std::string_view name);

using PromptVars = std::map<std::string, std::string>;

/// Replaces every {{name}} with vars[name]. Throws std::invalid_argument for
/// a placeholder without a value; unused values are allowed.
std::string render_template(std::string_view text, const PromptVars& vars);

/// Templates containing a "===USER===" line split into a system message and
/// a user message; others become a single user message.
std::vector<ChatMessage> render_messages(std::string_view name, const PromptVars& vars);

} // namespace physcad::agent
