#pragma once

#include <string_view>

#include "json.hpp"
#include "mfotl/trace.hpp"

namespace mfotl {

[[nodiscard]] nlohmann::json to_json(const Trace& t);
[[nodiscard]] Trace trace_from_json(const nlohmann::json& j);
[[nodiscard]] Trace parse_trace_json(std::string_view text);

}  // namespace mfotl
