#pragma once

#include "datagen/core.hpp"

#include <optional>
#include <string_view>

namespace datagen {

/// Finds the first well-formed JSON object or array embedded in an LLM completion,
/// skipping code fences and surrounding prose. Throws FormatError when there is none.
Json extract_json_payload(std::string_view completion);

/// Non-throwing variant.
std::optional<Json> try_extract_json_payload(std::string_view completion);

/// Reads a loosely typed boolean: JSON booleans or strings such as "true", "Ture", "yes".
std::optional<bool> loose_bool(const Json &value);

} // namespace datagen
