#include "datagen/json_extract.hpp"

#include "datagen/errors.hpp"
#include "datagen/util.hpp"

namespace datagen {

namespace {

// Index one past the bracket that closes the value opening at `start`, or npos.
std::size_t matching_close(std::string_view s, std::size_t start) {
    std::string stack;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < s.size(); ++i) {
        char c = s[i];
        if (in_string) {
            if (escaped)
                escaped = false;
            else if (c == '\\')
                escaped = true;
            else if (c == '"')
                in_string = false;
            continue;
        }
        switch (c) {
        case '"':
            in_string = true;
            break;
        case '{':
            stack.push_back('}');
            break;
        case '[':
            stack.push_back(']');
            break;
        case '}':
        case ']':
            if (stack.empty() || stack.back() != c)
                return std::string_view::npos;
            stack.pop_back();
            if (stack.empty())
                return i + 1;
            break;
        default:
            break;
        }
    }
    return std::string_view::npos;
}

} // namespace

std::optional<Json> try_extract_json_payload(std::string_view text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '{' && text[i] != '[')
            continue;
        auto end = matching_close(text, i);
        if (end == std::string_view::npos)
            continue;
        auto candidate = text.substr(i, end - i);
        auto parsed = Json::parse(candidate.begin(), candidate.end(), nullptr, false);
        if (!parsed.is_discarded() && (parsed.is_object() || parsed.is_array()))
            return parsed;
    }
    return std::nullopt;
}

Json extract_json_payload(std::string_view text) {
    if (auto j = try_extract_json_payload(text))
        return std::move(*j);
    throw FormatError("no JSON object or array found in completion");
}

std::optional<bool> loose_bool(const Json &value) {
    if (value.is_boolean())
        return value.get<bool>();
    if (!value.is_string())
        return std::nullopt;
    auto s = to_lower_ascii(trim(value.get<std::string>()));
    while (!s.empty() && (s.back() == '.' || s.back() == '!'))
        s.pop_back();
    if (s == "true" || s == "ture" || s == "yes" || s == "y")
        return true;
    if (s == "false" || s == "flase" || s == "no" || s == "n")
        return false;
    return std::nullopt;
}

} // namespace datagen
