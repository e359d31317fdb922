#include "datagen/templates.hpp"

#include "datagen/errors.hpp"
#include "datagen/util.hpp"

#include <cctype>
#include <cstdlib>
#include <mutex>
#include <set>

#ifndef DATAGEN_TEMPLATE_DIR
#define DATAGEN_TEMPLATE_DIR "templates"
#endif

namespace datagen {

namespace {

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ' ';
}

// Length of a placeholder name starting at `pos` and ending right before `close`,
// or 0 if the text there is not a placeholder.
std::size_t placeholder_length(std::string_view body, std::size_t pos, std::string_view close) {
    std::size_t end = pos;
    while (end < body.size() && is_name_char(body[end]))
        ++end;
    if (end == pos || body.substr(end, close.size()) != close)
        return 0;
    if (!std::isalpha(static_cast<unsigned char>(body[pos])) && body[pos] != '_')
        return 0;
    if (body[end - 1] == ' ')
        return 0;
    return end - pos;
}

} // namespace

PromptTemplate::PromptTemplate(std::string name, std::string body) : name_(std::move(name)), body_(std::move(body)) {
    std::string_view b = body_;
    std::string literal;
    std::set<std::string> seen;
    std::size_t i = 0;
    while (i < b.size()) {
        std::size_t len = 0;
        std::size_t open = 0;
        std::string_view close;
        if (b[i] == '{' && !(i + 1 < b.size() && b[i + 1] == '{')) {
            open = 1;
            close = "}";
            len = placeholder_length(b, i + 1, close);
        } else if (b.substr(i, 2) == "[[") {
            open = 2;
            close = "]]";
            len = placeholder_length(b, i + 2, close);
        }
        if (len == 0) {
            if (b[i] == '{' && i + 1 < b.size() && b[i + 1] == '{') {
                literal += "{{";
                i += 2;
            } else {
                literal.push_back(b[i]);
                ++i;
            }
            continue;
        }
        if (!literal.empty()) {
            segments_.push_back({false, std::move(literal)});
            literal.clear();
        }
        std::string name(b.substr(i + open, len));
        if (seen.insert(name).second)
            placeholders_.push_back(name);
        segments_.push_back({true, std::move(name)});
        i += open + len + close.size();
    }
    if (!literal.empty())
        segments_.push_back({false, std::move(literal)});
}

std::string PromptTemplate::render(const Bindings &bindings) const {
    for (const auto &[key, value] : bindings) {
        if (std::find(placeholders_.begin(), placeholders_.end(), key) == placeholders_.end())
            throw RenderError("template '" + name_ + "' has no placeholder '" + key + "'");
    }
    std::string out;
    out.reserve(body_.size());
    for (const auto &seg : segments_) {
        if (!seg.is_placeholder) {
            out += seg.text;
            continue;
        }
        auto it = bindings.find(seg.text);
        if (it == bindings.end())
            throw RenderError("template '" + name_ + "' is missing a binding for '" + seg.text + "'");
        out += it->second;
    }
    return out;
}

namespace {

std::mutex g_default_dir_mutex;
std::filesystem::path g_default_dir;

} // namespace

std::filesystem::path TemplateLibrary::default_dir() {
    if (const char *env = std::getenv("DATAGEN_TEMPLATE_DIR"); env && *env)
        return env;
    std::lock_guard lock(g_default_dir_mutex);
    if (!g_default_dir.empty())
        return g_default_dir;
    return DATAGEN_TEMPLATE_DIR;
}

void TemplateLibrary::set_default_dir(std::filesystem::path dir) {
    std::lock_guard lock(g_default_dir_mutex);
    g_default_dir = std::move(dir);
}

const TemplateLibrary &TemplateLibrary::defaults() {
    static const TemplateLibrary lib = load(default_dir());
    return lib;
}

TemplateLibrary TemplateLibrary::load(const std::filesystem::path &dir) {
    if (!std::filesystem::is_directory(dir))
        throw ConfigError("template directory not found: " + dir.string());
    TemplateLibrary lib;
    for (const auto &entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt")
            continue;
        std::string body = read_file(entry.path());
        if (!body.empty() && body.back() == '\n')
            body.pop_back();
        lib.add(PromptTemplate(entry.path().stem().string(), std::move(body)));
    }
    return lib;
}

void TemplateLibrary::add(PromptTemplate tmpl) {
    auto name = tmpl.name();
    templates_.insert_or_assign(std::move(name), std::move(tmpl));
}

bool TemplateLibrary::contains(std::string_view name) const { return templates_.find(name) != templates_.end(); }

const PromptTemplate &TemplateLibrary::get(std::string_view name) const {
    auto it = templates_.find(name);
    if (it == templates_.end())
        throw RenderError("unknown template: " + std::string(name));
    return it->second;
}

std::vector<std::string> TemplateLibrary::names() const {
    std::vector<std::string> out;
    for (const auto &[name, _] : templates_)
        out.push_back(name);
    return out;
}

} // namespace datagen
