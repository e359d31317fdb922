#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace datagen {

using Bindings = std::map<std::string, std::string>;

/// A prompt body with named placeholders. Two placeholder spellings are recognised:
/// `{name}` and `[[name]]`, where name is letters, digits, underscores and inner spaces.
/// Braces around anything else (JSON examples, `{{...}}`) are literal text.
class PromptTemplate {
  public:
    PromptTemplate() = default;
    PromptTemplate(std::string name, std::string body);

    const std::string &name() const { return name_; }
    const std::string &body() const { return body_; }

    /// Distinct placeholder names in order of first appearance.
    const std::vector<std::string> &placeholders() const { return placeholders_; }

    /// Substitutes every placeholder. Throws RenderError when a placeholder has no binding
    /// or a binding names no placeholder. Substituted text is never re-scanned.
    std::string render(const Bindings &bindings) const;

  private:
    struct Segment {
        bool is_placeholder = false;
        std::string text;
    };

    std::string name_;
    std::string body_;
    std::vector<Segment> segments_;
    std::vector<std::string> placeholders_;
};

namespace templates {
inline constexpr std::string_view self_reflection = "self-reflection";
inline constexpr std::string_view self_enhancement = "self-enhancement";
inline constexpr std::string_view description = "description";
inline constexpr std::string_view initial = "initial";
inline constexpr std::string_view return_format = "return-format";
inline constexpr std::string_view attribute_guided = "attribute-guided";
inline constexpr std::string_view constraints_prefix = "constraints-prefix";
inline constexpr std::string_view constraints_suffix = "constraints-suffix";
inline constexpr std::string_view human_feedback = "improve-examples-with-human-feedback";
inline constexpr std::string_view wiki_keyword = "wiki-keyword-extract";
inline constexpr std::string_view wiki_refine = "wiki-fact-refine";
inline constexpr std::string_view math_eval = "math-eval";
inline constexpr std::string_view math_compare = "math-eval-compare";
inline constexpr std::string_view feedback_prefix = "feedback-prefix";
inline constexpr std::string_view judge = "evaluation-judge";
inline constexpr std::string_view constraint_judge = "evaluation-constraint";
inline constexpr std::string_view attribute_directive = "attribute-directive";
} // namespace templates

/// One template per `<name>.txt` file in a directory. A single trailing newline is
/// stripped from each file; everything else is kept byte for byte.
class TemplateLibrary {
  public:
    TemplateLibrary() = default;

    static TemplateLibrary load(const std::filesystem::path &dir);

    /// $DATAGEN_TEMPLATE_DIR, then the directory set with set_default_dir, then the
    /// source-tree directory compiled into the library.
    static std::filesystem::path default_dir();
    static void set_default_dir(std::filesystem::path dir);

    /// Loads default_dir() once and returns the shared instance.
    static const TemplateLibrary &defaults();

    void add(PromptTemplate tmpl);
    bool contains(std::string_view name) const;
    const PromptTemplate &get(std::string_view name) const;
    std::string render(std::string_view name, const Bindings &bindings) const { return get(name).render(bindings); }
    std::vector<std::string> names() const;

  private:
    std::map<std::string, PromptTemplate, std::less<>> templates_;
};

} // namespace datagen
