#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace datagen {

using Json = nlohmann::json;

struct Choice {
    std::string key;
    std::string body;

    bool operator==(const Choice &) const = default;
};

/// One seed or generated record.
struct DatasetItem {
    std::string id;
    std::string text;
    std::optional<std::vector<Choice>> choices;
    std::optional<std::string> label;
    std::map<std::string, std::string> meta;

    bool operator==(const DatasetItem &) const = default;

    const Choice *find_choice(std::string_view key) const;
    bool has_choices() const { return choices.has_value() && !choices->empty(); }
};

enum class AnswerFormat { multiple_choice, numeric, free_text, boolean };

std::string_view to_string(AnswerFormat format);
AnswerFormat answer_format_from_string(std::string_view name);

struct DatasetDescriptor {
    std::string name;
    std::string description;
    bool with_label = true;
    AnswerFormat answer_format = AnswerFormat::free_text;
};

struct ConstraintSet {
    std::vector<std::string> constraints;

    bool empty() const { return constraints.empty(); }
};

struct SeedDataset {
    std::vector<DatasetItem> items;
    AnswerFormat answer_format = AnswerFormat::free_text;
    bool with_label = true;
};

/// Throws SchemaError when the item breaks an invariant (empty text, duplicate choice keys,
/// label outside the choice keys).
void validate_item(const DatasetItem &item);

/// Throws SchemaError on duplicate ids or any invalid item.
void validate_dataset(std::span<const DatasetItem> items);

/// Canonical on-disk form: {"id","text","choices":[{"key","body"}],"label","meta"}.
Json item_to_json(const DatasetItem &item);

/// Accepts the canonical form plus a few common variants: choices as an object
/// {"A": "..."} or a list of strings, "question" for text and "answer" for label.
/// Assigns id "seed-<index>" when absent. Non-string meta values are stored as their JSON dump.
DatasetItem item_from_json(const Json &record, std::size_t index, std::string_view id_prefix = "seed-");

/// Infers the answer format of a dataset; throws SchemaError on a mix of items with and
/// without choices. Empty datasets default to free_text.
AnswerFormat infer_answer_format(std::span<const DatasetItem> items);

/// Returns the format an item's shape implies, or nullopt when the item carries no label and no choices.
std::optional<AnswerFormat> item_answer_format(const DatasetItem &item);

bool is_boolean_label(std::string_view label);

SeedDataset parse_dataset(std::string_view json_text);
SeedDataset load_dataset(const std::filesystem::path &path);

std::string dataset_to_string(std::span<const DatasetItem> items);
void save_dataset(std::span<const DatasetItem> items, const std::filesystem::path &path);

/// Text used for embeddings: question text followed by "\n<key>. <body>" per choice.
std::string embedding_text(const DatasetItem &item);

/// Item payload as shown to the LLM (canonical JSON without id and meta).
std::string item_prompt_json(const DatasetItem &item);

/// Appends `stage` to the comma-separated meta["stages"] provenance list (no duplicates).
void mark_stage(DatasetItem &item, std::string_view stage);

} // namespace datagen
