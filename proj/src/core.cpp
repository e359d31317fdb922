#include "datagen/core.hpp"

#include "datagen/errors.hpp"
#include "datagen/util.hpp"

#include <set>

namespace datagen {

const Choice *DatasetItem::find_choice(std::string_view key) const {
    if (!choices)
        return nullptr;
    for (const auto &c : *choices) {
        if (c.key == key)
            return &c;
    }
    return nullptr;
}

std::string_view to_string(AnswerFormat format) {
    switch (format) {
    case AnswerFormat::multiple_choice:
        return "multiple_choice";
    case AnswerFormat::numeric:
        return "numeric";
    case AnswerFormat::free_text:
        return "free_text";
    case AnswerFormat::boolean:
        return "boolean";
    }
    return "free_text";
}

AnswerFormat answer_format_from_string(std::string_view name) {
    if (name == "multiple_choice")
        return AnswerFormat::multiple_choice;
    if (name == "numeric")
        return AnswerFormat::numeric;
    if (name == "free_text")
        return AnswerFormat::free_text;
    if (name == "boolean")
        return AnswerFormat::boolean;
    throw ConfigError("unknown answer format: " + std::string(name));
}

bool is_boolean_label(std::string_view label) {
    auto l = to_lower_ascii(trim(label));
    return l == "true" || l == "false" || l == "yes" || l == "no";
}

void validate_item(const DatasetItem &item) {
    if (item.text.empty())
        throw SchemaError("item '" + item.id + "' has empty text");
    if (item.choices) {
        std::set<std::string> keys;
        for (const auto &c : *item.choices) {
            if (c.key.empty())
                throw SchemaError("item '" + item.id + "' has a choice with an empty key");
            if (!keys.insert(c.key).second)
                throw SchemaError("item '" + item.id + "' has duplicate choice key '" + c.key + "'");
        }
        if (item.label && !keys.contains(*item.label))
            throw SchemaError("item '" + item.id + "' label '" + *item.label + "' is not a choice key");
    }
}

void validate_dataset(std::span<const DatasetItem> items) {
    std::set<std::string> ids;
    for (const auto &item : items) {
        validate_item(item);
        if (!ids.insert(item.id).second)
            throw SchemaError("duplicate item id '" + item.id + "'");
    }
}

Json item_to_json(const DatasetItem &item) {
    Json j = Json::object();
    j["id"] = item.id;
    j["text"] = item.text;
    if (item.choices) {
        Json arr = Json::array();
        for (const auto &c : *item.choices)
            arr.push_back({{"key", c.key}, {"body", c.body}});
        j["choices"] = std::move(arr);
    }
    if (item.label)
        j["label"] = *item.label;
    if (!item.meta.empty())
        j["meta"] = item.meta;
    return j;
}

namespace {

std::string scalar_to_string(const Json &v) {
    if (v.is_string())
        return v.get<std::string>();
    if (v.is_null())
        return "";
    return v.dump();
}

std::string letter_key(std::size_t index) {
    std::string key;
    ++index;
    while (index > 0) {
        --index;
        key.insert(key.begin(), static_cast<char>('A' + index % 26));
        index /= 26;
    }
    return key;
}

std::vector<Choice> choices_from_json(const Json &value) {
    std::vector<Choice> out;
    if (value.is_object()) {
        for (auto it = value.begin(); it != value.end(); ++it)
            out.push_back({it.key(), scalar_to_string(it.value())});
        return out;
    }
    if (!value.is_array())
        throw SchemaError("\"choices\" must be an array or object");
    for (std::size_t i = 0; i < value.size(); ++i) {
        const auto &c = value[i];
        if (c.is_object() && c.contains("key")) {
            const Json *body = nullptr;
            for (const char *name : {"body", "text", "option"}) {
                if (c.contains(name)) {
                    body = &c.at(name);
                    break;
                }
            }
            if (!body)
                throw SchemaError("choice object without \"body\"");
            out.push_back({scalar_to_string(c.at("key")), scalar_to_string(*body)});
        } else if (c.is_string() || c.is_number()) {
            out.push_back({letter_key(i), scalar_to_string(c)});
        } else {
            throw SchemaError("unsupported choice entry: " + c.dump());
        }
    }
    return out;
}

} // namespace

DatasetItem item_from_json(const Json &record, std::size_t index, std::string_view id_prefix) {
    if (!record.is_object())
        throw SchemaError("dataset record " + std::to_string(index) + " is not an object");
    DatasetItem item;
    if (record.contains("id") && !record.at("id").is_null())
        item.id = scalar_to_string(record.at("id"));
    else
        item.id = std::string(id_prefix) + std::to_string(index);

    if (record.contains("text"))
        item.text = scalar_to_string(record.at("text"));
    else if (record.contains("question"))
        item.text = scalar_to_string(record.at("question"));
    else
        throw SchemaError("dataset record " + std::to_string(index) + " has no \"text\"");

    if (record.contains("choices") && !record.at("choices").is_null())
        item.choices = choices_from_json(record.at("choices"));

    const Json *label = nullptr;
    if (record.contains("label"))
        label = &record.at("label");
    else if (record.contains("answer"))
        label = &record.at("answer");
    if (label && !label->is_null())
        item.label = scalar_to_string(*label);

    if (record.contains("meta") && record.at("meta").is_object()) {
        for (auto it = record.at("meta").begin(); it != record.at("meta").end(); ++it)
            item.meta[it.key()] = scalar_to_string(it.value());
    }
    return item;
}

std::optional<AnswerFormat> item_answer_format(const DatasetItem &item) {
    if (item.choices)
        return AnswerFormat::multiple_choice;
    if (!item.label)
        return std::nullopt;
    if (parse_number(*item.label))
        return AnswerFormat::numeric;
    if (is_boolean_label(*item.label))
        return AnswerFormat::boolean;
    return AnswerFormat::free_text;
}

AnswerFormat infer_answer_format(std::span<const DatasetItem> items) {
    if (items.empty())
        return AnswerFormat::free_text;
    std::size_t with_choices = 0;
    for (const auto &item : items)
        with_choices += item.choices ? 1 : 0;
    if (with_choices == items.size())
        return AnswerFormat::multiple_choice;
    if (with_choices != 0)
        throw SchemaError("mixed answer formats: " + std::to_string(with_choices) + " of " +
                          std::to_string(items.size()) + " items have choices");
    bool all_numeric = true, all_boolean = true, any_label = false;
    for (const auto &item : items) {
        if (!item.label)
            continue;
        any_label = true;
        all_numeric = all_numeric && parse_number(*item.label).has_value();
        all_boolean = all_boolean && is_boolean_label(*item.label);
    }
    if (!any_label)
        return AnswerFormat::free_text;
    if (all_numeric)
        return AnswerFormat::numeric;
    if (all_boolean)
        return AnswerFormat::boolean;
    return AnswerFormat::free_text;
}

SeedDataset parse_dataset(std::string_view json_text) {
    Json doc;
    try {
        doc = Json::parse(json_text.begin(), json_text.end());
    } catch (const nlohmann::json::parse_error &e) {
        std::size_t offset = e.byte == 0 ? 0 : e.byte - 1;
        std::size_t line = 1, column = 1;
        for (std::size_t i = 0; i < offset && i < json_text.size(); ++i) {
            if (json_text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ParseError("malformed dataset JSON at line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + e.what(),
                         line, column, offset);
    }
    if (!doc.is_array())
        throw SchemaError("dataset file must contain a JSON array of objects");

    SeedDataset ds;
    ds.items.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i)
        ds.items.push_back(item_from_json(doc[i], i));
    validate_dataset(ds.items);
    ds.answer_format = infer_answer_format(ds.items);
    ds.with_label = !ds.items.empty();
    for (const auto &item : ds.items)
        ds.with_label = ds.with_label && item.label.has_value();
    return ds;
}

SeedDataset load_dataset(const std::filesystem::path &path) { return parse_dataset(read_file(path)); }

std::string dataset_to_string(std::span<const DatasetItem> items) {
    Json arr = Json::array();
    for (const auto &item : items)
        arr.push_back(item_to_json(item));
    return arr.dump(2) + "\n";
}

void save_dataset(std::span<const DatasetItem> items, const std::filesystem::path &path) {
    validate_dataset(items);
    write_file_atomic(path, dataset_to_string(items));
}

std::string embedding_text(const DatasetItem &item) {
    std::string out = item.text;
    if (item.choices) {
        for (const auto &c : *item.choices)
            out += "\n" + c.key + ". " + c.body;
    }
    return out;
}

std::string item_prompt_json(const DatasetItem &item) {
    Json j = item_to_json(item);
    j.erase("id");
    j.erase("meta");
    return j.dump();
}

void mark_stage(DatasetItem &item, std::string_view stage) {
    auto &stages = item.meta["stages"];
    std::size_t start = 0;
    while (start <= stages.size() && !stages.empty()) {
        auto end = stages.find(',', start);
        auto token = std::string_view(stages).substr(start, end == std::string::npos ? std::string::npos : end - start);
        if (token == stage)
            return;
        if (end == std::string::npos)
            break;
        start = end + 1;
    }
    if (!stages.empty())
        stages += ",";
    stages += stage;
}

} // namespace datagen
