#include "datagen/feedback.hpp"

#include "datagen/errors.hpp"
#include "datagen/quality.hpp"
#include "datagen/util.hpp"

#include <istream>
#include <ostream>

namespace datagen {

std::optional<DatasetItem> apply_feedback(const StageContext &ctx, const DatasetItem &item,
                                          const std::string &feedback, RunManifest &log) {
    auto prompt = ctx.templates.render(templates::human_feedback,
                                       {{"user_feedback", feedback}, {"example", item_prompt_json(item)}});
    auto text = ctx.ask(prompt, Stage::human_feedback, log, derive_seed(fnv1a64(item.id), fnv1a64(feedback)));
    auto candidate = parse_rewritten_item(text, item);
    if (!candidate || !same_shape(item, *candidate)) {
        log.add_event({{"type", "rewrite_rejected"}, {"stage", "human_feedback"}, {"id", item.id},
                       {"reason", candidate ? "shape mismatch" : "unparseable rewrite"}});
        return std::nullopt;
    }
    candidate->meta["human_feedback"] = feedback;
    mark_stage(*candidate, "human_feedback");
    return candidate;
}

Json FeedbackProgress::to_json() const {
    Json list = Json::array();
    for (const auto &item : items)
        list.push_back(item_to_json(item));
    return Json{{"next_index", next_index}, {"items", list}};
}

FeedbackProgress FeedbackProgress::from_json(const Json &j) {
    FeedbackProgress p;
    if (!j.is_object() || !j.contains("items") || !j["items"].is_array())
        throw SchemaError("feedback progress file has no items");
    std::size_t i = 0;
    for (const auto &rec : j["items"])
        p.items.push_back(item_from_json(rec, i++));
    p.next_index = j.value("next_index", std::size_t{0});
    if (p.next_index > p.items.size())
        throw SchemaError("feedback progress index out of range");
    return p;
}

FeedbackResult run_feedback(const StageContext &ctx, std::vector<DatasetItem> items, std::istream &in,
                            std::ostream &out, const std::filesystem::path &progress_file, RunManifest &log) {
    FeedbackResult result;
    std::size_t start = 0;
    if (!progress_file.empty() && std::filesystem::exists(progress_file)) {
        auto saved = FeedbackProgress::from_json(Json::parse(read_file(progress_file)));
        items = std::move(saved.items);
        start = saved.next_index;
        out << "Resuming at item " << start + 1 << " of " << items.size() << "\n";
    }
    auto save = [&](std::size_t next) {
        if (!progress_file.empty())
            write_file_atomic(progress_file, FeedbackProgress{items, next}.to_json().dump(2) + "\n");
    };
    for (std::size_t i = start; i < items.size(); ++i) {
        out << "\n[" << i + 1 << "/" << items.size() << "] " << items[i].id << "\n"
            << Json::parse(item_prompt_json(items[i])).dump(2) << "\n"
            << "feedback (empty line accepts, :q quits)> " << std::flush;
        std::string line;
        if (!std::getline(in, line) || trim(line) == ":q") {
            save(i);
            result.quit = true;
            result.next_index = i;
            result.items = std::move(items);
            return result;
        }
        auto note = trim(line);
        if (note.empty())
            continue;
        if (auto revised = apply_feedback(ctx, items[i], note, log)) {
            items[i] = std::move(*revised);
            ++result.revised;
            out << "revised\n";
        } else {
            ++result.rejected;
            out << "rewrite rejected, item kept\n";
        }
        save(i + 1);
    }
    if (!progress_file.empty()) {
        std::error_code ec;
        std::filesystem::remove(progress_file, ec);
    }
    result.next_index = items.size();
    result.items = std::move(items);
    return result;
}

} // namespace datagen
