#include "datagen/quality.hpp"

#include "datagen/errors.hpp"
#include "datagen/json_extract.hpp"
#include "datagen/util.hpp"

namespace datagen {

std::optional<bool> parse_isgood(const Json &value) {
    if (!value.is_string())
        return std::nullopt;
    auto s = trim(value.get<std::string>());
    if (iequals_ascii(s, "yes"))
        return true;
    if (iequals_ascii(s, "no"))
        return false;
    return std::nullopt;
}

Reflection parse_reflection(std::string_view completion, const std::string &item_id, int epoch) {
    Reflection r;
    r.item_id = item_id;
    r.epoch = epoch;
    auto payload = try_extract_json_payload(completion);
    if (payload && payload->is_array() && !payload->empty())
        payload = (*payload)[0];
    std::optional<bool> verdict;
    if (payload && payload->is_object() && payload->contains("isgood"))
        verdict = parse_isgood((*payload)["isgood"]);
    if (!verdict) {
        r.isgood = false;
        r.format_error = true;
        r.reflection = "unparseable judgment";
        return r;
    }
    r.isgood = *verdict;
    if (payload->contains("reflection")) {
        const auto &v = (*payload)["reflection"];
        r.reflection = v.is_string() ? v.get<std::string>() : v.dump();
    }
    if (!r.isgood && trim(r.reflection).empty())
        r.reflection = "no reflection given";
    return r;
}

Reflection reflect(const StageContext &ctx, const DatasetItem &item, const DatasetDescriptor &descriptor, int epoch,
                   RunManifest &log) {
    auto prompt = ctx.templates.render(templates::self_reflection,
                                       {{"description", descriptor.description}, {"example", item_prompt_json(item)}});
    auto text = ctx.ask(prompt, Stage::reflection, log, derive_seed(fnv1a64(item.id), 2 * epoch));
    return parse_reflection(text, item.id, epoch);
}

bool same_shape(const DatasetItem &original, const DatasetItem &candidate) {
    if (trim(candidate.text).empty())
        return false;
    if (original.choices.has_value() != candidate.choices.has_value())
        return false;
    if (original.choices && original.choices->size() != candidate.choices->size())
        return false;
    if (original.label.has_value() != candidate.label.has_value())
        return false;
    if (candidate.has_choices() && candidate.label && !candidate.find_choice(*candidate.label))
        return false;
    try {
        validate_item(candidate);
    } catch (const Error &) {
        return false;
    }
    return true;
}

std::optional<DatasetItem> parse_rewritten_item(std::string_view completion, const DatasetItem &original) {
    auto payload = try_extract_json_payload(completion);
    if (!payload)
        return std::nullopt;
    Json j = *payload;
    if (j.is_array()) {
        if (j.empty())
            return std::nullopt;
        j = j[0];
    }
    if (!j.is_object())
        return std::nullopt;
    if (!j.contains("text") && !j.contains("question") && j.size() == 1) {
        Json inner = j.begin().value();
        if (inner.is_string()) {
            auto s = inner.get<std::string>();
            if (auto parsed = try_extract_json_payload(s); parsed && parsed->is_object()) {
                inner = *parsed;
            } else {
                auto out = original;
                out.text = s;
                return out;
            }
        }
        j = inner;
    }
    if (!j.is_object())
        return std::nullopt;
    try {
        auto item = item_from_json(j, 0);
        item.id = original.id;
        item.meta = original.meta;
        return item;
    } catch (const Error &) {
        return std::nullopt;
    }
}

EnhanceOutcome enhance(const StageContext &ctx, const DatasetItem &item, const Reflection &reflection,
                       const DatasetDescriptor &descriptor, int epoch, RunManifest &log) {
    auto prompt = ctx.templates.render(templates::self_enhancement, {{"description", descriptor.description},
                                                                      {"reflection", reflection.reflection},
                                                                      {"original example", item_prompt_json(item)}});
    prompt += "\n" + item_prompt_json(item);
    auto text = ctx.ask(prompt, Stage::enhancement, log, derive_seed(fnv1a64(item.id), 2 * epoch + 1));
    EnhanceOutcome out{item, false, {}};
    auto candidate = parse_rewritten_item(text, item);
    if (!candidate) {
        out.rejection = "unparseable rewrite";
    } else if (!same_shape(item, *candidate)) {
        out.rejection = "shape mismatch";
    } else {
        out.item = std::move(*candidate);
        out.item.meta["enhanced_epoch"] = std::to_string(epoch);
        out.accepted = true;
        return out;
    }
    log.add_event({{"type", "rewrite_rejected"}, {"stage", "enhancement"}, {"id", item.id}, {"epoch", epoch},
                   {"reason", out.rejection}});
    return out;
}

QualityResult quality_pass(const StageContext &ctx, std::span<const DatasetItem> items,
                           const DatasetDescriptor &descriptor, int max_epochs, RunManifest &log) {
    if (max_epochs < 1)
        throw Error("max_epochs must be at least 1");
    struct PerItem {
        DatasetItem item;
        int epochs = 0;
        bool exhausted = false;
        int rejected = 0;
        RunManifest log;
    };
    auto results = parallel_map(items.size(), ctx.max_worker, [&](std::size_t i) {
        PerItem p{items[i], 0, false, 0, {}};
        for (int epoch = 0;; ++epoch) {
            auto r = reflect(ctx, p.item, descriptor, epoch, p.log);
            if (r.isgood)
                break;
            if (epoch == max_epochs) {
                p.exhausted = true;
                break;
            }
            auto e = enhance(ctx, p.item, r, descriptor, epoch + 1, p.log);
            if (e.accepted)
                p.item = std::move(e.item);
            else
                ++p.rejected;
            p.epochs = epoch + 1;
        }
        if (p.epochs > 0) {
            p.item.meta["quality_epochs"] = std::to_string(p.epochs);
            mark_stage(p.item, "quality");
        }
        if (p.exhausted)
            p.item.meta["quality_status"] = "exhausted";
        return p;
    });

    QualityResult out;
    for (auto &p : results) {
        log.absorb(p.log);
        out.items.push_back(std::move(p.item));
        out.epochs.push_back(p.epochs);
        ++out.histogram[p.epochs];
        out.exhausted += p.exhausted ? 1 : 0;
        out.rejected_rewrites += static_cast<std::size_t>(p.rejected);
    }
    Json hist = Json::object();
    for (const auto &[epochs, count] : out.histogram)
        hist[std::to_string(epochs)] = count;
    log.set_section("quality", {{"max_epochs", max_epochs},
                                {"items", out.items.size()},
                                {"epoch_histogram", hist},
                                {"exhausted", out.exhausted},
                                {"rejected_rewrites", out.rejected_rewrites}});
    return out;
}

} // namespace datagen
