#include "datagen/fact_validator.hpp"

#include "datagen/errors.hpp"
#include "datagen/http_provider.hpp"
#include "datagen/json_extract.hpp"
#include "datagen/quality.hpp"
#include "datagen/tokenize.hpp"
#include "datagen/util.hpp"

#include <thread>

namespace datagen {
namespace {

std::string cut(std::string_view text, std::size_t budget) {
    auto cps = decode_utf8(text);
    if (cps.size() <= budget)
        return std::string(text);
    return encode_utf8(std::u32string(cps.begin(), cps.begin() + static_cast<std::ptrdiff_t>(budget)));
}

/// Fallback for replies that copy the template's missing comma: pull fields out by name.
std::optional<Json> field_after(std::string_view text, std::string_view name) {
    auto pos = text.find("\"" + std::string(name) + "\"");
    if (pos == std::string_view::npos)
        return std::nullopt;
    auto colon = text.find(':', pos);
    if (colon == std::string_view::npos)
        return std::nullopt;
    auto rest = text.substr(colon + 1);
    auto start = rest.find_first_not_of(" \t\r\n");
    if (start == std::string_view::npos)
        return std::nullopt;
    rest = rest.substr(start);
    if (rest.front() == '"') {
        std::string value;
        for (std::size_t i = 1; i < rest.size(); ++i) {
            if (rest[i] == '\\' && i + 1 < rest.size()) {
                value.push_back(rest[++i]);
            } else if (rest[i] == '"') {
                return Json(value);
            } else {
                value.push_back(rest[i]);
            }
        }
        return std::nullopt;
    }
    if (rest.front() == '{' || rest.front() == '[')
        return try_extract_json_payload(rest);
    if (starts_with_icase(rest, "true"))
        return Json(true);
    if (starts_with_icase(rest, "false"))
        return Json(false);
    return std::nullopt;
}

} // namespace

std::optional<EntityKeywords> parse_entities(std::string_view completion) {
    auto payload = try_extract_json_payload(completion);
    if (!payload)
        return std::nullopt;
    const Json *list = nullptr;
    if (payload->is_object() && payload->contains("entities"))
        list = &(*payload)["entities"];
    else if (payload->is_array())
        list = &*payload;
    if (!list || !list->is_array())
        return std::nullopt;
    EntityKeywords k;
    for (const auto &e : *list) {
        if (k.entities.size() >= 3)
            break;
        if (e.is_string() && !trim(e.get<std::string>()).empty())
            k.entities.push_back(trim(e.get<std::string>()));
    }
    return k;
}

EntityKeywords extract_entities(const StageContext &ctx, const DatasetItem &item, RunManifest &log) {
    auto prompt = ctx.templates.render(templates::wiki_keyword, {{"input_text", item_prompt_json(item)}});
    auto text = ctx.ask(prompt, Stage::entity_extraction, log, fnv1a64(item.id));
    auto parsed = parse_entities(text);
    if (!parsed) {
        log.add_event({{"type", "format_error"}, {"stage", "entity_extraction"}, {"id", item.id}});
        return {};
    }
    return *parsed;
}

std::string corpus_slug(std::string_view title) {
    std::string out;
    bool pending = false;
    for (unsigned char c : title) {
        if (std::isalnum(c)) {
            if (pending && !out.empty())
                out.push_back('_');
            pending = false;
            out.push_back(static_cast<char>(std::tolower(c)));
        } else {
            pending = true;
        }
    }
    return out;
}

std::optional<Passage> LocalCorpusRetriever::lookup(const std::string &entity) {
    auto slug = corpus_slug(entity);
    if (slug.empty())
        return std::nullopt;
    auto path = dir_ / (slug + ".txt");
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec))
        return std::nullopt;
    return Passage{entity, read_file(path), path.string()};
}

WikipediaRetriever::WikipediaRetriever(std::string base_url, double requests_per_second, int max_retries)
    : base_url_(std::move(base_url)),
      interval_(std::chrono::nanoseconds(
          static_cast<std::int64_t>(1e9 / (requests_per_second > 0 ? requests_per_second : 1.0)))),
      max_retries_(max_retries) {
    while (!base_url_.empty() && base_url_.back() == '/')
        base_url_.pop_back();
}

void WikipediaRetriever::wait_turn() {
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(mutex_);
        auto now = std::chrono::steady_clock::now();
        slot = std::max(now, next_slot_);
        next_slot_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
}

std::optional<Passage> WikipediaRetriever::lookup(const std::string &entity) {
    std::string title = trim(entity);
    std::replace(title.begin(), title.end(), ' ', '_');
    auto url = base_url_ + "/api/rest_v1/page/summary/" + url_encode(title);
    auto delay = std::chrono::milliseconds(500);
    for (int attempt = 0; attempt <= max_retries_; ++attempt) {
        wait_turn();
        try {
            auto res = http_get(url, {{"User-Agent", "datagen/0.1 (dataset validation)"}, {"Accept", "application/json"}});
            if (res.status == 200) {
                auto j = Json::parse(res.body, nullptr, false);
                if (j.is_discarded() || !j.contains("extract") || !j["extract"].is_string())
                    return std::nullopt;
                Passage p;
                p.title = j.value("title", entity);
                p.text = j["extract"].get<std::string>();
                p.source = url;
                if (j.contains("content_urls") && j["content_urls"].contains("desktop"))
                    p.source = j["content_urls"]["desktop"].value("page", url);
                return p;
            }
            if (res.status != 429 && res.status < 500)
                return std::nullopt;
        } catch (const TransportError &) {
        }
        std::this_thread::sleep_for(delay);
        delay *= 2;
    }
    return std::nullopt;
}

std::size_t RetrievedEvidence::hits() const {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const auto &e) { return e.hit; }));
}

std::string RetrievedEvidence::render() const {
    std::string out;
    for (const auto &e : entries) {
        if (!e.hit)
            continue;
        if (!out.empty())
            out += "\n\n";
        out += "[" + e.passage.title + "]\n" + e.passage.text;
    }
    return out;
}

RetrievedEvidence retrieve(const EntityKeywords &keywords, Retriever &retriever, std::size_t budget) {
    RetrievedEvidence ev;
    for (const auto &entity : keywords.entities) {
        EvidenceEntry e;
        e.entity = entity;
        if (auto p = retriever.lookup(entity)) {
            e.hit = true;
            e.passage = std::move(*p);
            e.passage.text = cut(trim(e.passage.text), budget);
        }
        ev.entries.push_back(std::move(e));
    }
    return ev;
}

std::optional<RefinementVerdict> parse_refinement(std::string_view completion) {
    auto payload = try_extract_json_payload(completion);
    std::optional<Json> verdict_field, thinking, refined;
    if (payload && payload->is_object() && payload->contains("is_original_example_good")) {
        verdict_field = (*payload)["is_original_example_good"];
        if (payload->contains("thinking_progress"))
            thinking = (*payload)["thinking_progress"];
        if (payload->contains("refined_text"))
            refined = (*payload)["refined_text"];
    } else {
        verdict_field = field_after(completion, "is_original_example_good");
        thinking = field_after(completion, "thinking_progress");
        refined = field_after(completion, "refined_text");
    }
    if (!verdict_field)
        return std::nullopt;
    auto good = loose_bool(*verdict_field);
    if (!good)
        return std::nullopt;
    RefinementVerdict v;
    v.is_original_example_good = *good;
    if (thinking)
        v.thinking_progress = thinking->is_string() ? thinking->get<std::string>() : thinking->dump();
    if (!*good) {
        if (!refined || refined->is_null())
            return std::nullopt;
        if (refined->is_string() && iequals_ascii(trim(refined->get<std::string>()), "NONE"))
            return std::nullopt;
        v.refined_text = *refined;
    }
    return v;
}

std::string_view to_string(FactStatus status) {
    switch (status) {
    case FactStatus::fact_checked:
        return "fact_checked";
    case FactStatus::corrected:
        return "corrected";
    case FactStatus::unverifiable:
        return "unverifiable";
    case FactStatus::skipped:
        return "skipped";
    case FactStatus::format_error:
        return "format_error";
    case FactStatus::rejected:
        return "rejected";
    }
    return "unknown";
}

FactOutcome validate_and_refine(const StageContext &ctx, const DatasetItem &item, const RetrievedEvidence &evidence,
                                RunManifest &log) {
    FactOutcome out{item, FactStatus::unverifiable, std::nullopt};
    if (evidence.hits() == 0) {
        out.item.meta["rag_status"] = "unverifiable";
        mark_stage(out.item, "rag");
        return out;
    }
    auto prompt = ctx.templates.render(templates::wiki_refine,
                                       {{"input_text", item_prompt_json(item)}, {"wiki_data", evidence.render()}});
    auto text = ctx.ask(prompt, Stage::fact_refine, log, fnv1a64(item.id));
    out.verdict = parse_refinement(text);
    if (!out.verdict) {
        out.status = FactStatus::format_error;
        log.add_event({{"type", "format_error"}, {"stage", "fact_refine"}, {"id", item.id}});
        return out;
    }
    if (out.verdict->is_original_example_good) {
        out.status = FactStatus::fact_checked;
        out.item.meta["fact_checked"] = "true";
        mark_stage(out.item, "rag");
        return out;
    }
    const auto &refined = *out.verdict->refined_text;
    std::optional<DatasetItem> candidate;
    if (refined.is_object()) {
        candidate = parse_rewritten_item(refined.dump(), item);
    } else if (refined.is_string()) {
        auto s = refined.get<std::string>();
        candidate = parse_rewritten_item(s, item);
        if (!candidate && !trim(s).empty()) {
            candidate = item;
            candidate->text = trim(s);
        }
    }
    if (!candidate || !same_shape(item, *candidate)) {
        out.status = FactStatus::rejected;
        log.add_event({{"type", "rewrite_rejected"}, {"stage", "fact_refine"}, {"id", item.id},
                       {"reason", candidate ? "shape mismatch" : "unparseable refined text"}});
        return out;
    }
    out.item = std::move(*candidate);
    out.item.meta["rag_corrected"] = "true";
    out.item.meta["rag_old"] = item_prompt_json(item);
    out.item.meta["rag_new"] = item_prompt_json(out.item);
    mark_stage(out.item, "rag");
    out.status = FactStatus::corrected;
    return out;
}

Json FactReport::to_json() const {
    return Json{{"items", items.size()},
                {"counts", counts},
                {"corrected_ids", corrected_ids},
                {"corrected_fraction", corrected_fraction}};
}

FactReport validate_facts(const StageContext &ctx, std::span<const DatasetItem> items, Retriever &retriever,
                          std::size_t evidence_chars, RunManifest &log) {
    struct PerItem {
        FactOutcome outcome;
        RunManifest log;
    };
    auto results = parallel_map(items.size(), ctx.max_worker, [&](std::size_t i) {
        PerItem p{{items[i], FactStatus::skipped, std::nullopt}, {}};
        auto keywords = extract_entities(ctx, items[i], p.log);
        if (keywords.entities.empty()) {
            p.log.add_event({{"type", "skipped"}, {"stage", "rag"}, {"id", items[i].id}, {"reason", "no entities"}});
            return p;
        }
        auto evidence = retrieve(keywords, retriever, evidence_chars);
        p.outcome = validate_and_refine(ctx, items[i], evidence, p.log);
        return p;
    });
    FactReport report;
    for (const auto &name : {"fact_checked", "corrected", "unverifiable", "skipped", "format_error", "rejected"})
        report.counts[name] = 0;
    for (auto &p : results) {
        log.absorb(p.log);
        ++report.counts[std::string(to_string(p.outcome.status))];
        if (p.outcome.status == FactStatus::corrected) {
            report.corrected_ids.push_back(p.outcome.item.id);
            log.add_correction("rag");
            log.add_event({{"type", "correction"}, {"stage", "rag"}, {"id", p.outcome.item.id},
                           {"old", p.outcome.item.meta["rag_old"]}, {"new", p.outcome.item.meta["rag_new"]}});
        }
        report.items.push_back(std::move(p.outcome.item));
    }
    report.corrected_fraction =
        items.empty() ? 0.0 : static_cast<double>(report.corrected_ids.size()) / static_cast<double>(items.size());
    log.set_section("rag", report.to_json());
    return report;
}

} // namespace datagen
