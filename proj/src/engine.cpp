#include "datagen/engine.hpp"

#include "datagen/json_extract.hpp"
#include "datagen/selector.hpp"
#include "datagen/util.hpp"

#include <cmath>
#include <set>

namespace datagen {
namespace {

std::string examples_block(std::span<const DatasetItem> items, bool with_label) {
    Json arr = Json::array();
    for (const auto &item : items) {
        auto j = Json::parse(item_prompt_json(item));
        if (!with_label)
            j.erase("label");
        arr.push_back(std::move(j));
    }
    return arr.dump(2);
}

std::string join_ids(std::span<const DatasetItem> items) {
    std::string out;
    for (const auto &item : items)
        out += (out.empty() ? "" : ",") + item.id;
    return out;
}

std::optional<std::string> record_problem(const DatasetItem &item, const DatasetDescriptor &d) {
    if (trim(item.text).empty())
        return "empty text";
    bool mc = d.answer_format == AnswerFormat::multiple_choice;
    if (mc && !item.has_choices())
        return "missing choices";
    if (!mc && item.choices)
        return "unexpected choices";
    if (!d.with_label)
        return std::nullopt;
    if (!item.label || trim(*item.label).empty())
        return "missing label";
    switch (d.answer_format) {
    case AnswerFormat::multiple_choice:
        if (!item.find_choice(*item.label))
            return "label is not a choice key";
        break;
    case AnswerFormat::numeric:
        if (!parse_number(*item.label))
            return "label is not a number";
        break;
    case AnswerFormat::boolean:
        if (!is_boolean_label(*item.label))
            return "label is not a boolean";
        break;
    case AnswerFormat::free_text:
        break;
    }
    return std::nullopt;
}

const Json *records_of(const Json &payload) {
    if (payload.is_array())
        return &payload;
    if (payload.is_object()) {
        for (const auto &[key, value] : payload.items()) {
            if (value.is_array() && !value.empty() && value.front().is_object())
                return &value;
        }
    }
    return nullptr;
}

std::vector<std::string> categories_from(const Json &payload) {
    std::vector<std::string> out;
    auto take = [&](const Json &obj) {
        if (!obj.is_object() || !obj.contains("category"))
            return;
        const auto &c = obj["category"];
        if (c.is_string()) {
            out.push_back(c.get<std::string>());
        } else if (c.is_array()) {
            for (const auto &v : c) {
                if (v.is_string())
                    out.push_back(v.get<std::string>());
            }
        }
    };
    if (payload.is_array()) {
        for (const auto &e : payload)
            take(e);
    } else {
        take(payload);
    }
    return out;
}

} // namespace

std::vector<std::string> dedupe_attributes(std::span<const std::string> attributes) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto &a : attributes) {
        auto t = trim(a);
        if (t.empty())
            continue;
        if (seen.insert(to_lower_ascii(t)).second)
            out.push_back(t);
    }
    return out;
}

AttributePool user_attribute_pool(std::span<const std::string> attributes) {
    return AttributePool{dedupe_attributes(attributes), AttributePool::Source::user_supplied};
}

AttributePool extract_attributes(const StageContext &ctx, const DatasetDescriptor &descriptor,
                                 std::span<const DatasetItem> examples, RunManifest &log) {
    if (examples.empty())
        throw Error("attribute extraction needs at least one example");
    auto prompt = ctx.templates.render(templates::attribute_guided,
                                       {{"description", descriptor.description},
                                        {"few_shot_examples", examples_block(examples, descriptor.with_label)}});
    for (int attempt = 0; attempt < 2; ++attempt) {
        auto text = ctx.ask(prompt, Stage::attribute_extraction, log, 0xa77 + static_cast<std::uint64_t>(attempt));
        auto payload = try_extract_json_payload(text);
        if (!payload)
            continue;
        auto cats = categories_from(*payload);
        if (cats.empty())
            continue;
        return AttributePool{dedupe_attributes(cats), AttributePool::Source::llm_extracted};
    }
    log.add_event({{"type", "warning"}, {"stage", "attribute_extraction"},
                   {"message", "no attributes could be parsed; continuing without attribute guidance"}});
    return AttributePool{{}, AttributePool::Source::llm_extracted};
}

std::string format_spec_for(const TemplateLibrary &templates, const DatasetDescriptor &descriptor) {
    std::string name = "format-" + std::string(to_string(descriptor.answer_format));
    if (!descriptor.with_label)
        name = descriptor.answer_format == AnswerFormat::multiple_choice ? "format-multiple_choice-unlabeled"
                                                                         : "format-text_only";
    return templates.get(name).body();
}

PromptBundle assemble_prompt(const TemplateLibrary &templates, const DatasetDescriptor &descriptor,
                             const ConstraintSet &constraints, std::span<const DatasetItem> few_shot,
                             const std::optional<std::string> &attribute, int batch_size,
                             const std::string &format_spec, std::span<const std::string> feedback) {
    if (few_shot.empty())
        throw Error("prompt assembly needs at least one few-shot example");
    PromptBundle b;
    b.batch_size = batch_size;
    b.system = templates.render(templates::description, {{"description for dataset", descriptor.description}});

    std::string constraint_block;
    if (!constraints.empty()) {
        constraint_block = templates.get(templates::constraints_prefix).body() + "\n";
        for (std::size_t i = 0; i < constraints.constraints.size(); ++i)
            constraint_block += std::to_string(i + 1) + ". " + constraints.constraints[i] + "\n";
        constraint_block += templates.get(templates::constraints_suffix).body();
    }
    auto count = std::to_string(batch_size);
    b.user = templates.render(templates::initial, {{"batch_size", count},
                                                   {"few_shot_examples", examples_block(few_shot, descriptor.with_label)},
                                                   {"dataset_constraint", constraint_block}});
    if (!feedback.empty()) {
        b.user += "\n\n" + templates.get(templates::feedback_prefix).body();
        for (const auto &f : feedback)
            b.user += "\n- " + f;
    }
    if (attribute)
        b.user += "\n\n" + templates.render(templates::attribute_directive, {{"attribute", *attribute}});
    b.user += "\n\n" + templates.render(templates::return_format, {{"batch_size", count}, {"data_format", format_spec}});
    return b;
}

GenerationOutcome parse_generation(std::string_view completion, const DatasetDescriptor &descriptor, int iteration,
                                   int requested) {
    GenerationOutcome out;
    out.iteration = iteration;
    out.requested = requested;
    out.completion_hash = hash_hex(completion);
    auto payload = try_extract_json_payload(completion);
    if (!payload) {
        out.format_errors = 1;
        return out;
    }
    Json single;
    const Json *records = records_of(*payload);
    if (!records) {
        if (!payload->is_object()) {
            out.format_errors = 1;
            return out;
        }
        single = Json::array({*payload});
        records = &single;
    }
    for (std::size_t slot = 0; slot < records->size() && static_cast<int>(slot) < requested; ++slot) {
        const auto &rec = (*records)[slot];
        if (!rec.is_object()) {
            ++out.format_errors;
            continue;
        }
        try {
            auto item = item_from_json(rec, slot);
            item.id = "gen-" + std::to_string(iteration) + "-" + std::to_string(slot);
            item.meta.clear();
            if (!descriptor.with_label)
                item.label.reset();
            if (record_problem(item, descriptor)) {
                ++out.format_errors;
                continue;
            }
            validate_item(item);
            out.items.push_back(std::move(item));
        } catch (const Error &) {
            ++out.format_errors;
        }
    }
    return out;
}

GenerationOutcome generate_batch(const StageContext &ctx, const PromptBundle &bundle,
                                 const DatasetDescriptor &descriptor, int iteration, RunManifest &log) {
    auto request = ctx.request(bundle.user, 0x9e0 + static_cast<std::uint64_t>(iteration), bundle.system);
    auto response = ctx.gateway.chat(request, Stage::generation, log);
    return parse_generation(response.text, descriptor, iteration, bundle.batch_size);
}

LabelQuota::LabelQuota(const std::map<std::string, double> &ratio, int total) {
    double sum = 0;
    for (const auto &[label, f] : ratio)
        sum += f;
    if (!(sum > 0))
        throw ConfigError("label_ratio must contain a positive fraction");
    std::vector<std::pair<double, std::string>> remainders;
    int assigned = 0;
    for (const auto &[label, f] : ratio) {
        double exact = f / sum * total;
        int base = static_cast<int>(std::floor(exact));
        quota_[label] = base;
        assigned += base;
        remainders.emplace_back(exact - base, label);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto &a, const auto &b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < total && i < remainders.size(); ++i, ++assigned)
        ++quota_[remainders[i].second];
}

bool LabelQuota::admit(const DatasetItem &item) {
    if (!item.label)
        return false;
    auto it = quota_.find(*item.label);
    if (it == quota_.end())
        return false;
    auto &used = used_[*item.label];
    if (used >= it->second)
        return false;
    ++used;
    return true;
}

GenerationRun run_generation(const StageContext &ctx, const RunConfig &config, const SeedDataset &seed,
                             const DatasetDescriptor &descriptor, RunManifest &log) {
    const auto &gen = config.generation;
    gen.validate();
    if (seed.items.empty())
        throw ConfigError("the seed dataset is empty");
    auto n = static_cast<std::size_t>(gen.few_shot_num);
    if (n > seed.items.size())
        throw ConfigError("few_shot_num (" + std::to_string(n) + ") exceeds the seed dataset size (" +
                          std::to_string(seed.items.size()) + ")");

    std::optional<DiverseSelector> diverse;
    if (config.selector == SelectorStrategy::cluster_diverse) {
        std::vector<std::string> texts;
        for (const auto &item : seed.items)
            texts.push_back(embedding_text(item));
        auto matrix = ctx.gateway.embed(texts, gen.embedding_model, log);
        diverse.emplace(matrix, n, gen.seed, config.kmeans_max_iters, config.kmeans_restarts);
        if (!diverse->warning().empty())
            log.add_event({{"type", "warning"}, {"stage", "selection"}, {"message", diverse->warning()}});
    }

    AttributePool pool;
    if (config.attribute_guided) {
        if (!config.attributes.empty()) {
            pool = user_attribute_pool(config.attributes);
        } else {
            auto k = std::min<std::size_t>(seed.items.size(), 20);
            std::vector<DatasetItem> sample;
            for (auto i : select_random_indices(seed.items.size(), k, derive_seed(gen.seed, 0xa77)))
                sample.push_back(seed.items[i]);
            pool = extract_attributes(ctx, descriptor, sample, log);
        }
    }

    ConstraintSet constraints{config.constraints};
    auto format_spec = format_spec_for(ctx.templates, descriptor);
    const int planned = gen.iterations();
    const int budget = 3 * planned;
    const auto target = static_cast<std::size_t>(gen.generation_number);

    std::optional<LabelQuota> quota;
    if (gen.label_ratio)
        quota.emplace(*gen.label_ratio, gen.generation_number);

    GenerationRun run;
    int requested_total = 0;
    int truncated = 0;
    int next = 0;
    while (next < budget && run.items.size() < target) {
        auto missing = static_cast<int>(target - run.items.size());
        int wave = std::min({gen.max_worker, budget - next, std::max(1, (missing + gen.batch_size - 1) / gen.batch_size)});
        struct Task {
            GenerationOutcome outcome;
            RunManifest log;
            std::vector<DatasetItem> few_shot;
            std::optional<std::string> attribute;
        };
        auto tasks = parallel_map(static_cast<std::size_t>(wave), gen.max_worker, [&](std::size_t k) {
            int iteration = next + static_cast<int>(k);
            Task t;
            auto draw_seed = derive_seed(gen.seed, static_cast<std::uint64_t>(iteration));
            auto picks = diverse ? diverse->draw(draw_seed) : select_random_indices(seed.items.size(), n, draw_seed);
            for (auto i : picks)
                t.few_shot.push_back(seed.items[i]);
            if (!pool.attributes.empty())
                t.attribute = pool.attributes[static_cast<std::size_t>(iteration) % pool.attributes.size()];
            auto bundle = assemble_prompt(ctx.templates, descriptor, constraints, t.few_shot, t.attribute,
                                          gen.batch_size, format_spec, config.generation_feedback);
            t.outcome = generate_batch(ctx, bundle, descriptor, iteration, t.log);
            return t;
        });
        for (auto &t : tasks) {
            log.absorb(t.log);
            Json selection{{"type", "selection"},
                           {"iteration", t.outcome.iteration},
                           {"few_shot_ids", Json::array()},
                           {"parsed", t.outcome.items.size()},
                           {"format_errors", t.outcome.format_errors},
                           {"completion_hash", t.outcome.completion_hash}};
            for (const auto &f : t.few_shot)
                selection["few_shot_ids"].push_back(f.id);
            if (t.attribute)
                selection["attribute"] = *t.attribute;
            log.add_event(std::move(selection));
            ++run.iterations;
            requested_total += t.outcome.requested;
            run.format_errors += t.outcome.format_errors;
            auto few_shot_ids = join_ids(t.few_shot);
            for (auto &item : t.outcome.items) {
                if (run.items.size() >= target) {
                    ++truncated;
                    continue;
                }
                if (quota && !quota->admit(item)) {
                    ++run.rejected_by_label_ratio;
                    continue;
                }
                item.meta["iteration"] = std::to_string(t.outcome.iteration);
                item.meta["few_shot_ids"] = few_shot_ids;
                if (t.attribute)
                    item.meta["attribute"] = *t.attribute;
                mark_stage(item, "generation");
                run.items.push_back(std::move(item));
            }
        }
        next += wave;
    }

    Json section{{"planned_iterations", planned},
                 {"iteration_budget", budget},
                 {"iterations", run.iterations},
                 {"requested", requested_total},
                 {"accepted", run.items.size()},
                 {"format_errors", run.format_errors},
                 {"rejected_by_label_ratio", run.rejected_by_label_ratio},
                 {"truncated", truncated},
                 {"selector", std::string(to_string(config.selector))}};
    if (config.attribute_guided) {
        section["attributes"] = pool.attributes;
        section["attribute_source"] =
            pool.source == AttributePool::Source::user_supplied ? "user_supplied" : "llm_extracted";
    }
    if (diverse) {
        section["kmeans_sse"] = diverse->clustering().sse;
        section["kmeans_iterations"] = diverse->clustering().iterations;
    }
    if (quota)
        section["label_quotas"] = quota->quotas();
    log.set_section("generation", section);

    if (run.items.size() < target)
        throw PartialResultError("iteration budget of " + std::to_string(budget) + " exhausted with " +
                                     std::to_string(run.items.size()) + " of " + std::to_string(target) + " items",
                                 std::move(run.items));
    return run;
}

} // namespace datagen
