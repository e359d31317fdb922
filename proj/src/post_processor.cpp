#include "datagen/post_processor.hpp"

#include "datagen/errors.hpp"
#include "datagen/quality.hpp"
#include "datagen/util.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace datagen {

std::string_view to_string(DifficultyPolicy policy) {
    switch (policy) {
    case DifficultyPolicy::paraphrase_question:
        return "paraphrase_question";
    case DifficultyPolicy::add_context:
        return "add_context";
    case DifficultyPolicy::paraphrase_choices:
        return "paraphrase_choices";
    case DifficultyPolicy::add_choice:
        return "add_choice";
    }
    return "unknown";
}

DifficultyPolicy difficulty_policy_from_string(std::string_view name) {
    for (auto p : kAllPolicies) {
        if (to_string(p) == name)
            return p;
    }
    throw ConfigError("unknown difficulty policy: " + std::string(name));
}

bool policy_applicable(DifficultyPolicy policy, const DatasetItem &item) {
    switch (policy) {
    case DifficultyPolicy::paraphrase_question:
    case DifficultyPolicy::add_context:
        return true;
    case DifficultyPolicy::paraphrase_choices:
        return item.has_choices();
    case DifficultyPolicy::add_choice:
        return item.has_choices() && item.label && item.find_choice(*item.label);
    }
    return false;
}

namespace {

std::vector<std::string> keys_of(const DatasetItem &item) {
    std::vector<std::string> keys;
    if (item.choices) {
        for (const auto &c : *item.choices)
            keys.push_back(c.key);
    }
    return keys;
}

} // namespace

std::string difficulty_guard(DifficultyPolicy policy, const DatasetItem &original, const DatasetItem &rewrite) {
    try {
        validate_item(rewrite);
    } catch (const Error &e) {
        return std::string("invalid item: ") + e.what();
    }
    if (rewrite.choices.has_value() != original.choices.has_value())
        return "choices added or removed";
    switch (policy) {
    case DifficultyPolicy::paraphrase_question:
    case DifficultyPolicy::add_context:
        if (rewrite.label != original.label)
            return "label changed";
        if (rewrite.choices != original.choices)
            return "options changed";
        return {};
    case DifficultyPolicy::paraphrase_choices:
        if (rewrite.label != original.label)
            return "label changed";
        if (keys_of(rewrite) != keys_of(original))
            return "option keys or count changed";
        return {};
    case DifficultyPolicy::add_choice: {
        if (!original.label || !original.find_choice(*original.label))
            return "original has no correct option";
        if (!rewrite.choices || rewrite.choices->size() != original.choices->size() + 1)
            return "option count is not one more than before";
        const auto &correct = original.find_choice(*original.label)->body;
        auto matches = std::count_if(rewrite.choices->begin(), rewrite.choices->end(),
                                     [&](const Choice &c) { return c.body == correct; });
        if (matches != 1)
            return "correct option text not preserved exactly once";
        const Choice *labelled = rewrite.label ? rewrite.find_choice(*rewrite.label) : nullptr;
        if (!labelled || labelled->body != correct)
            return "label does not point at the correct option";
        return {};
    }
    }
    return "unknown policy";
}

DifficultyOutcome enhance_difficulty(const StageContext &ctx, const DatasetItem &item, DifficultyPolicy policy,
                                     const DatasetDescriptor &descriptor, RunManifest &log) {
    DifficultyOutcome out{item, policy, false, {}};
    if (!policy_applicable(policy, item)) {
        out.violation = "policy not applicable";
        return out;
    }
    auto name = "difficulty-" + std::string(to_string(policy));
    auto prompt = ctx.templates.render(name, {{"description", descriptor.description},
                                              {"example", item_prompt_json(item)}});
    auto text = ctx.ask(prompt, Stage::difficulty, log,
                        derive_seed(fnv1a64(item.id), 0xd1f0 + static_cast<std::uint64_t>(policy)));
    auto rewrite = parse_rewritten_item(text, item);
    out.violation = rewrite ? difficulty_guard(policy, item, *rewrite) : "unparseable rewrite";
    if (!out.violation.empty()) {
        log.add_event({{"type", "guard_violation"}, {"stage", "difficulty"}, {"id", item.id},
                       {"policy", to_string(policy)}, {"reason", out.violation}});
        return out;
    }
    out.item = std::move(*rewrite);
    out.item.meta["difficulty_policy"] = std::string(to_string(policy));
    mark_stage(out.item, "difficulty");
    out.accepted = true;
    return out;
}

Json DifficultyReport::to_json() const {
    return Json{{"items", items.size()},
                {"attempted", attempted},
                {"accepted", accepted},
                {"rejected", rejected},
                {"not_applicable", not_applicable}};
}

DifficultyReport enhance_dataset(const StageContext &ctx, std::span<const DatasetItem> items,
                                 const DatasetDescriptor &descriptor, std::optional<DifficultyPolicy> policy,
                                 std::uint64_t seed, RunManifest &log) {
    struct PerItem {
        std::optional<DifficultyOutcome> outcome;
        DatasetItem original;
        RunManifest log;
    };
    auto results = parallel_map(items.size(), ctx.max_worker, [&](std::size_t i) {
        PerItem p{std::nullopt, items[i], {}};
        std::optional<DifficultyPolicy> chosen;
        if (policy) {
            if (policy_applicable(*policy, items[i]))
                chosen = policy;
        } else {
            std::vector<DifficultyPolicy> options;
            for (auto c : kAllPolicies) {
                if (policy_applicable(c, items[i]))
                    options.push_back(c);
            }
            if (!options.empty()) {
                auto rng = make_rng(seed, fnv1a64(items[i].id));
                std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
                chosen = options[pick(rng)];
            }
        }
        if (chosen)
            p.outcome = enhance_difficulty(ctx, items[i], *chosen, descriptor, p.log);
        return p;
    });
    DifficultyReport report;
    for (auto p : kAllPolicies) {
        std::string n(to_string(p));
        report.attempted[n] = report.accepted[n] = report.rejected[n] = 0;
    }
    for (auto &p : results) {
        log.absorb(p.log);
        if (!p.outcome) {
            ++report.not_applicable;
            report.items.push_back(std::move(p.original));
            continue;
        }
        std::string n(to_string(p.outcome->policy));
        ++report.attempted[n];
        ++(p.outcome->accepted ? report.accepted[n] : report.rejected[n]);
        report.items.push_back(std::move(p.outcome->item));
    }
    log.set_section("difficulty", report.to_json());
    return report;
}

SimilarityMatrix::SimilarityMatrix(std::vector<std::string> ids, std::vector<double> distances)
    : ids_(std::move(ids)), d_(std::move(distances)) {
    if (d_.size() != ids_.size() * ids_.size())
        throw Error("similarity matrix size does not match its ids");
}

std::vector<double> SimilarityMatrix::pair_distances() const {
    std::vector<double> out;
    auto n = size();
    out.reserve(n * (n > 0 ? n - 1 : 0) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j)
            out.push_back(at(i, j));
    }
    std::sort(out.begin(), out.end());
    return out;
}

SimilarityMatrix build_similarity_matrix(const EmbeddingMatrix &embeddings, std::vector<std::string> ids,
                                         int workers) {
    if (embeddings.rows() == 0)
        throw Error("similarity matrix needs at least one embedding");
    if (ids.size() != embeddings.rows())
        throw Error("similarity matrix: " + std::to_string(ids.size()) + " ids for " +
                    std::to_string(embeddings.rows()) + " embeddings");
    const auto n = embeddings.rows();
    std::vector<double> d(n * n, 0.0);
    const std::size_t block = 32;
    const std::size_t blocks = (n + block - 1) / block;
    parallel_map(blocks, workers, [&](std::size_t b) {
        for (std::size_t i = b * block; i < std::min(n, (b + 1) * block); ++i) {
            for (std::size_t j = i + 1; j < n; ++j)
                d[i * n + j] = euclidean_distance(embeddings.row(i), embeddings.row(j));
        }
        return 0;
    });
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j)
            d[j * n + i] = d[i * n + j];
    }
    return SimilarityMatrix(std::move(ids), std::move(d));
}

double percentile_distance(const SimilarityMatrix &matrix, double p) {
    auto pairs = matrix.pair_distances();
    if (pairs.empty())
        return 0.0;
    p = std::clamp(p, 0.0, 100.0);
    double pos = p / 100.0 * static_cast<double>(pairs.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = std::min(lo + 1, pairs.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return pairs[lo] + (pairs[hi] - pairs[lo]) * frac;
}

double default_theta(const SimilarityMatrix &matrix) {
    double theta = percentile_distance(matrix, 1.0);
    if (theta > 0)
        return theta;
    for (double d : matrix.pair_distances()) {
        if (d > 0)
            return d;
    }
    return 1e-12;
}

Json DedupeResult::to_json() const {
    Json removed = Json::array();
    for (const auto &r : removals)
        removed.push_back({{"removed_id", r.removed_id}, {"kept_id", r.kept_id}, {"distance", r.distance}});
    return Json{{"theta", theta}, {"kept", items.size()}, {"removed", removals.size()}, {"removals", removed}};
}

DedupeResult group_check(std::span<const DatasetItem> items, const SimilarityMatrix &matrix, double theta,
                         std::uint64_t seed) {
    if (!(theta > 0))
        throw ConfigError("dedupe theta must be positive");
    const auto n = items.size();
    if (matrix.size() != n)
        throw Error("similarity matrix is not aligned with the items");
    for (std::size_t i = 0; i < n; ++i) {
        if (matrix.ids()[i] != items[i].id)
            throw Error("similarity matrix row " + std::to_string(i) + " belongs to another item");
    }
    struct Pair {
        double distance;
        std::uint64_t tie;
        std::size_t i, j;
    };
    auto rng = make_rng(seed, 0xdedc);
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (matrix.at(i, j) < theta)
                pairs.push_back({matrix.at(i, j), rng(), i, j});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair &a, const Pair &b) {
        return a.distance != b.distance ? a.distance < b.distance : a.tie < b.tie;
    });
    std::vector<bool> alive(n, true);
    DedupeResult result;
    result.theta = theta;
    for (const auto &p : pairs) {
        if (!alive[p.i] || !alive[p.j])
            continue;
        bool drop_first = (rng() & 1u) != 0;
        auto removed = drop_first ? p.i : p.j;
        auto kept = drop_first ? p.j : p.i;
        alive[removed] = false;
        result.removals.push_back({items[removed].id, items[kept].id, p.distance});
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (alive[i]) {
            result.kept_indices.push_back(i);
            result.items.push_back(items[i]);
        }
    }
    return result;
}

} // namespace datagen
