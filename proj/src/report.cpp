#include "datagen/report.hpp"

#include <cstdio>

namespace datagen {
namespace {

double per(Picodollars cost, std::size_t n) {
    return n ? to_dollars(cost) / static_cast<double>(n) : 0.0;
}

std::string money(double usd) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "$%.6f", usd);
    return buf;
}

std::string fixed(double v, int digits = 4) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::size_t count_of(const Json &section, const char *key) {
    if (!section.is_object() || !section.contains(key))
        return 0;
    const auto &v = section[key];
    if (v.is_number_unsigned() || v.is_number_integer())
        return v.get<std::size_t>();
    if (v.is_array())
        return v.size();
    return 0;
}

} // namespace

Json build_report(const RunManifest &manifest) {
    Json r;
    r["run_id"] = manifest.run_id();
    auto total = manifest.total_cost();
    auto recomputed = manifest.recompute_cost();
    auto by_category = manifest.cost_by_category();
    Picodollars category_sum = 0;
    for (const auto &[cat, cost] : by_category)
        category_sum += cost;

    r["totals"] = {{"calls", manifest.call_count()},
                   {"prompt_tokens", manifest.total_prompt_tokens()},
                   {"completion_tokens", manifest.total_completion_tokens()},
                   {"cost_usd", to_dollars(total)},
                   {"cost_picodollars", total},
                   {"recomputed_matches", recomputed == total},
                   {"categories_partition_total", category_sum == total}};

    Json stages = Json::object();
    for (const auto &[stage, cost] : manifest.cost_by_stage())
        stages[std::string(to_string(stage))] = to_dollars(cost);
    r["cost_by_stage"] = stages;

    Json cats = Json::object();
    for (auto cat : {CostCategory::base, CostCategory::code, CostCategory::rag, CostCategory::bench}) {
        auto it = by_category.find(cat);
        cats[std::string(to_string(cat))] = to_dollars(it == by_category.end() ? 0 : it->second);
    }
    r["cost_by_category"] = cats;

    auto generation = manifest.has_section("generation") ? manifest.section("generation") : Json();
    std::size_t items = count_of(generation, "accepted");
    auto cat = [&](CostCategory c) {
        auto it = by_category.find(c);
        return it == by_category.end() ? Picodollars{0} : it->second;
    };
    r["per_item_cost_usd"] = {{"items", items},
                              {"base", per(cat(CostCategory::base), items)},
                              {"base_plus_code", per(cat(CostCategory::base) + cat(CostCategory::code), items)},
                              {"base_plus_rag", per(cat(CostCategory::base) + cat(CostCategory::rag), items)}};

    r["generation"] = generation.is_null() ? Json("disabled") : generation;
    if (manifest.has_section("quality")) {
        auto q = manifest.section("quality");
        r["quality"] = {{"epoch_histogram", q.value("epoch_histogram", Json::object())},
                        {"exhausted", q.value("exhausted", 0)},
                        {"max_epochs", q.value("max_epochs", 0)}};
    } else {
        r["quality"] = "disabled";
    }

    auto corrections = manifest.corrections();
    Json fractions = Json::object();
    if (manifest.has_section("math_verify")) {
        auto m = manifest.section("math_verify");
        auto checked = count_of(m, "checked");
        auto corrected = count_of(m, "corrected_ids");
        r["math_verify"] = {{"checked", checked},
                            {"corrected", corrected},
                            {"review", count_of(m, "review_ids")},
                            {"skipped", count_of(m, "skipped_ids")},
                            {"failed", count_of(m, "failed_ids")},
                            {"agree_before", count_of(m, "agree_before")},
                            {"agree_after", count_of(m, "agree_after")}};
        fractions["math_verify"] = checked ? static_cast<double>(corrected) / static_cast<double>(checked) : 0.0;
    } else {
        r["math_verify"] = "disabled";
    }
    if (manifest.has_section("rag")) {
        auto g = manifest.section("rag");
        r["rag"] = g;
        fractions["rag"] = g.value("corrected_fraction", 0.0);
    } else {
        r["rag"] = "disabled";
    }
    if (manifest.has_section("dedupe")) {
        auto d = manifest.section("dedupe");
        r["dedupe"] = {{"theta", d.value("theta", 0.0)},
                       {"kept", d.value("kept", 0)},
                       {"removed", d.value("removed", 0)},
                       {"removals", d.value("removals", Json::array())}};
    } else {
        r["dedupe"] = "disabled";
    }
    r["difficulty"] = manifest.has_section("difficulty") ? manifest.section("difficulty") : Json("disabled");
    r["corrections"] = corrections;
    r["correction_fractions"] = fractions;
    return r;
}

std::string report_markdown(const Json &r) {
    std::string md = "# Run report " + r.value("run_id", std::string()) + "\n\n";
    const auto &t = r["totals"];
    md += "## Totals\n\n";
    md += "- calls: " + std::to_string(t.value("calls", 0)) + "\n";
    md += "- prompt tokens: " + std::to_string(t.value("prompt_tokens", 0)) + "\n";
    md += "- completion tokens: " + std::to_string(t.value("completion_tokens", 0)) + "\n";
    md += "- cost: " + money(t.value("cost_usd", 0.0)) + "\n";
    md += std::string("- recomputed from call records: ") + (t.value("recomputed_matches", false) ? "match" : "MISMATCH") +
          "\n\n";

    md += "## Cost by stage\n\n| Stage | Cost |\n|---|---|\n";
    for (const auto &[stage, cost] : r["cost_by_stage"].items())
        md += "| " + stage + " | " + money(cost.get<double>()) + " |\n";
    md += "\n## Cost by category\n\n| Category | Cost |\n|---|---|\n";
    for (const auto &[cat, cost] : r["cost_by_category"].items())
        md += "| " + cat + " | " + money(cost.get<double>()) + " |\n";

    const auto &p = r["per_item_cost_usd"];
    md += "\n## Per-item cost\n\n| Configuration | Cost per item |\n|---|---|\n";
    md += "| base | " + money(p.value("base", 0.0)) + " |\n";
    md += "| base + code | " + money(p.value("base_plus_code", 0.0)) + " |\n";
    md += "| base + RAG | " + money(p.value("base_plus_rag", 0.0)) + " |\n";

    md += "\n## Quality loop\n\n";
    if (r["quality"].is_string()) {
        md += "disabled\n";
    } else {
        md += "| Epochs | Items |\n|---|---|\n";
        for (const auto &[epochs, count] : r["quality"]["epoch_histogram"].items())
            md += "| " + epochs + " | " + count.dump() + " |\n";
        md += "\nexhausted: " + r["quality"]["exhausted"].dump() + "\n";
    }

    md += "\n## Code verification\n\n";
    if (r["math_verify"].is_string()) {
        md += "disabled\n";
    } else {
        const auto &m = r["math_verify"];
        md += "checked " + m["checked"].dump() + ", corrected " + m["corrected"].dump() + ", review " +
              m["review"].dump() + ", skipped " + m["skipped"].dump() + ", failed " + m["failed"].dump() + "\n";
    }

    md += "\n## RAG validation\n\n";
    if (r["rag"].is_string()) {
        md += "disabled\n";
    } else {
        md += "corrected fraction: " + fixed(r["rag"].value("corrected_fraction", 0.0)) + "\n";
        auto counts = r["rag"].value("counts", Json::object());
        for (const auto &[status, count] : counts.items())
            md += "- " + status + ": " + count.dump() + "\n";
    }

    md += "\n## Dedupe\n\n";
    if (r["dedupe"].is_string()) {
        md += "disabled\n";
    } else {
        md += "theta " + fixed(r["dedupe"]["theta"].get<double>(), 6) + ", kept " + r["dedupe"]["kept"].dump() +
              ", removed " + r["dedupe"]["removed"].dump() + "\n";
    }

    md += "\n## Difficulty enhancement\n\n";
    if (r["difficulty"].is_string()) {
        md += "disabled\n";
    } else {
        md += "| Policy | Attempted | Accepted | Rejected |\n|---|---|---|---|\n";
        for (const auto &[policy, n] : r["difficulty"]["attempted"].items())
            md += "| " + policy + " | " + n.dump() + " | " + r["difficulty"]["accepted"][policy].dump() + " | " +
                  r["difficulty"]["rejected"][policy].dump() + " |\n";
    }

    md += "\n## Corrections\n\n";
    if (r["corrections"].empty())
        md += "none\n";
    for (const auto &[stage, n] : r["corrections"].items())
        md += "- " + stage + ": " + n.dump() + "\n";
    return md;
}

} // namespace datagen
