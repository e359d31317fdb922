#include "datagen/math_verifier.hpp"

#include "datagen/json_extract.hpp"
#include "datagen/util.hpp"

#include <cmath>

namespace datagen {

std::optional<SolverProgram> parse_solver(std::string_view completion, const std::string &origin_id) {
    auto payload = try_extract_json_payload(completion);
    if (!payload || !payload->is_object())
        return std::nullopt;
    const Json *code = nullptr;
    for (const char *key : {"Code", "code"}) {
        if (payload->contains(key))
            code = &(*payload)[key];
    }
    if (!code || !code->is_string() || trim(code->get<std::string>()).empty())
        return std::nullopt;
    SolverProgram p;
    p.source = code->get<std::string>();
    p.origin_id = origin_id;
    for (const char *key : {"Analysis", "analysis"}) {
        if (payload->contains(key) && (*payload)[key].is_string())
            p.analysis = (*payload)[key].get<std::string>();
    }
    return p;
}

std::optional<SolverProgram> synthesize_solver(const StageContext &ctx, const DatasetItem &item, RunManifest &log) {
    auto prompt = ctx.templates.render(templates::math_eval, {{"expression", item.text}});
    auto text = ctx.ask(prompt, Stage::math_solver, log, fnv1a64(item.id));
    auto program = parse_solver(text, item.id);
    if (!program)
        log.add_event({{"type", "skipped"}, {"stage", "math_verify"}, {"id", item.id},
                       {"reason", "solver reply has no Code"}});
    return program;
}

std::optional<bool> local_equal(std::string_view a, std::string_view b) {
    auto x = trim(a), y = trim(b);
    if (iequals_ascii(x, y))
        return true;
    auto p = parse_number(x), q = parse_number(y);
    if (!p || !q)
        return std::nullopt;
    double scale = std::max(std::fabs(*p), std::fabs(*q));
    return std::fabs(*p - *q) <= 1e-9 * scale;
}

std::optional<bool> parse_compare_reply(std::string_view reply) {
    auto t = trim(reply);
    while (!t.empty() && (t.back() == '.' || t.back() == '\''))
        t.pop_back();
    while (!t.empty() && (t.front() == '`' || t.front() == '\''))
        t.erase(t.begin());
    if (t == "True")
        return true;
    if (t == "False")
        return false;
    return std::nullopt;
}

Equivalence semantically_equal(std::string_view a, std::string_view b, const StageContext *ctx, RunManifest *log) {
    if (auto local = local_equal(a, b))
        return *local ? Equivalence::equal : Equivalence::unequal;
    if (!ctx || !log)
        return Equivalence::inconclusive;
    auto prompt = ctx->templates.render(templates::math_compare,
                                        {{"response1", std::string(a)}, {"response2", std::string(b)}});
    auto reply = ctx->ask(prompt, Stage::math_compare, *log, fnv1a64(std::string(a) + '\x1f' + std::string(b)));
    auto verdict = parse_compare_reply(reply);
    if (!verdict)
        return Equivalence::inconclusive;
    return *verdict ? Equivalence::equal : Equivalence::unequal;
}

ReconcileOutcome reconcile(const DatasetItem &item, const std::string &candidate, Equivalence equivalence) {
    ReconcileOutcome out{item, false, false};
    auto &meta = out.item.meta;
    meta["code_verified"] = "true";
    meta["code_candidate"] = candidate;
    if (equivalence == Equivalence::unequal) {
        meta["old_label"] = item.label.value_or("");
        meta["code_corrected"] = "true";
        out.item.label = candidate;
        out.corrected = true;
    } else if (equivalence == Equivalence::inconclusive) {
        meta["code_review"] = "inconclusive";
        out.review = true;
    }
    mark_stage(out.item, "math_verify");
    return out;
}

Json VerificationReport::to_json() const {
    return Json{{"checked", checked},           {"agree_before", agree_before}, {"agree_after", agree_after},
                {"corrected_ids", corrected_ids}, {"review_ids", review_ids},   {"skipped_ids", skipped_ids},
                {"failed_ids", failed_ids},       {"items", items.size()}};
}

VerificationReport verify_math(const StageContext &ctx, std::span<const DatasetItem> items,
                               const SandboxOptions &sandbox, RunManifest &log) {
    enum class Status { skipped, failed, checked };
    struct PerItem {
        DatasetItem item;
        Status status = Status::skipped;
        bool agreed = false;
        bool corrected = false;
        bool review = false;
        std::string old_label;
        RunManifest log;
    };
    auto results = parallel_map(items.size(), ctx.max_worker, [&](std::size_t i) {
        PerItem p{items[i], Status::skipped, false, false, false, {}, {}};
        if (!p.item.label || trim(*p.item.label).empty())
            return p;
        auto program = synthesize_solver(ctx, p.item, p.log);
        if (!program)
            return p;
        auto run = execute_sandboxed(program->source, sandbox);
        if (!run.ok()) {
            p.status = Status::failed;
            p.log.add_event({{"type", "sandbox_failure"}, {"stage", "math_verify"}, {"id", p.item.id},
                             {"reason", run.error}, {"timed_out", run.timed_out}});
            return p;
        }
        p.status = Status::checked;
        auto eq = semantically_equal(*p.item.label, *run.candidate, &ctx, &p.log);
        p.agreed = eq == Equivalence::equal;
        p.old_label = *p.item.label;
        auto r = reconcile(p.item, *run.candidate, eq);
        p.item = std::move(r.item);
        p.corrected = r.corrected;
        p.review = r.review;
        return p;
    });

    VerificationReport report;
    for (auto &p : results) {
        log.absorb(p.log);
        switch (p.status) {
        case Status::skipped:
            report.skipped_ids.push_back(p.item.id);
            break;
        case Status::failed:
            report.failed_ids.push_back(p.item.id);
            break;
        case Status::checked:
            ++report.checked;
            report.agree_before += p.agreed ? 1 : 0;
            report.agree_after += p.review ? 0 : 1;
            if (p.review)
                report.review_ids.push_back(p.item.id);
            break;
        }
        if (p.corrected) {
            report.corrected_ids.push_back(p.item.id);
            log.add_correction("math_verify");
            log.add_event({{"type", "correction"}, {"stage", "math_verify"}, {"id", p.item.id},
                           {"old", p.old_label}, {"new", p.item.label.value_or("")}});
        }
        report.items.push_back(std::move(p.item));
    }
    log.set_section("math_verify", report.to_json());
    return report;
}

} // namespace datagen
