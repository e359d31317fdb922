#include "datagen/bench.hpp"

#include "datagen/errors.hpp"
#include "datagen/json_extract.hpp"
#include "datagen/util.hpp"

#include <cstdio>
#include <map>
#include <regex>
#include <sstream>

namespace datagen {

std::optional<JudgeVerdict> parse_judge_verdict(std::string_view completion) {
    auto payload = try_extract_json_payload(completion);
    if (!payload || !payload->is_object())
        return std::nullopt;
    auto it = payload->find("is_same");
    if (it == payload->end() || !it->is_boolean())
        return std::nullopt;
    JudgeVerdict v;
    v.is_same = it->get<bool>();
    auto text = [&](const char *key) {
        auto f = payload->find(key);
        if (f == payload->end() || f->is_null())
            return std::string();
        return f->is_string() ? f->get<std::string>() : f->dump();
    };
    v.model_final_answer = text("Model Final Answer");
    v.groundtruth_answer = text("Groundtruth Answer");
    return v;
}

std::string render_question(const DatasetItem &item) {
    std::string out = item.text;
    if (item.choices) {
        for (const auto &c : *item.choices)
            out += "\n" + c.key + ". " + c.body;
    }
    return out;
}

std::string groundtruth_of(const DatasetItem &item) { return item.label.value_or(""); }

Json ItemVerdict::to_json() const {
    Json j{{"id", id}, {"candidate_answer", candidate_answer}, {"groundtruth", groundtruth}, {"scored", scored()}};
    if (verdict) {
        j["model_final_answer"] = verdict->model_final_answer;
        j["groundtruth_answer"] = verdict->groundtruth_answer;
        j["is_same"] = verdict->is_same;
    }
    return j;
}

std::string EvaluationResult::to_jsonl() const {
    std::string out;
    for (const auto &v : verdicts)
        out += v.to_json().dump() + "\n";
    return out;
}

Json EvaluationResult::summary_json() const {
    return Json{{"candidate_model", candidate_model}, {"judge_model", judge_model}, {"items", verdicts.size()},
                {"scored", scored},                   {"unscored", unscored},       {"correct", correct},
                {"accuracy", accuracy}};
}

EvaluationResult evaluate_model(const StageContext &candidate, const StageContext &judge,
                                std::span<const DatasetItem> items, AnswerFormat format, RunManifest &log) {
    for (const auto &item : items) {
        if (!item.label || trim(*item.label).empty())
            throw SchemaError("item " + item.id + " has no label to evaluate against");
    }
    auto answer_template = "answer-" + std::string(to_string(format));
    struct PerItem {
        ItemVerdict verdict;
        RunManifest log;
    };
    auto results = parallel_map(items.size(), candidate.max_worker, [&](std::size_t i) {
        const auto &item = items[i];
        PerItem p;
        p.verdict.id = item.id;
        p.verdict.groundtruth = groundtruth_of(item);
        auto question = render_question(item);
        auto prompt = candidate.templates.render(answer_template, {{"question", question}});
        p.verdict.candidate_answer =
            trim(candidate.ask(prompt, Stage::bench_candidate, p.log, derive_seed(fnv1a64(item.id), 0xbe1)));
        auto judge_prompt = judge.templates.render(templates::judge, {{"question", question},
                                                                      {"solution", p.verdict.candidate_answer},
                                                                      {"correct answer", p.verdict.groundtruth}});
        auto reply = judge.ask(judge_prompt, Stage::bench_judge, p.log, derive_seed(fnv1a64(item.id), 0xbe2));
        p.verdict.verdict = parse_judge_verdict(reply);
        if (!p.verdict.verdict)
            p.log.add_event({{"type", "format_error"}, {"stage", "bench_judge"}, {"id", item.id}});
        return p;
    });
    EvaluationResult r;
    r.candidate_model = candidate.model;
    r.judge_model = judge.model;
    for (auto &p : results) {
        log.absorb(p.log);
        if (p.verdict.scored()) {
            ++r.scored;
            r.correct += p.verdict.verdict->is_same ? 1 : 0;
        } else {
            ++r.unscored;
        }
        r.verdicts.push_back(std::move(p.verdict));
    }
    r.accuracy = r.scored ? static_cast<double>(r.correct) / static_cast<double>(r.scored) : 0.0;
    return r;
}

std::string bench_table(std::span<const BenchRow> rows) {
    auto cell = [](const std::optional<double> &v) {
        if (!v)
            return std::string("-");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", *v);
        return std::string(buf);
    };
    std::string out = "| Model | ori. | gen. | diff. |\n|---|---|---|---|\n";
    for (const auto &r : rows) {
        std::optional<double> diff;
        if (r.original && r.generated)
            diff = *r.generated - *r.original;
        out += "| " + r.model + " | " + cell(r.original) + " | " + cell(r.generated) + " | " + cell(diff) + " |\n";
    }
    return out;
}

Json ComplianceResult::to_json() const {
    return Json{{"constraint", constraint}, {"method", method}, {"checked", checked},
                {"yes", yes},               {"rate", rate},     {"failing_ids", failing_ids}};
}

bool parse_yes_no(std::string_view reply) {
    auto t = trim(reply);
    while (!t.empty() && (t.back() == '.' || t.back() == '!' || t.back() == '"' || t.back() == '\''))
        t.pop_back();
    while (!t.empty() && (t.front() == '"' || t.front() == '\''))
        t.erase(t.begin());
    return iequals_ascii(t, "yes");
}

namespace {

void finish(ComplianceResult &r) {
    r.rate = r.checked ? static_cast<double>(r.yes) / static_cast<double>(r.checked) : 0.0;
}

std::vector<bool> judge_all(const StageContext &judge, std::span<const DatasetItem> items,
                            const std::string &constraint, RunManifest &log) {
    struct PerItem {
        bool yes = false;
        RunManifest log;
    };
    auto results = parallel_map(items.size(), judge.max_worker, [&](std::size_t i) {
        PerItem p;
        auto prompt = judge.templates.render(templates::constraint_judge,
                                             {{"constraint", constraint}, {"text", render_question(items[i])}});
        auto reply = judge.ask(prompt, Stage::compliance_judge, p.log,
                               derive_seed(fnv1a64(items[i].id), fnv1a64(constraint)));
        p.yes = parse_yes_no(reply);
        return p;
    });
    std::vector<bool> out;
    for (auto &p : results) {
        log.absorb(p.log);
        out.push_back(p.yes);
    }
    return out;
}

} // namespace

ComplianceResult check_compliance(const StageContext &judge, std::span<const DatasetItem> items,
                                  const std::string &constraint, RunManifest &log) {
    if (items.empty())
        throw Error("compliance check needs at least one item");
    auto verdicts = judge_all(judge, items, constraint, log);
    ComplianceResult r{constraint, "judge", items.size(), 0, 0, {}};
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (verdicts[i])
            ++r.yes;
        else
            r.failing_ids.push_back(items[i].id);
    }
    finish(r);
    return r;
}

ComplianceResult check_combined(const StageContext &judge, std::span<const DatasetItem> items,
                                std::span<const std::string> constraints, RunManifest &log) {
    if (items.empty())
        throw Error("compliance check needs at least one item");
    std::vector<bool> all(items.size(), true);
    std::string joined;
    for (const auto &c : constraints) {
        auto v = judge_all(judge, items, c, log);
        for (std::size_t i = 0; i < items.size(); ++i)
            all[i] = all[i] && v[i];
        joined += (joined.empty() ? "" : " AND ") + c;
    }
    ComplianceResult r{joined, "judge", items.size(), 0, 0, {}};
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (all[i])
            ++r.yes;
        else
            r.failing_ids.push_back(items[i].id);
    }
    finish(r);
    return r;
}

namespace {

bool compare(std::size_t actual, Comparison c, std::size_t value) {
    switch (c) {
    case Comparison::less:
        return actual < value;
    case Comparison::at_most:
        return actual <= value;
    case Comparison::equal:
        return actual == value;
    case Comparison::at_least:
        return actual >= value;
    case Comparison::greater:
        return actual > value;
    }
    return false;
}

std::optional<std::size_t> number_value(const std::string &word) {
    static const std::map<std::string, std::size_t> words{
        {"one", 1},      {"two", 2},       {"three", 3},     {"four", 4},       {"five", 5},
        {"six", 6},      {"seven", 7},     {"eight", 8},     {"nine", 9},       {"ten", 10},
        {"eleven", 11},  {"twelve", 12},   {"thirteen", 13}, {"fourteen", 14},  {"fifteen", 15},
        {"sixteen", 16}, {"seventeen", 17}, {"eighteen", 18}, {"nineteen", 19}, {"twenty", 20},
        {"thirty", 30},  {"forty", 40},    {"fifty", 50},    {"hundred", 100}};
    auto w = to_lower_ascii(word);
    if (auto it = words.find(w); it != words.end())
        return it->second;
    if (!w.empty() && std::all_of(w.begin(), w.end(), [](unsigned char c) { return std::isdigit(c); }))
        return static_cast<std::size_t>(std::stoul(w));
    return std::nullopt;
}

Comparison comparison_of(const std::string &phrase) {
    auto p = to_lower_ascii(phrase);
    if (p.empty() || p == "exactly")
        return Comparison::equal;
    if (p == "at most" || p == "no more than" || p == "up to" || p == "within")
        return Comparison::at_most;
    if (p == "at least" || p == "no fewer than" || p == "no less than")
        return Comparison::at_least;
    if (p == "longer than" || p == "more than")
        return Comparison::greater;
    return Comparison::less;
}

} // namespace

bool MechanicalConstraint::holds(const DatasetItem &item) const {
    switch (kind) {
    case MechanicalKind::word_length:
        if (target == LengthTarget::each_option) {
            if (!item.choices)
                return false;
            return std::all_of(item.choices->begin(), item.choices->end(),
                               [&](const Choice &c) { return compare(word_count(c.body), comparison, value); });
        }
        return compare(word_count(target == LengthTarget::whole_item ? render_question(item) : item.text), comparison,
                       value);
    case MechanicalKind::option_count:
        return compare(item.choices ? item.choices->size() : 0, comparison, value);
    case MechanicalKind::script:
        return script_share(render_question(item), script, japanese) >= 0.5;
    }
    return false;
}

std::optional<MechanicalConstraint> parse_mechanical_constraint(std::string_view text) {
    const std::string s(text);
    const auto lower = to_lower_ascii(s);
    static const std::string cmp =
        "(shorter than|fewer than|less than|under|below|at most|no more than|up to|within|longer than|more than|"
        "at least|no fewer than|no less than|exactly)?";
    std::smatch m;
    static const std::regex length_re("\\b" + cmp + "\\s*([a-z]+|\\d+)\\s+words?\\b");
    if (std::regex_search(lower, m, length_re)) {
        if (auto n = number_value(m[2].str())) {
            MechanicalConstraint c;
            c.kind = MechanicalKind::word_length;
            c.comparison = comparison_of(m[1].str());
            c.value = *n;
            if (lower.find("option") != std::string::npos || lower.find("choice") != std::string::npos)
                c.target = LengthTarget::each_option;
            else if (lower.find("question") == std::string::npos &&
                     (lower.find("item") != std::string::npos || lower.find("entry") != std::string::npos ||
                      lower.find("example") != std::string::npos))
                c.target = LengthTarget::whole_item;
            return c;
        }
    }
    static const std::regex count_re("\\b" + cmp + "\\s*([a-z]+|\\d+)\\s+(?:answer\\s+)?(?:options|choices)\\b");
    if (std::regex_search(lower, m, count_re)) {
        if (auto n = number_value(m[2].str())) {
            MechanicalConstraint c;
            c.kind = MechanicalKind::option_count;
            c.comparison = comparison_of(m[1].str());
            c.value = *n;
            return c;
        }
    }
    static const std::vector<std::pair<std::string, Script>> languages{
        {"chinese", Script::han},       {"japanese", Script::kana}, {"korean", Script::hangul},
        {"russian", Script::cyrillic},  {"greek", Script::greek},   {"arabic", Script::arabic},
        {"english", Script::latin},     {"french", Script::latin},  {"german", Script::latin},
        {"spanish", Script::latin}};
    static const std::regex script_re("\\b(?:in|written in|language is|language:)\\s+(?:the\\s+)?([a-z]+)\\b");
    for (auto it = std::sregex_iterator(lower.begin(), lower.end(), script_re); it != std::sregex_iterator(); ++it) {
        for (const auto &[name, script] : languages) {
            if ((*it)[1].str() == name) {
                MechanicalConstraint c;
                c.kind = MechanicalKind::script;
                c.script = script;
                c.japanese = name == "japanese";
                return c;
            }
        }
    }
    return std::nullopt;
}

double script_share(std::string_view text, Script script, bool japanese) {
    std::size_t total = 0, hits = 0;
    for (char32_t cp : decode_utf8(text)) {
        auto s = script_of(cp);
        if (s == Script::other)
            continue;
        ++total;
        if (s == script || (japanese && (s == Script::kana || s == Script::han)))
            ++hits;
    }
    return total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

ComplianceResult check_local(std::span<const DatasetItem> items, const std::string &constraint,
                             const MechanicalConstraint &rule) {
    ComplianceResult r{constraint, "local", items.size(), 0, 0, {}};
    for (const auto &item : items) {
        if (rule.holds(item))
            ++r.yes;
        else
            r.failing_ids.push_back(item.id);
    }
    finish(r);
    return r;
}

} // namespace datagen
