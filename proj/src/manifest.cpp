#include "datagen/manifest.hpp"

#include "datagen/errors.hpp"
#include "datagen/util.hpp"

#include <cmath>

namespace datagen {

namespace {

struct StageName {
    Stage stage;
    std::string_view name;
};

constexpr StageName kStageNames[] = {
    {Stage::generation, "generation"},
    {Stage::attribute_extraction, "attribute_extraction"},
    {Stage::reflection, "reflection"},
    {Stage::enhancement, "enhancement"},
    {Stage::math_solver, "math_solver"},
    {Stage::math_compare, "math_compare"},
    {Stage::entity_extraction, "entity_extraction"},
    {Stage::fact_refine, "fact_refine"},
    {Stage::difficulty, "difficulty"},
    {Stage::embedding, "embedding"},
    {Stage::human_feedback, "human_feedback"},
    {Stage::bench_candidate, "bench_candidate"},
    {Stage::bench_judge, "bench_judge"},
    {Stage::compliance_judge, "compliance_judge"},
};

std::int64_t per_token_pico(double per_million) {
    // $ per 1e6 tokens -> 1e12 pico$ per 1e6 tokens -> 1e6 pico$ per token
    return static_cast<std::int64_t>(std::llround(per_million * 1e6));
}

} // namespace

std::string_view to_string(Stage stage) {
    for (const auto &entry : kStageNames) {
        if (entry.stage == stage)
            return entry.name;
    }
    return "unknown";
}

Stage stage_from_string(std::string_view name) {
    for (const auto &entry : kStageNames) {
        if (entry.name == name)
            return entry.stage;
    }
    throw SchemaError("unknown stage: " + std::string(name));
}

std::string_view to_string(CostCategory category) {
    switch (category) {
    case CostCategory::base:
        return "base";
    case CostCategory::code:
        return "code";
    case CostCategory::rag:
        return "rag";
    case CostCategory::bench:
        return "bench";
    }
    return "base";
}

CostCategory category_of(Stage stage) {
    switch (stage) {
    case Stage::math_solver:
    case Stage::math_compare:
        return CostCategory::code;
    case Stage::entity_extraction:
    case Stage::fact_refine:
        return CostCategory::rag;
    case Stage::bench_candidate:
    case Stage::bench_judge:
    case Stage::compliance_judge:
        return CostCategory::bench;
    default:
        return CostCategory::base;
    }
}

RateCard::Rate RateCard::rate_for(const std::string &model) const {
    if (auto it = rates_.find(model); it != rates_.end())
        return it->second;
    if (auto it = rates_.find("default"); it != rates_.end())
        return it->second;
    return {};
}

Picodollars RateCard::cost(const std::string &model, std::int64_t prompt_tokens, std::int64_t completion_tokens) const {
    auto rate = rate_for(model);
    return prompt_tokens * per_token_pico(rate.input_per_million) +
           completion_tokens * per_token_pico(rate.output_per_million);
}

RateCard RateCard::from_json(const Json &j) {
    if (!j.is_object())
        throw ConfigError("rate card must be a JSON object of model -> {input_per_million, output_per_million}");
    RateCard card;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto &v = it.value();
        if (!v.is_object() || !v.contains("input_per_million") || !v.contains("output_per_million"))
            throw ConfigError("rate card entry '" + it.key() + "' needs input_per_million and output_per_million");
        Rate r{v.at("input_per_million").get<double>(), v.at("output_per_million").get<double>()};
        if (r.input_per_million < 0 || r.output_per_million < 0)
            throw ConfigError("rate card entry '" + it.key() + "' has a negative price");
        card.set(it.key(), r);
    }
    return card;
}

RateCard RateCard::load(const std::filesystem::path &path) {
    try {
        return from_json(Json::parse(read_file(path)));
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError("rate card " + path.string() + ": " + e.what());
    } catch (const Error &e) {
        throw ConfigError(e.what());
    }
}

Json RateCard::to_json() const {
    Json j = Json::object();
    for (const auto &[model, r] : rates_)
        j[model] = {{"input_per_million", r.input_per_million}, {"output_per_million", r.output_per_million}};
    return j;
}

RateCard RateCard::builtin() {
    RateCard card;
    card.set("gpt-4-turbo", {10.0, 30.0});
    card.set("gpt-4-turbo-2024-04-09", {10.0, 30.0});
    card.set("text-embedding-ada-002", {0.10, 0.0});
    return card;
}

RunManifest::RunManifest(std::string run_id, Json config_snapshot)
    : run_id_(std::move(run_id)), config_(std::move(config_snapshot)) {}

RunManifest::RunManifest(const RunManifest &other) {
    std::lock_guard lock(other.mutex_);
    run_id_ = other.run_id_;
    config_ = other.config_;
    calls_ = other.calls_;
    corrections_ = other.corrections_;
    events_ = other.events_;
    sections_ = other.sections_;
    prompt_tokens_ = other.prompt_tokens_;
    completion_tokens_ = other.completion_tokens_;
    cost_ = other.cost_;
}

RunManifest &RunManifest::operator=(const RunManifest &other) {
    if (this != &other) {
        RunManifest copy(other);
        *this = std::move(copy);
    }
    return *this;
}

RunManifest::RunManifest(RunManifest &&other) noexcept
    : run_id_(std::move(other.run_id_)), config_(std::move(other.config_)), calls_(std::move(other.calls_)),
      corrections_(std::move(other.corrections_)), events_(std::move(other.events_)),
      sections_(std::move(other.sections_)), prompt_tokens_(other.prompt_tokens_),
      completion_tokens_(other.completion_tokens_), cost_(other.cost_) {}

RunManifest &RunManifest::operator=(RunManifest &&other) noexcept {
    if (this != &other) {
        std::scoped_lock lock(mutex_, other.mutex_);
        run_id_ = std::move(other.run_id_);
        config_ = std::move(other.config_);
        calls_ = std::move(other.calls_);
        corrections_ = std::move(other.corrections_);
        events_ = std::move(other.events_);
        sections_ = std::move(other.sections_);
        prompt_tokens_ = other.prompt_tokens_;
        completion_tokens_ = other.completion_tokens_;
        cost_ = other.cost_;
    }
    return *this;
}

CallRecord RunManifest::record_call(Stage stage, const std::string &model, const std::string &prompt_hash,
                                           std::int64_t prompt_tokens, std::int64_t completion_tokens,
                                           double latency_ms, const RateCard &rates) {
    if (prompt_tokens < 0 || completion_tokens < 0)
        throw Error("token counts must be non-negative");
    CallRecord rec;
    rec.stage = stage;
    rec.model = model;
    rec.prompt_hash = prompt_hash;
    rec.prompt_tokens = prompt_tokens;
    rec.completion_tokens = completion_tokens;
    rec.latency_ms = latency_ms;
    rec.cost = rates.cost(model, prompt_tokens, completion_tokens);
    std::lock_guard lock(mutex_);
    rec.seq = calls_.size();
    prompt_tokens_ += prompt_tokens;
    completion_tokens_ += completion_tokens;
    cost_ += rec.cost;
    calls_.push_back(rec);
    return rec;
}

void RunManifest::absorb(const RunManifest &other) {
    if (this == &other)
        return;
    std::scoped_lock lock(mutex_, other.mutex_);
    for (auto rec : other.calls_) {
        rec.seq = calls_.size();
        prompt_tokens_ += rec.prompt_tokens;
        completion_tokens_ += rec.completion_tokens;
        cost_ += rec.cost;
        calls_.push_back(std::move(rec));
    }
    for (const auto &[stage, n] : other.corrections_)
        corrections_[stage] += n;
    for (const auto &e : other.events_)
        events_.push_back(e);
    for (const auto &[name, value] : other.sections_)
        sections_[name] = value;
}

void RunManifest::add_correction(const std::string &stage, std::int64_t count) {
    std::lock_guard lock(mutex_);
    corrections_[stage] += count;
}

void RunManifest::add_event(Json event) {
    std::lock_guard lock(mutex_);
    events_.push_back(std::move(event));
}

void RunManifest::set_section(const std::string &name, Json value) {
    std::lock_guard lock(mutex_);
    sections_[name] = std::move(value);
}

std::vector<CallRecord> RunManifest::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

std::map<std::string, std::int64_t> RunManifest::corrections() const {
    std::lock_guard lock(mutex_);
    return corrections_;
}

std::vector<Json> RunManifest::events() const {
    std::lock_guard lock(mutex_);
    return events_;
}

Json RunManifest::section(const std::string &name) const {
    std::lock_guard lock(mutex_);
    auto it = sections_.find(name);
    return it == sections_.end() ? Json(nullptr) : it->second;
}

bool RunManifest::has_section(const std::string &name) const {
    std::lock_guard lock(mutex_);
    return sections_.contains(name);
}

std::int64_t RunManifest::total_prompt_tokens() const {
    std::lock_guard lock(mutex_);
    return prompt_tokens_;
}

std::int64_t RunManifest::total_completion_tokens() const {
    std::lock_guard lock(mutex_);
    return completion_tokens_;
}

Picodollars RunManifest::total_cost() const {
    std::lock_guard lock(mutex_);
    return cost_;
}

std::size_t RunManifest::call_count() const {
    std::lock_guard lock(mutex_);
    return calls_.size();
}

Picodollars RunManifest::recompute_cost() const {
    std::lock_guard lock(mutex_);
    Picodollars total = 0;
    for (const auto &c : calls_)
        total += c.cost;
    return total;
}

std::map<CostCategory, Picodollars> RunManifest::cost_by_category() const {
    std::lock_guard lock(mutex_);
    std::map<CostCategory, Picodollars> out{
        {CostCategory::base, 0}, {CostCategory::code, 0}, {CostCategory::rag, 0}, {CostCategory::bench, 0}};
    for (const auto &c : calls_)
        out[category_of(c.stage)] += c.cost;
    return out;
}

std::map<Stage, Picodollars> RunManifest::cost_by_stage() const {
    std::lock_guard lock(mutex_);
    std::map<Stage, Picodollars> out;
    for (const auto &c : calls_)
        out[c.stage] += c.cost;
    return out;
}

Json RunManifest::to_json() const {
    std::lock_guard lock(mutex_);
    Json j;
    j["run_id"] = run_id_;
    j["config"] = config_;
    Json calls = Json::array();
    for (const auto &c : calls_) {
        calls.push_back({{"seq", c.seq},
                         {"stage", std::string(to_string(c.stage))},
                         {"model", c.model},
                         {"prompt_hash", c.prompt_hash},
                         {"prompt_tokens", c.prompt_tokens},
                         {"completion_tokens", c.completion_tokens},
                         {"latency_ms", c.latency_ms},
                         {"cost_picodollars", c.cost}});
    }
    j["calls"] = std::move(calls);
    j["corrections"] = corrections_;
    j["events"] = events_;
    j["sections"] = sections_;
    j["totals"] = {{"prompt_tokens", prompt_tokens_},
                   {"completion_tokens", completion_tokens_},
                   {"cost_picodollars", cost_},
                   {"cost_usd", to_dollars(cost_)},
                   {"calls", calls_.size()}};
    return j;
}

RunManifest RunManifest::from_json(const Json &j) {
    try {
        RunManifest m(j.at("run_id").get<std::string>(), j.value("config", Json::object()));
        for (const auto &c : j.at("calls")) {
            CallRecord rec;
            rec.seq = c.at("seq").get<std::uint64_t>();
            rec.stage = stage_from_string(c.at("stage").get<std::string>());
            rec.model = c.at("model").get<std::string>();
            rec.prompt_hash = c.value("prompt_hash", "");
            rec.prompt_tokens = c.at("prompt_tokens").get<std::int64_t>();
            rec.completion_tokens = c.at("completion_tokens").get<std::int64_t>();
            rec.latency_ms = c.value("latency_ms", 0.0);
            rec.cost = c.at("cost_picodollars").get<std::int64_t>();
            m.prompt_tokens_ += rec.prompt_tokens;
            m.completion_tokens_ += rec.completion_tokens;
            m.cost_ += rec.cost;
            m.calls_.push_back(std::move(rec));
        }
        if (j.contains("corrections"))
            m.corrections_ = j.at("corrections").get<std::map<std::string, std::int64_t>>();
        if (j.contains("events"))
            m.events_ = j.at("events").get<std::vector<Json>>();
        if (j.contains("sections"))
            m.sections_ = j.at("sections").get<std::map<std::string, Json>>();
        if (j.contains("totals") && j.at("totals").contains("cost_picodollars") &&
            j.at("totals").at("cost_picodollars").get<std::int64_t>() != m.cost_)
            throw SchemaError("manifest total cost does not match its call records");
        return m;
    } catch (const nlohmann::json::exception &e) {
        throw SchemaError(std::string("malformed manifest: ") + e.what());
    }
}

void RunManifest::save(const std::filesystem::path &path) const { write_file_atomic(path, to_json().dump(2) + "\n"); }

RunManifest RunManifest::load(const std::filesystem::path &path) {
    try {
        return from_json(Json::parse(read_file(path)));
    } catch (const nlohmann::json::parse_error &e) {
        throw ParseError(std::string("manifest: ") + e.what(), 0, 0, e.byte);
    }
}

} // namespace datagen
