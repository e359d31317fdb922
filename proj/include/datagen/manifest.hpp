#pragma once

#include "datagen/core.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace datagen {

/// Pipeline stage that issued a provider call.
enum class Stage {
    generation,
    attribute_extraction,
    reflection,
    enhancement,
    math_solver,
    math_compare,
    entity_extraction,
    fact_refine,
    difficulty,
    embedding,
    human_feedback,
    bench_candidate,
    bench_judge,
    compliance_judge,
};

/// Cost buckets used by the report: base generation, code-based verification,
/// retrieval-backed validation, and benchmarking.
enum class CostCategory { base, code, rag, bench };

std::string_view to_string(Stage stage);
Stage stage_from_string(std::string_view name);
std::string_view to_string(CostCategory category);
CostCategory category_of(Stage stage);

/// Costs are tracked in integer picodollars so that totals re-derived from the
/// per-call records match the stored total exactly.
using Picodollars = std::int64_t;

inline double to_dollars(Picodollars p) { return static_cast<double>(p) / 1e12; }

/// Model -> price per million tokens (USD). Prices drift, so they live in a file.
class RateCard {
  public:
    struct Rate {
        double input_per_million = 0;
        double output_per_million = 0;
    };

    RateCard() = default;

    void set(const std::string &model, Rate rate) { rates_[model] = rate; }

    /// Exact model match, then the "default" entry, then zero.
    Rate rate_for(const std::string &model) const;

    Picodollars cost(const std::string &model, std::int64_t prompt_tokens, std::int64_t completion_tokens) const;

    static RateCard from_json(const Json &j);
    static RateCard load(const std::filesystem::path &path);
    Json to_json() const;

    /// GPT-4-Turbo list prices ($10 / $30 per million) plus ada-002 embeddings ($0.10).
    static RateCard builtin();

  private:
    std::map<std::string, Rate> rates_;
};

struct CallRecord {
    std::uint64_t seq = 0;
    Stage stage = Stage::generation;
    std::string model;
    std::string prompt_hash;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    double latency_ms = 0;
    Picodollars cost = 0;

    bool operator==(const CallRecord &) const = default;
};

/// Append-only ledger of a run. Safe for concurrent appends; every append takes a
/// single lock so calls get a total order.
class RunManifest {
  public:
    RunManifest() = default;
    RunManifest(std::string run_id, Json config_snapshot);

    RunManifest(const RunManifest &other);
    RunManifest &operator=(const RunManifest &other);
    RunManifest(RunManifest &&other) noexcept;
    RunManifest &operator=(RunManifest &&other) noexcept;

    CallRecord record_call(Stage stage, const std::string &model, const std::string &prompt_hash,
                                  std::int64_t prompt_tokens, std::int64_t completion_tokens, double latency_ms,
                                  const RateCard &rates);

    /// Moves every call, correction count and event of `other` into this manifest,
    /// preserving their relative order.
    void absorb(const RunManifest &other);

    void add_correction(const std::string &stage, std::int64_t count = 1);

    /// Free-form append-only event log (selections, warnings, ledger entries).
    void add_event(Json event);

    /// Named report sections (epoch histogram, dedupe report, ...). Overwrites.
    void set_section(const std::string &name, Json value);

    const std::string &run_id() const { return run_id_; }
    const Json &config_snapshot() const { return config_; }
    std::vector<CallRecord> calls() const;
    std::map<std::string, std::int64_t> corrections() const;
    std::vector<Json> events() const;
    Json section(const std::string &name) const;
    bool has_section(const std::string &name) const;

    std::int64_t total_prompt_tokens() const;
    std::int64_t total_completion_tokens() const;
    Picodollars total_cost() const;
    std::size_t call_count() const;

    Picodollars recompute_cost() const;
    std::map<CostCategory, Picodollars> cost_by_category() const;
    std::map<Stage, Picodollars> cost_by_stage() const;

    Json to_json() const;
    static RunManifest from_json(const Json &j);
    void save(const std::filesystem::path &path) const;
    static RunManifest load(const std::filesystem::path &path);

  private:
    mutable std::mutex mutex_;
    std::string run_id_;
    Json config_;
    std::vector<CallRecord> calls_;
    std::map<std::string, std::int64_t> corrections_;
    std::vector<Json> events_;
    std::map<std::string, Json> sections_;
    std::int64_t prompt_tokens_ = 0;
    std::int64_t completion_tokens_ = 0;
    Picodollars cost_ = 0;
};

/// Free-function form of RunManifest::record_call.
inline CallRecord record_call(RunManifest &manifest, Stage stage, const std::string &model,
                                     std::int64_t prompt_tokens, std::int64_t completion_tokens, const RateCard &rates,
                                     const std::string &prompt_hash = {}, double latency_ms = 0) {
    return manifest.record_call(stage, model, prompt_hash, prompt_tokens, completion_tokens, latency_ms, rates);
}

} // namespace datagen
