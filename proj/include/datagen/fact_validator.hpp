#pragma once

#include "datagen/context.hpp"
#include "datagen/core.hpp"

#include <chrono>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace datagen {

struct EntityKeywords {
    std::vector<std::string> entities;
};

/// Parses {"entities": [...]} and keeps at most three nonempty strings.
std::optional<EntityKeywords> parse_entities(std::string_view completion);

/// Empty on format error (logged).
EntityKeywords extract_entities(const StageContext &ctx, const DatasetItem &item, RunManifest &log);

struct Passage {
    std::string title;
    std::string text;
    std::string source;
};

class Retriever {
  public:
    virtual ~Retriever() = default;
    /// nullopt on a miss.
    virtual std::optional<Passage> lookup(const std::string &entity) = 0;
};

/// Lowercase, every run of non-alphanumeric bytes becomes one underscore, no leading or
/// trailing underscores. "Blood is thicker than water" -> "blood_is_thicker_than_water".
std::string corpus_slug(std::string_view title);

/// One UTF-8 text file per title: <dir>/<slug>.txt.
class LocalCorpusRetriever : public Retriever {
  public:
    explicit LocalCorpusRetriever(std::filesystem::path dir) : dir_(std::move(dir)) {}
    std::optional<Passage> lookup(const std::string &entity) override;

  private:
    std::filesystem::path dir_;
};

/// Wikipedia REST summary endpoint (<base>/api/rest_v1/page/summary/<Title>), rate limited.
/// Transport failures are retried, then treated as a miss.
class WikipediaRetriever : public Retriever {
  public:
    explicit WikipediaRetriever(std::string base_url, double requests_per_second = 2.0, int max_retries = 3);
    std::optional<Passage> lookup(const std::string &entity) override;

  private:
    void wait_turn();

    std::string base_url_;
    std::chrono::nanoseconds interval_;
    int max_retries_;
    std::mutex mutex_;
    std::chrono::steady_clock::time_point next_slot_{};
};

struct EvidenceEntry {
    std::string entity;
    bool hit = false;
    Passage passage;
};

struct RetrievedEvidence {
    std::vector<EvidenceEntry> entries;

    std::size_t hits() const;
    /// Text bound to {wiki_data}: one "[title]\ntext" block per hit.
    std::string render() const;
};

/// One lookup per entity; passages are cut to `budget` characters (code points).
RetrievedEvidence retrieve(const EntityKeywords &keywords, Retriever &retriever, std::size_t budget = 4000);

struct RefinementVerdict {
    std::string thinking_progress;
    bool is_original_example_good = true;
    std::optional<Json> refined_text;
};

/// Accepts True/Ture/true (and False/false) in the verdict field.
std::optional<RefinementVerdict> parse_refinement(std::string_view completion);

enum class FactStatus { fact_checked, corrected, unverifiable, skipped, format_error, rejected };

std::string_view to_string(FactStatus status);

struct FactOutcome {
    DatasetItem item;
    FactStatus status = FactStatus::skipped;
    std::optional<RefinementVerdict> verdict;
};

/// Requires at least one evidence hit (otherwise the item is returned unverifiable).
FactOutcome validate_and_refine(const StageContext &ctx, const DatasetItem &item, const RetrievedEvidence &evidence,
                                RunManifest &log);

struct FactReport {
    std::vector<DatasetItem> items;
    std::map<std::string, std::size_t> counts;
    std::vector<std::string> corrected_ids;
    double corrected_fraction = 0;

    Json to_json() const;
};

FactReport validate_facts(const StageContext &ctx, std::span<const DatasetItem> items, Retriever &retriever,
                          std::size_t evidence_chars, RunManifest &log);

} // namespace datagen
