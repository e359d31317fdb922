#pragma once

#include "datagen/core.hpp"
#include "datagen/gateway.hpp"

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>

namespace datagen {

/// Knobs of the offline provider. Rates are probabilities per response.
struct ScriptedOptions {
    /// Generated arithmetic problems whose label is deliberately wrong.
    double label_error_rate = 0.2;
    /// Self-reflection verdicts that come back "no".
    double reject_rate = 0.3;
    /// Generated records that come back without a label.
    double invalid_record_rate = 0.0;
    /// Difficulty rewrites that break the policy's guard on purpose.
    double difficulty_fault_rate = 0.0;
    /// Candidate answers that are wrong on purpose (bench).
    double candidate_error_rate = 0.0;
    std::uint64_t seed = 0;
};

/// Offline stand-in for a chat model. Recognises which template a prompt was rendered from
/// and answers with a plausible, deterministic payload derived from the request hash, so a
/// whole pipeline run is reproducible without network access.
class ScriptedProvider : public ChatProvider {
  public:
    explicit ScriptedProvider(ScriptedOptions options = {}) : options_(options) {}

    ChatResponse complete(const ChatRequest &request) override;

    std::int64_t calls() const { return calls_.load(); }

  private:
    ScriptedOptions options_;
    std::atomic<std::int64_t> calls_{0};
};

/// Two-step points problem: a + a*m - c, with m written as a word ("double", "three times").
struct WordProblem {
    std::string text;
    long long answer = 0;
};

WordProblem make_word_problem(std::uint64_t seed);

/// Solves texts shaped like make_word_problem output (and the summer-camp example);
/// nullopt when the text does not fit the pattern.
std::optional<long long> solve_word_problem(std::string_view text);

/// Replies "True"/"False" the way the compare prompt asks, understanding number words.
bool scripted_answers_equal(std::string_view a, std::string_view b);

} // namespace datagen
