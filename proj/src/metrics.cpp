#include "datagen/metrics.hpp"

#include "datagen/errors.hpp"
#include "datagen/tokenize.hpp"
#include "datagen/util.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace datagen {
namespace {

using NgramCounts = std::unordered_map<std::string, int>;

NgramCounts ngram_counts(std::span<const std::string> tokens, int n) {
    NgramCounts counts;
    if (static_cast<int>(tokens.size()) < n)
        return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key;
        for (int k = 0; k < n; ++k) {
            key += tokens[i + k];
            key.push_back('\x1f');
        }
        ++counts[key];
    }
    return counts;
}

std::vector<std::vector<std::string>> tokenize_items(std::span<const DatasetItem> items) {
    std::vector<std::vector<std::string>> out;
    out.reserve(items.size());
    for (const auto &item : items)
        out.push_back(tokenize(item.text));
    return out;
}

void require_pairs(std::size_t n, const char *what) {
    if (n < 2)
        throw Error(std::string(what) + " needs at least two items");
}

std::string lower_utf8(std::string_view s) {
    auto cps = decode_utf8(s);
    std::u32string out;
    for (auto cp : cps)
        out.push_back(simple_lower(cp));
    return encode_utf8(out);
}

std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

} // namespace

double sentence_bleu(std::span<const std::string> hypothesis, std::span<const std::vector<std::string>> references,
                     int max_n) {
    if (hypothesis.empty())
        return 0.0;
    if (references.empty())
        throw Error("BLEU needs at least one reference");
    int orders = std::min<int>(max_n, static_cast<int>(hypothesis.size()));
    double log_sum = 0;
    for (int n = 1; n <= orders; ++n) {
        auto hyp = ngram_counts(hypothesis, n);
        NgramCounts max_ref;
        for (const auto &ref : references) {
            for (const auto &[g, c] : ngram_counts(ref, n)) {
                auto &m = max_ref[g];
                m = std::max(m, c);
            }
        }
        long matched = 0, total = 0;
        for (const auto &[g, c] : hyp) {
            total += c;
            if (auto it = max_ref.find(g); it != max_ref.end())
                matched += std::min(c, it->second);
        }
        double p = matched > 0 ? static_cast<double>(matched) / static_cast<double>(total)
                               : 1.0 / static_cast<double>(total + 1);
        log_sum += std::log(p) / orders;
    }
    auto c = static_cast<long>(hypothesis.size());
    long best_r = static_cast<long>(references[0].size());
    for (const auto &ref : references) {
        auto r = static_cast<long>(ref.size());
        auto d = std::labs(r - c), bd = std::labs(best_r - c);
        if (d < bd || (d == bd && r < best_r))
            best_r = r;
    }
    double bp = c > best_r ? 1.0 : std::exp(1.0 - static_cast<double>(best_r) / static_cast<double>(c));
    return bp * std::exp(log_sum);
}

SelfBleuReport self_bleu(std::span<const std::vector<std::string>> token_lists, int max_n) {
    require_pairs(token_lists.size(), "self-BLEU");
    SelfBleuReport report;
    report.scores.reserve(token_lists.size());
    std::vector<std::vector<std::string>> refs;
    for (std::size_t i = 0; i < token_lists.size(); ++i) {
        refs.clear();
        for (std::size_t j = 0; j < token_lists.size(); ++j) {
            if (j != i)
                refs.push_back(token_lists[j]);
        }
        report.scores.push_back(sentence_bleu(token_lists[i], refs, max_n));
    }
    double sum = 0;
    for (double s : report.scores)
        sum += s;
    report.mean = sum / static_cast<double>(report.scores.size());
    return report;
}

SelfBleuReport self_bleu(std::span<const DatasetItem> items, int max_n) {
    auto toks = tokenize_items(items);
    return self_bleu(std::span<const std::vector<std::string>>(toks), max_n);
}

double aps(const EmbeddingMatrix &m) {
    require_pairs(m.rows(), "APS");
    double sum = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = i + 1; j < m.rows(); ++j) {
            sum += cosine_similarity(m.row(i), m.row(j));
            ++pairs;
        }
    }
    return sum / static_cast<double>(pairs);
}

double remote_clique(const EmbeddingMatrix &m) {
    require_pairs(m.rows(), "remote-clique");
    double sum = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = i + 1; j < m.rows(); ++j) {
            sum += 1.0 - cosine_similarity(m.row(i), m.row(j));
            ++pairs;
        }
    }
    return sum / static_cast<double>(pairs);
}

double ingf(std::span<const std::vector<std::string>> token_lists, int n_min, int n_max) {
    require_pairs(token_lists.size(), "INGF");
    // ngram -> number of items containing it
    std::unordered_map<std::string, int> doc_freq;
    std::vector<std::unordered_set<std::string>> per_item(token_lists.size());
    for (std::size_t i = 0; i < token_lists.size(); ++i) {
        for (int n = n_min; n <= n_max; ++n) {
            for (auto &[g, c] : ngram_counts(token_lists[i], n))
                per_item[i].insert(std::to_string(n) + ":" + g);
        }
        for (const auto &g : per_item[i])
            ++doc_freq[g];
    }
    double total = 0;
    for (const auto &grams : per_item) {
        for (const auto &g : grams)
            total += doc_freq[g] > 1 ? 1 : 0;
    }
    return total / static_cast<double>(token_lists.size());
}

double ingf(std::span<const DatasetItem> items, int n_min, int n_max) {
    auto toks = tokenize_items(items);
    return ingf(std::span<const std::vector<std::string>>(toks), n_min, n_max);
}

std::vector<std::string> heuristic_entities(std::string_view text) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    std::vector<std::string> run;
    bool run_at_sentence_start = false;
    bool sentence_start = true;

    auto flush = [&] {
        if (run.empty())
            return;
        bool lone_opener = run.size() == 1 && run_at_sentence_start;
        bool all_single = std::all_of(run.begin(), run.end(), [](const auto &w) { return decode_utf8(w).size() < 2; });
        if (!lone_opener && !all_single) {
            std::string phrase;
            for (const auto &w : run)
                phrase += (phrase.empty() ? "" : " ") + w;
            if (seen.insert(phrase).second)
                out.push_back(phrase);
        }
        run.clear();
    };

    std::u32string word;
    auto cps = decode_utf8(text);
    cps.push_back(U' ');
    for (char32_t cp : cps) {
        if (!is_unicode_space(cp)) {
            word.push_back(cp);
            continue;
        }
        if (word.empty())
            continue;
        std::size_t a = 0, b = word.size();
        while (a < b && is_punctuation(word[a]))
            ++a;
        while (b > a && is_punctuation(word[b - 1]))
            --b;
        char32_t last = word.back();
        std::size_t k = word.size();
        while (k > 0 && (word[k - 1] == U'"' || word[k - 1] == U'\'' || word[k - 1] == U')' || word[k - 1] == U'”'))
            --k;
        char32_t terminal = k > 0 ? word[k - 1] : last;
        bool ends_sentence = terminal == U'.' || terminal == U'!' || terminal == U'?';
        bool ends_clause = ends_sentence || terminal == U',' || terminal == U';' || terminal == U':' || last == U')';

        std::u32string core = word.substr(a, b - a);
        bool capitalised = !core.empty() && simple_lower(core[0]) != core[0];
        if (capitalised) {
            if (run.empty())
                run_at_sentence_start = sentence_start;
            run.push_back(encode_utf8(core));
        } else {
            flush();
        }
        if (ends_clause)
            flush();
        sentence_start = ends_sentence;
        word.clear();
    }
    flush();
    return out;
}

Json OverlapReport::to_json() const {
    return Json{{"original_entities", original_entities},
                {"generated_entities", generated_entities},
                {"shared", shared},
                {"rate", rate},
                {"empty_generated", empty_generated}};
}

OverlapReport entity_overlap(std::span<const DatasetItem> original, std::span<const DatasetItem> generated,
                             const EntityExtractor &extract) {
    auto collect = [&](std::span<const DatasetItem> items) {
        std::set<std::string> out;
        for (const auto &item : items) {
            auto entities = extract ? extract(item) : heuristic_entities(item.text);
            for (const auto &e : entities)
                out.insert(lower_utf8(e));
        }
        return out;
    };
    auto orig = collect(original);
    auto gen = collect(generated);
    OverlapReport r;
    r.original_entities = orig.size();
    r.generated_entities = gen.size();
    for (const auto &e : gen)
        r.shared += orig.contains(e) ? 1 : 0;
    r.empty_generated = gen.empty();
    r.rate = gen.empty() ? 0.0 : static_cast<double>(r.shared) / static_cast<double>(gen.size());
    return r;
}

Json LengthHistogram::to_json() const {
    Json b = Json::object();
    for (const auto &[start, count] : bins)
        b[std::to_string(start) + "-" + std::to_string(start + bin_width - 1)] = count;
    return Json{{"bin_width", bin_width}, {"bins", b}, {"mean_words", mean}};
}

LengthHistogram length_histogram(std::span<const DatasetItem> items, int bin_width) {
    if (bin_width <= 0)
        throw Error("histogram bin width must be positive");
    LengthHistogram h;
    h.bin_width = bin_width;
    double sum = 0;
    for (const auto &item : items) {
        auto words = static_cast<int>(tokenize(item.text).size());
        ++h.bins[(words / bin_width) * bin_width];
        sum += words;
    }
    h.mean = items.empty() ? 0.0 : sum / static_cast<double>(items.size());
    return h;
}

Json DiversityReport::to_json() const {
    return Json{{"item_count", item_count},
                {"remote_clique", remote_clique},
                {"aps", aps},
                {"ingf", ingf},
                {"self_bleu", {{"mean", self_bleu.mean}, {"scores", self_bleu.scores}}},
                {"length_histogram", lengths.to_json()}};
}

DiversityReport diversity_report(std::span<const DatasetItem> items, const EmbeddingMatrix &embeddings) {
    if (embeddings.rows() != items.size())
        throw Error("embedding rows do not match the item count");
    DiversityReport r;
    r.item_count = items.size();
    r.remote_clique = remote_clique(embeddings);
    r.aps = aps(embeddings);
    auto toks = tokenize_items(items);
    std::span<const std::vector<std::string>> view(toks);
    r.ingf = ingf(view);
    r.self_bleu = self_bleu(view);
    r.lengths = length_histogram(items);
    return r;
}

std::string comparison_table(const DiversityReport &original, const DiversityReport &generated,
                             const std::optional<OverlapReport> &overlap) {
    std::string t = "| Metric | Original | Generated |\n|---|---|---|\n";
    auto row = [&](const std::string &name, const std::string &a, const std::string &b) {
        t += "| " + name + " | " + a + " | " + b + " |\n";
    };
    row("Items", std::to_string(original.item_count), std::to_string(generated.item_count));
    row("Remote-Clique", fixed(original.remote_clique), fixed(generated.remote_clique));
    row("APS", fixed(original.aps), fixed(generated.aps));
    row("INGF", fixed(original.ingf, 2), fixed(generated.ingf, 2));
    row("Self-BLEU (mean)", fixed(original.self_bleu.mean), fixed(generated.self_bleu.mean));
    row("Mean length (words)", fixed(original.lengths.mean, 1), fixed(generated.lengths.mean, 1));
    if (overlap)
        row("Entity overlap", "-", fixed(overlap->rate * 100.0, 2) + "%");
    return t;
}

} // namespace datagen
