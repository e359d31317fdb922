#include "datagen/scripted_provider.hpp"

#include "datagen/errors.hpp"
#include "datagen/json_extract.hpp"
#include "datagen/metrics.hpp"
#include "datagen/tokenize.hpp"
#include "datagen/util.hpp"

#include <array>
#include <set>

namespace datagen {
namespace {

constexpr std::array<std::string_view, 21> kNumberWords{
    "zero", "one",    "two",    "three",    "four",     "five",    "six",     "seven",     "eight",    "nine",    "ten",
    "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty"};

std::optional<long long> number_word(std::string_view w) {
    for (std::size_t i = 0; i < kNumberWords.size(); ++i) {
        if (w == kNumberWords[i])
            return static_cast<long long>(i);
    }
    return std::nullopt;
}

std::optional<std::string> between(std::string_view s, std::string_view start, std::string_view end) {
    auto a = s.find(start);
    if (a == std::string_view::npos)
        return std::nullopt;
    a += start.size();
    auto b = end.empty() ? std::string_view::npos : s.find(end, a);
    return std::string(s.substr(a, b == std::string_view::npos ? std::string_view::npos : b - a));
}

bool contains(std::string_view s, std::string_view needle) { return s.find(needle) != std::string_view::npos; }

double unit(Rng &rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

template <typename T, std::size_t N> const T &pick(Rng &rng, const std::array<T, N> &options) {
    return options[std::uniform_int_distribution<std::size_t>(0, N - 1)(rng)];
}

int uniform_int(Rng &rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

const std::set<std::string> &stopwords() {
    static const std::set<std::string> words{
        "the",   "and",  "for",  "that", "with", "this", "from", "are",  "was",   "were", "than",  "then",
        "what",  "which", "does", "did", "not",  "but",  "its",  "has",  "have",  "had",  "into",  "onto",
        "about", "more", "most", "less", "over", "such", "their", "there", "these", "they", "them", "those",
        "been",  "being", "also", "only", "other", "some", "any",  "all", "can",   "will", "would", "should",
        "term",  "mean", "means", "originally", "question", "answer", "option", "is", "it", "of", "to", "in"};
    return words;
}

std::set<std::string> content_tokens(std::string_view text) {
    std::set<std::string> out;
    for (auto &t : tokenize(text)) {
        if (t.size() >= 3 && !stopwords().contains(t))
            out.insert(t);
    }
    return out;
}

constexpr std::array<std::string_view, 16> kNames{"Lucy",  "Omar",   "Priya", "Mateo", "Hana", "Kofi",
                                                  "Ingrid", "Wei",   "Amara", "Tomas", "Sofia", "Ravi",
                                                  "Elena", "Jonas",  "Aiko",  "Malik"};
constexpr std::array<std::string_view, 6> kSettings{"summer camp",      "school fair",       "science week",
                                                    "chess club season", "reading challenge", "sports day"};
constexpr std::array<std::string_view, 8> kActivities{"art activities",  "quiz rounds",     "relay races",
                                                      "puzzle games",    "music sessions",  "team challenges",
                                                      "spelling contests", "coding tasks"};
constexpr std::array<std::string_view, 4> kPenalties{"arriving late", "breaking a rule", "missing practice",
                                                     "forgetting equipment"};
constexpr std::array<std::string_view, 5> kGoods{"muffins", "cookies", "bread rolls", "pies", "scones"};
constexpr std::array<std::string_view, 6> kMonths{"March", "April", "May", "June", "July", "August"};

struct Multiplier {
    std::string_view phrase;
    int value;
};

constexpr std::array<Multiplier, 4> kAmountMultipliers{
    {{"double that amount", 2}, {"triple that amount", 3}, {"four times that amount", 4}, {"five times that amount", 5}}};
constexpr std::array<Multiplier, 3> kManyMultipliers{
    {{"twice as many", 2}, {"three times as many", 3}, {"four times as many", 4}}};
constexpr std::array<Multiplier, 2> kNumberMultipliers{{{"double that number", 2}, {"three times that number", 3}}};

constexpr std::array<std::string_view, 10> kFields{"biology",  "chemistry",  "history",  "economics", "geography",
                                                   "physics",  "literature", "astronomy", "music",    "computer science"};
constexpr std::array<std::string_view, 16> kTopics{
    "energy transfer", "trade routes",     "cell division",        "market equilibrium", "plate tectonics",
    "narrative structure", "orbital motion", "chemical bonding",   "population growth",  "harmonic progression",
    "data compression", "climate patterns", "supply shocks",       "genetic drift",      "urban migration",
    "wave interference"};
constexpr std::array<std::string_view, 4> kStems{"Which statement about {t} in {f} is most accurate?",
                                                 "What is the primary role of {t} within {f}?",
                                                 "Which factor most strongly shapes {t} according to {f} research?",
                                                 "Which example best illustrates {t} in {f}?"};
constexpr std::array<std::string_view, 8> kVerbs{"It increases", "It limits",   "It stabilises", "It redistributes",
                                                 "It measures",  "It predicts", "It reverses",   "It accelerates"};
constexpr std::array<std::string_view, 8> kNouns{"rate", "scale", "balance", "direction",
                                                 "cost", "efficiency", "variability", "density"};
constexpr std::array<std::string_view, 4> kContexts{
    "Researchers have debated this point for decades, and several competing accounts exist.",
    "The question below was drafted after reviewing a long series of field reports.",
    "Consider the historical background and the typical textbook framing before answering.",
    "Several of the following statements appear in popular summaries, but only one survives close scrutiny."};
constexpr std::array<std::string_view, 4> kPolish{" Show each step of the reasoning.", " Assume no other changes occur.",
                                                  " Answer with a single value.", " Read every detail carefully."};

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
    return s;
}

std::string key_for(std::size_t index) { return std::string(1, static_cast<char>('A' + index)); }

Json mc_record(Rng &rng, const std::optional<std::string> &attribute, bool with_label) {
    std::string stem(pick(rng, kStems));
    stem = replace_all(stem, "{t}", pick(rng, kTopics));
    stem = replace_all(stem, "{f}", pick(rng, kFields));
    if (attribute && !attribute->empty()) {
        stem[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(stem[0])));
        stem = "Focusing on " + *attribute + ", " + stem;
    }
    std::set<std::string> used;
    Json choices = Json::array();
    while (choices.size() < 4) {
        auto body = std::string(pick(rng, kVerbs)) + " the " + std::string(pick(rng, kNouns)) + " of " +
                    std::string(pick(rng, kTopics)) + ".";
        if (used.insert(body).second)
            choices.push_back({{"key", key_for(choices.size())}, {"body", body}});
    }
    Json rec{{"text", stem}, {"choices", choices}};
    if (with_label)
        rec["label"] = key_for(static_cast<std::size_t>(uniform_int(rng, 0, 3)));
    return rec;
}

std::string capitalised(std::string s) {
    if (!s.empty())
        s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

std::optional<DatasetItem> parse_item(std::string_view payload) {
    auto j = try_extract_json_payload(payload);
    if (!j)
        return std::nullopt;
    if (j->is_array() && !j->empty())
        j = (*j)[0];
    if (!j->is_object())
        return std::nullopt;
    try {
        return item_from_json(*j, 0, "scripted-");
    } catch (const Error &) {
        return std::nullopt;
    }
}

std::string fenced(const Json &j) { return "```json\n" + j.dump(2) + "\n```"; }

std::string normalise_answer(std::string_view s) {
    auto t = to_lower_ascii(trim(s));
    while (!t.empty() && (t.back() == '.' || t.back() == '!'))
        t.pop_back();
    return t;
}

std::optional<double> numeric_value(std::string_view s) {
    auto t = normalise_answer(s);
    if (auto v = parse_number(t))
        return v;
    if (auto w = number_word(t))
        return static_cast<double>(*w);
    return std::nullopt;
}

struct Operands {
    long long base = 0;
    long long factor = 0;
    long long penalty = 0;
};

std::optional<Operands> word_problem_operands(std::string_view text) {
    auto toks = tokenize(text);
    std::vector<long long> numbers;
    std::optional<long long> factor;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        const auto &t = toks[i];
        if (!t.empty() && t.size() < 12 && std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            numbers.push_back(std::stoll(t));
        } else if (!factor && (t == "double" || t == "twice")) {
            factor = 2;
        } else if (!factor && (t == "triple" || t == "thrice")) {
            factor = 3;
        } else if (!factor && i + 1 < toks.size() && toks[i + 1] == "times") {
            if (auto w = number_word(t))
                factor = *w;
        }
    }
    if (numbers.size() != 2 || !factor)
        return std::nullopt;
    return Operands{numbers[0], *factor, numbers[1]};
}

class Responder {
  public:
    Responder(const ScriptedOptions &options, const ChatRequest &request)
        : options_(options), prompt_(request.prompt_text()),
          rng_(derive_seed(options.seed, fnv1a64(request.hash()))) {}

    std::string respond() {
        if (contains(prompt_, "The number of entries to be generated in this dataset is"))
            return generation();
        if (contains(prompt_, "My goal is to enhance the diversity of the dataset"))
            return attributes();
        if (contains(prompt_, "`isgood' field"))
            return reflection();
        if (contains(prompt_, "Based on the following reflection"))
            return enhancement();
        if (contains(prompt_, "translate it into a segment of Python code"))
            return math_code();
        if (contains(prompt_, "semantically equivalent"))
            return compare();
        if (contains(prompt_, "identify key entities"))
            return keywords();
        if (contains(prompt_, "Check MY TEXT based on each keyword"))
            return refine();
        if (contains(prompt_, "Based on human feedback"))
            return feedback();
        if (contains(prompt_, "compare a model-generated answer"))
            return judge();
        if (contains(prompt_, "determine whether the question is related to"))
            return constraint_judge();
        if (contains(prompt_, "Rewrite only the wording of the question"))
            return difficulty(0);
        if (contains(prompt_, "Extend the question in the example"))
            return difficulty(1);
        if (contains(prompt_, "Reword each option of the example"))
            return difficulty(2);
        if (contains(prompt_, "Add one new option to the example"))
            return difficulty(3);
        if (contains(prompt_, "Answer the following") || contains(prompt_, "Solve the following problem"))
            return candidate();
        throw ProviderRefusal("scripted provider does not recognise the prompt");
    }

  private:
    std::string generation() {
        auto count_text = between(prompt_, "The number of entries to be generated in this dataset is ", ".");
        int count = 1;
        if (count_text) {
            if (auto v = parse_number(*count_text))
                count = std::max(1, static_cast<int>(*v));
        }
        auto attribute = between(prompt_, "must relate to the following attribute: ", ".\n");
        bool numeric = contains(prompt_, "<numeric answer>");
        bool mc = contains(prompt_, "\"choices\"");
        bool mc_labeled = contains(prompt_, "<key of the correct option>");
        bool boolean = contains(prompt_, "<true or false>");
        bool free_text = contains(prompt_, "\"<answer>\"");

        Json out = Json::array();
        for (int i = 0; i < count; ++i) {
            Json rec;
            if (numeric) {
                auto p = make_word_problem(rng_());
                long long label = p.answer;
                if (unit(rng_) < options_.label_error_rate) {
                    int delta = uniform_int(rng_, 1, 12);
                    label += unit(rng_) < 0.5 ? delta : -delta;
                }
                rec = {{"text", p.text}, {"label", std::to_string(label)}};
            } else if (mc) {
                rec = mc_record(rng_, attribute, mc_labeled);
            } else if (boolean) {
                auto text = "True or false: " + capitalised(std::string(pick(rng_, kTopics))) +
                            " is studied mainly within " + std::string(pick(rng_, kFields)) + ".";
                rec = {{"text", text}, {"label", unit(rng_) < 0.5 ? "true" : "false"}};
            } else if (free_text) {
                auto text = "Explain briefly how " + std::string(pick(rng_, kTopics)) + " relates to " +
                            std::string(pick(rng_, kFields)) + ".";
                auto answer = std::string(pick(rng_, kVerbs)) + " the " + std::string(pick(rng_, kNouns)) +
                              " of the system.";
                rec = {{"text", text}, {"label", answer}};
            } else {
                rec = {{"text", "Describe " + std::string(pick(rng_, kTopics)) + " in " +
                                    std::string(pick(rng_, kFields)) + "."}};
            }
            if (rec.contains("label") && unit(rng_) < options_.invalid_record_rate)
                rec.erase("label");
            out.push_back(std::move(rec));
        }
        return "Here is the generated data.\n" + fenced(out);
    }

    std::string attributes() {
        auto examples = between(prompt_, "Examples: ", "\nExtract the characteristic");
        Json out = Json::array();
        if (examples) {
            auto j = Json::parse(*examples, nullptr, false);
            if (j.is_array()) {
                for (const auto &e : j) {
                    std::string text = e.is_object() ? e.value("text", std::string()) : e.dump();
                    auto toks = content_tokens(text);
                    std::vector<std::string> sorted(toks.begin(), toks.end());
                    std::stable_sort(sorted.begin(), sorted.end(),
                                     [](const auto &a, const auto &b) { return a.size() > b.size(); });
                    if (sorted.size() > 2)
                        sorted.resize(2);
                    out.push_back({{"category", sorted}});
                }
            }
        }
        return fenced(out);
    }

    std::string reflection() {
        bool good = unit(rng_) >= options_.reject_rate;
        Json j{{"reflection", good ? "The example is clear, relevant and sufficiently challenging."
                                   : "The example is too easy and its wording could be more precise."},
               {"isgood", good ? "yes" : "no"}};
        return fenced(j);
    }

    std::string enhancement() {
        auto original = between(prompt_, "Original Example: ", "\n\nGenerate improved examples");
        auto item = original ? parse_item(*original) : std::nullopt;
        if (!item)
            return "I could not read the original example.";
        std::vector<std::string_view> unused;
        for (auto polish : kPolish) {
            if (item->text.find(polish) == std::string::npos)
                unused.push_back(polish);
        }
        if (!unused.empty())
            item->text += std::string(unused[static_cast<std::size_t>(uniform_int(rng_, 0, static_cast<int>(unused.size()) - 1))]);
        return fenced(Json::parse(item_prompt_json(*item)));
    }

    std::string math_code() {
        auto expression = between(prompt_, "The input sample is:\n", "");
        std::string text = expression ? *expression : std::string();
        auto ops = word_problem_operands(text);
        if (!ops)
            return fenced(Json{{"Analysis", "The text does not describe a calculation."}});
        std::string code = "base = " + std::to_string(ops->base) + "\nfactor = " + std::to_string(ops->factor) +
                           "\npenalty = " + std::to_string(ops->penalty) + "\nprint(base + base * factor - penalty)";
        return fenced(Json{{"Code", code},
                           {"Analysis", "Take the first amount, add the multiplied amount and subtract the loss."}});
    }

    std::string compare() {
        auto tail = between(prompt_, "Here are two responses: `", "");
        if (!tail)
            return "False";
        auto sep = tail->find("', `");
        if (sep == std::string::npos)
            return "False";
        auto a = tail->substr(0, sep);
        auto rest = tail->substr(sep + 4);
        auto end = rest.rfind("'.");
        auto b = end == std::string::npos ? rest : rest.substr(0, end);
        return scripted_answers_equal(a, b) ? "True" : "False";
    }

    std::string keywords() {
        auto text = between(prompt_, "My text: ", "\nDirectly output the list");
        std::vector<std::string> entities;
        if (text) {
            auto body = *text;
            if (auto j = try_extract_json_payload(body); j && j->is_object() && j->contains("text"))
                body = (*j)["text"].get<std::string>();
            for (std::size_t pos = body.find('\''); pos != std::string::npos && entities.size() < 3;) {
                auto close = body.find('\'', pos + 1);
                if (close == std::string::npos)
                    break;
                auto phrase = trim(body.substr(pos + 1, close - pos - 1));
                if (phrase.find(' ') != std::string::npos)
                    entities.push_back(capitalised(phrase));
                pos = body.find('\'', close + 1);
            }
            for (auto &e : heuristic_entities(body)) {
                if (entities.size() >= 3)
                    break;
                if (std::find(entities.begin(), entities.end(), e) == entities.end())
                    entities.push_back(e);
            }
        }
        return fenced(Json{{"entities", entities}});
    }

    std::string refine() {
        auto entry = between(prompt_, "MY Data Entry: ", "\nWIKI DATA: ");
        auto wiki = between(prompt_, "\nWIKI DATA: ", "\nCheck my input text");
        auto item = entry ? parse_item(*entry) : std::nullopt;
        const char *good_json = R"({
"thinking_progress": "The entry agrees with the reference text.",
"is_original_example_good": "Ture",
"refined_text": "NONE"
})";
        if (!item || !wiki || !item->has_choices() || !item->label)
            return good_json;
        auto evidence = content_tokens(*wiki);
        auto score = [&](const Choice &c) {
            auto toks = content_tokens(c.body);
            if (toks.empty())
                return 0.0;
            std::size_t hit = 0;
            for (const auto &t : toks)
                hit += evidence.contains(t) ? 1 : 0;
            return static_cast<double>(hit) / static_cast<double>(toks.size());
        };
        const Choice *best = nullptr;
        double best_score = -1;
        for (const auto &c : *item->choices) {
            double s = score(c);
            if (s > best_score) {
                best_score = s;
                best = &c;
            }
        }
        const Choice *current = item->find_choice(*item->label);
        if (!best || !current || best->key == current->key || score(*current) >= best_score)
            return good_json;
        auto refined = *item;
        refined.label = best->key;
        Json j{{"thinking_progress", "The reference text supports option " + best->key + " rather than option " +
                                         current->key + "."},
               {"is_original_example_good", "False"},
               {"refined_text", Json::parse(item_prompt_json(refined))}};
        return j.dump(1);
    }

    std::string feedback() {
        auto note = between(prompt_, "HUMAN_FEEDBACK: ", "\nEXAMPLE: ");
        auto example = between(prompt_, "\nEXAMPLE: ", "\nGenerate an improved example");
        auto item = example ? parse_item(*example) : std::nullopt;
        if (!item)
            return "The example could not be read.";
        if (note && !trim(*note).empty())
            item->text += " (Revised: " + trim(*note) + ")";
        return Json{{"improved_example", Json::parse(item_prompt_json(*item))}}.dump();
    }

    std::string judge() {
        auto solution = between(prompt_, "- Model generated answer: ", "\n- Groundtruth answer: ");
        auto truth = between(prompt_, "\n- Groundtruth answer: ", "\nResponse Format:");
        std::string a = solution ? trim(*solution) : "";
        std::string b = truth ? trim(*truth) : "";
        bool same = scripted_answers_equal(a, b);
        if (!same && !a.empty() && !b.empty() && a.size() > b.size())
            same = iequals_ascii(a.substr(0, b.size()), b) && !std::isalnum(static_cast<unsigned char>(a[b.size()]));
        Json j{{"Model Final Answer", a}, {"Groundtruth Answer", b}, {"is_same", same}};
        return j.dump(2);
    }

    std::string constraint_judge() {
        auto constraint = between(prompt_, "determine whether the question is related to ",
                                  ". Here is the question to evaluate: ");
        auto text = between(prompt_, "Here is the question to evaluate: ", "\nOnly reply YES or NO.");
        if (!constraint || !text)
            return "NO";
        auto topic = content_tokens(*constraint);
        auto words = content_tokens(*text);
        for (const auto &t : topic) {
            auto stem = t.substr(0, std::min<std::size_t>(t.size(), 5));
            for (const auto &w : words) {
                if (w.rfind(stem, 0) == 0)
                    return "YES";
            }
        }
        return "NO";
    }

    std::string difficulty(int policy) {
        auto example = between(prompt_, "EXAMPLE: ", "\nReturn only the rewritten example");
        auto item = example ? parse_item(*example) : std::nullopt;
        if (!item)
            return "The example could not be read.";
        bool fault = unit(rng_) < options_.difficulty_fault_rate;
        auto out = *item;
        switch (policy) {
        case 0:
            out.text = "Examine the following with care: " + out.text;
            if (fault)
                fault_label_or_shape(out);
            break;
        case 1:
            out.text = std::string(pick(rng_, kContexts)) + " " + out.text;
            if (fault)
                fault_label_or_shape(out);
            break;
        case 2:
            if (out.choices) {
                for (auto &c : *out.choices) {
                    if (!numeric_value(c.body))
                        c.body = "In other words, " + lower_first(c.body);
                }
            }
            if (fault)
                fault_label_or_shape(out);
            break;
        default:
            add_choice(out, fault);
            break;
        }
        return fenced(Json::parse(item_prompt_json(out)));
    }

    static std::string lower_first(std::string s) {
        if (s.size() > 1 && std::isupper(static_cast<unsigned char>(s[0])) &&
            !std::isupper(static_cast<unsigned char>(s[1])))
            s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
        return s;
    }

    void fault_label_or_shape(DatasetItem &out) {
        if (out.choices && out.choices->size() > 1 && unit(rng_) < 0.5) {
            out.choices->pop_back();
            if (out.label && !out.find_choice(*out.label))
                out.label = out.choices->front().key;
            return;
        }
        if (out.choices && out.label) {
            for (const auto &c : *out.choices) {
                if (c.key != *out.label) {
                    out.label = c.key;
                    return;
                }
            }
        }
        out.label = out.label.value_or("") + "0";
    }

    void add_choice(DatasetItem &out, bool fault) {
        if (!out.choices)
            return;
        std::string correct = out.label && out.find_choice(*out.label) ? out.find_choice(*out.label)->body : "";
        std::vector<std::string> bodies;
        for (const auto &c : *out.choices)
            bodies.push_back(c.body);
        std::string extra = "None of the listed effects applies to the system.";
        for (int k = 2; std::find(bodies.begin(), bodies.end(), extra) != bodies.end(); ++k)
            extra = "None of the listed effects applies to the system (variant " + std::to_string(k) + ").";
        auto pos = static_cast<std::size_t>(uniform_int(rng_, 0, static_cast<int>(bodies.size())));
        bodies.insert(bodies.begin() + static_cast<std::ptrdiff_t>(pos), extra);
        int fault_kind = fault ? uniform_int(rng_, 0, 2) : -1;
        if (fault_kind == 0) {
            for (auto &b : bodies) {
                if (b == correct) {
                    b += " (probably)";
                    break;
                }
            }
        } else if (fault_kind == 1) {
            bodies.push_back("A second invented option that should not be here.");
        }
        out.choices->clear();
        for (std::size_t i = 0; i < bodies.size(); ++i)
            out.choices->push_back({key_for(i), bodies[i]});
        if (fault_kind == 2) {
            out.label = key_for(pos);
        } else {
            for (const auto &c : *out.choices) {
                if (c.body == correct)
                    out.label = c.key;
            }
        }
    }

    std::string candidate() {
        auto question = between(prompt_, "\n\n", "");
        std::string q = question ? *question : prompt_;
        bool wrong = unit(rng_) < options_.candidate_error_rate;
        if (contains(prompt_, "Solve the following problem")) {
            auto v = solve_word_problem(q);
            if (!v)
                return "0";
            return std::to_string(*v + (wrong ? 1 : 0));
        }
        if (contains(prompt_, "multiple-choice")) {
            std::vector<std::string> keys;
            for (const auto &line : split_lines(q)) {
                if (line.size() > 2 && line[1] == '.' && std::isupper(static_cast<unsigned char>(line[0])))
                    keys.push_back(line.substr(0, 1));
            }
            if (keys.empty())
                return "A";
            return keys[static_cast<std::size_t>(uniform_int(rng_, 0, static_cast<int>(keys.size()) - 1))];
        }
        if (contains(prompt_, "true or false"))
            return wrong ? "false" : "true";
        return "I am not certain.";
    }

    const ScriptedOptions &options_;
    std::string prompt_;
    Rng rng_;
};

} // namespace

ChatResponse ScriptedProvider::complete(const ChatRequest &request) {
    ++calls_;
    Responder responder(options_, request);
    ChatResponse r;
    r.text = responder.respond();
    r.usage.prompt_tokens = estimate_tokens(request.prompt_text());
    r.usage.completion_tokens = estimate_tokens(r.text);
    return r;
}

WordProblem make_word_problem(std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x5eed));
    auto name = std::string(pick(rng, kNames));
    long long a = uniform_int(rng, 10, 60);
    WordProblem p;
    Multiplier m{};
    long long c = 0;
    switch (uniform_int(rng, 0, 2)) {
    case 0: {
        m = pick(rng, kAmountMultipliers);
        c = uniform_int(rng, 1, static_cast<int>(a) - 1);
        auto act1 = pick(rng, kActivities);
        auto act2 = act1;
        while (act2 == act1)
            act2 = pick(rng, kActivities);
        p.text = "During the " + std::string(pick(rng, kSettings)) + ", " + name + " earns " + std::to_string(a) +
                 " points from " + std::string(act1) + ", " + std::string(m.phrase) + " from " + std::string(act2) +
                 ", and loses " + std::to_string(c) + " points for " + std::string(pick(rng, kPenalties)) +
                 ". How many points does " + name + " have at the end?";
        break;
    }
    case 1: {
        m = pick(rng, kManyMultipliers);
        c = uniform_int(rng, 1, static_cast<int>(a) - 1);
        auto goods = std::string(pick(rng, kGoods));
        p.text = name + " bakes " + std::to_string(a) + " " + goods + " on Monday and " + std::string(m.phrase) +
                 " on Tuesday, then gives " + std::to_string(c) + " of them to the neighbours. How many " + goods +
                 " does " + name + " have left?";
        break;
    }
    default: {
        m = pick(rng, kNumberMultipliers);
        c = uniform_int(rng, 1, static_cast<int>(a) - 1);
        auto m1 = pick(rng, kMonths);
        auto m2 = m1;
        while (m2 == m1)
            m2 = pick(rng, kMonths);
        p.text = "A library run by " + name + " receives " + std::to_string(a) + " new books in " + std::string(m1) +
                 ", " + std::string(m.phrase) + " in " + std::string(m2) + ", and sends " + std::to_string(c) +
                 " of them away for repair. How many of the new books remain on the shelves?";
        break;
    }
    }
    p.answer = a + a * m.value - c;
    return p;
}

std::optional<long long> solve_word_problem(std::string_view text) {
    auto ops = word_problem_operands(text);
    if (!ops)
        return std::nullopt;
    return ops->base + ops->base * ops->factor - ops->penalty;
}

bool scripted_answers_equal(std::string_view a, std::string_view b) {
    auto x = numeric_value(a);
    auto y = numeric_value(b);
    if (x && y)
        return *x == *y;
    return normalise_answer(a) == normalise_answer(b);
}

} // namespace datagen
