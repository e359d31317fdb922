#include "datagen/context.hpp"

#include "datagen/util.hpp"

namespace datagen {

ChatRequest StageContext::request(std::string user, std::uint64_t stream, std::optional<std::string> system) const {
    ChatRequest r;
    r.model = model;
    r.temperature = temperature;
    r.top_p = top_p;
    r.max_tokens = max_tokens;
    r.seed = derive_seed(seed, stream);
    if (system)
        r.messages.push_back({"system", std::move(*system)});
    r.messages.push_back({"user", std::move(user)});
    return r;
}

std::string StageContext::ask(std::string user, Stage stage, RunManifest &log, std::uint64_t stream) const {
    return gateway.chat(request(std::move(user), stream), stage, log).text;
}

StageContext make_stage_context(Gateway &gateway, const TemplateLibrary &templates, const GenerationConfig &config) {
    return StageContext{gateway,           templates,         config.model,      config.temperature,
                        config.top_p,      config.max_tokens, config.max_worker, config.seed};
}

} // namespace datagen
