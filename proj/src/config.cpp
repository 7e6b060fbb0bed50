#include "annocheck/config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "annocheck/errors.hpp"
#include "annocheck/hash.hpp"

namespace annocheck {

using json = nlohmann::json;

namespace {

CategorySet categories_from_json(const json& list) {
    std::vector<CategoryDef> defs;
    for (const json& item : list) {
        CategoryDef def;
        def.key = item.at("key").get<std::string>();
        def.name = item.at("name").get<std::string>();
        def.description = item.value("description", "");
        defs.push_back(std::move(def));
    }
    return CategorySet(std::move(defs));
}

std::vector<std::string> string_list(const json& list) {
    std::vector<std::string> out;
    for (const json& item : list) out.push_back(item.get<std::string>());
    return out;
}

}  // namespace

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("invalid config JSON: " + std::string(e.what()));
    }

    RunConfig cfg;
    try {
        if (!j.contains("corpus")) throw ConfigError("config is missing \"corpus\"");
        cfg.corpus_path = j.at("corpus").get<std::string>();

        if (j.contains("categories")) cfg.categories = categories_from_json(j.at("categories"));

        if (!j.contains("backend") || !j.at("backend").is_object()) {
            throw ConfigError("config needs a \"backend\" object");
        }
        const json& backend = j.at("backend");
        const std::string kind = backend.value("kind", "");
        if (kind == "remote") {
            cfg.backend.kind = BackendKind::Remote;
            cfg.backend.remote.base_url = backend.at("base_url").get<std::string>();
            cfg.backend.model_id = backend.at("model_id").get<std::string>();
            cfg.backend.remote.api_key_env = backend.value("api_key_env", "");
            cfg.backend.remote.completions_path =
                backend.value("completions_path", cfg.backend.remote.completions_path);
            cfg.backend.remote.max_attempts =
                backend.value("max_attempts", cfg.backend.remote.max_attempts);
            cfg.backend.remote.timeout_s = backend.value("timeout_s", cfg.backend.remote.timeout_s);
        } else if (kind == "synthetic") {
            cfg.backend.kind = BackendKind::Synthetic;
            cfg.backend.synthetic_params = backend.at("params").get<std::string>();
            cfg.backend.model_id = backend.value("model_id", cfg.backend.model_id);
        } else {
            throw ConfigError("backend.kind must be \"remote\" or \"synthetic\", got \"" + kind +
                              "\"");
        }

        if (j.contains("sampling")) {
            const json& s = j.at("sampling");
            cfg.sampling.temperature = s.value("temperature", cfg.sampling.temperature);
            cfg.sampling.top_p = s.value("top_p", cfg.sampling.top_p);
            cfg.sampling.max_tokens = s.value("max_tokens", cfg.sampling.max_tokens);
            cfg.sampling.top_logprobs = s.value("top_logprobs", cfg.sampling.top_logprobs);
        }

        cfg.seed = j.value("seed", cfg.seed);
        cfg.concurrency = j.value("concurrency", cfg.concurrency);

        if (j.contains("thresholds")) {
            const json& t = j.at("thresholds");
            cfg.thresholds.very_low = t.value("very_low", cfg.thresholds.very_low);
            cfg.thresholds.low = t.value("low", cfg.thresholds.low);
            cfg.thresholds.moderate = t.value("moderate", cfg.thresholds.moderate);
        }

        if (j.contains("regression")) {
            const json& r = j.at("regression");
            cfg.regression.focal_key = r.value("focal", cfg.regression.focal_key);
            cfg.regression.baseline_key = r.value("baseline", cfg.regression.baseline_key);
            cfg.regression.team_size_dummies =
                r.value("team_size_dummies", cfg.regression.team_size_dummies);
            cfg.regression.ols.condition_limit =
                r.value("condition_limit", cfg.regression.ols.condition_limit);
        }

        if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("template")) cfg.template_path = j.at("template").get<std::string>();
        if (j.contains("cache")) cfg.cache_path = j.at("cache").get<std::string>();

        if (j.contains("aliases")) {
            const json& a = j.at("aliases");
            if (a.contains("yes")) cfg.aliases.yes = string_list(a.at("yes"));
            if (a.contains("no")) cfg.aliases.no = string_list(a.at("no"));
            if (a.contains("letter_patterns")) {
                cfg.aliases.letter_patterns = string_list(a.at("letter_patterns"));
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError("invalid config value: " + std::string(e.what()));
    }

    cfg.validate();
    return cfg;
}

void RunConfig::validate() const {
    if (corpus_path.empty()) throw ConfigError("config is missing \"corpus\"");
    if (categories.k() < 2) throw ConfigError("config needs at least 2 categories");
    if (concurrency < 1) throw ConfigError("concurrency must be at least 1");
    thresholds.validate();
    if (sampling.max_tokens != 1) {
        throw ConfigError("sampling.max_tokens must be 1 (single answer token)");
    }
    if (sampling.top_logprobs < 1) throw ConfigError("sampling.top_logprobs must be at least 1");
    if (backend.kind == BackendKind::Remote && backend.remote.base_url.empty()) {
        throw ConfigError("remote backend needs base_url");
    }
    if (backend.kind == BackendKind::Synthetic && backend.synthetic_params.empty()) {
        throw ConfigError("synthetic backend needs a params file");
    }
}

std::string RunConfig::canonical_json() const {
    json j;
    j["corpus"] = corpus_path.string();
    json cats = json::array();
    for (const CategoryDef& c : categories.categories()) {
        cats.push_back({{"key", c.key}, {"name", c.name}, {"description", c.description}});
    }
    j["categories"] = cats;
    json backend_json;
    if (backend.kind == BackendKind::Remote) {
        backend_json["kind"] = "remote";
        backend_json["base_url"] = backend.remote.base_url;
        backend_json["model_id"] = backend.model_id;
        backend_json["api_key_env"] = backend.remote.api_key_env;
        backend_json["completions_path"] = backend.remote.completions_path;
    } else {
        backend_json["kind"] = "synthetic";
        backend_json["params"] = backend.synthetic_params.string();
        backend_json["model_id"] = backend.model_id;
    }
    j["backend"] = backend_json;
    j["sampling"] = {{"temperature", sampling.temperature},
                     {"top_p", sampling.top_p},
                     {"max_tokens", sampling.max_tokens},
                     {"top_logprobs", sampling.top_logprobs}};
    j["seed"] = seed;
    j["concurrency"] = concurrency;
    j["thresholds"] = {{"very_low", thresholds.very_low},
                       {"low", thresholds.low},
                       {"moderate", thresholds.moderate}};
    j["regression"] = {{"focal", regression.focal_key},
                       {"baseline", regression.baseline_key},
                       {"team_size_dummies", regression.team_size_dummies},
                       {"condition_limit", regression.ols.condition_limit}};
    j["aliases"] = {{"yes", aliases.yes},
                    {"no", aliases.no},
                    {"letter_patterns", aliases.letter_patterns}};
    if (template_path) j["template"] = template_path->string();
    return j.dump();
}

std::string RunConfig::hash() const { return sha256_hex(canonical_json()); }

}  // namespace annocheck
