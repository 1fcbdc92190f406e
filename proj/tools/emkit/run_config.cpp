#include "run_config.hpp"

#include "emkit/error.hpp"

#include <fmt/format.h>


namespace emkit::cli {

namespace {

fs::path resolve_path(const nlohmann::json& value, const fs::path& base_dir) {
    fs::path p = value.get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    return p;
}

void require_exists(const std::optional<fs::path>& p, std::string_view what) {
    if (p && !fs::exists(*p)) {
        throw DataError(fmt::format("{} not found: {}", what, p->string()));
    }
}

nlohmann::json chat_spec(const nlohmann::json& j, const fs::path& base_dir) {
    nlohmann::json spec = j;
    if (spec.value("kind", "") == "scripted" && spec.contains("fixture")) {
        spec["fixture"] = resolve_path(spec["fixture"], base_dir).string();
    }
    return spec;
}

persona::PlotMix plot_mix_from_json(const nlohmann::json& j) {
    persona::PlotMix mix;
    mix.real = j.value("real", mix.real);
    mix.hallucinatory = j.value("hallucinatory", mix.hallucinatory);
    mix.common = j.value("common", mix.common);
    const std::string shuffle = j.value("shuffle", "random");
    if (shuffle == "random") {
        mix.shuffle = persona::ShufflePolicy::Random;
    } else if (shuffle == "library_order") {
        mix.shuffle = persona::ShufflePolicy::LibraryOrder;
    } else {
        throw DataError(fmt::format("unknown shuffle policy '{}'", shuffle));
    }
    return mix;
}

}  // namespace

std::uint64_t RunConfig::require_seed() const {
    if (!seed) throw PreconditionError("a seed is required (--seed or \"seed\" in the config)");
    return *seed;
}

RunConfig RunConfig::from_json(const nlohmann::json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw DataError("config must be a JSON object");
    RunConfig c;
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    c.jobs = j.value("jobs", c.jobs);
    c.language = j.value("language", c.language);
    c.model_name = j.value("model_name", c.model_name);
    if (j.contains("generation_backend")) c.generation_backend = chat_spec(j["generation_backend"], base_dir);
    if (j.contains("eval_backend")) c.eval_backend = chat_spec(j["eval_backend"], base_dir);
    if (j.contains("embedder")) c.embedder = j["embedder"];

    if (j.contains("paths")) {
        const auto& p = j["paths"];
        auto opt = [&](const char* key) -> std::optional<fs::path> {
            if (!p.contains(key)) return std::nullopt;
            return resolve_path(p[key], base_dir);
        };
        c.event_library = opt("event_library");
        c.attribute_pools = opt("attribute_pools");
        c.templates = opt("templates");
        c.personas = opt("personas");
        c.dataset = opt("dataset");
        if (auto out = opt("out")) c.out_dir = *out;
    }
    require_exists(c.event_library, "event library");
    require_exists(c.attribute_pools, "attribute pools");
    require_exists(c.templates, "templates directory");
    require_exists(c.dataset, "dataset");

    if (j.contains("time_policy")) c.time_policy = dialogue::TimePolicy::from_json(j["time_policy"]);
    if (j.contains("limits")) c.limits = dialogue::GenLimits::from_json(j["limits"]);
    if (j.contains("plot_mix")) c.plot_mix = plot_mix_from_json(j["plot_mix"]);
    if (j.contains("common_hints")) c.common_hints = j["common_hints"].get<std::vector<std::string>>();
    if (j.contains("temporal_qa")) {
        const auto& q = j["temporal_qa"];
        if (q.contains("train")) c.qa_train = temporal_qa::QAConfig::from_json(q["train"]);
        if (q.contains("eval")) c.qa_eval = temporal_qa::QAConfig::from_json(q["eval"]);
    }
    return c;
}

RunConfig RunConfig::resolve(const Overrides& o) {
    RunConfig c;
    if (o.config) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_text(*o.config));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(fmt::format("{}: {}", o.config->string(), e.what()));
        }
        c = from_json(j, o.config->parent_path());
    }
    if (o.seed) c.seed = *o.seed;
    if (o.jobs) c.jobs = *o.jobs;
    if (c.jobs < 1) throw PreconditionError("--jobs must be >= 1");
    if (o.out) c.out_dir = *o.out;
    if (o.backend) {
        const auto spec = parse_backend_flag(*o.backend);
        c.generation_backend = spec;
        c.eval_backend = spec;
    }
    if (o.max_rounds) c.limits.max_rounds = *o.max_rounds;
    c.limits.validate();
    c.time_policy.validate();
    return c;
}

nlohmann::json parse_backend_flag(const std::string& flag) {
    const auto colon = flag.find(':');
    if (colon == std::string::npos) {
        throw PreconditionError("--backend expects scripted:PATH or http:URL");
    }
    const std::string kind = flag.substr(0, colon);
    const std::string rest = flag.substr(colon + 1);
    if (kind == "scripted") return {{"kind", "scripted"}, {"fixture", rest}};
    if (kind == "http") return {{"kind", "http"}, {"endpoint", rest}};
    throw PreconditionError(fmt::format("unknown backend kind '{}'", kind));
}

}  // namespace emkit::cli
