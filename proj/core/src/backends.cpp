#include "emkit/backends.hpp"
#include "emkit/jsonl.hpp"

#include <cctype>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

namespace emkit::backends {

void BackendConfig::validate() const {
    const bool http = endpoint.rfind("http://", 0) == 0 || endpoint.rfind("https://", 0) == 0;
    const auto scheme_end = endpoint.find("://");
    if (!http || scheme_end == std::string::npos || endpoint.size() <= scheme_end + 3) {
        throw PreconditionError(fmt::format("endpoint '{}' is not an http(s) URL", endpoint));
    }
    if (!(timeout_seconds > 0.0)) throw PreconditionError("timeout must be positive");
    if (!(temperature >= 0.0)) throw PreconditionError("temperature must be >= 0");
    if (max_retries < 1) throw PreconditionError("max_retries must be >= 1");
    if (max_in_flight < 1) throw PreconditionError("max_in_flight must be >= 1");
    if (retry_base_delay_ms < 0) throw PreconditionError("retry delay must be >= 0");
}

BackendConfig BackendConfig::from_json(const nlohmann::json& j) {
    BackendConfig c;
    c.endpoint = j.value("endpoint", c.endpoint);
    c.model_name = j.value("model", c.model_name);
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    c.temperature = j.value("temperature", c.temperature);
    c.timeout_seconds = j.value("timeout", c.timeout_seconds);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.retry_base_delay_ms = j.value("retry_base_delay_ms", c.retry_base_delay_ms);
    c.validate();
    return c;
}

std::string ChatBackend::chat(std::string_view agent, std::span<const ChatMessage> messages) {
    if (messages.empty()) throw PreconditionError("chat requires at least one message");
    for (const auto& m : messages) {
        if ((m.role == Role::User || m.role == Role::Assistant) && m.content.empty()) {
            throw PreconditionError(fmt::format("empty {} message", to_string(m.role)));
        }
    }
    std::string reply = complete(agent, messages);
    if (reply.empty()) {
        throw EmptyCompletionError(fmt::format("provider returned an empty completion for '{}'",
                                               agent));
    }
    return reply;
}

ReplyScript ReplyScript::from_json(const nlohmann::json& j) {
    ReplyScript script;
    if (j.is_array()) {
        script.replies["*"] = j.get<std::vector<std::string>>();
        return script;
    }
    if (!j.is_object()) throw DataError("reply script must be an object or an array");
    for (const auto& [tag, replies] : j.items()) {
        if (!replies.is_array()) {
            throw DataError(fmt::format("reply script entry '{}' is not an array", tag));
        }
        script.replies[tag] = replies.get<std::vector<std::string>>();
    }
    return script;
}

ReplyScript ReplyScript::load(const std::filesystem::path& path) {
    try {
        return from_json(nlohmann::json::parse(read_text(path)));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(fmt::format("reply script '{}': {}", path.string(), e.what()));
    }
}

ScriptedChatBackend::ScriptedChatBackend(ReplyScript script) : script_(std::move(script)) {}

std::size_t ScriptedChatBackend::calls(std::string_view agent) const {
    std::lock_guard lock(mutex_);
    auto it = cursor_.find(agent);
    return it == cursor_.end() ? 0 : it->second;
}

std::string ScriptedChatBackend::complete(std::string_view agent,
                                          std::span<const ChatMessage> /*messages*/) {
    const std::vector<std::string>* replies = nullptr;
    if (auto it = script_.replies.find(agent); it != script_.replies.end()) {
        replies = &it->second;
    } else if (auto slash = agent.rfind('/'); slash != std::string_view::npos) {
        if (auto role = script_.replies.find(agent.substr(slash + 1));
            role != script_.replies.end()) {
            replies = &role->second;
        }
    }
    if (replies == nullptr) {
        if (auto any = script_.replies.find("*"); any != script_.replies.end()) {
            replies = &any->second;
        }
    }
    if (replies == nullptr) {
        throw FixtureExhaustedError(fmt::format("no scripted replies for agent '{}'", agent));
    }

    std::size_t index = 0;
    {
        std::lock_guard lock(mutex_);
        index = cursor_[std::string(agent)]++;
    }
    if (index >= replies->size()) {
        throw FixtureExhaustedError(fmt::format("scripted replies for '{}' exhausted after {} calls",
                                                agent, replies->size()));
    }
    return (*replies)[index];
}

nlohmann::json to_provider_messages(std::span<const ChatMessage> messages) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& m : messages) {
        if (m.role == Role::Observation) {
            out.push_back({{"role", "user"}, {"content", "[time] " + m.content}});
        } else {
            out.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
        }
    }
    return out;
}

nlohmann::json chat_request_body(const BackendConfig& config,
                                 std::span<const ChatMessage> messages) {
    return {{"model", config.model_name},
            {"messages", to_provider_messages(messages)},
            {"temperature", config.temperature}};
}

std::string parse_chat_response(const nlohmann::json& body) {
    try {
        const auto& content = body.at("choices").at(0).at("message").at("content");
        if (content.is_null()) return {};
        return content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(fmt::format("unexpected chat response shape: {}", e.what()));
    }
}

double EmbeddingVector::norm() const noexcept {
    double sum = 0.0;
    for (double c : components) sum += c * c;
    return std::sqrt(sum);
}

EmbeddingVector Embedder::embed(std::string_view text) {
    EmbeddingVector v = compute(text);
    if (v.components.empty()) throw BackendError("embedding has dimension 0");
    for (double c : v.components) {
        if (!std::isfinite(c)) throw BackendError("embedding has a non-finite component");
    }
    std::lock_guard lock(mutex_);
    if (!dimension_) {
        dimension_ = v.dimension();
    } else if (*dimension_ != v.dimension()) {
        throw DimensionDriftError(fmt::format("embedding dimension changed from {} to {}",
                                              *dimension_, v.dimension()));
    }
    return v;
}

EmbeddingVector test_embed(std::string_view text) {
    EmbeddingVector v;
    v.components.assign(kTestEmbedDimension, 0.0);
    bool any = false;
    std::uint64_t hash = 0;
    bool in_token = false;
    auto flush = [&] {
        if (in_token) {
            v.components[hash % kTestEmbedDimension] += 1.0;
            any = true;
        }
        in_token = false;
    };
    for (char raw : text) {
        const auto c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            if (!in_token) {
                hash = 14'695'981'039'346'656'037ULL;
                in_token = true;
            }
            hash ^= static_cast<unsigned char>(std::tolower(c));
            hash *= 1'099'511'628'211ULL;
        } else {
            flush();
        }
    }
    flush();
    if (!any) {
        v.components[0] = 1.0;
        return v;
    }
    const double n = v.norm();
    for (double& c : v.components) c /= n;
    return v;
}

std::unique_ptr<ChatBackend> make_chat_backend(const nlohmann::json& spec,
                                               const std::filesystem::path& base_dir) {
    const std::string kind = spec.value("kind", "");
    if (kind == "scripted") {
        std::filesystem::path fixture = spec.at("fixture").get<std::string>();
        if (fixture.is_relative() && !base_dir.empty()) fixture = base_dir / fixture;
        return std::make_unique<ScriptedChatBackend>(ReplyScript::load(fixture));
    }
    if (kind == "http") return std::make_unique<HttpChatBackend>(BackendConfig::from_json(spec));
    throw DataError(fmt::format("unknown chat backend kind '{}'", kind));
}

std::unique_ptr<Embedder> make_embedder(const nlohmann::json& spec) {
    const std::string kind = spec.value("kind", "hash");
    if (kind == "hash") return std::make_unique<HashEmbedder>();
    if (kind == "http") return std::make_unique<HttpEmbedder>(BackendConfig::from_json(spec));
    throw DataError(fmt::format("unknown embedder kind '{}'", kind));
}

}  // namespace emkit::backends
