#pragma once

#include "emkit/error.hpp"
#include "emkit/types.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace emkit::backends {

struct ChatMessage {
    Role role = Role::User;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

class EmptyCompletionError : public BackendError {
public:
    using BackendError::BackendError;
};

class FixtureExhaustedError : public BackendError {
public:
    using BackendError::BackendError;
};

class DimensionDriftError : public BackendError {
public:
    using BackendError::BackendError;
};

// Non-2xx reply that is not worth retrying (4xx other than 429).
class ProtocolError : public BackendError {
public:
    ProtocolError(int status, const std::string& what) : BackendError(what), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

struct BackendConfig {
    std::string endpoint;
    std::string model_name;
    std::string api_key_env = "ECHO_API_KEY";
    double temperature = 0.8;
    double timeout_seconds = 60.0;
    int max_retries = 3;       // total attempts per request
    int max_in_flight = 8;
    int retry_base_delay_ms = 500;

    // Throws PreconditionError when the endpoint is not an http(s) URL,
    // the timeout is not positive, or the retry/in-flight counts are < 1.
    void validate() const;

    static BackendConfig from_json(const nlohmann::json& j);
};

// A chat-completion provider. `agent` names the calling agent
// ("<record-id>/human", a test point id, ...); only scripted providers use it.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;

    // Validates the request, forwards it, and rejects empty completions.
    std::string chat(std::string_view agent, std::span<const ChatMessage> messages);

protected:
    virtual std::string complete(std::string_view agent,
                                 std::span<const ChatMessage> messages) = 0;
};

// Replies keyed by agent tag. A tag "a/b" without its own script falls back
// to the script named "b", then to "*"; call indices are always counted per
// full tag, so every dialogue replays its role script from the start.
struct ReplyScript {
    std::map<std::string, std::vector<std::string>, std::less<>> replies;

    // Either {"tag": ["reply", ...], ...} or a bare array (stored as "*").
    static ReplyScript from_json(const nlohmann::json& j);
    static ReplyScript load(const std::filesystem::path& path);
};

class ScriptedChatBackend final : public ChatBackend {
public:
    explicit ScriptedChatBackend(ReplyScript script);

    // Number of calls served so far for `agent`.
    std::size_t calls(std::string_view agent) const;

protected:
    std::string complete(std::string_view agent, std::span<const ChatMessage> messages) override;

private:
    ReplyScript script_;
    mutable std::mutex mutex_;
    std::map<std::string, std::size_t, std::less<>> cursor_;
};

// Wire shape for chat-completions providers. Observation turns become user
// messages prefixed "[time] ".
nlohmann::json to_provider_messages(std::span<const ChatMessage> messages);
nlohmann::json chat_request_body(const BackendConfig& config,
                                 std::span<const ChatMessage> messages);
// Extracts choices[0].message.content; throws BackendError on other shapes.
std::string parse_chat_response(const nlohmann::json& body);

class HttpChatBackend final : public ChatBackend {
public:
    explicit HttpChatBackend(BackendConfig config);
    ~HttpChatBackend() override;

    const BackendConfig& config() const noexcept { return config_; }

protected:
    std::string complete(std::string_view agent, std::span<const ChatMessage> messages) override;

private:
    struct Limiter;
    BackendConfig config_;
    std::unique_ptr<Limiter> limiter_;
};

struct EmbeddingVector {
    std::vector<double> components;

    std::size_t dimension() const noexcept { return components.size(); }
    double norm() const noexcept;
};

class Embedder {
public:
    virtual ~Embedder() = default;

    // Rejects non-finite components and dimension changes between calls.
    EmbeddingVector embed(std::string_view text);

protected:
    virtual EmbeddingVector compute(std::string_view text) = 0;

private:
    std::mutex mutex_;
    std::optional<std::size_t> dimension_;
};

inline constexpr std::size_t kTestEmbedDimension = 256;

// Deterministic bag-of-tokens embedding: lowercase alphanumeric tokens are
// FNV-1a hashed into 256 buckets, counted, and L2-normalized. Text without
// tokens maps to the unit vector e0.
EmbeddingVector test_embed(std::string_view text);

class HashEmbedder final : public Embedder {
protected:
    EmbeddingVector compute(std::string_view text) override { return test_embed(text); }
};

// POSTs {model, input} and reads {embedding: [...]} (or data[0].embedding).
class HttpEmbedder final : public Embedder {
public:
    explicit HttpEmbedder(BackendConfig config);

protected:
    EmbeddingVector compute(std::string_view text) override;

private:
    BackendConfig config_;
};

// Factories over a JSON backend description:
//   {"kind": "scripted", "fixture": "path.json"}
//   {"kind": "http", "endpoint": ..., "model": ..., ...}
//   {"kind": "hash"}                      (embedders only)
// Relative fixture paths resolve against `base_dir`.
std::unique_ptr<ChatBackend> make_chat_backend(const nlohmann::json& spec,
                                               const std::filesystem::path& base_dir = {});
std::unique_ptr<Embedder> make_embedder(const nlohmann::json& spec);

}  // namespace emkit::backends
