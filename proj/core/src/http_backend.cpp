#include "emkit/backends.hpp"

#include <chrono>
#include <cstdlib>
#include <semaphore>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

namespace emkit::backends {
namespace {

struct Url {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Url split_url(const std::string& endpoint) {
    const auto scheme_end = endpoint.find("://");
    const auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {endpoint, "/"};
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

// POSTs `body` as JSON with bounded retries. Transport failures, 429 and 5xx
// are retried with exponential backoff; other non-2xx replies fail at once.
nlohmann::json post_json(const BackendConfig& config, const nlohmann::json& body) {
    const Url url = split_url(config.endpoint);
    httplib::Headers headers;
    if (const char* key = std::getenv(config.api_key_env.c_str()); key != nullptr && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    const std::string payload = body.dump();
    const auto timeout = std::chrono::duration<double>(config.timeout_seconds);
    const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(timeout);

    std::string last_error;
    for (int attempt = 0; attempt < config.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(config.retry_base_delay_ms) * (1 << (attempt - 1)));
        }
        httplib::Client client(url.origin);
        client.set_connection_timeout(timeout_us);
        client.set_read_timeout(timeout_us);
        client.set_write_timeout(timeout_us);
        auto res = client.Post(url.path, headers, payload, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 200 && res->status < 300) {
            try {
                return nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::parse_error& e) {
                throw BackendError(fmt::format("provider returned invalid JSON: {}", e.what()));
            }
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = fmt::format("HTTP {}", res->status);
            continue;
        }
        throw ProtocolError(res->status, fmt::format("provider replied HTTP {}", res->status));
    }
    throw BackendError(fmt::format("request to {} failed after {} attempts: {}", url.origin,
                                   config.max_retries, last_error));
}

}  // namespace

struct HttpChatBackend::Limiter {
    explicit Limiter(int n) : slots(n) {}
    std::counting_semaphore<4096> slots;
};

HttpChatBackend::HttpChatBackend(BackendConfig config) : config_(std::move(config)) {
    config_.validate();
    limiter_ = std::make_unique<Limiter>(std::min(config_.max_in_flight, 4096));
}

HttpChatBackend::~HttpChatBackend() = default;

std::string HttpChatBackend::complete(std::string_view /*agent*/,
                                      std::span<const ChatMessage> messages) {
    limiter_->slots.acquire();
    struct Release {
        Limiter& l;
        ~Release() { l.slots.release(); }
    } release{*limiter_};
    return parse_chat_response(post_json(config_, chat_request_body(config_, messages)));
}

HttpEmbedder::HttpEmbedder(BackendConfig config) : config_(std::move(config)) {
    config_.validate();
}

EmbeddingVector HttpEmbedder::compute(std::string_view text) {
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
        throw PreconditionError("cannot embed empty text");
    }
    const nlohmann::json body = {{"model", config_.model_name}, {"input", std::string(text)}};
    const nlohmann::json reply = post_json(config_, body);
    const nlohmann::json* values = nullptr;
    if (reply.contains("embedding")) {
        values = &reply["embedding"];
    } else if (reply.contains("data") && reply["data"].is_array() && !reply["data"].empty() &&
               reply["data"][0].contains("embedding")) {
        values = &reply["data"][0]["embedding"];
    }
    if (values == nullptr || !values->is_array()) {
        throw BackendError("embedding response has no 'embedding' array");
    }
    EmbeddingVector v;
    for (const auto& c : *values) {
        if (!c.is_number()) throw BackendError("embedding component is not a number");
        v.components.push_back(c.get<double>());
    }
    return v;
}

}  // namespace emkit::backends
