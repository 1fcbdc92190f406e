#include "generators.hpp"

#include "emkit/backends.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace emkit;
using namespace emkit::backends;

namespace {

// Independent FNV-1a bucket assignment for the hashed embedder.
std::set<std::size_t> buckets(std::string_view text) {
    std::set<std::size_t> out;
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : token) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        out.insert(static_cast<std::size_t>(h % 256));
        token.clear();
    };
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            token += static_cast<char>(std::tolower(c));
        } else {
            flush();
        }
    }
    flush();
    return out;
}

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.dimension(); ++i) s += a.components[i] * b.components[i];
    return s;
}

class FixedEmbedder : public Embedder {
public:
    std::vector<EmbeddingVector> queue;

protected:
    EmbeddingVector compute(std::string_view) override {
        auto v = queue.front();
        queue.erase(queue.begin());
        return v;
    }
};

std::vector<ChatMessage> user(std::string text) { return {{Role::User, std::move(text)}}; }

}  // namespace

TEST_SUITE("backends") {

TEST_CASE("chat validates its request") {
    ScriptedChatBackend b(ReplyScript::from_json(nlohmann::json::array({"hi"})));
    CHECK_THROWS_AS(b.chat("a", {}), PreconditionError);
    CHECK_THROWS_AS(b.chat("a", user("")), PreconditionError);
    const std::vector<ChatMessage> obs{{Role::User, "q"}, {Role::Observation, "Monday, September 4, 2006, 21:42:56"}};
    CHECK(b.chat("a", obs) == "hi");
}

TEST_CASE("scripted replies fall back from tag to role segment to wildcard") {
    const auto script = ReplyScript::from_json(
        {{"d1/human", {"d1-h0", "d1-h1"}}, {"human", {"h0", "h1"}}, {"*", {"any"}}});
    ScriptedChatBackend b(script);
    CHECK(b.chat("d1/human", user("x")) == "d1-h0");
    CHECK(b.chat("d2/human", user("x")) == "h0");
    CHECK(b.chat("d3/human", user("x")) == "h0");
    CHECK(b.chat("d2/human", user("x")) == "h1");
    CHECK(b.chat("d1/human", user("x")) == "d1-h1");
    CHECK(b.chat("judge", user("x")) == "any");
    CHECK(b.calls("d2/human") == 2);
    CHECK(b.calls("unused") == 0);
    CHECK_THROWS_AS(b.chat("d1/human", user("x")), FixtureExhaustedError);
}

TEST_CASE("missing script and empty replies") {
    ScriptedChatBackend none(ReplyScript::from_json({{"human", {"x"}}}));
    CHECK_THROWS_AS(none.chat("assistant", user("x")), FixtureExhaustedError);
    ScriptedChatBackend empty(ReplyScript::from_json(nlohmann::json::array({""})));
    CHECK_THROWS_AS(empty.chat("a", user("x")), EmptyCompletionError);
}

TEST_CASE("identical requests against the scripted provider are repeatable") {
    const auto script = ReplyScript::from_json({{"*", {"one", "two"}}});
    ScriptedChatBackend a(script), b(script);
    const auto msgs = user("hello");
    const auto copy = msgs;
    CHECK(a.chat("x", msgs) == b.chat("x", msgs));
    CHECK(msgs == copy);
}

TEST_CASE("reply script shapes") {
    CHECK_THROWS_AS(ReplyScript::from_json("nope"), DataError);
    CHECK_THROWS_AS(ReplyScript::from_json({{"human", "not an array"}}), DataError);
    CHECK(ReplyScript::from_json(nlohmann::json::array({"a", "b"})).replies.at("*").size() == 2);
    CHECK_THROWS_AS(ReplyScript::load("/nonexistent/script.json"), DataError);
}

TEST_CASE("provider wire format") {
    const std::vector<ChatMessage> msgs{{Role::System, "sys"},
                                        {Role::User, "q"},
                                        {Role::Observation, "Friday, April 3, 2020, 05:04:46"},
                                        {Role::Assistant, "a"}};
    const auto wire = to_provider_messages(msgs);
    REQUIRE(wire.size() == 4);
    CHECK(wire[0]["role"] == "system");
    CHECK(wire[2]["role"] == "user");
    CHECK(wire[2]["content"] == "[time] Friday, April 3, 2020, 05:04:46");
    CHECK(wire[3]["role"] == "assistant");

    BackendConfig c;
    c.endpoint = "http://localhost:1/v1/chat/completions";
    c.model_name = "m";
    c.temperature = 0.0;
    const auto body = chat_request_body(c, msgs);
    CHECK(body["model"] == "m");
    CHECK(body["temperature"] == 0.0);
    CHECK(body["messages"] == wire);

    CHECK(parse_chat_response({{"choices", {{{"message", {{"content", "hey"}}}}}}}) == "hey");
    CHECK(parse_chat_response({{"choices", {{{"message", {{"content", nullptr}}}}}}}).empty());
    CHECK_THROWS_AS(parse_chat_response({{"error", "x"}}), BackendError);
}

TEST_CASE("backend config") {
    BackendConfig c;
    CHECK_THROWS_AS(c.validate(), PreconditionError);
    c.endpoint = "ftp://x";
    CHECK_THROWS_AS(c.validate(), PreconditionError);
    c.endpoint = "https://api.example.com/v1/chat/completions";
    CHECK_NOTHROW(c.validate());
    c.max_retries = 0;
    CHECK_THROWS_AS(c.validate(), PreconditionError);

    const auto j = BackendConfig::from_json(
        {{"endpoint", "http://h:8/x"}, {"model", "qwen"}, {"temperature", 0.2}, {"max_in_flight", 3}});
    CHECK(j.model_name == "qwen");
    CHECK(j.api_key_env == "ECHO_API_KEY");
    CHECK(j.temperature == doctest::Approx(0.2));
    CHECK(j.max_in_flight == 3);
}

TEST_CASE("factories") {
    CHECK_THROWS_AS(make_chat_backend({{"kind", "carrier-pigeon"}}), DataError);
    CHECK_THROWS_AS(make_embedder({{"kind", "nope"}}), DataError);
    CHECK(make_embedder({{"kind", "hash"}}) != nullptr);
    CHECK(make_embedder(nlohmann::json::object()) != nullptr);
    CHECK_THROWS_AS(make_chat_backend({{"kind", "http"}, {"endpoint", "not a url"}}), PreconditionError);
}

TEST_CASE("embedder output checks") {
    FixedEmbedder e;
    e.queue = {EmbeddingVector{{1, 0}}, EmbeddingVector{{1, 0, 0}}};
    CHECK_NOTHROW(e.embed("a"));
    CHECK_THROWS_AS(e.embed("b"), DimensionDriftError);

    FixedEmbedder bad;
    bad.queue = {EmbeddingVector{{NAN, 1}}, EmbeddingVector{}};
    CHECK_THROWS_AS(bad.embed("a"), BackendError);
    CHECK_THROWS_AS(bad.embed("b"), BackendError);
}

TEST_CASE("test_embed basics") {
    const auto a = test_embed("Hello, world");
    CHECK(a.dimension() == kTestEmbedDimension);
    CHECK(a.norm() == doctest::Approx(1.0));
    CHECK(test_embed("HELLO world!").components == a.components);
    const auto empty = test_embed("  ,, ");
    CHECK(empty.components[0] == 1.0);
    CHECK(empty.norm() == doctest::Approx(1.0));
}

TEST_CASE("property: hashed embeddings are orthogonal exactly when buckets are disjoint") {
    gen::Gen g(21);
    for (int i = 0; i < 500; ++i) {
        INFO("case " << i);
        const auto s = g.sentence(1, 6);
        const auto t = g.sentence(1, 6);
        const auto bs = buckets(s);
        const auto bt = buckets(t);
        bool disjoint = true;
        for (auto b : bs) disjoint = disjoint && !bt.contains(b);
        const double d = dot(test_embed(s), test_embed(t));
        if (disjoint) {
            REQUIRE(d == doctest::Approx(0.0));
        } else {
            REQUIRE(d > 0.0);
        }
    }
}

}  // TEST_SUITE
