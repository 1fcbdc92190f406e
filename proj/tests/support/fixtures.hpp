#pragma once

#include "emkit/backends.hpp"
#include "emkit/emtest.hpp"

#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

namespace fixtures {

inline std::filesystem::path source_dir() { return EMKIT_SOURCE_DIR; }
inline std::filesystem::path data_dir() { return source_dir() / "core" / "data"; }
inline std::filesystem::path test_dir() { return source_dir() / "tests" / "fixtures"; }

inline std::filesystem::path with_time_dataset() { return data_dir() / "emtest" / "emtest_with_time.jsonl"; }
inline std::filesystem::path without_time_dataset() {
    return data_dir() / "emtest" / "emtest_without_time.jsonl";
}

// Fresh empty directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::path(EMKIT_BINARY_DIR) / "scratch" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// Reply script answering every point with its own reference answer.
inline emkit::backends::ReplyScript echo_script(const emkit::emtest::EMTestDataset& dataset) {
    emkit::backends::ReplyScript script;
    for (const auto& inst : dataset.instances) {
        for (const auto& p : inst.points) script.replies[p.id] = {p.reference_answer};
    }
    return script;
}

// Records every request and answers with a fixed reply.
class RecordingBackend : public emkit::backends::ChatBackend {
public:
    explicit RecordingBackend(std::string reply = "ok") : reply_(std::move(reply)) {}

    struct Call {
        std::string agent;
        std::vector<emkit::backends::ChatMessage> messages;
    };

    std::vector<Call> calls() const {
        std::lock_guard lock(mutex_);
        return calls_;
    }

protected:
    std::string complete(std::string_view agent,
                         std::span<const emkit::backends::ChatMessage> messages) override {
        std::lock_guard lock(mutex_);
        calls_.push_back({std::string(agent), {messages.begin(), messages.end()}});
        return reply_;
    }

private:
    std::string reply_;
    mutable std::mutex mutex_;
    std::vector<Call> calls_;
};

}  // namespace fixtures
