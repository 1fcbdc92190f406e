#pragma once

#include "emkit/error.hpp"

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace emkit {

// Output uses ordered_json so field order is exactly the order of insertion
// and every writer produces byte-stable lines.
using OrderedJson = nlohmann::ordered_json;

class JsonlParseError : public DataError {
public:
    JsonlParseError(std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Calls `visit(line_number, object)` for every non-blank line (1-based line
// numbers). Parse failures raise JsonlParseError; exceptions thrown by
// `visit` that derive from Error are rethrown with the line number prepended.
void for_each_jsonl(std::istream& in,
                    const std::function<void(std::size_t, const nlohmann::json&)>& visit);
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const nlohmann::json&)>& visit);
void for_each_jsonl(std::string_view text,
                    const std::function<void(std::size_t, const nlohmann::json&)>& visit);

std::string dump_line(const OrderedJson& j);

// Writes one object per line; creates parent directories.
void write_jsonl(const std::filesystem::path& path, const std::vector<OrderedJson>& lines);
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace emkit
