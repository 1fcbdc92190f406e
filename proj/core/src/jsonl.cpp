#include "emkit/jsonl.hpp"
#include "emkit/types.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace emkit {

std::string_view to_string(Role role) {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Observation: return "observation";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

std::optional<Role> role_from_string(std::string_view text) {
    static constexpr std::array<Role, 4> kRoles = {Role::System, Role::User, Role::Observation,
                                                   Role::Assistant};
    for (Role r : kRoles) {
        if (to_string(r) == text) return r;
    }
    return std::nullopt;
}

JsonlParseError::JsonlParseError(std::size_t line, const std::string& what)
    : DataError(fmt::format("line {}: {}", line, what)), line_(line) {}

void for_each_jsonl(std::istream& in,
                    const std::function<void(std::size_t, const nlohmann::json&)>& visit) {
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw JsonlParseError(number, e.what());
        }
        if (!j.is_object()) throw JsonlParseError(number, "expected a JSON object");
        try {
            visit(number, j);
        } catch (const JsonlParseError&) {
            throw;
        } catch (const nlohmann::json::exception& e) {
            throw JsonlParseError(number, e.what());
        } catch (Error& e) {
            e.add_context(fmt::format("line {}: ", number));
            throw;
        }
    }
}

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const nlohmann::json&)>& visit) {
    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
    for_each_jsonl(in, visit);
}

void for_each_jsonl(std::string_view text,
                    const std::function<void(std::size_t, const nlohmann::json&)>& visit) {
    std::istringstream in{std::string(text)};
    for_each_jsonl(in, visit);
}

std::string dump_line(const OrderedJson& j) {
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
}

void write_jsonl(const std::filesystem::path& path, const std::vector<OrderedJson>& lines) {
    std::string text;
    for (const auto& j : lines) {
        text += dump_line(j);
        text += '\n';
    }
    write_text(path, text);
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw DataError(fmt::format("write failed for '{}'", path.string()));
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace emkit
