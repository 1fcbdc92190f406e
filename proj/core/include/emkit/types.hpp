#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace emkit {

// Conversation roles shared by histories, training records and provider
// requests. Observation carries a canonical timestamp and is never a loss
// target.
enum class Role { System, User, Observation, Assistant };

std::string_view to_string(Role role);
std::optional<Role> role_from_string(std::string_view text);

}  // namespace emkit
