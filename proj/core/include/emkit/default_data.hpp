#pragma once

#include <string_view>

// Shipped copies of core/data, embedded at build time.
namespace emkit::defaults {

std::string_view event_library_jsonl();
std::string_view attribute_pools_jsonl();
std::string_view human_prompt_template();
std::string_view assistant_prompt_template();

}  // namespace emkit::defaults
