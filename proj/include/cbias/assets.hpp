#pragma once

// Text assets compiled into the library (see assets/ in the source tree).

#include <map>
#include <string>
#include <string_view>

namespace cbias {

// Throws std::out_of_range for an unknown name. Names are paths relative to
// assets/, e.g. "prompts/wason_baseline.txt".
std::string_view asset(std::string_view name);

const std::map<std::string, std::string_view, std::less<>>& all_assets();

// Replaces every "{key}" with its value. Unknown placeholders are left alone.
std::string fill_template(std::string_view text, const std::map<std::string, std::string>& values);

}  // namespace cbias
