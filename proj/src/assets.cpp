#include "cbias/assets.hpp"

#include <stdexcept>

namespace cbias {

namespace detail {
const std::map<std::string, std::string_view, std::less<>>& embedded_assets();
}

std::string_view asset(std::string_view name) {
  const auto& all = detail::embedded_assets();
  auto it = all.find(name);
  if (it == all.end()) throw std::out_of_range("no embedded asset named " + std::string(name));
  return it->second;
}

const std::map<std::string, std::string_view, std::less<>>& all_assets() { return detail::embedded_assets(); }

std::string fill_template(std::string_view text, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      const auto close = text.find('}', i + 1);
      if (close != std::string_view::npos) {
        auto it = values.find(std::string(text.substr(i + 1, close - i - 1)));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += text[i++];
  }
  return out;
}

}  // namespace cbias
