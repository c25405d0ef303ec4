#include "cbias/io.hpp"

#include <fstream>
#include <sstream>

namespace cbias {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInput("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInput("cannot open " + path.string());
  std::vector<nlohmann::json> lines;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      lines.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaMismatch(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return lines;
}

void check_schema(const nlohmann::json& header, std::string_view schema, const std::filesystem::path& where) {
  const auto it = header.find("schema");
  if (it == header.end() || !it->is_string()) {
    throw SchemaMismatch(where.string() + ": missing schema field (expected " + std::string(schema) + ")");
  }
  if (it->get<std::string>() != schema) {
    throw SchemaMismatch(where.string() + ": schema " + it->get<std::string>() + ", expected " +
                         std::string(schema));
  }
}

}  // namespace cbias
