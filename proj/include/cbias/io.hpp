#pragma once

// File helpers shared by the dataset, transcript and report writers.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace cbias {

class MissingInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text_file(const std::filesystem::path& path);  // throws MissingInput

// Writes to "<path>.tmp" then renames, so readers never see half a file.
void write_text_file(const std::filesystem::path& path, std::string_view content);

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

// Header line "schema" must equal `schema`; throws SchemaMismatch otherwise.
void check_schema(const nlohmann::json& header, std::string_view schema, const std::filesystem::path& where);

}  // namespace cbias
