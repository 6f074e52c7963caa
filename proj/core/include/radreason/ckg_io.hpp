#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "radreason/ckg.hpp"

namespace radreason {

/// Reads and parses a JSON file. Throws Error{io} or Error{parse}.
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Canonical text form: sorted keys, two-space indent, LF line endings, trailing newline.
std::string canonical_dump(const nlohmann::json& value);

void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Structural parse of a CKG document without reference checks. Throws Error{parse|schema}.
CkgDocument parse_ckg_document(const nlohmann::json& document);

/// Parses and builds a graph. Throws Error{parse|schema|reference|duplicate}.
Ckg load_ckg(const nlohmann::json& document);
Ckg load_ckg_file(const std::filesystem::path& path);

nlohmann::json to_json(const CkgDocument& document);
nlohmann::json to_json(const Ckg& ckg);

std::string serialize_ckg(const Ckg& ckg);
void save_ckg_file(const Ckg& ckg, const std::filesystem::path& path);

nlohmann::json to_json(const ValidationReport& report);
nlohmann::json to_json(const CkgStats& stats);

}  // namespace radreason
