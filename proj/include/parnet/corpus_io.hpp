#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "parnet/corpus.hpp"
#include "parnet/error.hpp"

namespace parnet {

struct ManifestEntry {
  std::string id;
  std::filesystem::path path;  // resolved against the manifest's directory
  std::optional<std::string> language;
  std::string dataset_label;
};

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Accepts either a JSON array of entries or an object with a "documents"
/// array. Each entry carries id, path, and optionally language and
/// dataset_label.
inline std::vector<ManifestEntry> parse_manifest(const std::string& json_text,
                                                 const std::filesystem::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("manifest is not valid JSON: ") + e.what());
  }
  const nlohmann::json* docs = &j;
  if (j.is_object()) {
    if (!j.contains("documents")) throw Error("manifest object lacks a \"documents\" array");
    docs = &j.at("documents");
  }
  if (!docs->is_array()) throw Error("manifest must list documents in an array");

  std::vector<ManifestEntry> out;
  std::set<std::string> seen;
  for (const auto& d : *docs) {
    if (!d.is_object() || !d.contains("id") || !d.contains("path"))
      throw Error("manifest entry needs \"id\" and \"path\"");
    ManifestEntry e;
    e.id = d.at("id").get<std::string>();
    if (e.id.empty()) throw Error("manifest entry with empty id");
    if (!seen.insert(e.id).second) throw Error("duplicate document id '" + e.id + "' in manifest");
    std::filesystem::path p = d.at("path").get<std::string>();
    e.path = p.is_absolute() ? p : base_dir / p;
    if (d.contains("language") && !d.at("language").is_null())
      e.language = d.at("language").get<std::string>();
    e.dataset_label = d.value("dataset_label", std::string{});
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text_file(path), path.parent_path());
}

inline RawDocument load_raw_document(const ManifestEntry& entry) {
  RawDocument raw{entry.id, read_text_file(entry.path), entry.language, entry.dataset_label};
  if (detail::is_blank(raw.text))
    throw Error("empty document: '" + entry.id + "' (" + entry.path.string() + ")");
  return raw;
}

/// One record per input line; variants are split on `delimiter` and keep
/// column order as transcriber priority. Blank input lines stay blank so
/// paragraph breaks survive voting.
inline std::vector<TranscriptionLineSet> parse_transcription(std::string_view text, char delimiter) {
  std::vector<TranscriptionLineSet> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    TranscriptionLineSet set;
    std::size_t f = 0;
    while (true) {
      const auto d = line.find(delimiter, f);
      set.variants.emplace_back(line.substr(f, d == std::string_view::npos ? line.npos : d - f));
      if (d == std::string_view::npos) break;
      f = d + 1;
    }
    lines.push_back(std::move(set));
    start = end + 1;
  }
  return lines;
}

}  // namespace parnet
