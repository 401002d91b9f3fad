#include "aitpr/features_io.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "aitpr/errors.hpp"

namespace aitpr {

using nlohmann::json;

namespace {

json rows_to_json(const Tensor& m) {
  json rows = json::array();
  if (m.empty()) return rows;
  for (std::size_t r = 0; r < m.dim(0); ++r) {
    auto span = m.row_span(r);
    rows.push_back(std::vector<double>(span.begin(), span.end()));
  }
  return rows;
}

Tensor rows_from_json(const json& rows, std::size_t dim, const std::string& field, const std::string& source) {
  if (!rows.is_array()) throw FormatError(source + ": field '" + field + "' must be an array of rows");
  if (rows.empty()) return Tensor();
  std::vector<double> values;
  values.reserve(rows.size() * dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (!row.is_array()) throw FormatError(source + ": " + field + " row " + std::to_string(r) + " is not an array");
    if (row.size() != dim) {
      throw FormatError(source + ": " + field + " row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                        " entries but header dim is " + std::to_string(dim));
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!row[c].is_number()) {
        throw FormatError(source + ": " + field + " row " + std::to_string(r) + " entry " + std::to_string(c) +
                          " is not a number");
      }
      values.push_back(row[c].get<double>());
    }
  }
  return Tensor({rows.size(), dim}, std::move(values));
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

std::string features_to_json(const RegionFeatureSet& features) {
  json j;
  j["dim"] = features.dim();
  j["v"] = rows_to_json(features.v());
  j["v_prime"] = rows_to_json(features.v_prime());
  return j.dump() + "\n";
}

RegionFeatureSet features_from_json(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(source + ":" + std::to_string(line_of(text, e.byte)) + ": parse error: " + e.what());
  }
  if (!j.is_object()) throw FormatError(source + ": feature file must hold a JSON object");
  for (const char* field : {"dim", "v", "v_prime"}) {
    if (!j.contains(field)) throw FormatError(source + ": missing field '" + std::string(field) + "'");
  }
  if (!j["dim"].is_number_unsigned() || j["dim"].get<std::size_t>() == 0) {
    throw FormatError(source + ": field 'dim' must be a positive integer");
  }
  const auto dim = j["dim"].get<std::size_t>();
  Tensor v = rows_from_json(j["v"], dim, "v", source);
  if (v.empty()) throw FormatError(source + ": field 'v' holds no attribute vectors");
  Tensor v_prime = rows_from_json(j["v_prime"], dim, "v_prime", source);
  return RegionFeatureSet(std::move(v), std::move(v_prime));
}

void save_features(const std::filesystem::path& path, const RegionFeatureSet& features) {
  write_file_atomically(path, features_to_json(features));
}

RegionFeatureSet load_features(const std::filesystem::path& path) {
  return features_from_json(read_file(path), path.string());
}

void save_captions(const std::filesystem::path& path, std::span<const std::string> captions) {
  std::string content;
  for (const auto& c : captions) {
    if (c.find('\n') != std::string::npos) throw InputError("caption contains a newline");
    content += c;
    content += '\n';
  }
  write_file_atomically(path, content);
}

std::vector<std::string> load_captions(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.push_back(line);
  }
  return out;
}

void write_file_atomically(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("failed writing " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace aitpr
