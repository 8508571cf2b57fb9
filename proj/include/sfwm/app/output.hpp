#pragma once

// Deterministic CSV/JSON writers and the run manifest.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace sfwm::app {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Shortest round-trip decimal form; "" for NaN.
std::string format_number(double value);

/// Quotes a field when it holds a comma, quote, CR or LF.
std::string csv_field(const std::string& text);

class CsvWriter {
 public:
  void row(std::span<const std::string> fields);
  void row(std::initializer_list<std::string> fields) { row(std::span(fields.begin(), fields.size())); }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

/// Collects emitted files with checksums and writes manifest.json last.
class RunManifest {
 public:
  RunManifest(std::filesystem::path out_dir, std::string command, std::string config_sha256);

  void write(const std::string& name, const std::string& contents);
  void write_json(const std::string& name, const nlohmann::json& doc);

  const std::filesystem::path& directory() const { return dir_; }
  /// Timestamp from SOURCE_DATE_EPOCH when set, otherwise the clock.
  nlohmann::json to_json() const;
  void finish();

 private:
  struct Entry {
    std::string name;
    std::string sha256;
    std::size_t bytes;
  };
  std::filesystem::path dir_;
  std::string command_;
  std::string config_sha256_;
  std::vector<Entry> files_;
};

inline constexpr const char* kToolVersion = "1.0.0";

}  // namespace sfwm::app
