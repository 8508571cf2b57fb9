#include "sfwm/app/output.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>

#include <openssl/evp.h>

#include "sfwm/errors.hpp"

namespace sfwm::app {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int j = 0; j < length; ++j) {
    out += kHex[digest[j] >> 4];
    out += kHex[digest[j] & 0xF];
  }
  return out;
}

std::string format_number(double value) {
  if (std::isnan(value)) return {};
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc()) throw Error("number formatting failed");
  return {buffer, end};
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char ch : text) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  quoted += '"';
  return quoted;
}

void CsvWriter::row(std::span<const std::string> fields) {
  for (std::size_t j = 0; j < fields.size(); ++j) {
    if (j > 0) text_ += ',';
    text_ += csv_field(fields[j]);
  }
  text_ += "\r\n";
}

RunManifest::RunManifest(std::filesystem::path out_dir, std::string command, std::string config_sha256)
    : dir_(std::move(out_dir)), command_(std::move(command)), config_sha256_(std::move(config_sha256)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec || !std::filesystem::is_directory(dir_))
    throw ConfigError("cannot create output directory " + dir_.string());
}

void RunManifest::write(const std::string& name, const std::string& contents) {
  const auto path = dir_ / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.close();
  if (!out) throw ConfigError("cannot write " + path.string());
  files_.push_back({name, sha256_hex(contents), contents.size()});
}

void RunManifest::write_json(const std::string& name, const nlohmann::json& doc) {
  write(name, doc.dump(2) + "\n");
}

nlohmann::json RunManifest::to_json() const {
  std::time_t stamp = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long parsed = std::strtoll(epoch, &end, 10);
    if (end != epoch && *end == '\0') stamp = static_cast<std::time_t>(parsed);
  }
  std::tm utc{};
  gmtime_r(&stamp, &utc);
  char when[32];
  std::strftime(when, sizeof when, "%Y-%m-%dT%H:%M:%SZ", &utc);

  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : files_) files.push_back({{"path", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  return {{"tool", "sfwm"},
          {"version", kToolVersion},
          {"command", command_},
          {"config_sha256", config_sha256_},
          {"timestamp", when},
          {"files", files}};
}

void RunManifest::finish() {
  const auto path = dir_ / "manifest.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << to_json().dump(2) << "\n";
  if (!out) throw ConfigError("cannot write " + path.string());
}

}  // namespace sfwm::app
