#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace zocr::cli {

/// Record written next to every command's outputs: what ran, with which
/// resolved settings, and when.
class RunManifest {
public:
    explicit RunManifest(std::string command);

    nlohmann::json& config() { return doc_["config"]; }
    nlohmann::json& seeds() { return doc_["seeds"]; }
    void input(const std::string& key, const std::filesystem::path& path);
    void output(const std::string& key, const std::filesystem::path& path);

    /// Stamps the end time and writes the manifest to `path`.
    void write(const std::filesystem::path& path);

private:
    nlohmann::json doc_;
};

/// `<file>.manifest.json` beside a file output.
std::filesystem::path manifest_path_for(const std::filesystem::path& output);

std::string utc_timestamp();

}  // namespace zocr::cli
