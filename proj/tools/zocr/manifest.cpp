#include "manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <stdexcept>

#ifndef ZOCR_VERSION
#define ZOCR_VERSION "dev"
#endif

namespace zocr::cli {

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const auto t = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[40];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[48];
    std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
    return out;
}

RunManifest::RunManifest(std::string command) {
    doc_["tool"] = "zocr";
    doc_["version"] = ZOCR_VERSION;
    doc_["command"] = std::move(command);
    doc_["config"] = nlohmann::json::object();
    doc_["seeds"] = nlohmann::json::object();
    doc_["inputs"] = nlohmann::json::object();
    doc_["outputs"] = nlohmann::json::object();
    doc_["started_at"] = utc_timestamp();
}

void RunManifest::input(const std::string& key, const std::filesystem::path& path) {
    doc_["inputs"][key] = path.string();
}

void RunManifest::output(const std::string& key, const std::filesystem::path& path) {
    doc_["outputs"][key] = path.string();
}

void RunManifest::write(const std::filesystem::path& path) {
    doc_["finished_at"] = utc_timestamp();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot write manifest");
    out << doc_.dump(2) << '\n';
}

std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
    auto p = output;
    p += ".manifest.json";
    return p;
}

}  // namespace zocr::cli
