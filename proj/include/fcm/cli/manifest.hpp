#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace fcm::app {

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Build identifier baked in at configure time (git describe).
std::string version_string();

/// Provenance record written next to every command's outputs.
struct Manifest {
    std::string command;
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::vector<std::filesystem::path> inputs;
    std::vector<std::filesystem::path> outputs;

    /// Hashes inputs and outputs at write time.
    void write(const std::filesystem::path& path) const;
};

}  // namespace fcm::app
