#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace aquastream {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// What to do when no attribute version covers a measurement: route the
/// whole record to the dead-letter topic, or emit it flagged as missing.
enum class MissingPolicy : std::uint8_t {
    DeadLetter = 0,
    EmitFlagged = 1,
};

struct TopicNames {
    std::string measurements = "measurements";
    std::string updates = "updates";
    std::string results = "results";
    std::string dead_letter = "dead-letter";
};

struct EngineConfig {
    std::vector<std::string> enrichment_attributes;
    std::uint32_t partitions = 1;
    std::int64_t checkpoint_interval_ms = 10000;
    MissingPolicy missing_policy = MissingPolicy::EmitFlagged;
    TopicNames topics;
    std::filesystem::path checkpoint_dir;

    void validate() const;
};

struct StoreConfig {
    std::filesystem::path journal_path;
    std::int64_t simulated_latency_ms = 1;
};

/// Everything a deployment needs: engine, store and log settings, loadable
/// from a key/value config file and overridable per key.
struct PlatformConfig {
    EngineConfig engine;
    StoreConfig store;
    std::filesystem::path log_root;

    static PlatformConfig load(const std::filesystem::path& file);

    /// Apply one `key = value` setting. Unknown keys throw ConfigError.
    void apply(const std::string& key, const std::string& value);
};

MissingPolicy missing_policy_from_string(const std::string& s);
const char* to_string(MissingPolicy p);

}  // namespace aquastream
