#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aquastream/types.hpp"

namespace aquastream {

class LogError : public std::runtime_error {
public:
    explicit LogError(const std::string& what) : std::runtime_error(what) {}
};

/// Handle to a topic. The partition count is fixed at creation.
struct Topic {
    std::string name;
    std::uint32_t partitions = 0;
};

/// One positioned log entry. `payload` is exactly the bytes given to
/// append(); `key` drives partition routing.
struct LogRecord {
    std::uint64_t offset = 0;
    std::string key;
    std::vector<std::byte> payload;
    TimestampMs append_time = 0;
};

/// Durable, partitioned, replayable append-only log backed by one segment
/// file plus a fixed-width offset index per partition.
///
/// Layout: <root>/<topic>/<partition>/segment.dat + segment.idx. On-disk
/// record framing: u32 length, u32 CRC32C, payload. Torn tail records are
/// truncated at open.
///
/// Appends to one partition are serialized by a per-partition mutex; readers
/// work from atomic snapshots and never take the append lock. Records are
/// written straight to the OS (surviving process crash); fdatasync runs
/// every 10 ms or 1,000 records, whichever comes first, and on close.
class Log {
public:
    explicit Log(std::filesystem::path root);
    ~Log();

    Log(const Log&) = delete;
    Log& operator=(const Log&) = delete;

    Topic create_topic(const std::string& name, std::uint32_t partitions);
    /// Open a topic that already exists under the root.
    Topic open_topic(const std::string& name);
    bool topic_exists(const std::string& name) const;

    StreamOffset append(const Topic& topic, std::string_view key, std::span<const std::byte> payload);

    /// Up to `max` records with offsets from, from+1, ... Reads at or past
    /// the end offset return an empty list.
    std::vector<LogRecord> read(const Topic& topic, std::uint32_t partition, std::uint64_t from,
                                std::size_t max) const;

    /// The next offset append would assign.
    std::uint64_t end_offset(const Topic& topic, std::uint32_t partition) const;

    /// fdatasync all partitions now.
    void flush();

    /// fdatasync one partition now.
    void flush_partition(const Topic& topic, std::uint32_t partition);

    const std::filesystem::path& root() const { return root_; }

private:
    struct Partition;

    Partition& partition(const Topic& topic, std::uint32_t p) const;
    void open_partition_files(const std::string& topic, std::uint32_t p, bool fresh);

    std::filesystem::path root_;
    mutable std::mutex topics_mu_;
    std::map<std::string, std::vector<std::unique_ptr<Partition>>> topics_;
};

}  // namespace aquastream
