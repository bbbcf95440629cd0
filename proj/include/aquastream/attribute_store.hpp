#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aquastream/types.hpp"

namespace aquastream {

class StoreError : public std::runtime_error {
public:
    explicit StoreError(const std::string& what) : std::runtime_error(what) {}
};

/// A different value already exists at the same valid_from.
class StoreConflictError : public StoreError {
public:
    explicit StoreConflictError(const std::string& what) : StoreError(what) {}
};

/// Injected by tests through RemoteStoreClient to exercise retry paths.
class StoreUnavailableError : public StoreError {
public:
    explicit StoreUnavailableError(const std::string& what) : StoreError(what) {}
};

/// Time-versioned attribute database: fast current-value reads and
/// point-in-time historical queries over the same histories. Persistence is
/// an append-only journal of put_version records replayed at startup.
///
/// Thread-safe; a reader observing a put observes it fully. scan_keys may
/// see a non-atomic snapshot relative to other keys.
class AttributeStore {
public:
    struct Options {
        /// Empty path keeps the store purely in memory.
        std::filesystem::path journal_path;
    };

    explicit AttributeStore(Options opts = {});
    ~AttributeStore();

    AttributeStore(const AttributeStore&) = delete;
    AttributeStore& operator=(const AttributeStore&) = delete;

    /// Insert at the sorted position. Re-inserting an identical
    /// (valid_from, value) pair is an acknowledged no-op; a different value
    /// at an existing valid_from throws StoreConflictError.
    void put_version(const AttributeKey& key, const AttributeVersion& version);

    /// The version with the greatest valid_from <= t (boundary inclusive).
    std::optional<AttributeVersion> get_at(const AttributeKey& key, TimestampMs t) const;

    /// (current, previous) = versions with maximal and second-maximal
    /// valid_from; absent slots when the history is shorter.
    std::pair<std::optional<AttributeVersion>, std::optional<AttributeVersion>> get_latest_two(
        const AttributeKey& key) const;

    /// All stored keys whose device maps to `partition` under partition_for,
    /// in lexicographic order.
    std::vector<AttributeKey> scan_keys(std::uint32_t partition, std::uint32_t partitions) const;

    std::size_t key_count() const;
    std::size_t version_count(const AttributeKey& key) const;

    /// fdatasync the journal now.
    void flush();

private:
    void journal_append(const AttributeKey& key, const AttributeVersion& version);
    void replay_journal();

    Options opts_;
    mutable std::shared_mutex mu_;
    std::map<AttributeKey, std::vector<AttributeVersion>> histories_;
    int journal_fd_ = -1;
    std::uint64_t journal_pos_ = 0;
    std::uint64_t journal_unflushed_ = 0;
    std::int64_t journal_last_flush_ms_ = 0;
};

/// Client handle standing in for the network hop to the store. Reads pay a
/// configurable fixed delay; the engine's local cache exists to avoid them.
class RemoteStoreClient {
public:
    RemoteStoreClient(AttributeStore& store, std::int64_t simulated_latency_ms)
        : store_(store), latency_ms_(simulated_latency_ms) {}

    void put_version(const AttributeKey& key, const AttributeVersion& version) {
        maybe_fail();
        store_.put_version(key, version);
    }

    std::optional<AttributeVersion> get_at(const AttributeKey& key, TimestampMs t) const {
        maybe_fail();
        simulate_latency();
        return store_.get_at(key, t);
    }

    std::pair<std::optional<AttributeVersion>, std::optional<AttributeVersion>> get_latest_two(
        const AttributeKey& key) const {
        maybe_fail();
        simulate_latency();
        return store_.get_latest_two(key);
    }

    std::vector<AttributeKey> scan_keys(std::uint32_t partition, std::uint32_t partitions) const {
        maybe_fail();
        simulate_latency();
        return store_.scan_keys(partition, partitions);
    }

    std::int64_t latency_ms() const { return latency_ms_; }

    /// Test hook: invoked before every operation; may throw
    /// StoreUnavailableError to simulate an outage.
    std::function<void()> fault_hook;

private:
    void simulate_latency() const;
    void maybe_fail() const {
        if (fault_hook) fault_hook();
    }

    AttributeStore& store_;
    std::int64_t latency_ms_;
};

}  // namespace aquastream
