#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "aquastream/types.hpp"

namespace aquastream {

/// Durable per-partition snapshot of consumed input offsets plus the sink's
/// dedup-rebuild positions. The local attribute cache is deliberately not
/// included; recovery restores it from the attribute store.
struct Checkpoint {
    std::uint32_t partition = 0;
    StreamOffset measurement_offset;  // next measurement offset to consume
    StreamOffset update_offset;       // next update offset to consume
    std::uint64_t epoch = 0;
    /// Highest emitted seq per device, a bounded summary of output progress.
    std::map<std::string, std::uint64_t> emitted_high_watermark;
    /// Output-topic end positions at checkpoint time; the dedup index only
    /// needs rebuilding from here, since earlier outputs came from inputs
    /// that are never replayed.
    std::uint64_t results_offset = 0;
    std::uint64_t dead_letter_offset = 0;

    bool operator==(const Checkpoint&) const = default;
};

/// Checkpoint files live at <dir>/p<partition>/ckpt-<epoch>, written to a
/// temp file and renamed so a crash mid-write never damages the previous
/// checkpoint. The last two epochs are retained; loading falls back to the
/// older one when the newest fails validation.
class CheckpointStore {
public:
    explicit CheckpointStore(std::filesystem::path dir);

    void save(const Checkpoint& ckpt);

    /// Latest valid checkpoint for the partition, or nullopt for cold start.
    std::optional<Checkpoint> load_latest(std::uint32_t partition) const;

    /// Phases: "written" (temp file complete, not yet renamed), "renamed".
    /// A hook that throws between them simulates a crash mid-checkpoint.
    std::function<void(const char* phase)> fault_hook;

    /// Test hook: when set, the temp file is truncated to this many bytes
    /// after writing, simulating a torn checkpoint write.
    std::optional<std::size_t> truncate_temp_to;

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path partition_dir(std::uint32_t partition) const;

    std::filesystem::path dir_;
};

}  // namespace aquastream
