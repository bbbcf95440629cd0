#include "aquastream/log.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <system_error>

#include "aquastream/crc32c.hpp"
#include "aquastream/partition.hpp"
#include "aquastream/time.hpp"

namespace aquastream {

namespace {

constexpr std::uint32_t kMaxRecordBytes = 16u << 20;
constexpr std::uint64_t kFlushEveryRecords = 1000;
constexpr std::int64_t kFlushEveryMs = 10;

[[noreturn]] void throw_errno(const std::string& what) {
    throw LogError(what + ": " + std::strerror(errno));
}

void pwrite_all(int fd, const void* buf, std::size_t n, std::uint64_t pos) {
    const auto* p = static_cast<const char*>(buf);
    while (n > 0) {
        ssize_t w = ::pwrite(fd, p, n, static_cast<off_t>(pos));
        if (w < 0) {
            if (errno == EINTR) continue;
            throw_errno("pwrite");
        }
        p += w;
        pos += static_cast<std::uint64_t>(w);
        n -= static_cast<std::size_t>(w);
    }
}

std::size_t pread_some(int fd, void* buf, std::size_t n, std::uint64_t pos) {
    auto* p = static_cast<char*>(buf);
    std::size_t done = 0;
    while (done < n) {
        ssize_t r = ::pread(fd, p + done, n - done, static_cast<off_t>(pos + done));
        if (r < 0) {
            if (errno == EINTR) continue;
            throw_errno("pread");
        }
        if (r == 0) break;
        done += static_cast<std::size_t>(r);
    }
    return done;
}

std::uint32_t load_u32(const std::byte* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(p[i])) << (8 * i);
    return v;
}

std::uint64_t load_u64(const std::byte* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(p[i])) << (8 * i);
    return v;
}

void store_u32(std::byte* p, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) p[i] = std::byte{static_cast<std::uint8_t>(v >> (8 * i))};
}

void store_u64(std::byte* p, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) p[i] = std::byte{static_cast<std::uint8_t>(v >> (8 * i))};
}

}  // namespace

struct Log::Partition {
    int data_fd = -1;
    int idx_fd = -1;
    std::mutex mu;
    std::atomic<std::uint64_t> next_offset{0};
    std::atomic<std::uint64_t> data_size{0};
    std::uint64_t unflushed = 0;
    std::int64_t last_flush_ms = 0;

    ~Partition() {
        if (data_fd >= 0) ::close(data_fd);
        if (idx_fd >= 0) ::close(idx_fd);
    }

    void sync() {
        if (::fdatasync(data_fd) != 0) throw_errno("fdatasync segment.dat");
        if (::fdatasync(idx_fd) != 0) throw_errno("fdatasync segment.idx");
        unflushed = 0;
        last_flush_ms = steady_ms();
    }

    void maybe_sync() {
        if (unflushed >= kFlushEveryRecords || steady_ms() - last_flush_ms >= kFlushEveryMs) sync();
    }
};

Log::Log(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
    // Reattach any topics already on disk.
    for (const auto& entry : std::filesystem::directory_iterator(root_)) {
        if (entry.is_directory()) open_topic(entry.path().filename().string());
    }
}

Log::~Log() {
    try {
        flush();
    } catch (...) {
    }
}

bool Log::topic_exists(const std::string& name) const {
    std::lock_guard lk(topics_mu_);
    return topics_.contains(name);
}

Topic Log::create_topic(const std::string& name, std::uint32_t partitions) {
    if (name.empty() || partitions == 0) throw LogError("topic needs a name and at least one partition");
    {
        std::lock_guard lk(topics_mu_);
        if (topics_.contains(name)) throw LogError("duplicate topic: " + name);
    }
    auto dir = root_ / name;
    if (std::filesystem::exists(dir)) throw LogError("duplicate topic: " + name);
    for (std::uint32_t p = 0; p < partitions; ++p) {
        std::filesystem::create_directories(dir / std::to_string(p));
        open_partition_files(name, p, /*fresh=*/true);
    }
    return Topic{name, partitions};
}

Topic Log::open_topic(const std::string& name) {
    {
        std::lock_guard lk(topics_mu_);
        if (auto it = topics_.find(name); it != topics_.end()) {
            return Topic{name, static_cast<std::uint32_t>(it->second.size())};
        }
    }
    auto dir = root_ / name;
    if (!std::filesystem::is_directory(dir)) throw LogError("no such topic: " + name);
    std::uint32_t partitions = 0;
    while (std::filesystem::is_directory(dir / std::to_string(partitions))) ++partitions;
    if (partitions == 0) throw LogError("topic has no partitions: " + name);
    for (std::uint32_t p = 0; p < partitions; ++p) open_partition_files(name, p, /*fresh=*/false);
    return Topic{name, partitions};
}

void Log::open_partition_files(const std::string& topic, std::uint32_t p, bool fresh) {
    auto dir = root_ / topic / std::to_string(p);
    auto part = std::make_unique<Partition>();
    part->data_fd = ::open((dir / "segment.dat").c_str(), O_RDWR | O_CREAT, 0644);
    if (part->data_fd < 0) throw_errno("open segment.dat");
    part->idx_fd = ::open((dir / "segment.idx").c_str(), O_RDWR | O_CREAT, 0644);
    if (part->idx_fd < 0) throw_errno("open segment.idx");
    part->last_flush_ms = steady_ms();

    if (!fresh) {
        // Recover: trust the index for all but the tail, re-derive the tail
        // by validating records, and truncate anything torn.
        std::uint64_t data_bytes = std::filesystem::file_size(dir / "segment.dat");
        std::uint64_t entries = std::filesystem::file_size(dir / "segment.idx") / 8;

        auto record_end = [&](std::uint64_t pos) -> std::uint64_t {
            // Returns end position of a valid record at pos, or 0 if invalid.
            std::byte hdr[8];
            if (pos + 8 > data_bytes) return 0;
            if (pread_some(part->data_fd, hdr, 8, pos) != 8) return 0;
            std::uint32_t len = load_u32(hdr);
            std::uint32_t crc = load_u32(hdr + 4);
            if (len > kMaxRecordBytes || pos + 8 + len > data_bytes) return 0;
            std::vector<std::byte> payload(len);
            if (pread_some(part->data_fd, payload.data(), len, pos + 8) != len) return 0;
            if (crc32c(payload) != crc) return 0;
            return pos + 8 + len;
        };

        // Drop trailing index entries that do not point at valid records.
        std::uint64_t tail = 0;
        while (entries > 0) {
            std::byte e[8];
            if (pread_some(part->idx_fd, e, 8, (entries - 1) * 8) != 8) {
                --entries;
                continue;
            }
            std::uint64_t pos = load_u64(e);
            if (std::uint64_t end = record_end(pos); end != 0) {
                tail = end;
                break;
            }
            --entries;
        }

        // Recover complete records written after the last index entry.
        while (true) {
            std::uint64_t end = record_end(tail);
            if (end == 0) break;
            std::byte e[8];
            store_u64(e, tail);
            pwrite_all(part->idx_fd, e, 8, entries * 8);
            ++entries;
            tail = end;
        }

        if (::ftruncate(part->data_fd, static_cast<off_t>(tail)) != 0) throw_errno("ftruncate segment.dat");
        if (::ftruncate(part->idx_fd, static_cast<off_t>(entries * 8)) != 0) throw_errno("ftruncate segment.idx");
        part->next_offset.store(entries, std::memory_order_release);
        part->data_size.store(tail, std::memory_order_release);
    }

    std::lock_guard lk(topics_mu_);
    auto& vec = topics_[topic];
    if (vec.size() <= p) vec.resize(p + 1);
    vec[p] = std::move(part);
}

Log::Partition& Log::partition(const Topic& topic, std::uint32_t p) const {
    if (p >= topic.partitions) {
        throw LogError("partition " + std::to_string(p) + " out of range for topic " + topic.name);
    }
    std::lock_guard lk(topics_mu_);
    auto it = topics_.find(topic.name);
    if (it == topics_.end() || p >= it->second.size()) throw LogError("unknown topic: " + topic.name);
    return *it->second[p];
}

StreamOffset Log::append(const Topic& topic, std::string_view key, std::span<const std::byte> payload) {
    std::uint32_t p = partition_for(key, topic.partitions);
    Partition& part = partition(topic, p);

    // Inner payload: u16 key length, key bytes, i64 append time, user payload.
    if (key.size() > 0xffff) throw LogError("record key too long");
    std::uint32_t inner_len = static_cast<std::uint32_t>(2 + key.size() + 8 + payload.size());
    if (inner_len > kMaxRecordBytes) throw LogError("record too large");

    std::vector<std::byte> frame(8 + inner_len);
    TimestampMs append_time = now_wall_ms();
    std::byte* q = frame.data() + 8;
    q[0] = std::byte{static_cast<std::uint8_t>(key.size() & 0xff)};
    q[1] = std::byte{static_cast<std::uint8_t>(key.size() >> 8)};
    std::memcpy(q + 2, key.data(), key.size());
    store_u64(q + 2 + key.size(), static_cast<std::uint64_t>(append_time));
    if (!payload.empty()) std::memcpy(q + 2 + key.size() + 8, payload.data(), payload.size());
    store_u32(frame.data(), inner_len);
    store_u32(frame.data() + 4, crc32c({frame.data() + 8, inner_len}));

    std::lock_guard lk(part.mu);
    std::uint64_t offset = part.next_offset.load(std::memory_order_relaxed);
    std::uint64_t pos = part.data_size.load(std::memory_order_relaxed);
    pwrite_all(part.data_fd, frame.data(), frame.size(), pos);
    std::byte e[8];
    store_u64(e, pos);
    pwrite_all(part.idx_fd, e, 8, offset * 8);
    part.data_size.store(pos + frame.size(), std::memory_order_release);
    part.next_offset.store(offset + 1, std::memory_order_release);
    ++part.unflushed;
    part.maybe_sync();
    return StreamOffset{topic.name, p, offset};
}

std::vector<LogRecord> Log::read(const Topic& topic, std::uint32_t p, std::uint64_t from,
                                 std::size_t max) const {
    Partition& part = partition(topic, p);
    std::uint64_t end = part.next_offset.load(std::memory_order_acquire);
    if (from >= end || max == 0) return {};
    std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(max, end - from));

    // Snapshot taken after `end`: covers every record below it.
    std::uint64_t data_end = part.data_size.load(std::memory_order_acquire);

    // One extra index entry, when it exists, bounds the byte span to exactly
    // the requested records.
    bool have_next = from + n < end;
    std::vector<std::byte> idx((n + (have_next ? 1 : 0)) * 8);
    if (pread_some(part.idx_fd, idx.data(), idx.size(), from * 8) != idx.size()) {
        throw LogError("index read short for " + topic.name);
    }
    std::uint64_t first_pos = load_u64(idx.data());
    std::uint64_t span_end = have_next ? load_u64(idx.data() + n * 8) : data_end;

    std::vector<std::byte> data(static_cast<std::size_t>(span_end - first_pos));
    std::size_t got = pread_some(part.data_fd, data.data(), data.size(), first_pos);
    if (got < data.size()) data.resize(got);

    std::vector<LogRecord> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t pos = load_u64(idx.data() + i * 8) - first_pos;
        if (pos + 8 > data.size()) throw LogError("segment read short for " + topic.name);
        std::uint32_t len = load_u32(data.data() + pos);
        std::uint32_t crc = load_u32(data.data() + pos + 4);
        if (pos + 8 + len > data.size()) throw LogError("segment read short for " + topic.name);
        std::span<const std::byte> inner{data.data() + pos + 8, len};
        if (crc32c(inner) != crc) {
            throw LogError("checksum mismatch in " + topic.name + "/" + std::to_string(p) + " at offset " +
                           std::to_string(from + i));
        }
        if (inner.size() < 10) throw LogError("record too short in " + topic.name);
        std::size_t klen = static_cast<std::size_t>(static_cast<std::uint8_t>(inner[0])) |
                           (static_cast<std::size_t>(static_cast<std::uint8_t>(inner[1])) << 8);
        if (2 + klen + 8 > inner.size()) throw LogError("record key overruns record in " + topic.name);
        LogRecord rec;
        rec.offset = from + i;
        rec.key.assign(reinterpret_cast<const char*>(inner.data() + 2), klen);
        rec.append_time = static_cast<TimestampMs>(load_u64(inner.data() + 2 + klen));
        rec.payload.assign(inner.begin() + 2 + klen + 8, inner.end());
        out.push_back(std::move(rec));
    }
    return out;
}

std::uint64_t Log::end_offset(const Topic& topic, std::uint32_t p) const {
    return partition(topic, p).next_offset.load(std::memory_order_acquire);
}

void Log::flush_partition(const Topic& topic, std::uint32_t p) {
    Partition& part = partition(topic, p);
    std::lock_guard lk(part.mu);
    part.sync();
}

void Log::flush() {
    std::vector<Partition*> parts;
    {
        std::lock_guard lk(topics_mu_);
        for (auto& [name, vec] : topics_) {
            for (auto& p : vec) parts.push_back(p.get());
        }
    }
    for (auto* p : parts) {
        std::lock_guard lk(p->mu);
        p->sync();
    }
}

}  // namespace aquastream
