#include "aquastream/attribute_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <thread>

#include "aquastream/crc32c.hpp"
#include "aquastream/partition.hpp"
#include "aquastream/time.hpp"
#include "aquastream/wire.hpp"

namespace aquastream {

namespace {

constexpr std::uint64_t kFlushEveryRecords = 1000;
constexpr std::int64_t kFlushEveryMs = 10;

[[noreturn]] void throw_errno(const std::string& what) {
    throw StoreError(what + ": " + std::strerror(errno));
}

}  // namespace

AttributeStore::AttributeStore(Options opts) : opts_(std::move(opts)) {
    if (opts_.journal_path.empty()) return;
    std::filesystem::create_directories(opts_.journal_path.parent_path());
    replay_journal();
    journal_fd_ = ::open(opts_.journal_path.c_str(), O_WRONLY | O_CREAT, 0644);
    if (journal_fd_ < 0) throw_errno("open journal");
    journal_last_flush_ms_ = steady_ms();
}

AttributeStore::~AttributeStore() {
    if (journal_fd_ >= 0) {
        ::fdatasync(journal_fd_);
        ::close(journal_fd_);
    }
}

void AttributeStore::replay_journal() {
    std::ifstream in(opts_.journal_path, std::ios::binary);
    if (!in.is_open()) return;
    std::vector<std::byte> file((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    std::uint64_t good_end = 0;
    while (pos + 4 <= file.size()) {
        std::uint32_t len = 0;
        for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(file[pos + i])) << (8 * i);
        if (pos + 4 + len > file.size()) break;  // torn tail
        try {
            AttributeUpdate u = wire::decode_attribute_update({file.data() + pos, 4 + len});
            auto& hist = histories_[u.key];
            auto it = std::lower_bound(
                hist.begin(), hist.end(), u.version.valid_from,
                [](const AttributeVersion& v, TimestampMs t) { return v.valid_from < t; });
            if (it == hist.end() || it->valid_from != u.version.valid_from) hist.insert(it, u.version);
        } catch (const WireError&) {
            break;
        }
        pos += 4 + len;
        good_end = pos;
    }
    journal_pos_ = good_end;
    if (good_end < file.size()) std::filesystem::resize_file(opts_.journal_path, good_end);
}

void AttributeStore::journal_append(const AttributeKey& key, const AttributeVersion& version) {
    if (journal_fd_ < 0) return;
    auto framed = wire::encode(AttributeUpdate{key, version});
    const auto* p = reinterpret_cast<const char*>(framed.data());
    std::size_t n = framed.size();
    std::uint64_t pos = journal_pos_;
    while (n > 0) {
        ssize_t w = ::pwrite(journal_fd_, p, n, static_cast<off_t>(pos));
        if (w < 0) {
            if (errno == EINTR) continue;
            throw_errno("pwrite journal");
        }
        p += w;
        pos += static_cast<std::uint64_t>(w);
        n -= static_cast<std::size_t>(w);
    }
    journal_pos_ = pos;
    if (++journal_unflushed_ >= kFlushEveryRecords || steady_ms() - journal_last_flush_ms_ >= kFlushEveryMs) {
        if (::fdatasync(journal_fd_) != 0) throw_errno("fdatasync journal");
        journal_unflushed_ = 0;
        journal_last_flush_ms_ = steady_ms();
    }
}

void AttributeStore::put_version(const AttributeKey& key, const AttributeVersion& version) {
    std::unique_lock lk(mu_);
    auto& hist = histories_[key];
    auto it = std::lower_bound(hist.begin(), hist.end(), version.valid_from,
                               [](const AttributeVersion& v, TimestampMs t) { return v.valid_from < t; });
    if (it != hist.end() && it->valid_from == version.valid_from) {
        if (it->value == version.value) return;  // idempotent re-insert
        throw StoreConflictError("conflicting value at valid_from=" + std::to_string(version.valid_from) +
                                 " for " + key.device.id + "/" + key.attribute);
    }
    hist.insert(it, version);
    journal_append(key, version);
}

std::optional<AttributeVersion> AttributeStore::get_at(const AttributeKey& key, TimestampMs t) const {
    std::shared_lock lk(mu_);
    auto hit = histories_.find(key);
    if (hit == histories_.end()) return std::nullopt;
    const auto& hist = hit->second;
    auto it = std::upper_bound(hist.begin(), hist.end(), t,
                               [](TimestampMs t0, const AttributeVersion& v) { return t0 < v.valid_from; });
    if (it == hist.begin()) return std::nullopt;
    return *std::prev(it);
}

std::pair<std::optional<AttributeVersion>, std::optional<AttributeVersion>> AttributeStore::get_latest_two(
    const AttributeKey& key) const {
    std::shared_lock lk(mu_);
    auto hit = histories_.find(key);
    if (hit == histories_.end() || hit->second.empty()) return {std::nullopt, std::nullopt};
    const auto& hist = hit->second;
    std::optional<AttributeVersion> current = hist.back();
    std::optional<AttributeVersion> previous;
    if (hist.size() >= 2) previous = hist[hist.size() - 2];
    return {current, previous};
}

std::vector<AttributeKey> AttributeStore::scan_keys(std::uint32_t partition, std::uint32_t partitions) const {
    if (partitions == 0) throw StoreError("scan_keys: partitions must be >= 1");
    std::shared_lock lk(mu_);
    std::vector<AttributeKey> keys;
    for (const auto& [key, hist] : histories_) {
        if (!hist.empty() && partition_for(key.device, partitions) == partition) keys.push_back(key);
    }
    return keys;  // histories_ is ordered, so this is lexicographic
}

std::size_t AttributeStore::key_count() const {
    std::shared_lock lk(mu_);
    return histories_.size();
}

std::size_t AttributeStore::version_count(const AttributeKey& key) const {
    std::shared_lock lk(mu_);
    auto it = histories_.find(key);
    return it == histories_.end() ? 0 : it->second.size();
}

void AttributeStore::flush() {
    std::unique_lock lk(mu_);
    if (journal_fd_ >= 0 && ::fdatasync(journal_fd_) != 0) throw_errno("fdatasync journal");
    journal_unflushed_ = 0;
    journal_last_flush_ms_ = steady_ms();
}

void RemoteStoreClient::simulate_latency() const {
    if (latency_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(latency_ms_));
}

}  // namespace aquastream
