#include "aquastream/engine/checkpoint.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "aquastream/crc32c.hpp"
#include "aquastream/wire.hpp"

namespace aquastream {

namespace {

class CheckpointError : public std::runtime_error {
public:
    explicit CheckpointError(const std::string& what) : std::runtime_error(what) {}
};

std::vector<std::byte> encode_checkpoint(const Checkpoint& c) {
    WireWriter w;
    w.u32(c.partition);
    wire::put_stream_offset(w, c.measurement_offset);
    wire::put_stream_offset(w, c.update_offset);
    w.u64(c.epoch);
    w.u32(static_cast<std::uint32_t>(c.emitted_high_watermark.size()));
    for (const auto& [device, seq] : c.emitted_high_watermark) {
        w.str(device);
        w.u64(seq);
    }
    w.u64(c.results_offset);
    w.u64(c.dead_letter_offset);

    const auto& payload = w.payload();
    std::vector<std::byte> out;
    out.reserve(payload.size() + 8);
    std::uint32_t len = static_cast<std::uint32_t>(payload.size());
    std::uint32_t crc = crc32c(payload);
    for (int i = 0; i < 4; ++i) out.push_back(std::byte{static_cast<std::uint8_t>(len >> (8 * i))});
    for (int i = 0; i < 4; ++i) out.push_back(std::byte{static_cast<std::uint8_t>(crc >> (8 * i))});
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

std::optional<Checkpoint> decode_checkpoint(const std::vector<std::byte>& file) {
    if (file.size() < 8) return std::nullopt;
    std::uint32_t len = 0, crc = 0;
    for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(file[i])) << (8 * i);
    for (int i = 0; i < 4; ++i) crc |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(file[4 + i])) << (8 * i);
    if (file.size() != len + 8u) return std::nullopt;
    std::span<const std::byte> payload{file.data() + 8, len};
    if (crc32c(payload) != crc) return std::nullopt;
    try {
        WireReader r(payload);
        Checkpoint c;
        c.partition = r.u32();
        c.measurement_offset = wire::get_stream_offset(r);
        c.update_offset = wire::get_stream_offset(r);
        c.epoch = r.u64();
        std::uint32_t n = r.u32();
        for (std::uint32_t i = 0; i < n; ++i) {
            std::string device = r.str();
            c.emitted_high_watermark[std::move(device)] = r.u64();
        }
        c.results_offset = r.u64();
        c.dead_letter_offset = r.u64();
        if (!r.exhausted()) return std::nullopt;
        return c;
    } catch (const WireError&) {
        return std::nullopt;
    }
}

}  // namespace

CheckpointStore::CheckpointStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path CheckpointStore::partition_dir(std::uint32_t partition) const {
    return dir_ / ("p" + std::to_string(partition));
}

void CheckpointStore::save(const Checkpoint& ckpt) {
    auto pdir = partition_dir(ckpt.partition);
    std::filesystem::create_directories(pdir);
    auto final_path = pdir / ("ckpt-" + std::to_string(ckpt.epoch));
    auto tmp_path = pdir / ("ckpt-" + std::to_string(ckpt.epoch) + ".tmp");

    auto bytes = encode_checkpoint(ckpt);
    if (truncate_temp_to && *truncate_temp_to < bytes.size()) bytes.resize(*truncate_temp_to);

    int fd = ::open(tmp_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) throw CheckpointError("open " + tmp_path.string() + ": " + std::strerror(errno));
    const auto* p = reinterpret_cast<const char*>(bytes.data());
    std::size_t n = bytes.size();
    while (n > 0) {
        ssize_t w = ::write(fd, p, n);
        if (w < 0) {
            if (errno == EINTR) continue;
            int e = errno;
            ::close(fd);
            throw CheckpointError("write " + tmp_path.string() + ": " + std::strerror(e));
        }
        p += w;
        n -= static_cast<std::size_t>(w);
    }
    ::fdatasync(fd);
    ::close(fd);

    if (fault_hook) fault_hook("written");
    std::filesystem::rename(tmp_path, final_path);
    if (fault_hook) fault_hook("renamed");

    // Keep this epoch and the one before it.
    std::vector<std::pair<std::uint64_t, std::filesystem::path>> old;
    for (const auto& entry : std::filesystem::directory_iterator(pdir)) {
        auto name = entry.path().filename().string();
        if (name.rfind("ckpt-", 0) != 0 || name.ends_with(".tmp")) continue;
        std::uint64_t epoch = std::strtoull(name.c_str() + 5, nullptr, 10);
        if (epoch < ckpt.epoch) old.emplace_back(epoch, entry.path());
    }
    std::sort(old.begin(), old.end());
    while (old.size() > 1) {
        std::filesystem::remove(old.front().second);
        old.erase(old.begin());
    }
}

std::optional<Checkpoint> CheckpointStore::load_latest(std::uint32_t partition) const {
    auto pdir = partition_dir(partition);
    if (!std::filesystem::is_directory(pdir)) return std::nullopt;
    std::vector<std::pair<std::uint64_t, std::filesystem::path>> candidates;
    for (const auto& entry : std::filesystem::directory_iterator(pdir)) {
        auto name = entry.path().filename().string();
        if (name.rfind("ckpt-", 0) != 0 || name.ends_with(".tmp")) continue;
        candidates.emplace_back(std::strtoull(name.c_str() + 5, nullptr, 10), entry.path());
    }
    std::sort(candidates.rbegin(), candidates.rend());
    for (const auto& [epoch, path] : candidates) {
        std::ifstream in(path, std::ios::binary);
        if (!in.is_open()) continue;
        std::vector<std::byte> bytes;
        in.seekg(0, std::ios::end);
        bytes.resize(static_cast<std::size_t>(in.tellg()));
        in.seekg(0);
        in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (auto c = decode_checkpoint(bytes); c && c->partition == partition) return c;
        // Corrupt or mismatched: fall back to the previous epoch.
    }
    return std::nullopt;
}

}  // namespace aquastream
