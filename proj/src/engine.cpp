#include "aquastream/engine/engine.hpp"

#include <chrono>
#include <stdexcept>

#include "aquastream/time.hpp"

namespace aquastream {

Engine::Engine(EngineConfig config, Log& log, AttributeStore& store, std::int64_t store_latency_ms)
    : config_(std::move(config)), log_(log), store_(store), store_latency_ms_(store_latency_ms) {
    config_.validate();
    slots_.reserve(config_.partitions);
    for (std::uint32_t p = 0; p < config_.partitions; ++p) slots_.push_back(std::make_unique<Slot>());
}

Engine::~Engine() {
    try {
        stop();
    } catch (...) {
    }
}

void Engine::set_fault_hooks(std::uint32_t partition, FaultHooks hooks) {
    slots_.at(partition)->pending_hooks = std::move(hooks);
}

void Engine::launch(Slot& slot, std::uint32_t partition) {
    slot.stop.store(false, std::memory_order_release);
    slot.worker = std::make_unique<PartitionWorker>(partition, config_, log_, store_, store_latency_ms_,
                                                    slot.pending_hooks);
    slot.state.store(WorkerState::Running, std::memory_order_release);
    slot.thread = std::thread([&slot] {
        try {
            slot.worker->run(slot.stop);
            slot.state.store(WorkerState::Stopped, std::memory_order_release);
        } catch (const WorkerKilled&) {
            slot.state.store(WorkerState::Killed, std::memory_order_release);
        } catch (const std::exception& e) {
            slot.error = e.what();
            slot.state.store(WorkerState::Failed, std::memory_order_release);
        }
    });
}

void Engine::start() {
    for (std::uint32_t p = 0; p < config_.partitions; ++p) {
        auto& slot = *slots_[p];
        if (slot.thread.joinable()) throw std::logic_error("engine already started");
        launch(slot, p);
    }
}

void Engine::stop() {
    for (auto& slot : slots_) slot->stop.store(true, std::memory_order_release);
    for (auto& slot : slots_) {
        if (slot->thread.joinable()) slot->thread.join();
    }
}

Engine::WorkerState Engine::join_worker(std::uint32_t partition) {
    auto& slot = *slots_.at(partition);
    if (slot.thread.joinable()) slot.thread.join();
    return slot.state.load(std::memory_order_acquire);
}

void Engine::restart_worker(std::uint32_t partition) {
    auto& slot = *slots_.at(partition);
    if (slot.thread.joinable()) slot.thread.join();
    auto state = slot.state.load(std::memory_order_acquire);
    if (state == WorkerState::Running) throw std::logic_error("worker still running");
    if (slot.worker) slot.retired.push_back(std::move(slot.worker->metrics()));
    launch(slot, partition);
}

Engine::WorkerState Engine::worker_state(std::uint32_t partition) const {
    return slots_.at(partition)->state.load(std::memory_order_acquire);
}

const std::string& Engine::worker_error(std::uint32_t partition) const {
    return slots_.at(partition)->error;
}

bool Engine::all_caught_up() const {
    for (const auto& slot : slots_) {
        if (slot->state.load(std::memory_order_acquire) != WorkerState::Running) return false;
        if (!slot->worker->caught_up()) return false;
    }
    return true;
}

bool Engine::wait_drained(std::int64_t timeout_ms) const {
    std::int64_t deadline = steady_ms() + timeout_ms;
    while (steady_ms() < deadline) {
        if (all_caught_up()) return true;
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    return all_caught_up();
}

std::vector<WorkerMetrics> Engine::collect_metrics() {
    std::vector<WorkerMetrics> out;
    for (auto& slot : slots_) {
        for (auto& m : slot->retired) out.push_back(std::move(m));
        slot->retired.clear();
        if (slot->worker) out.push_back(std::move(slot->worker->metrics()));
    }
    return out;
}

}  // namespace aquastream
