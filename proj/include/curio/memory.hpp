#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "curio/models.hpp"
#include "curio/rng.hpp"

namespace curio::memory {

using models::SensorimotorSample;

struct MemoryUpdateReport {
    std::vector<std::size_t> replaced_indices;
    bool was_full = false;
    bool forced = false;  // sweep replaced nothing, one random slot was overwritten
    std::size_t duplicates_created = 0;
};

/// Fixed-capacity episodic memory of sensorimotor samples.
///
/// While not full, every inserted sample is appended. Once full, an insert
/// sweeps all slots and overwrites each one with a copy of the new sample with
/// probability p_em; if the sweep touched nothing, a single uniformly chosen
/// slot is overwritten instead, so every new sample enters the memory.
class EpisodicMemory {
public:
    EpisodicMemory(std::size_t capacity_batches, std::size_t batch_len);

    MemoryUpdateReport insert(const SensorimotorSample& sample, double p_em, Rng& rng);

    /// Sweep variant that treats a whole buffer as the incoming data: overwritten
    /// slots receive a uniformly drawn buffer element. Appends while not full.
    MemoryUpdateReport insert_batch(std::span<const SensorimotorSample> samples, double p_em, Rng& rng);

    std::span<const SensorimotorSample> samples() const { return elements_; }
    std::vector<SensorimotorSample> all_samples() const { return elements_; }

    std::size_t capacity() const { return capacity_; }
    std::size_t capacity_batches() const { return capacity_batches_; }
    std::size_t batch_len() const { return batch_len_; }
    std::size_t size() const { return elements_.size(); }
    bool full() const { return elements_.size() == capacity_; }

    std::uint64_t inserted() const { return inserted_; }
    std::uint64_t replaced() const { return replaced_; }
    std::uint64_t forced_replacements() const { return forced_; }

    /// Fraction of distinct elements; 1.0 for an empty memory.
    double diversity() const;

private:
    using Picker = std::function<const SensorimotorSample&(Rng&)>;
    MemoryUpdateReport sweep(double p_em, Rng& rng, const Picker& pick);

    std::size_t capacity_batches_;
    std::size_t batch_len_;
    std::size_t capacity_;
    std::vector<SensorimotorSample> elements_;
    std::uint64_t inserted_ = 0;
    std::uint64_t replaced_ = 0;
    std::uint64_t forced_ = 0;
};

}  // namespace curio::memory
