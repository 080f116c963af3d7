#include "curio/memory.hpp"

#include <algorithm>
#include <stdexcept>

namespace curio::memory {

namespace {

void check_probability(double p_em) {
    if (!(p_em >= 0.0 && p_em <= 1.0)) throw std::invalid_argument("p_em must lie in [0, 1]");
}

std::vector<double> key_of(const SensorimotorSample& s) {
    std::vector<double> k{s.motor.x, s.motor.y};
    k.insert(k.end(), s.code.data(), s.code.data() + s.code.size());
    return k;
}

}  // namespace

EpisodicMemory::EpisodicMemory(std::size_t capacity_batches, std::size_t batch_len)
    : capacity_batches_(capacity_batches), batch_len_(batch_len), capacity_(capacity_batches * batch_len) {
    if (batch_len == 0) throw std::invalid_argument("memory batch_len must be >= 1");
    elements_.reserve(capacity_);
}

MemoryUpdateReport EpisodicMemory::sweep(double p_em, Rng& rng, const Picker& pick) {
    MemoryUpdateReport report;
    report.was_full = true;
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        if (bernoulli(rng, p_em)) {
            elements_[i] = pick(rng);
            report.replaced_indices.push_back(i);
        }
    }
    if (report.replaced_indices.empty()) {
        const std::size_t victim = uniform_index(rng, elements_.size());
        elements_[victim] = pick(rng);
        report.replaced_indices.push_back(victim);
        report.forced = true;
        ++forced_;
    }
    report.duplicates_created = report.replaced_indices.size() - 1;
    replaced_ += report.replaced_indices.size();
    return report;
}

MemoryUpdateReport EpisodicMemory::insert(const SensorimotorSample& sample, double p_em, Rng& rng) {
    check_probability(p_em);
    if (capacity_ == 0) return {};
    ++inserted_;
    if (!full()) {
        elements_.push_back(sample);
        return {};
    }
    return sweep(p_em, rng, [&](Rng&) -> const SensorimotorSample& { return sample; });
}

MemoryUpdateReport EpisodicMemory::insert_batch(std::span<const SensorimotorSample> samples, double p_em,
                                                Rng& rng) {
    check_probability(p_em);
    MemoryUpdateReport report;
    if (capacity_ == 0 || samples.empty()) return report;
    std::size_t next = 0;
    while (next < samples.size() && !full()) {
        elements_.push_back(samples[next++]);
        ++inserted_;
    }
    if (next == samples.size()) return report;
    const auto rest = samples.subspan(next);
    inserted_ += rest.size();
    return sweep(p_em, rng, [&](Rng& r) -> const SensorimotorSample& { return rest[uniform_index(r, rest.size())]; });
}

double EpisodicMemory::diversity() const {
    if (elements_.empty()) return 1.0;
    std::vector<std::vector<double>> keys;
    keys.reserve(elements_.size());
    for (const auto& e : elements_) keys.push_back(key_of(e));
    std::sort(keys.begin(), keys.end());
    const auto distinct = static_cast<double>(std::unique(keys.begin(), keys.end()) - keys.begin());
    return distinct / static_cast<double>(elements_.size());
}

}  // namespace curio::memory
