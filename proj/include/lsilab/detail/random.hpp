#pragma once

#include <cstdint>
#include <random>

namespace lsilab::detail {

// Seeded RNG wrapper. All draws go through explicit bit manipulation of the
// mt19937_64 stream instead of <random> distributions, whose output is
// implementation-defined; this keeps every seeded run bit-reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t bits() { return gen_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in {lo, ..., hi}; modulo bias is irrelevant here
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace lsilab::detail
