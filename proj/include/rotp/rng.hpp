// SPDX-License-Identifier: Apache-2.0
//
// Seeded portable RNG. std::mt19937_64 has a standard-specified sequence;
// the uniform mappings below avoid std::uniform_*_distribution, whose
// output is implementation-defined, so identical seeds reproduce
// bit-identical streams on every platform.

#pragma once

#include <cstdint>
#include <random>

namespace rotp {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // [0, 1) with 53 random bits
    double next_double() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // [0, n), multiply-shift; slight modulo bias is irrelevant here and the
    // result is identical everywhere
    std::uint64_t uniform_int(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(gen_()) * n) >> 64);
    }

    // {lo, ..., hi} inclusive
    std::int64_t uniform_int_range(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(uniform_int(static_cast<std::uint64_t>(hi - lo + 1)));
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace rotp
