#pragma once

#include <cstdint>
#include <random>

#include <boost/random/mersenne_twister.hpp>

namespace currents {

struct SeededStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

using Engine = boost::random::mt19937_64;

// std::seed_seq has a fully specified algorithm, so the engine state depends only on
// (seed, stream_id).
inline Engine make_engine(const SeededStream& s) {
    std::seed_seq seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32),
                      static_cast<std::uint32_t>(s.stream_id), static_cast<std::uint32_t>(s.stream_id >> 32)};
    return Engine(seq);
}

}  // namespace currents
