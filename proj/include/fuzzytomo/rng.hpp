#pragma once

// Counter-based seed splitting. Every (experiment, config) pair gets its own
// std::mt19937_64 seeded through SplitMix64 of the master seed and the two
// counters, so results never depend on scheduling order.

#include <cstdint>
#include <random>
#include <string_view>

namespace fuzzytomo {

/// Pinned in output metadata; bump when the derivation below changes.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64/splitmix64-substreams/v1";

[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x) noexcept;

[[nodiscard]] std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream,
                                           std::uint64_t substream) noexcept;

[[nodiscard]] inline std::mt19937_64 substream_engine(std::uint64_t master, std::uint64_t stream,
                                                      std::uint64_t substream) {
    return std::mt19937_64(substream_seed(master, stream, substream));
}

}  // namespace fuzzytomo
