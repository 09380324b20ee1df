#include "fuzzytomo/rng.hpp"

namespace fuzzytomo {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t substream) noexcept {
    return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ (substream * 0xd1b54a32d192ed03ULL));
}

}  // namespace fuzzytomo
