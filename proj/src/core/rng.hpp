#pragma once

// Philox4x32-10 counter-based generator.
//
// A stream is identified by (seed, stream_id). Block b of a stream is
//   philox4x32_10(counter = {lo32(b), hi32(b), lo32(stream_id), hi32(stream_id)},
//                 key     = {lo32(seed), hi32(seed)})
// and yields two 64-bit words (out[0] | out[1] << 32, out[2] | out[3] << 32),
// consumed in that order. Streams with different ids never share a counter,
// so they are independent by construction and can be generated in any order.

#include <array>
#include <cstdint>

namespace berkson {

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t next_u64();
    /// 53-bit uniform on the open interval (0, 1).
    double uniform();
    /// Standard normal via Box-Muller; the second variate is cached.
    double normal();
    /// Gamma(shape, 1) via Marsaglia-Tsang (shape >= 1) with the u^(1/shape)
    /// boost for shape < 1.
    double gamma(double shape);

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_id_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

} // namespace berkson
