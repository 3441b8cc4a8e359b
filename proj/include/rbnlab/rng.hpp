#ifndef RBNLAB_RNG_HPP
#define RBNLAB_RNG_HPP

#include <cstdint>
#include <random>

namespace rbnlab {

// SplitMix64 step; used to derive well-separated engine seeds from (seed, stream).
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seedable generator with independent streams per (seed, stream_id): one stream
// per Monte Carlo sample. Gaussians via Box-Muller on explicit uniforms so that
// output is identical across standard libraries.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream = 0) {
        std::uint64_t s = seed;
        std::uint64_t a = splitmix64(s);
        s ^= 0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL;
        std::uint64_t b = splitmix64(s);
        std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                          static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        gen_.seed(seq);
    }

    // uniform on (0,1]
    double uniform() {
        return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1p-53;
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double c = std::cos(2.0 * pi_ * u2);
        double sn = std::sin(2.0 * pi_ * u2);
        spare_ = r * sn;
        have_spare_ = true;
        return r * c;
    }

    std::uint64_t raw() { return gen_(); }

private:
    static constexpr double pi_ = 3.14159265358979323846;
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace rbnlab

#endif
