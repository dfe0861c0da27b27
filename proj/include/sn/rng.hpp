#ifndef SN_RNG_HPP
#define SN_RNG_HPP

// Reproducible random streams: a (seed, stream_id) pair keys an mt19937_64
// through splitmix64, and all variates are produced by fixed algorithms with
// a fixed consumption order, so output is bit-identical across platforms.

#include <cstdint>
#include <random>

#include "sn/kernels.hpp"

namespace sn {

struct SeededStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
inline std::uint64_t stream_key(SeededStream s) {
    std::uint64_t st = s.seed;
    const std::uint64_t a = splitmix64(st);
    st = a ^ (s.stream_id + 0x632BE59BD9B4E019ULL);
    return splitmix64(st);
}
}  // namespace detail

class RandomStream {
  public:
    explicit RandomStream(SeededStream s) : engine_(detail::stream_key(s)) {}

    // uniform on the open interval (0,1)
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
    }

    // inverse-CDF normal draw; exactly one uniform consumed
    double normal() { return norm_quantile(uniform()); }

    // Marsaglia-Tsang gamma(shape, 1)
    double gamma(double shape) {
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            const double x = normal();
            const double t = 1.0 + c * x;
            if (t <= 0.0) continue;
            const double v = t * t * t;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double chi2(double dof) { return 2.0 * gamma(dof / 2.0); }

  private:
    std::mt19937_64 engine_;
};

}  // namespace sn

#endif
