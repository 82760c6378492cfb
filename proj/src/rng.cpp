#include "cps/rng.hpp"

#include <cmath>

#include "cps/stats.hpp"

namespace cps {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t mixed = splitmix64(base) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
    return splitmix64(mixed);
}

double Rng::uniform01() {
    // 53-bit mantissa, shifted to the open interval.
    std::uint64_t bits = gen_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
    return stats::norm_quantile(uniform01());
}

double Rng::cauchy() {
    const double pi = 3.14159265358979323846;
    return std::tan(pi * (uniform01() - 0.5));
}

double Rng::student_t(double df) {
    return stats::student_t_quantile(df, uniform01());
}

} // namespace cps
