#pragma once
// Shared numeric kernels: exact gelu and its derivative, a stable softmax,
// signed feature hashing, and a portable seeded RNG. Everything here is
// deterministic across platforms, which the training and fixture code rely on.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string_view>

namespace hopqa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline double gelu(double x) {
    return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2));
}

// d/dx gelu(x) = Phi(x) + x * phi(x), with Phi/phi the standard normal CDF/PDF.
inline double gelu_prime(double x) {
    const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    const double cdf = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
    return cdf + x * phi;
}

template <typename Derived>
auto gelu(const Eigen::MatrixBase<Derived>& m) {
    return m.unaryExpr([](double v) { return gelu(v); }).eval();
}

template <typename Derived>
auto gelu_prime(const Eigen::MatrixBase<Derived>& m) {
    return m.unaryExpr([](double v) { return gelu_prime(v); }).eval();
}

inline Vector softmax(const Vector& logits) {
    const double m = logits.maxCoeff();
    Vector e = (logits.array() - m).exp();
    return e / e.sum();
}

// FNV-1a, 64-bit. Used for feature hashing; stable across platforms, unlike
// std::hash.
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// SplitMix64. All randomness in the project (weight init, negative-answer
// sampling, synthetic fixtures) flows through this generator so runs are
// reproducible bit-for-bit from a single seed.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be positive.
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }

private:
    std::uint64_t state_;
};

}  // namespace hopqa
