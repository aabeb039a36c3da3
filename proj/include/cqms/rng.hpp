// rng.hpp — seeded random streams; every sampler takes an explicit seed and
// derived streams are obtained by mixing a label into the parent seed

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "cqms/matrix.hpp"

namespace cqms {

// splitmix64 step; used to derive child seeds deterministically.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t label) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (label + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view label) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return mix_seed(seed, h);
}

// Seed → stream mapping: a seed fully determines the mt19937_64 stream; child
// streams are seeded with mix_seed(base, label), so sampling order inside one
// labelled stage never perturbs another stage.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : base_(seed), engine_(seed) {}

    Rng child(std::uint64_t label) const { return Rng(mix_seed(base_, label)); }
    Rng child(std::string_view label) const { return Rng(mix_seed(base_, label)); }

    std::uint64_t base_seed() const { return base_; }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }
    double gaussian() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
    std::uint64_t integer(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
    }

    Complex gaussian_complex() { return Complex(gaussian(), gaussian()); }

    // Ginibre matrix: iid standard complex Gaussian entries.
    CMatrix ginibre(Eigen::Index rows, Eigen::Index cols) {
        CMatrix m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = gaussian_complex();
        return m;
    }

    CMatrix hermitian(Eigen::Index n) {
        CMatrix g = ginibre(n, n);
        return 0.5 * (g + g.adjoint());
    }

    // Haar-like (Gaussian-induced) random density matrix GG*/tr(GG*).
    CMatrix density_matrix(Eigen::Index n) {
        CMatrix g = ginibre(n, n);
        CMatrix rho = g * g.adjoint();
        return rho / rho.trace().real();
    }

    CVector unit_vector(Eigen::Index n) {
        CVector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = gaussian_complex();
        return v / v.norm();
    }

    RVector gaussian_vector(Eigen::Index n) {
        RVector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = gaussian();
        return v;
    }

private:
    std::uint64_t base_;
    std::mt19937_64 engine_;
};

} // namespace cqms
