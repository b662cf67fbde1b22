#include "lindex/sampling.hpp"

#include <cmath>
#include <numbers>

#include "lindex/errors.hpp"

namespace lindex {

double radical_inverse(std::uint64_t index, unsigned base) {
    double inv = 1.0 / base;
    double f = inv;
    double r = 0.0;
    while (index > 0) {
        r += f * static_cast<double>(index % base);
        index /= base;
        f *= inv;
    }
    return r;
}

unsigned nth_prime(unsigned k) {
    static const unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
    if (k >= std::size(primes)) throw Error("Halton dimension too large");
    return primes[k];
}

std::vector<Point> halton_ball(int n, std::size_t count, double radius, std::uint64_t seed) {
    std::vector<Point> out;
    out.reserve(count);
    std::uint64_t idx = 1 + seed;
    while (out.size() < count) {
        Point z(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            const double x = radius * (2.0 * radical_inverse(idx, nth_prime(2 * j)) - 1.0);
            const double y = radius * (2.0 * radical_inverse(idx, nth_prime(2 * j + 1)) - 1.0);
            z[static_cast<std::size_t>(j)] = {x, y};
        }
        ++idx;
        if (euclid_norm(z) <= radius) out.push_back(std::move(z));
    }
    return out;
}

std::vector<Point> halton_polydisc(const Point& center, const std::vector<double>& radii, std::size_t count,
                                   std::uint64_t seed) {
    const std::size_t n = center.size();
    std::vector<Point> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint64_t idx = 1 + seed + i;
        Point z(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double rho = radii[j] * std::sqrt(radical_inverse(idx, nth_prime(static_cast<unsigned>(2 * j))));
            const double th = 2.0 * std::numbers::pi * radical_inverse(idx, nth_prime(static_cast<unsigned>(2 * j + 1)));
            z[j] = center[j] + std::polar(rho, th);
        }
        out.push_back(std::move(z));
    }
    return out;
}

TorusGrid::TorusGrid(Point center, std::vector<double> radii, int m)
    : center_(std::move(center)), radii_(std::move(radii)), m_(m), size_(1) {
    if (m <= 0) throw EmptyGrid("torus grid needs at least one angle per coordinate");
    for (std::size_t j = 0; j < center_.size(); ++j) size_ *= static_cast<std::size_t>(m);
}

Point TorusGrid::point(std::size_t idx) const {
    Point z(center_.size());
    for (std::size_t j = center_.size(); j-- > 0;) {
        const std::size_t a = idx % static_cast<std::size_t>(m_);
        idx /= static_cast<std::size_t>(m_);
        const double th = 2.0 * std::numbers::pi * static_cast<double>(a) / m_;
        z[j] = center_[j] + std::polar(radii_[j], th);
    }
    return z;
}

std::vector<Point> halton_torus(const Point& center, const std::vector<double>& radii, std::size_t count,
                                std::uint64_t seed) {
    const std::size_t n = center.size();
    std::vector<Point> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Point z(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double th = 2.0 * std::numbers::pi * radical_inverse(1 + seed + i, nth_prime(static_cast<unsigned>(j)));
            z[j] = center[j] + std::polar(radii[j], th);
        }
        out.push_back(std::move(z));
    }
    return out;
}

namespace {
Point gaussian_direction(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    while (true) {
        Point d(n);
        for (auto& v : d) v = {g(rng), g(rng)};
        const double r = euclid_norm(d);
        if (r > 1e-300) {
            for (auto& v : d) v /= r;
            return d;
        }
    }
}
}  // namespace

std::vector<Point> mc_ball(const Point& center, double radius, std::size_t count, std::mt19937_64& rng) {
    const std::size_t n = center.size();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Point d = gaussian_direction(n, rng);
        const double r = radius * std::pow(u(rng), 1.0 / (2.0 * static_cast<double>(n)));
        for (std::size_t j = 0; j < n; ++j) d[j] = center[j] + r * d[j];
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<Point> mc_sphere(const Point& center, double radius, std::size_t count, std::mt19937_64& rng) {
    const std::size_t n = center.size();
    std::vector<Point> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Point d = gaussian_direction(n, rng);
        for (std::size_t j = 0; j < n; ++j) d[j] = center[j] + radius * d[j];
        out.push_back(std::move(d));
    }
    return out;
}

double polydisc_outer_norm(const Point& center, const std::vector<double>& radii) {
    double s = 0.0;
    for (std::size_t j = 0; j < center.size(); ++j) {
        const double r = std::abs(center[j]) + radii[j];
        s += r * r;
    }
    return std::sqrt(s);
}

}  // namespace lindex
