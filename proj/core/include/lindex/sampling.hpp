#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "lindex/expr.hpp"

namespace lindex {

// Samples never reach |z| = 1; the cone condition is singular there.
inline constexpr double kBoundaryExclusion = 1e-6;
inline constexpr std::uint64_t kDefaultMonteCarloSeed = 0x5EED;

double radical_inverse(std::uint64_t index, unsigned base);
unsigned nth_prime(unsigned k);

// Deterministic Halton points in the closed ball |z| <= radius of C^n, by
// rejection from the cube [-radius, radius]^{2n}. The seed offsets the
// sequence start so distinct seeds give disjoint stretches.
std::vector<Point> halton_ball(int n, std::size_t count, double radius, std::uint64_t seed = 0);

// Halton points filling the closed polydisc D^n[center, radii] (area-uniform per disc).
std::vector<Point> halton_polydisc(const Point& center, const std::vector<double>& radii, std::size_t count,
                                   std::uint64_t seed = 0);

// Product grid of m equally spaced angles per coordinate on the torus T^n(center, radii).
// Point number `idx` in [0, m^n) is generated on demand.
class TorusGrid {
public:
    TorusGrid(Point center, std::vector<double> radii, int m);
    std::size_t size() const { return size_; }
    Point point(std::size_t idx) const;

private:
    Point center_;
    std::vector<double> radii_;
    int m_;
    std::size_t size_;
};

// Halton points on the torus (angles only).
std::vector<Point> halton_torus(const Point& center, const std::vector<double>& radii, std::size_t count,
                                std::uint64_t seed = 0);

// Uniform random points in the closed Euclidean ball / on the sphere of C^n.
std::vector<Point> mc_ball(const Point& center, double radius, std::size_t count, std::mt19937_64& rng);
std::vector<Point> mc_sphere(const Point& center, double radius, std::size_t count, std::mt19937_64& rng);

// Largest |z| over the closed polydisc D^n[center, radii].
double polydisc_outer_norm(const Point& center, const std::vector<double>& radii);

}  // namespace lindex
