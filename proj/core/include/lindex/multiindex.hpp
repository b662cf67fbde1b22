#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace lindex {

using MultiIndex = std::vector<int>;

int norm(std::span<const int> k);

// k! as a double; exact for k <= 22, correctly rounded up to 170, +inf beyond.
double factorial(int k);
double log_factorial(int k);
double binomial(int n, int k);

// K! = k_1! ... k_n!
double factorial(std::span<const int> k);
double log_factorial(std::span<const int> k);

// Product of binomials prod C(i_k, m_k); the multinomial C_I^M.
double multinomial(std::span<const int> i, std::span<const int> m);

bool leq(std::span<const int> a, std::span<const int> b);

// Dense lexicographic enumeration of { K in Z_+^n : ||K|| <= D }.
//
// Entry 0 is the zero index; within the table a componentwise smaller
// K - J (J != 0, J <= K) always precedes K, which is what the triangular
// recurrences in the jet algebra rely on.
class IndexTable {
public:
    static std::shared_ptr<const IndexTable> get(int n, int order);

    int dim() const { return n_; }
    int order() const { return order_; }
    std::size_t size() const { return count_; }

    std::span<const int> at(std::size_t pos) const {
        return {entries_.data() + pos * static_cast<std::size_t>(n_), static_cast<std::size_t>(n_)};
    }
    MultiIndex index(std::size_t pos) const {
        auto s = at(pos);
        return {s.begin(), s.end()};
    }
    int norm_at(std::size_t pos) const { return norms_[pos]; }

    // Position of K in the table; K must satisfy ||K|| <= order().
    std::size_t rank(std::span<const int> k) const;
    bool contains(std::span<const int> k) const;

    // Positions of all K with ||K|| == shell, in table order.
    const std::vector<std::size_t>& shell(int s) const { return shells_[static_cast<std::size_t>(s)]; }

    IndexTable(int n, int order);

private:
    std::size_t count_le(int vars, int budget) const;

    int n_;
    int order_;
    std::size_t count_;
    std::vector<int> entries_;
    std::vector<int> norms_;
    std::vector<std::vector<std::size_t>> shells_;
    // binom_[a][b] = C(a, b) for a <= order + n + 1
    std::vector<std::vector<std::size_t>> binom_;
};

}  // namespace lindex
