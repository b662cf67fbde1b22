#include "lindex/multiindex.hpp"

#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/factorials.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <utility>

#include "lindex/errors.hpp"

namespace lindex {

int norm(std::span<const int> k) { return std::accumulate(k.begin(), k.end(), 0); }

double factorial(int k) {
    if (k < 0) return std::numeric_limits<double>::quiet_NaN();
    if (k > static_cast<int>(boost::math::max_factorial<double>::value))
        return std::numeric_limits<double>::infinity();
    return boost::math::unchecked_factorial<double>(static_cast<unsigned>(k));
}

double log_factorial(int k) {
    if (k <= static_cast<int>(boost::math::max_factorial<double>::value)) return std::log(factorial(k));
    return std::lgamma(static_cast<double>(k) + 1.0);
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return boost::math::binomial_coefficient<double>(static_cast<unsigned>(n), static_cast<unsigned>(k));
}

double factorial(std::span<const int> k) {
    double p = 1.0;
    for (int v : k) p *= factorial(v);
    return p;
}

double log_factorial(std::span<const int> k) {
    double s = 0.0;
    for (int v : k) s += log_factorial(v);
    return s;
}

double multinomial(std::span<const int> i, std::span<const int> m) {
    double p = 1.0;
    for (std::size_t t = 0; t < i.size(); ++t) p *= binomial(i[t], m[t]);
    return p;
}

bool leq(std::span<const int> a, std::span<const int> b) {
    for (std::size_t t = 0; t < a.size(); ++t)
        if (a[t] > b[t]) return false;
    return true;
}

std::shared_ptr<const IndexTable> IndexTable::get(int n, int order) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::shared_ptr<const IndexTable>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{n, order}];
    if (!slot) slot = std::make_shared<const IndexTable>(n, order);
    return slot;
}

IndexTable::IndexTable(int n, int order) : n_(n), order_(order) {
    if (n < 1) throw Error("IndexTable: dimension must be >= 1");
    if (order < 0) throw Error("IndexTable: order must be >= 0");
    const int top = order + n + 2;
    binom_.assign(static_cast<std::size_t>(top) + 1, {});
    for (int a = 0; a <= top; ++a) {
        binom_[a].assign(static_cast<std::size_t>(a) + 1, 1);
        for (int b = 1; b < a; ++b) binom_[a][b] = binom_[a - 1][b - 1] + binom_[a - 1][b];
    }
    count_ = count_le(n, order);
    entries_.reserve(count_ * static_cast<std::size_t>(n));
    norms_.reserve(count_);
    shells_.assign(static_cast<std::size_t>(order) + 1, {});

    // Odometer walk in lexicographic order, last coordinate fastest.
    MultiIndex k(static_cast<std::size_t>(n), 0);
    int s = 0;
    while (true) {
        entries_.insert(entries_.end(), k.begin(), k.end());
        norms_.push_back(s);
        shells_[static_cast<std::size_t>(s)].push_back(norms_.size() - 1);
        int pos = n - 1;
        while (pos >= 0) {
            if (s < order) {
                ++k[pos];
                ++s;
                break;
            }
            s -= k[pos];
            k[pos] = 0;
            --pos;
            if (pos >= 0 && s < order) {
                ++k[pos];
                ++s;
                break;
            }
        }
        if (pos < 0) break;
    }
}

std::size_t IndexTable::count_le(int vars, int budget) const {
    if (budget < 0) return 0;
    return binom_[static_cast<std::size_t>(budget + vars)][static_cast<std::size_t>(vars)];
}

std::size_t IndexTable::rank(std::span<const int> k) const {
    std::size_t r = 0;
    int budget = order_;
    for (int i = 0; i < n_; ++i) {
        const int m = n_ - i - 1;
        const int ki = k[i];
        // sum_{v < ki} count_le(m, budget - v) = C(budget+m+1, m+1) - C(budget-ki+m+1, m+1)
        r += count_le(m + 1, budget) - count_le(m + 1, budget - ki);
        budget -= ki;
    }
    return r;
}

bool IndexTable::contains(std::span<const int> k) const {
    if (static_cast<int>(k.size()) != n_) return false;
    int s = 0;
    for (int v : k) {
        if (v < 0) return false;
        s += v;
    }
    return s <= order_;
}

}  // namespace lindex
