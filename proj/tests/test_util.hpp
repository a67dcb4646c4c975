#pragma once

#include <cmath>
#include <random>

#include "dipmark/core.hpp"

// absolute-tolerance comparison
#define CHECK_NEAR(a, b, tol) CHECK(std::abs((a) - (b)) <= (tol))
#define REQUIRE_NEAR(a, b, tol) REQUIRE(std::abs((a) - (b)) <= (tol))

namespace dipmark::testutil {

inline double unit(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline Distribution random_dist(std::mt19937_64& eng, std::uint32_t n) {
    std::vector<double> p(n);
    double sum = 0;
    for (auto& v : p) {
        v = 1e-12 + unit(eng);
        sum += v;
    }
    for (auto& v : p) v /= sum;
    return validate_distribution(std::move(p));
}

inline Permutation random_perm(std::mt19937_64& eng, std::uint32_t n) {
    Permutation p = Permutation::identity(n);
    std::shuffle(p.order.begin(), p.order.end(), eng);
    return p;
}

}  // namespace dipmark::testutil
