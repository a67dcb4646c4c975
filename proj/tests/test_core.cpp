#include <doctest.h>

#include <random>

#include "dipmark/core.hpp"

using namespace dipmark;

TEST_CASE("validate_distribution accepts valid vectors") {
    auto d = validate_distribution({0.5, 0.5});
    CHECK(d.probs == std::vector<double>{0.5, 0.5});
    auto single = validate_distribution({1.0});
    CHECK(single.probs == std::vector<double>{1.0});
}

TEST_CASE("validate_distribution rejects unnormalized vectors") {
    CHECK_THROWS_AS(validate_distribution({0.6, 0.3}), NotNormalized);
    CHECK_THROWS_AS(validate_distribution({}), NotNormalized);
    CHECK_THROWS_AS(validate_distribution({1.1, -0.1}), NegativeProbability);
}

TEST_CASE("validate_distribution clamps float dust and renormalizes") {
    auto d = validate_distribution({1.0, -1e-13, 1e-13});
    CHECK(d.probs[1] == 0.0);
    double sum = d.probs[0] + d.probs[1] + d.probs[2];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("validate_distribution is idempotent") {
    std::mt19937_64 eng(7);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 1 + eng() % 1000;
        std::vector<double> p(n);
        double sum = 0;
        for (auto& v : p) {
            v = static_cast<double>(eng() >> 11);
            sum += v;
        }
        for (auto& v : p) v /= sum;
        auto once = validate_distribution(p);
        auto twice = validate_distribution(once.probs);
        CHECK(once.probs == twice.probs);
    }
}

TEST_CASE("permutation_inverse known values") {
    CHECK(permutation_inverse({{0, 1, 2}}).order == std::vector<TokenId>{0, 1, 2});
    CHECK(permutation_inverse({{2, 0, 1}}).order == std::vector<TokenId>{1, 2, 0});
    CHECK(permutation_inverse({{1, 0}}).order == std::vector<TokenId>{1, 0});
}

TEST_CASE("inverse of inverse is the identity map") {
    std::mt19937_64 eng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Permutation p = Permutation::identity(2 + eng() % 50);
        std::shuffle(p.order.begin(), p.order.end(), eng);
        REQUIRE(p.is_valid());
        CHECK(permutation_inverse(permutation_inverse(p)).order == p.order);
        // and the defining relation q[p[i]] == i
        Permutation q = permutation_inverse(p);
        for (std::uint32_t i = 0; i < p.size(); ++i) CHECK(q.order[p.order[i]] == i);
    }
}

TEST_CASE("secret keys need 16 bytes") {
    CHECK_THROWS_AS(SecretKey::from_hex("00ff"), BadKey);
    CHECK_THROWS_AS(SecretKey::from_hex("000102030405060708090a0b0c0d0e"), BadKey);
    CHECK_THROWS_AS(SecretKey::from_hex("zz0102030405060708090a0b0c0d0e0f"), BadKey);
    auto k = SecretKey::from_hex("000102030405060708090a0b0c0d0e0f");
    CHECK(k.bytes.size() == 16);
    CHECK(k.bytes[1] == 0x01);
}

TEST_CASE("watermark params validation") {
    WatermarkParams ok;
    ok.validate();
    WatermarkParams bad_alpha{1.5, 0.5, 1};
    CHECK_THROWS_AS(bad_alpha.validate(), ConfigError);
    WatermarkParams bad_gamma{0.45, 1.0, 1};
    CHECK_THROWS_AS(bad_gamma.validate(), ConfigError);
    WatermarkParams bad_window{0.45, 0.5, 0};
    CHECK_THROWS_AS(bad_window.validate(), ConfigError);
}

TEST_CASE("vocabulary label count must match size") {
    Vocabulary v{2, {"a", "b"}};
    v.validate();
    Vocabulary bad{3, {"a", "b"}};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
