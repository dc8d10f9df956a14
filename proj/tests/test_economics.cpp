#include "doctest.h"

#include <cmath>

#include "shelby/economics.hpp"
#include "shelby/errors.hpp"

using namespace shelby;

TEST_CASE("normalize_rewards: degenerate split routes everything to storage") {
    const auto r = normalize_rewards(0.023, 0.05, 1024, 7, 30, 1.0);
    CHECK(r.rwd_au == 0.0);
    CHECK(r.rwd_st_per_gb_month == 0.023);
}

TEST_CASE("normalize_rewards: identity rwd_st + n_a * rwd_au = W to 1e-12 relative") {
    for (double w : {0.023, 0.1, 2.5}) {
        for (double split : {0.2, 0.5, 0.7, 0.95}) {
            const auto r = normalize_rewards(w, 0.0076, 1024, 7, 30, split);
            const double residual = r.rwd_st_per_gb_month + r.n_a * r.rwd_au - w;
            CHECK(std::abs(residual) <= 1e-12 * w);
        }
    }
}

TEST_CASE("normalize_rewards: n_a is the three-term product") {
    const auto r = normalize_rewards(0.023, 0.0076, 1024, 7, 30, 0.5);
    CHECK(r.n_a == doctest::Approx(0.0076 * 1024 * 7 * 30).epsilon(1e-12));
    CHECK(r.n_a == doctest::Approx(1634.304).epsilon(1e-9));
}

TEST_CASE("normalize_rewards: zero audit volume with auditor pay is an error") {
    CHECK_THROWS_AS((void)normalize_rewards(0.023, 0.0, 1024, 7, 30, 0.5), Error);
    CHECK_NOTHROW((void)normalize_rewards(0.023, 0.0, 1024, 7, 30, 1.0));
}

TEST_CASE("store-vs-retrieve threshold reproduces the AWS-derived bound") {
    SUBCASE("rounded paper inputs give 0.0077") {
        CHECK(min_audit_probability(0.00000077, 5 * 0.00002) ==
              doctest::Approx(0.0077).epsilon(1e-9));
    }
    SUBCASE("unrounded AWS prices land inside [0.0076, 0.0077]") {
        const auto costs = aws_chunk_costs(0.023, 0.02, 5.0);
        const double min_pa = min_audit_probability(costs.c_s, costs.c_r);
        CHECK(min_pa >= 0.0076);
        CHECK(min_pa <= 0.0077);
    }
    SUBCASE("free storage is satisfied for any p_a") {
        EconomicParams p;
        p.c_s = 0.0;
        p.p_a = 1e-9;
        CHECK(check_store_vs_retrieve(p).satisfied);
    }
    SUBCASE("just below threshold fails with negative margin") {
        EconomicParams p;
        p.p_a = 0.99 * min_audit_probability(p.c_s, p.c_r);
        const auto e = check_store_vs_retrieve(p);
        CHECK_FALSE(e.satisfied);
        CHECK(e.margin < 0.0);
    }
}

TEST_CASE("fake-storage detection bound") {
    SUBCASE("10% faking at C=50 risks more than 0.63") {
        const double p_sa = fake_storage_catch_bound(0.1, 50);
        CHECK(p_sa > 0.63);
        CHECK(p_sa >= 0.632);
        CHECK(p_sa == doctest::Approx(1.0 - std::pow(0.9, 9.5)).epsilon(1e-12));
    }
    SUBCASE("all-fake storage is always caught") {
        CHECK(fake_storage_catch_bound(1.0, 1) == 1.0);
        CHECK(fake_storage_catch_bound(1.0, 50) == 1.0);
    }
    SUBCASE("half fake at C=50: 1 - 2^-37.5") {
        CHECK(fake_storage_catch_bound(0.5, 50) ==
              doctest::Approx(1.0 - std::pow(2.0, -37.5)).epsilon(1e-12));
    }
    SUBCASE("monotone in prct_fake and in C") {
        for (std::uint32_t c = 1; c <= 80; c += 4) {
            double prev = -1.0;
            for (double pf = 0.02; pf <= 1.0; pf += 0.02) {
                const double v = fake_storage_catch_bound(pf, c);
                CHECK(v >= prev);
                prev = v;
                if (c > 1) CHECK(v >= fake_storage_catch_bound(pf, c - 1) - 1e-15);
            }
        }
    }
}

TEST_CASE("fake-storage inequality direction") {
    EconomicParams p;
    p.rwd_st = 2e-6;
    p.p_a = 0.05;
    p.S_a = 0.001;
    p.C = 50;
    const auto e = check_fake_storage(p, 0.1, 30.0);
    // LHS ~ 0.632 * 1e-3, RHS ~ 0.95 * 2e-6 * 3.
    CHECK(e.satisfied);
    CHECK(e.lhs > e.rhs);

    p.S_a = 1e-8;
    CHECK_FALSE(check_fake_storage(p, 0.1, 30.0).satisfied);
}

TEST_CASE("audit-the-auditor calibration") {
    EconomicParams p;
    p.rwd_au = 1e-6;
    p.p_ata = 0.01;
    p.epsilon = 0.01;

    SUBCASE("bound is rwd_au / (p_ata * epsilon)") {
        p.S_ata = 0.0099;
        CHECK_FALSE(check_ata_calibration(p).satisfied);
        p.S_ata = 0.0101;
        CHECK(check_ata_calibration(p).satisfied);
    }
    SUBCASE("exactly at the bound: satisfied with ~zero margin") {
        p.S_ata = p.rwd_au / (p.p_ata * p.epsilon);
        const auto e = check_ata_calibration(p);
        CHECK(e.satisfied);
        CHECK(e.margin == doctest::Approx(0.0).epsilon(1e-9));
    }
    SUBCASE("limiting case epsilon = 1, p_ata = 1") {
        p.epsilon = 1.0;
        p.p_ata = 1.0;
        p.S_ata = p.rwd_au;
        CHECK(check_ata_calibration(p).satisfied);
    }
}

TEST_CASE("monte carlo catch rate stays above the closed-form bound") {
    const double bound = fake_storage_catch_bound(0.1, 50);
    const double rate = mc_fake_storage_catch(0.1, 50, 1000, 20000, 99);
    const double sigma = std::sqrt(rate * (1.0 - rate) / 20000);
    CHECK(rate >= bound - 3.0 * sigma);
}

TEST_CASE("report serialization and thresholds") {
    EconomicParams p;
    const auto norm = normalize_rewards(0.1, 0.2, 1024, 7, 30, 0.7);
    p.p_a = 0.2;
    p.rwd_st = norm.rwd_st_per_chunk_epoch;
    p.rwd_au = norm.rwd_au;
    p.n_a = norm.n_a;
    p.S_ata = 10.0 * p.rwd_au / (p.p_ata * p.epsilon);

    const auto report = full_report(p, 0.1, 30.0);
    CHECK(report.entries.size() == 4);
    CHECK(report.all_satisfied());
    CHECK(report.all_with_ratio(2.0));
    CHECK(report.to_json().find("\"all_satisfied\": true") != std::string::npos);
    CHECK(report.to_table().find("store_vs_retrieve") != std::string::npos);

    // JSON round trip of the parameter file.
    const auto back = EconomicParams::from_json(p.to_json());
    CHECK(back.rwd_st == p.rwd_st);
    CHECK(back.S_ata == p.S_ata);
    CHECK_THROWS_AS((void)EconomicParams::from_json("{nope"), Error);
}
