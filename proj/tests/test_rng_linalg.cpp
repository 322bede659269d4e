#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <vector>

#include "cellcount/linalg.hpp"
#include "cellcount/rng.hpp"
#include "doctest.h"

using namespace cellcount;

TEST_CASE("seed derivation is order-sensitive and deterministic") {
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
    CHECK(derive_seed(1, 2) != derive_seed(2, 1));
    CHECK(seed_tag("plate") != seed_tag("split"));
}

TEST_CASE("rng streams are reproducible and respect bounds") {
    Rng a(99), b(99);
    for (int i = 0; i < 100; ++i) {
        const auto lo = a.uniform_int(3, 17);
        CHECK(lo == b.uniform_int(3, 17));
        CHECK(lo >= 3);
        CHECK(lo <= 17);
        const double r = a.uniform_real(0.5, 2.5);
        CHECK(r == b.uniform_real(0.5, 2.5));
        CHECK(r >= 0.5);
        CHECK(r < 2.5);
    }
}

TEST_CASE("shuffle permutes and sampling is distinct") {
    Rng rng(4);
    std::vector<int> v{1, 2, 3, 4, 5, 6, 7};
    auto shuffled = v;
    rng.shuffle(shuffled);
    auto sorted = shuffled;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == v);

    const std::vector<int> sample = rng.sample_without_replacement(10, 4);
    CHECK(sample.size() == 4);
    const std::set<int> uniq(sample.begin(), sample.end());
    CHECK(uniq.size() == 4);
    for (int s : sample) {
        CHECK(s >= 0);
        CHECK(s < 10);
    }
}

TEST_CASE("cholesky solves a known symmetric positive definite system") {
    // A = [[4,2],[2,3]], b = [10, 9] -> x = [1.5, 2]
    const std::vector<double> a{4, 2, 2, 3};
    const std::vector<double> b{10, 9};
    const std::vector<double> x = cholesky_solve(a, b);
    REQUIRE(x.size() == 2);
    CHECK(x[0] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("cholesky rejects rank-deficient systems") {
    const std::vector<double> a{1, 1, 1, 1};
    const std::vector<double> b{2, 2};
    CHECK_THROWS_AS(cholesky_solve(a, b), SingularSystem);
}

TEST_CASE("polyfit recovers exact polynomial coefficients") {
    std::vector<double> x, y1, y2;
    for (int i = 0; i <= 10; ++i) {
        const double xi = 20.0 * i + 5.0;
        x.push_back(xi);
        y1.push_back(3.0 + 0.25 * xi);
        y2.push_back(1.0 - 0.5 * xi + 0.01 * xi * xi);
    }
    const std::array<double, 3> lin = polyfit(x, y1, 1);
    CHECK(lin[0] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(lin[1] == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(lin[2] == 0.0);

    const std::array<double, 3> quad = polyfit(x, y2, 2);
    CHECK(quad[0] == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(quad[1] == doctest::Approx(-0.5).epsilon(1e-7));
    CHECK(quad[2] == doctest::Approx(0.01).epsilon(1e-7));

    CHECK(polyval({2.0, 3.0, 0.5}, 4.0) == doctest::Approx(2.0 + 12.0 + 8.0));
}

TEST_CASE("polyfit least squares beats nearby coefficient perturbations") {
    // Noisy points: the returned fit must have no smaller-residual neighbor.
    std::vector<double> x, y;
    Rng rng(12);
    for (int i = 0; i < 25; ++i) {
        const double xi = static_cast<double>(rng.uniform_int(0, 255));
        x.push_back(xi);
        y.push_back(40.0 + 0.2 * xi + rng.uniform_real(-3.0, 3.0));
    }
    const std::array<double, 3> fit = polyfit(x, y, 1);
    auto sse = [&](const std::array<double, 3>& c) {
        double s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - polyval(c, x[i]);
            s += r * r;
        }
        return s;
    };
    const double best = sse(fit);
    for (const double d0 : {-1e-4, 1e-4}) {
        for (const double d1 : {-1e-6, 1e-6}) {
            std::array<double, 3> nudged = fit;
            nudged[0] += d0;
            nudged[1] += d1;
            CHECK(best <= sse(nudged) + 1e-12);
        }
    }
}
