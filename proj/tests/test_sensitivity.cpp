#include <doctest.h>

#include "tbctl/errors.hpp"
#include "tbctl/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

using namespace tbctl;

namespace {

/// Brute-force partial correlation via explicit normal equations and Gaussian
/// elimination; an independent route from the QR-based implementation.
double prcc_oracle(const SampleMatrix& samples, const std::vector<double>& outputs, int target) {
    const int n = samples.rows;
    const int k = samples.cols;

    const auto ranks_of = [](std::vector<double> v) {
        const int m = static_cast<int>(v.size());
        std::vector<int> idx(m);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
        std::vector<double> r(m);
        for (int i = 0; i < m; ++i) r[idx[i]] = i + 1.0;
        return r; // no tie handling; oracle inputs are tie free
    };

    std::vector<std::vector<double>> cols(k);
    for (int j = 0; j < k; ++j) {
        std::vector<double> c(n);
        for (int i = 0; i < n; ++i) c[i] = samples(i, j);
        cols[j] = ranks_of(c);
    }
    const std::vector<double> y = ranks_of(outputs);

    // Design: intercept + all columns except the target.
    const int p = k; // 1 + (k-1)
    std::vector<std::vector<double>> z(n, std::vector<double>(p, 1.0));
    for (int i = 0; i < n; ++i) {
        int c = 1;
        for (int j = 0; j < k; ++j) {
            if (j == target) continue;
            z[i][c++] = cols[j][i];
        }
    }

    const auto solve_normal = [&](const std::vector<double>& rhs_vec) {
        std::vector<std::vector<double>> a(p, std::vector<double>(p + 1, 0.0));
        for (int r = 0; r < p; ++r) {
            for (int c = 0; c < p; ++c) {
                double s = 0.0;
                for (int i = 0; i < n; ++i) s += z[i][r] * z[i][c];
                a[r][c] = s;
            }
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += z[i][r] * rhs_vec[i];
            a[r][p] = s;
        }
        for (int col = 0; col < p; ++col) {
            int piv = col;
            for (int r = col + 1; r < p; ++r) {
                if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
            }
            std::swap(a[col], a[piv]);
            for (int r = 0; r < p; ++r) {
                if (r == col) continue;
                const double f = a[r][col] / a[col][col];
                for (int c = col; c <= p; ++c) a[r][c] -= f * a[col][c];
            }
        }
        std::vector<double> beta(p);
        for (int r = 0; r < p; ++r) beta[r] = a[r][p] / a[r][r];
        return beta;
    };

    const auto residuals = [&](const std::vector<double>& v) {
        const auto beta = solve_normal(v);
        std::vector<double> res(n);
        for (int i = 0; i < n; ++i) {
            double fit = 0.0;
            for (int c = 0; c < p; ++c) fit += beta[c] * z[i][c];
            res[i] = v[i] - fit;
        }
        return res;
    };

    const auto rx = residuals(cols[target]);
    const auto ry = residuals(y);
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

int index_of(const PrccResult& r, const std::string& name) {
    for (size_t i = 0; i < r.names.size(); ++i) {
        if (r.names[i] == name) return static_cast<int>(i);
    }
    REQUIRE(false);
    return -1;
}

} // namespace

TEST_CASE("lhs_sample puts one draw in each stratum") {
    const std::vector<ParamRange> ranges = {{"x", 0.0, 1.0}};
    SampleMatrix m = lhs_sample(ranges, 4, 99);
    std::vector<double> vals = {m(0, 0), m(1, 0), m(2, 0), m(3, 0)};
    std::sort(vals.begin(), vals.end());
    for (int i = 0; i < 4; ++i) {
        CHECK(vals[i] >= i * 0.25);
        CHECK(vals[i] <= (i + 1) * 0.25);
    }
}

TEST_CASE("lhs_sample is deterministic per seed") {
    const std::vector<ParamRange> ranges = {{"a", -2.0, 3.0}, {"b", 10.0, 20.0}};
    const SampleMatrix m1 = lhs_sample(ranges, 64, 123);
    const SampleMatrix m2 = lhs_sample(ranges, 64, 123);
    CHECK(m1.values == m2.values);
    const SampleMatrix m3 = lhs_sample(ranges, 64, 124);
    CHECK(m1.values != m3.values);
}

TEST_CASE("lhs_sample column means sit near the range midpoints") {
    const auto ranges = default_r0_ranges(ModelParams::baseline(), 0.5);
    const SampleMatrix m = lhs_sample(ranges, 1000, 5);
    for (int j = 0; j < m.cols; ++j) {
        double mean = 0.0;
        for (int i = 0; i < m.rows; ++i) mean += m(i, j);
        mean /= m.rows;
        const double mid = 0.5 * (ranges[j].low + ranges[j].high);
        CHECK(std::abs(mean - mid) <= 0.02 * std::abs(mid));
    }
}

TEST_CASE("lhs_sample rejects malformed ranges") {
    CHECK_THROWS_AS(lhs_sample({{"x", 1.0, 1.0}}, 10, 1), InvalidInputError);
    CHECK_THROWS_AS(lhs_sample({{"x", 0.0, 1.0}}, 1, 1), InvalidInputError);
    CHECK_THROWS_AS(lhs_sample({}, 10, 1), InvalidInputError);
}

TEST_CASE("rank_transform basics and tie averaging") {
    CHECK(rank_transform({10.0, 20.0, 30.0}) == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(rank_transform({5.0, 5.0, 1.0}) == std::vector<double>{2.5, 2.5, 1.0});
    CHECK_THROWS_AS(rank_transform({}), InvalidInputError);
    CHECK_THROWS_AS(rank_transform({1.0, std::nan("")}), InvalidInputError);
}

TEST_CASE("rank_transform of a permutation recovers the values") {
    std::mt19937_64 rng(31);
    std::vector<double> values(100);
    std::iota(values.begin(), values.end(), 1.0);
    std::shuffle(values.begin(), values.end(), rng);
    CHECK(rank_transform(values) == values);
}

TEST_CASE("prcc saturates for perfect monotone dependence") {
    const std::vector<ParamRange> ranges = {{"a", 0.0, 1.0}, {"b", 0.0, 1.0}, {"c", 0.0, 1.0}};
    const SampleMatrix m = lhs_sample(ranges, 200, 77);
    std::vector<double> outputs(m.rows);
    for (int i = 0; i < m.rows; ++i) outputs[i] = m(i, 0);
    CHECK(prcc(m, outputs).coefficients[0] >= 0.99);
    for (auto& v : outputs) v = -v;
    CHECK(prcc(m, outputs).coefficients[0] <= -0.99);
}

TEST_CASE("prcc matches the brute-force oracle on a small case") {
    const std::vector<ParamRange> ranges = {{"a", 0.0, 1.0}, {"b", -1.0, 1.0}, {"c", 2.0, 5.0}};
    const SampleMatrix m = lhs_sample(ranges, 10, 2718);
    std::vector<double> outputs(m.rows);
    for (int i = 0; i < m.rows; ++i) {
        outputs[i] = 2.0 * m(i, 0) - 0.7 * m(i, 1) + 0.1 * m(i, 2) * m(i, 2);
    }
    const PrccResult res = prcc(m, outputs);
    for (int j = 0; j < 3; ++j) {
        CHECK(res.coefficients[j] == doctest::Approx(prcc_oracle(m, outputs, j)).epsilon(1e-10));
    }
}

TEST_CASE("prcc rejects rank-deficient designs") {
    SampleMatrix m;
    m.rows = 8;
    m.cols = 2;
    m.values.resize(16);
    for (int i = 0; i < 8; ++i) {
        m(i, 0) = i;
        m(i, 1) = 2.0 * i; // perfectly collinear after ranking
    }
    std::vector<double> outputs(8, 1.0);
    for (int i = 0; i < 8; ++i) outputs[i] = i * i;
    CHECK_THROWS_AS(prcc(m, outputs), DegenerateInputError);
}

TEST_CASE("prcc_r0 signs, determinism and magnitude bound") {
    const ModelParams baseline = ModelParams::baseline();
    const auto ranges = default_r0_ranges(baseline, 0.5);

    const PrccResult res = prcc_r0(baseline, ranges, 1000, 7);
    for (double c : res.coefficients) {
        CHECK(c >= -1.0);
        CHECK(c <= 1.0);
    }
    CHECK(res.coefficients[index_of(res, "lambda2")] > 0.0);
    CHECK(res.coefficients[index_of(res, "b")] > 0.0);
    CHECK(res.coefficients[index_of(res, "lambda1")] < 0.0);
    CHECK(res.coefficients[index_of(res, "lambda3")] < 0.0);
    CHECK(res.coefficients[index_of(res, "mu1")] < 0.0);
    CHECK(res.coefficients[index_of(res, "mu2")] < 0.0);

    // At the default seed the infection-rate coefficient carries the largest
    // positive magnitude; its role is exchangeable with b under symmetric
    // relative ranges, so this is pinned per seed rather than universal.
    CHECK(res.coefficients[index_of(res, "lambda2")] > res.coefficients[index_of(res, "b")]);

    const PrccResult again = prcc_r0(baseline, ranges, 1000, 7);
    CHECK(res.coefficients == again.coefficients);

    // Sign pattern across a 10-seed sweep at n = 500.
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const PrccResult r = prcc_r0(baseline, ranges, 500, seed);
        CHECK(r.coefficients[index_of(r, "lambda2")] > 0.0);
        CHECK(r.coefficients[index_of(r, "b")] > 0.0);
        CHECK(r.coefficients[index_of(r, "lambda1")] < 0.0);
        CHECK(r.coefficients[index_of(r, "lambda3")] < 0.0);
        CHECK(r.coefficients[index_of(r, "mu1")] < 0.0);
        CHECK(r.coefficients[index_of(r, "mu2")] < 0.0);
    }

    CHECK_THROWS_AS(prcc_r0(baseline, {{"lambda2", 0.1, 0.2}}, 100, 1), InvalidInputError);
}
