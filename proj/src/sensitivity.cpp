#include "tbctl/sensitivity.hpp"
#include "tbctl/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace tbctl {

namespace {

/// Uniform double in [0, 1) from the top 53 bits; keeps the stream
/// reproducible across standard library implementations.
double next_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double* param_field(ModelParams& p, const std::string& name) {
    if (name == "lambda1") return &p.lambda1;
    if (name == "lambda2") return &p.lambda2;
    if (name == "lambda3") return &p.lambda3;
    if (name == "lambda4") return &p.lambda4;
    if (name == "lambda5") return &p.lambda5;
    if (name == "lambda6") return &p.lambda6;
    if (name == "lambda7") return &p.lambda7;
    if (name == "b") return &p.b;
    if (name == "sigma") return &p.sigma;
    if (name == "mu1") return &p.mu1;
    if (name == "mu2") return &p.mu2;
    if (name == "mu3") return &p.mu3;
    if (name == "mu4") return &p.mu4;
    if (name == "mu5") return &p.mu5;
    return nullptr;
}

} // namespace

SampleMatrix lhs_sample(const std::vector<ParamRange>& ranges, int n, std::uint64_t seed) {
    if (n < 2) throw InvalidInputError("lhs_sample: need at least 2 samples");
    if (ranges.empty()) throw InvalidInputError("lhs_sample: need at least 1 range");
    for (const auto& r : ranges) {
        if (!std::isfinite(r.low) || !std::isfinite(r.high) || !(r.low < r.high)) {
            throw InvalidInputError("lhs_sample: range '" + r.name + "' must satisfy low < high");
        }
    }

    std::mt19937_64 rng(seed);
    SampleMatrix m;
    m.rows = n;
    m.cols = static_cast<int>(ranges.size());
    m.values.assign(static_cast<size_t>(n) * m.cols, 0.0);

    std::vector<double> column(n);
    for (int j = 0; j < m.cols; ++j) {
        const double width = (ranges[j].high - ranges[j].low) / n;
        for (int i = 0; i < n; ++i) {
            column[i] = ranges[j].low + (i + next_uniform(rng)) * width;
        }
        // Fisher-Yates permutation of the stratum order.
        for (int i = n - 1; i > 0; --i) {
            const int k = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
            std::swap(column[i], column[k]);
        }
        for (int i = 0; i < n; ++i) m(i, j) = column[i];
    }
    return m;
}

std::vector<double> rank_transform(const std::vector<double>& values) {
    if (values.empty()) throw InvalidInputError("rank_transform: empty input");
    for (double v : values) {
        if (!std::isfinite(v)) throw InvalidInputError("rank_transform: non-finite entry");
    }
    const int n = static_cast<int>(values.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });

    std::vector<double> ranks(n);
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double mean_rank = 0.5 * (i + j) + 1.0; // ranks are 1-based
        for (int k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

namespace {

/// Residuals of y regressed on the columns of z plus an intercept.
Eigen::VectorXd ols_residuals(const Eigen::MatrixXd& z, const Eigen::VectorXd& y) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
    if (qr.rank() < z.cols()) {
        throw DegenerateInputError("prcc: rank-deficient regression design");
    }
    return y - z * qr.solve(y);
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double ma = a.mean();
    const double mb = b.mean();
    const Eigen::VectorXd da = a.array() - ma;
    const Eigen::VectorXd db = b.array() - mb;
    const double denom = std::sqrt(da.squaredNorm() * db.squaredNorm());
    if (denom == 0.0) throw DegenerateInputError("prcc: zero-variance residuals");
    return std::clamp(da.dot(db) / denom, -1.0, 1.0);
}

} // namespace

PrccResult prcc(const SampleMatrix& samples, const std::vector<double>& outputs) {
    const int n = samples.rows;
    const int k = samples.cols;
    if (static_cast<int>(outputs.size()) != n) {
        throw InvalidInputError("prcc: outputs length must match the sample rows");
    }
    if (n < k + 2) throw InvalidInputError("prcc: need at least k + 2 rows");

    Eigen::MatrixXd ranked(n, k);
    std::vector<double> col(n);
    for (int j = 0; j < k; ++j) {
        for (int i = 0; i < n; ++i) col[i] = samples(i, j);
        const auto r = rank_transform(col);
        for (int i = 0; i < n; ++i) ranked(i, j) = r[i];
    }
    const auto out_ranks = rank_transform(outputs);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = out_ranks[i];

    PrccResult res;
    res.n_samples = n;
    res.coefficients.resize(k);
    for (int j = 0; j < k; ++j) {
        Eigen::MatrixXd z(n, k); // intercept plus the other k-1 columns
        z.col(0).setOnes();
        int c = 1;
        for (int jj = 0; jj < k; ++jj) {
            if (jj == j) continue;
            z.col(c++) = ranked.col(jj);
        }
        const Eigen::VectorXd rx = ols_residuals(z, ranked.col(j));
        const Eigen::VectorXd ry = ols_residuals(z, y);
        res.coefficients[j] = pearson(rx, ry);
    }
    return res;
}

PrccResult prcc_r0(const ModelParams& baseline, const std::vector<ParamRange>& ranges, int n,
                   std::uint64_t seed) {
    baseline.require_valid();
    const std::set<std::string> expected = {"lambda1", "lambda2", "lambda3", "b", "mu1", "mu2"};
    std::set<std::string> got;
    for (const auto& r : ranges) got.insert(r.name);
    if (got != expected || ranges.size() != expected.size()) {
        throw InvalidInputError("prcc_r0: ranges must cover exactly lambda1, lambda2, lambda3, b, mu1, mu2");
    }

    const SampleMatrix samples = lhs_sample(ranges, n, seed);
    std::vector<double> outputs(n);
    for (int i = 0; i < n; ++i) {
        ModelParams p = baseline;
        for (int j = 0; j < samples.cols; ++j) {
            *param_field(p, ranges[j].name) = samples(i, j);
        }
        outputs[i] = r0_closed_form(p);
    }

    PrccResult res = prcc(samples, outputs);
    res.seed = seed;
    for (const auto& r : ranges) res.names.push_back(r.name);
    return res;
}

std::vector<ParamRange> default_r0_ranges(const ModelParams& baseline, double half_width_fraction) {
    if (!(half_width_fraction > 0.0) || half_width_fraction >= 1.0) {
        throw InvalidInputError("default_r0_ranges: fraction must lie in (0, 1)");
    }
    ModelParams p = baseline;
    std::vector<ParamRange> ranges;
    for (const char* name : {"lambda1", "lambda2", "lambda3", "b", "mu1", "mu2"}) {
        const double v = *param_field(p, name);
        ranges.push_back({name, (1.0 - half_width_fraction) * v, (1.0 + half_width_fraction) * v});
    }
    return ranges;
}

} // namespace tbctl
