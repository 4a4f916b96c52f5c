#ifndef TBCTL_SENSITIVITY_HPP
#define TBCTL_SENSITIVITY_HPP

#include "tbctl/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tbctl {

/// Uniform sampling range for one named model parameter.
struct ParamRange {
    std::string name;
    double low = 0.0;
    double high = 0.0;
};

struct PrccResult {
    std::vector<std::string> names;
    std::vector<double> coefficients; ///< one per parameter, in [-1, 1]
    int n_samples = 0;
    std::uint64_t seed = 0;
};

/// Row-major n x k sample matrix.
struct SampleMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;
    double operator()(int r, int c) const { return values[static_cast<size_t>(r) * cols + c]; }
    double& operator()(int r, int c) { return values[static_cast<size_t>(r) * cols + c]; }
};

/// Latin hypercube sample: per parameter, exactly one draw in each of the n
/// equal-probability strata of [low, high], with the stratum order permuted
/// independently per parameter. Deterministic per seed.
SampleMatrix lhs_sample(const std::vector<ParamRange>& ranges, int n, std::uint64_t seed);

/// Ranks 1..n with ties averaged.
std::vector<double> rank_transform(const std::vector<double>& values);

/// Partial rank correlation of every column of `samples` against `outputs`:
/// rank-transform all columns and the output, regress each on the remaining
/// columns (least squares with intercept), and correlate the residuals.
PrccResult prcc(const SampleMatrix& samples, const std::vector<double>& outputs);

/// LHS over the given ranges, closed-form R0 per row, then PRCC. The ranges
/// must cover exactly {lambda1, lambda2, lambda3, b, mu1, mu2}; remaining
/// parameters stay at their baseline values.
PrccResult prcc_r0(const ModelParams& baseline, const std::vector<ParamRange>& ranges, int n,
                   std::uint64_t seed);

/// Symmetric ranges [(1-f)*x, (1+f)*x] about the baseline values of the six
/// parameters entering R0.
std::vector<ParamRange> default_r0_ranges(const ModelParams& baseline, double half_width_fraction = 0.5);

} // namespace tbctl

#endif
