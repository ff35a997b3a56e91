#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

namespace lineage::theory {

/// n trait bits; p per-bit agreement with an unrelated candidate; q per-bit
/// accuracy of the stegosystem; pool size N (the true parent plus N - 1
/// unrelated candidates).
struct Params {
    int n = 64;
    double p = 0.5;
    double q = 1.0;
    std::int64_t pool = 1;

    void validate() const;
};

/// log P[Bin(n, p) = k]. Degenerate p = 0 / p = 1 give log 1 or -infinity.
double log_binom_pmf(int n, int k, double p);

/// PMF of Bin(n, p) over k = 0..n.
std::vector<double> binom_pmf(int n, double p);

/// Probability that the true parent's agreement count strictly exceeds that
/// of all N - 1 unrelated candidates:
///   sum_k P[H* = k] * P[H < k]^(N - 1),  H* ~ Bin(n, q),  H ~ Bin(n, p).
/// Ties lose. The power is evaluated as exp((N - 1) log P[H < k]), with
/// P[H < k] taken as 1 - upper tail once it exceeds one half.
double phylo_accuracy(const Params& params);

struct MonteCarloEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::int64_t trials = 0;
};

/// Simulates the same event directly: draws H* and N - 1 independent H as
/// sums of Bernoulli bits, success iff H* is strictly largest.
MonteCarloEstimate mc_accuracy(const Params& params, std::int64_t trials, std::uint64_t seed);

struct CurveRow {
    double p;
    double q;
    std::int64_t pool;
    double accuracy;
};

/// Cartesian product of the grids, rows sorted by (p, q, N).
std::vector<CurveRow> accuracy_curve(int n, const std::vector<double>& p_list,
                                     const std::vector<double>& q_grid,
                                     const std::vector<std::int64_t>& pool_list,
                                     int jobs = 1);

/// CSV with header `p,q,N,accuracy`, 12 significant digits, LF endings.
void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows);

struct AgreementDistributions {
    std::vector<double> parent;     // Bin(n, q)
    std::vector<double> unrelated;  // Bin(n, p)

    /// sum_k min(parent[k], unrelated[k])
    double overlap() const;
};

AgreementDistributions agreement_distributions(int n, double p, double q);

}  // namespace lineage::theory
