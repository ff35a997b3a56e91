#include "lineage/theory.hpp"

#include "lineage/error.hpp"
#include "lineage/parallel.hpp"
#include "lineage/prng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <tuple>

namespace lineage::theory {

namespace {

// C(n, k) is an exact double for n <= 56; below that the PMF is built in
// linear space so dyadic p and q give exact results.
constexpr int kLinearPmfLimit = 50;

// Switch to log1p of the upper tail once P[H < k] is this close to 1.
constexpr double kTailSwitch = 1e-3;

void check_probability(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw InvalidArgument(std::string(name) + " must lie in [0, 1]");
    }
}

}  // namespace

void Params::validate() const {
    if (n < 1) throw InvalidArgument("n must be at least 1");
    check_probability(p, "p");
    check_probability(q, "q");
    if (pool < 1) throw InvalidArgument("pool size must be at least 1");
}

double log_binom_pmf(int n, int k, double p) {
    if (n < 0 || k < 0 || k > n) throw InvalidArgument("k must lie in [0, n]");
    check_probability(p, "p");
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    if (p == 0.0) return k == 0 ? 0.0 : kNegInf;
    if (p == 1.0) return k == n ? 0.0 : kNegInf;
    const double log_choose = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    return log_choose + k * std::log(p) + (n - k) * std::log1p(-p);
}

std::vector<double> binom_pmf(int n, double p) {
    if (n < 0) throw InvalidArgument("n must be non-negative");
    check_probability(p, "p");
    std::vector<double> pmf(static_cast<std::size_t>(n) + 1);
    if (n <= kLinearPmfLimit) {
        double choose = 1.0;
        for (int k = 0; k <= n; ++k) {
            pmf[k] = choose * std::pow(p, k) * std::pow(1.0 - p, n - k);
            choose = choose * (n - k) / (k + 1);
        }
    } else {
        for (int k = 0; k <= n; ++k) pmf[k] = std::exp(log_binom_pmf(n, k, p));
    }
    return pmf;
}

double phylo_accuracy(const Params& params) {
    params.validate();
    if (params.pool == 1) return 1.0;

    const int n = params.n;
    const auto parent = binom_pmf(n, params.q);
    const auto unrelated = binom_pmf(n, params.p);

    // lower[k] = P[H < k], upper[k] = P[H >= k], each summed from its own
    // small end so neither suffers cancellation.
    std::vector<double> lower(n + 1, 0.0);
    std::vector<double> upper(n + 2, 0.0);
    for (int k = 1; k <= n; ++k) lower[k] = lower[k - 1] + unrelated[k - 1];
    for (int k = n; k >= 0; --k) upper[k] = upper[k + 1] + unrelated[k];

    const auto others = static_cast<double>(params.pool - 1);
    double total = 0.0;
    for (int k = 0; k <= n; ++k) {
        if (parent[k] == 0.0 || lower[k] == 0.0) continue;
        double beaten;
        if (upper[k] < kTailSwitch) {
            beaten = std::exp(others * std::log1p(-upper[k]));
        } else {
            const double cdf = lower[k] <= 0.5 ? lower[k] : 1.0 - upper[k];
            beaten = std::pow(cdf, others);
        }
        total += parent[k] * beaten;
    }
    return std::clamp(total, 0.0, 1.0);
}

MonteCarloEstimate mc_accuracy(const Params& params, std::int64_t trials, std::uint64_t seed) {
    params.validate();
    if (trials < 1) throw InvalidArgument("trials must be at least 1");
    SplitMix64 rng(seed);
    auto draw = [&](double prob) {
        int count = 0;
        for (int b = 0; b < params.n; ++b) count += rng.next_unit() < prob;
        return count;
    };
    std::int64_t wins = 0;
    for (std::int64_t t = 0; t < trials; ++t) {
        const int parent = draw(params.q);
        bool won = true;
        for (std::int64_t c = 1; c < params.pool && won; ++c) won = draw(params.p) < parent;
        wins += won;
    }
    MonteCarloEstimate out;
    out.trials = trials;
    out.estimate = static_cast<double>(wins) / static_cast<double>(trials);
    out.std_error = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(trials));
    return out;
}

std::vector<CurveRow> accuracy_curve(int n, const std::vector<double>& p_list,
                                     const std::vector<double>& q_grid,
                                     const std::vector<std::int64_t>& pool_list, int jobs) {
    if (p_list.empty() || q_grid.empty() || pool_list.empty()) throw InvalidArgument("curve grids must be non-empty");
    std::vector<CurveRow> rows;
    for (double p : p_list)
        for (double q : q_grid)
            for (auto pool : pool_list) rows.push_back({p, q, pool, 0.0});
    std::sort(rows.begin(), rows.end(), [](const CurveRow& a, const CurveRow& b) {
        return std::tie(a.p, a.q, a.pool) < std::tie(b.p, b.q, b.pool);
    });
    parallel_for(rows.size(), jobs, [&](std::size_t i) {
        rows[i].accuracy = phylo_accuracy({n, rows[i].p, rows[i].q, rows[i].pool});
    });
    return rows;
}

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows) {
    out << "p,q,N,accuracy\n";
    char buf[128];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%lld,%.12g\n", r.p, r.q,
                      static_cast<long long>(r.pool), r.accuracy);
        out << buf;
    }
}

double AgreementDistributions::overlap() const {
    double total = 0.0;
    for (std::size_t k = 0; k < parent.size(); ++k) total += std::min(parent[k], unrelated[k]);
    return total;
}

AgreementDistributions agreement_distributions(int n, double p, double q) {
    if (n < 1) throw InvalidArgument("n must be at least 1");
    return {binom_pmf(n, q), binom_pmf(n, p)};
}

}  // namespace lineage::theory
