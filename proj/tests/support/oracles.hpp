#pragma once

// Independent oracles for derived expected values. These deliberately avoid
// the library's code paths: tallies go through their own containers, and the
// quantile rank is found by scanning instead of closed-form ceil.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "forgesim/profile.hpp"
#include "forgesim/rational.hpp"

namespace oracle {

struct TraitTally {
    std::uint64_t frequency = 0;
    std::uint64_t diversity = 0;
    std::int64_t popularity_sum = 0;  // conformity = popularity_sum / frequency
};

// Brute-force per-creator tally over a metadata table.
inline std::map<std::string, TraitTally> tally_traits(
    const std::vector<forgesim::ForgeryRecord>& records) {
    std::map<std::string, std::uint64_t> target_popularity;
    for (const auto& rec : records) ++target_popularity[rec.target_id];

    std::map<std::string, TraitTally> out;
    std::map<std::string, std::set<std::string>> methods;
    for (const auto& rec : records) {
        auto& tally = out[rec.creator_id];
        ++tally.frequency;
        methods[rec.creator_id].insert(rec.method_id);
        tally.popularity_sum += static_cast<std::int64_t>(target_popularity[rec.target_id]);
    }
    for (auto& [creator, tally] : out) tally.diversity = methods[creator].size();
    return out;
}

// Nearest-rank quantile by linear scan: the smallest 1-based index i with
// i >= q*n, floored at 1.
inline forgesim::Rational quantile_by_scan(std::vector<forgesim::Rational> values,
                                           const forgesim::Rational& q) {
    std::sort(values.begin(), values.end());
    const std::int64_t n = static_cast<std::int64_t>(values.size());
    std::int64_t rank = n;
    for (std::int64_t i = 1; i <= n; ++i) {
        // i >= q*n  <=>  i*den >= num*n
        if (i * q.den() >= q.num() * n) {
            rank = i;
            break;
        }
    }
    if (rank < 1) rank = 1;
    return values[static_cast<std::size_t>(rank - 1)];
}

// Pearson chi-square statistic against expected category probabilities.
inline double chi_square(const std::map<std::string, std::uint64_t>& observed,
                         const std::map<std::string, double>& expected_probs,
                         std::uint64_t draws) {
    double stat = 0.0;
    for (const auto& [key, p] : expected_probs) {
        const double expected = p * static_cast<double>(draws);
        if (expected <= 0.0) continue;
        const auto it = observed.find(key);
        const double obs = it == observed.end() ? 0.0 : static_cast<double>(it->second);
        stat += (obs - expected) * (obs - expected) / expected;
    }
    return stat;
}

// 99th percentile of the chi-square distribution with 2 degrees of freedom;
// a statistic below this passes the p > 0.01 uniformity check for 3 bins.
inline constexpr double kChiSq99Df2 = 9.210340371976184;

}  // namespace oracle
