#pragma once

#include <optional>
#include <span>
#include <vector>

namespace bpv {

// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> average_ranks(std::span<const double> values);

// Spearman rank correlation. Empty for n < 2; 0 by convention when either
// variable is constant.
std::optional<double> spearman_rank_correlation(std::span<const double> x,
                                                std::span<const double> y);

}  // namespace bpv
