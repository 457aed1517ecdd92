#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "gridseer/common/rng.hpp"

namespace gridseer::gridml {

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

/// Per-stratum seeded shuffle; the first round(test_fraction * n) items go to
/// test and the next round(val_fraction * (n - n_test)) to validation. Strata
/// with at least two items always contribute to both train and test.
inline Split stratified_split(const std::vector<std::int64_t>& strata, std::uint64_t seed, double test_fraction,
                              double val_fraction) {
    std::map<std::int64_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < strata.size(); ++i) groups[strata[i]].push_back(i);
    Split s;
    for (auto& [key, idx] : groups) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(key)));
        rng.shuffle(idx);
        const std::size_t n = idx.size();
        std::size_t n_test = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(n)));
        if (n >= 2) n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
        else n_test = 0;
        const std::size_t rest = n - n_test;
        std::size_t n_val = static_cast<std::size_t>(std::lround(val_fraction * static_cast<double>(rest)));
        if (n_val >= rest) n_val = rest > 1 ? rest - 1 : 0;
        s.test.insert(s.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
        s.val.insert(s.val.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test),
                     idx.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
        s.train.insert(s.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), idx.end());
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

}  // namespace gridseer::gridml
