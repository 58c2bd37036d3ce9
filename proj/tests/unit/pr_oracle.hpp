#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

namespace forestseg::testing {

// Brute-force precision/recall area: for each threshold (visited from high to
// low) a full pass over the pixels counts tp and predicted positives. The
// curve starts at recall 0 with the precision of the first operating point
// and is integrated by trapezoids.
inline double pr_area_oracle(const std::vector<double>& probs, const std::vector<std::uint8_t>& y,
                             std::vector<double> thresholds) {
    std::sort(thresholds.rbegin(), thresholds.rend());
    double positives = 0;
    for (auto v : y) positives += v;
    std::vector<std::pair<double, double>> pts;  // recall, precision
    for (double t : thresholds) {
        double tp = 0, sel = 0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (probs[i] >= t) {
                sel += 1;
                tp += y[i];
            }
        }
        if (sel == 0) continue;
        pts.emplace_back(tp / positives, tp / sel);
    }
    if (pts.empty()) return 0.0;
    double area = 0.0, r0 = 0.0, p0 = pts.front().second;
    for (auto [r, p] : pts) {
        area += (r - r0) * (p + p0) / 2;
        r0 = r;
        p0 = p;
    }
    return area;
}

inline std::vector<double> grid_thresholds(int n) {
    std::vector<double> t;
    for (int k = 0; k < n; ++k) t.push_back(static_cast<double>(k) / (n - 1));
    return t;
}

inline std::vector<double> distinct_scores(const std::vector<double>& probs) {
    const std::set<double> s(probs.begin(), probs.end());
    return {s.begin(), s.end()};
}

}  // namespace forestseg::testing
