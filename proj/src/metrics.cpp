#include "bindbench/metrics.hpp"

#include "bindbench/common.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace bindbench {

namespace {

// -1 when the pair is not matchable under the cost model.
int pair_cost(const Feature& p, const Feature& g) {
    bool shape = p.shape == g.shape;
    bool color = p.color == g.color;
    if (shape && color) return 0;
    if (shape || color) return 1;
    return -1;
}

std::map<Feature, int> multiset_counts(std::span<const Feature> fs) {
    std::map<Feature, int> counts;
    for (const auto& f : fs) ++counts[f];
    return counts;
}

// Kuhn's augmenting-path maximum matching. match_g[g] = pred index or -1.
bool try_augment(int p, const std::vector<std::vector<int>>& adj, std::vector<int>& match_g,
                 std::vector<bool>& visited) {
    for (int g : adj[p]) {
        if (visited[g]) continue;
        visited[g] = true;
        if (match_g[g] < 0 || try_augment(match_g[g], adj, match_g, visited)) {
            match_g[g] = p;
            return true;
        }
    }
    return false;
}

} // namespace

EditDistanceResult scene_edit_distance(std::span<const Feature> pred, std::span<const Feature> gt,
                                       const EditDistanceOptions& opt) {
    EditDistanceResult res;

    // Stage 1: remove the multiset intersection as exact matches.
    auto pred_counts = multiset_counts(pred);
    auto gt_counts = multiset_counts(gt);
    std::vector<Feature> p_rem, g_rem;
    for (const auto& [f, n] : gt_counts) {
        auto it = pred_counts.find(f);
        int matched = it == pred_counts.end() ? 0 : std::min(n, it->second);
        res.breakdown.n_exact += matched;
        for (int i = 0; i < n - matched; ++i) g_rem.push_back(f);
    }
    for (const auto& [f, n] : pred_counts) {
        auto it = gt_counts.find(f);
        int matched = it == gt_counts.end() ? 0 : std::min(n, it->second);
        for (int i = 0; i < n - matched; ++i) p_rem.push_back(f);
    }

    // Stage 2: maximum-cardinality matching over single-feature pairs.
    // Every extra match converts a missed (2) into a partial (1), so a
    // maximum matching minimizes the total cost.
    std::vector<std::vector<int>> adj(p_rem.size());
    for (std::size_t p = 0; p < p_rem.size(); ++p)
        for (std::size_t g = 0; g < g_rem.size(); ++g)
            if (pair_cost(p_rem[p], g_rem[g]) == 1) adj[p].push_back(static_cast<int>(g));

    std::vector<int> match_g(g_rem.size(), -1);
    int matched = 0;
    for (std::size_t p = 0; p < p_rem.size(); ++p) {
        std::vector<bool> visited(g_rem.size(), false);
        if (try_augment(static_cast<int>(p), adj, match_g, visited)) ++matched;
    }

    for (std::size_t g = 0; g < g_rem.size(); ++g) {
        if (match_g[g] < 0) continue;
        if (p_rem[match_g[g]].shape == g_rem[g].shape)
            ++res.breakdown.n_partial_shape;
        else
            ++res.breakdown.n_partial_color;
    }
    res.breakdown.n_missed_gt = static_cast<int>(g_rem.size()) - matched;
    res.breakdown.n_extra_pred = static_cast<int>(p_rem.size()) - matched;

    res.value = matched + 2 * res.breakdown.n_missed_gt;
    if (opt.penalize_extra) res.value += res.breakdown.n_extra_pred;
    return res;
}

int brute_force_edit_distance(std::span<const Feature> pred, std::span<const Feature> gt,
                              const EditDistanceOptions& opt) {
    const int np = static_cast<int>(pred.size());
    const int ng = static_cast<int>(gt.size());
    if (np > 8 || ng > 8) throw Error("brute_force_edit_distance: sides limited to 8 objects");

    // dp over (gt index, used-pred mask).
    const int masks = 1 << np;
    std::vector<int> dp(static_cast<std::size_t>(ng + 1) * masks, -1);
    auto solve = [&](auto&& self, int i, int mask) -> int {
        int& memo = dp[static_cast<std::size_t>(i) * masks + mask];
        if (memo >= 0) return memo;
        if (i == ng) {
            int extras = np - __builtin_popcount(static_cast<unsigned>(mask));
            return memo = opt.penalize_extra ? extras : 0;
        }
        int best = 2 + self(self, i + 1, mask); // miss this ground-truth object
        for (int p = 0; p < np; ++p) {
            if (mask & (1 << p)) continue;
            int c = pair_cost(pred[p], gt[i]);
            if (c < 0) continue;
            best = std::min(best, c + self(self, i + 1, mask | (1 << p)));
        }
        return memo = best;
    };
    return solve(solve, 0, 0);
}

double accuracy(std::span<const bool> correct) {
    if (correct.empty()) throw Error("accuracy: undefined for empty input");
    std::size_t n = 0;
    for (bool c : correct)
        if (c) ++n;
    return static_cast<double>(n) / static_cast<double>(correct.size());
}

double harmonic_mean(double visible_acc, double invisible_acc) {
    if (visible_acc < 0 || visible_acc > 1 || invisible_acc < 0 || invisible_acc > 1)
        throw Error("harmonic_mean: accuracies must lie in [0, 1]");
    double sum = visible_acc + invisible_acc;
    if (sum == 0) return 0.0;
    return 2.0 * visible_acc * invisible_acc / sum;
}

double f1_score(std::span<const Feature> pred, std::span<const Feature> gt) {
    if (pred.empty() && gt.empty()) return 1.0;
    if (pred.empty() || gt.empty()) return 0.0;
    auto pc = multiset_counts(pred);
    auto gc = multiset_counts(gt);
    int tp = 0;
    for (const auto& [f, n] : gc) {
        auto it = pc.find(f);
        if (it != pc.end()) tp += std::min(n, it->second);
    }
    if (tp == 0) return 0.0;
    double precision = static_cast<double>(tp) / static_cast<double>(pred.size());
    double recall = static_cast<double>(tp) / static_cast<double>(gt.size());
    return 2.0 * precision * recall / (precision + recall);
}

double jaccard(std::span<const Feature> pred, std::span<const Feature> gt) {
    std::set<Feature> p(pred.begin(), pred.end());
    std::set<Feature> g(gt.begin(), gt.end());
    if (p.empty() && g.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& f : p)
        if (g.count(f)) ++inter;
    std::size_t uni = p.size() + g.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double mse(std::span<const double> pred, std::span<const double> gt) {
    if (pred.size() != gt.size()) throw Error("mse: length mismatch");
    if (pred.empty()) throw Error("mse: undefined for empty input");
    double acc = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double d = pred[i] - gt[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.size());
}

} // namespace bindbench
