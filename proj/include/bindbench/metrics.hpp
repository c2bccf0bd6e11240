#pragma once

#include "bindbench/scene.hpp"

#include <span>
#include <vector>

namespace bindbench {

// How each ground-truth object was accounted for by the matching.
struct MatchBreakdown {
    int n_exact = 0;
    int n_partial_shape = 0; // shape matched, color differed
    int n_partial_color = 0; // color matched, shape differed
    int n_missed_gt = 0;
    int n_extra_pred = 0;
};

struct EditDistanceResult {
    int value = 0;
    MatchBreakdown breakdown;
};

struct EditDistanceOptions {
    // The published cost model leaves hallucinated predictions free; this
    // switch charges them 1 each for sensitivity studies.
    bool penalize_extra = false;
};

// Object-level scene distance: exact matches removed, then a maximum
// matching over single-feature (shape xor color) pairs at cost 1 each,
// remaining ground-truth objects at cost 2, extras free by default.
EditDistanceResult scene_edit_distance(std::span<const Feature> pred, std::span<const Feature> gt,
                                       const EditDistanceOptions& opt = {});

// Exhaustive minimum over all injective partial assignments with the same
// cost model; test oracle for scene_edit_distance. Sides limited to 8.
int brute_force_edit_distance(std::span<const Feature> pred, std::span<const Feature> gt,
                              const EditDistanceOptions& opt = {});

double accuracy(std::span<const bool> correct); // throws Error when empty

// 2vi/(v+i); 0 when both accuracies are 0.
double harmonic_mean(double visible_acc, double invisible_acc);

// TP = multiset-exact (shape and color) matches. 1.0 when both sides empty.
double f1_score(std::span<const Feature> pred, std::span<const Feature> gt);

// Set-level overlap after de-duplication. 1.0 when both sides empty.
double jaccard(std::span<const Feature> pred, std::span<const Feature> gt);

double mse(std::span<const double> pred, std::span<const double> gt); // throws on length mismatch

} // namespace bindbench
