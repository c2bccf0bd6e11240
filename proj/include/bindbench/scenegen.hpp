#pragma once

#include "bindbench/scene.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bindbench {

struct SceneGenOptions {
    int canvas_w = 512;
    int canvas_h = 512;
    int min_size = 24;
    int max_size = 40;
    int max_place_attempts = 10000; // per object, then fail loudly
    Feature search_target = {Shape::letter_l, Color::green};
    int spatial_n_distractors = 6;
    int spatial_axis_margin = 32; // min |dx| and |dy| between the two targets
    int triplet_restarts = 1000;  // assignment search restarts
};

// Conjunctive search: target among near-miss distractors (shared color or
// shape). present=true places exactly one target.
TaskInstance gen_search_scene(std::uint64_t seed, int n_objects, bool present,
                              const SceneGenOptions& opt = {});

// Counting: n_targets exact copies of the target feature plus distractors
// that share exactly one feature with it.
TaskInstance gen_count_scene(std::uint64_t seed, int n_targets, Feature target, int n_distractors,
                             const SceneGenOptions& opt = {});

// Scene description: feature assignment searched until the scene contains
// exactly n_triplets feature triplets, then validated exhaustively.
TaskInstance gen_description_scene(std::uint64_t seed, int n_objects, int n_triplets,
                                   const SceneGenOptions& opt = {});

// Spatial relationship: two uniquely identifiable targets, four quadrant
// options, correct option from the sign of the center offsets (y-down).
TaskInstance gen_spatial_instance(std::uint64_t seed, const SceneGenOptions& opt = {});

// Number of unordered triples where one pair shares exactly one feature and
// a different pair shares the other feature. Exhaustive over all C(n,3).
int count_feature_triplets(std::span<const Feature> features);
int count_feature_triplets(const std::vector<ObjectSpec>& objects);

// Deterministic raster of a scene. White background, fixed palette,
// stroke-built letter glyphs (no font dependency).
Image render(const SceneSpec& scene);

// Row index (1..n_rows) per object: the band holding the majority of the
// object's bounding-box area, ties broken toward the upper row.
std::vector<int> row_assignment(const SceneSpec& scene, int n_rows);

// Recompute the quadrant option from target centers; used by invariants.
int spatial_option_from_centers(int ax, int ay, int bx, int by);

struct IngestReport {
    struct Failure {
        std::size_t record_index;
        std::string message;
    };
    std::vector<TaskInstance> instances;
    std::vector<Failure> errors;
};

// Adapter for externally rendered benchmarks: JSON array of
// {image_path, task, ground_truth}. Bad records are reported, the batch
// continues.
IngestReport ingest_external(const std::string& manifest_path);

// Image file base name for an instance: "<task>_<params>_<seed>".
std::string instance_image_name(const TaskInstance& inst);

} // namespace bindbench
