#include "bindbench/scenegen.hpp"

#include "bindbench/common.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

namespace bindbench {

namespace {

Feature random_feature(Rng& rng) {
    return {static_cast<Shape>(rng.next_below(kShapeCount)),
            static_cast<Color>(rng.next_below(kColorCount))};
}

ObjectSpec place_object(Rng& rng, Feature f, const std::vector<ObjectSpec>& placed,
                        const SceneGenOptions& opt, std::uint64_t seed) {
    for (int attempt = 0; attempt < opt.max_place_attempts; ++attempt) {
        ObjectSpec o;
        o.shape = f.shape;
        o.color = f.color;
        o.size = rng.next_int(opt.min_size, opt.max_size);
        o.rot = 90 * rng.next_int(0, 3);
        int x0 = rng.next_int(0, opt.canvas_w - o.size);
        int y0 = rng.next_int(0, opt.canvas_h - o.size);
        o.cx = x0 + o.size / 2;
        o.cy = y0 + o.size / 2;
        bool collides = std::any_of(placed.begin(), placed.end(),
                                    [&](const ObjectSpec& p) { return boxes_overlap(p, o); });
        if (!collides) return o;
    }
    throw GenerationError("object placement failed after " + std::to_string(opt.max_place_attempts) +
                          " attempts (seed=" + std::to_string(seed) + ")");
}

// True iff one pair shares exactly one feature and a different pair shares
// the other feature. {red circle, red circle, red circle} has no pair with
// exactly one shared feature, so it does not count.
bool triple_counts(const Feature& a, const Feature& b, const Feature& c) {
    const Feature* f[3] = {&a, &b, &c};
    static constexpr int kPairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (int p1 = 0; p1 < 3; ++p1) {
        const Feature& u = *f[kPairs[p1][0]];
        const Feature& v = *f[kPairs[p1][1]];
        bool same_shape = u.shape == v.shape;
        bool same_color = u.color == v.color;
        if (same_shape == same_color) continue; // shares both or neither
        for (int p2 = 0; p2 < 3; ++p2) {
            if (p2 == p1) continue;
            const Feature& x = *f[kPairs[p2][0]];
            const Feature& y = *f[kPairs[p2][1]];
            bool shares_other = same_shape ? (x.color == y.color) : (x.shape == y.shape);
            if (shares_other) return true;
        }
    }
    return false;
}

// Counting triples through a fixed member; lets the assignment search
// re-evaluate single-object changes in O(n^2).
int triples_through(const std::vector<Feature>& fs, int i) {
    int n = static_cast<int>(fs.size());
    int c = 0;
    for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        for (int k = j + 1; k < n; ++k) {
            if (k == i) continue;
            if (triple_counts(fs[i], fs[j], fs[k])) ++c;
        }
    }
    return c;
}

std::vector<Feature> search_triplet_assignment(Rng& rng, int n_objects, int n_triplets,
                                               const SceneGenOptions& opt, std::uint64_t seed) {
    for (int restart = 0; restart < opt.triplet_restarts; ++restart) {
        std::vector<Feature> fs(n_objects);
        for (auto& f : fs) f = random_feature(rng);
        int cur = count_feature_triplets(fs);
        const int max_steps = 400 * n_objects;
        for (int step = 0; step < max_steps && cur != n_triplets; ++step) {
            int i = rng.next_int(0, n_objects - 1);
            Feature old = fs[i];
            Feature cand = old;
            if (rng.next_bool(0.5))
                cand.shape = static_cast<Shape>(rng.next_below(kShapeCount));
            else
                cand.color = static_cast<Color>(rng.next_below(kColorCount));
            if (cand == old) continue;
            int before = triples_through(fs, i);
            fs[i] = cand;
            int after = triples_through(fs, i);
            int next = cur - before + after;
            if (std::abs(next - n_triplets) <= std::abs(cur - n_triplets) || rng.next_bool(0.02)) {
                cur = next;
            } else {
                fs[i] = old;
            }
        }
        if (cur == n_triplets && count_feature_triplets(fs) == n_triplets) return fs;
    }
    throw GenerationError("no assignment with " + std::to_string(n_triplets) + " triplets for " +
                          std::to_string(n_objects) + " objects after " +
                          std::to_string(opt.triplet_restarts) +
                          " restarts (seed=" + std::to_string(seed) + ")");
}

SceneSpec make_scene(std::uint64_t seed, const SceneGenOptions& opt) {
    SceneSpec s;
    s.canvas_w = opt.canvas_w;
    s.canvas_h = opt.canvas_h;
    s.seed = seed;
    return s;
}

std::string make_id(Task task, const std::string& param_slug, std::uint64_t seed) {
    return task_name(task) + "_" + param_slug + "_" + std::to_string(seed);
}

} // namespace

int count_feature_triplets(std::span<const Feature> features) {
    int n = static_cast<int>(features.size());
    int count = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k)
                if (triple_counts(features[i], features[j], features[k])) ++count;
    return count;
}

int count_feature_triplets(const std::vector<ObjectSpec>& objects) {
    std::vector<Feature> fs;
    fs.reserve(objects.size());
    for (const auto& o : objects) fs.push_back(o.feature());
    return count_feature_triplets(fs);
}

TaskInstance gen_search_scene(std::uint64_t seed, int n_objects, bool present,
                              const SceneGenOptions& opt) {
    if (n_objects < 2) throw Error("gen_search_scene: n_objects must be >= 2");
    Rng rng(derive_seed(seed, "search"));

    const Feature target = opt.search_target;
    // Conjunctive foils: one foil shape and one foil color, giving the
    // {shared-shape, shared-color, neither} distractor set.
    Shape foil_shape;
    if (target.shape == Shape::letter_l)
        foil_shape = Shape::letter_t;
    else if (target.shape == Shape::letter_t)
        foil_shape = Shape::letter_l;
    else
        foil_shape = static_cast<Shape>((static_cast<int>(target.shape) + 1) % kShapeCount);
    Color foil_color;
    if (target.color == Color::green)
        foil_color = Color::red;
    else if (target.color == Color::red)
        foil_color = Color::green;
    else
        foil_color = static_cast<Color>((static_cast<int>(target.color) + 1) % kColorCount);

    const Feature distractors[3] = {{target.shape, foil_color},
                                    {foil_shape, target.color},
                                    {foil_shape, foil_color}};

    SceneSpec scene = make_scene(seed, opt);
    int n_distract = present ? n_objects - 1 : n_objects;
    if (present) scene.objects.push_back(place_object(rng, target, scene.objects, opt, seed));
    for (int i = 0; i < n_distract; ++i) {
        Feature f = distractors[rng.next_below(3)];
        scene.objects.push_back(place_object(rng, f, scene.objects, opt, seed));
    }

    TaskInstance inst;
    inst.task = Task::search;
    inst.params = {{"n_objects", n_objects}, {"present", present}};
    inst.difficulty = n_objects;
    inst.truth = SearchTruth{present, target};
    inst.id = make_id(Task::search,
                      "n" + std::to_string(n_objects) + (present ? "-present" : "-absent"), seed);
    inst.scene = std::move(scene);
    return inst;
}

TaskInstance gen_count_scene(std::uint64_t seed, int n_targets, Feature target, int n_distractors,
                             const SceneGenOptions& opt) {
    if (n_targets < 1) throw Error("gen_count_scene: n_targets must be >= 1");
    if (n_distractors < 0) throw Error("gen_count_scene: n_distractors must be >= 0");
    Rng rng(derive_seed(seed, "count"));

    SceneSpec scene = make_scene(seed, opt);
    for (int i = 0; i < n_targets; ++i)
        scene.objects.push_back(place_object(rng, target, scene.objects, opt, seed));
    for (int i = 0; i < n_distractors; ++i) {
        // Near-miss distractors: share exactly one feature with the target.
        Feature f;
        if (rng.next_bool(0.5)) {
            f.color = target.color;
            do {
                f.shape = static_cast<Shape>(rng.next_below(kShapeCount));
            } while (f.shape == target.shape);
        } else {
            f.shape = target.shape;
            do {
                f.color = static_cast<Color>(rng.next_below(kColorCount));
            } while (f.color == target.color);
        }
        scene.objects.push_back(place_object(rng, f, scene.objects, opt, seed));
    }

    TaskInstance inst;
    inst.task = Task::count;
    inst.params = {{"n_targets", n_targets},
                   {"target_shape", shape_name(target.shape)},
                   {"target_color", color_name(target.color)},
                   {"n_distractors", n_distractors}};
    inst.difficulty = n_targets;
    inst.truth = CountTruth{n_targets, target};
    inst.id = make_id(Task::count,
                      "t" + std::to_string(n_targets) + "-" + color_name(target.color) + "-" +
                          shape_name(target.shape) + "-d" + std::to_string(n_distractors),
                      seed);
    inst.scene = std::move(scene);
    return inst;
}

TaskInstance gen_description_scene(std::uint64_t seed, int n_objects, int n_triplets,
                                   const SceneGenOptions& opt) {
    if (n_objects < 3 && n_triplets > 0)
        throw Error("gen_description_scene: need at least 3 objects for any triplet");
    if (n_objects < 1) throw Error("gen_description_scene: n_objects must be >= 1");
    if (n_triplets < 0) throw Error("gen_description_scene: n_triplets must be >= 0");
    Rng rng(derive_seed(seed, "describe"));

    std::vector<Feature> features = search_triplet_assignment(rng, n_objects, n_triplets, opt, seed);

    SceneSpec scene = make_scene(seed, opt);
    DescribeTruth truth;
    for (const auto& f : features) {
        scene.objects.push_back(place_object(rng, f, scene.objects, opt, seed));
        truth.objects.push_back(f);
    }

    TaskInstance inst;
    inst.task = Task::describe;
    inst.params = {{"n_objects", n_objects}, {"n_triplets", n_triplets}};
    inst.difficulty = n_objects;
    inst.truth = std::move(truth);
    inst.id = make_id(Task::describe,
                      "n" + std::to_string(n_objects) + "-tr" + std::to_string(n_triplets), seed);
    inst.scene = std::move(scene);
    return inst;
}

int spatial_option_from_centers(int ax, int ay, int bx, int by) {
    // y grows downward; index into kSpatialOptions.
    bool left = ax < bx;
    bool top = ay < by;
    if (top) return left ? 0 : 1;
    return left ? 2 : 3;
}

TaskInstance gen_spatial_instance(std::uint64_t seed, const SceneGenOptions& opt) {
    Rng rng(derive_seed(seed, "spatial"));
    const int relation = rng.next_int(0, 3); // chosen first so options stay balanced
    const bool want_left = relation == 0 || relation == 2;
    const bool want_top = relation == 0 || relation == 1;

    Feature fa = random_feature(rng);
    Feature fb;
    do {
        fb = random_feature(rng);
    } while (fb == fa);

    const int margin = opt.spatial_axis_margin;
    for (int attempt = 0; attempt < opt.max_place_attempts; ++attempt) {
        SceneSpec scene = make_scene(seed, opt);
        ObjectSpec b = place_object(rng, fb, scene.objects, opt, seed);
        scene.objects.push_back(b);

        int a_size = rng.next_int(opt.min_size, opt.max_size);
        int half = a_size / 2;
        // Constrain A's top-left corner so the relation holds with margin.
        int x_lo = want_left ? 0 : b.cx + margin - half;
        int x_hi = want_left ? b.cx - margin - half : opt.canvas_w - a_size;
        int y_lo = want_top ? 0 : b.cy + margin - half;
        int y_hi = want_top ? b.cy - margin - half : opt.canvas_h - a_size;
        x_lo = std::max(x_lo, 0);
        y_lo = std::max(y_lo, 0);
        x_hi = std::min(x_hi, opt.canvas_w - a_size);
        y_hi = std::min(y_hi, opt.canvas_h - a_size);
        if (x_lo > x_hi || y_lo > y_hi) continue; // B too close to an edge

        ObjectSpec a;
        a.shape = fa.shape;
        a.color = fa.color;
        a.size = a_size;
        a.rot = 90 * rng.next_int(0, 3);
        int x0 = rng.next_int(x_lo, x_hi);
        int y0 = rng.next_int(y_lo, y_hi);
        a.cx = x0 + half;
        a.cy = y0 + half;
        if (boxes_overlap(a, b)) continue;

        scene.objects.insert(scene.objects.begin(), a); // A first, then B
        for (int i = 0; i < opt.spatial_n_distractors; ++i) {
            Feature f;
            do {
                f = random_feature(rng);
            } while (f == fa || f == fb); // targets stay uniquely identifiable
            scene.objects.push_back(place_object(rng, f, scene.objects, opt, seed));
        }

        int got = spatial_option_from_centers(a.cx, a.cy, b.cx, b.cy);
        if (got != relation) continue; // cannot happen, belt and braces

        TaskInstance inst;
        inst.task = Task::spatial;
        inst.params = {{"n_distractors", opt.spatial_n_distractors}};
        inst.difficulty = 0;
        inst.truth = SpatialTruth{relation, fa, fb};
        inst.id = make_id(Task::spatial, "mc", seed);
        inst.scene = std::move(scene);
        return inst;
    }
    throw GenerationError("spatial placement failed (seed=" + std::to_string(seed) + ")");
}

std::vector<int> row_assignment(const SceneSpec& scene, int n_rows) {
    if (n_rows < 1) throw Error("row_assignment: n_rows must be >= 1");
    std::vector<int> rows;
    rows.reserve(scene.objects.size());
    const long long h = scene.canvas_h;
    const long long n = n_rows;
    for (const auto& o : scene.objects) {
        // Work in units of 1/n pixel so band edges stay integral.
        long long y0 = static_cast<long long>(o.y0()) * n;
        long long y1 = static_cast<long long>(o.y1()) * n;
        long long best_overlap = std::numeric_limits<long long>::min();
        int best_row = 1;
        for (int k = 1; k <= n_rows; ++k) {
            long long b0 = (k - 1) * h;
            long long b1 = k * h;
            long long ov = std::min(y1, b1) - std::max(y0, b0);
            if (ov > best_overlap) { // strict: ties stay with the upper row
                best_overlap = ov;
                best_row = k;
            }
        }
        rows.push_back(best_row);
    }
    return rows;
}

IngestReport ingest_external(const std::string& manifest_path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("ingestion manifest is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_array()) throw IoError("ingestion manifest must be a JSON array");

    const auto base_dir = std::filesystem::path(manifest_path).parent_path();
    IngestReport rep;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        try {
            const auto& rec = doc[i];
            if (!rec.is_object()) throw IoError("record is not an object");
            std::string image = rec.contains("image_path") ? rec.at("image_path").get<std::string>()
                                                           : rec.at("image").get<std::string>();
            auto resolved = std::filesystem::path(image);
            if (resolved.is_relative()) resolved = base_dir / resolved;
            if (!std::filesystem::exists(resolved))
                throw IoError("image file not found: " + resolved.string());

            Task task = task_from_name(rec.at("task").get<std::string>());
            const auto& truth_json = rec.contains("ground_truth") ? rec.at("ground_truth")
                                                                  : rec.at("truth");

            TaskInstance inst;
            inst.task = task;
            inst.external_image = resolved.string();
            inst.id = "ext-" + std::to_string(i) + "-" +
                      std::filesystem::path(image).stem().string();
            inst.params = nlohmann::json::object();
            if (rec.contains("query")) inst.params["query"] = rec.at("query");
            // Shorthand truth forms are accepted alongside the full
            // {"kind": ...} document: a bare bool (search), integer (count
            // or spatial option index), or feature array (describe).
            switch (task) {
                case Task::search:
                    if (truth_json.is_boolean()) {
                        inst.truth = SearchTruth{truth_json.get<bool>(), {}};
                    } else {
                        inst.truth = truth_from_json(truth_json);
                    }
                    break;
                case Task::count:
                    if (truth_json.is_number_integer()) {
                        int v = truth_json.get<int>();
                        if (v < 0) throw IoError("count truth must be non-negative");
                        inst.truth = CountTruth{v, {}};
                        inst.difficulty = v;
                    } else {
                        inst.truth = truth_from_json(truth_json);
                        inst.difficulty = std::get<CountTruth>(inst.truth).count;
                    }
                    break;
                case Task::describe:
                    if (truth_json.is_array()) {
                        DescribeTruth d;
                        for (const auto& e : truth_json)
                            d.objects.push_back({shape_from_name(e.at("shape").get<std::string>()),
                                                 color_from_name(e.at("color").get<std::string>())});
                        inst.truth = std::move(d);
                    } else {
                        inst.truth = truth_from_json(truth_json);
                    }
                    inst.difficulty =
                        static_cast<int>(std::get<DescribeTruth>(inst.truth).objects.size());
                    break;
                case Task::spatial:
                    if (truth_json.is_number_integer()) {
                        int v = truth_json.get<int>();
                        if (v < 0 || v > 3) throw IoError("spatial option index out of range");
                        inst.truth = SpatialTruth{v, {}, {}};
                    } else if (truth_json.is_object() && !truth_json.contains("kind")) {
                        SpatialTruth s;
                        s.correct_option = truth_json.at("correct_option").get<int>();
                        if (s.correct_option < 0 || s.correct_option > 3)
                            throw IoError("spatial option index out of range");
                        inst.truth = s;
                    } else {
                        inst.truth = truth_from_json(truth_json);
                    }
                    break;
            }
            rep.instances.push_back(std::move(inst));
        } catch (const std::exception& e) {
            rep.errors.push_back({i, e.what()});
        }
    }
    return rep;
}

std::string instance_image_name(const TaskInstance& inst) { return inst.id; }

} // namespace bindbench
