#pragma once

#include "bindbench/image.hpp"

#include <json.hpp>

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace bindbench {

enum class Shape { letter_l, letter_t, circle, square, triangle, star, cross, letter_x };
enum class Color { red, green, blue, yellow, purple, orange, cyan, magenta };
enum class Task { search, count, describe, spatial };

constexpr int kShapeCount = 8;
constexpr int kColorCount = 8;

// Wire names ("letter_L") used in manifests; word forms ("L") used in prompts
// and oracle answers.
std::string shape_name(Shape s);
std::string shape_word(Shape s);
std::string shape_plural(Shape s);
std::string color_name(Color c);
std::string task_name(Task t);
Shape shape_from_name(const std::string& name);  // throws IoError on unknown
Color color_from_name(const std::string& name);
Task task_from_name(const std::string& name);
Rgb color_rgb(Color c);

// The (shape, color) pair: the unit the describe metrics operate on.
struct Feature {
    Shape shape;
    Color color;
    auto operator<=>(const Feature&) const = default;
};

struct ObjectSpec {
    Shape shape = Shape::circle;
    Color color = Color::red;
    int cx = 0; // bounding-box center, pixels
    int cy = 0;
    int size = 0; // bounding-box edge length, pixels
    int rot = 0;  // degrees, one of 0/90/180/270

    int x0() const { return cx - size / 2; }
    int y0() const { return cy - size / 2; }
    int x1() const { return x0() + size; }
    int y1() const { return y0() + size; }
    Feature feature() const { return {shape, color}; }
};

bool boxes_overlap(const ObjectSpec& a, const ObjectSpec& b);

struct SceneSpec {
    int canvas_w = 512;
    int canvas_h = 512;
    std::uint64_t seed = 0;
    std::vector<ObjectSpec> objects;

    bool operator==(const SceneSpec&) const = default;
};

struct SearchTruth {
    bool present = false;
    Feature target;
};

struct CountTruth {
    int count = 0;
    Feature target;
};

struct DescribeTruth {
    std::vector<Feature> objects; // multiset; order not significant
};

// Options are always the four quadrant relations in this fixed order.
inline const std::array<std::string, 4> kSpatialOptions = {"top-left", "top-right", "bottom-left",
                                                           "bottom-right"};

struct SpatialTruth {
    int correct_option = 0; // index into kSpatialOptions
    Feature a;              // the queried object
    Feature b;              // the reference object
};

using GroundTruth = std::variant<SearchTruth, CountTruth, DescribeTruth, SpatialTruth>;

struct TaskInstance {
    Task task = Task::search;
    std::optional<SceneSpec> scene; // absent for externally ingested images
    std::string external_image;     // path, only when scene is absent
    nlohmann::json params;          // generator parameters (task-specific)
    GroundTruth truth;
    std::string id;     // stable identifier, also the image base name
    int difficulty = 0; // table row key: object/target count; 0 for spatial
};

// Scene manifest document: {task, seed, params, objects, ground_truth, ...}.
nlohmann::json instance_to_json(const TaskInstance& inst);
TaskInstance instance_from_json(const nlohmann::json& j);

nlohmann::json truth_to_json(const GroundTruth& t);
GroundTruth truth_from_json(const nlohmann::json& j);

} // namespace bindbench
