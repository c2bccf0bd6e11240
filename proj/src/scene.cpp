#include "bindbench/scene.hpp"

#include "bindbench/common.hpp"

namespace bindbench {

namespace {

const char* kShapeNames[kShapeCount] = {"letter_L", "letter_T", "circle", "square",
                                        "triangle", "star",     "cross",  "letter_X"};
const char* kShapeWords[kShapeCount] = {"L", "T", "circle", "square", "triangle", "star", "cross", "X"};
const char* kShapePlurals[kShapeCount] = {"L shapes", "T shapes", "circles", "squares",
                                          "triangles", "stars",   "crosses", "X shapes"};
const char* kColorNames[kColorCount] = {"red",    "green",  "blue", "yellow",
                                        "purple", "orange", "cyan", "magenta"};
const char* kTaskNames[4] = {"search", "count", "describe", "spatial"};

// Palette deliberately avoids black (scaffold stroke) and white (background).
const Rgb kPalette[kColorCount] = {
    {220, 40, 40},  // red
    {40, 160, 60},  // green
    {50, 70, 220},  // blue
    {235, 200, 40}, // yellow
    {140, 60, 190}, // purple
    {240, 140, 30}, // orange
    {45, 195, 205}, // cyan
    {225, 60, 180}, // magenta
};

} // namespace

std::string shape_name(Shape s) { return kShapeNames[static_cast<int>(s)]; }
std::string shape_word(Shape s) { return kShapeWords[static_cast<int>(s)]; }
std::string shape_plural(Shape s) { return kShapePlurals[static_cast<int>(s)]; }
std::string color_name(Color c) { return kColorNames[static_cast<int>(c)]; }
std::string task_name(Task t) { return kTaskNames[static_cast<int>(t)]; }
Rgb color_rgb(Color c) { return kPalette[static_cast<int>(c)]; }

Shape shape_from_name(const std::string& name) {
    for (int i = 0; i < kShapeCount; ++i)
        if (name == kShapeNames[i]) return static_cast<Shape>(i);
    throw IoError("unknown shape name: " + name);
}

Color color_from_name(const std::string& name) {
    for (int i = 0; i < kColorCount; ++i)
        if (name == kColorNames[i]) return static_cast<Color>(i);
    throw IoError("unknown color name: " + name);
}

Task task_from_name(const std::string& name) {
    for (int i = 0; i < 4; ++i)
        if (name == kTaskNames[i]) return static_cast<Task>(i);
    throw IoError("unknown task name: " + name);
}

bool boxes_overlap(const ObjectSpec& a, const ObjectSpec& b) {
    return a.x0() < b.x1() && b.x0() < a.x1() && a.y0() < b.y1() && b.y0() < a.y1();
}

namespace {

nlohmann::json feature_to_json(const Feature& f) {
    return {{"shape", shape_name(f.shape)}, {"color", color_name(f.color)}};
}

Feature feature_from_json(const nlohmann::json& j) {
    return {shape_from_name(j.at("shape").get<std::string>()),
            color_from_name(j.at("color").get<std::string>())};
}

} // namespace

nlohmann::json truth_to_json(const GroundTruth& t) {
    nlohmann::json j;
    if (const auto* s = std::get_if<SearchTruth>(&t)) {
        j["kind"] = "search";
        j["present"] = s->present;
        j["target"] = feature_to_json(s->target);
    } else if (const auto* c = std::get_if<CountTruth>(&t)) {
        j["kind"] = "count";
        j["count"] = c->count;
        j["target"] = feature_to_json(c->target);
    } else if (const auto* d = std::get_if<DescribeTruth>(&t)) {
        j["kind"] = "describe";
        auto arr = nlohmann::json::array();
        for (const auto& f : d->objects) arr.push_back(feature_to_json(f));
        j["objects"] = arr;
    } else if (const auto* sp = std::get_if<SpatialTruth>(&t)) {
        j["kind"] = "spatial";
        j["correct_option"] = sp->correct_option;
        j["a"] = feature_to_json(sp->a);
        j["b"] = feature_to_json(sp->b);
        j["options"] = kSpatialOptions;
    }
    return j;
}

GroundTruth truth_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "search") {
        return SearchTruth{j.at("present").get<bool>(), feature_from_json(j.at("target"))};
    }
    if (kind == "count") {
        return CountTruth{j.at("count").get<int>(), feature_from_json(j.at("target"))};
    }
    if (kind == "describe") {
        DescribeTruth d;
        for (const auto& e : j.at("objects")) d.objects.push_back(feature_from_json(e));
        return d;
    }
    if (kind == "spatial") {
        SpatialTruth s;
        s.correct_option = j.at("correct_option").get<int>();
        if (s.correct_option < 0 || s.correct_option > 3)
            throw IoError("spatial correct_option out of range");
        s.a = feature_from_json(j.at("a"));
        s.b = feature_from_json(j.at("b"));
        return s;
    }
    throw IoError("unknown ground truth kind: " + kind);
}

nlohmann::json instance_to_json(const TaskInstance& inst) {
    nlohmann::json j;
    j["id"] = inst.id;
    j["task"] = task_name(inst.task);
    j["params"] = inst.params;
    j["difficulty"] = inst.difficulty;
    j["ground_truth"] = truth_to_json(inst.truth);
    if (inst.scene) {
        const SceneSpec& s = *inst.scene;
        j["seed"] = s.seed;
        j["canvas"] = {s.canvas_w, s.canvas_h};
        auto arr = nlohmann::json::array();
        for (const auto& o : s.objects) {
            arr.push_back({{"shape", shape_name(o.shape)},
                           {"color", color_name(o.color)},
                           {"cx", o.cx},
                           {"cy", o.cy},
                           {"size", o.size},
                           {"rot", o.rot}});
        }
        j["objects"] = arr;
    } else {
        j["image_path"] = inst.external_image;
    }
    return j;
}

TaskInstance instance_from_json(const nlohmann::json& j) {
    TaskInstance inst;
    inst.id = j.at("id").get<std::string>();
    inst.task = task_from_name(j.at("task").get<std::string>());
    inst.params = j.value("params", nlohmann::json::object());
    inst.difficulty = j.value("difficulty", 0);
    inst.truth = truth_from_json(j.at("ground_truth"));
    if (j.contains("objects")) {
        SceneSpec s;
        s.seed = j.at("seed").get<std::uint64_t>();
        s.canvas_w = j.at("canvas").at(0).get<int>();
        s.canvas_h = j.at("canvas").at(1).get<int>();
        for (const auto& e : j.at("objects")) {
            ObjectSpec o;
            o.shape = shape_from_name(e.at("shape").get<std::string>());
            o.color = color_from_name(e.at("color").get<std::string>());
            o.cx = e.at("cx").get<int>();
            o.cy = e.at("cy").get<int>();
            o.size = e.at("size").get<int>();
            o.rot = e.at("rot").get<int>();
            s.objects.push_back(o);
        }
        inst.scene = std::move(s);
    } else {
        inst.external_image = j.at("image_path").get<std::string>();
    }
    return inst;
}

} // namespace bindbench
