#include "bindbench/harness.hpp"

#include "bindbench/common.hpp"
#include "bindbench/metrics.hpp"
#include "bindbench/sha256.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace bindbench {

namespace {

constexpr std::uint64_t kSeedsPerCell = 1'000'000; // cells own disjoint seed ranges

nlohmann::json feature_json(const Feature& f) {
    return {{"shape", shape_name(f.shape)}, {"color", color_name(f.color)}};
}

Feature feature_from(const nlohmann::json& j) {
    return {shape_from_name(j.at("shape").get<std::string>()),
            color_from_name(j.at("color").get<std::string>())};
}

} // namespace

int RunConfig::instances_for(Task t) const {
    auto it = instances_per_cell.find(t);
    if (it != instances_per_cell.end()) return it->second;
    return (t == Task::search || t == Task::count) ? 100 : 50;
}

void RunConfig::validate() const {
    if (conditions.empty()) throw Error("run config: conditions list is empty");
    if (providers.empty()) throw Error("run config: providers list is empty");
    if (concurrency_per_provider < 1) throw Error("run config: concurrency must be >= 1");
    std::set<std::string> names;
    for (const auto& p : providers) {
        p.validate();
        if (!names.insert(p.name).second) throw Error("run config: duplicate provider name " + p.name);
    }
    for (int t = 0; t < 4; ++t) {
        int n = instances_for(static_cast<Task>(t));
        if (n < 1) throw Error("run config: instances_per_cell must be >= 1");
        if (static_cast<std::uint64_t>(n) >= kSeedsPerCell)
            throw Error("run config: instances_per_cell exceeds the per-cell seed range");
    }
    if (!(run_search || run_count || run_describe || run_spatial || !external_manifests.empty()))
        throw Error("run config: no tasks enabled");
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["base_seed"] = cfg.base_seed;
    if (!cfg.instances_per_cell.empty()) {
        nlohmann::json per;
        for (const auto& [task, n] : cfg.instances_per_cell) per[task_name(task)] = n;
        j["instances_per_cell"] = per;
    }
    auto conds = nlohmann::json::array();
    for (auto c : cfg.conditions) conds.push_back(condition_name(c));
    j["conditions"] = conds;
    auto provs = nlohmann::json::array();
    for (const auto& p : cfg.providers) provs.push_back(provider_config_to_json(p));
    j["providers"] = provs;
    j["concurrency_per_provider"] = cfg.concurrency_per_provider;
    j["cache_dir"] = cfg.cache_dir;
    j["output_dir"] = cfg.output_dir;
    j["fix_grammar"] = cfg.fix_grammar;
    j["scaffold"] = {{"n_lines", cfg.scaffold_n_lines}, {"stroke_width", cfg.scaffold_stroke_width}};
    j["scene"] = {{"canvas", {cfg.scene.canvas_w, cfg.scene.canvas_h}},
                  {"min_size", cfg.scene.min_size},
                  {"max_size", cfg.scene.max_size},
                  {"max_place_attempts", cfg.scene.max_place_attempts},
                  {"triplet_restarts", cfg.scene.triplet_restarts},
                  {"spatial_axis_margin", cfg.scene.spatial_axis_margin}};
    if (!cfg.resource_dir.empty()) j["resource_dir"] = cfg.resource_dir;

    nlohmann::json tasks = nlohmann::json::object();
    if (cfg.run_search)
        tasks["search"] = {{"object_counts", cfg.search_object_counts},
                           {"target", feature_json(cfg.search_target)}};
    if (cfg.run_count)
        tasks["count"] = {{"target_counts", cfg.count_target_counts},
                          {"target", feature_json(cfg.count_target)},
                          {"n_distractors", cfg.count_distractors}};
    if (cfg.run_describe) {
        nlohmann::json grid = nlohmann::json::object();
        for (const auto& [n, triplets] : cfg.describe_grid) grid[std::to_string(n)] = triplets;
        tasks["describe"] = {{"grid", grid}};
    }
    if (cfg.run_spatial) tasks["spatial"] = {{"n_distractors", cfg.spatial_distractors}};
    j["tasks"] = tasks;
    if (!cfg.external_manifests.empty()) j["external_manifests"] = cfg.external_manifests;
    return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    cfg.base_seed = j.value("base_seed", std::uint64_t{1});
    if (j.contains("instances_per_cell")) {
        const auto& per = j.at("instances_per_cell");
        if (per.is_number_integer()) {
            for (int t = 0; t < 4; ++t)
                cfg.instances_per_cell[static_cast<Task>(t)] = per.get<int>();
        } else {
            for (const auto& [key, n] : per.items())
                cfg.instances_per_cell[task_from_name(key)] = n.get<int>();
        }
    }
    if (j.contains("conditions")) {
        cfg.conditions.clear();
        for (const auto& c : j.at("conditions"))
            cfg.conditions.push_back(condition_from_name(c.get<std::string>()));
    }
    cfg.providers.clear();
    for (const auto& p : j.at("providers")) cfg.providers.push_back(provider_config_from_json(p));
    cfg.concurrency_per_provider = j.value("concurrency_per_provider", 1);
    cfg.cache_dir = j.value("cache_dir", "cache");
    cfg.output_dir = j.value("output_dir", "out");
    cfg.fix_grammar = j.value("fix_grammar", false);
    if (j.contains("scaffold")) {
        cfg.scaffold_n_lines = j["scaffold"].value("n_lines", 3);
        cfg.scaffold_stroke_width = j["scaffold"].value("stroke_width", 2);
    }
    if (j.contains("scene")) {
        const auto& s = j["scene"];
        if (s.contains("canvas")) {
            cfg.scene.canvas_w = s["canvas"].at(0).get<int>();
            cfg.scene.canvas_h = s["canvas"].at(1).get<int>();
        }
        cfg.scene.min_size = s.value("min_size", cfg.scene.min_size);
        cfg.scene.max_size = s.value("max_size", cfg.scene.max_size);
        cfg.scene.max_place_attempts = s.value("max_place_attempts", cfg.scene.max_place_attempts);
        cfg.scene.triplet_restarts = s.value("triplet_restarts", cfg.scene.triplet_restarts);
        cfg.scene.spatial_axis_margin =
            s.value("spatial_axis_margin", cfg.scene.spatial_axis_margin);
    }
    cfg.resource_dir = j.value("resource_dir", std::string{});

    const auto tasks = j.value("tasks", nlohmann::json::object());
    if (tasks.contains("search")) {
        cfg.run_search = true;
        const auto& t = tasks["search"];
        if (t.contains("object_counts")) cfg.search_object_counts = t["object_counts"].get<std::vector<int>>();
        if (t.contains("target")) cfg.search_target = feature_from(t["target"]);
    }
    if (tasks.contains("count")) {
        cfg.run_count = true;
        const auto& t = tasks["count"];
        if (t.contains("target_counts")) cfg.count_target_counts = t["target_counts"].get<std::vector<int>>();
        if (t.contains("target")) cfg.count_target = feature_from(t["target"]);
        cfg.count_distractors = t.value("n_distractors", cfg.count_distractors);
    }
    if (tasks.contains("describe")) {
        cfg.run_describe = true;
        const auto& t = tasks["describe"];
        if (t.contains("grid")) {
            for (const auto& [key, triplets] : t["grid"].items())
                cfg.describe_grid[std::stoi(key)] = triplets.get<std::vector<int>>();
        } else {
            // Shorthand: object_counts x triplet_counts, fully crossed.
            auto counts = t.at("object_counts").get<std::vector<int>>();
            auto triplets = t.at("triplet_counts").get<std::vector<int>>();
            for (int n : counts) cfg.describe_grid[n] = triplets;
        }
    }
    if (tasks.contains("spatial")) {
        cfg.run_spatial = true;
        cfg.spatial_distractors = tasks["spatial"].value("n_distractors", cfg.spatial_distractors);
    }
    if (j.contains("external_manifests"))
        cfg.external_manifests = j["external_manifests"].get<std::vector<std::string>>();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("config file is not valid JSON: " + std::string(e.what()));
    }
    return run_config_from_json(j);
}

std::vector<GridCell> expand_grid(const RunConfig& cfg) {
    std::vector<GridCell> cells;
    auto add = [&](Task task, nlohmann::json params, int difficulty) {
        GridCell cell;
        cell.task = task;
        cell.params = std::move(params);
        cell.difficulty = difficulty;
        cell.seed_base = cfg.base_seed + static_cast<std::uint64_t>(cells.size() + 1) * kSeedsPerCell;
        cell.n_instances = cfg.instances_for(task);
        cells.push_back(std::move(cell));
    };
    if (cfg.run_search)
        for (int n : cfg.search_object_counts) add(Task::search, {{"n_objects", n}}, n);
    if (cfg.run_count)
        for (int n : cfg.count_target_counts) add(Task::count, {{"n_targets", n}}, n);
    if (cfg.run_describe)
        for (const auto& [n, triplets] : cfg.describe_grid)
            for (int t : triplets) add(Task::describe, {{"n_objects", n}, {"n_triplets", t}}, n);
    if (cfg.run_spatial) add(Task::spatial, nlohmann::json::object(), 0);
    return cells;
}

TaskInstance make_cell_instance(const RunConfig& cfg, const GridCell& cell, int index) {
    std::uint64_t seed = cell.seed_base + static_cast<std::uint64_t>(index);
    SceneGenOptions opt = cfg.scene;
    switch (cell.task) {
        case Task::search: {
            opt.search_target = cfg.search_target;
            bool present = index % 2 == 0; // balanced presence within the cell
            return gen_search_scene(seed, cell.params.at("n_objects").get<int>(), present, opt);
        }
        case Task::count:
            return gen_count_scene(seed, cell.params.at("n_targets").get<int>(), cfg.count_target,
                                   cfg.count_distractors, opt);
        case Task::describe:
            return gen_description_scene(seed, cell.params.at("n_objects").get<int>(),
                                         cell.params.at("n_triplets").get<int>(), opt);
        case Task::spatial:
            opt.spatial_n_distractors = cfg.spatial_distractors;
            return gen_spatial_instance(seed, opt);
    }
    throw Error("unreachable task kind");
}

std::string cache_key(const std::string& model_id, const std::string& image_png,
                      const std::string& prompt_text, double temperature) {
    Sha256 digest;
    digest.update(model_id);
    digest.update("\n");
    digest.update(sha256_hex(image_png));
    digest.update("\n");
    digest.update(sha256_hex(prompt_text));
    digest.update("\n");
    char temp[32];
    std::snprintf(temp, sizeof(temp), "%.6f", temperature);
    digest.update(temp, std::strlen(temp));
    auto d = digest.finish();
    return to_hex(d.data(), d.size());
}

nlohmann::json record_to_json(const RunRecord& r) {
    return {{"record_index", r.record_index},
            {"instance_id", r.instance_id},
            {"task", task_name(r.task)},
            {"condition", condition_name(r.condition)},
            {"provider", r.provider},
            {"model", r.model},
            {"difficulty", r.difficulty},
            {"params", r.params},
            {"seed", r.seed},
            {"cache_key", r.cache_key},
            {"raw_text", r.raw_text},
            {"parse_status", parse_status_name(r.parse_status)},
            {"parsed", r.parsed},
            {"ground_truth", r.ground_truth},
            {"scores", r.scores},
            {"latency_ms", r.latency_ms},
            {"attempts", r.attempts}};
}

RunRecord record_from_json(const nlohmann::json& j) {
    RunRecord r;
    r.record_index = j.at("record_index").get<long long>();
    r.instance_id = j.at("instance_id").get<std::string>();
    r.task = task_from_name(j.at("task").get<std::string>());
    r.condition = condition_from_name(j.at("condition").get<std::string>());
    r.provider = j.at("provider").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.difficulty = j.at("difficulty").get<int>();
    r.params = j.value("params", nlohmann::json::object());
    r.seed = j.value("seed", std::uint64_t{0});
    r.cache_key = j.at("cache_key").get<std::string>();
    r.raw_text = j.at("raw_text").get<std::string>();
    r.parse_status = parse_status_from_name(j.at("parse_status").get<std::string>());
    r.parsed = j.value("parsed", nlohmann::json::object());
    r.ground_truth = j.at("ground_truth");
    r.scores = j.value("scores", nlohmann::json::object());
    r.latency_ms = j.value("latency_ms", std::int64_t{0});
    r.attempts = j.value("attempts", 1);
    return r;
}

std::vector<RunRecord> read_records(const std::string& jsonl_path) {
    std::vector<RunRecord> records;
    std::istringstream in(read_file(jsonl_path));
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw IoError(jsonl_path + ":" + std::to_string(line_no) + ": bad record: " + e.what());
        }
    }
    return records;
}

ParsedAnswer parse_record_answer(Task task, const std::string& raw_text,
                                 const SynonymTable& synonyms) {
    return parse_answer(task, raw_text, synonyms);
}

nlohmann::json parsed_payload_json(Task task, const ParsedAnswer& answer) {
    nlohmann::json j = nlohmann::json::object();
    if (answer.status == ParseStatus::failed) return j; // failed answers carry no payload
    switch (task) {
        case Task::search:
            j["bool"] = *answer.boolean;
            break;
        case Task::count:
            j["count"] = *answer.count;
            break;
        case Task::describe: {
            auto arr = nlohmann::json::array();
            for (const auto& f : answer.objects) arr.push_back(feature_json(f));
            j["objects"] = arr;
            if (!answer.unknown_tokens.empty()) j["unknown_tokens"] = answer.unknown_tokens;
            break;
        }
        case Task::spatial:
            j["choice"] = *answer.choice;
            break;
    }
    return j;
}

nlohmann::json score_answer(Task task, const GroundTruth& truth, const ParsedAnswer& answer) {
    const bool failed = answer.status == ParseStatus::failed;
    switch (task) {
        case Task::search: {
            const auto& t = std::get<SearchTruth>(truth);
            bool correct = !failed && answer.boolean && *answer.boolean == t.present;
            return {{"correct", correct ? 1 : 0}, {"visible", t.present}};
        }
        case Task::count: {
            const auto& t = std::get<CountTruth>(truth);
            bool correct = !failed && answer.count && *answer.count == t.count;
            nlohmann::json j = {{"correct", correct ? 1 : 0}, {"truth", t.count}};
            if (!failed && answer.count) j["pred"] = *answer.count;
            return j;
        }
        case Task::describe: {
            const auto& t = std::get<DescribeTruth>(truth);
            // Failed parses score as an empty prediction multiset.
            std::span<const Feature> pred =
                failed ? std::span<const Feature>{} : std::span<const Feature>(answer.objects);
            auto ed = scene_edit_distance(pred, t.objects);
            return {{"edit_distance", ed.value},
                    {"f1", f1_score(pred, t.objects)},
                    {"jaccard", jaccard(pred, t.objects)},
                    {"n_exact", ed.breakdown.n_exact},
                    {"n_partial_shape", ed.breakdown.n_partial_shape},
                    {"n_partial_color", ed.breakdown.n_partial_color},
                    {"n_missed", ed.breakdown.n_missed_gt},
                    {"n_extra", ed.breakdown.n_extra_pred}};
        }
        case Task::spatial: {
            const auto& t = std::get<SpatialTruth>(truth);
            bool correct = !failed && answer.choice && *answer.choice == t.correct_option;
            return {{"correct", correct ? 1 : 0}};
        }
    }
    return {};
}

// ---------------------------------------------------------------------------

namespace {

struct WorkItem {
    long long record_index;
    std::size_t instance_idx;
    std::size_t condition_idx;
    std::size_t provider_idx;
};

// Appends JSONL lines in record_index order regardless of completion order,
// so full runs produce byte-identical streams.
class SequencedWriter {
public:
    SequencedWriter(const std::string& path, std::set<long long> expected)
        : out_(path, std::ios::app), expected_(std::move(expected)) {
        if (!out_) throw IoError("cannot open records file for append: " + path);
    }

    void complete(long long index, std::optional<std::string> line) {
        std::lock_guard<std::mutex> lock(mutex_);
        pending_[index] = std::move(line);
        while (!expected_.empty()) {
            auto first = *expected_.begin();
            auto it = pending_.find(first);
            if (it == pending_.end()) break;
            if (it->second) {
                out_ << *it->second << '\n';
                out_.flush();
            }
            pending_.erase(it);
            expected_.erase(expected_.begin());
        }
    }

private:
    std::ofstream out_;
    std::mutex mutex_;
    std::set<long long> expected_;
    std::map<long long, std::optional<std::string>> pending_;
};

std::optional<nlohmann::json> cache_load(const std::string& dir, const std::string& key) {
    auto path = std::filesystem::path(dir) / (key + ".json");
    if (!std::filesystem::exists(path)) return std::nullopt;
    try {
        return nlohmann::json::parse(read_file(path.string()));
    } catch (const std::exception&) {
        return std::nullopt; // torn cache entry: treat as a miss
    }
}

void cache_store(const std::string& dir, const std::string& key, const nlohmann::json& entry) {
    auto path = std::filesystem::path(dir) / (key + ".json");
    write_file(path.string(), entry.dump());
}

} // namespace

Harness::Harness(RunConfig cfg, TransportFactory transport_factory, std::shared_ptr<Clock> clock)
    : cfg_(std::move(cfg)),
      transport_factory_(std::move(transport_factory)),
      clock_(clock ? std::move(clock) : system_clock()) {}

RunResult Harness::run() {
    cfg_.validate();
    const std::string resource_root =
        cfg_.resource_dir.empty() ? default_resource_dir() : cfg_.resource_dir;
    PromptLibrary prompts((std::filesystem::path(resource_root) / "prompts").string(),
                          cfg_.fix_grammar);
    SynonymTable synonyms =
        SynonymTable::load((std::filesystem::path(resource_root) / "synonyms.tsv").string());

    RunResult result;

    // Expand the grid into concrete instances; a generation failure skips
    // the whole cell with its reason and the run continues.
    std::vector<TaskInstance> instances;
    for (const GridCell& cell : expand_grid(cfg_)) {
        std::vector<TaskInstance> cell_instances;
        try {
            for (int i = 0; i < cell.n_instances; ++i)
                cell_instances.push_back(make_cell_instance(cfg_, cell, i));
        } catch (const GenerationError& e) {
            result.skipped.push_back({task_name(cell.task) + " " + cell.params.dump(), e.what()});
            continue;
        }
        for (auto& inst : cell_instances) instances.push_back(std::move(inst));
    }
    for (const std::string& manifest : cfg_.external_manifests) {
        IngestReport rep = ingest_external(manifest);
        for (const auto& err : rep.errors)
            result.skipped.push_back(
                {manifest + "[" + std::to_string(err.record_index) + "]", err.message});
        for (auto& inst : rep.instances) instances.push_back(std::move(inst));
    }

    const std::size_t n_conditions = cfg_.conditions.size();
    const std::size_t n_providers = cfg_.providers.size();

    // Resume: keep valid existing records, drop any torn tail, skip their keys.
    std::filesystem::create_directories(cfg_.output_dir);
    std::filesystem::create_directories(cfg_.cache_dir);
    result.records_path =
        (std::filesystem::path(cfg_.output_dir) / "records.jsonl").string();
    std::set<std::string> done_keys;
    if (std::filesystem::exists(result.records_path)) {
        std::string raw = read_file(result.records_path);
        std::string kept;
        std::istringstream in(raw);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            try {
                auto j = nlohmann::json::parse(line);
                done_keys.insert(j.at("instance_id").get<std::string>() + "|" +
                                 j.at("condition").get<std::string>() + "|" +
                                 j.at("provider").get<std::string>());
                kept += line;
                kept += '\n';
            } catch (const std::exception&) {
                break; // torn tail: discard the rest
            }
        }
        if (kept.size() != raw.size()) write_file(result.records_path, kept);
        result.n_resumed = static_cast<long long>(done_keys.size());
    }

    // Work items in deterministic grid order.
    std::vector<WorkItem> items;
    std::vector<std::vector<std::size_t>> per_provider(n_providers);
    std::set<long long> expected;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        for (std::size_t c = 0; c < n_conditions; ++c) {
            for (std::size_t p = 0; p < n_providers; ++p) {
                long long index = static_cast<long long>((i * n_conditions + c) * n_providers + p);
                std::string key = instances[i].id + "|" + condition_name(cfg_.conditions[c]) + "|" +
                                  cfg_.providers[p].name;
                if (done_keys.count(key)) continue;
                per_provider[p].push_back(items.size());
                items.push_back({index, i, c, p});
                expected.insert(index);
            }
        }
    }

    SequencedWriter writer(result.records_path, std::move(expected));

    // Per-provider clients (HTTP kinds only).
    std::vector<std::unique_ptr<ProviderClient>> clients(n_providers);
    for (std::size_t p = 0; p < n_providers; ++p) {
        if (cfg_.providers[p].kind == ProviderKind::oracle) continue;
        auto transport = transport_factory_ ? transport_factory_(cfg_.providers[p]) : nullptr;
        clients[p] = std::make_unique<ProviderClient>(cfg_.providers[p], transport, clock_);
    }

    // Scaffolded image bytes, shared across providers.
    std::map<std::uint64_t, std::string> image_cache;
    std::mutex image_mutex;
    auto image_for = [&](std::size_t instance_idx, ScaffoldVariant variant) -> std::string {
        std::uint64_t key = instance_idx * 8 + static_cast<std::uint64_t>(variant);
        {
            std::lock_guard<std::mutex> lock(image_mutex);
            auto it = image_cache.find(key);
            if (it != image_cache.end()) return it->second;
        }
        const TaskInstance& inst = instances[instance_idx];
        Image base = inst.scene ? render(*inst.scene) : decode_png(read_file(inst.external_image));
        ScaffoldConfig scfg;
        scfg.variant = variant;
        scfg.n_lines = cfg_.scaffold_n_lines;
        scfg.stroke_width = cfg_.scaffold_stroke_width;
        std::string png = encode_png(variant == ScaffoldVariant::none ? base
                                                                      : apply_scaffold(base, scfg));
        std::lock_guard<std::mutex> lock(image_mutex);
        return image_cache.emplace(key, std::move(png)).first->second;
    };

    std::mutex result_mutex;
    std::atomic<long long> cache_hits{0}, provider_calls{0}, written{0};

    auto process_item = [&](const WorkItem& item) {
        const TaskInstance& inst = instances[item.instance_idx];
        const Condition condition = cfg_.conditions[item.condition_idx];
        const ProviderConfig& provider = cfg_.providers[item.provider_idx];
        try {
            std::string png = image_for(item.instance_idx, condition_scaffold_variant(condition));
            PromptText prompt =
                prompts.build_prompt(inst.task, condition, PromptLibrary::metadata_for(inst));
            std::string key = cache_key(provider.model_id, png, prompt.text, provider.temperature);

            std::string raw_text;
            std::int64_t latency_ms = 0;
            int attempts = 1;
            if (auto cached = cache_load(cfg_.cache_dir, key)) {
                raw_text = cached->at("raw_text").get<std::string>();
                latency_ms = cached->value("latency_ms", std::int64_t{0});
                attempts = cached->value("attempts", 1);
                ++cache_hits;
            } else {
                if (provider.kind == ProviderKind::oracle) {
                    raw_text = oracle_answer(inst, provider.oracle);
                } else {
                    ModelResponse resp = clients[item.provider_idx]->send(png, prompt);
                    raw_text = resp.raw_text;
                    latency_ms = resp.latency_ms;
                    attempts = resp.attempts;
                    ++provider_calls;
                }
                cache_store(cfg_.cache_dir, key,
                            {{"raw_text", raw_text},
                             {"latency_ms", latency_ms},
                             {"attempts", attempts},
                             {"model", provider.model_id}});
            }

            ParsedAnswer answer = parse_answer(inst.task, raw_text, synonyms);
            RunRecord rec;
            rec.record_index = item.record_index;
            rec.instance_id = inst.id;
            rec.task = inst.task;
            rec.condition = condition;
            rec.provider = provider.name;
            rec.model = provider.model_id;
            rec.difficulty = inst.difficulty;
            rec.params = inst.params;
            rec.seed = inst.scene ? inst.scene->seed : 0;
            rec.cache_key = key;
            rec.raw_text = raw_text;
            rec.parse_status = answer.status;
            rec.parsed = parsed_payload_json(inst.task, answer);
            rec.ground_truth = truth_to_json(inst.truth);
            rec.scores = score_answer(inst.task, inst.truth, answer);
            rec.latency_ms = latency_ms;
            rec.attempts = attempts;
            writer.complete(item.record_index, record_to_json(rec).dump());
            ++written;
        } catch (const SendError& e) {
            {
                std::lock_guard<std::mutex> lock(result_mutex);
                result.incomplete.push_back(
                    {inst.id, condition_name(condition), provider.name, e.what()});
            }
            writer.complete(item.record_index, std::nullopt);
        }
    };

    // Bounded worker pool per provider; all providers run in parallel.
    std::vector<std::thread> threads;
    std::vector<std::atomic<std::size_t>> cursors(n_providers);
    for (auto& c : cursors) c = 0;
    for (std::size_t p = 0; p < n_providers; ++p) {
        int workers = std::min<int>(cfg_.concurrency_per_provider,
                                    static_cast<int>(per_provider[p].size()));
        for (int w = 0; w < workers; ++w) {
            threads.emplace_back([&, p] {
                while (true) {
                    std::size_t at = cursors[p].fetch_add(1);
                    if (at >= per_provider[p].size()) break;
                    process_item(items[per_provider[p][at]]);
                }
            });
        }
    }
    for (auto& t : threads) t.join();

    result.n_written = written;
    result.n_cache_hits = cache_hits;
    result.n_provider_calls = provider_calls;

    nlohmann::json summary = {{"records", result.records_path},
                              {"written", result.n_written},
                              {"resumed", result.n_resumed},
                              {"cache_hits", result.n_cache_hits},
                              {"provider_calls", result.n_provider_calls},
                              {"incomplete", result.incomplete.size()},
                              {"skipped", result.skipped.size()}};
    write_file((std::filesystem::path(cfg_.output_dir) / "run_summary.json").string(),
               summary.dump(2) + "\n");
    return result;
}

// ---------------------------------------------------------------------------

namespace {

struct GroupStats {
    long long n = 0;
    long long parse_failures = 0;
    long long visible_n = 0, visible_correct = 0;
    long long invisible_n = 0, invisible_correct = 0;
    long long correct = 0;
    double edit_sum = 0, f1_sum = 0, jaccard_sum = 0;
    double sq_err_sum = 0;
    long long mse_n = 0;
};

struct GroupKey {
    std::string model;
    Task task;
    Condition condition;
    int difficulty;
    auto operator<=>(const GroupKey&) const = default;
};

} // namespace

std::vector<AggregateCell> aggregate(const std::vector<RunRecord>& records) {
    std::map<GroupKey, GroupStats> groups;
    for (const auto& r : records) {
        GroupKey key{r.provider, r.task, r.condition, r.difficulty};
        GroupStats& g = groups[key];
        ++g.n;
        if (r.parse_status == ParseStatus::failed) ++g.parse_failures;
        switch (r.task) {
            case Task::search: {
                bool correct = r.scores.value("correct", 0) == 1;
                if (r.scores.value("visible", false)) {
                    ++g.visible_n;
                    if (correct) ++g.visible_correct;
                } else {
                    ++g.invisible_n;
                    if (correct) ++g.invisible_correct;
                }
                break;
            }
            case Task::count: {
                if (r.scores.value("correct", 0) == 1) ++g.correct;
                if (r.scores.contains("pred")) {
                    double d = r.scores["pred"].get<double>() - r.scores["truth"].get<double>();
                    g.sq_err_sum += d * d;
                    ++g.mse_n;
                }
                break;
            }
            case Task::describe:
                g.edit_sum += r.scores.value("edit_distance", 0.0);
                g.f1_sum += r.scores.value("f1", 0.0);
                g.jaccard_sum += r.scores.value("jaccard", 0.0);
                break;
            case Task::spatial:
                if (r.scores.value("correct", 0) == 1) ++g.correct;
                break;
        }
    }

    std::vector<AggregateCell> cells;
    auto emit = [&](const GroupKey& key, const std::string& metric, double value, long long n,
                    long long failures) {
        AggregateCell cell;
        cell.model = key.model;
        cell.task = key.task;
        cell.condition = key.condition;
        cell.difficulty = key.task == Task::spatial ? "all" : std::to_string(key.difficulty);
        cell.metric = metric;
        cell.value = value;
        cell.n_instances = n;
        cell.n_parse_failures = failures;
        cells.push_back(std::move(cell));
    };

    for (const auto& [key, g] : groups) {
        switch (key.task) {
            case Task::search: {
                double vis = g.visible_n ? static_cast<double>(g.visible_correct) / g.visible_n : 0;
                double invis =
                    g.invisible_n ? static_cast<double>(g.invisible_correct) / g.invisible_n : 0;
                emit(key, "visible_accuracy", vis, g.n, g.parse_failures);
                emit(key, "invisible_accuracy", invis, g.n, g.parse_failures);
                emit(key, "harmonic_mean", harmonic_mean(vis, invis), g.n, g.parse_failures);
                break;
            }
            case Task::count: {
                emit(key, "accuracy", static_cast<double>(g.correct) / g.n, g.n, g.parse_failures);
                if (g.mse_n) emit(key, "mse", g.sq_err_sum / g.mse_n, g.mse_n, g.parse_failures);
                break;
            }
            case Task::describe:
                emit(key, "edit_distance", g.edit_sum / g.n, g.n, g.parse_failures);
                emit(key, "f1", g.f1_sum / g.n, g.n, g.parse_failures);
                emit(key, "jaccard", g.jaccard_sum / g.n, g.n, g.parse_failures);
                break;
            case Task::spatial:
                emit(key, "accuracy", static_cast<double>(g.correct) / g.n, g.n, g.parse_failures);
                break;
        }
    }

    // Per-dataset "avg" rows: unweighted mean over the difficulty sweep.
    struct AvgKey {
        std::string model;
        Task task;
        Condition condition;
        std::string metric;
        auto operator<=>(const AvgKey&) const = default;
    };
    std::map<AvgKey, std::vector<const AggregateCell*>> sweeps;
    for (const auto& c : cells)
        if (c.difficulty != "all") sweeps[{c.model, c.task, c.condition, c.metric}].push_back(&c);
    std::vector<AggregateCell> avg_cells;
    for (const auto& [key, members] : sweeps) {
        if (members.size() < 2) continue;
        AggregateCell cell;
        cell.model = key.model;
        cell.task = key.task;
        cell.condition = key.condition;
        cell.difficulty = "avg";
        cell.metric = key.metric;
        double sum = 0;
        for (const auto* m : members) {
            sum += m->value;
            cell.n_instances += m->n_instances;
            cell.n_parse_failures += m->n_parse_failures;
        }
        cell.value = sum / static_cast<double>(members.size());
        avg_cells.push_back(std::move(cell));
    }
    cells.insert(cells.end(), avg_cells.begin(), avg_cells.end());

    auto difficulty_rank = [](const std::string& d) {
        if (d == "avg") return 1u << 30;
        if (d == "all") return 0u;
        return static_cast<unsigned>(std::stoi(d));
    };
    std::sort(cells.begin(), cells.end(), [&](const AggregateCell& a, const AggregateCell& b) {
        auto ka = std::tuple(a.task, a.metric, a.model, a.condition, difficulty_rank(a.difficulty));
        auto kb = std::tuple(b.task, b.metric, b.model, b.condition, difficulty_rank(b.difficulty));
        return ka < kb;
    });
    return cells;
}

nlohmann::json aggregate_to_json(const std::vector<AggregateCell>& cells) {
    auto arr = nlohmann::json::array();
    for (const auto& c : cells) {
        arr.push_back({{"model", c.model},
                       {"task", task_name(c.task)},
                       {"condition", condition_name(c.condition)},
                       {"difficulty", c.difficulty},
                       {"metric", c.metric},
                       {"value", c.value},
                       {"n_instances", c.n_instances},
                       {"n_parse_failures", c.n_parse_failures}});
    }
    return arr;
}

} // namespace bindbench
