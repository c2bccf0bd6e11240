#pragma once

#include "bindbench/parsing.hpp"
#include "bindbench/prompting.hpp"
#include "bindbench/providers.hpp"
#include "bindbench/scenegen.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bindbench {

// Full experiment description. Round-trips losslessly through JSON.
struct RunConfig {
    std::uint64_t base_seed = 1;
    // Per-task instance counts; defaults follow the benchmark sizes
    // (100 for search/count cells, 50 for describe/spatial).
    std::map<Task, int> instances_per_cell;
    std::vector<Condition> conditions = {Condition::simple, Condition::ours};
    std::vector<ProviderConfig> providers;
    int concurrency_per_provider = 1;
    std::string cache_dir = "cache";
    std::string output_dir = "out";
    bool fix_grammar = false;
    int scaffold_n_lines = 3;
    int scaffold_stroke_width = 2;
    SceneGenOptions scene;
    std::string resource_dir; // empty -> default_resource_dir()

    bool run_search = false;
    std::vector<int> search_object_counts = {20, 30, 40, 50};
    Feature search_target = {Shape::letter_l, Color::green};

    bool run_count = false;
    std::vector<int> count_target_counts = {10, 12, 14, 16, 18, 20};
    Feature count_target = {Shape::circle, Color::blue};
    int count_distractors = 6;

    bool run_describe = false;
    std::map<int, std::vector<int>> describe_grid; // object count -> triplet counts

    bool run_spatial = false;
    int spatial_distractors = 6;

    std::vector<std::string> external_manifests;

    int instances_for(Task t) const;
    void validate() const;
};

nlohmann::json run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

// One (task, params) grid cell. Cells own disjoint seed ranges.
struct GridCell {
    Task task;
    nlohmann::json params;
    int difficulty = 0;
    std::uint64_t seed_base = 0;
    int n_instances = 0;
};

std::vector<GridCell> expand_grid(const RunConfig& cfg);
TaskInstance make_cell_instance(const RunConfig& cfg, const GridCell& cell, int index);

// Digest over (model, image bytes, prompt bytes, temperature).
std::string cache_key(const std::string& model_id, const std::string& image_png,
                      const std::string& prompt_text, double temperature);

// One line of the result stream.
struct RunRecord {
    long long record_index = 0;
    std::string instance_id;
    Task task = Task::search;
    Condition condition = Condition::simple;
    std::string provider;
    std::string model;
    int difficulty = 0;
    nlohmann::json params;
    std::uint64_t seed = 0;
    std::string cache_key;
    std::string raw_text;
    ParseStatus parse_status = ParseStatus::failed;
    nlohmann::json parsed;
    nlohmann::json ground_truth;
    nlohmann::json scores;
    std::int64_t latency_ms = 0;
    int attempts = 1;
};

nlohmann::json record_to_json(const RunRecord& r);
RunRecord record_from_json(const nlohmann::json& j);
std::vector<RunRecord> read_records(const std::string& jsonl_path);

// Parse raw text and compute per-instance scores for one record's task.
ParsedAnswer parse_record_answer(Task task, const std::string& raw_text,
                                 const SynonymTable& synonyms);
nlohmann::json score_answer(Task task, const GroundTruth& truth, const ParsedAnswer& answer);
nlohmann::json parsed_payload_json(Task task, const ParsedAnswer& answer);

struct RunResult {
    std::string records_path;
    long long n_written = 0;       // records appended by this run
    long long n_resumed = 0;       // records already present
    long long n_cache_hits = 0;
    long long n_provider_calls = 0;
    struct Incomplete {
        std::string instance_id;
        std::string condition;
        std::string provider;
        std::string error;
    };
    std::vector<Incomplete> incomplete; // provider exhaustion; run continued
    struct Skipped {
        std::string cell;
        std::string reason;
    };
    std::vector<Skipped> skipped; // generation infeasibility
    bool complete() const { return incomplete.empty(); }
};

class Harness {
public:
    using TransportFactory = std::function<std::shared_ptr<Transport>(const ProviderConfig&)>;

    explicit Harness(RunConfig cfg, TransportFactory transport_factory = nullptr,
                     std::shared_ptr<Clock> clock = nullptr);

    // Expand the grid, dispatch with caching and bounded concurrency, and
    // append records to <output_dir>/records.jsonl. Safe to re-invoke:
    // existing records are kept, missing ones are produced.
    RunResult run();

    const RunConfig& config() const { return cfg_; }

private:
    RunConfig cfg_;
    TransportFactory transport_factory_;
    std::shared_ptr<Clock> clock_;
};

// Paper-style aggregation: per-(model, task, condition, difficulty) metric
// cells plus per-task "avg" rows; search cells use the harmonic mean of the
// visible/invisible sub-accuracies.
struct AggregateCell {
    std::string model;
    Task task = Task::search;
    Condition condition = Condition::simple;
    std::string difficulty; // "20", "avg", or "all"
    std::string metric;
    double value = 0.0;
    long long n_instances = 0;
    long long n_parse_failures = 0;
};

std::vector<AggregateCell> aggregate(const std::vector<RunRecord>& records);
nlohmann::json aggregate_to_json(const std::vector<AggregateCell>& cells);

} // namespace bindbench
