#include "bindbench/harness.hpp"
#include "bindbench/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace bindbench;

namespace {

int cmd_gen(const std::string& task_str, std::uint64_t seed, int instances, int n, bool present,
            bool absent, int triplets, const std::string& target_shape,
            const std::string& target_color, int distractors, const std::string& out_dir) {
    Task task = task_from_name(task_str);
    SceneGenOptions opt;
    int written = 0;
    for (int i = 0; i < instances; ++i) {
        std::uint64_t s = seed + static_cast<std::uint64_t>(i);
        TaskInstance inst;
        switch (task) {
            case Task::search: {
                bool p = absent ? false : (present ? true : i % 2 == 0);
                inst = gen_search_scene(s, n > 0 ? n : 20, p, opt);
                break;
            }
            case Task::count: {
                Feature target{shape_from_name(target_shape), color_from_name(target_color)};
                inst = gen_count_scene(s, n > 0 ? n : 12, target, distractors, opt);
                break;
            }
            case Task::describe:
                inst = gen_description_scene(s, n > 0 ? n : 10, triplets, opt);
                break;
            case Task::spatial:
                opt.spatial_n_distractors = distractors;
                inst = gen_spatial_instance(s, opt);
                break;
        }
        std::string base = (fs::path(out_dir) / instance_image_name(inst)).string();
        write_file(base + ".json", instance_to_json(inst).dump(2) + "\n");
        write_png(render(*inst.scene), base + ".png");
        std::cout << base << ".png\n";
        ++written;
    }
    std::cout << "generated " << written << " instance(s)\n";
    return 0;
}

int cmd_augment(const std::string& variant, int n, int stroke_width, const std::string& in_path,
                const std::string& out_path) {
    ScaffoldConfig cfg;
    cfg.variant = scaffold_variant_from_name(variant);
    cfg.n_lines = n;
    cfg.stroke_width = stroke_width;
    Image img = read_png(in_path);
    write_png(apply_scaffold(img, cfg), out_path);
    std::cout << out_path << "\n";
    return 0;
}

int cmd_run(const std::string& config_path) {
    RunConfig cfg = load_run_config(config_path);
    Harness harness(cfg);
    RunResult res = harness.run();
    std::cout << "records: " << res.records_path << "\n"
              << "written: " << res.n_written << "  resumed: " << res.n_resumed
              << "  cache hits: " << res.n_cache_hits
              << "  provider calls: " << res.n_provider_calls << "\n";
    for (const auto& s : res.skipped)
        std::cout << "skipped cell " << s.cell << ": " << s.reason << "\n";
    for (const auto& inc : res.incomplete)
        std::cout << "incomplete " << inc.instance_id << " [" << inc.condition << ", "
                  << inc.provider << "]: " << inc.error << "\n";
    return res.complete() ? 0 : 1;
}

int cmd_score(const std::string& records_path, const std::string& rescore_out,
              const std::string& aggregate_out, const std::string& resources) {
    std::string root = resources.empty() ? default_resource_dir() : resources;
    SynonymTable synonyms = SynonymTable::load((fs::path(root) / "synonyms.tsv").string());

    std::vector<RunRecord> records = read_records(records_path);
    for (auto& rec : records) {
        // Re-parse from the preserved raw text so parser fixes apply
        // without re-querying any provider.
        ParsedAnswer answer = parse_record_answer(rec.task, rec.raw_text, synonyms);
        rec.parse_status = answer.status;
        rec.parsed = parsed_payload_json(rec.task, answer);
        rec.scores = score_answer(rec.task, truth_from_json(rec.ground_truth), answer);
    }
    if (!rescore_out.empty()) {
        std::string out;
        for (const auto& rec : records) out += record_to_json(rec).dump() + "\n";
        write_file(rescore_out, out);
    }
    nlohmann::json agg = aggregate_to_json(aggregate(records));
    if (aggregate_out.empty())
        std::cout << agg.dump(2) << "\n";
    else
        write_file(aggregate_out, agg.dump(2) + "\n");
    return 0;
}

int cmd_report(const std::string& records_path, const std::string& out_dir) {
    auto cells = aggregate(read_records(records_path));
    ReportSummary summary = write_report(cells, out_dir);
    for (const auto& f : summary.table_files) std::cout << f << "\n";
    for (const auto& f : summary.chart_files) std::cout << f << "\n";
    std::cout << summary.gap_lines.size() << " gap(s); see " << (fs::path(out_dir) / "gaps.txt").string()
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic binding-problem benchmark harness for vision-language endpoints"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate synthetic scenes with ground-truth manifests");
    std::string gen_task;
    std::uint64_t gen_seed = 1;
    int gen_instances = 1, gen_n = 0, gen_triplets = 0, gen_distractors = 6;
    bool gen_present = false, gen_absent = false;
    std::string gen_shape = "circle", gen_color = "blue", gen_out = ".";
    gen->add_option("--task", gen_task, "search|count|describe|spatial")->required();
    gen->add_option("--seed", gen_seed, "base seed");
    gen->add_option("--instances", gen_instances, "number of instances (seeds increment)");
    gen->add_option("--n", gen_n, "object count (search/describe) or target count (count)");
    gen->add_flag("--present", gen_present, "search: force the target present");
    gen->add_flag("--absent", gen_absent, "search: force the target absent");
    gen->add_option("--triplets", gen_triplets, "describe: exact feature-triplet count");
    gen->add_option("--target-shape", gen_shape, "count: target shape name");
    gen->add_option("--target-color", gen_color, "count: target color name");
    gen->add_option("--distractors", gen_distractors, "count/spatial: distractor count");
    gen->add_option("--out", gen_out, "output directory");

    // augment
    auto* augment = app.add_subcommand("augment", "Overlay scaffold lines on a PNG");
    std::string aug_variant = "rows", aug_in, aug_out;
    int aug_n = 3, aug_stroke = 2;
    augment->add_option("--variant", aug_variant, "rows|rows_nonum|columns|grid|none");
    augment->add_option("--n", aug_n, "number of lines");
    augment->add_option("--stroke-width", aug_stroke, "stroke width in pixels");
    augment->add_option("--in", aug_in, "input PNG")->required();
    augment->add_option("--out", aug_out, "output PNG")->required();

    // run
    auto* run = app.add_subcommand("run", "Execute a benchmark run from a config file");
    std::string run_config;
    run->add_option("--config", run_config, "run config JSON")->required();

    // score
    auto* score = app.add_subcommand("score", "Re-parse and re-score a record stream");
    std::string score_records, score_rescore_out, score_aggregate_out, score_resources;
    score->add_option("--records", score_records, "records.jsonl path")->required();
    score->add_option("--rescore-out", score_rescore_out, "write re-scored records here");
    score->add_option("--aggregate-out", score_aggregate_out, "write aggregate JSON here");
    score->add_option("--resources", score_resources, "resource directory override");

    // report
    auto* report = app.add_subcommand("report", "Emit tables and charts from a record stream");
    std::string report_records, report_out = "report";
    report->add_option("--records", report_records, "records.jsonl path")->required();
    report->add_option("--out", report_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_gen(gen_task, gen_seed, gen_instances, gen_n, gen_present, gen_absent,
                           gen_triplets, gen_shape, gen_color, gen_distractors, gen_out);
        if (augment->parsed()) return cmd_augment(aug_variant, aug_n, aug_stroke, aug_in, aug_out);
        if (run->parsed()) return cmd_run(run_config);
        if (score->parsed())
            return cmd_score(score_records, score_rescore_out, score_aggregate_out,
                             score_resources);
        if (report->parsed()) return cmd_report(report_records, report_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
