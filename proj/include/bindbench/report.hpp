#pragma once

#include "bindbench/harness.hpp"

#include <string>
#include <vector>

namespace bindbench {

enum class TableFormat { csv, json, markdown };

// Rows are difficulty values (sweep order, "avg" last); columns are
// (model, condition) pairs; the best value in each model's pair group is
// marked per row, matching the published tables' bolding.
struct TableSpec {
    Task task = Task::search;
    std::string metric;
    int decimals = 2;
    bool lower_is_better = false;
};

// True for error-style metrics (edit_distance, mse).
bool metric_lower_is_better(const std::string& metric);

// Primary table metric per task.
std::string primary_metric(Task task);

// Renders the table into a string; missing cells become em-dashes and one
// line per gap is appended to `gaps`.
std::string render_table(const std::vector<AggregateCell>& cells, const TableSpec& spec,
                         TableFormat format, std::vector<std::string>* gaps = nullptr);

void emit_table(const std::vector<AggregateCell>& cells, const TableSpec& spec, TableFormat format,
                const std::string& out_path, std::vector<std::string>* gaps = nullptr);

// Grouped bar chart (groups = models, bars = conditions), heights linearly
// proportional to values. At most 4 groups x 6 bars; negative values are an
// error.
struct ChartSpec {
    Task task = Task::search;
    std::string metric;
    std::string difficulty = "avg"; // falls back to "all" and single rows
};

std::string render_bar_chart(const std::vector<AggregateCell>& cells, const ChartSpec& spec);
void emit_bar_chart(const std::vector<AggregateCell>& cells, const ChartSpec& spec,
                    const std::string& out_path);

// Full report tree: tables/<task>.csv|json|md (+ count_mse), charts/<task>.svg,
// gaps.txt.
struct ReportSummary {
    std::vector<std::string> table_files;
    std::vector<std::string> chart_files;
    std::vector<std::string> gap_lines;
};

ReportSummary write_report(const std::vector<AggregateCell>& cells, const std::string& out_dir);

} // namespace bindbench
