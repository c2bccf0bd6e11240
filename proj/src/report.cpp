#include "bindbench/report.hpp"

#include "bindbench/common.hpp"
#include "bindbench/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>

namespace bindbench {

namespace {

std::string format_value(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

unsigned difficulty_rank(const std::string& d) {
    if (d == "avg") return 1u << 30;
    if (d == "all") return 0;
    return static_cast<unsigned>(std::stoul(d));
}

struct TableData {
    std::vector<std::string> rows;                          // difficulty labels
    std::vector<std::pair<std::string, Condition>> columns; // (model, condition)
    // value[row][col], NaN = gap
    std::vector<std::vector<double>> values;
    std::vector<std::vector<bool>> best;
};

TableData collect(const std::vector<AggregateCell>& cells, const TableSpec& spec,
                  std::vector<std::string>* gaps) {
    TableData data;
    std::set<std::string> row_set;
    std::vector<std::pair<std::string, Condition>> columns;
    for (const auto& c : cells) {
        if (c.task != spec.task || c.metric != spec.metric) continue;
        row_set.insert(c.difficulty);
        if (std::find(columns.begin(), columns.end(), std::make_pair(c.model, c.condition)) ==
            columns.end())
            columns.emplace_back(c.model, c.condition);
    }
    std::sort(columns.begin(), columns.end());
    data.columns = columns;
    data.rows.assign(row_set.begin(), row_set.end());
    std::sort(data.rows.begin(), data.rows.end(), [](const std::string& a, const std::string& b) {
        return difficulty_rank(a) < difficulty_rank(b);
    });

    const double nan = std::numeric_limits<double>::quiet_NaN();
    data.values.assign(data.rows.size(), std::vector<double>(columns.size(), nan));
    data.best.assign(data.rows.size(), std::vector<bool>(columns.size(), false));
    for (const auto& c : cells) {
        if (c.task != spec.task || c.metric != spec.metric) continue;
        auto r = std::find(data.rows.begin(), data.rows.end(), c.difficulty) - data.rows.begin();
        auto col = std::find(columns.begin(), columns.end(), std::make_pair(c.model, c.condition)) -
                   columns.begin();
        data.values[r][col] = c.value;
    }

    // Best-of-pair per row: within each model's condition group.
    for (std::size_t r = 0; r < data.rows.size(); ++r) {
        for (std::size_t c0 = 0; c0 < columns.size();) {
            std::size_t c1 = c0;
            while (c1 < columns.size() && columns[c1].first == columns[c0].first) ++c1;
            double best_v = nan;
            for (std::size_t c = c0; c < c1; ++c) {
                double v = data.values[r][c];
                if (std::isnan(v)) continue;
                if (std::isnan(best_v) || (spec.lower_is_better ? v < best_v : v > best_v))
                    best_v = v;
            }
            for (std::size_t c = c0; c < c1; ++c)
                if (!std::isnan(data.values[r][c]) && data.values[r][c] == best_v)
                    data.best[r][c] = true; // ties are all marked
            c0 = c1;
        }
    }

    if (gaps) {
        if (data.rows.empty())
            gaps->push_back(task_name(spec.task) + "/" + spec.metric + ": no cells");
        for (std::size_t r = 0; r < data.rows.size(); ++r)
            for (std::size_t c = 0; c < columns.size(); ++c)
                if (std::isnan(data.values[r][c]))
                    gaps->push_back(task_name(spec.task) + "/" + spec.metric +
                                    ": missing cell difficulty=" + data.rows[r] + " model=" +
                                    columns[c].first + " condition=" +
                                    condition_name(columns[c].second));
    }
    return data;
}

} // namespace

bool metric_lower_is_better(const std::string& metric) {
    return metric == "edit_distance" || metric == "mse";
}

std::string primary_metric(Task task) {
    switch (task) {
        case Task::search: return "harmonic_mean";
        case Task::count: return "accuracy";
        case Task::describe: return "edit_distance";
        case Task::spatial: return "accuracy";
    }
    return "accuracy";
}

std::string render_table(const std::vector<AggregateCell>& cells, const TableSpec& spec,
                         TableFormat format, std::vector<std::string>* gaps) {
    TableData data = collect(cells, spec, gaps);
    std::ostringstream out;

    auto column_label = [](const std::pair<std::string, Condition>& col) {
        return col.first + "|" + condition_name(col.second);
    };

    switch (format) {
        case TableFormat::csv: {
            out << "difficulty";
            for (const auto& col : data.columns) out << "," << column_label(col);
            out << "\n";
            for (std::size_t r = 0; r < data.rows.size(); ++r) {
                out << data.rows[r];
                for (std::size_t c = 0; c < data.columns.size(); ++c) {
                    double v = data.values[r][c];
                    out << ",";
                    if (std::isnan(v))
                        out << "—";
                    else
                        out << format_value(v, spec.decimals) << (data.best[r][c] ? "*" : "");
                }
                out << "\n";
            }
            break;
        }
        case TableFormat::markdown: {
            out << "| difficulty |";
            for (const auto& col : data.columns) out << " " << column_label(col) << " |";
            out << "\n|---|";
            for (std::size_t c = 0; c < data.columns.size(); ++c) out << "---|";
            out << "\n";
            for (std::size_t r = 0; r < data.rows.size(); ++r) {
                out << "| " << data.rows[r] << " |";
                for (std::size_t c = 0; c < data.columns.size(); ++c) {
                    double v = data.values[r][c];
                    if (std::isnan(v)) {
                        out << " — |";
                    } else {
                        std::string s = format_value(v, spec.decimals);
                        out << " " << (data.best[r][c] ? "**" + s + "**" : s) << " |";
                    }
                }
                out << "\n";
            }
            break;
        }
        case TableFormat::json: {
            nlohmann::json doc;
            doc["task"] = task_name(spec.task);
            doc["metric"] = spec.metric;
            doc["columns"] = nlohmann::json::array();
            for (const auto& col : data.columns)
                doc["columns"].push_back(
                    {{"model", col.first}, {"condition", condition_name(col.second)}});
            doc["rows"] = nlohmann::json::array();
            for (std::size_t r = 0; r < data.rows.size(); ++r) {
                nlohmann::json row;
                row["difficulty"] = data.rows[r];
                row["cells"] = nlohmann::json::array();
                for (std::size_t c = 0; c < data.columns.size(); ++c) {
                    double v = data.values[r][c];
                    if (std::isnan(v)) {
                        row["cells"].push_back(nullptr);
                    } else {
                        // Rounded exactly as displayed so table and file agree.
                        double rounded = std::stod(format_value(v, spec.decimals));
                        row["cells"].push_back(
                            {{"value", rounded}, {"best", static_cast<bool>(data.best[r][c])}});
                    }
                }
                doc["rows"].push_back(std::move(row));
            }
            out << doc.dump(2) << "\n";
            break;
        }
    }
    return out.str();
}

void emit_table(const std::vector<AggregateCell>& cells, const TableSpec& spec, TableFormat format,
                const std::string& out_path, std::vector<std::string>* gaps) {
    write_file(out_path, render_table(cells, spec, format, gaps));
}

std::string render_bar_chart(const std::vector<AggregateCell>& cells, const ChartSpec& spec) {
    // Collect (model -> condition -> value) at the requested difficulty.
    std::vector<std::string> models;
    std::vector<Condition> conditions;
    std::map<std::pair<std::string, Condition>, double> values;
    auto try_collect = [&](const std::string& difficulty) {
        models.clear();
        conditions.clear();
        values.clear();
        for (const auto& c : cells) {
            if (c.task != spec.task || c.metric != spec.metric || c.difficulty != difficulty)
                continue;
            if (std::find(models.begin(), models.end(), c.model) == models.end())
                models.push_back(c.model);
            if (std::find(conditions.begin(), conditions.end(), c.condition) == conditions.end())
                conditions.push_back(c.condition);
            values[{c.model, c.condition}] = c.value;
        }
        return !values.empty();
    };
    if (!try_collect(spec.difficulty) && !try_collect("all")) {
        // Fall back to the single difficulty present, if any.
        std::set<std::string> seen;
        for (const auto& c : cells)
            if (c.task == spec.task && c.metric == spec.metric) seen.insert(c.difficulty);
        if (seen.size() != 1 || !try_collect(*seen.begin()))
            throw Error("bar chart: no cells for " + task_name(spec.task) + "/" + spec.metric);
    }
    std::sort(models.begin(), models.end());
    std::sort(conditions.begin(), conditions.end());

    if (models.size() > 4) throw Error("bar chart: more than 4 groups");
    if (conditions.size() > 6) throw Error("bar chart: more than 6 bars per group");
    double max_value = 0;
    for (const auto& [key, v] : values) {
        if (v < 0) throw Error("bar chart: negative metric value");
        max_value = std::max(max_value, v);
    }

    const int width = 640, height = 360;
    const int margin_left = 56, margin_bottom = 48, margin_top = 24, margin_right = 16;
    const int plot_w = width - margin_left - margin_right;
    const int plot_h = height - margin_top - margin_bottom;
    const int baseline = margin_top + plot_h;
    const double group_w = static_cast<double>(plot_w) / static_cast<double>(models.size());
    const double bar_w = group_w / (conditions.size() + 1.0);

    static const char* kBarColors[6] = {"#4878a8", "#e49444", "#5aa469", "#b65d93",
                                        "#948a54", "#6b8fb3"};

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "  <line x1=\"" << margin_left << "\" y1=\"" << baseline << "\" x2=\""
        << width - margin_right << "\" y2=\"" << baseline << "\" stroke=\"#333\"/>\n";
    svg << "  <line x1=\"" << margin_left << "\" y1=\"" << margin_top << "\" x2=\"" << margin_left
        << "\" y2=\"" << baseline << "\" stroke=\"#333\"/>\n";
    svg << "  <text x=\"16\" y=\"" << (margin_top + plot_h / 2)
        << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << (margin_top + plot_h / 2) << ")\">" << spec.metric << "</text>\n";

    for (std::size_t m = 0; m < models.size(); ++m) {
        double gx = margin_left + group_w * static_cast<double>(m);
        for (std::size_t b = 0; b < conditions.size(); ++b) {
            auto it = values.find({models[m], conditions[b]});
            if (it == values.end()) continue;
            double v = it->second;
            double h = max_value > 0 ? v / max_value * plot_h : 0.0;
            double x = gx + bar_w * (static_cast<double>(b) + 0.5);
            double y = baseline - h;
            svg << "  <rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << bar_w * 0.9
                << "\" height=\"" << h << "\" fill=\"" << kBarColors[b % 6] << "\"/>\n";
            svg << "  <text x=\"" << (x + bar_w * 0.45) << "\" y=\"" << (y - 4)
                << "\" font-size=\"10\" text-anchor=\"middle\">" << format_value(v, 2)
                << "</text>\n";
            svg << "  <text x=\"" << (x + bar_w * 0.45) << "\" y=\"" << (baseline + 14)
                << "\" font-size=\"9\" text-anchor=\"middle\">" << condition_name(conditions[b])
                << "</text>\n";
        }
        svg << "  <text x=\"" << (gx + group_w / 2) << "\" y=\"" << (baseline + 32)
            << "\" font-size=\"12\" text-anchor=\"middle\">" << models[m] << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void emit_bar_chart(const std::vector<AggregateCell>& cells, const ChartSpec& spec,
                    const std::string& out_path) {
    write_file(out_path, render_bar_chart(cells, spec));
}

ReportSummary write_report(const std::vector<AggregateCell>& cells, const std::string& out_dir) {
    ReportSummary summary;
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "tables");
    fs::create_directories(fs::path(out_dir) / "charts");

    std::set<Task> tasks;
    for (const auto& c : cells) tasks.insert(c.task);

    auto emit_task_table = [&](Task task, const std::string& metric, const std::string& stem) {
        TableSpec spec;
        spec.task = task;
        spec.metric = metric;
        spec.lower_is_better = metric_lower_is_better(metric);
        for (auto [format, ext] : {std::pair{TableFormat::csv, ".csv"},
                                   std::pair{TableFormat::json, ".json"},
                                   std::pair{TableFormat::markdown, ".md"}}) {
            std::string path = (fs::path(out_dir) / "tables" / (stem + ext)).string();
            emit_table(cells, spec, format, path,
                       format == TableFormat::csv ? &summary.gap_lines : nullptr);
            summary.table_files.push_back(path);
        }
    };

    for (Task task : tasks) {
        emit_task_table(task, primary_metric(task), task_name(task));
        // The counting error table is part of the standard report.
        if (task == Task::count &&
            std::any_of(cells.begin(), cells.end(),
                        [](const AggregateCell& c) { return c.metric == "mse"; }))
            emit_task_table(task, "mse", "count_mse");

        ChartSpec chart;
        chart.task = task;
        chart.metric = primary_metric(task);
        try {
            std::string path = (fs::path(out_dir) / "charts" / (task_name(task) + ".svg")).string();
            emit_bar_chart(cells, chart, path);
            summary.chart_files.push_back(path);
        } catch (const Error& e) {
            summary.gap_lines.push_back(std::string("chart ") + task_name(task) + ": " + e.what());
        }
    }

    std::ostringstream gaps;
    for (const auto& line : summary.gap_lines) gaps << line << "\n";
    write_file((fs::path(out_dir) / "gaps.txt").string(), gaps.str());
    return summary;
}

} // namespace bindbench
