#include "acd/exp/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace acd::exp {

namespace {

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

nlohmann::json cell_to_json(const CellStats& c) {
    return nlohmann::json{{"stats", stats::eval_stats_to_json(c.stats)},
                          {"per_run_means", c.per_run_means},
                          {"failed", c.failed}};
}

CellStats cell_from_json(const nlohmann::json& j) {
    CellStats c;
    c.stats = stats::eval_stats_from_json(j.at("stats"));
    c.per_run_means = j.at("per_run_means").get<std::vector<double>>();
    c.failed = j.at("failed").get<bool>();
    return c;
}

std::string score_text(const CellStats& c) {
    return c.failed ? "FAILED" : stats::format_score(c.stats);
}

// Aligned-column table: rows of cells, first column left-justified labels.
std::string render_table(const std::vector<std::vector<std::string>>& grid) {
    std::vector<size_t> widths;
    for (const auto& row : grid)
        for (size_t i = 0; i < row.size(); ++i) {
            if (widths.size() <= i) widths.resize(i + 1, 0);
            widths[i] = std::max(widths[i], row[i].size());
        }
    std::ostringstream out;
    for (const auto& row : grid) {
        for (size_t i = 0; i < row.size(); ++i) {
            out << row[i];
            if (i + 1 < row.size())
                out << std::string(widths[i] - row[i].size() + 2, ' ');
        }
        out << "\n";
    }
    return out.str();
}

struct Series {
    std::string label;
    std::vector<double> x, mean, lo, hi;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f"};

std::string format_tick(double v) {
    if (std::abs(v) >= 1e6 && std::fmod(v, 1e5) == 0) return fmt(v / 1e6, "%.1f") + "M";
    if (std::abs(v) >= 1e3 && std::fmod(v, 1e3) == 0) return fmt(v / 1e3, "%.0f") + "k";
    return fmt(v, "%.4g");
}

// Minimal line chart with one shaded confidence band per series.
std::string svg_chart(const std::string& title, const std::vector<Series>& series,
                      const std::vector<std::string>& x_tick_labels) {
    const double width = 860, height = 480;
    const double ml = 80, mr = 180, mt = 50, mb = 55;
    double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
    for (const auto& s : series) {
        for (double v : s.x) { x_min = std::min(x_min, v); x_max = std::max(x_max, v); }
        for (double v : s.lo) y_min = std::min(y_min, v);
        for (double v : s.hi) y_max = std::max(y_max, v);
    }
    if (x_min > x_max) { x_min = 0; x_max = 1; }
    if (y_min > y_max) { y_min = 0; y_max = 1; }
    if (x_max == x_min) { x_min -= 1; x_max += 1; }
    if (y_max == y_min) { y_min -= 1; y_max += 1; }
    const double y_pad = 0.05 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;

    auto px = [&](double v) { return ml + (v - x_min) / (x_max - x_min) * (width - ml - mr); };
    auto py = [&](double v) { return height - mb - (v - y_min) / (y_max - y_min) * (height - mt - mb); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << " " << height
        << "\" font-family=\"sans-serif\" font-size=\"13\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << ml << "\" y=\"28\" font-size=\"17\">" << title << "</text>\n";

    // Axes and gridlines.
    for (int k = 0; k <= 5; ++k) {
        const double v = y_min + (y_max - y_min) * k / 5.0;
        svg << "<line x1=\"" << ml << "\" y1=\"" << py(v) << "\" x2=\"" << width - mr
            << "\" y2=\"" << py(v) << "\" stroke=\"#dddddd\"/>\n";
        svg << "<text x=\"" << ml - 8 << "\" y=\"" << py(v) + 4
            << "\" text-anchor=\"end\">" << fmt(v, "%.4g") << "</text>\n";
    }
    if (!x_tick_labels.empty()) {
        for (size_t k = 0; k < x_tick_labels.size(); ++k) {
            const double v = static_cast<double>(k);
            svg << "<text x=\"" << px(v) << "\" y=\"" << height - mb + 22
                << "\" text-anchor=\"middle\">" << x_tick_labels[k] << "</text>\n";
        }
    } else {
        for (int k = 0; k <= 5; ++k) {
            const double v = x_min + (x_max - x_min) * k / 5.0;
            svg << "<text x=\"" << px(v) << "\" y=\"" << height - mb + 22
                << "\" text-anchor=\"middle\">" << format_tick(v) << "</text>\n";
        }
    }
    svg << "<line x1=\"" << ml << "\" y1=\"" << py(y_min) << "\" x2=\"" << ml << "\" y2=\""
        << py(y_max) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
        << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";

    for (size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* color = kPalette[i % (sizeof kPalette / sizeof kPalette[0])];
        if (s.x.empty()) continue;
        svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
        for (size_t k = 0; k < s.x.size(); ++k) svg << px(s.x[k]) << "," << py(s.hi[k]) << " ";
        for (size_t k = s.x.size(); k-- > 0;) svg << px(s.x[k]) << "," << py(s.lo[k]) << " ";
        svg << "\"/>\n";
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (size_t k = 0; k < s.x.size(); ++k) svg << px(s.x[k]) << "," << py(s.mean[k]) << " ";
        svg << "\"/>\n";
        const double ly = mt + 18.0 * static_cast<double>(i);
        svg << "<rect x=\"" << width - mr + 12 << "\" y=\"" << ly << "\" width=\"14\" height=\"4\" fill=\""
            << color << "\"/>\n";
        svg << "<text x=\"" << width - mr + 32 << "\" y=\"" << ly + 6 << "\">" << s.label
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

// Index of the best (highest-mean) non-failed cell of a row, or -1.
int best_in_row(const std::vector<CellStats>& row) {
    int best = -1;
    for (size_t i = 0; i < row.size(); ++i) {
        if (row[i].failed) continue;
        if (best < 0 || row[i].stats.mean > row[static_cast<size_t>(best)].stats.mean)
            best = static_cast<int>(i);
    }
    return best;
}

std::string matrix_csv(const MatrixResult& m) {
    std::ostringstream out;
    out << "train_variant";
    for (const auto& col : m.col_labels) out << "," << col;
    out << "\n";
    for (size_t r = 0; r < m.row_labels.size(); ++r) {
        out << m.row_labels[r];
        for (const auto& cell : m.cells[r])
            out << "," << (cell.failed ? "" : fmt(cell.stats.mean));
        out << "\n";
    }
    out << "Random";
    for (const auto& cell : m.random_baseline)
        out << "," << (cell.failed ? "" : fmt(cell.stats.mean));
    out << "\n";
    return out.str();
}

std::string matrix_txt(const MatrixResult& m) {
    std::ostringstream head;
    const auto& any = m.cells.at(0).at(0).stats;
    head << m.name << " matrix: score is mean (" << fmt(any.ci_level * 100, "%.0f")
         << "% CI upper, lower) over " << any.n_runs << " runs; * marks the best cell in a row\n\n";
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header{"Train \\ Eval"};
    for (const auto& col : m.col_labels) header.push_back(col);
    grid.push_back(header);
    for (size_t r = 0; r < m.row_labels.size(); ++r) {
        std::vector<std::string> line{m.row_labels[r]};
        const int best = best_in_row(m.cells[r]);
        for (size_t c = 0; c < m.cells[r].size(); ++c) {
            std::string cell = score_text(m.cells[r][c]);
            if (static_cast<int>(c) == best) cell += " *";
            line.push_back(std::move(cell));
        }
        grid.push_back(std::move(line));
    }
    std::vector<std::string> base{"Random"};
    for (const auto& cell : m.random_baseline) base.push_back(score_text(cell));
    grid.push_back(std::move(base));
    return head.str() + render_table(grid);
}

std::string matrix_svg(const MatrixResult& m) {
    std::vector<Series> series;
    auto add = [&](const std::string& label, const std::vector<CellStats>& cells) {
        Series s;
        s.label = label;
        for (size_t c = 0; c < cells.size(); ++c) {
            if (cells[c].failed) continue;
            s.x.push_back(static_cast<double>(c));
            s.mean.push_back(cells[c].stats.mean);
            s.lo.push_back(cells[c].stats.ci_low);
            s.hi.push_back(cells[c].stats.ci_high);
        }
        series.push_back(std::move(s));
    };
    for (size_t r = 0; r < m.row_labels.size(); ++r) add("trained: " + m.row_labels[r], m.cells[r]);
    add("random", m.random_baseline);
    std::vector<std::string> ticks;
    for (const auto& col : m.col_labels) ticks.push_back("eval: " + col);
    return svg_chart(m.name + " (mean score, 95% CI)", series, ticks);
}

std::string ablation_csv(const AblationResult& a) {
    std::ostringstream out;
    out << "variant,timestep,mean,ci_low,ci_high\n";
    for (const auto& v : a.variants)
        for (size_t k = 0; k < v.timesteps.size() && !v.mean.empty(); ++k)
            out << v.label << "," << v.timesteps[k] << "," << fmt(v.mean[k]) << ","
                << fmt(v.ci_low[k]) << "," << fmt(v.ci_high[k]) << "\n";
    return out.str();
}

std::string ablation_txt(const AblationResult& a) {
    std::ostringstream head;
    head << a.name << " ablation: final checkpoint score per variant\n\n";
    std::vector<std::vector<std::string>> grid;
    grid.push_back({"Variant", "Final score", "Runs"});
    for (const auto& v : a.variants)
        grid.push_back({v.label, score_text(v.final_stats),
                        std::to_string(v.final_stats.per_run_means.size())});
    grid.push_back({"Random", score_text(a.random_baseline),
                    std::to_string(a.random_baseline.per_run_means.size())});
    return head.str() + render_table(grid);
}

std::string ablation_svg(const AblationResult& a) {
    std::vector<Series> series;
    double x_min = 0, x_max = 1;
    for (const auto& v : a.variants) {
        if (v.mean.empty()) continue;
        Series s;
        s.label = v.label;
        for (size_t k = 0; k < v.timesteps.size(); ++k) {
            s.x.push_back(static_cast<double>(v.timesteps[k]));
            s.mean.push_back(v.mean[k]);
            s.lo.push_back(v.ci_low[k]);
            s.hi.push_back(v.ci_high[k]);
        }
        x_max = std::max(x_max, s.x.back());
        series.push_back(std::move(s));
    }
    if (!a.random_baseline.failed) {
        Series s;
        s.label = "random";
        for (double x : {x_min, x_max}) {
            s.x.push_back(x);
            s.mean.push_back(a.random_baseline.stats.mean);
            s.lo.push_back(a.random_baseline.stats.ci_low);
            s.hi.push_back(a.random_baseline.stats.ci_high);
        }
        series.push_back(std::move(s));
    }
    return svg_chart(a.name + " training curves (mean score, 95% CI)", series, {});
}

}  // namespace

nlohmann::json matrix_result_to_json(const MatrixResult& m) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& row : m.cells) {
        nlohmann::json jrow = nlohmann::json::array();
        for (const auto& cell : row) jrow.push_back(cell_to_json(cell));
        cells.push_back(std::move(jrow));
    }
    nlohmann::json baseline = nlohmann::json::array();
    for (const auto& cell : m.random_baseline) baseline.push_back(cell_to_json(cell));
    return nlohmann::json{{"name", m.name},           {"rows", m.row_labels},
                          {"cols", m.col_labels},     {"cells", cells},
                          {"random_baseline", baseline}, {"metadata", m.metadata}};
}

MatrixResult matrix_result_from_json(const nlohmann::json& j) {
    MatrixResult m;
    m.name = j.at("name").get<std::string>();
    m.row_labels = j.at("rows").get<std::vector<std::string>>();
    m.col_labels = j.at("cols").get<std::vector<std::string>>();
    for (const auto& jrow : j.at("cells")) {
        std::vector<CellStats> row;
        for (const auto& jcell : jrow) row.push_back(cell_from_json(jcell));
        m.cells.push_back(std::move(row));
    }
    for (const auto& jcell : j.at("random_baseline"))
        m.random_baseline.push_back(cell_from_json(jcell));
    m.metadata = j.at("metadata");
    return m;
}

nlohmann::json ablation_result_to_json(const AblationResult& a) {
    nlohmann::json variants = nlohmann::json::array();
    for (const auto& v : a.variants) {
        variants.push_back(nlohmann::json{{"label", v.label},
                                          {"timesteps", v.timesteps},
                                          {"mean", v.mean},
                                          {"ci_low", v.ci_low},
                                          {"ci_high", v.ci_high},
                                          {"run_values", v.run_values},
                                          {"final", cell_to_json(v.final_stats)},
                                          {"failed", v.failed}});
    }
    return nlohmann::json{{"name", a.name},
                          {"variants", variants},
                          {"random_baseline", cell_to_json(a.random_baseline)},
                          {"metadata", a.metadata}};
}

std::string render_matrix(const MatrixResult& m, const std::string& format) {
    if (format == "json") return matrix_result_to_json(m).dump(2) + "\n";
    if (format == "csv") return matrix_csv(m);
    if (format == "txt") return matrix_txt(m);
    if (format == "svg") return matrix_svg(m);
    throw env::ConfigError("unknown report format: " + format);
}

std::string render_ablation(const AblationResult& a, const std::string& format) {
    if (format == "json") return ablation_result_to_json(a).dump(2) + "\n";
    if (format == "csv") return ablation_csv(a);
    if (format == "txt") return ablation_txt(a);
    if (format == "svg") return ablation_svg(a);
    throw env::ConfigError("unknown report format: " + format);
}

namespace {
void write_all(const std::string& dir, const std::function<std::string(const std::string&)>& render) {
    std::filesystem::create_directories(dir);
    for (const char* format : {"json", "csv", "txt", "svg"}) {
        std::ofstream out(dir + "/report." + format);
        out << render(format);
    }
}
}  // namespace

void emit_matrix_report(const MatrixResult& m, const std::string& dir) {
    write_all(dir, [&](const std::string& f) { return render_matrix(m, f); });
}

void emit_ablation_report(const AblationResult& a, const std::string& dir) {
    write_all(dir, [&](const std::string& f) { return render_ablation(a, f); });
}

}  // namespace acd::exp
