#include "dwis/plot.hpp"

#include "dwis/engine.hpp"
#include "dwis/error.hpp"
#include "dwis/experiment.hpp"
#include "dwis/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace dwis {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 70, kRight = 190, kTop = 40, kBottom = 55;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v, const char* pattern = "%.4g") {
    char buf[48];
    std::snprintf(buf, sizeof(buf), pattern, v);
    return buf;
}

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

std::string render_svg(const LinePlot& plot) {
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    for (const auto& s : plot.series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x_lo = std::min(x_lo, s.x[i]);
            x_hi = std::max(x_hi, s.x[i]);
            y_lo = std::min(y_lo, s.y[i]);
            y_hi = std::max(y_hi, s.y[i]);
        }
    if (!(x_lo <= x_hi)) x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
    if (x_lo == x_hi) x_lo -= 0.5, x_hi += 0.5;
    if (y_lo == y_hi) y_lo -= 0.5, y_hi += 0.5;
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * pw; };
    auto sy = [&](double y) { return kTop + (1.0 - (y - y_lo) / (y_hi - y_lo)) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
        << escape(plot.title) << "</text>\n";
    svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";

    constexpr int kTicks = 5;
    for (int t = 0; t <= kTicks; ++t) {
        const double fx = x_lo + (x_hi - x_lo) * t / kTicks;
        const double fy = y_lo + (y_hi - y_lo) * t / kTicks;
        svg << "<line x1=\"" << fmt(sx(fx)) << "\" y1=\"" << kTop + ph << "\" x2=\"" << fmt(sx(fx))
            << "\" y2=\"" << kTop + ph + 5 << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << fmt(sx(fx)) << "\" y=\"" << kTop + ph + 18
            << "\" text-anchor=\"middle\">" << fmt(fx) << "</text>\n";
        svg << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << fmt(sy(fy)) << "\" x2=\"" << kLeft
            << "\" y2=\"" << fmt(sy(fy)) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(sy(fy) + 4)
            << "\" text-anchor=\"end\">" << fmt(fy) << "</text>\n";
    }
    svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
        << escape(plot.x_label) << "</text>\n";
    svg << "<text transform=\"translate(16," << kTop + ph / 2
        << ") rotate(-90)\" text-anchor=\"middle\">" << escape(plot.y_label) << "</text>\n";

    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const auto& s = plot.series[k];
        const char* color = kPalette[k % std::size(kPalette)];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            svg << fmt(sx(s.x[i])) << ',' << fmt(sy(s.y[i])) << ' ';
        }
        svg << "\"/>\n";
        const double ly = kTop + 12 + 18.0 * static_cast<double>(k);
        svg << "<line x1=\"" << kWidth - kRight + 12 << "\" y1=\"" << ly << "\" x2=\""
            << kWidth - kRight + 32 << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << kWidth - kRight + 38 << "\" y=\"" << ly + 4 << "\">" << escape(s.label)
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

const std::vector<std::string>& figure_files() {
    static const std::vector<std::string> files = {
        "fig1_spatial_rmse.svg",     "fig2_temporal_rmse.svg", "fig3_cumulative_cost.svg",
        "fig4_temporal_cost.svg",    "fig5_range.svg",         "fig6_delta.svg"};
    return files;
}

namespace {

using GroupKey = std::tuple<LevelScheme, double, double>; // scheme, mu, delta0

struct Group {
    GroupKey key;
    std::vector<RunResult> runs;
};

using Track = std::vector<IterationRecord>;

// Mean of `value(record)` across tracks, aligned on position and truncated to the shortest.
template <typename Value>
Series average(const std::vector<Track>& tracks, const std::string& label, Value value) {
    Series s;
    s.label = label;
    if (tracks.empty()) return s;
    std::size_t n = std::numeric_limits<std::size_t>::max();
    for (const auto& t : tracks) n = std::min(n, t.size());
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (const auto& t : tracks) sum += value(t[i]);
        s.x.push_back(static_cast<double>(tracks.front()[i].k));
        s.y.push_back(sum / static_cast<double>(tracks.size()));
    }
    return s;
}

std::vector<IterationRecord> with_pilot(const RunResult& r) {
    std::vector<IterationRecord> out{r.pilot};
    out.insert(out.end(), r.spatial.begin(), r.spatial.end());
    return out;
}

double decibels(double count) { return count > 0 ? 10.0 * std::log10(count) : 0.0; }

} // namespace

void write_figures(const std::filesystem::path& out_dir, bool db_axis) {
    const auto manifest = read_manifest(out_dir / "manifest.csv");
    std::map<GroupKey, Group> groups;
    std::set<double> delta0_values;
    for (const auto& c : manifest) {
        if (!c.ok) continue;
        std::ifstream in(out_dir / c.file);
        if (!in) throw ParameterError("cannot read " + c.file);
        GroupKey key{c.cell.scheme, c.cell.mu, c.cell.delta0};
        auto& g = groups[key];
        g.key = key;
        g.runs.push_back(read_run_csv(in));
        delta0_values.insert(c.cell.delta0);
    }
    auto label = [&](const GroupKey& k) {
        std::string s = std::string(to_string(std::get<0>(k))) + " mu=" + format_double(std::get<1>(k));
        if (delta0_values.size() > 1) s += " d0=" + format_double(std::get<2>(k));
        return s;
    };
    const bool have_uniform = std::any_of(groups.begin(), groups.end(), [](const auto& kv) {
        return std::get<0>(kv.first) == LevelScheme::UniformSG;
    });
    auto temporal_group = [&](const GroupKey& k) {
        return !have_uniform || std::get<0>(k) == LevelScheme::UniformSG;
    };

    LinePlot fig1{"Spatial modeling RMSE", "iteration k", "modeling RMSE", {}};
    LinePlot fig2{"Temporal modeling RMSE", "temporal update", "modeling RMSE", {}};
    LinePlot fig3{"Cumulative spatial cost", "iteration k",
                  db_axis ? "cumulative replies [dB]" : "cumulative replies", {}};
    LinePlot fig4{"Temporal cost", "temporal update", db_axis ? "replies [dB]" : "replies", {}};
    LinePlot fig5{"Signal strength range estimate", "iteration k", "signal strength", {}};
    LinePlot fig6{"Contour margin", "iteration k", "delta", {}};

    auto cost_value = [db_axis](double v) { return db_axis ? decibels(v) : v; };
    for (const auto& [key, g] : groups) {
        const auto name = label(key);
        std::vector<Track> spatial, temporal, full;
        for (const auto& r : g.runs) {
            spatial.push_back(r.spatial);
            temporal.push_back(r.temporal);
            full.push_back(with_pilot(r));
        }
        fig1.series.push_back(average(spatial, name, [](const auto& r) { return r.modeling_rmse; }));
        fig3.series.push_back(average(spatial, name, [&](const auto& r) {
            return cost_value(static_cast<double>(r.cumulative_cost));
        }));
        fig5.series.push_back(average(full, name + " lo", [](const auto& r) { return r.range_est.lo; }));
        fig5.series.push_back(average(full, name + " hi", [](const auto& r) { return r.range_est.hi; }));
        if (std::get<0>(key) != LevelScheme::LloydMaxFixed)
            fig6.series.push_back(average(spatial, name, [](const auto& r) { return r.delta; }));
        if (temporal_group(key)) {
            fig2.series.push_back(average(temporal, name, [](const auto& r) { return r.modeling_rmse; }));
            fig4.series.push_back(average(temporal, name, [&](const auto& r) {
                return cost_value(static_cast<double>(r.cost));
            }));
        }
    }

    const LinePlot* figures[] = {&fig1, &fig2, &fig3, &fig4, &fig5, &fig6};
    for (std::size_t i = 0; i < std::size(figures); ++i) {
        std::ofstream out(out_dir / figure_files()[i]);
        if (!out) throw ParameterError("cannot write " + figure_files()[i]);
        out << render_svg(*figures[i]);
    }
}

} // namespace dwis
