#include "report.hpp"

#include "error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace recoverbench {

const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names{
        "balanced_accuracy", "p_value",  "cosine_feature", "cosine_channel",    "tp_adaptive",
        "fp_adaptive",       "tp_top10", "fp_top10",       "fp_top10_raw_count"};
    return names;
}

std::optional<double> metric_value(const ResultRow& r, const std::string& metric) {
    if (metric == "balanced_accuracy") return r.balanced_accuracy;
    if (metric == "p_value") return r.p_value;
    if (metric == "cosine_feature") return r.cosine_feature;
    if (metric == "cosine_channel") return r.cosine_channel;
    if (metric == "tp_adaptive") return r.tp_adaptive;
    if (metric == "fp_adaptive") return r.fp_adaptive;
    if (metric == "tp_top10") return r.tp_top10;
    if (metric == "fp_top10") return r.fp_top10;
    if (metric == "fp_top10_raw_count") {
        if (!r.fp_top10_raw_count) return std::nullopt;
        return static_cast<double>(*r.fp_top10_raw_count);
    }
    fail(ErrorCode::invalid_argument, "unknown metric '" + metric + "'");
}

namespace {

struct Pivot {
    std::vector<double> snrs;       // ascending
    std::vector<std::size_t> sizes; // ascending
    std::map<std::pair<double, std::size_t>, std::optional<double>> values;
};

Pivot pivot(const GridResult& grid, const std::string& metric, Track method) {
    (void)metric_value(ResultRow{}, metric); // validates the name
    std::set<double> snrs;
    std::set<std::size_t> sizes;
    Pivot p;
    for (const auto& r : grid.rows) {
        if (r.method != method) continue;
        snrs.insert(r.snr);
        sizes.insert(r.n_signal_channels);
        p.values[{r.snr, r.n_signal_channels}] = metric_value(r, metric);
    }
    p.snrs.assign(snrs.begin(), snrs.end());
    p.sizes.assign(sizes.begin(), sizes.end());
    return p;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += ch;
        }
    }
    return out;
}

std::string num(double v, int precision = 3) {
    std::ostringstream s;
    s << std::setprecision(precision) << v;
    return s.str();
}

} // namespace

std::string heatmap_svg(const GridResult& grid, const std::string& metric, Track method) {
    const Pivot p = pivot(grid, metric, method);
    require(!p.snrs.empty(), ErrorCode::invalid_argument,
            std::string("no rows for method ") + track_name(method));

    double lo = 0.0, hi = 1.0;
    for (const auto& [key, v] : p.values) {
        if (!v) continue;
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
    }
    auto shade = [&](double v) {
        const double t = hi > lo ? std::clamp((v - lo) / (hi - lo), 0.0, 1.0) : 1.0;
        const int g = static_cast<int>(std::lround(255.0 * (1.0 - t)));
        std::ostringstream s;
        s << "rgb(" << g << ',' << g << ',' << g << ')';
        return s.str();
    };

    const int cell = 28, left = 70, top = 50, legend_w = 16, gap = 40;
    const int grid_w = cell * static_cast<int>(p.sizes.size());
    const int grid_h = cell * static_cast<int>(p.snrs.size());
    const int width = left + grid_w + gap + legend_w + 60;
    const int height = top + std::max(grid_h, 120) + 60;

    std::ostringstream s;
    s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
    s << "  <defs>\n"
      << "    <pattern id=\"hatch\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\" "
         "patternTransform=\"rotate(45)\">\n"
      << "      <rect width=\"6\" height=\"6\" fill=\"white\"/>\n"
      << "      <line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#888\" stroke-width=\"2\"/>\n"
      << "    </pattern>\n"
      << "    <linearGradient id=\"ramp\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">\n"
      << "      <stop offset=\"0\" stop-color=\"white\"/>\n"
      << "      <stop offset=\"1\" stop-color=\"black\"/>\n"
      << "    </linearGradient>\n"
      << "  </defs>\n";
    s << "  <text x=\"" << left << "\" y=\"20\" font-size=\"13\">" << xml_escape(track_name(method)) << ": "
      << xml_escape(metric) << "</text>\n";

    for (std::size_t yi = 0; yi < p.snrs.size(); ++yi) {
        const double snr = p.snrs[p.snrs.size() - 1 - yi];
        const int y = top + cell * static_cast<int>(yi);
        s << "  <text x=\"" << left - 6 << "\" y=\"" << y + cell / 2 + 4 << "\" text-anchor=\"end\">" << num(snr)
          << "</text>\n";
        for (std::size_t xi = 0; xi < p.sizes.size(); ++xi) {
            const int x = left + cell * static_cast<int>(xi);
            const auto it = p.values.find({snr, p.sizes[xi]});
            const bool defined = it != p.values.end() && it->second.has_value();
            s << "  <rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell
              << "\" fill=\"" << (defined ? shade(*it->second) : std::string("url(#hatch)"))
              << "\" stroke=\"#ccc\" stroke-width=\"0.5\">";
            s << "<title>snr " << num(snr) << ", " << p.sizes[xi] << " channels: "
              << (defined ? num(*it->second, 4) : std::string("undefined")) << "</title></rect>\n";
        }
    }
    for (std::size_t xi = 0; xi < p.sizes.size(); ++xi) {
        const int x = left + cell * static_cast<int>(xi) + cell / 2;
        s << "  <text x=\"" << x << "\" y=\"" << top + grid_h + 14 << "\" text-anchor=\"middle\">" << p.sizes[xi]
          << "</text>\n";
    }
    s << "  <text x=\"" << left + grid_w / 2 << "\" y=\"" << top + grid_h + 32
      << "\" text-anchor=\"middle\">signal channels</text>\n";
    s << "  <text x=\"16\" y=\"" << top + grid_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << top + grid_h / 2 << ")\">SNR</text>\n";

    const int lx = left + grid_w + gap;
    const int lh = std::max(grid_h, 120);
    s << "  <rect x=\"" << lx << "\" y=\"" << top << "\" width=\"" << legend_w << "\" height=\"" << lh
      << "\" fill=\"url(#ramp)\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = lo + (hi - lo) * k / 4.0;
        const int y = top + lh - lh * k / 4;
        s << "  <text x=\"" << lx + legend_w + 4 << "\" y=\"" << y + 3 << "\">" << num(v) << "</text>\n";
    }
    s << "  <rect x=\"" << lx << "\" y=\"" << top + lh + 10 << "\" width=\"" << legend_w
      << "\" height=\"10\" fill=\"url(#hatch)\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
    s << "  <text x=\"" << lx + legend_w + 4 << "\" y=\"" << top + lh + 19 << "\">undefined</text>\n";
    s << "</svg>\n";
    return s.str();
}

void render_heatmap(const GridResult& grid, const std::string& metric, Track method,
                    const std::filesystem::path& out_path) {
    const auto svg = heatmap_svg(grid, metric, method);
    std::ofstream out(out_path, std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::io, "cannot write " + out_path.string());
    out << svg;
}

void write_metric_table(std::ostream& out, const GridResult& grid, const std::string& metric, Track method) {
    const Pivot p = pivot(grid, metric, method);
    out << "snr";
    for (auto n : p.sizes) out << ',' << n;
    out << '\n';
    auto shortest = [](double v) {
        char buf[32];
        return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
    };
    for (double snr : p.snrs) {
        out << shortest(snr);
        for (auto n : p.sizes) {
            const auto it = p.values.find({snr, n});
            out << ',';
            if (it != p.values.end() && it->second) out << shortest(*it->second);
            else out << "NA";
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------

const MethodSummary* GridSummary::find(Track t) const {
    for (const auto& m : methods)
        if (m.method == t) return &m;
    return nullptr;
}

namespace {

struct Mean {
    double sum = 0.0;
    std::size_t n = 0;
    void add(const std::optional<double>& v) {
        if (v) {
            sum += *v;
            ++n;
        }
    }
    std::optional<double> get() const {
        if (n == 0) return std::nullopt;
        return sum / static_cast<double>(n);
    }
};

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

} // namespace

GridSummary summarize(const GridResult& grid) {
    GridSummary out;
    std::set<double> snrs;
    std::set<std::size_t> sizes;
    std::vector<Track> tracks;
    std::set<std::tuple<double, std::size_t, Track>> present;
    for (const auto& r : grid.rows) {
        snrs.insert(r.snr);
        sizes.insert(r.n_signal_channels);
        if (std::find(tracks.begin(), tracks.end(), r.method) == tracks.end()) tracks.push_back(r.method);
        present.insert({r.snr, r.n_signal_channels, r.method});
    }
    for (double s : snrs)
        for (auto n : sizes)
            for (auto t : tracks)
                if (!present.count({s, n, t})) {
                    std::ostringstream k;
                    k << "snr=" << s << ",n=" << n << ",method=" << track_name(t);
                    out.missing_cells.push_back(k.str());
                }

    for (auto t : tracks) {
        MethodSummary m;
        m.method = t;
        Mean ba, cf, cc, tp, fp, fp10, perfect, full_tp;
        for (const auto& r : grid.rows) {
            if (r.method != t) continue;
            ++m.cells;
            if (r.failed()) {
                ++m.failed;
                continue;
            }
            ba.add(r.balanced_accuracy);
            if (r.balanced_accuracy) perfect.add(*r.balanced_accuracy >= 1.0 - 1e-12 ? 1.0 : 0.0);
            cf.add(r.cosine_feature);
            cc.add(r.cosine_channel);
            tp.add(r.tp_adaptive);
            fp.add(r.fp_adaptive);
            fp10.add(r.fp_top10);
            if (t == Track::univariate && r.tp_adaptive) full_tp.add(*r.tp_adaptive >= 1.0 ? 1.0 : 0.0);
        }
        m.mean_balanced_accuracy = ba.get();
        m.perfect_accuracy_fraction = perfect.get();
        m.mean_cosine_feature = cf.get();
        m.mean_cosine_channel = cc.get();
        m.mean_tp_adaptive = tp.get();
        m.mean_fp_adaptive = fp.get();
        m.mean_fp_top10 = fp10.get();
        m.full_tp_fraction = full_tp.get();
        out.methods.push_back(m);
    }

    std::map<std::pair<double, std::size_t>, double> svm_acc;
    for (const auto& r : grid.rows)
        if (r.method == Track::svm && r.balanced_accuracy) svm_acc[{r.snr, r.n_signal_channels}] = *r.balanced_accuracy;
    Mean better;
    for (const auto& r : grid.rows) {
        if (r.method != Track::mkl || !r.balanced_accuracy) continue;
        const auto it = svm_acc.find({r.snr, r.n_signal_channels});
        if (it == svm_acc.end()) continue;
        better.add(*r.balanced_accuracy > it->second + 0.05 ? 1.0 : 0.0);
    }
    out.mkl_outperforms_svm_fraction = better.get();
    return out;
}

nlohmann::json GridSummary::to_json() const {
    nlohmann::json j;
    nlohmann::json ms = nlohmann::json::array();
    for (const auto& m : methods) {
        ms.push_back({{"method", track_name(m.method)},
                      {"cells", m.cells},
                      {"failed", m.failed},
                      {"perfect_accuracy_fraction", opt(m.perfect_accuracy_fraction)},
                      {"mean_balanced_accuracy", opt(m.mean_balanced_accuracy)},
                      {"mean_cosine_feature", opt(m.mean_cosine_feature)},
                      {"mean_cosine_channel", opt(m.mean_cosine_channel)},
                      {"mean_tp_adaptive", opt(m.mean_tp_adaptive)},
                      {"mean_fp_adaptive", opt(m.mean_fp_adaptive)},
                      {"mean_fp_top10", opt(m.mean_fp_top10)},
                      {"full_tp_fraction", opt(m.full_tp_fraction)}});
    }
    j["methods"] = ms;
    j["mkl_outperforms_svm_fraction"] = opt(mkl_outperforms_svm_fraction);
    nlohmann::json cosine = nlohmann::json::object();
    for (auto t : {Track::svm, Track::mkl}) {
        if (const auto* m = find(t))
            cosine[track_name(t)] = {{"W", opt(m->mean_cosine_feature)}, {"W_c", opt(m->mean_cosine_channel)}};
    }
    j["cosine_table"] = cosine;
    j["missing_cells"] = missing_cells;
    return j;
}

std::string GridSummary::to_text() const {
    std::ostringstream s;
    auto pct = [](const std::optional<double>& v) {
        if (!v) return std::string("NA");
        std::ostringstream o;
        o << std::fixed << std::setprecision(1) << 100.0 * *v << '%';
        return o.str();
    };
    auto val = [](const std::optional<double>& v) {
        if (!v) return std::string("NA");
        std::ostringstream o;
        o << std::fixed << std::setprecision(4) << *v;
        return o.str();
    };
    for (const auto& m : methods) {
        s << track_name(m.method) << ": " << m.cells << " cells";
        if (m.failed) s << " (" << m.failed << " failed)";
        s << '\n';
        if (m.method == Track::univariate) {
            s << "  full TP recovery      " << pct(m.full_tp_fraction) << '\n';
            s << "  mean TP / FP          " << val(m.mean_tp_adaptive) << " / " << val(m.mean_fp_adaptive) << '\n';
            continue;
        }
        s << "  perfect accuracy      " << pct(m.perfect_accuracy_fraction) << '\n';
        s << "  mean accuracy         " << val(m.mean_balanced_accuracy) << '\n';
        s << "  cosine W / W_c        " << val(m.mean_cosine_feature) << " / " << val(m.mean_cosine_channel) << '\n';
        s << "  mean FP adaptive      " << val(m.mean_fp_adaptive) << '\n';
        s << "  mean FP top-10        " << val(m.mean_fp_top10) << '\n';
    }
    s << "MKL > SVM + 5% accuracy: " << pct(mkl_outperforms_svm_fraction) << '\n';
    if (!missing_cells.empty()) {
        s << "missing cells (" << missing_cells.size() << "):\n";
        for (const auto& c : missing_cells) s << "  " << c << '\n';
    }
    return s.str();
}

} // namespace recoverbench
