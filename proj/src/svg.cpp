#include "vgs/io/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "vgs/io/csv.hpp"

namespace vgs::io {

namespace {

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double x, const char* fmt = "%.6g") {
    char buf[40];
    std::snprintf(buf, sizeof buf, fmt, x);
    return buf;
}

const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

std::string render_svg(const PlotSpec& spec, const std::vector<Series>& series) {
    const double left = 70, right = 20, top = 40, bottom = 50;
    const double pw = spec.width - left - right, ph = spec.height - top - bottom;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto& s : series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
    if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
    auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

    std::string o;
    o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.width) + "\" height=\"" +
         std::to_string(spec.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o += "<text x=\"" + num(spec.width / 2.0) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
         escape(spec.title) + "</text>\n";
    o += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
    o += "<text x=\"" + num(left) + "\" y=\"" + num(top + ph + 16) + "\" text-anchor=\"start\">" + num(xmin) +
         "</text>\n";
    o += "<text x=\"" + num(left + pw) + "\" y=\"" + num(top + ph + 16) + "\" text-anchor=\"end\">" + num(xmax) +
         "</text>\n";
    o += "<text x=\"" + num(left - 4) + "\" y=\"" + num(top + ph) + "\" text-anchor=\"end\">" + num(ymin) +
         "</text>\n";
    o += "<text x=\"" + num(left - 4) + "\" y=\"" + num(top + 10) + "\" text-anchor=\"end\">" + num(ymax) +
         "</text>\n";
    o += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(spec.height - 12.0) + "\" text-anchor=\"middle\">" +
         escape(spec.x_label) + "</text>\n";
    o += "<text transform=\"translate(16," + num(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
         escape(spec.y_label) + "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = palette[k % (sizeof palette / sizeof *palette)];
        std::string pts;
        auto flush = [&] {
            if (!pts.empty())
                o += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" +
                     pts + "\"/>\n";
            pts.clear();
        };
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                flush();
                continue;
            }
            pts += num(sx(s.x[i]), "%.2f") + "," + num(sy(s.y[i]), "%.2f") + " ";
        }
        flush();
        const double ly = top + 14 + 16.0 * double(k);
        o += "<line x1=\"" + num(left + pw - 110) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" + num(left + pw - 90) +
             "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        o += "<text x=\"" + num(left + pw - 85) + "\" y=\"" + num(ly) + "\">" + escape(s.label) + "</text>\n";
    }
    o += "</svg>\n";
    return o;
}

void write_svg(const std::filesystem::path& path, const PlotSpec& spec, const std::vector<Series>& series) {
    write_file_atomic(path, render_svg(spec, series));
}

}  // namespace vgs::io
