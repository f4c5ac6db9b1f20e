#include "popsynth/svg.hpp"

#include "popsynth/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace popsynth {

namespace {

double nice_ceiling(double v) {
    if (v <= 0.0) return 1.0;
    const double mag = std::pow(10.0, std::floor(std::log10(v)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (v <= m * mag) return m * mag;
    return 10.0 * mag;
}

} // namespace

std::string scatter_svg(const std::vector<std::pair<double, double>> &points,
                        const ScatterOptions &options) {
    const int w = options.width, h = options.height;
    const int margin = 56;
    const double plot_w = w - 2 * margin;
    const double plot_h = h - 2 * margin;

    double max_v = 1.0;
    for (const auto &[x, y] : points) max_v = std::max({max_v, x, y});
    max_v = nice_ceiling(max_v * 1.05);

    auto px = [&](double x) { return margin + x / max_v * plot_w; };
    auto py = [&](double y) { return h - margin - y / max_v * plot_h; };

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
    out << "  <rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";

    // axes
    out << "  <line x1=\"" << margin << "\" y1=\"" << h - margin << "\" x2=\"" << w - margin
        << "\" y2=\"" << h - margin << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << h - margin << "\" stroke=\"black\"/>\n";

    // ticks
    const int n_ticks = 5;
    for (int i = 0; i <= n_ticks; ++i) {
        const double v = max_v * i / n_ticks;
        out << "  <line x1=\"" << px(v) << "\" y1=\"" << h - margin << "\" x2=\"" << px(v)
            << "\" y2=\"" << h - margin + 5 << "\" stroke=\"black\"/>\n";
        out << "  <text x=\"" << px(v) << "\" y=\"" << h - margin + 18
            << "\" font-size=\"11\" text-anchor=\"middle\">" << v << "</text>\n";
        out << "  <line x1=\"" << margin - 5 << "\" y1=\"" << py(v) << "\" x2=\"" << margin
            << "\" y2=\"" << py(v) << "\" stroke=\"black\"/>\n";
        out << "  <text x=\"" << margin - 8 << "\" y=\"" << py(v) + 4
            << "\" font-size=\"11\" text-anchor=\"end\">" << v << "</text>\n";
    }

    // identity line
    out << "  <line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(max_v) << "\" y2=\""
        << py(max_v) << "\" stroke=\"#888\" stroke-dasharray=\"5,4\"/>\n";

    for (const auto &[x, y] : points)
        out << "  <circle cx=\"" << px(x) << "\" cy=\"" << py(y)
            << "\" r=\"3.5\" fill=\"#1f77b4\" fill-opacity=\"0.75\"/>\n";

    if (!options.title.empty())
        out << "  <text x=\"" << w / 2 << "\" y=\"" << margin - 24
            << "\" font-size=\"14\" text-anchor=\"middle\">" << options.title << "</text>\n";
    if (options.annotate_r_squared) {
        std::ostringstream r2;
        r2.precision(4);
        r2 << options.r_squared;
        out << "  <text x=\"" << margin + 10 << "\" y=\"" << margin + 6
            << "\" font-size=\"13\">R&#178; = " << r2.str() << "</text>\n";
    }
    out << "  <text x=\"" << w / 2 << "\" y=\"" << h - 14
        << "\" font-size=\"12\" text-anchor=\"middle\">" << options.x_label << "</text>\n";
    out << "  <text x=\"16\" y=\"" << h / 2
        << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << h / 2
        << ")\">" << options.y_label << "</text>\n";
    out << "</svg>\n";
    return out.str();
}

void write_scatter_svg(const std::string &path,
                       const std::vector<std::pair<double, double>> &points,
                       const ScatterOptions &options) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("svg: cannot write '" + path + "'");
    out << scatter_svg(points, options);
}

} // namespace popsynth
