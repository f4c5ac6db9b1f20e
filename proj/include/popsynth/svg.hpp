#pragma once

#include <string>
#include <utility>
#include <vector>

namespace popsynth {

struct ScatterOptions {
    std::string title;
    std::string x_label = "actual count";
    std::string y_label = "synthetic count";
    double r_squared = 0.0;
    bool annotate_r_squared = true;
    int width = 560;
    int height = 560;
};

// Static scatter plot with the identity line; points are (actual, synthetic).
std::string scatter_svg(const std::vector<std::pair<double, double>> &points,
                        const ScatterOptions &options);

void write_scatter_svg(const std::string &path,
                       const std::vector<std::pair<double, double>> &points,
                       const ScatterOptions &options);

} // namespace popsynth
