/*
 Copyright 2026 The fracstab Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef FRACSTAB_SVG_HPP
#define FRACSTAB_SVG_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <string>
#include <vector>

#include "fracstab/model.hpp"

namespace fracstab::svg {

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

struct Frame {
    double width = 640, height = 420, pad = 50;
    double x0, x1, y0, y1;
    [[nodiscard]] double px(double x) const { return pad + (x - x0) / (x1 - x0) * (width - 2 * pad); }
    [[nodiscard]] double py(double y) const { return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad); }
};

inline std::string header(const Frame& f, const std::string& title) {
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(f.width) + "\" height=\"" +
                    num(f.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(f.width / 2) + "\" y=\"20\" text-anchor=\"middle\">" + title + "</text>\n";
    s += "<rect x=\"" + num(f.pad) + "\" y=\"" + num(f.pad) + "\" width=\"" + num(f.width - 2 * f.pad) +
         "\" height=\"" + num(f.height - 2 * f.pad) + "\" fill=\"none\" stroke=\"black\"/>\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", f.x0);
    s += "<text x=\"" + num(f.pad) + "\" y=\"" + num(f.height - f.pad + 16) + "\">" + buf + "</text>\n";
    std::snprintf(buf, sizeof buf, "%.3g", f.x1);
    s += "<text x=\"" + num(f.width - f.pad) + "\" y=\"" + num(f.height - f.pad + 16) + "\" text-anchor=\"end\">" +
         buf + "</text>\n";
    std::snprintf(buf, sizeof buf, "%.3g", f.y0);
    s += "<text x=\"" + num(f.pad - 4) + "\" y=\"" + num(f.height - f.pad) + "\" text-anchor=\"end\">" + buf +
         "</text>\n";
    std::snprintf(buf, sizeof buf, "%.3g", f.y1);
    s += "<text x=\"" + num(f.pad - 4) + "\" y=\"" + num(f.pad + 10) + "\" text-anchor=\"end\">" + buf + "</text>\n";
    return s;
}

} // namespace detail

/// Line plot of selected columns of `values` against `times`.
inline std::string line_plot(const Vector& times, const Matrix& values, const std::vector<std::string>& labels,
                             const std::string& title) {
    detail::Frame f;
    f.x0 = times.size() ? times(0) : 0.0;
    f.x1 = times.size() ? times(times.size() - 1) : 1.0;
    if (f.x1 <= f.x0) f.x1 = f.x0 + 1.0;
    f.y0 = values.size() ? values.minCoeff() : -1.0;
    f.y1 = values.size() ? values.maxCoeff() : 1.0;
    if (f.y1 - f.y0 < 1e-12) { f.y0 -= 1.0; f.y1 += 1.0; }
    std::string s = detail::header(f, title);
    // at most ~2000 vertices per series
    const Eigen::Index stride = std::max<Eigen::Index>(1, times.size() / 2000);
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
        const char* color = detail::kPalette[c % 10];
        s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
        for (Eigen::Index k = 0; k < times.size(); k += stride) {
            s += detail::num(f.px(times(k))) + "," + detail::num(f.py(values(k, c))) + " ";
        }
        s += "\"/>\n";
        const std::string label = c < static_cast<Eigen::Index>(labels.size()) ? labels[static_cast<std::size_t>(c)] : "";
        s += "<text x=\"" + detail::num(f.width - f.pad + 4) + "\" y=\"" + detail::num(f.pad + 14 * (c + 1)) +
             "\" fill=\"" + color + "\">" + label + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

/// Eigenvalue scatter with the stability boundary rays at +-boundary radians.
inline std::string eigenvalue_plot(const std::vector<std::complex<double>>& eigs, double boundary,
                                   const std::string& title) {
    double reach = 1.0;
    for (const auto& e : eigs) reach = std::max({reach, std::abs(e.real()), std::abs(e.imag())});
    reach *= 1.15;
    detail::Frame f;
    f.width = f.height = 480;
    f.x0 = f.y0 = -reach;
    f.x1 = f.y1 = reach;
    std::string s = detail::header(f, title);
    s += "<line x1=\"" + detail::num(f.px(-reach)) + "\" y1=\"" + detail::num(f.py(0)) + "\" x2=\"" +
         detail::num(f.px(reach)) + "\" y2=\"" + detail::num(f.py(0)) + "\" stroke=\"#bbbbbb\"/>\n";
    s += "<line x1=\"" + detail::num(f.px(0)) + "\" y1=\"" + detail::num(f.py(-reach)) + "\" x2=\"" +
         detail::num(f.px(0)) + "\" y2=\"" + detail::num(f.py(reach)) + "\" stroke=\"#bbbbbb\"/>\n";
    for (double sign : {1.0, -1.0}) {
        const double x = reach * std::cos(boundary), y = sign * reach * std::sin(boundary);
        s += "<line x1=\"" + detail::num(f.px(0)) + "\" y1=\"" + detail::num(f.py(0)) + "\" x2=\"" +
             detail::num(f.px(x)) + "\" y2=\"" + detail::num(f.py(y)) +
             "\" stroke=\"#d62728\" stroke-dasharray=\"6,4\"/>\n";
    }
    for (const auto& e : eigs) {
        s += "<circle cx=\"" + detail::num(f.px(e.real())) + "\" cy=\"" + detail::num(f.py(e.imag())) +
             "\" r=\"3.5\" fill=\"#1f77b4\"/>\n";
    }
    s += "</svg>\n";
    return s;
}

} // namespace fracstab::svg

#endif // FRACSTAB_SVG_HPP
