#pragma once

// Minimal SVG line plots. Every series becomes one polyline, and the raw
// data is embedded in a comment so tests can parse series back out.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "vispro/common.hpp"

namespace vispro {

struct PlotSeries {
    std::string name;
    std::string color = "#1f77b4";
    std::vector<std::pair<double, double>> points;
};

class SvgPlot {
   public:
    SvgPlot(std::string title, std::string x_label, std::string y_label)
        : title_(std::move(title)), x_label_(std::move(x_label)),
          y_label_(std::move(y_label)) {}

    void add_series(PlotSeries series) { series_.push_back(std::move(series)); }

    std::string render(int width = 860, int height = 520) const {
        double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
        double y_min = x_min, y_max = -x_min;
        for (const auto& s : series_) {
            for (const auto& [x, y] : s.points) {
                x_min = std::min(x_min, x);
                x_max = std::max(x_max, x);
                y_min = std::min(y_min, y);
                y_max = std::max(y_max, y);
            }
        }
        if (!(x_max > x_min)) {
            x_min -= 1.0;
            x_max += 1.0;
        }
        if (!(y_max > y_min)) {
            y_min -= 1.0;
            y_max += 1.0;
        }
        const double margin = 60.0;
        const double plot_w = width - 2 * margin, plot_h = height - 2 * margin;
        auto px = [&](double x) {
            return margin + plot_w * (x - x_min) / (x_max - x_min);
        };
        auto py = [&](double y) {
            return height - margin - plot_h * (y - y_min) / (y_max - y_min);
        };

        std::ostringstream out;
        out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
            << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
            << "\">\n";
        for (const auto& s : series_) {
            out << "<!-- series " << s.name << ":";
            for (const auto& [x, y] : s.points) out << ' ' << fmt(x) << ',' << fmt(y);
            out << " -->\n";
        }
        out << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
            << "\" fill=\"white\"/>\n";
        out << "<rect x=\"" << fmt(margin) << "\" y=\"" << fmt(margin) << "\" width=\""
            << fmt(plot_w) << "\" height=\"" << fmt(plot_h)
            << "\" fill=\"none\" stroke=\"#444444\"/>\n";
        out << "<text x=\"" << width / 2 << "\" y=\"30\" text-anchor=\"middle\" "
               "font-family=\"sans-serif\" font-size=\"16\">" << escape(title_)
            << "</text>\n";
        out << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
            << escape(x_label_) << "</text>\n";
        out << "<text x=\"18\" y=\"" << height / 2
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
               "transform=\"rotate(-90 18 " << height / 2 << ")\">"
            << escape(y_label_) << "</text>\n";

        // Axis ticks: four divisions per axis.
        for (int i = 0; i <= 4; ++i) {
            const double xv = x_min + (x_max - x_min) * i / 4.0;
            const double yv = y_min + (y_max - y_min) * i / 4.0;
            out << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << fmt(height - margin + 18)
                << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                   "font-size=\"10\">" << fmt(xv) << "</text>\n";
            out << "<text x=\"" << fmt(margin - 6) << "\" y=\"" << fmt(py(yv) + 3)
                << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
                   "font-size=\"10\">" << fmt(yv) << "</text>\n";
        }

        double legend_y = margin + 16.0;
        for (const auto& s : series_) {
            out << "<polyline fill=\"none\" stroke=\"" << s.color
                << "\" stroke-width=\"1.5\" points=\"";
            for (const auto& [x, y] : s.points) {
                out << fmt(px(x)) << ',' << fmt(py(y)) << ' ';
            }
            out << "\"/>\n";
            out << "<text x=\"" << fmt(margin + 10) << "\" y=\"" << fmt(legend_y)
                << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << s.color
                << "\">" << escape(s.name) << "</text>\n";
            legend_y += 14.0;
        }
        out << "</svg>\n";
        return out.str();
    }

   private:
    static std::string fmt(double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return buf;
    }

    static std::string escape(const std::string& text) {
        std::string out;
        for (const char c : text) {
            switch (c) {
                case '<': out += "&lt;"; break;
                case '>': out += "&gt;"; break;
                case '&': out += "&amp;"; break;
                default: out += c;
            }
        }
        return out;
    }

    std::string title_, x_label_, y_label_;
    std::vector<PlotSeries> series_;
};

}  // namespace vispro
