#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "rmdyn/record_io.hpp"

namespace rmdyn {

namespace {

constexpr double kW = 640, kH = 400, kL = 70, kR = 20, kT = 40, kB = 50;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
        switch (c) {
            case '&': o += "&amp;"; break;
            case '<': o += "&lt;"; break;
            case '>': o += "&gt;"; break;
            case '"': o += "&quot;"; break;
            default: o += c;
        }
    }
    return o;
}

class Canvas {
public:
    Canvas(std::string title, std::string xlabel, std::string ylabel)
        : title_(std::move(title)), xl_(std::move(xlabel)), yl_(std::move(ylabel)) {}

    void fit(const std::vector<double>& xs, const std::vector<double>& ys) {
        for (double x : xs)
            if (std::isfinite(x)) x0_ = std::min(x0_, x), x1_ = std::max(x1_, x);
        for (double y : ys)
            if (std::isfinite(y)) y0_ = std::min(y0_, y), y1_ = std::max(y1_, y);
    }
    void include_y(double y) { y0_ = std::min(y0_, y), y1_ = std::max(y1_, y); }

    double px(double x) const { return kL + (x - x0_) / (x1_ - x0_) * (kW - kL - kR); }
    double py(double y) const { return kH - kB - (y - y0_) / (y1_ - y0_) * (kH - kT - kB); }

    void finalize_ranges() {
        if (!(x1_ >= x0_)) x0_ = 0, x1_ = 1;
        if (!(y1_ >= y0_)) y0_ = 0, y1_ = 1;
        if (x1_ == x0_) x0_ -= 0.5, x1_ += 0.5;
        if (y1_ == y0_) y0_ -= 0.5, y1_ += 0.5;
        const double pad = 0.05 * (y1_ - y0_);
        y1_ += pad;
        if (y0_ != 0.0) y0_ -= pad;
    }

    void polyline(const std::vector<double>& xs, const std::vector<double>& ys, const char* color) {
        std::string pts;
        for (std::size_t i = 0; i < std::min(xs.size(), ys.size()); ++i)
            if (std::isfinite(xs[i]) && std::isfinite(ys[i])) pts += num(px(xs[i])) + "," + num(py(ys[i])) + " ";
        if (!pts.empty())
            body_ += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                     "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    }
    void points(const std::vector<double>& xs, const std::vector<double>& ys, const char* color) {
        for (std::size_t i = 0; i < std::min(xs.size(), ys.size()); ++i)
            if (std::isfinite(xs[i]) && std::isfinite(ys[i]))
                body_ += "<circle cx=\"" + num(px(xs[i])) + "\" cy=\"" + num(py(ys[i])) +
                         "\" r=\"1.8\" fill=\"" + color + "\" fill-opacity=\"0.6\"/>\n";
    }
    void bar(double x_left, double x_right, double y, const char* color) {
        if (!std::isfinite(y)) return;
        const double top = py(std::max(y, 0.0)), base = py(std::max(y0_, 0.0));
        body_ += "<rect x=\"" + num(px(x_left)) + "\" y=\"" + num(top) + "\" width=\"" +
                 num(std::max(px(x_right) - px(x_left), 0.5)) + "\" height=\"" +
                 num(std::max(base - top, 0.0)) + "\" fill=\"" + color + "\"/>\n";
    }
    void legend(int slot, const char* color, const std::string& label) {
        const double y = kT + 14.0 * slot;
        body_ += "<rect x=\"" + num(kW - 170) + "\" y=\"" + num(y - 8) +
                 "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>\n<text x=\"" + num(kW - 155) +
                 "\" y=\"" + num(y + 1) + "\" font-size=\"11\">" + esc(label) + "</text>\n";
    }

    std::string svg() const {
        std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kW) + "\" height=\"" + num(kH) +
             "\" viewBox=\"0 0 " + num(kW) + " " + num(kH) + "\" font-family=\"sans-serif\">\n";
        s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        s += "<text x=\"" + num(kW / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + esc(title_) + "</text>\n";
        s += "<line x1=\"" + num(kL) + "\" y1=\"" + num(kH - kB) + "\" x2=\"" + num(kW - kR) + "\" y2=\"" +
             num(kH - kB) + "\" stroke=\"black\"/>\n";
        s += "<line x1=\"" + num(kL) + "\" y1=\"" + num(kT) + "\" x2=\"" + num(kL) + "\" y2=\"" +
             num(kH - kB) + "\" stroke=\"black\"/>\n";
        for (int t = 0; t <= 4; ++t) {
            const double fx = x0_ + (x1_ - x0_) * t / 4.0, fy = y0_ + (y1_ - y0_) * t / 4.0;
            s += "<text x=\"" + num(px(fx)) + "\" y=\"" + num(kH - kB + 16) +
                 "\" text-anchor=\"middle\" font-size=\"10\">" + num(fx) + "</text>\n";
            s += "<text x=\"" + num(kL - 6) + "\" y=\"" + num(py(fy) + 3) +
                 "\" text-anchor=\"end\" font-size=\"10\">" + num(fy) + "</text>\n";
        }
        s += "<text x=\"" + num(kW / 2) + "\" y=\"" + num(kH - 12) + "\" text-anchor=\"middle\" font-size=\"12\">" +
             esc(xl_) + "</text>\n";
        s += "<text x=\"16\" y=\"" + num(kH / 2) + "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " +
             num(kH / 2) + ")\">" + esc(yl_) + "</text>\n";
        return s + body_ + "</svg>\n";
    }

private:
    std::string title_, xl_, yl_, body_;
    double x0_ = INFINITY, x1_ = -INFINITY, y0_ = INFINITY, y1_ = -INFINITY;
};

const std::vector<double>& series(const ExperimentRecord& r, const char* key) {
    static const std::vector<double> empty;
    const auto* s = r.find_series(key);
    return s ? *s : empty;
}

void grouped_bars(Canvas& cv, const std::vector<double>& xs, const std::vector<double>& a,
                  const std::vector<double>& b) {
    double w = 1.0;
    if (xs.size() > 1) w = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (k < a.size()) cv.bar(xs[k] - 0.4 * w, xs[k], a[k], "#4477aa");
        if (k < b.size()) cv.bar(xs[k], xs[k] + 0.4 * w, b[k], "#ee6677");
    }
}

std::string born_plot(const ExperimentRecord& r) {
    const auto& c = series(r, "centers");
    const auto& e = series(r, "empirical");
    const auto& t = series(r, "target");
    Canvas cv("Outcome frequencies", "class center", "probability");
    std::vector<double> xs = c;
    if (xs.size() > 1) {
        const double w = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
        xs.push_back(xs.front() - 0.5 * w);
        xs.push_back(xs.back() + 0.5 * w);
    }
    cv.fit(xs, e);
    cv.fit({}, t);
    cv.include_y(0.0);
    cv.finalize_ranges();
    grouped_bars(cv, c, e, t);
    cv.legend(0, "#4477aa", "empirical");
    cv.legend(1, "#ee6677", "target");
    return cv.svg();
}

std::string qct_plot(const ExperimentRecord& r) {
    Canvas cv("Recorded points and Newtonian orbit", "t", "x");
    cv.fit(series(r, "newton_time"), series(r, "newton_a"));
    cv.fit(series(r, "record_time"), series(r, "record_mu"));
    cv.finalize_ranges();
    cv.points(series(r, "record_time"), series(r, "record_mu"), "#4477aa");
    cv.polyline(series(r, "newton_time"), series(r, "newton_a"), "#ee6677");
    cv.legend(0, "#4477aa", "recorded mu_z");
    cv.legend(1, "#ee6677", "Newton");
    return cv.svg();
}

std::string slit_plot(const ExperimentRecord& r) {
    const auto& c = series(r, "centers");
    std::vector<double> emp = series(r, "empirical");
    double total = 0.0;
    for (double v : emp) total += v;
    if (total > 0.0)
        for (double& v : emp) v /= total;
    const auto& t = series(r, "target_pattern");
    Canvas cv("Screen pattern", "screen position", "probability");
    cv.fit(c, emp);
    cv.fit({}, t);
    cv.include_y(0.0);
    cv.finalize_ranges();
    grouped_bars(cv, c, emp, t);
    cv.legend(0, "#4477aa", "hits");
    cv.legend(1, "#ee6677", "Born target");
    return cv.svg();
}

std::string zeno_plot(const ExperimentRecord& r) {
    Canvas cv("Survival under monitoring", "kick interval dt", "survival");
    cv.fit(series(r, "kick_intervals"), series(r, "survival"));
    cv.include_y(0.0);
    cv.include_y(1.0);
    cv.finalize_ranges();
    cv.polyline(series(r, "kick_intervals"), series(r, "survival"), "#4477aa");
    cv.points(series(r, "kick_intervals"), series(r, "survival"), "#4477aa");
    return cv.svg();
}

std::string brownian_plot(const ExperimentRecord& r) {
    const auto& z = series(r, "standardized");
    constexpr int kBins = 24;
    constexpr double lo = -4.0, hi = 4.0, w = (hi - lo) / kBins;
    std::vector<double> counts(kBins, 0.0);
    std::size_t n = 0;
    for (double v : z) {
        if (!std::isfinite(v)) continue;
        ++n;
        const int b = static_cast<int>(std::floor((v - lo) / w));
        if (b >= 0 && b < kBins) counts[static_cast<std::size_t>(b)] += 1.0;
    }
    std::vector<double> xs, dens, gx, gy;
    for (int b = 0; b < kBins; ++b) {
        xs.push_back(lo + (b + 0.5) * w);
        dens.push_back(n ? counts[static_cast<std::size_t>(b)] / (static_cast<double>(n) * w) : 0.0);
    }
    for (int i = 0; i <= 160; ++i) {
        const double x = lo + (hi - lo) * i / 160.0;
        gx.push_back(x);
        gy.push_back(std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI));
    }
    Canvas cv("Standardized increments", "increment / sqrt(D dt)", "density");
    cv.fit({lo, hi}, dens);
    cv.fit({}, gy);
    cv.include_y(0.0);
    cv.finalize_ranges();
    for (int b = 0; b < kBins; ++b) cv.bar(lo + b * w, lo + (b + 1) * w, dens[static_cast<std::size_t>(b)], "#4477aa");
    cv.polyline(gx, gy, "#ee6677");
    cv.legend(0, "#4477aa", "increments");
    cv.legend(1, "#ee6677", "Normal(0,1)");
    return cv.svg();
}

}  // namespace

std::string plot_svg(const ExperimentRecord& record) {
    if (record.kind == "born") return born_plot(record);
    if (record.kind == "qct") return qct_plot(record);
    if (record.kind == "double_slit") return slit_plot(record);
    if (record.kind == "zeno") return zeno_plot(record);
    if (record.kind == "brownian") return brownian_plot(record);
    return {};
}

std::vector<std::string> emit_plots(const ExperimentRecord& record, const std::string& dir) {
    const std::string svg = plot_svg(record);
    if (svg.empty()) return {};
    std::filesystem::create_directories(dir);
    const std::string name = record.kind + ".svg";
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << svg;
    return {name};
}

}  // namespace rmdyn
