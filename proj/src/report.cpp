#include "estkit/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace estkit {

std::string format_full(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    return out;
}

void close_checked(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

}  // namespace

void write_result_csv(const std::filesystem::path& path, const ExperimentResult& result) {
    std::ofstream out = open_for_write(path);
    out << "step,truth_x1_ft,truth_x2_ftps,truth_x3,z_ft";
    for (const auto& [kind, series] : result.filters) {
        const std::string f = filter_name(kind);
        out << ',' << f << "_est_x1_ft," << f << "_est_x2_ftps," << f << "_est_x3,"
            << f << "_err_truth_ft," << f << "_err_meas_ft," << f << "_sq_err_ft2";
    }
    out << '\n';
    for (std::size_t row = 0; row < result.step.size(); ++row) {
        out << result.step[row] << ',' << format_full(result.truth[row](0)) << ','
            << format_full(result.truth[row](1)) << ',' << format_full(result.truth[row](2))
            << ',' << format_full(result.measurements[row]);
        for (const auto& [kind, series] : result.filters) {
            if (row < series.estimates.size()) {
                out << ',' << format_full(series.estimates[row](0)) << ','
                    << format_full(series.estimates[row](1)) << ','
                    << format_full(series.estimates[row](2)) << ','
                    << format_full(series.err_truth[row]) << ','
                    << format_full(series.err_meas[row]) << ','
                    << format_full(series.sq_err[row]);
            } else {
                out << ",,,,,,";  // filter stopped early (divergence)
            }
        }
        out << '\n';
    }
    close_checked(out, path);
}

void write_mc_summary_csv(const std::filesystem::path& path, const MonteCarloResult& mc) {
    std::ofstream out = open_for_write(path);
    out << "filter,mean_mse,stderr,diverged_count\n";
    for (const auto& [kind, agg] : mc.filters) {
        out << filter_name(kind) << ',' << format_full(agg.mean_mse) << ','
            << format_full(agg.stderr_mse) << ',' << agg.diverged << '\n';
    }
    close_checked(out, path);
}

namespace {

struct Range {
    double lo = 0.0;
    double hi = 1.0;

    void expand(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
};

std::string format_tick(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(4);
    os << v;
    return os.str();
}

}  // namespace

void write_svg_chart(const std::filesystem::path& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series) {
    constexpr double kWidth = 800.0;
    constexpr double kHeight = 500.0;
    constexpr double kLeft = 80.0;
    constexpr double kRight = 30.0;
    constexpr double kTop = 50.0;
    constexpr double kBottom = 60.0;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;

    Range xr;
    Range yr;
    bool first = true;
    for (const SvgSeries& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (first) {
                xr = {s.x[i], s.x[i]};
                yr = {s.y[i], s.y[i]};
                first = false;
            } else {
                xr.expand(s.x[i]);
                yr.expand(s.y[i]);
            }
        }
    }
    if (xr.hi == xr.lo) {
        xr.hi = xr.lo + 1.0;
    }
    if (yr.hi == yr.lo) {
        yr.hi = yr.lo + 1.0;
    }
    const auto sx = [&](double v) { return kLeft + (v - xr.lo) / (xr.hi - xr.lo) * plot_w; };
    const auto sy = [&](double v) {
        return kTop + plot_h - (v - yr.lo) / (yr.hi - yr.lo) * plot_h;
    };

    std::ofstream out = open_for_write(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\" "
           "font-family=\"sans-serif\" font-size=\"13\">\n";
    out << "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
    out << "<text x=\"400\" y=\"26\" text-anchor=\"middle\" font-size=\"17\">" << title
        << "</text>\n";
    // frame and gridlines with tick labels
    for (int i = 0; i <= 4; ++i) {
        const double fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
        const double py = sy(fy);
        out << "<line x1=\"" << kLeft << "\" y1=\"" << py << "\" x2=\"" << kLeft + plot_w
            << "\" y2=\"" << py << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << kLeft - 8 << "\" y=\"" << py + 4
            << "\" text-anchor=\"end\">" << format_tick(fy) << "</text>\n";
        const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
        const double px = sx(fx);
        out << "<text x=\"" << px << "\" y=\"" << kTop + plot_h + 20
            << "\" text-anchor=\"middle\">" << format_tick(fx) << "</text>\n";
    }
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 14
        << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
    out << "<text x=\"20\" y=\"" << kTop + plot_h / 2
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " << kTop + plot_h / 2
        << ")\">" << y_label << "</text>\n";
    for (const SvgSeries& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            out << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
        }
        out << "\"/>\n";
    }
    double legend_y = kTop + 16.0;
    for (const SvgSeries& s : series) {
        out << "<line x1=\"" << kLeft + plot_w - 150 << "\" y1=\"" << legend_y - 4
            << "\" x2=\"" << kLeft + plot_w - 120 << "\" y2=\"" << legend_y - 4
            << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << kLeft + plot_w - 112 << "\" y=\"" << legend_y << "\">"
            << s.label << "</text>\n";
        legend_y += 18.0;
    }
    out << "</svg>\n";
    close_checked(out, path);
}

}  // namespace estkit
