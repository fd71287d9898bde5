#include "qha/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qha {

namespace {

void write_text_atomic(const std::string& text, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("rename failed: " + path);
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace

void write_json_file(const ordered_json& j, const std::string& path) {
  write_text_atomic(j.dump(2) + "\n", path);
}

void write_value_spectrum_csv(std::span<const double> values, const std::string& path) {
  std::string text = "n,lambda_n\n";
  char buf[64];
  for (std::size_t n = 0; n < values.size(); ++n) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", n, values[n]);
    text += buf;
  }
  write_text_atomic(text, path);
}

void write_two_column_csv(const std::string& x_name, std::span<const double> x,
                          const std::string& y_name, std::span<const double> y,
                          const std::string& path) {
  if (x.size() != y.size()) throw std::invalid_argument("csv columns differ in length");
  std::string text = x_name + "," + y_name + "\n";
  char buf[96];
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", x[i], y[i]);
    text += buf;
  }
  write_text_atomic(text, path);
}

CsvColumns read_two_column_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);

  CsvColumns out;
  const auto comma = line.find(',');
  if (comma == std::string::npos) throw std::runtime_error("malformed csv header: " + path);
  out.x_name = line.substr(0, comma);
  out.y_name = line.substr(comma + 1);

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const char* s = line.c_str();
    char* end = nullptr;
    const double x = std::strtod(s, &end);
    if (end == s || *end != ',') throw std::runtime_error("malformed csv row: " + line);
    const char* s2 = end + 1;
    const double y = std::strtod(s2, &end);
    if (end == s2 || (*end != '\0' && *end != '\r'))
      throw std::runtime_error("malformed csv row: " + line);
    out.x.push_back(x);
    out.y.push_back(y);
  }
  if (out.x.empty()) throw std::runtime_error("csv has no data rows: " + path);
  return out;
}

void render_plot_svg(const CsvColumns& data, const std::string& kind, const std::string& path) {
  const bool loglog = kind == "loglog-spectrum";
  if (!loglog && kind != "ratio-curve")
    throw std::invalid_argument("render_plot_svg: unknown kind '" + kind +
                                "' (expected loglog-spectrum or ratio-curve)");

  // transform to plot coordinates
  std::vector<double> px, py;
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    if (loglog) {
      if (data.x[i] <= 0.0 || data.y[i] == 0.0) continue;
      px.push_back(std::log10(data.x[i]));
      py.push_back(std::log10(std::fabs(data.y[i])));
    } else {
      px.push_back(data.x[i]);
      py.push_back(data.y[i]);
    }
  }
  if (px.size() < 2) throw std::runtime_error("render_plot_svg: fewer than two plottable points");

  double xlo = px[0], xhi = px[0], ylo = py[0], yhi = py[0];
  for (std::size_t i = 1; i < px.size(); ++i) {
    xlo = std::min(xlo, px[i]);
    xhi = std::max(xhi, px[i]);
    ylo = std::min(ylo, py[i]);
    yhi = std::max(yhi, py[i]);
  }
  if (!loglog) {
    ylo = std::min(ylo, 0.0);  // keep the 0.05 rule line in frame
    yhi = std::max(yhi, 0.06);
  }
  if (xhi - xlo <= 0.0) xhi = xlo + 1.0;
  if (yhi - ylo <= 0.0) yhi = ylo + 1.0;

  // fixed viewport: 640x480 with a 64/24 px margin box
  const double W = 640.0, H = 480.0, ML = 64.0, MR = 24.0, MT = 24.0, MB = 48.0;
  const auto X = [&](double v) { return ML + (v - xlo) / (xhi - xlo) * (W - ML - MR); };
  const auto Y = [&](double v) { return H - MB - (v - ylo) / (yhi - ylo) * (H - MT - MB); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\" font-family=\"monospace\" font-size=\"12\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n";
  svg << "<rect x=\"" << fmt("%.2f", ML) << "\" y=\"" << fmt("%.2f", MT) << "\" width=\""
      << fmt("%.2f", W - ML - MR) << "\" height=\"" << fmt("%.2f", H - MT - MB)
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  // five ticks per axis
  for (int t = 0; t <= 4; ++t) {
    const double fx = xlo + (xhi - xlo) * t / 4.0;
    const double fy = ylo + (yhi - ylo) * t / 4.0;
    svg << "<text x=\"" << fmt("%.2f", X(fx)) << "\" y=\"" << fmt("%.2f", H - MB + 16.0)
        << "\" text-anchor=\"middle\">" << fmt("%.3g", fx) << "</text>\n";
    svg << "<text x=\"" << fmt("%.2f", ML - 6.0) << "\" y=\"" << fmt("%.2f", Y(fy) + 4.0)
        << "\" text-anchor=\"end\">" << fmt("%.3g", fy) << "</text>\n";
  }
  svg << "<text x=\"" << fmt("%.2f", (ML + W - MR) / 2.0) << "\" y=\"" << fmt("%.2f", H - 12.0)
      << "\" text-anchor=\"middle\">" << (loglog ? "log10 " : "") << data.x_name << "</text>\n";

  svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\" points=\"";
  for (std::size_t i = 0; i < px.size(); ++i)
    svg << fmt("%.2f", X(px[i])) << "," << fmt("%.2f", Y(py[i])) << (i + 1 < px.size() ? " " : "");
  svg << "\"/>\n";

  if (loglog) {
    // least-squares slope over the plotted points, drawn through the centroid
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < px.size(); ++i) {
      mx += px[i];
      my += py[i];
    }
    mx /= px.size();
    my /= py.size();
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < px.size(); ++i) {
      sxx += (px[i] - mx) * (px[i] - mx);
      sxy += (px[i] - mx) * (py[i] - my);
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    svg << "<line x1=\"" << fmt("%.2f", X(xlo)) << "\" y1=\"" << fmt("%.2f", Y(my + slope * (xlo - mx)))
        << "\" x2=\"" << fmt("%.2f", X(xhi)) << "\" y2=\"" << fmt("%.2f", Y(my + slope * (xhi - mx)))
        << "\" stroke=\"#d62728\" stroke-dasharray=\"6 3\"/>\n";
    svg << "<text x=\"" << fmt("%.2f", W - MR - 8.0) << "\" y=\"" << fmt("%.2f", MT + 18.0)
        << "\" text-anchor=\"end\" fill=\"#d62728\">slope=" << fmt("%.4f", slope) << "</text>\n";
  } else {
    svg << "<line x1=\"" << fmt("%.2f", X(xlo)) << "\" y1=\"" << fmt("%.2f", Y(0.05)) << "\" x2=\""
        << fmt("%.2f", X(xhi)) << "\" y2=\"" << fmt("%.2f", Y(0.05))
        << "\" stroke=\"#d62728\" stroke-dasharray=\"6 3\"/>\n";
    svg << "<text x=\"" << fmt("%.2f", W - MR - 8.0) << "\" y=\"" << fmt("%.2f", Y(0.05) - 6.0)
        << "\" text-anchor=\"end\" fill=\"#d62728\">0.05</text>\n";
  }
  svg << "</svg>\n";
  write_text_atomic(svg.str(), path);
}

}  // namespace qha
