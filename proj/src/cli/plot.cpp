#include "lor/cli/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "lor/error.hpp"

namespace lor::cli {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 160, kTop = 40, kBottom = 50;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                "#17becf", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

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

void header(std::ostringstream& o, double w, double h) {
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
    << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\" font-family=\"sans-serif\" "
    << "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

// Blue-white-red for signed data, white-to-dark for magnitudes.
std::string colour(double t, bool diverging) {
  t = std::clamp(t, 0.0, 1.0);
  int r, g, b;
  if (diverging) {
    if (t < 0.5) {
      const double s = t / 0.5;
      r = static_cast<int>(40 + 215 * s);
      g = static_cast<int>(80 + 175 * s);
      b = 255;
    } else {
      const double s = (t - 0.5) / 0.5;
      r = 255;
      g = static_cast<int>(255 - 200 * s);
      b = static_cast<int>(255 - 215 * s);
    }
  } else {
    r = static_cast<int>(255 * (1.0 - t));
    g = static_cast<int>(255 * (1.0 - 0.8 * t));
    b = static_cast<int>(255 * (1.0 - 0.45 * t));
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string render_line_plot(const LinePlot& plot) {
  double x0 = HUGE_VAL, x1 = -HUGE_VAL, y0 = HUGE_VAL, y1 = -HUGE_VAL;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream o;
  header(o, kWidth, kHeight);
  o << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(plot.title) << "</text>\n";
  o << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw)
    << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    o << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(kTop + ph + 16)
      << "\" text-anchor=\"middle\">" << tick(xv) << "</text>\n";
    o << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(yv) + 4)
      << "\" text-anchor=\"end\">" << tick(yv) << "</text>\n";
  }
  o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 10)
    << "\" text-anchor=\"middle\">" << escape(plot.xlabel) << "</text>\n";
  o << "<text x=\"16\" y=\"" << num(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << num(kTop + ph / 2) << ")\">" << escape(plot.ylabel) << "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* c = kPalette[k % std::size(kPalette)];
    o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      o << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
    }
    o << "\"/>\n";
    const double ly = kTop + 14 + 16.0 * static_cast<double>(k);
    o << "<line x1=\"" << num(kLeft + pw + 10) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
      << num(kLeft + pw + 28) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << c
      << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << num(kLeft + pw + 32) << "\" y=\"" << num(ly) << "\">" << escape(s.label)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string render_heatmap(const Heatmap& map) {
  if (map.values.size() != map.rows * map.cols || map.rows == 0) {
    throw Error(ErrorKind::InvalidArgument, "heatmap size mismatch");
  }
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  for (double v : map.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (map.diverging) {
    const double a = std::max({std::abs(lo), std::abs(hi), 1e-300});
    lo = -a;
    hi = a;
  } else if (hi - lo < 1e-300) {
    hi = lo + 1.0;
  }
  const double side = 400.0;
  const double cw = side / static_cast<double>(map.cols), ch = side / static_cast<double>(map.rows);
  std::ostringstream o;
  header(o, side + 140, side + 60);
  o << "<text x=\"" << num(side / 2 + 20) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(map.title) << "</text>\n";
  for (std::size_t r = 0; r < map.rows; ++r) {
    for (std::size_t c = 0; c < map.cols; ++c) {
      const double t = (map.values[r * map.cols + c] - lo) / (hi - lo);
      o << "<rect x=\"" << num(20 + c * cw) << "\" y=\"" << num(40 + r * ch) << "\" width=\""
        << num(cw + 0.05) << "\" height=\"" << num(ch + 0.05) << "\" fill=\""
        << colour(t, map.diverging) << "\"/>\n";
    }
  }
  for (int k = 0; k <= 10; ++k) {
    const double t = 1.0 - k / 10.0;
    o << "<rect x=\"" << num(side + 40) << "\" y=\"" << num(40 + k * side / 11) << "\" width=\"20\" height=\""
      << num(side / 11 + 0.5) << "\" fill=\"" << colour(t, map.diverging) << "\"/>\n";
  }
  o << "<text x=\"" << num(side + 66) << "\" y=\"52\">" << tick(hi) << "</text>\n";
  o << "<text x=\"" << num(side + 66) << "\" y=\"" << num(40 + side) << "\">" << tick(lo)
    << "</text>\n";
  o << "</svg>\n";
  return o.str();
}

Heatmap heatmap_from_csv(const CsvTable& table, const std::string& title) {
  Heatmap h;
  h.title = title;
  h.rows = table.rows.size();
  h.cols = h.rows == 0 ? 0 : table.rows.front().size();
  if (h.rows == 0 || h.cols == 0) throw Error(ErrorKind::MalformedCsv, "empty histogram CSV");
  for (std::size_t r = 0; r < h.rows; ++r) {
    for (std::size_t c = 0; c < h.cols; ++c) h.values.push_back(table.number(r, c));
  }
  h.diverging = std::any_of(h.values.begin(), h.values.end(), [](double v) { return v < 0.0; });
  return h;
}

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + p.string());
  out << text;
}

std::string column_text(const CsvTable& t, std::size_t row, const std::string& name) {
  const auto c = t.column(name);
  if (c < 0) throw Error(ErrorKind::MalformedCsv, "missing column '" + name + "'");
  return t.rows[row][static_cast<std::size_t>(c)];
}

}  // namespace

std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& csv,
                                              const std::filesystem::path& out_dir) {
  std::ifstream probe(csv, std::ios::binary);
  if (!probe) throw Error(ErrorKind::Io, "cannot open " + csv.string());
  // Histogram dumps carry no header row; peek at the metadata first.
  const CsvTable meta_only = read_csv(probe, false);
  const auto experiment = meta_only.meta_value("experiment");
  const std::string stem = csv.stem().string();
  std::vector<std::filesystem::path> written;

  if (!experiment) {
    if (!meta_only.meta_value("M")) {
      throw Error(ErrorKind::MalformedCsv, csv.string() + ": no experiment or histogram metadata");
    }
    const auto p = out_dir / (stem + ".svg");
    write_text(p, render_heatmap(heatmap_from_csv(meta_only, stem)));
    written.push_back(p);
    return written;
  }

  const CsvTable t = read_csv_file(csv, true);
  if (*experiment == "asymmetry" && t.column("mean_abs_asymmetry") >= 0) {
    // One line per (estimator, sigma): mean |asymmetry| against alpha.
    std::map<std::pair<std::string, double>, Series> lines;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const std::string est = column_text(t, r, "estimator");
      const double sigma = t.number(r, "sigma");
      auto& s = lines[{est, sigma}];
      s.label = est + " sigma=" + tick(sigma);
      const double alpha = t.number(r, "alpha");
      s.x.push_back(std::isfinite(alpha) ? alpha : 0.0);
      s.y.push_back(t.number(r, "mean_abs_asymmetry"));
    }
    LinePlot plot{"optimum offset asymmetry", "alpha (voxels)", "mean |offset difference| (voxels)", {}};
    for (auto& [key, s] : lines) plot.series.push_back(std::move(s));
    const auto p = out_dir / (stem + ".svg");
    write_text(p, render_line_plot(plot));
    written.push_back(p);
  } else if (*experiment == "asymmetry") {
    // Per-pair rows: asymmetry against alpha for each (estimator, sigma, pair).
    std::map<std::tuple<std::string, double, double>, Series> lines;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const std::string est = column_text(t, r, "estimator");
      const double sigma = t.number(r, "sigma"), pair = t.number(r, "pair");
      auto& s = lines[{est, sigma, pair}];
      s.label = est + " s=" + tick(sigma) + " #" + tick(pair);
      const double alpha = t.number(r, "alpha");
      s.x.push_back(std::isfinite(alpha) ? alpha : 0.0);
      s.y.push_back(t.number(r, "asymmetry"));
    }
    LinePlot plot{"optimum offset asymmetry per pair", "alpha (voxels)", "offset difference (voxels)", {}};
    for (auto& [key, s] : lines) plot.series.push_back(std::move(s));
    const auto p = out_dir / (stem + ".svg");
    write_text(p, render_line_plot(plot));
    written.push_back(p);
  } else if (*experiment == "scales" && t.column("offset") >= 0) {
    // One figure per estimator, one curve per scale triple.
    std::map<std::string, std::map<std::tuple<double, double, double>, Series>> figs;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const std::string est = column_text(t, r, "estimator");
      const double s = t.number(r, "sigma"), b = t.number(r, "beta"), a = t.number(r, "alpha");
      auto& line = figs[est][{s, b, a}];
      line.label = "s=" + tick(s) + (est == "pw" ? " b=" + tick(b) : " a=" + tick(a));
      line.x.push_back(t.number(r, "offset"));
      line.y.push_back(t.number(r, "value"));
    }
    for (auto& [est, lines] : figs) {
      LinePlot plot{est + " measure along the sweep", "offset (voxels)", "measure", {}};
      for (auto& [key, s] : lines) plot.series.push_back(std::move(s));
      const auto p = out_dir / (stem + "_" + est + ".svg");
      write_text(p, render_line_plot(plot));
      written.push_back(p);
    }
  } else {
    throw Error(ErrorKind::MalformedCsv,
                csv.string() + ": no plot defined for experiment '" + *experiment + "'");
  }
  return written;
}

}  // namespace lor::cli
