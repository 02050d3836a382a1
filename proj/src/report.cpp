#include "cocache/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace cocache {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// Rounds the data range outward to "nice" tick steps.
std::pair<double, double> nice_range(double lo, double hi, double& step) {
  if (!(hi > lo)) {
    const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    lo -= pad;
    hi += pad;
  }
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double frac = raw / mag;
  step = (frac < 1.5 ? 1.0 : frac < 3.0 ? 2.0 : frac < 7.0 ? 5.0 : 10.0) * mag;
  return {std::floor(lo / step) * step, std::ceil(hi / step) * step};
}

}  // namespace

std::string render_svg(const PlotSpec& plot) {
  const double W = 720, H = 440, left = 80, right = 200, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;

  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : plot.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  double xstep = 0, ystep = 0;
  std::tie(xmin, xmax) = nice_range(xmin, xmax, xstep);
  std::tie(ymin, ymax) = nice_range(ymin, ymax, ystep);
  auto X = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto Y = [&](double y) { return top + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(plot.title)
    << "</text>\n";
  for (double t = xmin; t <= xmax + xstep * 1e-6; t += xstep) {
    o << "<line x1=\"" << X(t) << "\" y1=\"" << top << "\" x2=\"" << X(t) << "\" y2=\"" << top + ph
      << "\" stroke=\"#eee\"/>\n";
    o << "<text x=\"" << X(t) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
  }
  for (double t = ymin; t <= ymax + ystep * 1e-6; t += ystep) {
    o << "<line x1=\"" << left << "\" y1=\"" << Y(t) << "\" x2=\"" << left + pw << "\" y2=\"" << Y(t)
      << "\" stroke=\"#eee\"/>\n";
    o << "<text x=\"" << left - 6 << "\" y=\"" << Y(t) + 4 << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
  }
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"#333\"/>\n";
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\">" << escape(plot.x_label)
    << "</text>\n";
  o << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(plot.y_label) << "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::ostringstream pts;
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (std::isfinite(s.y[i])) pts << X(s.x[i]) << ',' << Y(s.y[i]) << ' ';
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << pts.str() << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (std::isfinite(s.y[i]))
        o << "<circle cx=\"" << X(s.x[i]) << "\" cy=\"" << Y(s.y[i]) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    const double ly = top + 14 + 18 * double(k);
    o << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 32 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly + 4 << "\">" << escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_svg(const PlotSpec& plot, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << render_svg(plot);
}

PlotSpec hit_vs_cache_plot(const Comparison& cmp, std::optional<std::size_t> sbs) {
  PlotSpec p;
  p.title = sbs ? "Average hit at sBS " + std::to_string(*sbs) : "Average hit summed over sBSs";
  p.x_label = "cache size (fraction of catalog)";
  p.y_label = "average hit per slot";
  std::map<std::string, std::size_t> index;
  for (const auto& r : cmp.rows) {
    if (r.sbs != sbs) continue;
    const std::string name = policy_name(r.policy);
    if (!index.count(name)) {
      index[name] = p.series.size();
      p.series.push_back({name, {}, {}});
    }
    auto& s = p.series[index[name]];
    if (std::find(s.x.begin(), s.x.end(), r.cache_frac) != s.x.end()) continue;  // duplicate policy entry
    s.x.push_back(r.cache_frac);
    s.y.push_back(r.avg_hit);
  }
  return p;
}

PlotSpec log_ratio_plot(const Comparison& cmp) {
  PlotSpec p;
  p.title = "log(" + policy_name(cmp.reference) + " / policy), summed hit";
  p.x_label = "cache size (fraction of catalog)";
  p.y_label = "log ratio";
  std::map<std::string, std::size_t> index;
  for (const auto& r : cmp.rows) {
    if (r.sbs) continue;
    const std::string name = policy_name(r.policy);
    if (!index.count(name)) {
      index[name] = p.series.size();
      p.series.push_back({name, {}, {}});
    }
    auto& s = p.series[index[name]];
    if (std::find(s.x.begin(), s.x.end(), r.cache_frac) != s.x.end()) continue;
    s.x.push_back(r.cache_frac);
    s.y.push_back(r.log_ratio);
  }
  return p;
}

PlotSpec lambda_plot(const std::vector<LambdaSweepRow>& rows) {
  PlotSpec p;
  p.title = "Federated policy: average hit versus lambda";
  p.x_label = "lambda";
  p.y_label = "average hit per slot (summed)";
  std::map<double, std::size_t> index;
  for (const auto& r : rows) {
    if (!index.count(r.cache_frac)) {
      index[r.cache_frac] = p.series.size();
      p.series.push_back({"cache " + num(r.cache_frac), {}, {}});
    }
    auto& s = p.series[index[r.cache_frac]];
    s.x.push_back(r.lambda);
    s.y.push_back(r.avg_hit);
  }
  return p;
}

}  // namespace cocache
