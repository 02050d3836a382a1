#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cocache/catalog.hpp"
#include "cocache/sim.hpp"

namespace cocache {

struct Series {
  std::string name;
  Vec x;
  Vec y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

/// Renders a line chart with markers as a standalone SVG document.
std::string render_svg(const PlotSpec& plot);
void write_svg(const PlotSpec& plot, const std::filesystem::path& path);

/// Average hit versus cache fraction, one series per policy. `sbs` empty
/// selects the summed rows.
PlotSpec hit_vs_cache_plot(const Comparison& cmp, std::optional<std::size_t> sbs);
/// log(reference / policy) of the summed hit versus cache fraction.
PlotSpec log_ratio_plot(const Comparison& cmp);
/// Federated average hit versus lambda, one series per cache fraction.
PlotSpec lambda_plot(const std::vector<LambdaSweepRow>& rows);

}  // namespace cocache
