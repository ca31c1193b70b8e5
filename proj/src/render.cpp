// Copyright 2026 The langclust Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "langclust/render.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "langclust/error.hpp"

namespace langclust {
namespace {

constexpr const char* kAboveCut = "#808080";
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#393b79"};

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string escape_xml(const std::string& s) {
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

// Color per node id: the cluster color when all leaves below share one
// cluster, gray otherwise.
std::vector<std::string> node_colors(const Dendrogram& d, std::optional<std::size_t> cut_k) {
  const std::size_t n = d.leaves();
  std::vector<std::string> colors(2 * n - 1, "#000000");
  if (!cut_k) return colors;
  const auto cut = cut_dendrogram(d, *cut_k);
  std::vector<long> cluster(2 * n - 1, -1);
  for (std::size_t i = 0; i < n; ++i) cluster[i] = static_cast<long>(cut.cluster[i]);
  for (const auto& m : d.merges) {
    cluster[m.node] = cluster[m.a] == cluster[m.b] ? cluster[m.a] : -1;
  }
  const std::size_t palette = sizeof(kPalette) / sizeof(kPalette[0]);
  for (std::size_t i = 0; i < 2 * n - 1; ++i) {
    colors[i] = cluster[i] < 0 ? kAboveCut : kPalette[static_cast<std::size_t>(cluster[i]) % palette];
  }
  return colors;
}

std::string render_dot(const Dendrogram& d, const std::vector<std::string>& colors) {
  const std::size_t n = d.leaves();
  std::ostringstream out;
  out << "digraph dendrogram {\n  rankdir=BT;\n  node [fontname=\"Helvetica\"];\n";
  for (std::size_t i = 0; i < n; ++i) {
    out << "  n" << i << " [label=\"" << d.labels[i] << "\", shape=box, color=\"" << colors[i]
        << "\", fontcolor=\"" << colors[i] << "\"];\n";
  }
  for (const auto& m : d.merges) {
    out << "  n" << m.node << " [label=\"" << fixed(m.height, 4) << "\", shape=ellipse, color=\""
        << colors[m.node] << "\"];\n";
    out << "  n" << m.a << " -> n" << m.node << " [color=\"" << colors[m.node] << "\"];\n";
    out << "  n" << m.b << " -> n" << m.node << " [color=\"" << colors[m.node] << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

std::string render_svg(const Dendrogram& d, const std::vector<std::string>& colors) {
  const std::size_t n = d.leaves();
  const double left = 60.0, top = 20.0, spacing = 40.0, plot_h = 300.0, label_h = 40.0;
  const double width = left + spacing * static_cast<double>(n) + 20.0;
  const double height = top + plot_h + label_h;
  double h_max = 0.0;
  for (const auto& m : d.merges) h_max = std::max(h_max, m.height);
  if (h_max <= 0.0) h_max = 1.0;
  auto y_of = [&](double h) { return top + plot_h * (1.0 - h / h_max); };

  std::vector<double> x(2 * n - 1, 0.0), y(2 * n - 1, y_of(0.0));
  const auto order = leaf_order(d);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    x[order[pos]] = left + spacing * (static_cast<double>(pos) + 0.5);
  }
  for (const auto& m : d.merges) {
    x[m.node] = 0.5 * (x[m.a] + x[m.b]);
    y[m.node] = y_of(m.height);
  }

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width, 0) << "\" height=\""
      << fixed(height, 0) << "\" font-family=\"Helvetica\" font-size=\"12\">\n";
  // Height axis with five ticks.
  out << "  <line x1=\"" << fixed(left - 10) << "\" y1=\"" << fixed(top) << "\" x2=\""
      << fixed(left - 10) << "\" y2=\"" << fixed(top + plot_h) << "\" stroke=\"#000000\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double h = h_max * t / 4.0;
    out << "  <text x=\"" << fixed(left - 14) << "\" y=\"" << fixed(y_of(h) + 4)
        << "\" text-anchor=\"end\">" << fixed(h, 3) << "</text>\n";
  }
  for (const auto& m : d.merges) {
    const std::string& c = colors[m.node];
    out << "  <polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\""
        << fixed(x[m.a]) << "," << fixed(y[m.a]) << " " << fixed(x[m.a]) << "," << fixed(y[m.node])
        << " " << fixed(x[m.b]) << "," << fixed(y[m.node]) << " " << fixed(x[m.b]) << ","
        << fixed(y[m.b]) << "\"/>\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    out << "  <text x=\"" << fixed(x[i]) << "\" y=\"" << fixed(top + plot_h + 18)
        << "\" text-anchor=\"middle\" fill=\"" << colors[i] << "\">" << escape_xml(d.labels[i])
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace

DendrogramFormat parse_dendrogram_format(std::string_view text) {
  if (text == "json") return DendrogramFormat::kJson;
  if (text == "dot") return DendrogramFormat::kDot;
  if (text == "svg") return DendrogramFormat::kSvg;
  fail(ErrorKind::kInput, "unknown dendrogram format '" + std::string(text) + "' (json, dot, svg)");
}

std::vector<std::size_t> leaf_order(const Dendrogram& d) {
  d.validate();
  const std::size_t n = d.leaves();
  std::vector<std::size_t> order;
  if (n == 1) return {0};
  std::vector<std::size_t> stack{2 * n - 2};
  while (!stack.empty()) {
    const std::size_t node = stack.back();
    stack.pop_back();
    if (node < n) {
      order.push_back(node);
      continue;
    }
    const auto& m = d.merges[node - n];
    stack.push_back(m.b);
    stack.push_back(m.a);
  }
  return order;
}

std::string render_dendrogram(const Dendrogram& d, DendrogramFormat format,
                              std::optional<std::size_t> cut_k) {
  d.validate();
  switch (format) {
    case DendrogramFormat::kJson: return dendrogram_to_json(d) + "\n";
    case DendrogramFormat::kDot: return render_dot(d, node_colors(d, cut_k));
    case DendrogramFormat::kSvg: return render_svg(d, node_colors(d, cut_k));
  }
  fail(ErrorKind::kInput, "unknown dendrogram format");
}

}  // namespace langclust
