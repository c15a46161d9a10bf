#include "entail/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "entail/error.hpp"

namespace entail {

std::vector<real> heat_intensities(const std::vector<real>& weights) {
  if (weights.empty())
    throw ArgumentError("heat_intensities: no weights");
  const auto [lo_it, hi_it] =
      std::minmax_element(weights.begin(), weights.end());
  const real lo = *lo_it, hi = *hi_it;
  std::vector<real> out(weights.size());
  if (hi - lo <= 0) {
    std::fill(out.begin(), out.end(), real(0.5));
    return out;
  }
  for (std::size_t i = 0; i < weights.size(); ++i)
    out[i] = (weights[i] - lo) / (hi - lo);
  return out;
}

namespace {

const char* shade_for(real intensity) {
  static const char* ramp[] = {"  ", "░░", "▒▒", "▓▓", "██"};
  int idx = int(intensity * 5);
  idx = std::clamp(idx, 0, 4);
  return ramp[idx];
}

std::string html_escape(const std::string& s) {
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

}  // namespace

std::string render_text(const SentenceHeatmap& sentence) {
  std::vector<real> w;
  w.reserve(sentence.tokens.size());
  for (const auto& t : sentence.tokens) w.push_back(t.weight);
  const auto intensities = heat_intensities(w);

  std::size_t width = 0;
  for (const auto& t : sentence.tokens)
    width = std::max(width, t.token.size());

  std::ostringstream out;
  out << sentence.title << "\n";
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "  weight=%.4f  intensity=%.2f",
                  double(sentence.tokens[i].weight), double(intensities[i]));
    out << "  " << shade_for(intensities[i]) << " "
        << sentence.tokens[i].token
        << std::string(width - sentence.tokens[i].token.size(), ' ') << buf
        << "\n";
  }
  return out.str();
}

std::string render_html(const std::vector<SentenceHeatmap>& sentences,
                        const std::string& heading) {
  std::ostringstream out;
  out << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
      << "<title>" << html_escape(heading) << "</title>\n"
      << "<style>\n"
      << "body { font-family: sans-serif; margin: 2em; }\n"
      << ".sentence { margin-bottom: 1.5em; }\n"
      << ".tokens { line-height: 2.2; }\n"
      << ".tok { padding: 0.2em 0.35em; margin: 0 0.1em; border-radius: 3px; "
         "white-space: nowrap; }\n"
      << "</style>\n</head>\n<body>\n"
      << "<h1>" << html_escape(heading) << "</h1>\n";
  for (const auto& s : sentences) {
    std::vector<real> w;
    w.reserve(s.tokens.size());
    for (const auto& t : s.tokens) w.push_back(t.weight);
    const auto intensities = heat_intensities(w);
    out << "<div class=\"sentence\">\n<h2>" << html_escape(s.title)
        << "</h2>\n<p class=\"tokens\">\n";
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      char style[96];
      std::snprintf(style, sizeof(style),
                    "background-color: rgba(230, 90, 40, %.3f);",
                    double(intensities[i]));
      char title[64];
      std::snprintf(title, sizeof(title), "weight %.4f",
                    double(s.tokens[i].weight));
      out << "<span class=\"tok\" style=\"" << style << "\" title=\"" << title
          << "\">" << html_escape(s.tokens[i].token) << "</span>\n";
    }
    out << "</p>\n</div>\n";
  }
  out << "</body>\n</html>\n";
  return out.str();
}

}  // namespace entail
