#pragma once

#include <string>
#include <vector>

#include "entail/tensor.hpp"

namespace entail {

struct TokenWeight {
  std::string token;
  real weight = 0;
};

struct SentenceHeatmap {
  std::string title;
  std::vector<TokenWeight> tokens;
};

/// Min-max normalization of one sentence's weights into [0,1].  Each
/// sentence is scaled on its own, so the hottest token is always full
/// intensity regardless of the other sentence.  When every weight is equal
/// (single token, or a uniform distribution) all intensities are 0.5.
std::vector<real> heat_intensities(const std::vector<real>& weights);

/// Terminal rendering: one line per token with a discrete shade ramp, the
/// raw weight, and the normalized intensity.
std::string render_text(const SentenceHeatmap& sentence);

/// Standalone HTML document (no external assets) rendering each sentence as
/// a row of tokens whose background opacity follows the intensity.
std::string render_html(const std::vector<SentenceHeatmap>& sentences,
                        const std::string& heading);

}  // namespace entail
