#include "entail/data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

#include "entail/error.hpp"

namespace entail {

namespace {

bool is_terminal_punct(char c) {
  return c == '.' || c == ',' || c == '!' || c == '?' || c == ';';
}

}  // namespace

Tokens tokenize(const std::string& text) {
  Tokens out;
  std::string cur;
  auto flush = [&] {
    while (!cur.empty() && is_terminal_punct(cur.back())) cur.pop_back();
    if (!cur.empty()) out.push_back(cur);
    cur.clear();
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      cur.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  flush();
  if (out.empty())
    throw DataError("tokenize: no tokens survive in \"" + text + "\"");
  return out;
}

const char* label_name(Label l) {
  switch (l) {
    case Label::entailment: return "entailment";
    case Label::contradiction: return "contradiction";
    case Label::neutral: return "neutral";
  }
  throw ArgumentError("label_name: invalid label");
}

namespace {

/// Maps a gold label string; returns false for "-" (dropped), throws
/// DataError for anything else.
bool map_label(const std::string& s, Label& out) {
  if (s == "entailment") { out = Label::entailment; return true; }
  if (s == "contradiction") { out = Label::contradiction; return true; }
  if (s == "neutral") { out = Label::neutral; return true; }
  if (s == "-") return false;
  throw DataError("unknown gold label \"" + s + "\"");
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == '\t') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

struct TsvLayout {
  std::size_t gold = 0, sent1 = 0, sent2 = 0;
};

TsvLayout read_tsv_header(const std::string& line) {
  const auto cols = split_tabs(line);
  TsvLayout lay;
  bool g = false, s1 = false, s2 = false;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] == "gold_label") { lay.gold = i; g = true; }
    if (cols[i] == "sentence1") { lay.sent1 = i; s1 = true; }
    if (cols[i] == "sentence2") { lay.sent2 = i; s2 = true; }
  }
  if (!g || !s1 || !s2)
    throw DataError(
        "header is missing gold_label, sentence1 or sentence2 columns");
  return lay;
}

}  // namespace

std::vector<NliExample> parse_snli(std::istream& in, ParseStats& stats) {
  std::vector<NliExample> out;
  std::string line;
  std::size_t line_no = 0;
  bool have_layout = false;
  TsvLayout layout;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no;
    if (line.empty()) {
      ++stats.total;
      ++stats.malformed;
      stats.malformed_lines.push_back(line_no);
      continue;
    }

    if (line[0] != '{' && !have_layout) {
      // First non-JSON line of a tab-separated file is the header.
      layout = read_tsv_header(line);
      have_layout = true;
      continue;
    }

    ++stats.total;
    try {
      std::string gold, sent1, sent2;
      if (line[0] == '{') {
        const auto rec = nlohmann::json::parse(line);
        gold = rec.at("gold_label").get<std::string>();
        sent1 = rec.at("sentence1").get<std::string>();
        sent2 = rec.at("sentence2").get<std::string>();
      } else {
        const auto cols = split_tabs(line);
        const std::size_t need =
            std::max(layout.gold, std::max(layout.sent1, layout.sent2));
        if (cols.size() <= need)
          throw DataError("row has " + std::to_string(cols.size()) +
                          " columns");
        gold = cols[layout.gold];
        sent1 = cols[layout.sent1];
        sent2 = cols[layout.sent2];
      }

      Label label;
      if (!map_label(gold, label)) {
        ++stats.dropped;
        continue;
      }
      NliExample ex;
      ex.premise = tokenize(sent1);
      ex.hypothesis = tokenize(sent2);
      ex.label = label;
      out.push_back(std::move(ex));
      ++stats.retained;
    } catch (const std::exception&) {
      ++stats.malformed;
      stats.malformed_lines.push_back(line_no);
    }
  }
  return out;
}

std::vector<NliExample> parse_snli_file(const std::string& path,
                                        ParseStats& stats) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file " + path);
  return parse_snli(in, stats);
}

std::int32_t Vocab::lookup(const std::string& token) const {
  const auto it = index.find(token);
  return it == index.end() ? unk_index : it->second;
}

std::vector<std::int32_t> Vocab::lookup_all(const Tokens& toks) const {
  std::vector<std::int32_t> out;
  out.reserve(toks.size());
  for (const auto& t : toks) out.push_back(lookup(t));
  return out;
}

std::vector<std::string> collect_tokens(const std::vector<NliExample>& data) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  auto take = [&](const Tokens& toks) {
    for (const auto& t : toks)
      if (seen.insert(t).second) out.push_back(t);
  };
  for (const auto& ex : data) {
    take(ex.premise);
    take(ex.hypothesis);
  }
  return out;
}

Vocab load_embeddings(const std::string& path,
                      const std::vector<std::string>& corpus_tokens,
                      std::size_t dim, Rng& rng) {
  if (dim == 0) throw ArgumentError("load_embeddings: dim must be positive");

  Vocab v;
  v.dim = dim;
  v.tokens = {"<pad>", "<unk>"};
  v.index = {{"<pad>", 0}, {"<unk>", 1}};
  for (const auto& t : corpus_tokens) {
    if (v.index.count(t)) continue;
    v.index.emplace(t, std::int32_t(v.tokens.size()));
    v.tokens.push_back(t);
  }

  v.embeddings = Tensor2D(v.tokens.size(), dim);
  std::vector<bool> from_file(v.tokens.size(), false);
  from_file[Vocab::pad_index] = true;  // stays the zero vector

  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open embedding file " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string token;
      ss >> token;
      std::vector<real> vals;
      vals.reserve(dim);
      double x;
      while (ss >> x) vals.push_back(real(x));
      if (vals.size() != dim || !ss.eof())
        throw DataError("embedding file line " + std::to_string(line_no) +
                        " has " + std::to_string(vals.size()) + " values, want " +
                        std::to_string(dim));
      const auto it = v.index.find(token);
      if (it == v.index.end() || it->second == Vocab::pad_index) continue;
      const std::size_t r = std::size_t(it->second);
      for (std::size_t k = 0; k < dim; ++k) v.embeddings(r, k) = vals[k];
      from_file[r] = true;
    }
  }

  // Unseen rows, the unknown token included, get open-interval uniform
  // draws in index order so a fixed seed reproduces the table exactly.
  for (std::size_t r = 0; r < v.tokens.size(); ++r) {
    if (from_file[r]) continue;
    for (std::size_t k = 0; k < dim; ++k)
      v.embeddings(r, k) = rng.uniform_open(real(-0.05), real(0.05));
  }
  return v;
}

const char* strategy_name(InputStrategy s) {
  switch (s) {
    case InputStrategy::original: return "original";
    case InputStrategy::invert_premises: return "invert-premises";
    case InputStrategy::double_premises: return "double-premises";
    case InputStrategy::double_hypothesis: return "double-hypothesis";
    case InputStrategy::differentiate: return "differentiate";
  }
  throw ArgumentError("strategy_name: invalid strategy");
}

InputStrategy parse_strategy(const std::string& name) {
  for (InputStrategy s :
       {InputStrategy::original, InputStrategy::invert_premises,
        InputStrategy::double_premises, InputStrategy::double_hypothesis,
        InputStrategy::differentiate}) {
    if (name == strategy_name(s)) return s;
  }
  throw ArgumentError("unknown strategy \"" + name +
                      "\"; expected original, invert-premises, "
                      "double-premises, double-hypothesis or differentiate");
}

std::pair<Tokens, Tokens> differentiate_inputs(const Tokens& premise,
                                               const Tokens& hypothesis) {
  std::unordered_set<std::string> p_set(premise.begin(), premise.end());
  std::unordered_set<std::string> shared;
  for (const auto& t : hypothesis)
    if (p_set.count(t)) shared.insert(t);

  auto strip = [&shared](const Tokens& in) {
    Tokens out;
    for (const auto& t : in)
      if (!shared.count(t)) out.push_back(t);
    return out;
  };
  Tokens p2 = strip(premise);
  Tokens h2 = strip(hypothesis);
  if (p2.empty() || h2.empty()) return {premise, hypothesis};
  return {std::move(p2), std::move(h2)};
}

NliExample apply_input_strategy(const NliExample& ex, InputStrategy s) {
  NliExample out = ex;
  switch (s) {
    case InputStrategy::original:
      break;
    case InputStrategy::invert_premises:
      std::reverse(out.premise.begin(), out.premise.end());
      break;
    case InputStrategy::double_premises:
      out.premise.insert(out.premise.end(), ex.premise.begin(),
                         ex.premise.end());
      break;
    case InputStrategy::double_hypothesis:
      out.hypothesis.insert(out.hypothesis.end(), ex.hypothesis.begin(),
                            ex.hypothesis.end());
      break;
    case InputStrategy::differentiate: {
      auto pair = differentiate_inputs(ex.premise, ex.hypothesis);
      out.premise = std::move(pair.first);
      out.hypothesis = std::move(pair.second);
      break;
    }
  }
  return out;
}

namespace {

void pack_side(const std::vector<std::vector<std::int32_t>>& rows,
               IndexMatrix& mat, std::vector<std::int32_t>& lens) {
  std::size_t max_len = 1;
  for (const auto& r : rows) max_len = std::max(max_len, r.size());
  mat = IndexMatrix(rows.size(), max_len, Vocab::pad_index);
  lens.resize(rows.size());
  for (std::size_t b = 0; b < rows.size(); ++b) {
    lens[b] = std::int32_t(rows[b].size());
    for (std::size_t t = 0; t < rows[b].size(); ++t)
      mat.at(b, t) = rows[b][t];
  }
}

}  // namespace

std::vector<Batch> make_batches(const std::vector<NliExample>& data,
                                const Vocab& vocab, std::size_t batch_size,
                                Rng* rng, InputStrategy strategy) {
  if (data.empty()) throw ArgumentError("make_batches: no examples");
  if (batch_size == 0)
    throw ArgumentError("make_batches: batch size must be positive");

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (rng) rng->shuffle(order);

  std::vector<Batch> out;
  out.reserve((data.size() + batch_size - 1) / batch_size);
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, order.size() - start);
    std::vector<std::vector<std::int32_t>> prem(n), hyp(n);
    Batch b;
    b.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const NliExample ex =
          apply_input_strategy(data[order[start + i]], strategy);
      prem[i] = vocab.lookup_all(ex.premise);
      hyp[i] = vocab.lookup_all(ex.hypothesis);
      b.labels[i] = std::int32_t(ex.label);
    }
    pack_side(prem, b.premise, b.premise_len);
    pack_side(hyp, b.hypothesis, b.hypothesis_len);
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace entail
