#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "entail/index_matrix.hpp"
#include "entail/rng.hpp"
#include "entail/tensor.hpp"

namespace entail {

using Tokens = std::vector<std::string>;

/// One premise/hypothesis pair with its gold label.  Token sequences are
/// non-empty after preprocessing.
struct NliExample {
  Tokens premise;
  Tokens hypothesis;
  Label label = Label::neutral;
};

/// Lowercases, splits on whitespace, and strips terminal punctuation
/// (. , ! ? ;) from each token.  Throws DataError when nothing survives.
Tokens tokenize(const std::string& text);

const char* label_name(Label l);

/// Counters from one parse run.  Lines holding a record whose gold label is
/// "-" (no annotator consensus) are dropped; records that cannot be decoded
/// are counted as malformed with their line numbers.  Always
/// total == retained + dropped + malformed.
struct ParseStats {
  std::size_t total = 0;
  std::size_t retained = 0;
  std::size_t dropped = 0;
  std::size_t malformed = 0;
  std::vector<std::size_t> malformed_lines;
};

/// Reads line-delimited SNLI records carrying gold_label, sentence1 and
/// sentence2.  Both distribution layouts are accepted: JSON records (lines
/// starting with '{') and tab-separated rows under a header line naming the
/// columns.
std::vector<NliExample> parse_snli(std::istream& in, ParseStats& stats);

/// File variant; throws IoError when the path cannot be opened.
std::vector<NliExample> parse_snli_file(const std::string& path,
                                        ParseStats& stats);

/// Token index map plus the frozen embedding table.  Index 0 is the padding
/// token (all-zero row, never part of any gradient); index 1 is the unknown
/// token covering words first seen at inference time.
struct Vocab {
  std::vector<std::string> tokens;
  std::unordered_map<std::string, std::int32_t> index;
  Tensor2D embeddings;  // V x dim
  std::size_t dim = 0;

  static constexpr std::int32_t pad_index = 0;
  static constexpr std::int32_t unk_index = 1;

  std::size_t size() const { return tokens.size(); }
  std::int32_t lookup(const std::string& token) const;
  std::vector<std::int32_t> lookup_all(const Tokens& toks) const;
};

/// Collects the distinct tokens of both sentence slots in first-appearance
/// order, the deterministic basis for vocabulary indices.
std::vector<std::string> collect_tokens(const std::vector<NliExample>& data);

/// Builds the vocabulary over `corpus_tokens` with `dim`-wide embeddings.
/// Tokens found in the vector file get the file's values; everything else
/// (including the unknown token) is drawn uniformly from the open interval
/// (-0.05, 0.05), in index order so a fixed seed gives identical tables.
/// An empty path skips the file and initializes every row from the rng.
/// File lines must hold a token plus exactly `dim` values; anything else is
/// a DataError naming the line.
Vocab load_embeddings(const std::string& path,
                      const std::vector<std::string>& corpus_tokens,
                      std::size_t dim, Rng& rng);

/// Input transformations applied to each pair before batching.
enum class InputStrategy {
  original,
  invert_premises,
  double_premises,
  double_hypothesis,
  differentiate,
};

const char* strategy_name(InputStrategy s);
/// Throws ArgumentError on an unknown name.
InputStrategy parse_strategy(const std::string& name);

/// Removes every token the two sentences share (case-insensitive exact
/// match, all occurrences) from both; if either side would come out empty,
/// both fall back to the originals.
std::pair<Tokens, Tokens> differentiate_inputs(const Tokens& premise,
                                               const Tokens& hypothesis);

NliExample apply_input_strategy(const NliExample& ex, InputStrategy s);

/// Padded, masked, index-mapped batch.  Rows beyond a sequence's length
/// hold the pad index.
struct Batch {
  IndexMatrix premise;  // B x max premise length
  std::vector<std::int32_t> premise_len;
  IndexMatrix hypothesis;  // B x max hypothesis length
  std::vector<std::int32_t> hypothesis_len;
  std::vector<std::int32_t> labels;  // B

  std::size_t size() const { return labels.size(); }
};

/// Applies the strategy to every example, shuffles under the rng (a null
/// rng keeps the input order, the evaluation path), and packs consecutive
/// runs of `batch_size` (the final batch may be short).
std::vector<Batch> make_batches(const std::vector<NliExample>& data,
                                const Vocab& vocab, std::size_t batch_size,
                                Rng* rng, InputStrategy strategy);

}  // namespace entail
