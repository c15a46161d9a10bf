#include "entail/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"

#include "entail/error.hpp"

namespace entail {

namespace {

constexpr char magic[8] = {'E', 'N', 'T', 'A', 'I', 'L', 'C', 'K'};

std::uint32_t crc_table_entry(std::uint32_t i) {
  std::uint32_t c = i;
  for (int k = 0; k < 8; ++k)
    c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : (c >> 1);
  return c;
}

const std::uint32_t* crc_table() {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) t[i] = crc_table_entry(i);
    return t;
  }();
  return table.data();
}

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    T out;
    auto* s = reinterpret_cast<const unsigned char*>(&v);
    auto* d = reinterpret_cast<unsigned char*>(&out);
    for (std::size_t i = 0; i < sizeof(T); ++i) d[i] = s[sizeof(T) - 1 - i];
    return out;
  }
  return v;
}

/// Buffers the whole file so the trailing checksum can cover every byte.
struct Writer {
  std::vector<char> buf;

  void bytes(const void* p, std::size_t n) {
    const char* c = static_cast<const char*>(p);
    buf.insert(buf.end(), c, c + n);
  }
  void u32(std::uint32_t v) {
    v = to_little(v);
    bytes(&v, sizeof(v));
  }
  void u64(std::uint64_t v) {
    v = to_little(v);
    bytes(&v, sizeof(v));
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  void tensor(const Tensor2D& t) {
    u64(t.rows());
    u64(t.cols());
    std::vector<double> vals(t.raw().begin(), t.raw().end());
    for (double& d : vals) d = to_little(d);
    const std::size_t n = vals.size() * sizeof(double);
    u32(crc32(vals.data(), n));
    bytes(vals.data(), n);
  }
};

struct Reader {
  std::vector<char> buf;
  std::size_t pos = 0;

  void bytes(void* p, std::size_t n) {
    if (pos + n > buf.size())
      throw IntegrityError("checkpoint truncated at byte " +
                           std::to_string(pos));
    std::memcpy(p, buf.data() + pos, n);
    pos += n;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, sizeof(v));
    return to_little(v);
  }
  std::uint64_t u64() {
    std::uint64_t v;
    bytes(&v, sizeof(v));
    return to_little(v);
  }
  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
  }
  std::string str() {
    const std::uint64_t n = u64();
    if (pos + n > buf.size())
      throw IntegrityError("checkpoint truncated inside a string");
    std::string s(buf.data() + pos, n);
    pos += n;
    return s;
  }
  Tensor2D tensor(const std::string& what) {
    const std::uint64_t rows = u64();
    const std::uint64_t cols = u64();
    if (rows == 0 || cols == 0 || rows > (1ull << 32) || cols > (1ull << 32))
      throw IntegrityError("checkpoint tensor " + what +
                           " has implausible shape");
    const std::uint32_t want = u32();
    std::vector<double> vals(rows * cols);
    bytes(vals.data(), vals.size() * sizeof(double));
    if (crc32(vals.data(), vals.size() * sizeof(double)) != want)
      throw IntegrityError("checksum mismatch in tensor " + what);
    std::vector<real> out(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i)
      out[i] = real(to_little(vals[i]));
    return Tensor2D(rows, cols, std::move(out));
  }
};

nlohmann::json meta_to_json(const CheckpointMeta& meta) {
  nlohmann::json j;
  j["attention"] = meta.config.attention;
  j["dropout"] = meta.config.dropout;
  j["embed_dim"] = meta.config.embed_dim;
  j["epoch"] = meta.epoch;
  j["hidden_dim"] = meta.config.hidden_dim;
  j["proj_dim"] = meta.config.proj_dim;
  j["seed"] = meta.config.seed;
  j["step"] = meta.step;
  j["strategy"] = strategy_name(meta.strategy);
  return j;
}

CheckpointMeta meta_from_json(const nlohmann::json& j) {
  CheckpointMeta meta;
  meta.config.attention = j.at("attention").get<bool>();
  meta.config.dropout = j.at("dropout").get<real>();
  meta.config.embed_dim = j.at("embed_dim").get<std::size_t>();
  meta.config.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  meta.config.proj_dim = j.at("proj_dim").get<std::size_t>();
  meta.config.seed = j.at("seed").get<std::uint64_t>();
  meta.epoch = j.at("epoch").get<std::uint64_t>();
  meta.step = j.at("step").get<std::uint64_t>();
  meta.strategy = parse_strategy(j.at("strategy").get<std::string>());
  return meta;
}

}  // namespace

std::uint32_t crc32(const void* data, std::size_t len, std::uint32_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  const std::uint32_t* table = crc_table();
  std::uint32_t c = seed ^ 0xFFFFFFFFu;
  for (std::size_t i = 0; i < len; ++i)
    c = table[(c ^ p[i]) & 0xFFu] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

void save_checkpoint(const std::string& path, const SiameseModel& model,
                     const CheckpointMeta& meta, const Rmsprop* optimizer,
                     const RngStates& rng_states) {
  Writer w;
  w.bytes(magic, sizeof(magic));
  w.u32(checkpoint_version);
  w.str(meta_to_json(meta).dump());

  const Vocab& vocab = model.vocab();
  w.u64(vocab.tokens.size());
  for (const auto& t : vocab.tokens) w.str(t);

  const ParameterStore& store = model.params();
  w.u64(store.count());
  for (std::size_t i = 0; i < store.count(); ++i) {
    const Parameter& p = store.at(i);
    w.str(p.name);
    w.u8(p.trainable ? 1 : 0);
    w.tensor(p.value);
  }

  if (optimizer && !optimizer->state().empty()) {
    w.u8(1);
    // Store order keeps the bytes deterministic.
    std::uint64_t n = 0;
    for (std::size_t i = 0; i < store.count(); ++i)
      if (optimizer->state().count(store.at(i).name)) ++n;
    w.u64(n);
    for (std::size_t i = 0; i < store.count(); ++i) {
      const auto it = optimizer->state().find(store.at(i).name);
      if (it == optimizer->state().end()) continue;
      w.str(it->first);
      w.tensor(it->second);
    }
  } else {
    w.u8(0);
  }

  w.u64(rng_states.size());
  for (const auto& [name, state] : rng_states) {
    w.str(name);
    w.str(state);
  }

  w.u32(crc32(w.buf.data(), w.buf.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path);
  out.write(w.buf.data(), std::streamsize(w.buf.size()));
  if (!out) throw IoError("short write to checkpoint " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  Reader r;
  r.buf.assign(std::istreambuf_iterator<char>(in),
               std::istreambuf_iterator<char>());

  if (r.buf.size() < sizeof(magic) + 8)
    throw IntegrityError("checkpoint too small to be valid");
  const std::size_t body = r.buf.size() - 4;
  std::uint32_t file_crc;
  std::memcpy(&file_crc, r.buf.data() + body, 4);
  file_crc = to_little(file_crc);
  if (crc32(r.buf.data(), body) != file_crc)
    throw IntegrityError("checkpoint file checksum mismatch");

  char m[sizeof(magic)];
  r.bytes(m, sizeof(magic));
  if (std::memcmp(m, magic, sizeof(magic)) != 0)
    throw IntegrityError("not a checkpoint file (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != checkpoint_version)
    throw VersionError("checkpoint version " + std::to_string(version) +
                       " is not supported (this build reads " +
                       std::to_string(checkpoint_version) + ")");

  LoadedCheckpoint out;
  out.meta = meta_from_json(nlohmann::json::parse(r.str()));

  const std::uint64_t vocab_size = r.u64();
  Vocab vocab;
  vocab.dim = out.meta.config.embed_dim;
  vocab.tokens.reserve(vocab_size);
  for (std::uint64_t i = 0; i < vocab_size; ++i) {
    vocab.tokens.push_back(r.str());
    vocab.index.emplace(vocab.tokens.back(), std::int32_t(i));
  }

  const std::uint64_t tensor_count = r.u64();
  std::vector<std::string> names;
  std::vector<std::uint8_t> trainable;
  std::vector<Tensor2D> tensors;
  for (std::uint64_t i = 0; i < tensor_count; ++i) {
    names.push_back(r.str());
    trainable.push_back(r.u8());
    tensors.push_back(r.tensor(names.back()));
  }

  // The embedding block seeds the vocabulary so the model can be rebuilt,
  // then every stored tensor overwrites the fresh initialization.
  Tensor2D* emb = nullptr;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == "embedding") emb = &tensors[i];
  if (!emb) throw IntegrityError("checkpoint lacks the embedding tensor");
  if (emb->rows() != vocab.tokens.size() || emb->cols() != vocab.dim)
    throw IntegrityError("embedding tensor is " + emb->shape_str() +
                         " but the vocabulary needs " +
                         std::to_string(vocab.tokens.size()) + "x" +
                         std::to_string(vocab.dim));
  vocab.embeddings = std::move(*emb);

  out.model =
      std::make_unique<SiameseModel>(out.meta.config, std::move(vocab));
  ParameterStore& store = out.model->params();
  if (store.count() != tensor_count)
    throw IntegrityError("checkpoint holds " + std::to_string(tensor_count) +
                         " tensors, model defines " +
                         std::to_string(store.count()));
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == "embedding") continue;
    Parameter* p = store.find(names[i]);
    if (!p)
      throw IntegrityError("checkpoint tensor " + names[i] +
                           " does not exist in this model");
    if (!p->value.same_shape(tensors[i]))
      throw IntegrityError("checkpoint tensor " + names[i] + " is " +
                           tensors[i].shape_str() + ", model wants " +
                           p->value.shape_str());
    if (bool(trainable[i]) != p->trainable)
      throw IntegrityError("checkpoint tensor " + names[i] +
                           " disagrees about trainability");
    p->value = std::move(tensors[i]);
  }

  if (r.u8()) {
    out.has_optimizer = true;
    const std::uint64_t n = r.u64();
    for (std::uint64_t i = 0; i < n; ++i) {
      std::string name = r.str();
      Tensor2D acc = r.tensor(name);
      out.optimizer_state.emplace(std::move(name), std::move(acc));
    }
  }

  const std::uint64_t rng_count = r.u64();
  for (std::uint64_t i = 0; i < rng_count; ++i) {
    std::string name = r.str();
    std::string state = r.str();
    out.rng_states.emplace_back(std::move(name), std::move(state));
  }
  return out;
}

}  // namespace entail
