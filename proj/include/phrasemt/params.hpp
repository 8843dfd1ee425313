#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "phrasemt/errors.hpp"
#include "phrasemt/rng.hpp"
#include "phrasemt/tensor.hpp"

namespace phrasemt {

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> values;
  Tensor<T> gradient;

  Parameter(std::string n, Tensor<T> v)
      : name(std::move(n)), values(std::move(v)), gradient(Tensor<T>::zeros(values.shape)) {}
};

template <typename T>
constexpr const char* dtype_name() {
  if constexpr (std::is_same_v<T, float>) return "float32";
  else return "float64";
}

// Owns every trainable tensor of a model.  Creation order is fixed by the
// model constructor, which makes iteration (and therefore optimizer updates
// and checkpoints) deterministic.
template <typename T>
class ParamStore {
 public:
  Parameter<T>& create(const std::string& name, std::vector<long> shape) {
    if (index_.count(name)) throw ConfigError("duplicate parameter name: " + name);
    params_.push_back(std::make_unique<Parameter<T>>(name, Tensor<T>::zeros(std::move(shape))));
    index_[name] = params_.size() - 1;
    return *params_.back();
  }

  // U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for linear maps.
  Parameter<T>& create_linear_weight(const std::string& name, long out, long in, RngState& rng) {
    Parameter<T>& p = create(name, {out, in});
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (auto& x : p.values.data) x = static_cast<T>(rng.uniform(-bound, bound));
    return p;
  }

  // N(0, 0.02) for embedding tables.
  Parameter<T>& create_embedding(const std::string& name, long vocab, long dim, RngState& rng) {
    Parameter<T>& p = create(name, {vocab, dim});
    for (auto& x : p.values.data) x = static_cast<T>(0.02 * rng.normal());
    return p;
  }

  Parameter<T>& create_ones(const std::string& name, std::vector<long> shape) {
    Parameter<T>& p = create(name, std::move(shape));
    p.values.fill(T(1));
    return p;
  }

  Parameter<T>& get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
    return *params_[it->second];
  }

  bool has(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const { return params_.size(); }
  Parameter<T>& at(std::size_t i) { return *params_[i]; }
  const Parameter<T>& at(std::size_t i) const { return *params_[i]; }

  void zero_grads() {
    for (auto& p : params_) p->gradient.fill(T(0));
  }

  long total_values() const {
    long n = 0;
    for (const auto& p : params_) n += p->values.numel();
    return n;
  }

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
  std::map<std::string, std::size_t> index_;
};

// Checkpoint archive: magic, little-endian u64 header length, JSON header
// (shapes, dtype, seed, step count, array offsets), then the raw arrays.
namespace ckpt {

inline constexpr char kMagic[8] = {'P', 'M', 'T', 'C', 'K', 'P', 'T', '1'};

struct Meta {
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
};

template <typename T>
void save(const ParamStore<T>& store, const std::string& path, const Meta& meta) {
  nlohmann::ordered_json header;
  header["format_version"] = 1;
  header["dtype"] = dtype_name<T>();
  header["seed"] = meta.seed;
  header["step"] = meta.step;
  nlohmann::ordered_json arrays = nlohmann::ordered_json::array();
  std::uint64_t offset = 0;
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& p = store.at(i);
    nlohmann::ordered_json a;
    a["name"] = p.name;
    a["shape"] = p.values.shape;
    a["offset"] = offset;
    arrays.push_back(a);
    offset += static_cast<std::uint64_t>(p.values.numel()) * sizeof(T);
  }
  header["arrays"] = arrays;
  const std::string hs = header.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  const std::uint64_t hlen = hs.size();
  os.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& p = store.at(i);
    os.write(reinterpret_cast<const char*>(p.values.data.data()),
             static_cast<std::streamsize>(p.values.numel() * sizeof(T)));
  }
  if (!os) throw IoError("checkpoint write failed: " + path);
}

struct RawArchive {
  nlohmann::json header;
  std::vector<std::vector<double>> arrays;  // in header order, widened to double
  std::vector<std::vector<long>> shapes;
  std::vector<std::string> names;
};

inline RawArchive read_raw(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ParseError("not a checkpoint archive: " + path);
  std::uint64_t hlen = 0;
  is.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string hs(hlen, '\0');
  is.read(hs.data(), static_cast<std::streamsize>(hlen));
  RawArchive ar;
  try {
    ar.header = nlohmann::json::parse(hs);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad checkpoint header: ") + e.what());
  }
  const std::string dtype = ar.header.at("dtype").get<std::string>();
  const bool f32 = dtype == "float32";
  if (!f32 && dtype != "float64") throw ParseError("unknown checkpoint dtype: " + dtype);
  for (const auto& a : ar.header.at("arrays")) {
    ar.names.push_back(a.at("name").get<std::string>());
    ar.shapes.push_back(a.at("shape").get<std::vector<long>>());
    long n = 1;
    for (long d : ar.shapes.back()) n *= d;
    std::vector<double> vals(static_cast<std::size_t>(n));
    if (f32) {
      std::vector<float> buf(static_cast<std::size_t>(n));
      is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(float)));
      for (long i = 0; i < n; ++i) vals[i] = buf[i];
    } else {
      is.read(reinterpret_cast<char*>(vals.data()), static_cast<std::streamsize>(n * sizeof(double)));
    }
    if (!is) throw ParseError("checkpoint truncated: " + path);
    ar.arrays.push_back(std::move(vals));
  }
  return ar;
}

// Loads values into an already-constructed store; shapes must agree exactly.
template <typename T>
Meta load(ParamStore<T>& store, const std::string& path) {
  RawArchive ar = read_raw(path);
  if (ar.header.at("dtype").get<std::string>() != dtype_name<T>())
    throw ConfigError("checkpoint dtype " + ar.header.at("dtype").get<std::string>() +
                      " does not match model dtype " + dtype_name<T>());
  if (ar.names.size() != store.size())
    throw ConfigError("checkpoint has " + std::to_string(ar.names.size()) + " arrays, model has " +
                      std::to_string(store.size()));
  for (std::size_t i = 0; i < ar.names.size(); ++i) {
    Parameter<T>& p = store.get(ar.names[i]);
    if (p.values.shape != ar.shapes[i])
      throw ShapeError("checkpoint shape mismatch for parameter " + p.name);
    for (long j = 0; j < p.values.numel(); ++j) p.values.at(j) = static_cast<T>(ar.arrays[i][j]);
  }
  Meta meta;
  meta.seed = ar.header.value("seed", 0ULL);
  meta.step = ar.header.value("step", 0ULL);
  return meta;
}

// Arithmetic mean of every array across the given archives, loaded into the
// store.  Shape disagreements name the offending parameter.
template <typename T>
void load_averaged(ParamStore<T>& store, const std::vector<std::string>& paths) {
  if (paths.empty()) throw ConfigError("average: need at least one checkpoint");
  RawArchive first = read_raw(paths[0]);
  for (std::size_t k = 1; k < paths.size(); ++k) {
    RawArchive ar = read_raw(paths[k]);
    if (ar.names != first.names) throw ConfigError("average: parameter sets differ across checkpoints");
    for (std::size_t i = 0; i < ar.arrays.size(); ++i) {
      if (ar.shapes[i] != first.shapes[i])
        throw ShapeError("average: shape mismatch for parameter " + ar.names[i]);
      for (std::size_t j = 0; j < ar.arrays[i].size(); ++j) first.arrays[i][j] += ar.arrays[i][j];
    }
  }
  const double inv = 1.0 / static_cast<double>(paths.size());
  if (first.names.size() != store.size()) throw ConfigError("average: arity mismatch with model");
  for (std::size_t i = 0; i < first.names.size(); ++i) {
    Parameter<T>& p = store.get(first.names[i]);
    if (p.values.shape != first.shapes[i])
      throw ShapeError("average: shape mismatch for parameter " + p.name);
    for (long j = 0; j < p.values.numel(); ++j)
      p.values.at(j) = static_cast<T>(first.arrays[i][j] * inv);
  }
}

}  // namespace ckpt
}  // namespace phrasemt
