#include "aitpr/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "aitpr/errors.hpp"
#include "aitpr/features_io.hpp"

namespace aitpr {

using nlohmann::json;

namespace {

class Writer {
 public:
  void bytes(std::string_view s) { out_.append(s.data(), s.size()); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str32(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }
  void str64(std::string_view s) {
    u64(s.size());
    bytes(s);
  }
  void array(std::string_view name, const Tensor& t) {
    str32(name);
    u32(static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) u64(d);
    for (double v : t.data()) f64(v);
  }
  std::string take() { return std::move(out_); }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::string_view bytes(std::size_t n, const char* what) {
    if (data_.size() - pos_ < n) throw FormatError(std::string("checkpoint truncated while reading ") + what);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint64_t le(int n, const char* what) {
    auto s = bytes(static_cast<std::size_t>(n), what);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[i])) << (8 * i);
    return v;
  }
  std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(le(4, what)); }
  std::uint64_t u64(const char* what) { return le(8, what); }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  std::string str32(const char* what) { return std::string(bytes(u32(what), what)); }
  std::string str64(const char* what) {
    const auto n = u64(what);
    return std::string(bytes(n, what));
  }
  std::pair<std::string, Tensor> array() {
    std::string name = str32("array name");
    const auto rank = u32("array rank");
    if (rank == 0 || rank > 2) throw FormatError("checkpoint array '" + name + "' has unsupported rank " + std::to_string(rank));
    Shape shape;
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      shape.push_back(u64("array dims"));
      if (shape.back() == 0 || shape.back() > (std::size_t{1} << 32)) {
        throw FormatError("checkpoint array '" + name + "' has invalid dimension");
      }
      count *= shape.back();
    }
    if ((data_.size() - pos_) / 8 < count) throw FormatError("checkpoint truncated in array '" + name + "'");
    std::vector<double> values(count);
    for (auto& v : values) v = f64("array data");
    return {std::move(name), Tensor(std::move(shape), std::move(values))};
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string moment_name(const char* kind, Param p) { return std::string("adam.") + kind + "/" + std::string(param_name(p)); }

}  // namespace

std::string encode_checkpoint(const TrainState& state, const Vocabulary& vocab) {
  const bool has_moments = !state.adam.m.empty();
  json header;
  header["format_version"] = kCheckpointFormatVersion;
  header["config"] = json::parse(state.config.to_json());
  header["epoch"] = state.epoch;
  header["adam_step"] = state.adam.step;
  header["array_count"] = kParamCount * (has_moments ? 3 : 1);
  header["vocab"] = vocab.words();
  header["loss_trace"] = state.loss_trace;

  Writer w;
  w.bytes(kCheckpointMagic);
  w.str64(header.dump());
  for (std::size_t i = 0; i < kParamCount; ++i) {
    const auto p = static_cast<Param>(i);
    w.array(param_name(p), state.params[p]);
  }
  if (has_moments) {
    for (std::size_t i = 0; i < kParamCount; ++i) w.array(moment_name("m", static_cast<Param>(i)), state.adam.m[i]);
    for (std::size_t i = 0; i < kParamCount; ++i) w.array(moment_name("v", static_cast<Param>(i)), state.adam.v[i]);
  }
  std::ostringstream rng;
  rng << state.rng;
  w.str64(rng.str());
  return w.take();
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (bytes.size() < kCheckpointMagic.size() || bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) {
    throw FormatError("not a checkpoint: bad magic bytes");
  }
  r.bytes(kCheckpointMagic.size(), "magic");

  json header;
  try {
    header = json::parse(r.str64("header"));
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }
  const int version = header.value("format_version", -1);
  if (version != kCheckpointFormatVersion) {
    throw VersionError("checkpoint format version " + std::to_string(version) + " is not supported (this build reads version " +
                       std::to_string(kCheckpointFormatVersion) + ")");
  }

  Checkpoint ck;
  try {
    ck.state.config = TrainConfig::from_json(header.at("config").dump());
    ck.state.epoch = header.at("epoch").get<std::size_t>();
    ck.state.adam.step = header.at("adam_step").get<std::uint64_t>();
    ck.state.loss_trace = header.at("loss_trace").get<std::vector<double>>();
    ck.vocab = Vocabulary::from_words(header.at("vocab").get<std::vector<std::string>>());
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint header is incomplete: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint config is invalid: ") + e.what());
  }
  const auto array_count = header.value("array_count", std::size_t{0});

  std::map<std::string, Tensor> arrays;
  for (std::size_t i = 0; i < array_count; ++i) {
    auto [name, tensor] = r.array();
    arrays.emplace(std::move(name), std::move(tensor));
  }
  std::istringstream rng(r.str64("rng state"));
  rng >> ck.state.rng;
  if (!rng) throw FormatError("checkpoint RNG state is malformed");
  if (!r.done()) throw FormatError("checkpoint has trailing bytes");

  const ModelDims dims = ck.state.config.dims;
  ck.state.params = ModelParams(dims);
  for (std::size_t i = 0; i < kParamCount; ++i) {
    const auto p = static_cast<Param>(i);
    auto it = arrays.find(std::string(param_name(p)));
    if (it == arrays.end()) throw FormatError("checkpoint is missing parameter " + std::string(param_name(p)));
    try {
      ck.state.params.set(p, std::move(it->second));
    } catch (const DimensionError& e) {
      throw FormatError(std::string("checkpoint: ") + e.what());
    }
  }
  if (ck.state.adam.step > 0) {
    for (const char* kind : {"m", "v"}) {
      auto& dest = std::string_view(kind) == "m" ? ck.state.adam.m : ck.state.adam.v;
      for (std::size_t i = 0; i < kParamCount; ++i) {
        const auto p = static_cast<Param>(i);
        auto it = arrays.find(moment_name(kind, p));
        if (it == arrays.end()) {
          throw VersionError("checkpoint lacks optimizer moments (" + moment_name(kind, p) + "); format version " +
                             std::to_string(version) + " requires them, expected layout of version " +
                             std::to_string(kCheckpointFormatVersion));
        }
        if (it->second.shape() != ck.state.params[p].shape()) {
          throw FormatError("checkpoint moment " + moment_name(kind, p) + " has the wrong shape");
        }
        dest.push_back(std::move(it->second));
      }
    }
  }
  if (ck.vocab.size() != dims.vocab) {
    throw FormatError("checkpoint vocabulary has " + std::to_string(ck.vocab.size()) + " ids but the model expects " +
                      std::to_string(dims.vocab));
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const TrainState& state, const Vocabulary& vocab) {
  write_file_atomically(path, encode_checkpoint(state, vocab));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

}  // namespace aitpr
