#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <string>
#include <vector>

#include "ringopt/errors.hpp"
#include "ringopt/qlearn/params.hpp"

namespace ringopt::qlearn {

namespace {

struct BlockShape {
  Eigen::Index rows;
  Eigen::Index cols;
  double fan_in;
};

std::array<BlockShape, EmbedParams::kBlockCount> block_shapes(const EmbedConfig& c) {
  const Eigen::Index p = c.p;
  const Eigen::Index h = c.h;
  return {{{1, 1, 1.0},
           {p, p, static_cast<double>(p)},
           {p, p, static_cast<double>(p)},
           {p, 1, 1.0},
           {p, p, static_cast<double>(p)},
           {p, p, static_cast<double>(p)},
           {p, p, static_cast<double>(p)},
           {h, 3 * p + 1, static_cast<double>(3 * p + 1)},
           {h, h, static_cast<double>(h)},
           {h, 1, static_cast<double>(h)}}};
}

void validate_config(const EmbedConfig& c) {
  if (c.p < 1 || c.h < 1 || c.t_embed < 1) {
    throw InvalidInput("embedding dimensions must be positive (p=" + std::to_string(c.p) + ", h=" +
                       std::to_string(c.h) + ", t_embed=" + std::to_string(c.t_embed) + ")");
  }
}

constexpr char kMagic[8] = {'R', 'I', 'N', 'G', 'Q', 'N', 'E', 'T'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::size_t kHeaderBytes = 8 + 7 * 4;

std::uint64_t fnv1a(const std::vector<unsigned char>& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char b : bytes) {
    hash ^= b;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

// Little-endian encoding regardless of host order.
template <typename T>
void put_le(std::vector<unsigned char>& buf, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) buf.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

template <typename T>
T get_le(const std::vector<unsigned char>& buf, std::size_t& pos) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(buf[pos + i]) << (8 * i);
  pos += sizeof(T);
  return std::bit_cast<T>(bits);
}

}  // namespace

EmbedParams EmbedParams::zeros(const EmbedConfig& config) {
  validate_config(config);
  EmbedParams params;
  params.config = config;
  const auto shapes = block_shapes(config);
  auto blocks = params.blocks();
  for (std::size_t i = 0; i < kBlockCount; ++i) *blocks[i] = Eigen::MatrixXd::Zero(shapes[i].rows, shapes[i].cols);
  return params;
}

EmbedParams EmbedParams::random(const EmbedConfig& config, Seed seed) {
  EmbedParams params = zeros(config);
  const auto shapes = block_shapes(config);
  auto blocks = params.blocks();
  Rng rng(seed);
  for (std::size_t i = 0; i < kBlockCount; ++i) {
    const double bound = 1.0 / std::sqrt(shapes[i].fan_in);
    auto& m = *blocks[i];
    // Row-major fill order so the draw sequence matches the file layout.
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = (2.0 * uniform01(rng) - 1.0) * bound;
    }
  }
  return params;
}

std::array<Eigen::MatrixXd*, EmbedParams::kBlockCount> EmbedParams::blocks() {
  return {&degree_scale, &neighbor_mix, &latency_mix, &latency_proj, &pooled_proj,
          &current_proj, &candidate_proj, &head_in, &head_hidden, &head_out};
}

std::array<const Eigen::MatrixXd*, EmbedParams::kBlockCount> EmbedParams::blocks() const {
  return {&degree_scale, &neighbor_mix, &latency_mix, &latency_proj, &pooled_proj,
          &current_proj, &candidate_proj, &head_in, &head_hidden, &head_out};
}

std::string_view EmbedParams::block_name(std::size_t index) {
  static constexpr std::array<std::string_view, kBlockCount> names = {
      "degree_scale", "neighbor_mix",   "latency_mix", "latency_proj", "pooled_proj",
      "current_proj", "candidate_proj", "head_in",     "head_hidden",  "head_out"};
  return names.at(index);
}

std::size_t EmbedParams::parameter_count() const {
  std::size_t total = 0;
  for (const auto* b : blocks()) total += static_cast<std::size_t>(b->size());
  return total;
}

bool EmbedParams::all_finite() const {
  return std::all_of(blocks().begin(), blocks().end(), [](const Eigen::MatrixXd* b) { return b->allFinite(); });
}

void EmbedParams::add_scaled(const EmbedParams& other, double scale) {
  auto mine = blocks();
  const auto theirs = other.blocks();
  for (std::size_t i = 0; i < kBlockCount; ++i) *mine[i] += scale * *theirs[i];
}

void EmbedParams::set_zero() {
  for (auto* b : blocks()) b->setZero();
}

bool operator==(const EmbedParams& a, const EmbedParams& b) {
  if (!(a.config == b.config)) return false;
  const auto ba = a.blocks();
  const auto bb = b.blocks();
  for (std::size_t i = 0; i < EmbedParams::kBlockCount; ++i) {
    if (ba[i]->rows() != bb[i]->rows() || ba[i]->cols() != bb[i]->cols() || *ba[i] != *bb[i]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Checkpoint I/O

void write_params(std::ostream& out, const EmbedParams& params) {
  std::vector<unsigned char> buf(std::begin(kMagic), std::end(kMagic));
  put_le(buf, kFormatVersion);
  put_le(buf, static_cast<std::uint32_t>(params.config.p));
  put_le(buf, static_cast<std::uint32_t>(params.config.h));
  put_le(buf, static_cast<std::uint32_t>(params.config.t_embed));
  put_le(buf, static_cast<std::uint32_t>(params.config.structure_range));
  put_le(buf, static_cast<std::uint32_t>(params.config.latency_range));
  put_le(buf, static_cast<std::uint32_t>(params.config.normalization));
  for (const auto* block : params.blocks()) {
    for (Eigen::Index r = 0; r < block->rows(); ++r) {
      for (Eigen::Index c = 0; c < block->cols(); ++c) put_le(buf, (*block)(r, c));
    }
  }
  put_le(buf, fnv1a(buf));
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw FormatError("failed writing checkpoint");
}

EmbedParams read_params(std::istream& in) {
  const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < kHeaderBytes + 8) {
    throw FormatError("checkpoint truncated: " + std::to_string(buf.size()) + " bytes");
  }
  if (std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0) throw FormatError("checkpoint has bad magic");
  std::size_t pos = sizeof(kMagic);
  const auto version = get_le<std::uint32_t>(buf, pos);
  if (version != kFormatVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version) + ", expected " +
                      std::to_string(kFormatVersion));
  }
  EmbedConfig config;
  config.p = static_cast<int>(get_le<std::uint32_t>(buf, pos));
  config.h = static_cast<int>(get_le<std::uint32_t>(buf, pos));
  config.t_embed = static_cast<int>(get_le<std::uint32_t>(buf, pos));
  const auto structure = get_le<std::uint32_t>(buf, pos);
  const auto latency = get_le<std::uint32_t>(buf, pos);
  const auto normalization = get_le<std::uint32_t>(buf, pos);
  if (structure > 1 || latency > 1 || normalization > 1) throw FormatError("checkpoint header has unknown enum values");
  if (config.p < 1 || config.h < 1 || config.t_embed < 1 || config.p > 4096 || config.h > 4096) {
    throw FormatError("checkpoint header has invalid dimensions");
  }
  config.structure_range = static_cast<NeighborRange>(structure);
  config.latency_range = static_cast<NeighborRange>(latency);
  config.normalization = static_cast<LatencyNormalization>(normalization);

  EmbedParams params = EmbedParams::zeros(config);
  const std::size_t expected = kHeaderBytes + 8 * params.parameter_count() + 8;
  if (buf.size() != expected) {
    throw FormatError("checkpoint size mismatch: expected " + std::to_string(expected) + " bytes, got " +
                      std::to_string(buf.size()));
  }
  const std::vector<unsigned char> payload(buf.begin(), buf.end() - 8);
  std::size_t tail = buf.size() - 8;
  if (get_le<std::uint64_t>(buf, tail) != fnv1a(payload)) throw FormatError("checkpoint checksum mismatch");
  for (auto* block : params.blocks()) {
    for (Eigen::Index r = 0; r < block->rows(); ++r) {
      for (Eigen::Index c = 0; c < block->cols(); ++c) (*block)(r, c) = get_le<double>(buf, pos);
    }
  }
  if (!params.all_finite()) throw FormatError("checkpoint contains non-finite parameters");
  return params;
}

void save_params(const std::filesystem::path& path, const EmbedParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write checkpoint " + path.string());
  write_params(out, params);
}

EmbedParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  try {
    return read_params(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

EmbedParams load_params(const std::filesystem::path& path, const EmbedConfig& expected) {
  EmbedParams params = load_params(path);
  const auto check = [&](const char* name, int want, int got) {
    if (want != got) {
      throw FormatError(path.string() + ": checkpoint " + name + " mismatch: expected " + std::to_string(want) +
                        ", actual " + std::to_string(got));
    }
  };
  check("p", expected.p, params.config.p);
  check("h", expected.h, params.config.h);
  check("t_embed", expected.t_embed, params.config.t_embed);
  return params;
}

}  // namespace ringopt::qlearn
