#include "rockcap/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace rockcap::nn {

namespace {

constexpr char kMagic[8] = {'R', 'C', 'A', 'P', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  template <typename T>
  void put(T v) {
    out_.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void put_string(const std::string& s) {
    put<std::uint64_t>(s.size());
    out_ += s;
  }
  void put_vector(const Vector& v) {
    put<std::uint64_t>(v.size());
    for (int i = 0; i < v.size(); ++i) put<double>(v[i]);
  }
  void put_mlp(const Mlp& m) {
    put<std::uint32_t>(m.layers().size());
    for (const DenseLayer& l : m.layers()) {
      put<std::uint32_t>(l.weight.rows());
      put<std::uint32_t>(l.weight.cols());
      for (int r = 0; r < l.weight.rows(); ++r)
        for (int c = 0; c < l.weight.cols(); ++c) put<double>(l.weight(r, c));
      for (int r = 0; r < l.bias.size(); ++r) put<double>(l.bias[r]);
    }
  }
  void put_adam(const AdamState& a) {
    put<double>(a.lr);
    put<double>(a.beta1);
    put<double>(a.beta2);
    put<double>(a.eps);
    put<std::uint64_t>(a.step);
    put_vector(a.m);
    put_vector(a.v);
  }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint64_t>();
    need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  Vector get_vector() {
    const auto n = get<std::uint64_t>();
    need(n * sizeof(double));
    Vector v(n);
    for (std::uint64_t i = 0; i < n; ++i) v[i] = get<double>();
    return v;
  }
  Mlp get_mlp() {
    const auto layers = get<std::uint32_t>();
    if (layers == 0 || layers > 64) throw CheckpointFormatError("checkpoint: bad layer count");
    Mlp m;
    for (std::uint32_t i = 0; i < layers; ++i) {
      const auto rows = get<std::uint32_t>();
      const auto cols = get<std::uint32_t>();
      need(static_cast<std::uint64_t>(rows) * (cols + 1) * sizeof(double));
      DenseLayer l{Matrix(rows, cols), Vector(rows)};
      for (std::uint32_t r = 0; r < rows; ++r)
        for (std::uint32_t c = 0; c < cols; ++c) l.weight(r, c) = get<double>();
      for (std::uint32_t r = 0; r < rows; ++r) l.bias[r] = get<double>();
      if (!m.layers().empty() && m.layers().back().weight.rows() != l.weight.cols())
        throw CheckpointShapeError("checkpoint: inconsistent layer chain");
      m.layers().push_back(std::move(l));
    }
    return m;
  }
  AdamState get_adam() {
    AdamState a;
    a.lr = get<double>();
    a.beta1 = get<double>();
    a.beta2 = get<double>();
    a.eps = get<double>();
    a.step = get<std::uint64_t>();
    a.m = get_vector();
    a.v = get_vector();
    return a;
  }
  bool at_end() const { return pos_ == in_.size(); }

 private:
  void need(std::uint64_t n) const {
    if (n > in_.size() - pos_) throw CheckpointTruncatedError("checkpoint is truncated");
  }
  const std::string& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const Checkpoint& c) {
  Writer w;
  w.bytes().append(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put_mlp(c.policy.mean_net);
  w.put_vector(c.policy.log_std);
  w.put_mlp(c.value.net);
  w.put_adam(c.policy_adam);
  w.put_adam(c.value_adam);
  w.put<std::uint64_t>(c.metadata.total_steps);
  w.put<std::uint64_t>(c.metadata.seed);
  w.put_string(c.metadata.config_hash);
  w.put_string(c.metadata.version);
  w.put_string(c.metadata.extra);
  return std::move(w.bytes());
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw CheckpointFormatError("not a rockcap checkpoint (bad magic bytes)");
  const std::string body = bytes.substr(sizeof(kMagic));
  Reader r(body);
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw CheckpointVersionError("checkpoint format version " + std::to_string(version) +
                                 " is not supported (expected " +
                                 std::to_string(kCheckpointVersion) + ")");
  Checkpoint c;
  c.policy.mean_net = r.get_mlp();
  c.policy.log_std = r.get_vector();
  if (c.policy.log_std.size() != c.policy.mean_net.output_dim())
    throw CheckpointShapeError("checkpoint: log_std does not match the policy output");
  c.value.net = r.get_mlp();
  c.policy_adam = r.get_adam();
  c.value_adam = r.get_adam();
  c.metadata.total_steps = r.get<std::uint64_t>();
  c.metadata.seed = r.get<std::uint64_t>();
  c.metadata.config_hash = r.get_string();
  c.metadata.version = r.get_string();
  c.metadata.extra = r.get_string();
  if (!r.at_end()) throw CheckpointFormatError("checkpoint has trailing bytes");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  const std::string bytes = encode_checkpoint(c);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + tmp.string());
    out.write(bytes.data(), bytes.size());
    if (!out) throw std::runtime_error("failed writing checkpoint: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

void check_same_shapes(const Checkpoint& stored, const Checkpoint& slot) {
  auto describe = [](const std::vector<int>& s) {
    std::string out;
    for (int v : s) out += (out.empty() ? "" : "x") + std::to_string(v);
    return out;
  };
  if (stored.policy.mean_net.sizes() != slot.policy.mean_net.sizes())
    throw CheckpointShapeError("checkpoint policy is " + describe(stored.policy.mean_net.sizes()) +
                               ", expected " + describe(slot.policy.mean_net.sizes()));
  if (stored.value.net.sizes() != slot.value.net.sizes())
    throw CheckpointShapeError("checkpoint value net is " + describe(stored.value.net.sizes()) +
                               ", expected " + describe(slot.value.net.sizes()));
}

void load_checkpoint_into(const std::filesystem::path& path, Checkpoint& slot) {
  Checkpoint c = load_checkpoint(path);
  check_same_shapes(c, slot);
  slot = std::move(c);
}

}  // namespace rockcap::nn
