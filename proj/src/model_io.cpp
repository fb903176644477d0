#include "mlr/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace mlr {

namespace {

constexpr char kMagic[4] = {'M', 'L', 'R', '1'};
constexpr std::uint32_t kVersion = 1;
// Guards against allocating absurd sizes from a corrupted header.
constexpr std::uint64_t kMaxCount = std::uint64_t{1} << 32;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u32(std::uint32_t v) { bytes(v, 4); }
  void u64(std::uint64_t v) { bytes(v, 8); }
  void f64(double v) { bytes(std::bit_cast<std::uint64_t>(v), 8); }
  void str(const std::string& s) {
    u64(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void matrix(const Matrix& m) {
    u64(m.rows());
    u64(m.cols());
    for (Real v : m.flat()) f64(static_cast<double>(v));
  }

 private:
  void bytes(std::uint64_t v, int n) {
    char buf[8];
    for (int i = 0; i < n; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out_.write(buf, n);
  }
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(bytes(4)); }
  std::uint64_t u64() { return bytes(8); }
  double f64() { return std::bit_cast<double>(bytes(8)); }
  std::uint64_t count(const char* what) {
    const auto n = u64();
    if (n > kMaxCount) throw Error(ErrorCode::BadModelFile, std::string("implausible ") + what + " count");
    return n;
  }
  std::string str() {
    std::string s(count("string length"), '\0');
    in_.read(s.data(), static_cast<std::streamsize>(s.size()));
    check("string");
    return s;
  }
  Matrix matrix() {
    const auto rows = count("row");
    const auto cols = count("column");
    if (rows * cols > kMaxCount) throw Error(ErrorCode::BadModelFile, "implausible matrix size");
    Matrix m(rows, cols);
    for (auto& v : m.flat()) v = static_cast<Real>(f64());
    return m;
  }
  void check(const char* what) {
    if (!in_) throw Error(ErrorCode::BadModelFile, std::string("truncated model file while reading ") + what);
  }

 private:
  std::uint64_t bytes(int n) {
    unsigned char buf[8] = {};
    in_.read(reinterpret_cast<char*>(buf), n);
    check("a number");
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }
  std::istream& in_;
};

template <typename E>
E enum_from(std::uint32_t v, std::uint32_t max, const char* what) {
  if (v > max) throw Error(ErrorCode::BadModelFile, std::string("bad ") + what + " tag " + std::to_string(v));
  return static_cast<E>(v);
}

void write_transform(Writer& w, const FittedTransform& t) {
  w.u64(t.features.size());
  for (const auto& f : t.features) {
    w.str(f.name);
    w.u32(static_cast<std::uint32_t>(f.encoding));
    w.u32(f.numeric_source ? 1 : 0);
    w.f64(f.mean);
    w.f64(f.scale);
    w.u64(f.categories.size());
    for (const auto& c : f.categories) w.str(c);
  }
  w.u64(t.dropped.size());
  for (const auto& d : t.dropped) w.str(d);
  w.str(t.target_name);
  w.u32(static_cast<std::uint32_t>(t.task));
  w.f64(t.target_mean);
  w.f64(t.target_scale);
  w.u64(t.class_labels.size());
  for (const auto& c : t.class_labels) w.str(c);
}

FittedTransform read_transform(Reader& r) {
  FittedTransform t;
  t.features.resize(r.count("feature"));
  for (auto& f : t.features) {
    f.name = r.str();
    f.encoding = enum_from<Encoding>(r.u32(), 2, "encoding");
    f.numeric_source = r.u32() != 0;
    f.mean = r.f64();
    f.scale = r.f64();
    f.categories.resize(r.count("category"));
    for (auto& c : f.categories) c = r.str();
  }
  t.dropped.resize(r.count("dropped column"));
  for (auto& d : t.dropped) d = r.str();
  t.target_name = r.str();
  t.task = enum_from<TaskKind>(r.u32(), 1, "task");
  t.target_mean = r.f64();
  t.target_scale = r.f64();
  t.class_labels.resize(r.count("class label"));
  for (auto& c : t.class_labels) c = r.str();
  return t;
}

}  // namespace

Matrix SavedModel::predict(const Matrix& x) const {
  if (members.empty()) throw Error(ErrorCode::EmptyEnsemble, "model file has no members");
  std::vector<Matrix> preds;
  preds.reserve(members.size());
  for (const auto& m : members) preds.push_back(m.predict(x));
  return aggregate_predictions(preds, validation_scores, kind, task);
}

SavedModel saved_model_from(const Ensemble& ensemble, const FittedTransform& transform) {
  SavedModel s;
  s.kind = ensemble.kind;
  s.task = ensemble.task;
  s.transform = transform;
  for (const auto& m : ensemble.members) {
    if (m.failed) continue;
    s.members.push_back(m.result.model);
    s.validation_scores.push_back(m.validation_score());
  }
  if (s.members.empty()) throw Error(ErrorCode::EmptyEnsemble, "ensemble has no trained members");
  return s;
}

void save_model(const SavedModel& model, std::ostream& out) {
  if (model.members.size() != model.validation_scores.size()) {
    throw Error(ErrorCode::ShapeMismatch, "one validation score per member is required");
  }
  Writer w(out);
  out.write(kMagic, 4);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(model.task));
  w.u32(static_cast<std::uint32_t>(model.kind));
  w.u64(model.members.size());
  for (std::size_t i = 0; i < model.members.size(); ++i) {
    const auto& m = model.members[i];
    if (!m.finalized) throw Error(ErrorCode::NotFinalized, "cannot save an unfinalized model");
    const auto& p = m.params;
    w.u32(static_cast<std::uint32_t>(p.depth));
    w.u32(static_cast<std::uint32_t>(m.head));
    w.u64(p.input_dim);
    w.u64(p.width);
    w.u64(p.weights.size());
    w.f64(model.validation_scores[i]);
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
      w.matrix(p.weights[l]);
      w.matrix(p.biases[l]);
    }
    w.matrix(p.output);
    w.f64(static_cast<double>(p.log_lambda));
    w.matrix(m.output_weights);
  }
  write_transform(w, model.transform);
  if (!out) throw Error(ErrorCode::IoError, "failed to write model");
}

void save_model(const SavedModel& model, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  save_model(model, f);
}

SavedModel load_model(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw Error(ErrorCode::BadModelFile, "missing MLR1 magic");
  Reader r(in);
  const auto version = r.u32();
  if (version != kVersion) throw Error(ErrorCode::BadModelFile, "unsupported format version " + std::to_string(version));
  SavedModel s;
  s.task = enum_from<TaskKind>(r.u32(), 1, "task");
  s.kind = enum_from<EnsembleKind>(r.u32(), 4, "ensemble kind");
  const auto members = r.count("member");
  for (std::uint64_t i = 0; i < members; ++i) {
    TrainedModel m;
    m.task = s.task;
    m.finalized = true;
    auto& p = m.params;
    p.depth = static_cast<int>(r.u32());
    if (p.depth < 1 || p.depth > 4) throw Error(ErrorCode::BadModelFile, "bad depth " + std::to_string(p.depth));
    m.head = enum_from<HeadKind>(r.u32(), 1, "head");
    p.input_dim = r.count("input");
    p.width = r.count("width");
    const auto layers = r.count("layer");
    if (layers != static_cast<std::uint64_t>(p.depth - 1)) throw Error(ErrorCode::BadModelFile, "layer count does not match depth");
    s.validation_scores.push_back(r.f64());
    for (std::uint64_t l = 0; l < layers; ++l) {
      p.weights.push_back(r.matrix());
      p.biases.push_back(r.matrix());
    }
    p.output = r.matrix();
    p.log_lambda = static_cast<Real>(r.f64());
    m.output_weights = r.matrix();
    if (m.output_weights.rows() != p.feature_width() && m.head == HeadKind::Ridge) {
      throw Error(ErrorCode::BadModelFile, "output weights do not match the network width");
    }
    s.members.push_back(std::move(m));
  }
  s.transform = read_transform(r);
  if (s.transform.output_dim() != (s.members.empty() ? 0 : s.members.front().params.input_dim)) {
    throw Error(ErrorCode::BadModelFile, "transform width does not match the network input");
  }
  return s;
}

SavedModel load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  return load_model(f);
}

}  // namespace mlr
