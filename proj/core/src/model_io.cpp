#include <algorithm>
#include <bit>
#include <cstring>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>
#include <zlib.h>

#include "ddmr/error.hpp"
#include "ddmr/pipeline.hpp"

namespace ddmr {

namespace {

using nlohmann::json;

constexpr const char* kMagic = "DDMRMODEL\n";

std::uint32_t checksum(const char* data, std::size_t size)
{
  return static_cast<std::uint32_t>(
    crc32(0L, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(size)));
}

template <class T>
void append_le(std::string& out, const T* values, std::size_t count)
{
  const std::size_t start = out.size();
  out.resize(start + count * sizeof(T));
  std::memcpy(out.data() + start, values, count * sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < count; ++i)
      std::reverse(out.begin() + start + i * sizeof(T), out.begin() + start + (i + 1) * sizeof(T));
  }
}

template <class T>
void read_le(const char* src, T* values, std::size_t count)
{
  std::memcpy(values, src, count * sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    auto* bytes = reinterpret_cast<char*>(values);
    for (std::size_t i = 0; i < count; ++i)
      std::reverse(bytes + i * sizeof(T), bytes + (i + 1) * sizeof(T));
  }
}

class Writer
{
public:
  void add(const std::string& name, const Eigen::MatrixXd& m)
  {
    const std::size_t offset = payload_.size();
    append_le(payload_, m.data(), static_cast<std::size_t>(m.size()));
    record(name, "f64", m.rows(), m.cols(), offset);
  }

  void add(const std::string& name, const Eigen::VectorXd& v)
  {
    const std::size_t offset = payload_.size();
    append_le(payload_, v.data(), static_cast<std::size_t>(v.size()));
    record(name, "f64", v.size(), 1, offset);
  }

  void add_ints(const std::string& name, const std::vector<std::int32_t>& v, Eigen::Index rows, Eigen::Index cols)
  {
    const std::size_t offset = payload_.size();
    append_le(payload_, v.data(), v.size());
    record(name, "i32", rows, cols, offset);
  }

  json& arrays() { return arrays_; }
  const std::string& payload() const { return payload_; }

private:
  void record(const std::string& name, const char* dtype, Eigen::Index rows, Eigen::Index cols, std::size_t offset)
  {
    const std::size_t bytes = payload_.size() - offset;
    arrays_.push_back({{"name", name},
                       {"dtype", dtype},
                       {"shape", {rows, cols}},
                       {"offset", offset},
                       {"bytes", bytes},
                       {"crc32", checksum(payload_.data() + offset, bytes)}});
  }

  json arrays_ = json::array();
  std::string payload_;
};

class Reader
{
public:
  Reader(const json& arrays, const char* payload, std::size_t size) : payload_(payload), size_(size)
  {
    for (const auto& a : arrays)
      index_[a.at("name").get<std::string>()] = a;
  }

  bool has(const std::string& name) const { return index_.count(name) > 0; }

  Eigen::MatrixXd matrix(const std::string& name) const
  {
    const json& a = entry(name, "f64");
    const auto rows = a["shape"][0].get<Eigen::Index>();
    const auto cols = a["shape"][1].get<Eigen::Index>();
    Eigen::MatrixXd m(rows, cols);
    read_le(payload_ + a["offset"].get<std::size_t>(), m.data(), static_cast<std::size_t>(m.size()));
    return m;
  }

  Eigen::VectorXd vector(const std::string& name) const
  {
    const Eigen::MatrixXd m = matrix(name);
    return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
  }

  std::vector<std::int32_t> ints(const std::string& name, Eigen::Index& rows, Eigen::Index& cols) const
  {
    const json& a = entry(name, "i32");
    rows = a["shape"][0].get<Eigen::Index>();
    cols = a["shape"][1].get<Eigen::Index>();
    std::vector<std::int32_t> v(static_cast<std::size_t>(rows * cols));
    read_le(payload_ + a["offset"].get<std::size_t>(), v.data(), v.size());
    return v;
  }

private:
  const json& entry(const std::string& name, const char* dtype) const
  {
    const auto it = index_.find(name);
    if (it == index_.end())
      throw FormatError("model file is missing array '" + name + "'");
    const json& a = it->second;
    if (a.at("dtype").get<std::string>() != dtype)
      throw FormatError("array '" + name + "' has the wrong dtype");
    const auto offset = a.at("offset").get<std::size_t>();
    const auto bytes = a.at("bytes").get<std::size_t>();
    const auto rows = a.at("shape")[0].get<std::size_t>();
    const auto cols = a.at("shape")[1].get<std::size_t>();
    const std::size_t width = std::string(dtype) == "f64" ? 8 : 4;
    if (offset + bytes > size_ || bytes != rows * cols * width)
      throw FormatError("array '" + name + "' lies outside the payload");
    if (checksum(payload_ + offset, bytes) != a.at("crc32").get<std::uint32_t>())
      throw FormatError("checksum mismatch in array '" + name + "'");
    return a;
  }

  const char* payload_;
  std::size_t size_;
  std::map<std::string, json> index_;
};

void write_kl(Writer& w, const std::string& prefix, const KLBasis& kl)
{
  w.add(prefix + "/lambdas", kl.lambdas);
  w.add(prefix + "/factor_x", kl.factor_x);
  w.add(prefix + "/factor_y", kl.factor_y);
  w.add(prefix + "/total_variance", Eigen::VectorXd(Eigen::VectorXd::Constant(1, kl.total_variance)));
  std::vector<std::int32_t> pairs;
  for (const auto& p : kl.pairs) {
    pairs.push_back(p[0]);
    pairs.push_back(p[1]);
  }
  w.add_ints(prefix + "/pairs", pairs, static_cast<Eigen::Index>(kl.pairs.size()), 2);
}

KLBasis read_kl(const Reader& r, const std::string& prefix, const CellGrid& grid, double corr_length)
{
  KLBasis kl;
  kl.grid = grid;
  kl.corr_length = corr_length;
  kl.lambdas = r.vector(prefix + "/lambdas");
  kl.factor_x = r.matrix(prefix + "/factor_x");
  kl.factor_y = r.matrix(prefix + "/factor_y");
  kl.total_variance = r.vector(prefix + "/total_variance")[0];
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  const auto pairs = r.ints(prefix + "/pairs", rows, cols);
  if (cols != 2 || rows != kl.lambdas.size() || kl.factor_x.rows() != grid.nx || kl.factor_y.rows() != grid.ny)
    throw FormatError("KL arrays under '" + prefix + "' have inconsistent shapes");
  for (Eigen::Index k = 0; k < rows; ++k) {
    const int a = pairs[2 * k];
    const int b = pairs[2 * k + 1];
    if (a < 0 || a >= kl.factor_x.cols() || b < 0 || b >= kl.factor_y.cols())
      throw FormatError("KL pair index out of range under '" + prefix + "'");
    kl.pairs.push_back({a, b});
  }
  rebuild_modes(kl);
  return kl;
}

std::string idx(const std::string& prefix, std::size_t i, const std::string& leaf)
{
  return prefix + "/" + std::to_string(i) + "/" + leaf;
}

} // namespace

std::string serialize_model(const ReducedModel& model)
{
  Writer w;
  const bool colored = model.config.noise == NoiseKind::colored;
  if (colored) {
    write_kl(w, "global_kl", model.global_kl);
    write_kl(w, "local_kl", model.local_kl);
    for (std::size_t s = 0; s < model.projectors.size(); ++s) {
      const LocalProjector& p = model.projectors[s];
      w.add(idx("projector", s, "points"), p.points);
      w.add(idx("projector", s, "global_values"), p.global_values);
      w.add(idx("projector", s, "local_values"), p.local_values);
    }
  }
  for (std::size_t g = 0; g < model.basis.group_bases.size(); ++g) {
    w.add(idx("basis/group", g, "vectors"), model.basis.group_bases[g]);
    w.add(idx("basis/group", g, "singular_values"), model.basis.group_singular_values[g]);
  }
  for (std::size_t s = 0; s < model.basis.interior_bases.size(); ++s) {
    w.add(idx("basis/interior", s, "vectors"), model.basis.interior_bases[s]);
    w.add(idx("basis/interior", s, "singular_values"), model.basis.interior_singular_values[s]);
  }
  for (std::size_t s = 0; s < model.loads.size(); ++s) {
    w.add(idx("loads", s, "f0"), model.loads[s].f0);
    w.add(idx("loads", s, "fb"), model.loads[s].fb);
  }
  if (model.has_surrogates()) {
    const IndexSet& set = model.index_set;
    std::vector<std::int32_t> indices;
    for (int i = 0; i < set.dim; ++i)
      for (const auto& nu : set.indices)
        indices.push_back(nu[i]);
    w.add_ints("surrogate/indices", indices, set.size(), set.dim);
    w.add("surrogate/weights", set.weights);
    for (std::size_t s = 0; s < model.surrogates.size(); ++s)
      w.add(idx("surrogate", s, "coefficients"), model.surrogates[s].coefficients);
  }

  std::size_t mesh_bytes = 0;
  for (const auto& a : w.arrays()) {
    const std::string name = a["name"];
    if (name.rfind("basis/", 0) == 0 || name.rfind("global_kl/", 0) == 0)
      mesh_bytes += a["bytes"].get<std::size_t>();
  }

  json manifest;
  manifest["format"] = "ddmr-model";
  manifest["format_version"] = kModelFormatVersion;
  manifest["fingerprint"] = model.fingerprint();
  manifest["config"] = model.config.canonical();
  manifest["order"] = model.index_set.order;
  manifest["has_surrogates"] = model.has_surrogates();
  manifest["arrays"] = w.arrays();
  manifest["payload_bytes"] = w.payload().size();
  manifest["payload_crc32"] = checksum(w.payload().data(), w.payload().size());
  manifest["mesh_dependent_bytes"] = mesh_bytes;
  manifest["mesh_independent_bytes"] = w.payload().size() - mesh_bytes;

  const std::string text = manifest.dump(1);
  std::string out = kMagic;
  out += std::to_string(text.size());
  out += "\n";
  out += text;
  out += "\n";
  out += w.payload();
  return out;
}

ReducedModel deserialize_model(const std::string& bytes)
{
  const std::size_t magic_len = std::strlen(kMagic);
  if (bytes.compare(0, magic_len, kMagic) != 0)
    throw FormatError("not a ddmr model file");
  const std::size_t eol = bytes.find('\n', magic_len);
  if (eol == std::string::npos)
    throw FormatError("truncated model header");
  std::size_t manifest_len = 0;
  try {
    manifest_len = std::stoul(bytes.substr(magic_len, eol - magic_len));
  } catch (const std::exception&) {
    throw FormatError("malformed manifest length");
  }
  const std::size_t manifest_start = eol + 1;
  if (manifest_start + manifest_len + 1 > bytes.size())
    throw FormatError("truncated model manifest");

  json manifest;
  try {
    manifest = json::parse(bytes.substr(manifest_start, manifest_len));
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model manifest: ") + e.what());
  }

  try {
    const int version = manifest.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw FormatError("model format version " + std::to_string(version) + " is not supported (expected "
                        + std::to_string(kModelFormatVersion) + ")");

    const std::size_t payload_start = manifest_start + manifest_len + 1;
    const char* payload = bytes.data() + payload_start;
    const std::size_t payload_size = bytes.size() - payload_start;
    if (payload_size != manifest.at("payload_bytes").get<std::size_t>())
      throw FormatError("model payload has the wrong size");
    if (checksum(payload, payload_size) != manifest.at("payload_crc32").get<std::uint32_t>())
      throw FormatError("model payload checksum mismatch");

    RunConfig config;
    try {
      config = RunConfig::parse(manifest.at("config").get<std::string>());
    } catch (const ConfigError& e) {
      throw FormatError(std::string("model config echo is invalid: ") + e.what());
    }
    if (config.fingerprint() != manifest.at("fingerprint").get<std::string>())
      throw FormatError("model fingerprint does not match its config echo");

    const Reader r(manifest.at("arrays"), payload, payload_size);
    ReducedModel model;
    model.config = config;
    model.mesh = build_mesh(config.n);
    model.partition = build_partition(model.mesh, config.sx, config.sy);
    const int S = model.partition.num_subdomains();

    if (config.noise == NoiseKind::colored) {
      model.global_kl = read_kl(r, "global_kl", mesh_cell_grid(model.mesh), config.corr_length);
      model.local_kl = read_kl(r, "local_kl", subdomain_cell_grid(model.mesh, model.partition, 0),
                               config.corr_length);
      model.projectors.resize(S);
      for (int s = 0; s < S; ++s) {
        LocalProjector& p = model.projectors[s];
        p.points = r.matrix(idx("projector", s, "points"));
        p.global_values = r.matrix(idx("projector", s, "global_values"));
        p.local_values = r.matrix(idx("projector", s, "local_values"));
        p.factorize();
      }
    } else {
      model.white_noise = make_white_noise(model.mesh, config.sx, config.sy, config.sigma);
    }

    for (std::size_t g = 0; g < model.partition.groups.size(); ++g) {
      model.basis.group_bases.push_back(r.matrix(idx("basis/group", g, "vectors")));
      model.basis.group_singular_values.push_back(r.vector(idx("basis/group", g, "singular_values")));
      if (model.basis.group_bases.back().rows() != model.partition.groups[g].size())
        throw FormatError("interface basis " + std::to_string(g) + " does not match the partition");
    }
    for (int s = 0; s < S; ++s) {
      model.basis.interior_bases.push_back(r.matrix(idx("basis/interior", s, "vectors")));
      model.basis.interior_singular_values.push_back(r.vector(idx("basis/interior", s, "singular_values")));
      if (model.basis.interior_bases.back().rows() != model.partition.subdomains[s].num_interior())
        throw FormatError("interior basis " + std::to_string(s) + " does not match the partition");
    }
    model.refresh_maps();

    if (r.has(idx("loads", 0, "f0"))) {
      model.loads.resize(S);
      for (int s = 0; s < S; ++s) {
        model.loads[s].f0 = r.vector(idx("loads", s, "f0"));
        model.loads[s].fb = r.vector(idx("loads", s, "fb"));
      }
    }

    if (manifest.at("has_surrogates").get<bool>()) {
      Eigen::Index rows = 0;
      Eigen::Index cols = 0;
      const auto indices = r.ints("surrogate/indices", rows, cols);
      IndexSet& set = model.index_set;
      set.dim = static_cast<int>(cols);
      set.order = manifest.at("order").get<int>();
      set.weights = r.vector("surrogate/weights");
      set.indices.assign(rows, std::vector<int>(cols));
      for (Eigen::Index i = 0; i < cols; ++i)
        for (Eigen::Index m = 0; m < rows; ++m)
          set.indices[m][i] = indices[i * rows + m];
      for (int s = 0; s < S; ++s) {
        SubdomainSurrogate sur;
        sur.layout = {model.basis.interior_rank(s), static_cast<int>(model.reduced_maps[s].size()),
                      model.loads_vary()};
        sur.coefficients = r.matrix(idx("surrogate", s, "coefficients"));
        if (sur.coefficients.rows() != rows || sur.coefficients.cols() != sur.layout.entries())
          throw FormatError("surrogate " + std::to_string(s) + " does not match the basis ranks");
        model.surrogates.push_back(std::move(sur));
      }
    }
    return model;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model manifest: ") + e.what());
  }
}

void save_model(const ReducedModel& model, const std::string& path)
{
  const std::string bytes = serialize_model(model);
  const std::string tmp = path + ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error("cannot open " + tmp + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
      throw Error("failed writing " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw Error("cannot move model into place at " + path);
}

ReducedModel load_model(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw FormatError("cannot open model file " + path);
  std::ostringstream bytes;
  bytes << in.rdbuf();
  return deserialize_model(bytes.str());
}

} // namespace ddmr
